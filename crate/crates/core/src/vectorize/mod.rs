//! Per-user feature vectors: profile, activity, interaction, relation, text
//! and sentiment families computed over the store as of a timestamp.

pub mod activity;
pub mod interaction;
pub mod lexicon;
pub mod profile;
pub mod relation;
pub mod stats;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphmine::follow_snapshot;
use crate::model::{FollowDirection, FollowEdge, FollowScan, Timestamp, Tweet, UserClass, UserId, UserSnapshot};
use crate::store::Store;

pub use activity::{activity_features, ActivityFeatures, DayStats};
pub use interaction::{interaction_features, InteractionFamily, InteractionFeatures, InteractionIndex};
pub use lexicon::{Gender, Lexicons};
pub use profile::{profile_features, ProfileFeatures};
pub use relation::{jaccard, relation_features, FavoriteIndex, FollowIndex, RelationFeatures};
pub use stats::{IntervalHistogram, Summary};
pub use text::{
    sentiment_features, text_features, tokenize, EntityOverlap, LexicalGender, SentimentFeatures, SentimentMeans,
    TextFeatures, Token,
};

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("missing lexicon `{0}`")]
    MissingLexicon(String),
    #[error("{file}:{line}: {msg}")]
    Lexicon { file: String, line: usize, msg: String },
    #[error("empty interval [{from}, {to}]")]
    InvalidInterval { from: Timestamp, to: Timestamp },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: UserId,
    /// Missing when no profile snapshot was observed by `vector_timestamp`.
    pub profile: Option<ProfileFeatures>,
    pub activity: ActivityFeatures,
    pub interaction: InteractionFeatures,
    pub relation: RelationFeatures,
    pub text: TextFeatures,
    pub sentiment: SentimentFeatures,
    /// Start of the tweet window for interval vectors.
    pub interval_start: Option<Timestamp>,
    pub vector_timestamp: Timestamp,
}

/// Data cut-off of a vector: tweets created in `[from, to]` (no lower bound
/// when `from` is `None`), every other record observed at or before `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Window {
    pub from: Option<Timestamp>,
    pub to: Timestamp,
}

impl Window {
    pub fn as_of(t: Timestamp) -> Window {
        Window { from: None, to: t }
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        t <= self.to && self.from.is_none_or(|f| t >= f)
    }
}

/// Everything the family operations read, restricted to a window.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets_by: BTreeMap<UserId, Vec<Tweet>>,
    gone_by: BTreeMap<UserId, u64>,
    snapshots: BTreeMap<UserId, UserSnapshot>,
    classes: BTreeMap<UserId, UserClass>,
    interactions: InteractionIndex,
    follows: FollowIndex,
    favorites: FavoriteIndex,
    scans: BTreeMap<(UserId, FollowDirection), Timestamp>,
    known: BTreeSet<UserId>,
}

impl Corpus {
    pub fn build(store: &Store, w: Window) -> Corpus {
        let mut c = Corpus::default();
        let mut all: Vec<Tweet> = Vec::new();
        store.for_each_tweet(|t| {
            c.known.insert(t.author);
            if w.contains(t.created_at) {
                all.push(t.clone());
            }
        });
        all.sort_by_key(|t| (t.created_at, t.id));
        c.interactions = InteractionIndex::build(&all);
        for t in all {
            c.tweets_by.entry(t.author).or_default().push(t);
        }
        for g in store.gone() {
            if g.observed_at <= w.to && w.contains(g.tweet.timestamp()) {
                *c.gone_by.entry(g.author).or_default() += 1;
            }
        }
        for u in store.known_users() {
            c.known.insert(u);
            if let Some(s) = store.snapshot_history(u).into_iter().rev().find(|s| s.observed_at <= w.to) {
                c.snapshots.insert(u, s);
            }
        }
        for tr in store.class_history() {
            if tr.at <= w.to {
                c.classes.insert(tr.user, tr.to);
            }
        }
        c.known.extend(store.classes().into_keys());
        c.known.extend(store.crawl_states().into_iter().map(|s| s.user));
        let edges: Vec<FollowEdge> = store.follow_edges().into_iter().filter(|e| e.observed_at <= w.to).collect();
        let scans: Vec<FollowScan> = store.follow_scans().into_iter().filter(|s| s.observed_at <= w.to).collect();
        for s in &scans {
            let e = c.scans.entry((s.user, s.direction)).or_insert(s.observed_at);
            *e = (*e).max(s.observed_at);
        }
        c.follows = FollowIndex::build(&follow_snapshot(&edges, &scans, w.to), &edges);
        let favs: Vec<_> = store.favorites().into_iter().filter(|f| f.observed_at <= w.to).collect();
        c.favorites = FavoriteIndex::build(&favs);
        c
    }

    pub fn is_known(&self, u: UserId) -> bool {
        self.known.contains(&u)
    }

    pub fn tweets_of(&self, u: UserId) -> &[Tweet] {
        self.tweets_by.get(&u).map_or(&[], Vec::as_slice)
    }

    /// Runs every family operation for `u`.
    pub fn vector(&self, u: UserId, w: Window, lex: &Lexicons, target_lang: &str) -> Result<FeatureVector, VectorizeError> {
        if !self.is_known(u) {
            return Err(VectorizeError::UnknownUser(u));
        }
        let tweets = self.tweets_of(u);
        let class = self.classes.get(&u).copied().unwrap_or_default();
        let snap = self.snapshots.get(&u);
        let scanned = (
            self.scans.get(&(u, FollowDirection::Friends)).copied(),
            self.scans.get(&(u, FollowDirection::Followers)).copied(),
        );
        Ok(FeatureVector {
            id: u,
            profile: snap.map(|s| profile_features(s, class)),
            activity: activity_features(
                tweets,
                self.gone_by.get(&u).copied().unwrap_or(0),
                snap.map(|s| s.created_at),
                w.to,
                target_lang,
            ),
            interaction: interaction_features(u, &self.interactions, tweets),
            relation: relation_features(u, &self.follows, &self.classes, &self.favorites, scanned),
            text: text_features(tweets, snap.map(|s| s.screen_name.as_str()), lex),
            sentiment: sentiment_features(tweets, lex)?,
            interval_start: w.from,
            vector_timestamp: w.to,
        })
    }
}

/// Computes vectors over a store, caching them per user and window until
/// the store is written to again.
pub struct Vectorizer<'s> {
    store: &'s Store,
    lex: Lexicons,
    target_lang: String,
    corpus: Option<(Window, u64, Corpus)>,
    cache: BTreeMap<(UserId, Window), (u64, FeatureVector)>,
    hits: u64,
}

impl<'s> Vectorizer<'s> {
    pub fn new(store: &'s Store, lex: Lexicons, target_lang: impl Into<String>) -> Vectorizer<'s> {
        Vectorizer { store, lex, target_lang: target_lang.into(), corpus: None, cache: BTreeMap::new(), hits: 0 }
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lex
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits
    }

    pub fn assemble(&mut self, u: UserId, as_of: Timestamp) -> Result<FeatureVector, VectorizeError> {
        self.assemble_window(u, Window::as_of(as_of))
    }

    /// Vector over tweets created in `[from, to]`.
    pub fn assemble_interval(&mut self, u: UserId, from: Timestamp, to: Timestamp) -> Result<FeatureVector, VectorizeError> {
        if from > to {
            return Err(VectorizeError::InvalidInterval { from, to });
        }
        self.assemble_window(u, Window { from: Some(from), to })
    }

    pub fn assemble_window(&mut self, u: UserId, w: Window) -> Result<FeatureVector, VectorizeError> {
        let generation = self.store.generation();
        if let Some((g, v)) = self.cache.get(&(u, w)) {
            if *g == generation {
                self.hits += 1;
                return Ok(v.clone());
            }
        }
        let stale = self.corpus.as_ref().is_none_or(|(cw, g, _)| *cw != w || *g != generation);
        if stale {
            self.corpus = Some((w, generation, Corpus::build(self.store, w)));
        }
        let (_, _, corpus) = self.corpus.as_ref().expect("corpus built");
        let v = corpus.vector(u, w, &self.lex, &self.target_lang)?;
        self.cache.insert((u, w), (generation, v.clone()));
        Ok(v)
    }

    /// Vectors of every user in `users`, in order.
    pub fn assemble_many(&mut self, users: &[UserId], as_of: Timestamp) -> Result<Vec<FeatureVector>, VectorizeError> {
        users.iter().map(|&u| self.assemble(u, as_of)).collect()
    }
}

/// One vector per line.
pub fn write_jsonl(vectors: &[FeatureVector], mut out: impl Write) -> io::Result<()> {
    for v in vectors {
        serde_json::to_writer(&mut out, v)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
