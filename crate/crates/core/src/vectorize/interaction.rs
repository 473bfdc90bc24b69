use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graphmine::{extract_interactions, Graph};
use crate::model::{Tweet, TweetId, UserId};

use super::activity::TOP_K;
use super::stats::{pcnt, ratio, top_k};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionFamily {
    pub indegree: u64,
    pub outdegree: u64,
    pub inweight: u64,
    pub outweight: u64,
    pub avg_inweight: Option<f64>,
    pub avg_outweight: Option<f64>,
    pub out_in_ratio: Option<f64>,
    pub pcnt: Option<f64>,
    /// Users this user interacted with most.
    pub most_out: Vec<(UserId, u64)>,
    /// Users that interacted with this user most.
    pub most_in: Vec<(UserId, u64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionFeatures {
    pub mention: InteractionFamily,
    pub retweet: InteractionFamily,
    pub reply: InteractionFamily,
    pub seen_replied_to: u64,
    pub most_engaging_tweet: Option<TweetId>,
}

#[derive(Debug, Clone, Default)]
struct Adjacency {
    out: BTreeMap<UserId, BTreeMap<UserId, u64>>,
    inn: BTreeMap<UserId, BTreeMap<UserId, u64>>,
}

impl Adjacency {
    fn of(g: &Graph) -> Adjacency {
        let mut a = Adjacency::default();
        for (&(s, d), &w) in &g.edges {
            if s != d {
                a.out.entry(s).or_default().insert(d, w);
                a.inn.entry(d).or_default().insert(s, w);
            }
        }
        a
    }

    fn family(&self, u: UserId, events: u64, seen_total: u64) -> InteractionFamily {
        let empty = BTreeMap::new();
        let out = self.out.get(&u).unwrap_or(&empty);
        let inn = self.inn.get(&u).unwrap_or(&empty);
        let (od, id) = (out.len() as u64, inn.len() as u64);
        let (ow, iw) = (out.values().sum::<u64>(), inn.values().sum::<u64>());
        InteractionFamily {
            indegree: id,
            outdegree: od,
            inweight: iw,
            outweight: ow,
            avg_inweight: ratio(iw, id),
            avg_outweight: ratio(ow, od),
            out_in_ratio: ratio(od, id),
            pcnt: pcnt(events, seen_total),
            most_out: top_k(out, TOP_K),
            most_in: top_k(inn, TOP_K),
        }
    }
}

/// Mention, retweet and reply adjacency of an analysis corpus, plus the
/// replies each tweet received from other users. Self-interactions are
/// left out.
#[derive(Debug, Clone, Default)]
pub struct InteractionIndex {
    mention: Adjacency,
    retweet: Adjacency,
    reply: Adjacency,
    replies_received: BTreeMap<UserId, BTreeMap<TweetId, u64>>,
}

impl InteractionIndex {
    pub fn build<'a>(corpus: impl IntoIterator<Item = &'a Tweet> + Clone) -> InteractionIndex {
        let g = extract_interactions(corpus.clone());
        let mut replies_received: BTreeMap<UserId, BTreeMap<TweetId, u64>> = BTreeMap::new();
        for t in corpus {
            if let Some((tid, a)) = t.reply_to {
                if a != t.author && !t.is_retweet() {
                    *replies_received.entry(a).or_default().entry(tid).or_default() += 1;
                }
            }
        }
        InteractionIndex {
            mention: Adjacency::of(&g.mention),
            retweet: Adjacency::of(&g.retweet),
            reply: Adjacency::of(&g.reply),
            replies_received,
        }
    }
}

/// Interaction features of `u`; `own` are the tweets of `u` in the corpus.
pub fn interaction_features(u: UserId, idx: &InteractionIndex, own: &[Tweet]) -> InteractionFeatures {
    let seen_total = own.len() as u64;
    let count = |f: fn(&Tweet) -> bool| own.iter().filter(|t| f(t)).count() as u64;
    let mentions = count(|t| !t.is_retweet() && !t.mentions.is_empty());
    let retweets = count(Tweet::is_retweet);
    let replies = count(|t| !t.is_retweet() && t.is_reply());
    let received = idx.replies_received.get(&u);
    let most_engaging_tweet = received.and_then(|m| {
        m.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0))).map(|(&tid, _)| tid)
    });
    InteractionFeatures {
        mention: idx.mention.family(u, mentions, seen_total),
        retweet: idx.retweet.family(u, retweets, seen_total),
        reply: idx.reply.family(u, replies, seen_total),
        seen_replied_to: received.map_or(0, |m| m.len() as u64),
        most_engaging_tweet,
    }
}
