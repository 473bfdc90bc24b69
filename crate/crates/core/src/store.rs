//! In-process document store mirroring the crawler's collections.
//!
//! Every operation takes the store lock once, so each call is atomic and
//! linearizable; there are no cross-collection transactions. Collections are
//! exported one JSON object per line, ordered by primary key, except the
//! append-only logs (`follow`, `follow_scans`, `trends`, `class_history`)
//! which keep insertion order so that earlier exports are prefixes of later
//! ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ClassTransition, CrawlState, FavoriteRecord, FollowEdge, FollowScan, GoneRecord, ListRecord,
    Membership, Subscription, Timestamp, TrendSnapshot, Tweet, TweetId, UserClass, UserId,
    UserSnapshot,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("screen name `{screen_name}` is already indexed for user {owner}")]
    IndexConflict { screen_name: String, owner: UserId },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed line {line} in {path}: {message}")]
    MalformedLine { path: PathBuf, line: usize, message: String },
    #[error("unknown collection `{0}`")]
    UnknownCollection(String),
    #[error("collection `{0}` has no id-only form")]
    NoIdProjection(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Collection {
    Users,
    Tweets,
    Follow,
    FollowScans,
    Lists,
    Memberships,
    Subscriptions,
    Favorites,
    Trends,
    ShortUrl,
    Classes,
    ClassHistory,
    CrawlState,
    Gone,
}

impl Collection {
    pub const ALL: [Collection; 14] = [
        Collection::Users,
        Collection::Tweets,
        Collection::Follow,
        Collection::FollowScans,
        Collection::Lists,
        Collection::Memberships,
        Collection::Subscriptions,
        Collection::Favorites,
        Collection::Trends,
        Collection::ShortUrl,
        Collection::Classes,
        Collection::ClassHistory,
        Collection::CrawlState,
        Collection::Gone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Collection::Users => "users",
            Collection::Tweets => "tweets",
            Collection::Follow => "follow",
            Collection::FollowScans => "follow_scans",
            Collection::Lists => "lists",
            Collection::Memberships => "memberships",
            Collection::Subscriptions => "subscriptions",
            Collection::Favorites => "favorites",
            Collection::Trends => "trends",
            Collection::ShortUrl => "shorturl",
            Collection::Classes => "classes",
            Collection::ClassHistory => "class_history",
            Collection::CrawlState => "crawlstate",
            Collection::Gone => "gone",
        }
    }

    pub fn from_name(name: &str) -> Result<Collection, StoreError> {
        Collection::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| StoreError::UnknownCollection(name.to_string()))
    }

    /// Fields kept by the anonymized export; `None` when the collection has
    /// no user-id form.
    fn id_fields(self) -> Option<&'static [&'static str]> {
        match self {
            Collection::Users => Some(&["id", "observed_at"]),
            Collection::Tweets => Some(&["id", "author"]),
            Collection::Follow => Some(&["src", "dst", "observed_at"]),
            Collection::FollowScans => Some(&["user", "direction", "observed_at"]),
            Collection::Lists => Some(&["list_id", "owner"]),
            Collection::Memberships => Some(&["list_id", "member"]),
            Collection::Subscriptions => Some(&["list_id", "subscriber"]),
            Collection::Favorites => Some(&["user", "tweet", "tweet_author", "observed_at"]),
            Collection::Classes => Some(&["user", "class"]),
            Collection::ClassHistory => Some(&["user", "from", "to", "at"]),
            Collection::CrawlState => Some(&["user", "first_seen_tweet", "last_seen_tweet"]),
            Collection::Gone => Some(&["tweet", "author", "referenced_by"]),
            Collection::Trends | Collection::ShortUrl => None,
        }
    }

    pub fn file_name(self, ids_only: bool) -> String {
        if ids_only {
            format!("{}.ids.jsonl", self.name())
        } else {
            format!("{}.jsonl", self.name())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotOutcome {
    Stored,
    SkippedTweetCountOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TweetOutcome {
    Inserted,
    Duplicate,
    Upgraded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ClassRow {
    user: UserId,
    class: UserClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ShortUrlRow {
    short: String,
    expanded: String,
}

#[derive(Debug, Default)]
struct Collections {
    users: BTreeMap<UserId, Vec<UserSnapshot>>,
    screen_name_lower: HashMap<String, UserId>,
    tweets: BTreeMap<TweetId, Tweet>,
    tweets_by_author: HashMap<UserId, BTreeSet<TweetId>>,
    follow: Vec<FollowEdge>,
    follow_scans: Vec<FollowScan>,
    lists: BTreeMap<u64, ListRecord>,
    memberships: BTreeSet<Membership>,
    subscriptions: BTreeSet<Subscription>,
    favorites: BTreeMap<(UserId, TweetId), FavoriteRecord>,
    trends: Vec<TrendSnapshot>,
    shorturl: BTreeMap<String, String>,
    classes: BTreeMap<UserId, UserClass>,
    class_history: Vec<ClassTransition>,
    crawlstate: BTreeMap<UserId, CrawlState>,
    gone: BTreeMap<TweetId, GoneRecord>,
}

impl Collections {
    fn insert_tweet(&mut self, t: Tweet) {
        self.tweets_by_author.entry(t.author).or_default().insert(t.id);
        for url in &t.urls {
            self.shorturl.entry(url.short.clone()).or_insert_with(|| url.expanded.clone());
        }
        self.tweets.insert(t.id, t);
    }

    fn rebuild_screen_name_index(&mut self) {
        self.screen_name_lower.clear();
        let mut latest: Vec<&UserSnapshot> = self.users.values().filter_map(|h| h.last()).collect();
        latest.sort_by_key(|s| (s.observed_at, s.id));
        for s in latest {
            self.screen_name_lower.insert(s.screen_name.to_lowercase(), s.id);
        }
    }
}

/// Thread-safe store of every crawled artifact.
#[derive(Debug, Default)]
pub struct Store {
    inner: RwLock<Collections>,
    generation: AtomicU64,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    fn r(&self) -> RwLockReadGuard<'_, Collections> {
        self.inner.read().expect("store lock poisoned")
    }

    fn w(&self) -> RwLockWriteGuard<'_, Collections> {
        self.generation.fetch_add(1, Ordering::Relaxed);
        self.inner.write().expect("store lock poisoned")
    }

    /// Count of write operations so far; changes whenever the store may have.
    pub fn generation(&self) -> u64 {
        self.generation.load(Ordering::Relaxed)
    }

    // ---- users ----

    /// Appends a profile snapshot unless it differs from the latest one only in
    /// `tweet_count`. Fails with `IndexConflict` when another user's latest
    /// snapshot holds the same lowercase screen name.
    pub fn put_snapshot(&self, s: UserSnapshot) -> Result<SnapshotOutcome, StoreError> {
        let mut c = self.w();
        Self::put_snapshot_locked(&mut c, s, false)
    }

    /// Like [`Store::put_snapshot`], but on a screen-name collision the older
    /// claimant's index entry is dropped. Returns the displaced user, if any.
    pub fn put_snapshot_demoting(
        &self,
        s: UserSnapshot,
    ) -> (SnapshotOutcome, Option<UserId>) {
        let mut c = self.w();
        let name = s.screen_name.to_lowercase();
        let displaced = c.screen_name_lower.get(&name).copied().filter(|&o| o != s.id);
        let outcome = Self::put_snapshot_locked(&mut c, s, true).expect("demoting put cannot conflict");
        (outcome, displaced)
    }

    fn put_snapshot_locked(
        c: &mut Collections,
        s: UserSnapshot,
        demote: bool,
    ) -> Result<SnapshotOutcome, StoreError> {
        if let Some(prev) = c.users.get(&s.id).and_then(|h| h.last()) {
            if prev.same_except_tweet_count(&s) {
                return Ok(SnapshotOutcome::SkippedTweetCountOnly);
            }
        }
        let name = s.screen_name.to_lowercase();
        if let Some(&owner) = c.screen_name_lower.get(&name) {
            if owner != s.id && !demote {
                return Err(StoreError::IndexConflict { screen_name: name, owner });
            }
        }
        if let Some(old) = c.users.get(&s.id).and_then(|h| h.last()) {
            let old_name = old.screen_name.to_lowercase();
            if c.screen_name_lower.get(&old_name) == Some(&s.id) {
                c.screen_name_lower.remove(&old_name);
            }
        }
        c.screen_name_lower.insert(name, s.id);
        let history = c.users.entry(s.id).or_default();
        let pos = history.partition_point(|h| h.observed_at <= s.observed_at);
        history.insert(pos, s);
        Ok(SnapshotOutcome::Stored)
    }

    pub fn latest_snapshot(&self, u: UserId) -> Option<UserSnapshot> {
        self.r().users.get(&u).and_then(|h| h.last().cloned())
    }

    pub fn snapshot_history(&self, u: UserId) -> Vec<UserSnapshot> {
        self.r().users.get(&u).cloned().unwrap_or_default()
    }

    pub fn user_by_screen_name(&self, screen_name: &str) -> Option<UserId> {
        self.r().screen_name_lower.get(&screen_name.to_lowercase()).copied()
    }

    pub fn known_users(&self) -> Vec<UserId> {
        self.r().users.keys().copied().collect()
    }

    pub fn has_snapshot(&self, u: UserId) -> bool {
        self.r().users.contains_key(&u)
    }

    // ---- tweets ----

    pub fn put_tweet(&self, t: Tweet) -> TweetOutcome {
        let mut c = self.w();
        match c.tweets.get(&t.id) {
            None => {
                c.insert_tweet(t);
                TweetOutcome::Inserted
            }
            Some(stored) if stored.truncated && !t.truncated => {
                c.insert_tweet(t);
                TweetOutcome::Upgraded
            }
            Some(_) => TweetOutcome::Duplicate,
        }
    }

    pub fn tweet(&self, id: TweetId) -> Option<Tweet> {
        self.r().tweets.get(&id).cloned()
    }

    pub fn has_tweet(&self, id: TweetId) -> bool {
        self.r().tweets.contains_key(&id)
    }

    pub fn tweet_count(&self) -> usize {
        self.r().tweets.len()
    }

    /// Tweets authored by `u`, ascending by id.
    pub fn tweets_by(&self, u: UserId) -> Vec<Tweet> {
        let c = self.r();
        c.tweets_by_author
            .get(&u)
            .map(|ids| ids.iter().filter_map(|id| c.tweets.get(id).cloned()).collect())
            .unwrap_or_default()
    }

    pub fn tweet_ids_by(&self, u: UserId) -> Vec<TweetId> {
        self.r()
            .tweets_by_author
            .get(&u)
            .map(|ids| ids.iter().copied().collect())
            .unwrap_or_default()
    }

    /// All tweets, ascending by id.
    pub fn all_tweets(&self) -> Vec<Tweet> {
        self.r().tweets.values().cloned().collect()
    }

    /// Runs `f` over every tweet without cloning, ascending by id.
    pub fn for_each_tweet(&self, mut f: impl FnMut(&Tweet)) {
        for t in self.r().tweets.values() {
            f(t);
        }
    }

    // ---- follow ----

    pub fn append_follow(&self, e: FollowEdge) {
        self.w().follow.push(e);
    }

    pub fn append_follows(&self, edges: impl IntoIterator<Item = FollowEdge>) {
        self.w().follow.extend(edges);
    }

    pub fn record_follow_scan(&self, scan: FollowScan) {
        self.w().follow_scans.push(scan);
    }

    pub fn follow_edges(&self) -> Vec<FollowEdge> {
        self.r().follow.clone()
    }

    pub fn follow_scans(&self) -> Vec<FollowScan> {
        self.r().follow_scans.clone()
    }

    pub fn follow_len(&self) -> usize {
        self.r().follow.len()
    }

    // ---- lists ----

    pub fn put_list(&self, rec: ListRecord) {
        self.w().lists.insert(rec.list_id, rec);
    }

    pub fn add_membership(&self, m: Membership) -> bool {
        self.w().memberships.insert(m)
    }

    /// Replaces the member set of `list_id` after a complete enumeration.
    pub fn replace_members(&self, list_id: u64, members: &BTreeSet<UserId>) {
        let mut c = self.w();
        c.memberships.retain(|m| m.list_id != list_id);
        c.memberships
            .extend(members.iter().map(|&member| Membership { list_id, member }));
    }

    pub fn add_subscription(&self, s: Subscription) -> bool {
        self.w().subscriptions.insert(s)
    }

    pub fn lists(&self) -> Vec<ListRecord> {
        self.r().lists.values().cloned().collect()
    }

    pub fn memberships(&self) -> Vec<Membership> {
        self.r().memberships.iter().copied().collect()
    }

    pub fn subscriptions(&self) -> Vec<Subscription> {
        self.r().subscriptions.iter().copied().collect()
    }

    // ---- favorites ----

    /// Returns true when the like was not known before.
    pub fn put_favorite(&self, rec: FavoriteRecord) -> bool {
        let mut c = self.w();
        let key = (rec.user, rec.tweet);
        if c.favorites.contains_key(&key) {
            return false;
        }
        c.favorites.insert(key, rec);
        true
    }

    pub fn has_favorite(&self, user: UserId, tweet: TweetId) -> bool {
        self.r().favorites.contains_key(&(user, tweet))
    }

    pub fn favorites(&self) -> Vec<FavoriteRecord> {
        self.r().favorites.values().copied().collect()
    }

    pub fn favorites_of(&self, user: UserId) -> Vec<FavoriteRecord> {
        self.r()
            .favorites
            .range((user, TweetId(0))..=(user, TweetId(u64::MAX)))
            .map(|(_, r)| *r)
            .collect()
    }

    // ---- trends / short urls ----

    pub fn append_trend(&self, t: TrendSnapshot) {
        self.w().trends.push(t);
    }

    pub fn trends(&self) -> Vec<TrendSnapshot> {
        self.r().trends.clone()
    }

    pub fn put_shorturl(&self, short: &str, expanded: &str) {
        self.w().shorturl.insert(short.to_string(), expanded.to_string());
    }

    pub fn resolve_shorturl(&self, short: &str) -> Option<String> {
        self.r().shorturl.get(short).cloned()
    }

    // ---- classes ----

    /// Replaces the class of `u`, recording the transition when it changes.
    pub fn set_class(&self, u: UserId, class: UserClass, at: Timestamp) {
        let mut c = self.w();
        let from = c.classes.get(&u).copied().unwrap_or_default();
        if from == class {
            return;
        }
        c.classes.insert(u, class);
        c.class_history.push(ClassTransition { user: u, from, to: class, at });
    }

    pub fn class_of(&self, u: UserId) -> UserClass {
        self.r().classes.get(&u).copied().unwrap_or_default()
    }

    pub fn classes(&self) -> BTreeMap<UserId, UserClass> {
        self.r().classes.clone()
    }

    pub fn users_in(&self, pred: impl Fn(UserClass) -> bool) -> Vec<UserId> {
        self.r()
            .classes
            .iter()
            .filter(|(_, &c)| pred(c))
            .map(|(&u, _)| u)
            .collect()
    }

    pub fn class_history(&self) -> Vec<ClassTransition> {
        self.r().class_history.clone()
    }

    // ---- crawl state ----

    pub fn crawl_state(&self, u: UserId) -> Option<CrawlState> {
        self.r().crawlstate.get(&u).cloned()
    }

    pub fn crawl_state_or_new(&self, u: UserId) -> CrawlState {
        self.crawl_state(u).unwrap_or_else(|| CrawlState::new(u))
    }

    pub fn put_crawl_state(&self, s: CrawlState) {
        self.w().crawlstate.insert(s.user, s);
    }

    pub fn crawl_states(&self) -> Vec<CrawlState> {
        self.r().crawlstate.values().cloned().collect()
    }

    // ---- gone ----

    pub fn record_gone(&self, g: GoneRecord) {
        self.w().gone.entry(g.tweet).or_insert(g);
    }

    pub fn gone(&self) -> Vec<GoneRecord> {
        self.r().gone.values().copied().collect()
    }

    // ---- export / import ----

    pub fn len(&self, collection: Collection) -> usize {
        let c = self.r();
        match collection {
            Collection::Users => c.users.values().map(Vec::len).sum(),
            Collection::Tweets => c.tweets.len(),
            Collection::Follow => c.follow.len(),
            Collection::FollowScans => c.follow_scans.len(),
            Collection::Lists => c.lists.len(),
            Collection::Memberships => c.memberships.len(),
            Collection::Subscriptions => c.subscriptions.len(),
            Collection::Favorites => c.favorites.len(),
            Collection::Trends => c.trends.len(),
            Collection::ShortUrl => c.shorturl.len(),
            Collection::Classes => c.classes.len(),
            Collection::ClassHistory => c.class_history.len(),
            Collection::CrawlState => c.crawlstate.len(),
            Collection::Gone => c.gone.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        Collection::ALL.iter().all(|&c| self.len(c) == 0)
    }

    /// Serializes one collection, one JSON document per line, in canonical order.
    pub fn export_lines(&self, collection: Collection) -> Vec<String> {
        fn lines<T: Serialize>(items: impl Iterator<Item = T>) -> Vec<String> {
            items
                .map(|i| serde_json::to_string(&i).expect("store records always serialize"))
                .collect()
        }
        let c = self.r();
        match collection {
            Collection::Users => lines(c.users.values().flatten()),
            Collection::Tweets => lines(c.tweets.values()),
            Collection::Follow => lines(c.follow.iter()),
            Collection::FollowScans => lines(c.follow_scans.iter()),
            Collection::Lists => lines(c.lists.values()),
            Collection::Memberships => lines(c.memberships.iter()),
            Collection::Subscriptions => lines(c.subscriptions.iter()),
            Collection::Favorites => lines(c.favorites.values()),
            Collection::Trends => lines(c.trends.iter()),
            Collection::ShortUrl => lines(c.shorturl.iter().map(|(s, e)| ShortUrlRow {
                short: s.clone(),
                expanded: e.clone(),
            })),
            Collection::Classes => {
                lines(c.classes.iter().map(|(&user, &class)| ClassRow { user, class }))
            }
            Collection::ClassHistory => lines(c.class_history.iter()),
            Collection::CrawlState => lines(c.crawlstate.values()),
            Collection::Gone => lines(c.gone.values()),
        }
    }

    /// The anonymized projection: only ids (and timestamps where they order
    /// the record) survive.
    pub fn export_id_lines(&self, collection: Collection) -> Result<Vec<String>, StoreError> {
        let keep = collection
            .id_fields()
            .ok_or(StoreError::NoIdProjection(collection.name()))?;
        Ok(self
            .export_lines(collection)
            .into_iter()
            .map(|line| {
                let value: serde_json::Value =
                    serde_json::from_str(&line).expect("exported lines are valid json");
                let projected: serde_json::Map<String, serde_json::Value> = keep
                    .iter()
                    .filter_map(|&k| value.get(k).map(|v| (k.to_string(), v.clone())))
                    .collect();
                serde_json::Value::Object(projected).to_string()
            })
            .collect())
    }

    /// Writes `collection` to `path`; returns the number of records written.
    pub fn export(&self, collection: Collection, path: &Path) -> Result<usize, StoreError> {
        write_lines(path, &self.export_lines(collection))
    }

    pub fn export_ids(&self, collection: Collection, path: &Path) -> Result<usize, StoreError> {
        write_lines(path, &self.export_id_lines(collection)?)
    }

    /// Exports every collection to `<dir>/<collection>.jsonl`.
    pub fn export_dir(&self, dir: &Path) -> Result<usize, StoreError> {
        std::fs::create_dir_all(dir).map_err(|source| StoreError::IoFailure {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut total = 0;
        for c in Collection::ALL {
            total += self.export(c, &dir.join(c.file_name(false)))?;
        }
        Ok(total)
    }

    /// Loads every `<collection>.jsonl` present in `dir`.
    pub fn import_dir(&self, dir: &Path) -> Result<usize, StoreError> {
        let mut total = 0;
        for c in Collection::ALL {
            let path = dir.join(c.file_name(false));
            if path.exists() {
                total += self.import(c, &path)?;
            }
        }
        Ok(total)
    }

    /// Reads a full (not id-only) export of `collection` and adds its records.
    /// Snapshots and history are loaded verbatim, without the dedup rule.
    pub fn import(&self, collection: Collection, path: &Path) -> Result<usize, StoreError> {
        let file = File::open(path).map_err(|source| StoreError::IoFailure {
            path: path.to_path_buf(),
            source,
        })?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| StoreError::IoFailure {
                path: path.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            records.push((i + 1, line));
        }
        let n = records.len();
        let parse = |line_no: usize, line: &str| -> Result<serde_json::Value, StoreError> {
            serde_json::from_str(line).map_err(|e| StoreError::MalformedLine {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })
        };
        let typed = |records: &[(usize, String)]| -> Result<Vec<serde_json::Value>, StoreError> {
            records.iter().map(|(n, l)| parse(*n, l)).collect()
        };
        let values = typed(&records)?;
        let mut c = self.w();
        macro_rules! each {
            ($ty:ty, |$v:ident| $body:expr) => {{
                for (value, (line_no, _)) in values.into_iter().zip(&records) {
                    let $v: $ty = decode(value, path, *line_no)?;
                    $body;
                }
            }};
        }
        match collection {
            Collection::Users => {
                each!(UserSnapshot, |s| {
                    let h = c.users.entry(s.id).or_default();
                    let pos = h.partition_point(|x| x.observed_at <= s.observed_at);
                    h.insert(pos, s);
                });
                c.rebuild_screen_name_index();
            }
            Collection::Tweets => each!(Tweet, |t| c.insert_tweet(t)),
            Collection::Follow => each!(FollowEdge, |e| c.follow.push(e)),
            Collection::FollowScans => each!(FollowScan, |s| c.follow_scans.push(s)),
            Collection::Lists => each!(ListRecord, |l| {
                c.lists.insert(l.list_id, l);
            }),
            Collection::Memberships => each!(Membership, |m| {
                c.memberships.insert(m);
            }),
            Collection::Subscriptions => each!(Subscription, |s| {
                c.subscriptions.insert(s);
            }),
            Collection::Favorites => each!(FavoriteRecord, |f| {
                c.favorites.insert((f.user, f.tweet), f);
            }),
            Collection::Trends => each!(TrendSnapshot, |t| c.trends.push(t)),
            Collection::ShortUrl => each!(ShortUrlRow, |r| {
                c.shorturl.insert(r.short, r.expanded);
            }),
            Collection::Classes => each!(ClassRow, |r| {
                c.classes.insert(r.user, r.class);
            }),
            Collection::ClassHistory => each!(ClassTransition, |t| c.class_history.push(t)),
            Collection::CrawlState => each!(CrawlState, |s| {
                c.crawlstate.insert(s.user, s);
            }),
            Collection::Gone => each!(GoneRecord, |g| {
                c.gone.insert(g.tweet, g);
            }),
        }
        Ok(n)
    }
}

fn decode<T: DeserializeOwned>(
    value: serde_json::Value,
    path: &Path,
    line: usize,
) -> Result<T, StoreError> {
    serde_json::from_value(value).map_err(|e| StoreError::MalformedLine {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

fn write_lines(path: &Path, lines: &[String]) -> Result<usize, StoreError> {
    let io = |source| StoreError::IoFailure { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for line in lines {
        out.write_all(line.as_bytes()).map_err(io)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(lines.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UrlEntity;

    fn snap(id: u64, name: &str, tweets: u64, at: Timestamp) -> UserSnapshot {
        UserSnapshot {
            id: UserId(id),
            screen_name: name.into(),
            name: "Some Name".into(),
            bio: "bio".into(),
            location: String::new(),
            time_zone: String::new(),
            ui_lang: "el".into(),
            profile_url: String::new(),
            created_at: 1_400_000_000,
            tweet_count: tweets,
            followers_count: 10,
            friends_count: 20,
            favourites_count: 3,
            protected: false,
            verified: false,
            observed_at: at,
        }
    }

    fn tweet(id: u64, truncated: bool, text: &str) -> Tweet {
        Tweet {
            id: TweetId(id),
            author: UserId(1),
            created_at: 1_500_000_000,
            text: text.into(),
            lang: "el".into(),
            retweet_of: None,
            reply_to: None,
            quote_of: None,
            mentions: vec![],
            hashtags: vec![],
            urls: vec![UrlEntity { short: "t.co/x".into(), expanded: "https://example.org/a".into() }],
            source_client: "web".into(),
            truncated,
        }
    }

    #[test]
    fn first_snapshot_is_stored() {
        let s = Store::new();
        assert_eq!(s.put_snapshot(snap(1, "Alice", 100, 10)).unwrap(), SnapshotOutcome::Stored);
    }

    #[test]
    fn tweet_count_only_change_is_skipped() {
        let s = Store::new();
        s.put_snapshot(snap(1, "Alice", 100, 10)).unwrap();
        let out = s.put_snapshot(snap(1, "Alice", 150, 20)).unwrap();
        assert_eq!(out, SnapshotOutcome::SkippedTweetCountOnly);
        assert_eq!(s.snapshot_history(UserId(1)).len(), 1);
        assert_eq!(s.latest_snapshot(UserId(1)).unwrap().tweet_count, 100);
    }

    #[test]
    fn bio_change_grows_history() {
        let s = Store::new();
        s.put_snapshot(snap(1, "Alice", 100, 10)).unwrap();
        let mut changed = snap(1, "Alice", 100, 20);
        changed.bio = "new bio".into();
        assert_eq!(s.put_snapshot(changed).unwrap(), SnapshotOutcome::Stored);
        assert_eq!(s.snapshot_history(UserId(1)).len(), 2);
        assert_eq!(s.latest_snapshot(UserId(1)).unwrap().observed_at, 20);
    }

    #[test]
    fn latest_snapshot_absent_without_data() {
        assert!(Store::new().latest_snapshot(UserId(3)).is_none());
    }

    #[test]
    fn screen_name_conflict_and_demotion() {
        let s = Store::new();
        s.put_snapshot(snap(1, "Alice", 1, 10)).unwrap();
        let err = s.put_snapshot(snap(2, "alice", 1, 20)).unwrap_err();
        assert!(matches!(err, StoreError::IndexConflict { owner: UserId(1), .. }));
        let (out, displaced) = s.put_snapshot_demoting(snap(2, "alice", 1, 20));
        assert_eq!(out, SnapshotOutcome::Stored);
        assert_eq!(displaced, Some(UserId(1)));
        assert_eq!(s.user_by_screen_name("ALICE"), Some(UserId(2)));
    }

    #[test]
    fn rename_releases_old_name() {
        let s = Store::new();
        s.put_snapshot(snap(1, "Alice", 1, 10)).unwrap();
        s.put_snapshot(snap(1, "Alicia", 1, 20)).unwrap();
        assert_eq!(s.user_by_screen_name("alice"), None);
        s.put_snapshot(snap(2, "Alice", 1, 30)).unwrap();
        assert_eq!(s.user_by_screen_name("alice"), Some(UserId(2)));
    }

    #[test]
    fn tweet_insert_duplicate_upgrade() {
        let s = Store::new();
        assert_eq!(s.put_tweet(tweet(5, false, "a")), TweetOutcome::Inserted);
        assert_eq!(s.put_tweet(tweet(5, false, "a")), TweetOutcome::Duplicate);
        assert_eq!(s.tweet_count(), 1);

        assert_eq!(s.put_tweet(tweet(6, true, "trunc…")), TweetOutcome::Inserted);
        assert_eq!(s.put_tweet(tweet(6, false, "truncated no more")), TweetOutcome::Upgraded);
        assert_eq!(s.tweet(TweetId(6)).unwrap().text, "truncated no more");
        assert_eq!(s.put_tweet(tweet(6, true, "trunc…")), TweetOutcome::Duplicate);
        assert_eq!(s.resolve_shorturl("t.co/x").as_deref(), Some("https://example.org/a"));
    }

    #[test]
    fn follow_log_keeps_repeated_observations() {
        let s = Store::new();
        assert!(s.follow_edges().is_empty());
        s.append_follow(FollowEdge::new(UserId(1), UserId(2), 1).unwrap());
        s.append_follow(FollowEdge::new(UserId(1), UserId(2), 2).unwrap());
        assert_eq!(s.follow_len(), 2);
    }

    #[test]
    fn class_transitions_are_recorded() {
        let s = Store::new();
        s.set_class(UserId(4), UserClass::Target, 10);
        assert_eq!(s.class_of(UserId(4)), UserClass::Target);
        s.set_class(UserId(4), UserClass::Dead, 20);
        s.set_class(UserId(4), UserClass::Tracked, 30);
        assert_eq!(s.class_of(UserId(4)), UserClass::Tracked);
        let h = s.class_history();
        assert_eq!(h.len(), 3);
        assert_eq!((h[2].from, h[2].to), (UserClass::Dead, UserClass::Tracked));
    }

    #[test]
    fn empty_export_writes_zero_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tweets.jsonl");
        assert_eq!(Store::new().export(Collection::Tweets, &p).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "");
    }

    #[test]
    fn ids_only_tweets_keep_two_fields() {
        let s = Store::new();
        s.put_tweet(tweet(9, false, "secret words"));
        let lines = s.export_id_lines(Collection::Tweets).unwrap();
        assert_eq!(lines, vec![r#"{"author":1,"id":9}"#.to_string()]);
        assert!(s.export_id_lines(Collection::ShortUrl).is_err());
    }

    #[test]
    fn malformed_import_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tweets.jsonl");
        std::fs::write(&p, "not json\n{\"id\":1}\n").unwrap();
        let err = Store::new().import(Collection::Tweets, &p).unwrap_err();
        assert!(matches!(err, StoreError::MalformedLine { line: 1, .. }), "{err}");
        std::fs::write(&p, "").unwrap();
        assert_eq!(Store::new().import(Collection::Tweets, &p).unwrap(), 0);
    }

    #[test]
    fn missing_file_is_io_failure() {
        let err = Store::new()
            .import(Collection::Tweets, Path::new("/nonexistent/x.jsonl"))
            .unwrap_err();
        assert!(matches!(err, StoreError::IoFailure { .. }));
    }
}
