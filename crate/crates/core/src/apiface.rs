//! The endpoint contract every data source implements, and the per-endpoint
//! fixed-window rate limiter shared by all crawl loops.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FavoriteRecord, ListRecord, Timestamp, TrendSnapshot, Tweet, TweetId, UserId, UserSnapshot};

/// Length of every rate-limit window, in seconds.
pub const WINDOW_SECS: i64 = 900;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    UserTimeline,
    StatusesLookup,
    UsersShow,
    FriendsIds,
    FriendsList,
    FollowersIds,
    FollowersList,
    FavoritesList,
    ListsMemberships,
    ListsOwnerships,
    ListsSubscriptions,
    ListsMembers,
    TrendsPlace,
    StreamFilter,
}

impl Endpoint {
    pub const ALL: [Endpoint; 14] = [
        Endpoint::UserTimeline,
        Endpoint::StatusesLookup,
        Endpoint::UsersShow,
        Endpoint::FriendsIds,
        Endpoint::FriendsList,
        Endpoint::FollowersIds,
        Endpoint::FollowersList,
        Endpoint::FavoritesList,
        Endpoint::ListsMemberships,
        Endpoint::ListsOwnerships,
        Endpoint::ListsSubscriptions,
        Endpoint::ListsMembers,
        Endpoint::TrendsPlace,
        Endpoint::StreamFilter,
    ];

    /// Default `(max_requests per window, page_size)`.
    pub fn default_budget(self) -> (u32, usize) {
        match self {
            Endpoint::UserTimeline => (900, 200),
            Endpoint::StatusesLookup => (900, 100),
            Endpoint::UsersShow => (900, 1),
            Endpoint::FriendsIds | Endpoint::FollowersIds => (15, 5000),
            Endpoint::FriendsList | Endpoint::FollowersList => (15, 200),
            Endpoint::FavoritesList => (75, 200),
            Endpoint::ListsMemberships => (75, 1000),
            Endpoint::ListsOwnerships => (15, 1000),
            Endpoint::ListsSubscriptions => (15, 1000),
            Endpoint::ListsMembers => (900, 5000),
            Endpoint::TrendsPlace => (75, 50),
            Endpoint::StreamFilter => (15, 400),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_requests: u32,
    pub page_size: usize,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Per-endpoint budgets. The JSON form is `{endpoint: {max_requests, page_size}}`;
/// endpoints left out keep their defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BudgetConfig {
    budgets: BTreeMap<Endpoint, Budget>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let budgets = Endpoint::ALL
            .into_iter()
            .map(|e| {
                let (max_requests, page_size) = e.default_budget();
                (e, Budget { max_requests, page_size })
            })
            .collect();
        BudgetConfig { budgets }
    }
}

impl BudgetConfig {
    pub fn get(&self, e: Endpoint) -> Budget {
        self.budgets[&e]
    }

    pub fn with(mut self, e: Endpoint, max_requests: u32) -> Self {
        self.budgets.get_mut(&e).expect("all endpoints present").max_requests = max_requests;
        self
    }

    pub fn with_page_size(mut self, e: Endpoint, page_size: usize) -> Self {
        self.budgets.get_mut(&e).expect("all endpoints present").page_size = page_size;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let partial: BTreeMap<Endpoint, Budget> =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut cfg = BudgetConfig::default();
        for (e, b) in partial {
            if b.max_requests == 0 || b.page_size == 0 {
                return Err(ConfigError::Invalid(format!("{e}: budget and page size must be >= 1")));
            }
            cfg.budgets.insert(e, b);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("budgets serialize")
    }
}

/// Start of the aligned window containing `t`.
pub fn window_start(t: Timestamp) -> Timestamp {
    t - t.rem_euclid(WINDOW_SECS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Permit {
    Granted,
    /// Seconds until the current window closes.
    RetryAfter(i64),
}

#[derive(Debug, Clone, Copy, Default)]
struct WindowCounter {
    start: Timestamp,
    used: u32,
}

/// Fixed-window limiter; windows are aligned to multiples of [`WINDOW_SECS`].
#[derive(Debug)]
pub struct RateLimiter {
    budgets: BudgetConfig,
    windows: Mutex<HashMap<Endpoint, WindowCounter>>,
}

impl RateLimiter {
    pub fn new(budgets: BudgetConfig) -> RateLimiter {
        RateLimiter { budgets, windows: Mutex::new(HashMap::new()) }
    }

    pub fn budgets(&self) -> &BudgetConfig {
        &self.budgets
    }

    pub fn acquire(&self, e: Endpoint, now: Timestamp) -> Permit {
        let start = window_start(now);
        let max = self.budgets.get(e).max_requests;
        let mut windows = self.windows.lock().expect("limiter lock poisoned");
        let w = windows.entry(e).or_insert(WindowCounter { start, used: 0 });
        if w.start != start {
            *w = WindowCounter { start, used: 0 };
        }
        if w.used < max {
            w.used += 1;
            Permit::Granted
        } else {
            Permit::RetryAfter(start + WINDOW_SECS - now)
        }
    }

    /// Requests still available to `e` in the window containing `now`.
    pub fn remaining(&self, e: Endpoint, now: Timestamp) -> u32 {
        let max = self.budgets.get(e).max_requests;
        let windows = self.windows.lock().expect("limiter lock poisoned");
        match windows.get(&e) {
            Some(w) if w.start == window_start(now) => max.saturating_sub(w.used),
            _ => max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ApiError {
    #[error("user {0} not found")]
    UserNotFound(UserId),
    #[error("user {0} is protected")]
    UserProtected(UserId),
    #[error("user {0} is suspended")]
    UserSuspended(UserId),
    #[error("list {0} not found")]
    ListNotFound(u64),
    #[error("unknown place `{0}`")]
    PlaceUnknown(String),
    #[error("{endpoint} rate limited for {retry_after}s")]
    RateLimited { endpoint: Endpoint, retry_after: i64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl ApiError {
    pub fn kind(&self) -> &'static str {
        match self {
            ApiError::UserNotFound(_) => "user_not_found",
            ApiError::UserProtected(_) => "user_protected",
            ApiError::UserSuspended(_) => "user_suspended",
            ApiError::ListNotFound(_) => "list_not_found",
            ApiError::PlaceUnknown(_) => "place_unknown",
            ApiError::RateLimited { .. } => "rate_limited",
            ApiError::InvalidRequest(_) => "invalid_request",
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;

/// A page of a user's timeline, newest first, with the author's profile as
/// embedded in the response.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelinePage {
    pub tweets: Vec<Tweet>,
    pub author: Option<UserSnapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LookupResult {
    Found { tweet: Box<Tweet>, author: Box<UserSnapshot> },
    Gone,
}

/// Cursor `0` starts an enumeration; `next == None` ends it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdPage {
    pub ids: Vec<UserId>,
    pub next: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePage {
    pub users: Vec<UserSnapshot>,
    pub next: Option<u64>,
}

/// What a request was about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestTarget {
    User(UserId),
    List(u64),
    Tweets(usize),
    Place(String),
    Keywords(usize),
}

/// One served request, as logged by a data source or by the crawler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub endpoint: Endpoint,
    pub target: RequestTarget,
    pub at: Timestamp,
    pub outcome: String,
}

/// The endpoint surface of the platform. Implementations own their notion of
/// "now" (the simulator's virtual clock, or wall time for a live adapter).
pub trait SocialApi {
    fn now(&self) -> Timestamp;

    /// Tweets with `since < id <= max`, newest first, at most `count`. Never
    /// reaches deeper than the user's 3200 most recent tweets.
    fn user_timeline(
        &self,
        user: UserId,
        since: Option<TweetId>,
        max: Option<TweetId>,
        count: usize,
    ) -> ApiResult<TimelinePage>;

    /// Between 1 and 100 ids per call.
    fn statuses_lookup(&self, ids: &[TweetId]) -> ApiResult<BTreeMap<TweetId, LookupResult>>;

    fn users_show(&self, user: UserId) -> ApiResult<UserSnapshot>;

    fn friends_ids(&self, user: UserId, cursor: u64) -> ApiResult<IdPage>;
    fn followers_ids(&self, user: UserId, cursor: u64) -> ApiResult<IdPage>;
    fn friends_list(&self, user: UserId, cursor: u64) -> ApiResult<ProfilePage>;
    fn followers_list(&self, user: UserId, cursor: u64) -> ApiResult<ProfilePage>;

    /// Likes ordered by the liked tweet's id (creation time), newest first.
    fn favorites_list(&self, user: UserId, max: Option<TweetId>, count: usize) -> ApiResult<Vec<FavoriteRecord>>;

    fn lists_memberships(&self, user: UserId) -> ApiResult<Vec<ListRecord>>;
    fn lists_ownerships(&self, user: UserId) -> ApiResult<Vec<ListRecord>>;
    fn lists_subscriptions(&self, user: UserId) -> ApiResult<Vec<ListRecord>>;
    fn lists_members(&self, list_id: u64, cursor: u64) -> ApiResult<IdPage>;

    fn trends_place(&self, place: &str) -> ApiResult<TrendSnapshot>;

    /// A sample of recent tweets whose lowercased text contains any keyword.
    fn stream_filter(&self, keywords: &[String], budget: usize) -> ApiResult<Vec<Tweet>>;
}

/// Counts, per endpoint, the aligned windows in which more requests than the
/// budget allows were served. An empty result means full compliance.
pub fn audit_request_log(log: &[RequestRecord], budgets: &BudgetConfig) -> Vec<(Endpoint, Timestamp, u32)> {
    let mut counts: BTreeMap<(Endpoint, Timestamp), u32> = BTreeMap::new();
    for r in log {
        *counts.entry((r.endpoint, window_start(r.at))).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|((e, _), n)| *n > budgets.get(*e).max_requests)
        .map(|((e, w), n)| (e, w, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grants_within_budget() {
        let rl = RateLimiter::new(BudgetConfig::default().with(Endpoint::FriendsIds, 15));
        assert_eq!(rl.acquire(Endpoint::FriendsIds, 0), Permit::Granted);
        assert_eq!(rl.remaining(Endpoint::FriendsIds, 0), 14);
    }

    #[test]
    fn sixteenth_call_waits_full_window() {
        let rl = RateLimiter::new(BudgetConfig::default().with(Endpoint::FriendsIds, 15));
        for _ in 0..15 {
            assert_eq!(rl.acquire(Endpoint::FriendsIds, 0), Permit::Granted);
        }
        assert_eq!(rl.acquire(Endpoint::FriendsIds, 0), Permit::RetryAfter(900));
        assert_eq!(rl.acquire(Endpoint::FriendsIds, 600), Permit::RetryAfter(300));
    }

    #[test]
    fn window_rolls_over() {
        let rl = RateLimiter::new(BudgetConfig::default().with(Endpoint::FriendsIds, 15));
        for _ in 0..15 {
            rl.acquire(Endpoint::FriendsIds, 0);
        }
        assert_eq!(rl.acquire(Endpoint::FriendsIds, 900), Permit::Granted);
    }

    #[test]
    fn endpoints_have_independent_budgets() {
        let rl = RateLimiter::new(BudgetConfig::default().with(Endpoint::FriendsIds, 1));
        assert_eq!(rl.acquire(Endpoint::FriendsIds, 0), Permit::Granted);
        assert!(matches!(rl.acquire(Endpoint::FriendsIds, 0), Permit::RetryAfter(_)));
        assert_eq!(rl.acquire(Endpoint::FollowersIds, 0), Permit::Granted);
    }

    #[test]
    fn budget_json_overrides_defaults() {
        let cfg = BudgetConfig::from_json(r#"{"UserTimeline": {"max_requests": 5, "page_size": 200}}"#).unwrap();
        assert_eq!(cfg.get(Endpoint::UserTimeline).max_requests, 5);
        assert_eq!(cfg.get(Endpoint::FavoritesList).max_requests, 75);
        assert!(BudgetConfig::from_json(r#"{"UserTimeline": {"max_requests": 0, "page_size": 1}}"#).is_err());
        let round = BudgetConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn audit_flags_overfull_windows() {
        let budgets = BudgetConfig::default().with(Endpoint::UsersShow, 2);
        let rec = |at| RequestRecord {
            endpoint: Endpoint::UsersShow,
            target: RequestTarget::User(UserId(1)),
            at,
            outcome: "ok".into(),
        };
        assert!(audit_request_log(&[rec(0), rec(899), rec(900)], &budgets).is_empty());
        assert_eq!(audit_request_log(&[rec(0), rec(1), rec(2)], &budgets), vec![(Endpoint::UsersShow, 0, 3)]);
    }
}
