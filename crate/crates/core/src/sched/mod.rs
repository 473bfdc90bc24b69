//! Crawl loops over a [`SocialApi`]: the two-queue tweet crawler, referenced
//! tweet lookups, follow, favorites and list crawlers, profile refresh, trend
//! polling and stream seeding. [`Crawler`] runs them window by window.

mod crawler;
mod follow;
mod lists;
mod misc;
mod tweets;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apiface::{ApiError, ApiResult, BudgetConfig, Endpoint, Permit, RateLimiter, RequestRecord, RequestTarget, SocialApi};
use crate::model::{CrawlState, Timestamp, UserClass, UserId, UserSnapshot, DAY, HOUR};
use crate::store::Store;

pub use crawler::{run_world, Crawler, WindowReport};
pub use follow::{crawl_favorites, crawl_follow, crawl_follow_profiles, FavoriteProgress, FavoriteScan, FollowProgress, FollowStep};
pub use lists::{crawl_lists, ListRoundRobin, ListTurn};
pub use misc::{poll_trends, refresh_profiles, seed_from_stream, ProfileRefresh};
pub use tweets::{crawl_user_tweets, lookup_pass, Descent, LookupOutcome, LookupQueue, PendingRef, TweetVisit};

#[derive(Debug, Error)]
pub enum SchedError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid scheduler config: {0}")]
    Invalid(String),
}

/// How timeline visits are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Alternate between the expected-new and the staleness queue.
    #[default]
    DualPriority,
    /// Cycle through crawled users in id order.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub policy: Policy,
    pub follow_recrawl_window: i64,
    pub profile_refresh_window: i64,
    pub favorites_rescan_window: i64,
    pub list_revisit_window: i64,
    /// A favorites scan stops once this many already-known likes were seen.
    pub favorites_known_stop: usize,
    /// Expected tweets per visit the expected-new queue aims for.
    pub target_batch: u64,
    pub timeline_page: usize,
    pub timeline_cap: u64,
    pub trends_period: i64,
    pub lookup_batch: usize,
    pub gone_retry_after: i64,
    /// Weight of the latest visit in the tweet-rate moving average.
    pub rate_alpha: f64,
    /// Users visited more recently than this are not revisited.
    pub min_revisit: i64,
    pub keywords: Vec<String>,
    pub stream_budget: usize,
    pub place: String,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            policy: Policy::DualPriority,
            follow_recrawl_window: 30 * DAY,
            profile_refresh_window: 14 * DAY,
            favorites_rescan_window: 7 * DAY,
            list_revisit_window: 30 * DAY,
            favorites_known_stop: 191,
            target_batch: 1000,
            timeline_page: 200,
            timeline_cap: 3200,
            trends_period: 900,
            lookup_batch: 100,
            gone_retry_after: 7 * DAY,
            rate_alpha: 0.3,
            min_revisit: 6 * HOUR,
            keywords: crate::simnet::text::GREEK_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            stream_budget: 400,
            place: "GR".into(),
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), SchedError> {
        let windows = [
            self.follow_recrawl_window,
            self.profile_refresh_window,
            self.favorites_rescan_window,
            self.list_revisit_window,
            self.trends_period,
            self.gone_retry_after,
        ];
        if windows.iter().any(|&w| w <= 0) || self.min_revisit < 0 {
            return Err(SchedError::Invalid("time windows must be positive".into()));
        }
        if self.favorites_known_stop == 0
            || self.target_batch == 0
            || self.timeline_page == 0
            || self.timeline_cap == 0
            || self.lookup_batch == 0
        {
            return Err(SchedError::Invalid("counts must be positive".into()));
        }
        if !(self.rate_alpha > 0.0 && self.rate_alpha <= 1.0) {
            return Err(SchedError::Invalid("rate_alpha must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SchedulerConfig, SchedError> {
        let cfg: SchedulerConfig = serde_json::from_str(text).map_err(|e| SchedError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SchedulerConfig, SchedError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SchedError::Io { path: path.display().to_string(), source })?;
        SchedulerConfig::from_json(&text)
    }
}

/// Rate-limited access to an API: every call takes a permit from the shared
/// limiter first and is appended to the run log when sent.
#[derive(Debug)]
pub struct Gate {
    limiter: RateLimiter,
    log: Vec<RequestRecord>,
}

impl Gate {
    pub fn new(budgets: BudgetConfig) -> Gate {
        Gate { limiter: RateLimiter::new(budgets), log: Vec::new() }
    }

    pub fn budgets(&self) -> &BudgetConfig {
        self.limiter.budgets()
    }

    pub fn remaining(&self, e: Endpoint, now: Timestamp) -> u32 {
        self.limiter.remaining(e, now)
    }

    /// Sends `f` if a permit is available; otherwise returns `RateLimited`
    /// without touching the API.
    pub fn call<A: SocialApi + ?Sized, T>(
        &mut self,
        api: &A,
        e: Endpoint,
        target: RequestTarget,
        f: impl FnOnce(&A) -> ApiResult<T>,
    ) -> ApiResult<T> {
        let now = api.now();
        match self.limiter.acquire(e, now) {
            Permit::RetryAfter(retry_after) => Err(ApiError::RateLimited { endpoint: e, retry_after }),
            Permit::Granted => {
                let r = f(api);
                let outcome = match &r {
                    Ok(_) => "ok".to_string(),
                    Err(err) => err.kind().to_string(),
                };
                self.log.push(RequestRecord { endpoint: e, target, at: now, outcome });
                r
            }
        }
    }

    pub fn log(&self) -> &[RequestRecord] {
        &self.log
    }

    pub fn requests(&self) -> usize {
        self.log.len()
    }
}

/// Writes request records as JSON Lines.
pub fn write_run_log(records: &[RequestRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

/// Applies the class change an endpoint error implies. Returns true when the
/// error concerned the user (as opposed to rate limiting or a bad request).
pub fn apply_api_error(store: &Store, u: UserId, err: &ApiError, now: Timestamp) -> bool {
    let class = match err {
        ApiError::UserProtected(_) => UserClass::Protected,
        ApiError::UserSuspended(_) => UserClass::Suspended,
        ApiError::UserNotFound(_) => UserClass::Dead,
        _ => return false,
    };
    store.set_class(u, class, now);
    true
}

/// Tweets per day: seen tweets over the span between the first and last seen
/// tweet when at least two were crawled, otherwise the profile's lifetime
/// average.
pub fn estimate_rate(state: &CrawlState, snapshot: &UserSnapshot, now: Timestamp) -> f64 {
    if state.seen_tweets >= 2 {
        if let (Some(first), Some(last)) = (state.first_seen_tweet, state.last_seen_tweet) {
            let span = (last.timestamp() - first.timestamp()) as f64 / DAY as f64;
            if span > 0.0 {
                return state.seen_tweets as f64 / span;
            }
        }
    }
    let age = (now - snapshot.created_at) as f64 / DAY as f64;
    if age <= 0.0 {
        return 0.0;
    }
    snapshot.tweet_count as f64 / age
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrawlPlanEntry {
    pub user: UserId,
    pub expected_new: f64,
    /// Seconds since the last visit.
    pub staleness: i64,
}

/// Plan entry for one user. Never-crawled users count as stale since
/// account creation and use the lifetime rate.
pub fn plan_entry(state: &CrawlState, snapshot: Option<&UserSnapshot>, now: Timestamp) -> CrawlPlanEntry {
    let (staleness, rate) = match (state.last_crawled_at, snapshot) {
        (Some(t), _) => (now - t, state.est_rate),
        (None, Some(s)) => (now - s.created_at, estimate_rate(state, s, now)),
        (None, None) => (now - crate::model::SNOWFLAKE_EPOCH, state.est_rate),
    };
    let staleness = staleness.max(0);
    CrawlPlanEntry { user: state.user, expected_new: (rate.max(0.0) * staleness as f64 / DAY as f64), staleness }
}

/// The two visit queues: top `k` by expected new tweets and top `k` by
/// staleness, each descending with ties broken by smaller user id.
pub fn plan_tweet_crawl(entries: &[CrawlPlanEntry], k: usize) -> (Vec<CrawlPlanEntry>, Vec<CrawlPlanEntry>) {
    let mut by_expected = entries.to_vec();
    by_expected.sort_by(|a, b| b.expected_new.total_cmp(&a.expected_new).then(a.user.cmp(&b.user)));
    by_expected.truncate(k);
    let mut by_staleness = entries.to_vec();
    by_staleness.sort_by(|a, b| b.staleness.cmp(&a.staleness).then(a.user.cmp(&b.user)));
    by_staleness.truncate(k);
    (by_expected, by_staleness)
}
