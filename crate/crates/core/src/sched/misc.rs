use crate::apiface::{ApiError, Endpoint, RequestTarget, SocialApi};
use crate::model::{Timestamp, UserClass, UserId};
use crate::store::{SnapshotOutcome, Store};

use super::{apply_api_error, Gate, SchedulerConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProfileRefresh {
    pub stored: usize,
    pub skipped: usize,
    /// Users not yet due.
    pub not_due: usize,
    pub requests: u32,
}

/// Fetches the profile of every due user in `users`, stopping when permits
/// run out. A user is due when never fetched or fetched at least
/// `profile_refresh_window` ago.
pub fn refresh_profiles<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    users: &[UserId],
) -> ProfileRefresh {
    let now = api.now();
    let mut out = ProfileRefresh::default();
    for &u in users {
        let mut st = store.crawl_state_or_new(u);
        if st.profile_fetched_at.is_some_and(|t| now - t < cfg.profile_refresh_window) {
            out.not_due += 1;
            continue;
        }
        match gate.call(api, Endpoint::UsersShow, RequestTarget::User(u), |a| a.users_show(u)) {
            Ok(s) => {
                out.requests += 1;
                match store.put_snapshot_demoting(s).0 {
                    SnapshotOutcome::Stored => out.stored += 1,
                    SnapshotOutcome::SkippedTweetCountOnly => out.skipped += 1,
                }
            }
            Err(ApiError::RateLimited { .. }) => break,
            Err(e) => {
                out.requests += 1;
                apply_api_error(store, u, &e, now);
            }
        }
        st.profile_fetched_at = Some(now);
        store.put_crawl_state(st);
    }
    out
}

/// Appends a trend snapshot when the last poll is at least `trends_period`
/// old. An unknown place is logged and skipped.
pub fn poll_trends<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    last_poll: &mut Option<Timestamp>,
) -> bool {
    let now = api.now();
    if last_poll.is_some_and(|t| now - t < cfg.trends_period) {
        return false;
    }
    let place = cfg.place.clone();
    match gate.call(api, Endpoint::TrendsPlace, RequestTarget::Place(place.clone()), |a| a.trends_place(&place)) {
        Ok(t) => {
            store.append_trend(t);
            *last_poll = Some(now);
            true
        }
        Err(ApiError::RateLimited { .. }) => false,
        Err(e) => {
            log::warn!("trend poll for {place} failed: {e}");
            *last_poll = Some(now);
            false
        }
    }
}

/// Samples the keyword stream and marks unseen authors Tracked. Users in a
/// class that blocks seeding, or already classified, are left alone.
pub fn seed_from_stream<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    keywords: &[String],
    budget: usize,
) -> Vec<UserId> {
    if budget == 0 || keywords.is_empty() {
        return Vec::new();
    }
    let now = api.now();
    let tweets = match gate.call(api, Endpoint::StreamFilter, RequestTarget::Keywords(keywords.len()), |a| {
        a.stream_filter(keywords, budget)
    }) {
        Ok(t) => t,
        Err(_) => return Vec::new(),
    };
    let mut added = Vec::new();
    for t in tweets {
        if store.class_of(t.author) == UserClass::Unknown {
            store.set_class(t.author, UserClass::Tracked, now);
            added.push(t.author);
        }
    }
    added
}
