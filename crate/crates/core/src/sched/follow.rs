use crate::apiface::{ApiError, Endpoint, RequestTarget, SocialApi};
use crate::model::{FollowDirection, FollowEdge, FollowScan, Timestamp, TweetId, UserId};
use crate::store::Store;

use super::{apply_api_error, Gate, SchedulerConfig};

/// Cursor position of an unfinished enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowProgress {
    pub started_at: Timestamp,
    pub cursor: u64,
    pub ids: Vec<UserId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowStep {
    pub requests: u32,
    /// Edges appended (ids) or snapshots seen (profiles); zero until complete.
    pub records: usize,
    pub skipped: bool,
    pub pending: Option<FollowProgress>,
    pub error: Option<ApiError>,
    /// The complete neighbor list, once the enumeration finished.
    pub neighbors: Option<Vec<UserId>>,
}

fn scanned_at(store: &Store, u: UserId, direction: FollowDirection, profiles: bool) -> Option<Timestamp> {
    let st = store.crawl_state(u)?;
    match (direction, profiles) {
        (FollowDirection::Friends, false) => st.friends_scanned_at,
        (FollowDirection::Followers, false) => st.followers_scanned_at,
        (FollowDirection::Friends, true) => st.friends_profiles_scanned_at,
        (FollowDirection::Followers, true) => st.followers_profiles_scanned_at,
    }
}

pub(crate) fn follow_due(store: &Store, cfg: &SchedulerConfig, u: UserId, dir: FollowDirection, profiles: bool, now: Timestamp) -> bool {
    scanned_at(store, u, dir, profiles).is_none_or(|t| now - t >= cfg.follow_recrawl_window)
}

/// Enumerates the friend or follower ids of `u` and appends the edges, all
/// stamped with the scan start. Skipped while the last scan is younger than
/// the recrawl window.
pub fn crawl_follow<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    u: UserId,
    direction: FollowDirection,
    resume: Option<FollowProgress>,
) -> FollowStep {
    let now = api.now();
    let mut step = FollowStep::default();
    if resume.is_none() && !follow_due(store, cfg, u, direction, false, now) {
        step.skipped = true;
        return step;
    }
    let mut p = resume.unwrap_or(FollowProgress { started_at: now, cursor: 0, ids: Vec::new() });
    let endpoint = match direction {
        FollowDirection::Friends => Endpoint::FriendsIds,
        FollowDirection::Followers => Endpoint::FollowersIds,
    };
    loop {
        let r = gate.call(api, endpoint, RequestTarget::User(u), |a| match direction {
            FollowDirection::Friends => a.friends_ids(u, p.cursor),
            FollowDirection::Followers => a.followers_ids(u, p.cursor),
        });
        match r {
            Ok(page) => {
                step.requests += 1;
                p.ids.extend(page.ids);
                match page.next {
                    Some(c) => p.cursor = c,
                    None => break,
                }
            }
            Err(ApiError::RateLimited { .. }) => {
                step.pending = Some(p);
                return step;
            }
            Err(e) => {
                apply_api_error(store, u, &e, now);
                step.error = Some(e);
                return step;
            }
        }
    }
    let at = p.started_at;
    let edges: Vec<FollowEdge> = p
        .ids
        .iter()
        .filter_map(|&v| match direction {
            FollowDirection::Friends => FollowEdge::new(u, v, at),
            FollowDirection::Followers => FollowEdge::new(v, u, at),
        })
        .collect();
    step.records = edges.len();
    store.append_follows(edges);
    store.record_follow_scan(FollowScan { user: u, direction, observed_at: at });
    let mut st = store.crawl_state_or_new(u);
    match direction {
        FollowDirection::Friends => st.friends_scanned_at = Some(at),
        FollowDirection::Followers => st.followers_scanned_at = Some(at),
    }
    store.put_crawl_state(st);
    step.neighbors = Some(p.ids);
    step
}

/// Enumerates the friend or follower profiles of `u`, storing a snapshot of
/// each under the usual dedup rule.
pub fn crawl_follow_profiles<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    u: UserId,
    direction: FollowDirection,
    resume: Option<FollowProgress>,
) -> FollowStep {
    let now = api.now();
    let mut step = FollowStep::default();
    if resume.is_none() && !follow_due(store, cfg, u, direction, true, now) {
        step.skipped = true;
        return step;
    }
    let mut p = resume.unwrap_or(FollowProgress { started_at: now, cursor: 0, ids: Vec::new() });
    let endpoint = match direction {
        FollowDirection::Friends => Endpoint::FriendsList,
        FollowDirection::Followers => Endpoint::FollowersList,
    };
    loop {
        let r = gate.call(api, endpoint, RequestTarget::User(u), |a| match direction {
            FollowDirection::Friends => a.friends_list(u, p.cursor),
            FollowDirection::Followers => a.followers_list(u, p.cursor),
        });
        match r {
            Ok(page) => {
                step.requests += 1;
                for s in page.users {
                    p.ids.push(s.id);
                    store.put_snapshot_demoting(s);
                }
                match page.next {
                    Some(c) => p.cursor = c,
                    None => break,
                }
            }
            Err(ApiError::RateLimited { .. }) => {
                step.pending = Some(p);
                return step;
            }
            Err(e) => {
                apply_api_error(store, u, &e, now);
                step.error = Some(e);
                return step;
            }
        }
    }
    step.records = p.ids.len();
    let mut st = store.crawl_state_or_new(u);
    match direction {
        FollowDirection::Friends => st.friends_profiles_scanned_at = Some(p.started_at),
        FollowDirection::Followers => st.followers_profiles_scanned_at = Some(p.started_at),
    }
    store.put_crawl_state(st);
    step.neighbors = Some(p.ids);
    step
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FavoriteProgress {
    pub max: Option<TweetId>,
    pub known_seen: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FavoriteScan {
    pub stored: usize,
    pub known_seen: usize,
    pub requests: u32,
    pub pending: Option<FavoriteProgress>,
    pub error: Option<ApiError>,
}

pub(crate) fn favorites_due(store: &Store, cfg: &SchedulerConfig, u: UserId, now: Timestamp) -> bool {
    store
        .crawl_state(u)
        .and_then(|s| s.favorites_scanned_at)
        .is_none_or(|t| now - t >= cfg.favorites_rescan_window)
}

/// Pages through the likes of `u`, newest liked tweet first. Known likes do
/// not end the scan by themselves: it stops after a page on which the
/// running count of known likes reached `favorites_known_stop`, or at the
/// end of the enumeration.
pub fn crawl_favorites<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    u: UserId,
    resume: Option<FavoriteProgress>,
) -> FavoriteScan {
    let now = api.now();
    let page_size = gate.budgets().get(Endpoint::FavoritesList).page_size;
    let mut p = resume.unwrap_or(FavoriteProgress { max: None, known_seen: 0 });
    let mut scan = FavoriteScan { known_seen: p.known_seen, ..FavoriteScan::default() };
    loop {
        let r = gate.call(api, Endpoint::FavoritesList, RequestTarget::User(u), |a| a.favorites_list(u, p.max, page_size));
        let page = match r {
            Ok(page) => page,
            Err(ApiError::RateLimited { .. }) => {
                scan.pending = Some(p);
                return scan;
            }
            Err(e) => {
                apply_api_error(store, u, &e, now);
                scan.error = Some(e);
                return scan;
            }
        };
        scan.requests += 1;
        let n = page.len();
        for rec in page {
            p.max = rec.tweet.0.checked_sub(1).filter(|&m| m > 0).map(TweetId);
            if store.put_favorite(rec) {
                scan.stored += 1;
            } else {
                p.known_seen += 1;
            }
        }
        scan.known_seen = p.known_seen;
        if n < page_size || p.known_seen >= cfg.favorites_known_stop || p.max.is_none() {
            break;
        }
    }
    let mut st = store.crawl_state_or_new(u);
    st.favorites_scanned_at = Some(now);
    store.put_crawl_state(st);
    scan
}
