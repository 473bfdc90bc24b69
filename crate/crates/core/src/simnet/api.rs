use std::collections::{BTreeMap, HashMap};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apiface::{
    window_start, ApiError, ApiResult, Endpoint, IdPage, LookupResult, ProfilePage, RequestRecord, RequestTarget,
    SocialApi, TimelinePage, WINDOW_SECS,
};
use crate::model::{FavoriteRecord, ListRecord, Timestamp, TrendSnapshot, Tweet, TweetId, UserId, UserSnapshot};

use super::world::{AccountStatus, SimList, SimUser, World};

/// Timeline responses cut longer texts, as the classic API did.
const TIMELINE_TEXT_LIMIT: usize = 140;
/// Deepest a timeline can be paged.
const TIMELINE_DEPTH: usize = 3200;

fn truncate_view(t: &Tweet) -> Tweet {
    let mut t = t.clone();
    if t.text.chars().count() > TIMELINE_TEXT_LIMIT {
        t.text = t.text.chars().take(TIMELINE_TEXT_LIMIT - 1).chain(std::iter::once('…')).collect();
        t.truncated = true;
    }
    t
}

impl World {
    /// Enforces the platform's own budget and logs the request, rejected or not.
    fn serve<T>(&self, e: Endpoint, target: RequestTarget, f: impl FnOnce() -> ApiResult<T>) -> ApiResult<T> {
        let now = self.clock;
        let start = window_start(now);
        let max = self.budgets.get(e).max_requests;
        let mut log = self.log.lock().expect("log lock poisoned");
        let w = log.windows.entry(e).or_insert((start, 0));
        if w.0 != start {
            *w = (start, 0);
        }
        let result = if w.1 >= max {
            Err(ApiError::RateLimited { endpoint: e, retry_after: start + WINDOW_SECS - now })
        } else {
            w.1 += 1;
            f()
        };
        let outcome = match &result {
            Ok(_) => "ok".to_string(),
            Err(err) => err.kind().to_string(),
        };
        log.records.push(RequestRecord { endpoint: e, target, at: now, outcome });
        result
    }

    fn visible_user(&self, u: UserId, allow_protected: bool) -> ApiResult<&SimUser> {
        let su = self.user(u).ok_or(ApiError::UserNotFound(u))?;
        match su.status {
            AccountStatus::Deleted => Err(ApiError::UserNotFound(u)),
            AccountStatus::Suspended => Err(ApiError::UserSuspended(u)),
            AccountStatus::Active if su.protected && !allow_protected => Err(ApiError::UserProtected(u)),
            AccountStatus::Active => Ok(su),
        }
    }

    fn is_listed(&self, u: UserId) -> bool {
        self.user(u).is_some_and(|su| su.is_active())
    }

    fn id_page(&self, ids: Vec<UserId>, cursor: u64, page: usize) -> IdPage {
        let start = (cursor as usize).min(ids.len());
        let end = (start + page).min(ids.len());
        IdPage { ids: ids[start..end].to_vec(), next: (end < ids.len()).then_some(end as u64) }
    }

    fn ids(&self, e: Endpoint, user: UserId, cursor: u64, friends: bool) -> ApiResult<IdPage> {
        self.serve(e, RequestTarget::User(user), || {
            let su = self.visible_user(user, false)?;
            let set = if friends { &su.friends } else { &su.followers };
            let ids: Vec<UserId> = set.iter().copied().filter(|&v| self.is_listed(v)).collect();
            Ok(self.id_page(ids, cursor, self.budgets.get(e).page_size.max(1)))
        })
    }

    fn profiles(&self, e: Endpoint, user: UserId, cursor: u64, friends: bool) -> ApiResult<ProfilePage> {
        self.serve(e, RequestTarget::User(user), || {
            let su = self.visible_user(user, false)?;
            let set = if friends { &su.friends } else { &su.followers };
            let ids: Vec<UserId> = set.iter().copied().filter(|&v| self.is_listed(v)).collect();
            let page = self.id_page(ids, cursor, self.budgets.get(e).page_size.max(1));
            let users = page.ids.iter().map(|v| self.snapshot(&self.users[v.0 as usize - 1])).collect();
            Ok(ProfilePage { users, next: page.next })
        })
    }

    fn list_records<'a>(&'a self, ids: impl Iterator<Item = &'a u64>) -> Vec<ListRecord> {
        ids.filter_map(|&id| self.list(id))
            .map(|l: &SimList| ListRecord { list_id: l.id, owner: l.owner, name: l.name.clone() })
            .collect()
    }

    fn lists_of(&self, e: Endpoint, user: UserId, pick: fn(&SimUser) -> &std::collections::BTreeSet<u64>) -> ApiResult<Vec<ListRecord>> {
        self.serve(e, RequestTarget::User(user), || {
            let su = self.visible_user(user, true)?;
            Ok(self.list_records(pick(su).iter()))
        })
    }

    /// Deterministic sampler for the stream: depends on seed, clock and how
    /// often the stream has been called, never on the world RNG.
    fn stream_rng(&self) -> ChaCha8Rng {
        let mut log = self.log.lock().expect("log lock poisoned");
        log.stream_calls += 1;
        let mix = self.cfg.seed ^ (self.clock as u64).rotate_left(17) ^ log.stream_calls.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        ChaCha8Rng::seed_from_u64(mix)
    }
}

impl SocialApi for World {
    fn now(&self) -> Timestamp {
        self.clock
    }

    fn user_timeline(&self, user: UserId, since: Option<TweetId>, max: Option<TweetId>, count: usize) -> ApiResult<TimelinePage> {
        self.serve(Endpoint::UserTimeline, RequestTarget::User(user), || {
            let page = self.budgets.get(Endpoint::UserTimeline).page_size;
            if count > page {
                return Err(ApiError::InvalidRequest(format!("count {count} exceeds page size {page}")));
            }
            let su = self.visible_user(user, false)?;
            let live = &su.tweets;
            let reachable = &live[live.len().saturating_sub(TIMELINE_DEPTH)..];
            let hi = max.map_or(reachable.len(), |m| reachable.partition_point(|&id| id <= m));
            let lo = since.map_or(0, |s| reachable.partition_point(|&id| id <= s));
            let tweets = if lo >= hi {
                Vec::new()
            } else {
                reachable[lo.max(hi.saturating_sub(count))..hi]
                    .iter()
                    .rev()
                    .map(|id| truncate_view(&self.tweets[id].tweet))
                    .collect()
            };
            Ok(TimelinePage { tweets, author: Some(self.snapshot(su)) })
        })
    }

    fn statuses_lookup(&self, ids: &[TweetId]) -> ApiResult<BTreeMap<TweetId, LookupResult>> {
        self.serve(Endpoint::StatusesLookup, RequestTarget::Tweets(ids.len()), || {
            let page = self.budgets.get(Endpoint::StatusesLookup).page_size;
            if ids.is_empty() || ids.len() > page {
                return Err(ApiError::InvalidRequest(format!("lookup takes 1..={page} ids, got {}", ids.len())));
            }
            Ok(ids
                .iter()
                .map(|&id| {
                    let found = self.tweet_live(id).and_then(|t| {
                        let au = self.user(t.author)?;
                        (au.is_active() && !au.protected)
                            .then(|| LookupResult::Found { tweet: Box::new(t.clone()), author: Box::new(self.snapshot(au)) })
                    });
                    (id, found.unwrap_or(LookupResult::Gone))
                })
                .collect())
        })
    }

    fn users_show(&self, user: UserId) -> ApiResult<UserSnapshot> {
        self.serve(Endpoint::UsersShow, RequestTarget::User(user), || {
            Ok(self.snapshot(self.visible_user(user, true)?))
        })
    }

    fn friends_ids(&self, user: UserId, cursor: u64) -> ApiResult<IdPage> {
        self.ids(Endpoint::FriendsIds, user, cursor, true)
    }

    fn followers_ids(&self, user: UserId, cursor: u64) -> ApiResult<IdPage> {
        self.ids(Endpoint::FollowersIds, user, cursor, false)
    }

    fn friends_list(&self, user: UserId, cursor: u64) -> ApiResult<ProfilePage> {
        self.profiles(Endpoint::FriendsList, user, cursor, true)
    }

    fn followers_list(&self, user: UserId, cursor: u64) -> ApiResult<ProfilePage> {
        self.profiles(Endpoint::FollowersList, user, cursor, false)
    }

    fn favorites_list(&self, user: UserId, max: Option<TweetId>, count: usize) -> ApiResult<Vec<FavoriteRecord>> {
        self.serve(Endpoint::FavoritesList, RequestTarget::User(user), || {
            let page = self.budgets.get(Endpoint::FavoritesList).page_size;
            if count > page {
                return Err(ApiError::InvalidRequest(format!("count {count} exceeds page size {page}")));
            }
            let su = self.visible_user(user, false)?;
            let upper = max.map_or(u64::MAX, |m| m.0);
            Ok(su
                .likes
                .range(..=TweetId(upper.max(1)))
                .rev()
                .filter(|(id, like)| self.tweet_live(**id).is_some() && self.is_listed(like.author))
                .take(count)
                .map(|(id, like)| FavoriteRecord { user, tweet: *id, tweet_author: like.author, observed_at: self.clock })
                .collect())
        })
    }

    fn lists_memberships(&self, user: UserId) -> ApiResult<Vec<ListRecord>> {
        self.lists_of(Endpoint::ListsMemberships, user, |u| &u.lists_member)
    }

    fn lists_ownerships(&self, user: UserId) -> ApiResult<Vec<ListRecord>> {
        self.lists_of(Endpoint::ListsOwnerships, user, |u| &u.lists_owned)
    }

    fn lists_subscriptions(&self, user: UserId) -> ApiResult<Vec<ListRecord>> {
        self.lists_of(Endpoint::ListsSubscriptions, user, |u| &u.lists_subscribed)
    }

    fn lists_members(&self, list_id: u64, cursor: u64) -> ApiResult<IdPage> {
        self.serve(Endpoint::ListsMembers, RequestTarget::List(list_id), || {
            let l = self.list(list_id).ok_or(ApiError::ListNotFound(list_id))?;
            let ids: Vec<UserId> = l.members.iter().copied().filter(|&v| self.is_listed(v)).collect();
            Ok(self.id_page(ids, cursor, self.budgets.get(Endpoint::ListsMembers).page_size.max(1)))
        })
    }

    fn trends_place(&self, place: &str) -> ApiResult<TrendSnapshot> {
        self.serve(Endpoint::TrendsPlace, RequestTarget::Place(place.to_string()), || {
            if !self.cfg.places.iter().any(|p| p == place) {
                return Err(ApiError::PlaceUnknown(place.to_string()));
            }
            let since = self.clock - WINDOW_SECS;
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for id in &self.recent {
                if let Some(t) = self.tweet_live(*id) {
                    if t.created_at >= since && t.lang == self.cfg.target_lang {
                        for h in &t.hashtags {
                            *counts.entry(h.as_str()).or_default() += 1;
                        }
                    }
                }
            }
            let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            let mut trends: Vec<String> = ranked.into_iter().take(10).map(|(h, _)| format!("#{h}")).collect();
            if trends.is_empty() {
                trends.push(format!("#{}", place.to_lowercase()));
            }
            Ok(TrendSnapshot { place: place.to_string(), observed_at: self.clock, trends })
        })
    }

    fn stream_filter(&self, keywords: &[String], budget: usize) -> ApiResult<Vec<Tweet>> {
        let mut rng = self.stream_rng();
        self.serve(Endpoint::StreamFilter, RequestTarget::Keywords(keywords.len()), || {
            if keywords.is_empty() {
                return Err(ApiError::InvalidRequest("stream filter needs at least one keyword".into()));
            }
            let cap = budget.min(self.budgets.get(Endpoint::StreamFilter).page_size);
            let keys: Vec<String> = keywords.iter().map(|k| k.to_lowercase()).collect();
            let matches: Vec<&Tweet> = self
                .recent
                .iter()
                .filter_map(|id| self.tweet_live(*id))
                .filter(|t| self.user(t.author).is_some_and(|u| u.is_active() && !u.protected))
                .filter(|t| {
                    let text = t.text.to_lowercase();
                    keys.iter().any(|k| text.split_whitespace().any(|w| w == k))
                })
                .collect();
            let mut sample: Vec<Tweet> = matches.choose_multiple(&mut rng, cap).map(|t| truncate_view(t)).collect();
            sample.sort_by_key(|t| t.id);
            Ok(sample)
        })
    }
}
