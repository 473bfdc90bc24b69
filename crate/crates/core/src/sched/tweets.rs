use std::collections::{BTreeMap, BTreeSet};

use crate::apiface::{ApiError, Endpoint, LookupResult, RequestTarget, SocialApi};
use crate::model::{tweet_refs, CrawlState, GoneRecord, Timestamp, Tweet, TweetId, UserId, DAY};
use crate::store::{Store, TweetOutcome};

use super::{apply_api_error, estimate_rate, Gate, SchedulerConfig};

/// An in-flight backward pagination through one user's timeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descent {
    pub since: Option<TweetId>,
    pub next_max: Option<TweetId>,
    pub newest: Option<TweetId>,
    pub oldest: Option<TweetId>,
    pub fetched: u64,
    /// New tweets the profile counter says are waiting, when known.
    pub remaining: Option<u64>,
    pub author_count: Option<u64>,
    pub pages: u32,
}

impl Descent {
    pub fn start(state: &CrawlState) -> Descent {
        Descent {
            since: state.last_seen_tweet,
            next_max: None,
            newest: None,
            oldest: None,
            fetched: 0,
            remaining: None,
            author_count: None,
            pages: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TweetVisit {
    /// Tweets newly inserted or upgraded by this visit.
    pub stored: Vec<(TweetOutcome, Tweet)>,
    pub requests: u32,
    /// Set when the visit ran out of permits; pass it back to resume.
    pub pending: Option<Descent>,
    pub complete: bool,
    pub error: Option<ApiError>,
}

/// Pages backward from the newest tweet until the previous visit's newest
/// tweet is reached, the profile counter says nothing is left, or the
/// timeline depth cap is hit. Crawl state is committed only when the
/// descent completes.
pub fn crawl_user_tweets<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    u: UserId,
    resume: Option<Descent>,
) -> TweetVisit {
    let now = api.now();
    let mut state = store.crawl_state_or_new(u);
    let mut d = resume.unwrap_or_else(|| Descent::start(&state));
    let mut visit = TweetVisit::default();
    loop {
        let page = match gate.call(api, Endpoint::UserTimeline, RequestTarget::User(u), |a| {
            a.user_timeline(u, d.since, d.next_max, cfg.timeline_page)
        }) {
            Ok(p) => p,
            Err(ApiError::RateLimited { .. }) => {
                visit.pending = Some(d);
                return visit;
            }
            Err(e) => {
                apply_api_error(store, u, &e, now);
                visit.error = Some(e);
                return visit;
            }
        };
        visit.requests += 1;
        if let Some(author) = page.author {
            if d.pages == 0 {
                d.author_count = Some(author.tweet_count);
                if d.since.is_some() {
                    d.remaining = state.tweet_count_at_crawl.map(|c| author.tweet_count.saturating_sub(c));
                }
            }
            store.put_snapshot_demoting(author);
        }
        d.pages += 1;
        let n = page.tweets.len();
        for t in page.tweets {
            d.newest = d.newest.max(Some(t.id));
            d.oldest = Some(d.oldest.map_or(t.id, |o| o.min(t.id)));
            let outcome = store.put_tweet(t.clone());
            if outcome != TweetOutcome::Duplicate {
                visit.stored.push((outcome, t));
            }
        }
        d.fetched += n as u64;
        d.next_max = d.oldest.and_then(|o| o.0.checked_sub(1)).filter(|&m| m > 0).map(TweetId);
        let done = n < cfg.timeline_page
            || d.fetched >= cfg.timeline_cap
            || d.remaining.is_some_and(|r| d.fetched >= r)
            || d.next_max.is_none();
        if done {
            break;
        }
    }

    let prev_crawl = state.last_crawled_at;
    state.last_seen_tweet = state.last_seen_tweet.max(d.newest);
    if let Some(o) = d.oldest {
        state.first_seen_tweet = Some(state.first_seen_tweet.map_or(o, |f| f.min(o)));
    }
    state.first_crawled_at.get_or_insert(now);
    state.last_crawled_at = Some(now);
    state.cap_reached |= d.fetched >= cfg.timeline_cap;
    state.seen_tweets += d.fetched;
    if d.author_count.is_some() {
        state.tweet_count_at_crawl = d.author_count;
    }
    state.est_rate = match prev_crawl {
        Some(prev) if now > prev => {
            let observed = d.fetched as f64 / ((now - prev) as f64 / DAY as f64);
            cfg.rate_alpha * observed + (1.0 - cfg.rate_alpha) * state.est_rate
        }
        Some(_) => state.est_rate,
        None => store.latest_snapshot(u).map_or(0.0, |s| estimate_rate(&state, &s, now)),
    };
    store.put_crawl_state(state);
    visit.complete = true;
    visit
}

/// Who pointed at a tweet the store does not hold in full.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingRef {
    pub author: UserId,
    pub referenced_by: UserId,
}

/// Tweet ids awaiting `/statuses/lookup`, plus ids that came back gone once
/// and wait for their retry.
#[derive(Debug, Default, Clone)]
pub struct LookupQueue {
    pending: BTreeMap<TweetId, PendingRef>,
    retry: BTreeMap<TweetId, (Timestamp, PendingRef)>,
    retried: BTreeSet<TweetId>,
}

impl LookupQueue {
    pub fn new() -> LookupQueue {
        LookupQueue::default()
    }

    pub fn push(&mut self, id: TweetId, r: PendingRef) {
        if !self.retry.contains_key(&id) {
            self.pending.entry(id).or_insert(r);
        }
    }

    /// Queues every reference of `t` the store lacks, and `t` itself when
    /// it is truncated.
    pub fn push_refs(&mut self, t: &Tweet, store: &Store) {
        if t.truncated {
            self.push(t.id, PendingRef { author: t.author, referenced_by: t.author });
        }
        for r in tweet_refs(t) {
            if !store.has_tweet(r.tweet) {
                self.push(r.tweet, PendingRef { author: r.user, referenced_by: t.author });
            }
        }
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn waiting_retry(&self) -> usize {
        self.retry.len()
    }

    fn release_due(&mut self, now: Timestamp) {
        let due: Vec<TweetId> = self.retry.iter().filter(|(_, (at, _))| *at <= now).map(|(id, _)| *id).collect();
        for id in due {
            let (_, r) = self.retry.remove(&id).expect("present");
            self.pending.insert(id, r);
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LookupOutcome {
    pub resolved: usize,
    pub gone: usize,
    pub requests: u32,
    /// Tweets newly inserted or upgraded.
    pub stored: Vec<(TweetOutcome, Tweet)>,
}

/// Resolves queued ids in batches. A gone id is retried once after
/// `gone_retry_after`, then recorded permanently.
pub fn lookup_pass<A: SocialApi + ?Sized>(
    api: &A,
    gate: &mut Gate,
    store: &Store,
    cfg: &SchedulerConfig,
    queue: &mut LookupQueue,
) -> LookupOutcome {
    let now = api.now();
    queue.release_due(now);
    let mut out = LookupOutcome::default();
    while !queue.pending.is_empty() {
        let batch: Vec<(TweetId, PendingRef)> =
            queue.pending.iter().take(cfg.lookup_batch).map(|(k, v)| (*k, *v)).collect();
        let ids: Vec<TweetId> = batch.iter().map(|(id, _)| *id).collect();
        let result = match gate.call(api, Endpoint::StatusesLookup, RequestTarget::Tweets(ids.len()), |a| {
            a.statuses_lookup(&ids)
        }) {
            Ok(r) => r,
            Err(_) => break,
        };
        out.requests += 1;
        for (id, r) in batch {
            queue.pending.remove(&id);
            match result.get(&id) {
                Some(LookupResult::Found { tweet, author }) => {
                    out.resolved += 1;
                    store.put_snapshot_demoting((**author).clone());
                    let outcome = store.put_tweet((**tweet).clone());
                    if outcome != TweetOutcome::Duplicate {
                        out.stored.push((outcome, (**tweet).clone()));
                    }
                }
                _ => {
                    out.gone += 1;
                    if queue.retried.insert(id) {
                        queue.retry.insert(id, (now + cfg.gone_retry_after, r));
                    } else {
                        store.record_gone(GoneRecord {
                            tweet: id,
                            author: r.author,
                            referenced_by: r.referenced_by,
                            observed_at: now,
                        });
                    }
                }
            }
        }
    }
    out
}
