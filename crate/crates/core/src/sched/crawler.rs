use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::apiface::{BudgetConfig, Endpoint, RequestRecord, SocialApi, WINDOW_SECS};
use crate::classify::{classify_user, daily_pass, neighbor_resolve, retweet_seed, ClassifierConfig, LangStats, SeedDecision, Verdict};
use crate::model::{FollowDirection, Timestamp, Tweet, TweetId, UserClass, UserId, DAY};
use crate::simnet::World;
use crate::store::{Store, TweetOutcome};

use super::follow::{favorites_due, follow_due};
use super::{
    crawl_favorites, crawl_follow, crawl_follow_profiles, crawl_lists, crawl_user_tweets, lookup_pass, plan_entry,
    plan_tweet_crawl, poll_trends, refresh_profiles, seed_from_stream, Descent, FavoriteProgress, FollowProgress, Gate,
    ListRoundRobin, LookupQueue, Policy, SchedulerConfig,
};

/// What one window of crawling did.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WindowReport {
    pub at: Timestamp,
    pub requests: usize,
    pub timeline_requests: u32,
    pub visits: usize,
    pub tweets_stored: usize,
    pub lookups_resolved: usize,
    pub gone: usize,
    pub seeded: usize,
    pub promoted: usize,
    pub stopped: usize,
}

const FOLLOW_WORKERS: [(FollowDirection, bool); 4] = [
    (FollowDirection::Friends, false),
    (FollowDirection::Followers, false),
    (FollowDirection::Friends, true),
    (FollowDirection::Followers, true),
];

/// All crawl loops over one store and one rate limiter. Loops run in a fixed
/// order each window, which keeps the request log a pure function of the
/// world and the configs.
#[derive(Debug)]
pub struct Crawler {
    store: Store,
    gate: Gate,
    cfg: SchedulerConfig,
    ccfg: ClassifierConfig,
    stats: BTreeMap<UserId, LangStats>,
    evidence: BTreeMap<UserId, BTreeSet<TweetId>>,
    /// Targets promoted by the neighbor rule alone; tweet evidence may still stop them.
    inferred: BTreeSet<UserId>,
    lookups: LookupQueue,
    descents: BTreeMap<UserId, Descent>,
    follow_progress: [Option<(UserId, FollowProgress)>; 4],
    favorite_progress: Option<(UserId, FavoriteProgress)>,
    lists: ListRoundRobin,
    friends: BTreeMap<UserId, BTreeSet<UserId>>,
    followers: BTreeMap<UserId, BTreeSet<UserId>>,
    last_trends: Option<Timestamp>,
    next_daily: Option<Timestamp>,
    rr_pos: usize,
}

impl Crawler {
    pub fn new(store: Store, cfg: SchedulerConfig, ccfg: ClassifierConfig, budgets: BudgetConfig) -> Crawler {
        let mut c = Crawler {
            store,
            gate: Gate::new(budgets),
            cfg,
            ccfg,
            stats: BTreeMap::new(),
            evidence: BTreeMap::new(),
            inferred: BTreeSet::new(),
            lookups: LookupQueue::new(),
            descents: BTreeMap::new(),
            follow_progress: Default::default(),
            favorite_progress: None,
            lists: ListRoundRobin::new(),
            friends: BTreeMap::new(),
            followers: BTreeMap::new(),
            last_trends: None,
            next_daily: None,
            rr_pos: 0,
        };
        c.rebuild();
        c
    }

    /// Recomputes the in-memory indexes (language stats, latest neighbor
    /// sets) from the store, as after a restart.
    fn rebuild(&mut self) {
        let target = self.ccfg.target_lang.clone();
        let mut stats: BTreeMap<UserId, LangStats> = BTreeMap::new();
        self.store.for_each_tweet(|t| {
            stats.entry(t.author).or_insert_with(|| LangStats::new(t.author)).record(&t.lang, &target);
        });
        self.stats = stats;
        for (u, c) in self.store.classes() {
            let Some(snap) = self.store.latest_snapshot(u) else { continue };
            if c == UserClass::Target && classify_user(&self.stats(u), &snap, &self.ccfg) != Verdict::Target {
                self.inferred.insert(u);
            }
        }
        let mut latest: BTreeMap<(UserId, FollowDirection), Timestamp> = BTreeMap::new();
        for s in self.store.follow_scans() {
            let e = latest.entry((s.user, s.direction)).or_insert(s.observed_at);
            *e = (*e).max(s.observed_at);
        }
        for e in self.store.follow_edges() {
            if latest.get(&(e.src, FollowDirection::Friends)) == Some(&e.observed_at) {
                self.friends.entry(e.src).or_default().insert(e.dst);
            }
            if latest.get(&(e.dst, FollowDirection::Followers)) == Some(&e.observed_at) {
                self.followers.entry(e.dst).or_default().insert(e.src);
            }
        }
        for ((u, dir), _) in latest {
            match dir {
                FollowDirection::Friends => self.friends.entry(u).or_default(),
                FollowDirection::Followers => self.followers.entry(u).or_default(),
            };
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn into_store(self) -> Store {
        self.store
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    pub fn classifier_config(&self) -> &ClassifierConfig {
        &self.ccfg
    }

    pub fn run_log(&self) -> &[RequestRecord] {
        self.gate.log()
    }

    pub fn budgets(&self) -> &BudgetConfig {
        self.gate.budgets()
    }

    pub fn stats(&self, u: UserId) -> LangStats {
        self.stats.get(&u).copied().unwrap_or(LangStats::new(u))
    }

    pub fn all_stats(&self) -> &BTreeMap<UserId, LangStats> {
        &self.stats
    }

    pub fn pending_lookups(&self) -> usize {
        self.lookups.len()
    }

    /// Latest known friends ∪ followers of `u`.
    pub fn neighbors(&self, u: UserId) -> BTreeSet<UserId> {
        let mut n = self.friends.get(&u).cloned().unwrap_or_default();
        n.extend(self.followers.get(&u).into_iter().flatten().copied());
        n
    }

    /// Marks `users` Tracked unless already classified.
    pub fn seed(&mut self, users: &[UserId], now: Timestamp) {
        for &u in users {
            if self.store.class_of(u) == UserClass::Unknown {
                self.store.set_class(u, UserClass::Tracked, now);
            }
        }
    }

    fn ingest(&mut self, outcome: TweetOutcome, t: &Tweet, now: Timestamp) {
        if outcome == TweetOutcome::Inserted {
            self.stats
                .entry(t.author)
                .or_insert_with(|| LangStats::new(t.author))
                .record(&t.lang, &self.ccfg.target_lang);
        }
        self.lookups.push_refs(t, &self.store);
        let author_class = self.store.class_of(t.author);
        if author_class == UserClass::Dead {
            self.store.set_class(t.author, UserClass::Tracked, now);
        }
        if let Some((orig, a)) = t.retweet_of {
            if t.lang == self.ccfg.target_lang && author_class.is_crawled() && self.store.class_of(a) == UserClass::Unknown {
                let ev = self.evidence.entry(a).or_default();
                ev.insert(orig);
                if retweet_seed(ev.len(), &self.ccfg) == SeedDecision::Track {
                    self.store.set_class(a, UserClass::Tracked, now);
                    self.evidence.remove(&a);
                }
            }
        }
    }

    fn classify_after_visit(&mut self, u: UserId, now: Timestamp, rep: &mut WindowReport) {
        let class = self.store.class_of(u);
        let inferred = self.inferred.contains(&u);
        if class != UserClass::Tracked && !(class == UserClass::Target && inferred) {
            return;
        }
        let Some(snap) = self.store.latest_snapshot(u) else { return };
        match classify_user(&self.stats(u), &snap, &self.ccfg) {
            Verdict::Target if inferred => {
                self.inferred.remove(&u);
            }
            Verdict::Target => {
                self.store.set_class(u, UserClass::Target, now);
                rep.promoted += 1;
            }
            Verdict::Stop => {
                self.inferred.remove(&u);
                self.store.set_class(u, UserClass::Stopped, now);
                rep.stopped += 1;
            }
            Verdict::Inconclusive => {}
        }
    }

    fn daily<A: SocialApi + ?Sized>(&mut self, api: &A, rep: &mut WindowReport) {
        let now = api.now();
        let classes = self.store.classes();
        let tracked: Vec<LangStats> = classes
            .iter()
            .filter(|(_, c)| **c == UserClass::Tracked)
            .map(|(u, _)| self.stats(*u))
            .collect();
        for u in daily_pass(tracked.iter().map(|s| (s, UserClass::Tracked)), &self.ccfg) {
            self.store.set_class(u, UserClass::Stopped, now);
            rep.stopped += 1;
        }
        for (&u, &c) in &classes {
            if c != UserClass::Tracked || self.store.class_of(u) != UserClass::Tracked {
                continue;
            }
            let nb = self.neighbors(u);
            if let Ok(Verdict::Target) = neighbor_resolve(u, &nb, &classes, &self.ccfg) {
                self.inferred.insert(u);
                self.store.set_class(u, UserClass::Target, now);
                rep.promoted += 1;
            }
        }
    }

    fn visit<A: SocialApi + ?Sized>(&mut self, api: &A, u: UserId, resume: Option<Descent>, rep: &mut WindowReport) {
        let now = api.now();
        let v = crawl_user_tweets(api, &mut self.gate, &self.store, &self.cfg, u, resume);
        rep.timeline_requests += v.requests;
        rep.tweets_stored += v.stored.len();
        for (o, t) in &v.stored {
            self.ingest(*o, t, now);
        }
        if let Some(d) = v.pending {
            self.descents.insert(u, d);
        }
        if v.complete {
            rep.visits += 1;
            self.classify_after_visit(u, now, rep);
        }
    }

    fn tweet_loop<A: SocialApi + ?Sized>(&mut self, api: &A, rep: &mut WindowReport) {
        let now = api.now();
        let permits = |s: &Self| s.gate.remaining(Endpoint::UserTimeline, now);
        let pending: Vec<(UserId, Descent)> = std::mem::take(&mut self.descents).into_iter().collect();
        for (u, d) in pending {
            if permits(self) == 0 || !self.store.class_of(u).is_crawled() {
                if self.store.class_of(u).is_crawled() {
                    self.descents.insert(u, d);
                }
                continue;
            }
            self.visit(api, u, Some(d), rep);
        }
        let users = self.store.users_in(|c| c.is_crawled());
        let eligible = |s: &Self, u: UserId| {
            !s.descents.contains_key(&u)
                && s.store
                    .crawl_state(u)
                    .and_then(|st| st.last_crawled_at)
                    .is_none_or(|t| now - t >= s.cfg.min_revisit)
        };
        match self.cfg.policy {
            Policy::DualPriority => {
                let entries: Vec<_> = users
                    .iter()
                    .filter(|&&u| eligible(self, u))
                    .map(|&u| {
                        let st = self.store.crawl_state_or_new(u);
                        plan_entry(&st, self.store.latest_snapshot(u).as_ref(), now)
                    })
                    .collect();
                let (by_expected, by_staleness) = plan_tweet_crawl(&entries, permits(self) as usize);
                let mut visited: BTreeSet<UserId> = BTreeSet::new();
                let (mut e, mut s) = (by_expected.into_iter(), by_staleness.into_iter());
                let mut from_expected = true;
                loop {
                    if permits(self) == 0 {
                        break;
                    }
                    let next = if from_expected {
                        e.by_ref().find(|x| !visited.contains(&x.user)).or_else(|| s.by_ref().find(|x| !visited.contains(&x.user)))
                    } else {
                        s.by_ref().find(|x| !visited.contains(&x.user)).or_else(|| e.by_ref().find(|x| !visited.contains(&x.user)))
                    };
                    let Some(entry) = next else { break };
                    from_expected = !from_expected;
                    visited.insert(entry.user);
                    if self.store.class_of(entry.user).is_crawled() {
                        self.visit(api, entry.user, None, rep);
                    }
                }
            }
            Policy::RoundRobin => {
                if users.is_empty() {
                    return;
                }
                let start = self.rr_pos % users.len();
                for k in 0..users.len() {
                    if permits(self) == 0 {
                        break;
                    }
                    let i = (start + k) % users.len();
                    self.rr_pos = i + 1;
                    let u = users[i];
                    if eligible(self, u) && self.store.class_of(u).is_crawled() {
                        self.visit(api, u, None, rep);
                    }
                }
            }
        }
    }

    /// Crawled users, Targets first, then by id.
    fn work_order(&self) -> Vec<UserId> {
        let mut targets = self.store.users_in(|c| c == UserClass::Target);
        targets.extend(self.store.users_in(|c| c == UserClass::Tracked));
        targets
    }

    fn follow_loop<A: SocialApi + ?Sized>(&mut self, api: &A, order: &[UserId]) {
        let now = api.now();
        for (w, (dir, profiles)) in FOLLOW_WORKERS.into_iter().enumerate() {
            let endpoint = match (dir, profiles) {
                (FollowDirection::Friends, false) => Endpoint::FriendsIds,
                (FollowDirection::Followers, false) => Endpoint::FollowersIds,
                (FollowDirection::Friends, true) => Endpoint::FriendsList,
                (FollowDirection::Followers, true) => Endpoint::FollowersList,
            };
            let mut cursor = 0;
            while self.gate.remaining(endpoint, now) > 0 {
                let (u, resume) = match self.follow_progress[w].take() {
                    Some((u, p)) => (u, Some(p)),
                    None => {
                        let Some(pos) = order[cursor..]
                            .iter()
                            .position(|&u| follow_due(&self.store, &self.cfg, u, dir, profiles, now))
                        else {
                            break;
                        };
                        cursor += pos + 1;
                        (order[cursor - 1], None)
                    }
                };
                let step = if profiles {
                    crawl_follow_profiles(api, &mut self.gate, &self.store, &self.cfg, u, dir, resume)
                } else {
                    crawl_follow(api, &mut self.gate, &self.store, &self.cfg, u, dir, resume)
                };
                if let Some(p) = step.pending {
                    self.follow_progress[w] = Some((u, p));
                    break;
                }
                if let (Some(ids), false) = (step.neighbors, profiles) {
                    let set: BTreeSet<UserId> = ids.into_iter().filter(|&v| v != u).collect();
                    match dir {
                        FollowDirection::Friends => self.friends.insert(u, set),
                        FollowDirection::Followers => self.followers.insert(u, set),
                    };
                }
            }
        }
    }

    fn favorites_loop<A: SocialApi + ?Sized>(&mut self, api: &A, order: &[UserId]) {
        let now = api.now();
        let mut cursor = 0;
        while self.gate.remaining(Endpoint::FavoritesList, now) > 0 {
            let (u, resume) = match self.favorite_progress.take() {
                Some((u, p)) => (u, Some(p)),
                None => {
                    let Some(pos) = order[cursor..].iter().position(|&u| favorites_due(&self.store, &self.cfg, u, now)) else {
                        break;
                    };
                    cursor += pos + 1;
                    (order[cursor - 1], None)
                }
            };
            let scan = crawl_favorites(api, &mut self.gate, &self.store, &self.cfg, u, resume);
            if let Some(p) = scan.pending {
                self.favorite_progress = Some((u, p));
                break;
            }
        }
    }

    /// Runs every loop once against `api` at its current time.
    pub fn run_window<A: SocialApi + ?Sized>(&mut self, api: &A) -> WindowReport {
        let now = api.now();
        let before = self.gate.requests();
        let mut rep = WindowReport { at: now, ..WindowReport::default() };

        if self.next_daily.is_none_or(|t| now >= t) {
            self.daily(api, &mut rep);
            self.next_daily = Some(now + DAY);
        }

        let seeded = seed_from_stream(api, &mut self.gate, &self.store, &self.cfg.keywords, self.cfg.stream_budget);
        rep.seeded = seeded.len();

        poll_trends(api, &mut self.gate, &self.store, &self.cfg, &mut self.last_trends);

        self.tweet_loop(api, &mut rep);

        let lk = lookup_pass(api, &mut self.gate, &self.store, &self.cfg, &mut self.lookups);
        rep.lookups_resolved = lk.resolved;
        rep.gone = lk.gone;
        for (o, t) in &lk.stored {
            self.ingest(*o, t, now);
        }

        let order = self.work_order();
        self.follow_loop(api, &order);
        self.favorites_loop(api, &order);

        loop {
            let turn = crawl_lists(&mut self.lists, api, &mut self.gate, &self.store, &self.cfg, &order);
            if turn.requests == 0 {
                break;
            }
        }

        refresh_profiles(api, &mut self.gate, &self.store, &self.cfg, &order);

        rep.requests = self.gate.requests() - before;
        rep
    }
}

/// Alternates crawler windows with world advances for `horizon` seconds.
pub fn run_world(world: &mut World, crawler: &mut Crawler, horizon: i64) -> Vec<WindowReport> {
    let end = world.clock() + horizon;
    let mut reports = Vec::new();
    while world.clock() < end {
        reports.push(crawler.run_window(world));
        world.advance(WINDOW_SECS);
    }
    reports
}
