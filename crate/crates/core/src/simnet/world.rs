use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::io::Write;
use std::sync::Mutex;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::apiface::{BudgetConfig, RequestRecord};
use crate::model::{Timestamp, Tweet, TweetId, UrlEntity, UserId, UserSnapshot, DAY};

use super::config::WorldConfig;
use super::text;
use super::SimError;

/// The community a simulated user really belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueCommunity {
    Language(String),
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountStatus {
    Active,
    Suspended,
    Deleted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Like {
    pub author: UserId,
    pub liked_at: Timestamp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimUser {
    pub id: UserId,
    pub community: TrueCommunity,
    /// Probability that a tweet is written in the target language.
    pub target_share: f64,
    /// Language of the user's non-target tweets.
    pub other_lang: String,
    pub rate: f64,
    pub created_at: Timestamp,
    pub screen_name: String,
    pub name: String,
    pub bio: String,
    pub location: String,
    pub time_zone: String,
    pub ui_lang: String,
    pub profile_url: String,
    pub verified: bool,
    pub protected: bool,
    pub status: AccountStatus,
    /// Tweets older than the materialized history; counted, never served.
    pub archived: u64,
    /// Live tweets, ascending.
    pub tweets: Vec<TweetId>,
    pub likes: BTreeMap<TweetId, Like>,
    pub friends: BTreeSet<UserId>,
    pub followers: BTreeSet<UserId>,
    pub lists_member: BTreeSet<u64>,
    pub lists_owned: BTreeSet<u64>,
    pub lists_subscribed: BTreeSet<u64>,
}

impl SimUser {
    pub fn is_active(&self) -> bool {
        self.status == AccountStatus::Active
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimList {
    pub id: u64,
    pub owner: UserId,
    pub name: String,
    pub members: BTreeSet<UserId>,
    pub subscribers: BTreeSet<UserId>,
}

#[derive(Debug, Clone)]
pub(crate) struct SimTweet {
    pub tweet: Tweet,
    pub deleted: bool,
}

/// Parameters for a hand-built user.
#[derive(Debug, Clone)]
pub struct UserSpec {
    pub lang: String,
    pub target_share: f64,
    pub rate: f64,
    pub created_at: Option<Timestamp>,
    pub screen_name: Option<String>,
    pub name: Option<String>,
    pub bio: Option<String>,
    pub protected: bool,
}

impl UserSpec {
    /// A user tweeting only in `lang` at `rate` tweets/day.
    pub fn new(lang: &str, rate: f64) -> UserSpec {
        UserSpec {
            lang: lang.to_string(),
            target_share: f64::NAN,
            rate,
            created_at: None,
            screen_name: None,
            name: None,
            bio: None,
            protected: false,
        }
    }

    pub fn mixed(target_share: f64, rate: f64) -> UserSpec {
        UserSpec { target_share, ..UserSpec::new("", rate) }
    }
}

/// Content of a hand-posted tweet.
#[derive(Debug, Clone, Default)]
pub struct TweetDraft {
    pub text: String,
    pub lang: Option<String>,
    pub retweet_of: Option<TweetId>,
    pub reply_to: Option<TweetId>,
    pub quote_of: Option<TweetId>,
    pub mentions: Vec<UserId>,
    pub hashtags: Vec<String>,
    pub urls: Vec<UrlEntity>,
}

impl TweetDraft {
    pub fn text(text: &str) -> TweetDraft {
        TweetDraft { text: text.to_string(), ..TweetDraft::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    Tweet,
    Like,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    at: Timestamp,
    user: u32,
    kind: EventKind,
}

#[derive(Debug)]
struct Pool {
    members: Vec<UserId>,
    weights: WeightedIndex<f64>,
}

#[derive(Debug, Default)]
pub(crate) struct ApiLog {
    pub records: Vec<RequestRecord>,
    pub windows: HashMap<crate::apiface::Endpoint, (Timestamp, u32)>,
    pub stream_calls: u64,
}

/// The synthetic platform: users, their full tweet history, the true graphs
/// and a virtual clock. API views are computed from this state on demand.
pub struct World {
    pub(crate) cfg: WorldConfig,
    pub(crate) budgets: BudgetConfig,
    pub(crate) clock: Timestamp,
    rng: ChaCha8Rng,
    pub(crate) users: Vec<SimUser>,
    pub(crate) tweets: HashMap<TweetId, SimTweet>,
    pub(crate) lists: Vec<SimList>,
    next_seq: u64,
    events: BinaryHeap<Reverse<Event>>,
    next_day: Timestamp,
    daily_enabled: bool,
    pools: BTreeMap<String, Pool>,
    /// Tweets posted during the last `advance`.
    pub(crate) recent: Vec<TweetId>,
    pub(crate) log: Mutex<ApiLog>,
}

impl std::fmt::Debug for World {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("World")
            .field("clock", &self.clock)
            .field("users", &self.users.len())
            .field("tweets", &self.tweets.len())
            .finish()
    }
}

const ALL_POOL: &str = "*";

impl World {
    /// A world with no users, its clock at `cfg.start`.
    pub fn empty(cfg: WorldConfig) -> World {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let clock = cfg.start;
        World {
            budgets: BudgetConfig::default(),
            clock,
            rng,
            users: Vec::new(),
            tweets: HashMap::new(),
            lists: Vec::new(),
            next_seq: 1,
            events: BinaryHeap::new(),
            next_day: clock - clock.rem_euclid(DAY) + DAY,
            daily_enabled: true,
            pools: BTreeMap::new(),
            recent: Vec::new(),
            log: Mutex::new(ApiLog::default()),
            cfg,
        }
    }

    /// Builds a world deterministically from `cfg`: same config, same world.
    pub fn generate(cfg: WorldConfig) -> Result<World, SimError> {
        cfg.validate()?;
        let mut w = World::empty(cfg.clone());
        if cfg.n_users == 0 {
            return Ok(w);
        }
        let communities = w.partition_communities();
        for community in communities {
            let spec = w.spec_for(&community);
            let id = w.insert_user(spec, community);
            let age_days = w.rng.random_range(cfg.account_age_days.0..=cfg.account_age_days.1);
            let created = cfg.start - age_days * DAY - w.rng.random_range(0..DAY);
            w.users[id.0 as usize - 1].created_at = created;
        }
        w.build_pools();
        w.generate_follow_graph();
        w.generate_lists();

        // Prehistory: materialize recent history, count the rest as archived.
        let pre = cfg.prehistory_start();
        for i in 0..w.users.len() {
            let u = &w.users[i];
            let older_days = (pre - u.created_at).max(0) as f64 / DAY as f64;
            let lambda = u.rate * older_days;
            let archived = if lambda > 0.0 {
                Poisson::new(lambda).map(|p| p.sample(&mut w.rng) as u64).unwrap_or(0)
            } else {
                0
            };
            w.users[i].archived = archived;
        }
        w.clock = pre;
        w.daily_enabled = false;
        w.schedule_all();
        w.run_until(cfg.start);
        w.daily_enabled = true;
        w.next_day = cfg.start - cfg.start.rem_euclid(DAY) + DAY;
        w.recent.clear();
        Ok(w)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn clock(&self) -> Timestamp {
        self.clock
    }

    pub fn budgets(&self) -> &BudgetConfig {
        &self.budgets
    }

    /// Budgets the simulated platform enforces; also sets page sizes.
    pub fn set_budgets(&mut self, budgets: BudgetConfig) {
        self.budgets = budgets;
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, u: UserId) -> Option<&SimUser> {
        self.users.get((u.0 as usize).wrapping_sub(1))
    }

    fn user_mut(&mut self, u: UserId) -> &mut SimUser {
        &mut self.users[u.0 as usize - 1]
    }

    pub fn list(&self, id: u64) -> Option<&SimList> {
        self.lists.get((id as usize).wrapping_sub(1))
    }

    fn partition_communities(&mut self) -> Vec<TrueCommunity> {
        let n = self.cfg.n_users;
        let n_mixed = ((n as f64) * self.cfg.mixed_fraction).round() as usize;
        let rest = n - n_mixed.min(n);
        // Largest-remainder apportionment keeps the split exact.
        let fr: Vec<(String, f64)> = self.cfg.community_fractions.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let mut counts: Vec<usize> = fr.iter().map(|(_, f)| (rest as f64 * f).floor() as usize).collect();
        let mut left = rest - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..fr.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = rest as f64 * fr[a].1 - counts[a] as f64;
            let rb = rest as f64 * fr[b].1 - counts[b] as f64;
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        let mut labels: Vec<TrueCommunity> = Vec::with_capacity(n);
        for ((lang, _), c) in fr.iter().zip(counts) {
            labels.extend(std::iter::repeat_n(TrueCommunity::Language(lang.clone()), c));
        }
        labels.extend(std::iter::repeat_n(TrueCommunity::Mixed, n_mixed.min(n)));
        labels.shuffle(&mut self.rng);
        labels
    }

    fn spec_for(&mut self, community: &TrueCommunity) -> UserSpec {
        let a = &self.cfg.activity;
        let rate = power_law(&mut self.rng, a.min_rate, a.max_rate, a.exponent);
        match community {
            TrueCommunity::Language(l) => UserSpec::new(l, rate),
            TrueCommunity::Mixed => {
                let (lo, hi) = self.cfg.mixed_target_share;
                let share = if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
                UserSpec::mixed(share, rate)
            }
        }
    }

    /// Adds a user built from `spec`; ids are assigned sequentially from 1.
    pub fn add_user(&mut self, spec: UserSpec) -> UserId {
        let community = if spec.target_share.is_nan() {
            TrueCommunity::Language(spec.lang.clone())
        } else {
            TrueCommunity::Mixed
        };
        let id = self.insert_user(spec, community);
        if !self.pools.is_empty() || self.users.len() == 1 {
            self.build_pools();
        }
        let i = id.0 as usize - 1;
        let first = self.clock.max(self.users[i].created_at);
        self.schedule_from(i, first);
        id
    }

    fn insert_user(&mut self, spec: UserSpec, community: TrueCommunity) -> UserId {
        let id = UserId(self.users.len() as u64 + 1);
        let target = self.cfg.target_lang.clone();
        let (target_share, other_lang) = match &community {
            TrueCommunity::Language(l) if *l == target => (1.0, self.cfg.secondary_lang()),
            TrueCommunity::Language(l) => (0.0, l.clone()),
            TrueCommunity::Mixed => (spec.target_share, self.cfg.secondary_lang()),
        };
        let main_lang = if target_share >= 0.5 { target.clone() } else { other_lang.clone() };
        let greek_script = self.rng.random_bool(0.7);
        let p = text::profile(&mut self.rng, &main_lang, &target, greek_script);
        let screen_name = spec.screen_name.unwrap_or_else(|| format!("{}{}", p.screen_base, id.0));
        let verified = self.rng.random_bool(0.01);
        let profile_url = if self.rng.random_bool(0.2) {
            format!("https://{}/~{}", text::domain(&mut self.rng), screen_name.to_lowercase())
        } else {
            String::new()
        };
        self.users.push(SimUser {
            id,
            community,
            target_share,
            other_lang,
            rate: spec.rate.max(0.0),
            created_at: spec.created_at.unwrap_or(self.clock - 365 * DAY),
            screen_name,
            name: spec.name.unwrap_or(p.name),
            bio: spec.bio.unwrap_or(p.bio),
            location: p.location,
            time_zone: p.time_zone,
            ui_lang: p.ui_lang,
            profile_url,
            verified,
            protected: spec.protected,
            status: AccountStatus::Active,
            archived: 0,
            tweets: Vec::new(),
            likes: BTreeMap::new(),
            friends: BTreeSet::new(),
            followers: BTreeSet::new(),
            lists_member: BTreeSet::new(),
            lists_owned: BTreeSet::new(),
            lists_subscribed: BTreeSet::new(),
        });
        id
    }

    fn pool_key(&self, u: &SimUser) -> String {
        match &u.community {
            TrueCommunity::Language(l) => l.clone(),
            TrueCommunity::Mixed => ALL_POOL.to_string(),
        }
    }

    fn build_pools(&mut self) {
        let mut groups: BTreeMap<String, Vec<UserId>> = BTreeMap::new();
        for u in &self.users {
            groups.entry(self.pool_key(u)).or_default().push(u.id);
            if self.pool_key(u) != ALL_POOL {
                groups.entry(ALL_POOL.to_string()).or_default().push(u.id);
            }
        }
        self.pools.clear();
        for (key, mut members) in groups {
            members.shuffle(&mut self.rng);
            let weights: Vec<f64> = (0..members.len())
                .map(|r| ((r + 1) as f64).powf(-self.cfg.follow.attachment_exponent))
                .collect();
            if let Ok(weights) = WeightedIndex::new(weights) {
                self.pools.insert(key, Pool { members, weights });
            }
        }
    }

    fn sample_followee(&mut self, u: usize) -> Option<UserId> {
        let own = self.pool_key(&self.users[u]);
        let key = if self.rng.random_bool(self.cfg.follow.cross_community) { ALL_POOL.to_string() } else { own };
        let pool = self.pools.get(&key).or_else(|| self.pools.get(ALL_POOL))?;
        Some(pool.members[pool.weights.sample(&mut self.rng)])
    }

    fn generate_follow_graph(&mut self) {
        let mean = self.cfg.follow.mean_friends;
        if mean <= 0.0 {
            return;
        }
        let exp = Exp::new(1.0 / mean).expect("positive mean");
        let n = self.users.len();
        for i in 0..n {
            let k = (exp.sample(&mut self.rng).round() as usize).min(n - 1);
            let mut attempts = 0;
            while self.users[i].friends.len() < k && attempts < 4 * k + 4 {
                attempts += 1;
                if let Some(v) = self.sample_followee(i) {
                    self.follow(self.users[i].id, v);
                }
            }
        }
    }

    fn generate_lists(&mut self) {
        let lm = self.cfg.lists.clone();
        if lm.owner_prob <= 0.0 || lm.max_lists == 0 {
            return;
        }
        for i in 0..self.users.len() {
            if !self.rng.random_bool(lm.owner_prob) {
                continue;
            }
            let owner = self.users[i].id;
            let candidates: Vec<UserId> =
                self.users[i].friends.union(&self.users[i].followers).copied().collect();
            if candidates.len() < lm.min_members.max(1) {
                continue;
            }
            let followers: Vec<UserId> = self.users[i].followers.iter().copied().collect();
            let n_lists = self.rng.random_range(1..=lm.max_lists);
            for _ in 0..n_lists {
                let m = self.rng.random_range(lm.min_members..=lm.max_members).min(candidates.len());
                let members: Vec<UserId> = candidates.choose_multiple(&mut self.rng, m).copied().collect();
                let list_id = self.create_list(owner, &format!("list{}", self.lists.len() + 1), &members);
                let s = self.rng.random_range(0..=lm.max_subscribers).min(followers.len());
                let subs: Vec<UserId> = followers.choose_multiple(&mut self.rng, s).copied().collect();
                for sub in subs {
                    self.subscribe(sub, list_id);
                }
            }
        }
    }

    // ---- scenario building ----

    pub fn follow(&mut self, src: UserId, dst: UserId) -> bool {
        if src == dst {
            return false;
        }
        let added = self.user_mut(src).friends.insert(dst);
        self.user_mut(dst).followers.insert(src);
        added
    }

    pub fn unfollow(&mut self, src: UserId, dst: UserId) -> bool {
        let removed = self.user_mut(src).friends.remove(&dst);
        self.user_mut(dst).followers.remove(&src);
        removed
    }

    pub fn create_list(&mut self, owner: UserId, name: &str, members: &[UserId]) -> u64 {
        let id = self.lists.len() as u64 + 1;
        self.lists.push(SimList {
            id,
            owner,
            name: name.to_string(),
            members: members.iter().copied().collect(),
            subscribers: BTreeSet::new(),
        });
        self.user_mut(owner).lists_owned.insert(id);
        for &m in members {
            self.user_mut(m).lists_member.insert(id);
        }
        id
    }

    pub fn add_list_member(&mut self, list_id: u64, member: UserId) {
        self.lists[list_id as usize - 1].members.insert(member);
        self.user_mut(member).lists_member.insert(list_id);
    }

    pub fn subscribe(&mut self, user: UserId, list_id: u64) {
        self.lists[list_id as usize - 1].subscribers.insert(user);
        self.user_mut(user).lists_subscribed.insert(list_id);
    }

    pub fn suspend(&mut self, u: UserId) {
        self.user_mut(u).status = AccountStatus::Suspended;
    }

    pub fn delete_account(&mut self, u: UserId) {
        self.user_mut(u).status = AccountStatus::Deleted;
    }

    pub fn reactivate(&mut self, u: UserId) {
        self.user_mut(u).status = AccountStatus::Active;
    }

    pub fn set_protected(&mut self, u: UserId, protected: bool) {
        self.user_mut(u).protected = protected;
    }

    pub fn set_bio(&mut self, u: UserId, bio: &str) {
        self.user_mut(u).bio = bio.to_string();
    }

    pub fn set_rate(&mut self, u: UserId, rate: f64) {
        self.user_mut(u).rate = rate.max(0.0);
        let i = u.0 as usize - 1;
        let at = self.clock.max(self.users[i].created_at);
        self.schedule_from(i, at);
    }

    /// Deletes a single tweet; it disappears from every view.
    pub fn delete_tweet(&mut self, id: TweetId) -> bool {
        let Some(st) = self.tweets.get_mut(&id) else { return false };
        if st.deleted {
            return false;
        }
        st.deleted = true;
        let author = st.tweet.author;
        let tweets = &mut self.user_mut(author).tweets;
        if let Ok(pos) = tweets.binary_search(&id) {
            tweets.remove(pos);
        }
        true
    }

    pub fn like(&mut self, user: UserId, tweet: TweetId, at: Timestamp) -> bool {
        let Some(author) = self.tweets.get(&tweet).map(|t| t.tweet.author) else { return false };
        let likes = &mut self.user_mut(user).likes;
        if likes.contains_key(&tweet) {
            return false;
        }
        likes.insert(tweet, Like { author, liked_at: at });
        true
    }

    fn mint_id(&mut self, at: Timestamp) -> TweetId {
        let id = TweetId::from_parts(at, self.next_seq);
        self.next_seq += 1;
        id
    }

    /// Posts a hand-written tweet by `user` at `at`.
    pub fn post(&mut self, user: UserId, at: Timestamp, draft: TweetDraft) -> TweetId {
        let id = self.mint_id(at);
        let lookup = |w: &World, r: Option<TweetId>| r.and_then(|t| w.tweets.get(&t).map(|s| (t, s.tweet.author)));
        let lang = draft.lang.unwrap_or_else(|| {
            let u = &self.users[user.0 as usize - 1];
            if u.target_share >= 0.5 { self.cfg.target_lang.clone() } else { u.other_lang.clone() }
        });
        let tweet = Tweet {
            id,
            author: user,
            created_at: at,
            text: draft.text,
            lang,
            retweet_of: lookup(self, draft.retweet_of),
            reply_to: lookup(self, draft.reply_to),
            quote_of: lookup(self, draft.quote_of),
            mentions: draft.mentions,
            hashtags: draft.hashtags,
            urls: draft.urls,
            source_client: text::SOURCE_CLIENTS[0].to_string(),
            truncated: false,
        };
        self.insert_tweet(tweet);
        id
    }

    /// Posts `n` plain tweets by `user`, `spacing` seconds apart starting at `from`.
    pub fn post_many(&mut self, user: UserId, n: usize, from: Timestamp, spacing: i64) -> Vec<TweetId> {
        (0..n)
            .map(|k| self.post(user, from + k as i64 * spacing, TweetDraft::text(&format!("tweet number {k}"))))
            .collect()
    }

    fn insert_tweet(&mut self, tweet: Tweet) {
        let id = tweet.id;
        let author = tweet.author;
        self.tweets.insert(id, SimTweet { tweet, deleted: false });
        let tweets = &mut self.user_mut(author).tweets;
        let pos = tweets.partition_point(|&t| t < id);
        tweets.insert(pos, id);
        self.recent.push(id);
    }

    // ---- evolution ----

    fn schedule_all(&mut self) {
        self.events.clear();
        for i in 0..self.users.len() {
            let at = self.clock.max(self.users[i].created_at);
            self.schedule_from(i, at);
        }
    }

    fn schedule_from(&mut self, i: usize, at: Timestamp) {
        let rate = self.users[i].rate;
        if rate <= 0.0 {
            return;
        }
        let tweet_gap = Exp::new(rate / DAY as f64).expect("positive rate");
        let t = at + tweet_gap.sample(&mut self.rng).ceil() as i64;
        self.events.push(Reverse(Event { at: t, user: i as u32, kind: EventKind::Tweet }));
        let like_rate = rate * self.cfg.activity.likes_per_tweet;
        if like_rate > 0.0 {
            let like_gap = Exp::new(like_rate / DAY as f64).expect("positive rate");
            let t = at + like_gap.sample(&mut self.rng).ceil() as i64;
            self.events.push(Reverse(Event { at: t, user: i as u32, kind: EventKind::Like }));
        }
    }

    /// Moves the clock forward by `dt` seconds, applying every tweet, like,
    /// follow and churn event that falls inside the interval.
    pub fn advance(&mut self, dt: i64) {
        assert!(dt > 0, "advance requires a positive duration");
        self.recent.clear();
        let target = self.clock + dt;
        self.run_until(target);
    }

    fn run_until(&mut self, target: Timestamp) {
        loop {
            let next_event = self.events.peek().map(|Reverse(e)| e.at).unwrap_or(Timestamp::MAX);
            let next_day = if self.daily_enabled { self.next_day } else { Timestamp::MAX };
            let next = next_event.min(next_day);
            if next >= target {
                break;
            }
            if next_day <= next_event {
                self.clock = next_day;
                self.daily_tick();
                self.next_day += DAY;
                continue;
            }
            let Reverse(ev) = self.events.pop().expect("peeked");
            self.clock = ev.at;
            let i = ev.user as usize;
            let rate = self.users[i].rate;
            if rate <= 0.0 {
                continue;
            }
            match ev.kind {
                EventKind::Tweet => {
                    if self.users[i].is_active() {
                        self.emit_tweet(i, ev.at);
                    }
                    let gap = Exp::new(rate / DAY as f64).expect("positive rate").sample(&mut self.rng);
                    self.events.push(Reverse(Event { at: ev.at + gap.ceil() as i64, ..ev }));
                }
                EventKind::Like => {
                    if self.users[i].is_active() {
                        self.emit_like(i, ev.at);
                    }
                    let lr = rate * self.cfg.activity.likes_per_tweet;
                    let gap = Exp::new(lr / DAY as f64).expect("positive rate").sample(&mut self.rng);
                    self.events.push(Reverse(Event { at: ev.at + gap.ceil() as i64, ..ev }));
                }
            }
        }
        self.clock = target;
    }

    fn daily_tick(&mut self) {
        let churn = self.cfg.churn.clone();
        let follow = self.cfg.follow.clone();
        let target = self.cfg.target_lang.clone();
        for i in 0..self.users.len() {
            match self.users[i].status {
                AccountStatus::Active => {
                    let r: f64 = self.rng.random();
                    if r < churn.suspend {
                        self.users[i].status = AccountStatus::Suspended;
                    } else if r < churn.suspend + churn.delete {
                        self.users[i].status = AccountStatus::Deleted;
                    } else if r < churn.suspend + churn.delete + churn.protect {
                        self.users[i].protected = true;
                    }
                }
                AccountStatus::Deleted => {
                    if self.rng.random_bool(churn.reactivate) {
                        self.users[i].status = AccountStatus::Active;
                    }
                }
                AccountStatus::Suspended => {}
            }
            if self.rng.random_bool(churn.profile_change) {
                let lang = if self.users[i].target_share >= 0.5 { target.clone() } else { self.users[i].other_lang.clone() };
                self.users[i].bio = text::new_bio(&mut self.rng, &lang, &target);
            }
            if self.rng.random_bool(follow.daily_follow) {
                if let Some(v) = self.sample_followee(i) {
                    let u = self.users[i].id;
                    self.follow(u, v);
                }
            }
            if self.rng.random_bool(follow.daily_unfollow) && !self.users[i].friends.is_empty() {
                let friends: Vec<UserId> = self.users[i].friends.iter().copied().collect();
                let v = *friends.choose(&mut self.rng).expect("non-empty");
                let u = self.users[i].id;
                self.unfollow(u, v);
            }
        }
    }

    /// Users only retweet languages they tweet in themselves.
    fn writes(&self, i: usize, lang: &str) -> bool {
        let u = &self.users[i];
        (lang == self.cfg.target_lang && u.target_share > 0.0) || (lang == u.other_lang && u.target_share < 1.0)
    }

    fn pick_lang(&mut self, i: usize) -> String {
        let u = &self.users[i];
        if self.rng.random_bool(u.target_share.clamp(0.0, 1.0)) {
            self.cfg.target_lang.clone()
        } else {
            u.other_lang.clone()
        }
    }

    /// A recent tweet of a random friend, resolved to the original when it is
    /// a retweet.
    fn friend_tweet(&mut self, i: usize, recent_only: bool) -> Option<TweetId> {
        let friends: Vec<UserId> = self.users[i].friends.iter().copied().collect();
        for _ in 0..3 {
            let f = *friends.choose(&mut self.rng)?;
            let fu = &self.users[f.0 as usize - 1];
            if !fu.is_active() || fu.tweets.is_empty() {
                continue;
            }
            let id = if recent_only {
                *fu.tweets.last().expect("non-empty")
            } else {
                *fu.tweets.choose(&mut self.rng).expect("non-empty")
            };
            let t = &self.tweets[&id].tweet;
            return Some(t.retweet_of.map(|(o, _)| o).filter(|o| self.tweets.contains_key(o)).unwrap_or(id));
        }
        None
    }

    fn compose_text(&mut self, i: usize, lang: &str) -> (String, Vec<String>, Vec<UrlEntity>) {
        let target = self.cfg.target_lang.clone();
        let n = self.rng.random_range(3..=24);
        let mut words: Vec<String> = text::words(&mut self.rng, lang, &target, n).into_iter().map(String::from).collect();
        if lang != target && self.rng.random_bool(self.cfg.keyword_noise) {
            let pos = self.rng.random_range(0..=words.len());
            words.insert(pos, text::noise_word(&mut self.rng).to_string());
        }
        let mut hashtags = Vec::new();
        if self.rng.random_bool(self.cfg.behavior.hashtag) {
            for _ in 0..self.rng.random_range(1..=2) {
                let h = text::hashtag(&mut self.rng, lang, &target).to_string();
                words.push(format!("#{h}"));
                hashtags.push(h);
            }
        }
        let mut urls = Vec::new();
        if self.rng.random_bool(self.cfg.behavior.url) {
            let short = format!("https://t.co/{:x}{}", self.next_seq, i);
            let expanded = format!("https://{}/{}", text::domain(&mut self.rng), self.rng.random_range(1..10_000));
            words.push(short.clone());
            urls.push(UrlEntity { short, expanded });
        }
        (words.join(" "), hashtags, urls)
    }

    fn emit_tweet(&mut self, i: usize, at: Timestamp) {
        let b = self.cfg.behavior.clone();
        let r: f64 = self.rng.random();
        let author = self.users[i].id;
        let source = text::SOURCE_CLIENTS.choose(&mut self.rng).expect("non-empty").to_string();

        if r < b.retweet {
            if let Some(orig_id) = self.friend_tweet(i, true) {
                let fresh = self.users[i].tweets.iter().rev().take(50).all(|t| self.tweets[t].tweet.retweet_of.map(|x| x.0) != Some(orig_id));
                if fresh && self.writes(i, &self.tweets[&orig_id].tweet.lang) {
                    let orig = self.tweets[&orig_id].tweet.clone();
                    let orig_screen = self.users[orig.author.0 as usize - 1].screen_name.clone();
                    let id = self.mint_id(at);
                    self.insert_tweet(Tweet {
                        id,
                        author,
                        created_at: at,
                        text: format!("RT @{orig_screen}: {}", orig.text),
                        lang: orig.lang.clone(),
                        retweet_of: Some((orig.id, orig.author)),
                        reply_to: None,
                        quote_of: None,
                        mentions: orig.mentions.clone(),
                        hashtags: orig.hashtags.clone(),
                        urls: orig.urls.clone(),
                        source_client: source,
                        truncated: false,
                    });
                    return;
                }
            }
        }

        let lang = self.pick_lang(i);
        let (mut body, hashtags, urls) = self.compose_text(i, &lang);
        let mut mentions = Vec::new();
        let mut reply_to = None;
        let mut quote_of = None;

        if r >= b.retweet && r < b.retweet + b.reply {
            let own_last = self.users[i]
                .tweets
                .iter()
                .rev()
                .find(|t| self.tweets[t].tweet.retweet_of.is_none())
                .copied();
            let target = if own_last.is_some() && self.rng.random_bool(b.self_thread) {
                own_last
            } else {
                self.friend_tweet(i, true)
            };
            if let Some(t) = target {
                let to = self.tweets[&t].tweet.author;
                let screen = self.users[to.0 as usize - 1].screen_name.clone();
                body = format!("@{screen} {body}");
                mentions.push(to);
                reply_to = Some((t, to));
            }
        } else if r >= b.retweet + b.reply && r < b.retweet + b.reply + b.quote {
            if let Some(t) = self.friend_tweet(i, false) {
                quote_of = Some((t, self.tweets[&t].tweet.author));
            }
        } else if self.rng.random_bool(b.mention) {
            let friends: Vec<UserId> = self.users[i].friends.iter().copied().collect();
            if let Some(&f) = friends.choose(&mut self.rng) {
                let screen = self.users[f.0 as usize - 1].screen_name.clone();
                body = format!("{body} @{screen}");
                mentions.push(f);
            }
        }

        let id = self.mint_id(at);
        self.insert_tweet(Tweet {
            id,
            author,
            created_at: at,
            text: body,
            lang,
            retweet_of: None,
            reply_to,
            quote_of,
            mentions,
            hashtags,
            urls,
            source_client: source,
            truncated: false,
        });
    }

    fn emit_like(&mut self, i: usize, at: Timestamp) {
        let old = self.rng.random_bool(self.cfg.activity.old_like_prob);
        if let Some(t) = self.friend_tweet(i, !old) {
            let u = self.users[i].id;
            self.like(u, t, at);
        }
    }

    // ---- views ----

    pub(crate) fn snapshot(&self, u: &SimUser) -> UserSnapshot {
        UserSnapshot {
            id: u.id,
            screen_name: u.screen_name.clone(),
            name: u.name.clone(),
            bio: u.bio.clone(),
            location: u.location.clone(),
            time_zone: u.time_zone.clone(),
            ui_lang: u.ui_lang.clone(),
            profile_url: u.profile_url.clone(),
            created_at: u.created_at,
            tweet_count: u.archived + u.tweets.len() as u64,
            followers_count: u.followers.len() as u64,
            friends_count: u.friends.len() as u64,
            favourites_count: u.likes.len() as u64,
            protected: u.protected,
            verified: u.verified,
            observed_at: self.clock,
        }
    }

    pub(crate) fn tweet_live(&self, id: TweetId) -> Option<&Tweet> {
        self.tweets.get(&id).filter(|t| !t.deleted).map(|t| &t.tweet)
    }

    pub fn ground_truth(&self) -> GroundTruth<'_> {
        GroundTruth { world: self }
    }

    /// Writes the world state as JSON Lines: users, tweets, lists, follows
    /// and likes, each tagged with `kind`, in id order.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        #[derive(Serialize)]
        #[serde(tag = "kind", rename_all = "snake_case")]
        enum Line<'a> {
            User(&'a SimUser),
            Tweet { deleted: bool, tweet: &'a Tweet },
            List(&'a SimList),
        }
        writeln!(out, "{}", serde_json::json!({"kind": "clock", "at": self.clock}))?;
        for u in &self.users {
            writeln!(out, "{}", serde_json::to_string(&Line::User(u))?)?;
        }
        let mut ids: Vec<&TweetId> = self.tweets.keys().collect();
        ids.sort();
        for id in ids {
            let st = &self.tweets[id];
            writeln!(out, "{}", serde_json::to_string(&Line::Tweet { deleted: st.deleted, tweet: &st.tweet })?)?;
        }
        for l in &self.lists {
            writeln!(out, "{}", serde_json::to_string(&Line::List(l))?)?;
        }
        Ok(())
    }
}

/// Draws from a power law with density proportional to `r^-exponent` on
/// `[lo, hi]`, rounded to two decimals.
fn power_law<R: Rng>(rng: &mut R, lo: f64, hi: f64, exponent: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let u: f64 = rng.random();
    let r = if (exponent - 1.0).abs() < 1e-12 {
        lo * (hi / lo).powf(u)
    } else {
        let a = 1.0 - exponent;
        (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
    };
    (r * 100.0).round() / 100.0
}

/// Read-only oracle view of the world.
pub struct GroundTruth<'a> {
    world: &'a World,
}

impl GroundTruth<'_> {
    pub fn community(&self, u: UserId) -> Option<&TrueCommunity> {
        self.world.user(u).map(|u| &u.community)
    }

    pub fn users(&self) -> impl Iterator<Item = &SimUser> {
        self.world.users.iter()
    }

    /// Live tweets of `u`, ascending.
    pub fn tweets_of(&self, u: UserId) -> Vec<&Tweet> {
        self.world
            .user(u)
            .map(|su| su.tweets.iter().map(|id| &self.world.tweets[id].tweet).collect())
            .unwrap_or_default()
    }

    /// Total tweets `u` ever posted, including archived history.
    pub fn total_tweets(&self, u: UserId) -> u64 {
        self.world
            .user(u)
            .map(|su| su.archived + su.tweets.len() as u64)
            .unwrap_or(0)
    }

    pub fn tweet(&self, id: TweetId) -> Option<&Tweet> {
        self.world.tweets.get(&id).map(|t| &t.tweet)
    }

    pub fn is_deleted(&self, id: TweetId) -> bool {
        self.world.tweets.get(&id).is_some_and(|t| t.deleted)
    }

    /// All live tweets, ascending by id.
    pub fn all_tweets(&self) -> Vec<&Tweet> {
        let mut v: Vec<&Tweet> = self.world.tweets.values().filter(|t| !t.deleted).map(|t| &t.tweet).collect();
        v.sort_by_key(|t| t.id);
        v
    }

    pub fn friends(&self, u: UserId) -> BTreeSet<UserId> {
        self.world.user(u).map(|u| u.friends.clone()).unwrap_or_default()
    }

    pub fn followers(&self, u: UserId) -> BTreeSet<UserId> {
        self.world.user(u).map(|u| u.followers.clone()).unwrap_or_default()
    }

    pub fn follow_edges(&self) -> Vec<(UserId, UserId)> {
        self.world
            .users
            .iter()
            .flat_map(|u| u.friends.iter().map(move |&f| (u.id, f)))
            .collect()
    }

    pub fn likes(&self, u: UserId) -> Vec<(TweetId, Like)> {
        self.world
            .user(u)
            .map(|u| u.likes.iter().map(|(k, v)| (*k, *v)).collect())
            .unwrap_or_default()
    }

    pub fn lists(&self) -> &[SimList] {
        &self.world.lists
    }

    pub fn status(&self, u: UserId) -> Option<AccountStatus> {
        self.world.user(u).map(|u| u.status)
    }

    pub fn request_log(&self) -> Vec<RequestRecord> {
        self.world.log.lock().expect("log lock poisoned").records.clone()
    }

    pub fn request_count(&self) -> usize {
        self.world.log.lock().expect("log lock poisoned").records.len()
    }
}
