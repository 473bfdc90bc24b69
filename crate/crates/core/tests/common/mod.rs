#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use commcrawl::model::{
    FavoriteRecord, FollowEdge, Timestamp, Tweet, TweetId, UrlEntity, UserClass, UserId, UserSnapshot, DAY,
};
use commcrawl::simnet::DEFAULT_START;
use commcrawl::store::Store;
use commcrawl::vectorize::{FeatureVector, Lexicons, Summary};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORDS: &[&str] = &[
    "καλημέρα", "καλό", "Καλό", "υπέροχο", "τέλειο", "μπράβο", "σκατά", "ΓΕΙΑ", "ΣΑΣ", "το", "και", "εγώ",
    "αθήνα", "hello", "world", "the", "OK", "x9", "2018", "Maria", "ΝΑΙ", "σπίτι", "δρόμος", "shit",
];
pub const TAGS: &[&str] = &["news", "τώρα", "aek", "Greece", "ΕΡΤ"];
pub const HOSTS: &[&str] = &["example.com", "news.gr", "www.blog.org", "u7.net"];
pub const SOURCES: &[&str] = &["web", "android", "iphone"];
pub const LANGS: &[&str] = &["el", "el", "en", "und"];

/// A generated tweet together with the words its text was built from.
#[derive(Debug, Clone)]
pub struct Gen {
    pub tweet: Tweet,
    pub words: Vec<String>,
}

fn uid(rng: &mut ChaCha8Rng, n_users: u64) -> UserId {
    UserId(rng.random_range(1..=n_users))
}

/// Random tweets by `n_users` users over ten days. Retweets, replies and
/// quotes reference earlier tweets of the corpus.
pub fn corpus(seed: u64, n_tweets: usize, n_users: u64) -> Vec<Gen> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times: Vec<Timestamp> = (0..n_tweets).map(|_| DEFAULT_START + rng.random_range(0..10 * DAY)).collect();
    times.sort();
    let mut out: Vec<Gen> = Vec::with_capacity(n_tweets);
    for (seq, &at) in times.iter().enumerate() {
        let author = uid(&mut rng, n_users);
        let id = TweetId::from_parts(at, seq as u64);
        let pick_ref = |rng: &mut ChaCha8Rng, out: &Vec<Gen>| {
            (!out.is_empty()).then(|| {
                let t = &out[rng.random_range(0..out.len())].tweet;
                (t.id, t.author)
            })
        };
        let kind = rng.random_range(0..10);
        let retweet_of = if kind < 2 { pick_ref(&mut rng, &out) } else { None };
        let reply_to = if (2..4).contains(&kind) { pick_ref(&mut rng, &out) } else { None };
        let quote_of = if kind == 4 { pick_ref(&mut rng, &out) } else { None };
        let n_words = rng.random_range(0..8);
        let words: Vec<String> = (0..n_words).map(|_| WORDS.choose(&mut rng).unwrap().to_string()).collect();
        let mentions: Vec<UserId> = (0..rng.random_range(0..3)).map(|_| uid(&mut rng, n_users)).collect();
        let hashtags: Vec<String> =
            (0..rng.random_range(0..3)).map(|_| TAGS.choose(&mut rng).unwrap().to_string()).collect();
        let urls: Vec<UrlEntity> = (0..rng.random_range(0..2))
            .map(|k| {
                let host = HOSTS.choose(&mut rng).unwrap();
                UrlEntity { short: format!("https://t.co/{seq}{k}"), expanded: format!("https://{host}/p{seq}") }
            })
            .collect();
        let mut parts = words.clone();
        parts.extend(hashtags.iter().map(|h| format!("#{h}")));
        parts.extend(mentions.iter().map(|m| format!("@u{}", m.0)));
        parts.extend(urls.iter().map(|u| u.short.clone()));
        let tweet = Tweet {
            id,
            author,
            created_at: at,
            text: parts.join(" "),
            lang: LANGS.choose(&mut rng).unwrap().to_string(),
            retweet_of,
            reply_to,
            quote_of,
            mentions,
            hashtags,
            urls,
            source_client: SOURCES.choose(&mut rng).unwrap().to_string(),
            truncated: false,
        };
        out.push(Gen { tweet, words });
    }
    out
}

pub fn snapshot(u: UserId, seed: u64) -> UserSnapshot {
    let names = ["Μαρία", "John", "ΝΙΚΟΣ", "eleni_22", "Ab3"];
    let bios = ["", "Ζω στην Αθήνα! 2018", "just a BOT account...", "ΑΕΚ για πάντα"];
    let i = (u.0 + seed) as usize;
    UserSnapshot {
        id: u,
        screen_name: format!("{}{}", names[i % names.len()].replace(' ', ""), u.0),
        name: names[(i / 2) % names.len()].to_string(),
        bio: bios[i % bios.len()].to_string(),
        location: if i.is_multiple_of(3) { "Αθήνα".into() } else { String::new() },
        time_zone: "Athens".into(),
        ui_lang: "el".into(),
        profile_url: String::new(),
        created_at: DEFAULT_START - 100 * DAY,
        tweet_count: 10 + u.0,
        followers_count: i as u64 % 4,
        friends_count: 3,
        favourites_count: 0,
        protected: false,
        verified: false,
        observed_at: DEFAULT_START - DAY,
    }
}

/// Everything a vector depends on, in plain collections.
pub struct Fixture {
    pub tweets: Vec<Gen>,
    pub follows: Vec<FollowEdge>,
    pub favorites: Vec<FavoriteRecord>,
    pub classes: BTreeMap<UserId, UserClass>,
    pub snapshots: BTreeMap<UserId, UserSnapshot>,
    pub n_users: u64,
}

impl Fixture {
    pub fn new(seed: u64, n_tweets: usize, n_users: u64) -> Fixture {
        let tweets = corpus(seed, n_tweets, n_users);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut follows = Vec::new();
        for _ in 0..n_users * 4 {
            if let Some(e) = FollowEdge::new(uid(&mut rng, n_users), uid(&mut rng, n_users), DEFAULT_START) {
                follows.push(e);
            }
        }
        let mut favorites = Vec::new();
        for _ in 0..tweets.len() / 3 {
            let t = &tweets[rng.random_range(0..tweets.len())].tweet;
            favorites.push(FavoriteRecord {
                user: uid(&mut rng, n_users),
                tweet: t.id,
                tweet_author: t.author,
                observed_at: DEFAULT_START,
            });
        }
        let classes = (1..=n_users)
            .map(|u| {
                let c = [UserClass::Target, UserClass::Tracked, UserClass::Stopped, UserClass::Unknown][rng.random_range(0..4)];
                (UserId(u), c)
            })
            .collect();
        let snapshots = (1..=n_users).map(|u| (UserId(u), snapshot(UserId(u), seed))).collect();
        Fixture { tweets, follows, favorites, classes, snapshots, n_users }
    }

    pub fn store(&self) -> Store {
        let store = Store::new();
        for g in &self.tweets {
            store.put_tweet(g.tweet.clone());
        }
        store.append_follows(self.follows.iter().copied());
        for f in &self.favorites {
            store.put_favorite(*f);
        }
        for s in self.snapshots.values() {
            store.put_snapshot(s.clone()).unwrap();
        }
        for (&u, &c) in &self.classes {
            if c != UserClass::Unknown {
                store.set_class(u, c, DEFAULT_START - DAY);
            }
        }
        store
    }

    pub fn as_of(&self) -> Timestamp {
        DEFAULT_START + 11 * DAY
    }
}

/// Mean, population std and median of `xs`, mean and std by Welford's
/// single-pass update.
pub fn welford(xs: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    let median = if k % 2 == 1 { s[k / 2] } else { (s[k / 2 - 1] + s[k / 2]) / 2.0 };
    Some((lo, hi, mean, median, (m2 / n).sqrt()))
}

pub fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

fn floor_log2(x: i64) -> usize {
    let mut k = 0;
    let mut v = x;
    while v >= 2 {
        v /= 2;
        k += 1;
    }
    k.min(21)
}

/// Collects mismatches between a computed vector and the naive reference.
pub struct Checker {
    pub errors: Vec<String>,
    pub checks: u64,
}

impl Checker {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, what: &str, got: T, want: T) {
        self.checks += 1;
        if got != want {
            self.errors.push(format!("{what}: got {got:?}, want {want:?}"));
        }
    }

    fn num(&mut self, what: &str, got: Option<f64>, want: Option<f64>) {
        self.checks += 1;
        let ok = match (got, want) {
            (Some(a), Some(b)) => close(a, b),
            (None, None) => true,
            _ => false,
        };
        if !ok {
            self.errors.push(format!("{what}: got {got:?}, want {want:?}"));
        }
    }

    fn summary(&mut self, what: &str, got: Option<Summary>, xs: &[f64]) {
        let want = welford(xs);
        self.eq(&format!("{what} presence"), got.is_some(), want.is_some());
        if let (Some(g), Some((lo, hi, mean, median, std))) = (got, want) {
            self.num(&format!("{what}.min"), Some(g.min), Some(lo));
            self.num(&format!("{what}.max"), Some(g.max), Some(hi));
            self.num(&format!("{what}.mean"), Some(g.mean), Some(mean));
            self.num(&format!("{what}.median"), Some(g.median), Some(median));
            self.num(&format!("{what}.std"), Some(g.std), Some(std));
        }
    }
}

fn pct(a: u64, b: u64) -> Option<f64> {
    (b > 0).then(|| a as f64 * 100.0 / b as f64)
}

fn is_upper_only(w: &str) -> bool {
    w.chars().any(|c| c.is_uppercase()) && !w.chars().any(|c| c.is_lowercase())
}

/// Recomputes the vector of `u` from the fixture with plain loops and
/// reports every disagreement with `v`.
pub fn check_vector(fx: &Fixture, u: UserId, v: &FeatureVector, lex: &Lexicons, ck: &mut Checker) {
    let mut own: Vec<&Gen> = fx.tweets.iter().filter(|g| g.tweet.author == u).collect();
    own.sort_by_key(|g| (g.tweet.created_at, g.tweet.id));

    // profile
    let s = &fx.snapshots[&u];
    let p = v.profile.as_ref().expect("profile");
    ck.eq("screen_name_len", p.screen_name_len, s.screen_name.chars().count() as u64);
    ck.eq("screen_name_digit", p.screen_name_digit, s.screen_name.chars().filter(|c| c.is_ascii_digit()).count() as u64);
    ck.eq("name_greek", p.name_greek, s.name.chars().filter(|c| ('\u{370}'..='\u{3ff}').contains(c)).count() as u64);
    ck.eq("bio_total_chars", p.bio_total_chars, s.bio.chars().count() as u64);
    ck.eq("bio_words", p.bio_words, s.bio.split(' ').filter(|w| !w.is_empty()).count() as u64);
    ck.num("fr_fo_ratio", p.fr_fo_ratio, (s.followers_count > 0).then(|| s.friends_count as f64 / s.followers_count as f64));

    // activity, one pass
    let a = &v.activity;
    let mut hours = vec![0u64; 24];
    let mut weekdays = vec![0u64; 7];
    let mut greek = 0;
    let mut top = 0;
    let mut plain = 0;
    let mut all_gaps = Vec::new();
    let mut rt_gaps = Vec::new();
    let mut buckets = vec![0u64; 22];
    let mut prev: Option<Timestamp> = None;
    let mut prev_rt: Option<Timestamp> = None;
    let mut sources: BTreeMap<String, u64> = BTreeMap::new();
    for g in &own {
        let t = &g.tweet;
        let secs = t.created_at.rem_euclid(DAY);
        hours[(secs / 3600) as usize] += 1;
        weekdays[((t.created_at.div_euclid(DAY) + 3).rem_euclid(7)) as usize] += 1;
        greek += (t.lang == "el") as u64;
        top += (t.retweet_of.is_none() && t.reply_to.is_none()) as u64;
        plain += (t.retweet_of.is_none() && t.hashtags.is_empty() && t.mentions.is_empty() && t.urls.is_empty()) as u64;
        if let Some(p) = prev {
            let d = t.created_at - p;
            all_gaps.push(d as f64);
            buckets[floor_log2(d)] += 1;
        }
        prev = Some(t.created_at);
        if t.retweet_of.is_some() {
            if let Some(p) = prev_rt {
                rt_gaps.push((t.created_at - p) as f64);
            }
            prev_rt = Some(t.created_at);
        }
        *sources.entry(t.source_client.clone()).or_default() += 1;
    }
    let n = own.len() as u64;
    ck.eq("seen_total", a.seen_total, n);
    ck.eq("seen_greek_total", a.seen_greek_total, greek);
    ck.eq("tweets_per_hour_of_day", a.tweets_per_hour_of_day.clone(), hours);
    ck.eq("tweets_per_weekday", a.tweets_per_weekday.clone(), weekdays);
    ck.eq("all_intervals", a.all_intervals.counts.clone(), buckets);
    ck.eq("seen_top_tweets", a.seen_top_tweets, top);
    ck.num("top_tweets_pcnt", a.top_tweets_pcnt, pct(top, n));
    ck.eq("plain_tweets", a.plain_tweets, plain);
    ck.summary("time_between_any", a.time_between_any, &all_gaps);
    ck.summary("time_between_rt", a.time_between_rt, &rt_gaps);
    ck.eq("last_tweeted_at", a.last_tweeted_at, own.last().map(|g| g.tweet.created_at));
    let best_source = sources.iter().max_by(|x, y| x.1.cmp(y.1).then_with(|| y.0.cmp(x.0))).map(|(k, &c)| (k.clone(), c));
    ck.eq("most_used_source", a.most_used_sources.first().cloned(), best_source);

    // interaction, by scanning the whole corpus
    let i = &v.interaction;
    let mut out: [BTreeMap<UserId, u64>; 3] = Default::default();
    let mut inn: [BTreeMap<UserId, u64>; 3] = Default::default();
    let mut replies_to_me: BTreeMap<TweetId, u64> = BTreeMap::new();
    for g in &fx.tweets {
        let t = &g.tweet;
        let mut edges: Vec<(usize, UserId)> = Vec::new();
        if let Some((_, b)) = t.retweet_of {
            edges.push((1, b));
        } else {
            edges.extend(t.mentions.iter().map(|&m| (0, m)));
            if let Some((tid, b)) = t.reply_to {
                edges.push((2, b));
                if b == u && t.author != u {
                    *replies_to_me.entry(tid).or_default() += 1;
                }
            }
        }
        for (k, b) in edges {
            if b == t.author {
                continue;
            }
            if t.author == u {
                *out[k].entry(b).or_default() += 1;
            }
            if b == u {
                *inn[k].entry(t.author).or_default() += 1;
            }
        }
    }
    let fams = [("mention", &i.mention), ("retweet", &i.retweet), ("reply", &i.reply)];
    for (k, (name, f)) in fams.into_iter().enumerate() {
        let ow: u64 = out[k].values().sum();
        let iw: u64 = inn[k].values().sum();
        ck.eq(&format!("{name}_outdegree"), f.outdegree, out[k].len() as u64);
        ck.eq(&format!("{name}_indegree"), f.indegree, inn[k].len() as u64);
        ck.eq(&format!("{name}_outweight"), f.outweight, ow);
        ck.eq(&format!("{name}_inweight"), f.inweight, iw);
        ck.num(&format!("{name}_avg_inweight"), f.avg_inweight, (!inn[k].is_empty()).then(|| iw as f64 / inn[k].len() as f64));
        ck.num(
            &format!("{name}_out_in_ratio"),
            f.out_in_ratio,
            (!inn[k].is_empty()).then(|| out[k].len() as f64 / inn[k].len() as f64),
        );
    }
    ck.eq("seen_replied_to", i.seen_replied_to, replies_to_me.len() as u64);
    let engaging = replies_to_me.iter().fold(None::<(TweetId, u64)>, |best, (&t, &c)| match best {
        Some((_, bc)) if bc >= c => best,
        _ => Some((t, c)),
    });
    ck.eq("most_engaging_tweet", i.most_engaging_tweet, engaging.map(|(t, _)| t));

    // relation
    let r = &v.relation;
    let fr: BTreeSet<UserId> = fx.follows.iter().filter(|e| e.src == u).map(|e| e.dst).collect();
    let fo: BTreeSet<UserId> = fx.follows.iter().filter(|e| e.dst == u).map(|e| e.src).collect();
    let both = fr.iter().filter(|x| fo.contains(x)).count() as u64;
    let either = (fr.len() + fo.len()) as u64 - both;
    let is_target = |x: &UserId| fx.classes.get(x) == Some(&UserClass::Target);
    let gr_fr = fr.iter().filter(|x| is_target(x)).count() as u64;
    ck.eq("fr", r.fr, fr.len() as u64);
    ck.eq("fo", r.fo, fo.len() as u64);
    ck.eq("fr_and_fo", r.fr_and_fo, both);
    ck.eq("fr_or_fo", r.fr_or_fo, either);
    ck.num("fr_fo_jaccard", Some(r.fr_fo_jaccard), Some(if either == 0 { 0.0 } else { both as f64 / either as f64 }));
    ck.eq("gr_fr", r.gr_fr, gr_fr);
    ck.num("gr_fr_pcnt", r.gr_fr_pcnt, pct(gr_fr, fr.len() as u64));
    ck.eq("greek", r.greek, is_target(&u));
    let favoriters: BTreeSet<UserId> = fx.favorites.iter().filter(|f| f.tweet_author == u).map(|f| f.user).collect();
    let favorited: BTreeSet<UserId> = fx.favorites.iter().filter(|f| f.user == u).map(|f| f.tweet_author).collect();
    ck.eq("favoriters", r.favoriters, favoriters.len() as u64);
    ck.eq("favorited", r.favorited, favorited.len() as u64);

    // text and sentiment, from the generating words
    let x = &v.text;
    let authored: Vec<&&Gen> = own.iter().filter(|g| g.tweet.retweet_of.is_none()).collect();
    let mut total_words = 0u64;
    let mut uniq: BTreeSet<String> = BTreeSet::new();
    let mut total_bigrams = 0u64;
    let mut uniq_bigrams: BTreeSet<(String, String)> = BTreeSet::new();
    let mut caps_words = 0;
    let mut caps_tweets = 0;
    let mut articles = 0;
    let mut total_hashtags = 0;
    let mut uniq_tags: BTreeSet<String> = BTreeSet::new();
    let mut seen_urls = 0;
    let mut langs: BTreeSet<String> = BTreeSet::new();
    let mut wpt = Vec::new();
    let mut chars = 0u64;
    let mut digits = 0u64;
    let mut daily: BTreeMap<i64, (u64, f64)> = BTreeMap::new();
    let mut entity_tweets: BTreeMap<String, u64> = BTreeMap::new();
    for g in &authored {
        let t = &g.tweet;
        let lw: Vec<String> = g.words.iter().map(|w| w.to_lowercase()).collect();
        total_words += lw.len() as u64;
        wpt.push(lw.len() as f64);
        uniq.extend(lw.iter().cloned());
        for pair in lw.windows(2) {
            total_bigrams += 1;
            uniq_bigrams.insert((pair[0].clone(), pair[1].clone()));
        }
        caps_words += g.words.iter().filter(|w| w.chars().count() > 1 && is_upper_only(w)).count() as u64;
        let any_upper = g.words.iter().any(|w| w.chars().any(|c| c.is_uppercase()));
        let any_lower = g.words.iter().any(|w| w.chars().any(|c| c.is_lowercase()));
        caps_tweets += (any_upper && !any_lower) as u64;
        articles += lw.iter().filter(|w| lex.articles.contains(*w)).count() as u64;
        total_hashtags += t.hashtags.len() as u64;
        uniq_tags.extend(t.hashtags.iter().map(|h| h.to_lowercase()));
        seen_urls += t.urls.len() as u64;
        langs.insert(t.lang.clone());
        chars += t.text.chars().count() as u64;
        digits += t.text.chars().filter(|c| c.is_ascii_digit()).count() as u64;
        let pos: f64 = lw.iter().map(|w| lex.sentiment.get(w).map_or(0.0, |s| s.0)).sum();
        if pos > 0.0 {
            let e = daily.entry(t.created_at.div_euclid(DAY)).or_default();
            e.0 += 1;
            e.1 += pos;
        }
        let text = t.text.to_lowercase();
        let tags: BTreeSet<String> = t.hashtags.iter().map(|h| h.to_lowercase()).collect();
        let mut ents: BTreeSet<String> = BTreeSet::new();
        let mut claimed: BTreeSet<&String> = BTreeSet::new();
        for (name, aliases) in &lex.entities {
            for al in aliases {
                if tags.contains(al) {
                    claimed.insert(al);
                    ents.insert(name.clone());
                }
                if text.contains(al.as_str()) {
                    ents.insert(name.clone());
                }
            }
        }
        for tag in &tags {
            if !claimed.contains(tag) {
                ents.insert(format!("#{tag}"));
            }
        }
        for e in ents {
            *entity_tweets.entry(e).or_default() += 1;
        }
    }
    ck.eq("text_tweets", x.text_tweets, authored.len() as u64);
    ck.eq("total_words", x.total_words, total_words);
    ck.eq("unique_words", x.unique_words, uniq.len() as u64);
    ck.num("lex_freq", x.lex_freq, (total_words > 0).then(|| uniq.len() as f64 / total_words as f64));
    ck.eq("total_bigrams", x.total_bigrams, total_bigrams);
    ck.eq("unique_bigrams", x.unique_bigrams, uniq_bigrams.len() as u64);
    ck.eq("all_caps_words", x.all_caps_words, caps_words);
    ck.num("all_caps_words_pcnt", x.all_caps_words_pcnt, pct(caps_words, total_words));
    ck.eq("all_caps_tweets", x.all_caps_tweets, caps_tweets);
    ck.eq("articles", x.articles, articles);
    ck.eq("total_hashtags", x.total_hashtags, total_hashtags);
    ck.eq("uniq_hashtags", x.uniq_hashtags, uniq_tags.len() as u64);
    ck.eq("seen_urls", x.seen_urls, seen_urls);
    ck.eq("number_of_languages", x.number_of_languages, langs.len() as u64);
    ck.eq("total_chars", x.total_chars, chars);
    ck.eq("digit_chars", x.digit_chars, digits);
    ck.num("avg_wptw", x.avg_wptw, welford(&wpt).map(|s| s.2));
    ck.num("std_wptw", x.std_wptw, welford(&wpt).map(|s| s.4));

    let sd = &v.sentiment.daily_sentiment;
    for (day, (k, sum)) in &daily {
        let label = chrono_label(*day);
        match sd.get(&label) {
            Some(m) => {
                ck.eq(&format!("pos_tweets {label}"), m.pos_tweets, *k);
                ck.num(&format!("pos_mean {label}"), m.pos_mean, Some(sum / *k as f64));
            }
            None => ck.eq(&format!("daily_sentiment {label}"), false, true),
        }
    }
    ck.eq("entity nodes", v.sentiment.entity_overlap.nodes.clone(), entity_tweets);
}

/// `YYYY-MM-DD` of a day number, by civil-from-days arithmetic.
pub fn chrono_label(day: i64) -> String {
    let z = day + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + (m <= 2) as i64;
    format!("{y:04}-{m:02}-{d:02}")
}
