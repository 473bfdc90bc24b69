mod common;

use std::collections::{BTreeMap, BTreeSet};

use commcrawl::model::{FollowEdge, Timestamp, Tweet, TweetId, UrlEntity, UserClass, UserId, DAY, HOUR};
use commcrawl::simnet::DEFAULT_START;
use commcrawl::store::Store;
use commcrawl::vectorize::{
    interaction_features, jaccard, profile_features, relation_features, sentiment_features, text_features,
    FavoriteIndex, FollowIndex, InteractionIndex, Lexicons, VectorizeError, Vectorizer,
};
use commcrawl::graphmine::Graph;
use common::{check_vector, Checker, Fixture};
use proptest::prelude::*;

fn tw(seq: u64, author: u64, at: Timestamp, text: &str) -> Tweet {
    Tweet {
        id: TweetId::from_parts(at, seq),
        author: UserId(author),
        created_at: at,
        text: text.to_string(),
        lang: "el".into(),
        retweet_of: None,
        reply_to: None,
        quote_of: None,
        mentions: vec![],
        hashtags: vec![],
        urls: vec![],
        source_client: "web".into(),
        truncated: false,
    }
}

fn lex() -> Lexicons {
    Lexicons::builtin()
}

#[test]
fn profile_examples() {
    let mut s = common::snapshot(UserId(1), 0);
    s.screen_name = "Ab3".into();
    s.name = "Μαρία".into();
    s.bio = String::new();
    let p = profile_features(&s, UserClass::Tracked);
    assert_eq!((p.screen_name_len, p.screen_name_upper, p.screen_name_lower), (3, 1, 1));
    assert_eq!((p.screen_name_digit, p.screen_name_alpha), (1, 2));
    assert_eq!(p.name_greek, 5);
    assert_eq!((p.bio_words, p.bio_total_chars, p.bio_alpha_chars, p.bio_punctuation_chars), (0, 0, 0, 0));
    s.followers_count = 0;
    assert_eq!(profile_features(&s, UserClass::Tracked).fr_fo_ratio, None);
}

#[test]
fn activity_examples() {
    let store = Store::new();
    let t0 = DEFAULT_START + 10 * HOUR;
    store.put_tweet(tw(1, 1, t0, "ένα"));
    let mut v = Vectorizer::new(&store, lex(), "el");
    let one = v.assemble(UserId(1), t0 + DAY).unwrap();
    assert!(one.activity.all_intervals.is_empty());
    assert_eq!(one.activity.time_between_any, None);

    store.put_tweet(tw(2, 1, t0 + 60, "δύο"));
    store.put_tweet(tw(3, 1, t0 + 120, "τρία"));
    let three = v.assemble(UserId(1), t0 + DAY).unwrap();
    let a = &three.activity;
    assert_eq!(a.all_intervals.mass(), 2);
    assert_eq!(a.all_intervals.counts[5], 2);
    let s = a.time_between_any.unwrap();
    assert_eq!((s.mean, s.std), (60.0, 0.0));

    store.put_tweet(tw(4, 2, DEFAULT_START + 10 * HOUR, "α"));
    store.put_tweet(tw(5, 2, DEFAULT_START + 16 * HOUR, "β"));
    let two = v.assemble(UserId(2), t0 + DAY).unwrap();
    assert_eq!(two.activity.daily_max_intervals.values().copied().collect::<Vec<_>>(), vec![21600]);
}

#[test]
fn interaction_examples() {
    let mut tweets = Vec::new();
    let mut seq = 0;
    let mut rt = |by: u64, n: usize, tweets: &mut Vec<Tweet>| {
        for _ in 0..n {
            seq += 1;
            let mut t = tw(seq, by, DEFAULT_START + seq as i64, "");
            t.retweet_of = Some((TweetId(1), UserId(1)));
            tweets.push(t);
        }
    };
    rt(2, 3, &mut tweets);
    rt(3, 1, &mut tweets);
    let idx = InteractionIndex::build(&tweets);
    let a = interaction_features(UserId(1), &idx, &[]);
    assert_eq!((a.retweet.indegree, a.retweet.inweight), (2, 4));
    assert_eq!(a.retweet.avg_inweight, Some(2.0));
    assert_eq!(a.retweet.out_in_ratio, Some(0.0));
    assert_eq!(a.mention.out_in_ratio, None);

    let mut replies = Vec::new();
    for k in 0..5 {
        let mut t = tw(100 + k, 1, DEFAULT_START + k as i64, "");
        t.reply_to = Some((TweetId(7), UserId(2)));
        replies.push(t);
    }
    let mut back = tw(200, 2, DEFAULT_START + 50, "");
    back.reply_to = Some((TweetId(8), UserId(1)));
    replies.push(back);
    let idx = InteractionIndex::build(&replies);
    let own: Vec<Tweet> = replies.iter().filter(|t| t.author == UserId(1)).cloned().collect();
    let a = interaction_features(UserId(1), &idx, &own);
    assert_eq!(a.reply.out_in_ratio, Some(1.0));
    assert_eq!(a.reply.outweight, 5);
    assert_eq!(a.most_engaging_tweet, Some(TweetId(8)));

    let none = interaction_features(UserId(9), &InteractionIndex::build(&[]), &[]);
    assert_eq!(none.retweet.indegree, 0);
    assert_eq!(none.retweet.avg_inweight, None);
}

#[test]
fn relation_examples() {
    let set = |xs: &[u64]| xs.iter().map(|&x| UserId(x)).collect::<BTreeSet<_>>();
    assert_eq!(jaccard(&set(&[1, 2, 3]), &set(&[2, 3, 4])), 0.5);
    assert_eq!(jaccard(&set(&[1, 2]), &set(&[1, 2])), 1.0);
    assert_eq!(jaccard(&set(&[]), &set(&[])), 0.0);

    let u = UserId(1000);
    let mut g = Graph::new(commcrawl::graphmine::GraphKind::Follow);
    let mut classes = BTreeMap::new();
    for v in 1..=100 {
        if v <= 50 {
            g.add(u, UserId(v), 1);
        } else {
            g.add(UserId(v), u, 1);
        }
        if v % 100 < 35 || v == 100 {
            classes.insert(UserId(v), UserClass::Target);
        }
    }
    let ix = FollowIndex::build(&g, std::iter::empty::<&FollowEdge>());
    let r = relation_features(u, &ix, &classes, &FavoriteIndex::default(), (None, None));
    assert_eq!(r.fr_or_fo, 100);
    assert_eq!(r.gr_fr_fo, 35);
    assert_eq!(r.gr_fr_fo_pcnt, Some(35.0));
    assert_eq!(r.fr_and_fo, 0);
}

#[test]
fn text_examples() {
    let l = lex();
    let f = text_features(&[tw(1, 1, 0, "a b"), tw(2, 1, 1, "a b")], None, &l);
    assert_eq!((f.total_words, f.unique_words, f.lex_freq), (4, 2, Some(0.5)));
    assert_eq!((f.total_bigrams, f.unique_bigrams, f.bigram_lex_freq), (2, 1, Some(0.5)));

    let f = text_features(&[tw(1, 1, 0, "ΓΕΙΑ ΣΑΣ")], None, &l);
    assert_eq!((f.all_caps_tweets, f.all_caps_words), (1, 2));

    let mut tagged = tw(2, 1, 5, "με #tag");
    tagged.hashtags = vec!["tag".into()];
    let mut linked = tw(3, 1, 6, "δες https://t.co/x");
    linked.urls = vec![UrlEntity { short: "https://t.co/x".into(), expanded: "https://www.example.com/a".into() }];
    let store = Store::new();
    for t in [tw(1, 1, DEFAULT_START, "απλό"), tagged, linked] {
        store.put_tweet(t);
    }
    let v = Vectorizer::new(&store, l.clone(), "el").assemble(UserId(1), DEFAULT_START + DAY).unwrap();
    assert_eq!(v.activity.plain_tweets, 1);

    let f = text_features(&store.tweets_by(UserId(1)), Some("example"), &l);
    assert_eq!(f.avg_edit_distance, Some(4.0));
}

#[test]
fn sentiment_examples() {
    let l = lex();
    let none = sentiment_features(&[tw(1, 1, DEFAULT_START, "τίποτα εδώ")], &l).unwrap();
    assert!(none.daily_sentiment.is_empty());

    let day = DEFAULT_START;
    let s = sentiment_features(&[tw(1, 1, day, "υπέροχο"), tw(2, 1, day + 60, "τραπέζι")], &l).unwrap();
    let m = s.daily_sentiment.values().next().unwrap();
    assert_eq!((m.pos_tweets, m.pos_mean), (1, Some(2.0)));

    let mut both = tw(3, 1, day, "η αθήνα και η #aek");
    both.hashtags = vec!["aek".into()];
    let s = sentiment_features(&[both], &l).unwrap();
    assert_eq!(s.entity_overlap.nodes.values().copied().collect::<Vec<_>>(), vec![1, 1]);
    assert_eq!(s.entity_overlap.edges.len(), 1);
    assert_eq!(s.entity_overlap.edges[0].weight, 1);

    let mut empty = l.clone();
    empty.sentiment.clear();
    assert!(matches!(sentiment_features(&[], &empty), Err(VectorizeError::MissingLexicon(_))));
}

#[test]
fn assemble_cache_interval_and_unknown() {
    let store = Store::new();
    store.put_snapshot(common::snapshot(UserId(5), 0)).unwrap();
    let mut v = Vectorizer::new(&store, lex(), "el");
    let as_of = DEFAULT_START + DAY;
    let empty = v.assemble(UserId(5), as_of).unwrap();
    assert_eq!(empty.vector_timestamp, as_of);
    assert_eq!(empty.activity.seen_total, 0);
    assert_eq!(empty.text.lex_freq, None);

    let again = v.assemble(UserId(5), as_of).unwrap();
    assert_eq!(v.cache_hits(), 1);
    assert_eq!(again, empty);

    for k in 0..10 {
        store.put_tweet(tw(k, 5, DEFAULT_START + k as i64 * HOUR, "λέξη"));
    }
    let fresh = v.assemble(UserId(5), as_of).unwrap();
    assert_eq!(v.cache_hits(), 1);
    assert_eq!(fresh.activity.seen_total, 10);

    let part = v.assemble_interval(UserId(5), DEFAULT_START + 2 * HOUR, DEFAULT_START + 5 * HOUR).unwrap();
    assert_eq!(part.activity.seen_total, 4);
    assert_eq!(part.interval_start, Some(DEFAULT_START + 2 * HOUR));
    assert!(matches!(v.assemble_interval(UserId(5), 10, 5), Err(VectorizeError::InvalidInterval { .. })));
    assert!(matches!(v.assemble(UserId(77), as_of), Err(VectorizeError::UnknownUser(_))));
}

#[test]
fn vectors_match_naive_reference() {
    let fx = Fixture::new(21, 1000, 40);
    let store = fx.store();
    let l = lex();
    let mut v = Vectorizer::new(&store, l.clone(), "el");
    let mut ck = Checker { errors: Vec::new(), checks: 0 };
    for u in 1..=fx.n_users {
        let vec = v.assemble(UserId(u), fx.as_of()).unwrap();
        check_vector(&fx, UserId(u), &vec, &l, &mut ck);
    }
    assert!(ck.checks > 40 * 80, "only {} checks", ck.checks);
    assert!(ck.errors.is_empty(), "{} mismatches, first: {:?}", ck.errors.len(), &ck.errors[..ck.errors.len().min(10)]);
}

#[test]
fn percentages_match_sibling_fields() {
    let fx = Fixture::new(4, 600, 30);
    let store = fx.store();
    let mut v = Vectorizer::new(&store, lex(), "el");
    for u in 1..=fx.n_users {
        let x = v.assemble(UserId(u), fx.as_of()).unwrap();
        let t = &x.text;
        let pc = |a: u64, b: u64| (b > 0).then(|| 100.0 * a as f64 / b as f64);
        assert_eq!(t.all_caps_words_pcnt, pc(t.all_caps_words, t.total_words));
        assert_eq!(t.greek_pcnt, pc(t.greek_chars, t.total_chars));
        assert_eq!(x.relation.tr_fo_pcnt, pc(x.relation.tr_fo, x.relation.fo));
        for p in [t.upper_pcnt, t.digit_pcnt, t.alpha_pcnt, x.activity.top_tweets_pcnt].into_iter().flatten() {
            assert!((0.0..=100.0).contains(&p));
        }
        let a = &x.activity;
        assert_eq!(a.tweets_per_hour_of_day.iter().sum::<u64>(), a.seen_total);
        assert_eq!(a.tweets_per_weekday.iter().sum::<u64>(), a.seen_total);
        assert_eq!(a.all_intervals.mass(), a.seen_total.saturating_sub(1));
        assert!((0.0..=1.0).contains(&x.relation.fr_fo_jaccard));
    }
}

#[test]
fn vectors_are_deterministic() {
    let fx = Fixture::new(8, 300, 20);
    let bytes = || {
        let store = fx.store();
        let mut v = Vectorizer::new(&store, lex(), "el");
        let users: Vec<UserId> = (1..=fx.n_users).map(UserId).collect();
        let vs = v.assemble_many(&users, fx.as_of()).unwrap();
        let mut out = Vec::new();
        commcrawl::vectorize::write_jsonl(&vs, &mut out).unwrap();
        out
    };
    assert_eq!(bytes(), bytes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lex_freq_is_distinct_over_total(texts in prop::collection::vec("[a-cA-Cα-γ ]{0,30}", 1..20)) {
        let l = lex();
        let tweets: Vec<Tweet> = texts.iter().enumerate().map(|(i, s)| tw(i as u64, 1, i as i64, s)).collect();
        let f = text_features(&tweets, None, &l);
        let words: Vec<String> = texts.iter().flat_map(|s| s.split_whitespace().map(str::to_lowercase)).collect();
        let distinct: BTreeSet<&String> = words.iter().collect();
        prop_assert_eq!(f.total_words, words.len() as u64);
        match f.lex_freq {
            None => prop_assert!(words.is_empty()),
            Some(x) => {
                prop_assert!(x > 0.0 && x <= 1.0);
                prop_assert_eq!(x, distinct.len() as f64 / words.len() as f64);
            }
        }
    }

    #[test]
    fn histogram_mass_is_seen_total(offsets in prop::collection::vec(0i64..40 * DAY, 0..60)) {
        let store = Store::new();
        for (i, o) in offsets.iter().enumerate() {
            store.put_tweet(tw(i as u64, 1, DEFAULT_START + o, "x"));
        }
        store.put_snapshot(common::snapshot(UserId(1), 0)).unwrap();
        let v = Vectorizer::new(&store, lex(), "el").assemble(UserId(1), DEFAULT_START + 41 * DAY).unwrap();
        let a = v.activity;
        prop_assert_eq!(a.seen_total, offsets.len() as u64);
        prop_assert_eq!(a.tweets_per_hour_of_day.iter().sum::<u64>(), a.seen_total);
        prop_assert_eq!(a.tweets_per_weekday.iter().sum::<u64>(), a.seen_total);
        prop_assert_eq!(a.all_intervals.mass(), a.seen_total.saturating_sub(1));
    }
}
