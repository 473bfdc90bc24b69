use std::collections::BTreeSet;

use commcrawl::apiface::{ApiError, BudgetConfig, Endpoint, LookupResult, SocialApi};
use commcrawl::graphmine::extract_interactions;
use commcrawl::model::{TweetId, UserId, DAY, HOUR};
use commcrawl::simnet::{
    ChurnModel, GroundTruth, TrueCommunity, TweetDraft, UserSpec, World, WorldConfig,
};

fn quiet() -> WorldConfig {
    WorldConfig {
        churn: ChurnModel { suspend: 0.0, delete: 0.0, protect: 0.0, reactivate: 0.0, profile_change: 0.0 },
        ..WorldConfig::default()
    }
}

fn page_all(w: &World, u: UserId) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut max: Option<TweetId> = None;
    loop {
        let page = w.user_timeline(u, None, max, 200).unwrap();
        if page.tweets.is_empty() {
            break;
        }
        sizes.push(page.tweets.len());
        max = Some(TweetId(page.tweets.last().unwrap().id.0 - 1));
    }
    sizes
}

#[test]
fn empty_world() {
    let w = World::generate(WorldConfig { n_users: 0, ..WorldConfig::default() }).unwrap();
    assert_eq!(w.user_count(), 0);
    assert!(w.ground_truth().all_tweets().is_empty());
    assert_eq!(w.ground_truth().request_count(), 0);
}

#[test]
fn same_seed_same_bytes() {
    let cfg = WorldConfig { n_users: 150, seed: 5, ..WorldConfig::default() };
    let dump = || {
        let mut w = World::generate(cfg.clone()).unwrap();
        w.advance(DAY);
        let mut out = Vec::new();
        w.write_jsonl(&mut out).unwrap();
        out
    };
    assert_eq!(dump(), dump());
}

#[test]
fn community_partition_is_exact() {
    let w = World::generate(WorldConfig { n_users: 1000, mixed_fraction: 0.0, ..WorldConfig::default() }).unwrap();
    let gt = w.ground_truth();
    let count = |lang: &str| gt.users().filter(|u| u.community == TrueCommunity::Language(lang.into())).count();
    assert_eq!(count("el"), 600);
    assert_eq!(count("en"), 400);
}

#[test]
fn rate_zero_never_tweets() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 0.0));
    w.advance(30 * DAY);
    assert_eq!(w.ground_truth().total_tweets(u), 0);
    assert!(w.ground_truth().tweets_of(u).is_empty());
}

#[test]
fn rate_48_per_day_over_one_day() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 48.0));
    let before = w.ground_truth().tweets_of(u).len();
    let t0 = w.clock();
    w.advance(DAY);
    let gt = w.ground_truth();
    let emitted = gt.tweets_of(u).iter().filter(|t| t.created_at >= t0).count();
    assert!((24..=72).contains(&emitted), "emitted {emitted}");
    assert_eq!(gt.tweets_of(u).len(), before + emitted);
}

#[test]
fn mixed_user_long_run_share() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::mixed(0.30, 300.0));
    w.advance(6 * DAY);
    let gt = w.ground_truth();
    let tweets = gt.tweets_of(u);
    assert!(tweets.len() >= 1000, "only {} tweets", tweets.len());
    let share = tweets.iter().filter(|t| t.lang == "el").count() as f64 / tweets.len() as f64;
    assert!((share - 0.30).abs() <= 0.05, "share {share}");
}

#[test]
fn timeline_pages_of_200() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 0.0));
    w.post_many(u, 450, w.clock() - 100 * HOUR, 60);
    assert_eq!(page_all(&w, u), vec![200, 200, 50]);
}

#[test]
fn timeline_depth_is_capped_without_touching_truth() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 0.0));
    w.post_many(u, 5000, w.clock() - 200 * HOUR, 60);
    let served: usize = page_all(&w, u).iter().sum();
    assert_eq!(served, 3200);
    assert_eq!(w.ground_truth().tweets_of(u).len(), 5000);
}

#[test]
fn lookup_reports_deleted_as_gone() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 0.0));
    let ids = w.post_many(u, 3, w.clock() - HOUR, 60);
    assert!(w.delete_tweet(ids[1]));
    let r = w.statuses_lookup(&ids).unwrap();
    assert!(matches!(r[&ids[0]], LookupResult::Found { .. }));
    assert_eq!(r[&ids[1]], LookupResult::Gone);
    assert!(matches!(r[&ids[2]], LookupResult::Found { .. }));
    assert!(w.ground_truth().is_deleted(ids[1]));
}

#[test]
fn friend_ids_paginate_by_5000() {
    let mut w = World::empty(quiet());
    let hub = w.add_user(UserSpec::new("el", 0.0));
    for _ in 0..7000 {
        let v = w.add_user(UserSpec::new("en", 0.0));
        w.follow(hub, v);
    }
    let first = w.friends_ids(hub, 0).unwrap();
    assert_eq!(first.ids.len(), 5000);
    let second = w.friends_ids(hub, first.next.unwrap()).unwrap();
    assert_eq!(second.ids.len(), 2000);
    assert_eq!(second.next, None);
    let all: BTreeSet<UserId> = first.ids.into_iter().chain(second.ids).collect();
    assert_eq!(all, w.ground_truth().friends(hub));
}

#[test]
fn likes_come_newest_tweet_first() {
    let mut w = World::empty(quiet());
    let a = w.add_user(UserSpec::new("el", 0.0));
    let b = w.add_user(UserSpec::new("el", 0.0));
    let ids = w.post_many(b, 10, w.clock() - 10 * HOUR, 600);
    let now = w.clock();
    w.like(a, ids[5], now);
    w.like(a, ids[2], now);
    w.like(a, ids[9], now);
    let got: Vec<TweetId> = w.favorites_list(a, None, 200).unwrap().iter().map(|f| f.tweet).collect();
    assert_eq!(got, vec![ids[9], ids[5], ids[2]]);
}

#[test]
fn list_with_three_members() {
    let mut w = World::empty(quiet());
    let owner = w.add_user(UserSpec::new("el", 0.0));
    let members: Vec<UserId> = (0..3).map(|_| w.add_user(UserSpec::new("el", 0.0))).collect();
    let id = w.create_list(owner, "friends", &members);
    let page = w.lists_members(id, 0).unwrap();
    assert_eq!(page.ids.iter().copied().collect::<BTreeSet<_>>(), members.iter().copied().collect());
    assert_eq!(w.lists_ownerships(owner).unwrap().len(), 1);
    for m in &members {
        assert_eq!(w.lists_memberships(*m).unwrap()[0].list_id, id);
    }
}

#[test]
fn trends_known_and_unknown_place() {
    let w = World::empty(quiet());
    let t = w.trends_place("GR").unwrap();
    assert_eq!(t.place, "GR");
    assert_eq!(t.observed_at, w.clock());
    assert!(matches!(w.trends_place("Atlantis"), Err(ApiError::PlaceUnknown(_))));
}

#[test]
fn stream_filter_matches_keywords() {
    let mut w = World::empty(quiet());
    let a = w.add_user(UserSpec::new("el", 0.0));
    let b = w.add_user(UserSpec::new("en", 0.0));
    w.advance(HOUR);
    let at = w.clock() - 60;
    w.post(a, at, TweetDraft::text("Καλημέρα και στους δύο"));
    w.post(b, at, TweetDraft::text("good morning"));
    let got = w.stream_filter(&["και".to_string()], 10).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].author, a);
    assert!(w.stream_filter(&["και".to_string()], 0).unwrap().is_empty());
}

#[test]
fn request_log_records_each_call() {
    let mut w = World::empty(quiet());
    let u = w.add_user(UserSpec::new("el", 0.0));
    assert!(w.ground_truth().request_log().is_empty());
    w.user_timeline(u, None, None, 200).unwrap();
    let log = w.ground_truth().request_log();
    assert_eq!(log.len(), 1);
    assert_eq!(log[0].endpoint, Endpoint::UserTimeline);
}

#[test]
fn suspended_and_protected_users_error() {
    let mut w = World::empty(quiet());
    let a = w.add_user(UserSpec::new("el", 0.0));
    let b = w.add_user(UserSpec::new("el", 0.0));
    let c = w.add_user(UserSpec::new("el", 0.0));
    w.suspend(a);
    w.set_protected(b, true);
    w.delete_account(c);
    assert!(matches!(w.user_timeline(a, None, None, 200), Err(ApiError::UserSuspended(_))));
    assert!(matches!(w.user_timeline(b, None, None, 200), Err(ApiError::UserProtected(_))));
    assert!(matches!(w.users_show(c), Err(ApiError::UserNotFound(_))));
}

#[test]
fn follower_view_matches_truth() {
    let mut w = World::generate(WorldConfig { n_users: 300, seed: 9, ..WorldConfig::default() }).unwrap();
    w.advance(2 * DAY);
    w.set_budgets(BudgetConfig::default().with(Endpoint::FollowersIds, 1000));
    let gt: GroundTruth = w.ground_truth();
    for u in gt.users().take(50) {
        if !u.is_active() || u.protected {
            continue;
        }
        let page = w.followers_ids(u.id, 0).unwrap();
        assert_eq!(page.ids.into_iter().collect::<BTreeSet<_>>(), gt.followers(u.id));
    }
}

#[test]
fn retweet_truth_equals_recount() {
    let mut w = World::generate(WorldConfig { n_users: 200, seed: 3, ..WorldConfig::default() }).unwrap();
    w.advance(DAY);
    let gt = w.ground_truth();
    let tweets = gt.all_tweets();
    let g = extract_interactions(tweets.iter().copied());
    let mut total = 0u64;
    for t in &tweets {
        if t.retweet_of.is_some() {
            total += 1;
        }
    }
    assert_eq!(g.retweet.total_weight(), total);
}

#[test]
fn pure_users_only_retweet_their_language() {
    let mut w = World::generate(WorldConfig { n_users: 400, seed: 13, ..WorldConfig::default() }).unwrap();
    w.advance(3 * DAY);
    let gt = w.ground_truth();
    let mut retweets = 0;
    for u in gt.users() {
        let TrueCommunity::Language(lang) = &u.community else { continue };
        for t in gt.tweets_of(u.id) {
            assert_eq!(&t.lang, lang, "{:?} wrote {:?}", u.id, t.id);
            retweets += t.retweet_of.is_some() as usize;
        }
    }
    assert!(retweets > 0);
}
