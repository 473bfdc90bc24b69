mod common;

use commcrawl::model::{Tweet, UserClass, UserId};
use commcrawl::store::{Collection, SnapshotOutcome, Store, StoreError, TweetOutcome};
use proptest::prelude::*;

#[test]
fn tweet_count_only_refresh_is_skipped() {
    let store = Store::new();
    let s = common::snapshot(UserId(1), 0);
    assert_eq!(store.put_snapshot(s.clone()).unwrap(), SnapshotOutcome::Stored);
    let mut t = s.clone();
    t.tweet_count += 10;
    t.observed_at += 100;
    assert_eq!(store.put_snapshot(t).unwrap(), SnapshotOutcome::SkippedTweetCountOnly);
    let mut b = s.clone();
    b.bio = "άλλο".into();
    b.observed_at += 200;
    assert_eq!(store.put_snapshot(b).unwrap(), SnapshotOutcome::Stored);
    assert_eq!(store.snapshot_history(UserId(1)).len(), 2);
}

#[test]
fn screen_name_conflicts() {
    let store = Store::new();
    let a = common::snapshot(UserId(1), 0);
    let mut b = common::snapshot(UserId(2), 0);
    b.screen_name = a.screen_name.to_uppercase();
    store.put_snapshot(a).unwrap();
    assert!(matches!(store.put_snapshot(b.clone()), Err(StoreError::IndexConflict { .. })));
    let (_, displaced) = store.put_snapshot_demoting(b);
    assert_eq!(displaced, Some(UserId(1)));
}

#[test]
fn truncated_tweets_are_upgraded() {
    let store = Store::new();
    let mut t = common::corpus(2, 1, 3).remove(0).tweet;
    t.truncated = true;
    assert_eq!(store.put_tweet(t.clone()), TweetOutcome::Inserted);
    assert_eq!(store.put_tweet(t.clone()), TweetOutcome::Duplicate);
    t.truncated = false;
    assert_eq!(store.put_tweet(t.clone()), TweetOutcome::Upgraded);
    assert_eq!(store.put_tweet(t), TweetOutcome::Duplicate);
}

#[test]
fn unknown_collection_and_id_projection() {
    assert!(matches!(Collection::from_name("bogus"), Err(StoreError::UnknownCollection(_))));
    for c in Collection::ALL {
        assert_eq!(Collection::from_name(c.name()).unwrap(), c);
    }
}

fn filled(tweets: &[Tweet]) -> Store {
    let fx = common::Fixture::new(tweets.len() as u64, 0, 10);
    let store = fx.store();
    for t in tweets {
        store.put_tweet(t.clone());
    }
    store.set_class(UserId(1), UserClass::Target, 5);
    store
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn export_import_round_trip(seed in 0u64..1000, n in 0usize..200) {
        let tweets: Vec<Tweet> = common::corpus(seed, n, 15).into_iter().map(|g| g.tweet).collect();
        let store = filled(&tweets);
        let dir = tempfile::tempdir().unwrap();
        store.export_dir(dir.path()).unwrap();
        let back = Store::new();
        back.import_dir(dir.path()).unwrap();
        for c in Collection::ALL {
            prop_assert_eq!(store.export_lines(c), back.export_lines(c));
        }
    }
}
