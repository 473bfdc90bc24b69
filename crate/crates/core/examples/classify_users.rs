//! Applies the language rules to a few hand-made users.

use std::collections::{BTreeMap, BTreeSet};

use commcrawl::classify::{classify_user, neighbor_resolve, ClassifierConfig, LangStats};
use commcrawl::model::{UserClass, UserId, UserSnapshot};

fn snapshot(id: u64, name: &str, bio: &str) -> UserSnapshot {
    UserSnapshot {
        id: UserId(id),
        screen_name: format!("user{id}"),
        name: name.to_string(),
        bio: bio.to_string(),
        location: String::new(),
        time_zone: String::new(),
        ui_lang: "en".to_string(),
        profile_url: String::new(),
        created_at: 0,
        tweet_count: 0,
        followers_count: 0,
        friends_count: 0,
        favourites_count: 0,
        protected: false,
        verified: false,
        observed_at: 0,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ClassifierConfig::default();
    let cases = [
        (LangStats::with_counts(UserId(1), 150, 45), snapshot(1, "Jane", "")),
        (LangStats::with_counts(UserId(2), 600, 3), snapshot(2, "Bob", "music")),
        (LangStats::with_counts(UserId(3), 40, 0), snapshot(3, "Μαρία", "")),
        (LangStats::with_counts(UserId(4), 40, 2), snapshot(4, "Sam", "")),
    ];
    for (stats, snap) in &cases {
        println!("user {} ({}/{} target) -> {:?}", stats.user, stats.seen_target, stats.seen_total, classify_user(stats, snap, &cfg));
    }

    let neighbors: BTreeSet<UserId> = (10..20).map(UserId).collect();
    let classes: BTreeMap<UserId, UserClass> =
        (10..14).map(|i| (UserId(i), UserClass::Target)).chain((14..20).map(|i| (UserId(i), UserClass::Tracked))).collect();
    println!("user 4 by neighbors -> {:?}", neighbor_resolve(UserId(4), &neighbors, &classes, &cfg)?);
    Ok(())
}
