//! Generates a small synthetic network and prints its ground truth.

use std::collections::BTreeMap;

use commcrawl::model::DAY;
use commcrawl::simnet::{World, WorldConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::generate(WorldConfig { n_users: 300, seed: 7, ..WorldConfig::default() })?;
    world.advance(DAY);
    let gt = world.ground_truth();

    let mut communities: BTreeMap<String, usize> = BTreeMap::new();
    for u in gt.users() {
        *communities.entry(format!("{:?}", u.community)).or_default() += 1;
    }
    println!("users by community: {communities:?}");
    println!("live tweets: {}", gt.all_tweets().len());
    println!("follow edges: {}", gt.follow_edges().len());
    println!("lists: {}", gt.lists().len());
    Ok(())
}
