//! Crawls a simulated network for a few days and reports what was found.

use std::collections::BTreeMap;

use commcrawl::apiface::BudgetConfig;
use commcrawl::classify::ClassifierConfig;
use commcrawl::model::DAY;
use commcrawl::sched::{run_world, Crawler, SchedulerConfig};
use commcrawl::simnet::{World, WorldConfig};
use commcrawl::store::Store;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::generate(WorldConfig { n_users: 500, seed: 11, ..WorldConfig::default() })?;
    let mut crawler =
        Crawler::new(Store::new(), SchedulerConfig::default(), ClassifierConfig::default(), BudgetConfig::default());
    let reports = run_world(&mut world, &mut crawler, 3 * DAY);

    let mut classes: BTreeMap<&str, usize> = BTreeMap::new();
    for c in crawler.store().classes().values() {
        *classes.entry(c.as_str()).or_default() += 1;
    }
    let timeline: u32 = reports.iter().map(|r| r.timeline_requests).sum();
    println!("windows: {}", reports.len());
    println!("requests: {} ({timeline} timeline)", crawler.run_log().len());
    println!("tweets stored: {}", crawler.store().tweet_count());
    println!("classes: {classes:?}");
    Ok(())
}
