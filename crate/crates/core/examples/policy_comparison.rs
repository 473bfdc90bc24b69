//! Compares the two timeline scheduling policies under a tight timeline
//! budget: tweets captured per timeline request.

use commcrawl::apiface::{BudgetConfig, Endpoint};
use commcrawl::classify::ClassifierConfig;
use commcrawl::model::DAY;
use commcrawl::sched::{run_world, Crawler, Policy, SchedulerConfig};
use commcrawl::simnet::{World, WorldConfig};
use commcrawl::store::Store;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let per_window: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let days: i64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(7);
    let budgets = BudgetConfig::default().with(Endpoint::UserTimeline, per_window);
    for policy in [Policy::DualPriority, Policy::RoundRobin] {
        let n: usize = std::env::args().nth(3).and_then(|a| a.parse().ok()).unwrap_or(1000);
        let mut world = World::generate(WorldConfig { n_users: n, ..WorldConfig::default() })?;
        world.set_budgets(budgets.clone());
        let cfg = SchedulerConfig { policy, ..SchedulerConfig::default() };
        let mut crawler = Crawler::new(Store::new(), cfg, ClassifierConfig::default(), budgets.clone());
        let reports = run_world(&mut world, &mut crawler, days * DAY);
        let requests: u32 = reports.iter().map(|r| r.timeline_requests).sum();
        let tweets: usize = reports.iter().map(|r| r.tweets_stored).sum();
        println!("tracked {}", crawler.store().users_in(|c| c.is_crawled()).len());
        println!("{policy:?}: {tweets} tweets in {requests} timeline requests, {:.2} per request", tweets as f64 / requests as f64);
    }
    Ok(())
}
