//! Shows how a timeline visit pages back to the previous high-water mark.

use commcrawl::apiface::{BudgetConfig, Endpoint};
use commcrawl::model::HOUR;
use commcrawl::sched::{crawl_user_tweets, Gate, SchedulerConfig};
use commcrawl::simnet::{UserSpec, World, WorldConfig};
use commcrawl::store::Store;

fn main() {
    let mut world = World::empty(WorldConfig::default());
    let u = world.add_user(UserSpec::new("el", 0.0));
    let start = world.clock() - 1000 * HOUR;
    world.post_many(u, 450, start, 60);

    let store = Store::new();
    let cfg = SchedulerConfig::default();
    let mut gate = Gate::new(BudgetConfig::default());
    let first = crawl_user_tweets(&world, &mut gate, &store, &cfg, u, None);
    println!("first visit: {} tweets in {} requests", first.stored.len(), first.requests);

    world.advance(HOUR);
    world.post_many(u, 30, world.clock() - 1800, 30);
    let second = crawl_user_tweets(&world, &mut gate, &store, &cfg, u, None);
    println!("second visit: {} tweets in {} requests", second.stored.len(), second.requests);
    println!("timeline requests logged: {}", gate.log().iter().filter(|r| r.endpoint == Endpoint::UserTimeline).count());
}
