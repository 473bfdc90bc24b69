//! Saves a crawled store as JSON Lines, reloads it, and writes the
//! anonymized id-only tweet export.

use commcrawl::apiface::BudgetConfig;
use commcrawl::classify::ClassifierConfig;
use commcrawl::model::DAY;
use commcrawl::sched::{run_world, Crawler, SchedulerConfig};
use commcrawl::simnet::{World, WorldConfig};
use commcrawl::store::{Collection, Store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::generate(WorldConfig { n_users: 150, seed: 3, ..WorldConfig::default() })?;
    let mut crawler =
        Crawler::new(Store::new(), SchedulerConfig::default(), ClassifierConfig::default(), BudgetConfig::default());
    run_world(&mut world, &mut crawler, DAY);

    let dir = std::env::temp_dir().join("commcrawl-store-example");
    let written = crawler.store().export_dir(&dir)?;
    let reloaded = Store::new();
    let read = reloaded.import_dir(&dir)?;
    println!("wrote {written} records, read {read} back into {}", dir.display());
    for c in Collection::ALL {
        assert_eq!(reloaded.export_lines(c), crawler.store().export_lines(c), "{}", c.name());
    }
    let n = reloaded.export_ids(Collection::Tweets, &dir.join(Collection::Tweets.file_name(true)))?;
    println!("{n} tweets exported id-only");
    Ok(())
}
