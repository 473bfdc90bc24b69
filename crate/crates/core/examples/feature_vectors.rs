//! Computes feature vectors for a few crawled users.

use commcrawl::apiface::BudgetConfig;
use commcrawl::classify::ClassifierConfig;
use commcrawl::model::{UserClass, DAY};
use commcrawl::sched::{run_world, Crawler, SchedulerConfig};
use commcrawl::simnet::{World, WorldConfig};
use commcrawl::store::Store;
use commcrawl::vectorize::{Lexicons, Vectorizer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::generate(WorldConfig { n_users: 200, seed: 9, ..WorldConfig::default() })?;
    let mut crawler =
        Crawler::new(Store::new(), SchedulerConfig::default(), ClassifierConfig::default(), BudgetConfig::default());
    run_world(&mut world, &mut crawler, 2 * DAY);
    let store = crawler.store();

    let mut v = Vectorizer::new(store, Lexicons::builtin(), "el");
    for u in store.users_in(|c| c == UserClass::Target).into_iter().take(3) {
        let f = v.assemble(u, world.clock())?;
        println!(
            "user {}: seen {} tweets, lex_freq {:?}, retweet indegree {}, friends {}, greek friends {:?}%",
            f.id, f.activity.seen_total, f.text.lex_freq, f.interaction.retweet.indegree, f.relation.fr, f.relation.gr_fr_pcnt
        );
        println!("  top words {:?}", f.text.most_common_words.iter().take(3).collect::<Vec<_>>());
    }
    Ok(())
}
