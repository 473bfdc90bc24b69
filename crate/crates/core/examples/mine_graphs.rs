//! Crawls briefly, then extracts interaction graphs, degree distributions
//! and thread lengths from the store.

use commcrawl::apiface::BudgetConfig;
use commcrawl::classify::ClassifierConfig;
use commcrawl::graphmine::{
    degree_distributions, extract_interactions, favorite_graph, follow_snapshot, list_similarity, target_roots,
    thread_lengths, DEFAULT_LIST_CAP,
};
use commcrawl::model::{UserClass, DAY};
use commcrawl::sched::{run_world, Crawler, SchedulerConfig};
use commcrawl::simnet::{World, WorldConfig};
use commcrawl::store::Store;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::generate(WorldConfig { n_users: 300, seed: 5, ..WorldConfig::default() })?;
    let mut crawler =
        Crawler::new(Store::new(), SchedulerConfig::default(), ClassifierConfig::default(), BudgetConfig::default());
    run_world(&mut world, &mut crawler, 2 * DAY);
    let store = crawler.store();

    let tweets = store.all_tweets();
    let inter = extract_interactions(&tweets);
    for g in inter.graphs() {
        println!("{:<8} edges {:>6} weight {:>6}", g.kind.name(), g.edge_count(), g.total_weight());
    }
    let fav = favorite_graph(&store.favorites());
    println!("favorite edges {}", fav.edge_count());
    let lists = list_similarity(&store.memberships(), DEFAULT_LIST_CAP);
    println!("list co-membership edges {}", lists.graph.edge_count());

    let follow = follow_snapshot(&store.follow_edges(), &store.follow_scans(), world.clock());
    let d = degree_distributions(&follow);
    println!("follow in-degree histogram (first 5): {:?}", d.in_degree.iter().take(5).collect::<Vec<_>>());

    let classes = store.classes();
    let roots = target_roots(&tweets, |u| classes.get(&u) == Some(&UserClass::Target));
    let threads = thread_lengths(&tweets, &roots);
    println!("thread lengths: {:?}", threads.histogram);
    Ok(())
}
