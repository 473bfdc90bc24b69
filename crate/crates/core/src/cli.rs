//! The `commcrawl` command line: one binary, one subcommand per stage.
//! Every output lands under the store directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apiface::{BudgetConfig, Endpoint, RequestRecord};
use crate::classify::{ClassifierConfig, ClassifyError, LangStats};
use crate::graphmine::{
    degree_distributions, extract_interactions, favorite_graph, follow_snapshot, list_similarity, target_roots,
    thread_lengths, write_histogram, Graph, GraphError, GraphKind, DEFAULT_LIST_CAP,
};
use crate::model::{ModelError, Timestamp, UserClass, UserId, DAY};
use crate::sched::{run_world, write_run_log, Crawler, SchedError, SchedulerConfig};
use crate::simnet::{SimError, TrueCommunity, World, WorldConfig};
use crate::store::{Collection, Store, StoreError};
use crate::vectorize::{write_jsonl, Lexicons, VectorizeError, Vectorizer};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Store(_) => "store",
            CliError::Sim(_) => "simnet",
            CliError::Sched(_) => "scheduler",
            CliError::Classify(_) => "classifier",
            CliError::Graph(_) => "graph",
            CliError::Vectorize(_) => "vectorize",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Manifest(_) => "manifest",
            CliError::Usage(_) => "usage",
        }
    }

    /// One-line JSON form printed on failure.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

/// Inputs of a crawl run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub world_config: Option<PathBuf>,
    #[serde(default)]
    pub scheduler_config: Option<PathBuf>,
    #[serde(default)]
    pub classifier_config: Option<PathBuf>,
    pub store: PathBuf,
    pub horizon_days: f64,
    pub seed: u64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    pub fn horizon_secs(&self) -> i64 {
        (self.horizon_days * DAY as f64).round() as i64
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.horizon_days.is_finite() && self.horizon_secs() > 0) {
            return Err(CliError::Manifest(format!("horizon must be positive, got {} days", self.horizon_days)));
        }
        for p in [&self.world_config, &self.scheduler_config, &self.classifier_config].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Manifest(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn world_config(&self) -> Result<WorldConfig, CliError> {
        let mut cfg = match &self.world_config {
            Some(p) => WorldConfig::load(p)?,
            None => WorldConfig::default(),
        };
        cfg.seed = self.seed;
        Ok(cfg)
    }

    pub fn scheduler_config(&self) -> Result<SchedulerConfig, CliError> {
        Ok(match &self.scheduler_config {
            Some(p) => SchedulerConfig::load(p)?,
            None => SchedulerConfig::default(),
        })
    }

    pub fn classifier_config(&self) -> Result<ClassifierConfig, CliError> {
        Ok(match &self.classifier_config {
            Some(p) => ClassifierConfig::load(p)?,
            None => ClassifierConfig::default(),
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "commcrawl", version, about = "Community-targeted crawler over a simulated social network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct StoreArg {
    /// Store directory.
    #[arg(long = "store", default_value = "store")]
    pub dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic world and write it as JSON Lines.
    SimnetGenerate {
        /// World config (JSON); defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of users.
        #[arg(long)]
        users: Option<usize>,
        #[arg(long, default_value = "world.jsonl")]
        out: PathBuf,
    },
    /// Crawl a simulated world into the store.
    Crawl {
        /// Run manifest (JSON); flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon_days: Option<f64>,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Override the world size.
        #[arg(long)]
        users: Option<usize>,
    },
    /// Report class transitions and per-user language statistics.
    Classify {
        #[command(flatten)]
        store: StoreArg,
    },
    /// Write edge lists and degree distributions.
    Mine {
        #[command(flatten)]
        store: StoreArg,
        /// Comma-separated graph kinds; all when absent.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        /// Follow snapshot time; latest observation when absent.
        #[arg(long)]
        at: Option<Timestamp>,
    },
    /// Compute feature vectors.
    Vectorize {
        #[command(flatten)]
        store: StoreArg,
        /// Comma-separated user ids, or `all`.
        #[arg(long, default_value = "all")]
        users: String,
        #[arg(long)]
        as_of: Option<Timestamp>,
        /// Directory with lexicon files; built-in lexicons when absent.
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Thread lengths, coverage against ground truth, requests per tweet.
    Report {
        #[command(flatten)]
        store: StoreArg,
    },
    /// Export one collection as JSON Lines.
    Export {
        #[command(flatten)]
        store: StoreArg,
        collection: String,
        #[arg(long)]
        ids_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub const REQUESTS_FILE: &str = "requests.jsonl";
pub const WINDOWS_FILE: &str = "windows.jsonl";
pub const TRUTH_FILE: &str = "ground_truth.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SimnetGenerate { config, seed, users, out } => cmd_simnet_generate(config.as_deref(), seed, users, &out),
        Command::Crawl { config, seed, horizon_days, store, users } => {
            let mut m = match &config {
                Some(p) => RunManifest::load(p)?,
                None => RunManifest {
                    world_config: None,
                    scheduler_config: None,
                    classifier_config: None,
                    store: PathBuf::from("store"),
                    horizon_days: 30.0,
                    seed: 0,
                },
            };
            if let Some(s) = seed {
                m.seed = s;
            }
            if let Some(h) = horizon_days {
                m.horizon_days = h;
            }
            if let Some(s) = store {
                m.store = s;
            }
            cmd_crawl(&m, users).map(|_| ())
        }
        Command::Classify { store } => cmd_classify(&store.dir),
        Command::Mine { store, kinds, at } => {
            let kinds = parse_kinds(&kinds)?;
            cmd_mine(&store.dir, &kinds, at)
        }
        Command::Vectorize { store, users, as_of, lexicons } => {
            cmd_vectorize(&store.dir, &users, as_of, lexicons.as_deref()).map(|_| ())
        }
        Command::Report { store } => cmd_report(&store.dir),
        Command::Export { store, collection, ids_only, out } => {
            cmd_export(&store.dir, &collection, ids_only, out.as_deref()).map(|_| ())
        }
    }
}

pub fn parse_kinds(names: &[String]) -> Result<Vec<GraphKind>, CliError> {
    if names.is_empty() {
        return Ok(GraphKind::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            GraphKind::ALL
                .into_iter()
                .find(|k| k.name() == n.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown graph kind `{n}`")))
        })
        .collect()
}

pub fn cmd_simnet_generate(config: Option<&Path>, seed: Option<u64>, users: Option<usize>, out: &Path) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(p) => WorldConfig::load(p)?,
        None => WorldConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = users {
        cfg.n_users = n;
    }
    let world = World::generate(cfg)?;
    let mut w = create(out)?;
    world.write_jsonl(&mut w).map_err(io_err(out))?;
    finish(w, out)?;
    log::info!("wrote {} users to {}", world.user_count(), out.display());
    Ok(())
}

/// Loads the store saved under `dir`; an absent directory is an empty store.
pub fn load_store(dir: &Path) -> Result<Store, CliError> {
    let store = Store::new();
    if dir.exists() {
        store.import_dir(dir)?;
    }
    Ok(store)
}

/// Generates the manifest's world, crawls it for the horizon and saves the
/// store, the request log, the per-window reports and the ground truth.
pub fn cmd_crawl(m: &RunManifest, users: Option<usize>) -> Result<Crawler, CliError> {
    m.validate()?;
    let mut wcfg = m.world_config()?;
    if let Some(n) = users {
        wcfg.n_users = n;
    }
    let mut world = World::generate(wcfg)?;
    let store = load_store(&m.store)?;
    let mut crawler = Crawler::new(store, m.scheduler_config()?, m.classifier_config()?, BudgetConfig::default());
    let reports = run_world(&mut world, &mut crawler, m.horizon_secs());

    crawler.store().export_dir(&m.store)?;
    let path = m.store.join(REQUESTS_FILE);
    let mut w = create(&path)?;
    write_run_log(crawler.run_log(), &mut w).map_err(io_err(&path))?;
    finish(w, &path)?;

    let path = m.store.join(WINDOWS_FILE);
    let mut w = create(&path)?;
    for r in &reports {
        serde_json::to_writer(&mut w, r).map_err(|source| CliError::Json { path: path.clone(), source })?;
        writeln!(w).map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let path = m.store.join(TRUTH_FILE);
    let mut w = create(&path)?;
    let gt = world.ground_truth();
    writeln!(w, "user,community,status,tweets").map_err(io_err(&path))?;
    for u in gt.users() {
        let community = match &u.community {
            TrueCommunity::Language(l) => l.clone(),
            TrueCommunity::Mixed => "mixed".to_string(),
        };
        writeln!(w, "{},{},{:?},{}", u.id, community, u.status, gt.tweets_of(u.id).len()).map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let path = m.store.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(m).map_err(|source| CliError::Json { path: path.clone(), source })?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    log::info!("crawl done: {} requests, {} tweets stored", crawler.run_log().len(), crawler.store().tweet_count());
    Ok(crawler)
}

pub fn reports_dir(store: &Path) -> PathBuf {
    store.join("reports")
}

pub fn cmd_classify(dir: &Path) -> Result<(), CliError> {
    let store = load_store(dir)?;
    let out = reports_dir(dir);
    let ccfg = ClassifierConfig::default();

    let path = out.join("class_transitions.csv");
    let mut w = create(&path)?;
    writeln!(w, "user,from,to,at").map_err(io_err(&path))?;
    for t in store.class_history() {
        writeln!(w, "{},{},{},{}", t.user, t.from.as_str(), t.to.as_str(), t.at).map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let path = out.join("class_counts.csv");
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for c in store.classes().values() {
        *counts.entry(c.as_str()).or_default() += 1;
    }
    let mut w = create(&path)?;
    writeln!(w, "class,users").map_err(io_err(&path))?;
    for (c, n) in &counts {
        writeln!(w, "{c},{n}").map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let path = out.join("language_stats.csv");
    let mut w = create(&path)?;
    writeln!(w, "user,class,seen_total,seen_target,pct_target").map_err(io_err(&path))?;
    for (u, c) in store.classes() {
        let s = LangStats::from_tweets(u, &store.tweets_by(u), &ccfg.target_lang);
        writeln!(w, "{},{},{},{},{:.4}", u, c.as_str(), s.seen_total, s.seen_target, s.pct_target()).map_err(io_err(&path))?;
    }
    finish(w, &path)?;
    Ok(())
}

/// Latest timestamp recorded anywhere in the store.
pub fn store_now(store: &Store) -> Timestamp {
    let mut t = 0;
    store.for_each_tweet(|tw| t = t.max(tw.created_at));
    t = store.follow_edges().iter().map(|e| e.observed_at).fold(t, i64::max);
    t = store.follow_scans().iter().map(|s| s.observed_at).fold(t, i64::max);
    t = store.favorites().iter().map(|f| f.observed_at).fold(t, i64::max);
    t = store.class_history().iter().map(|c| c.at).fold(t, i64::max);
    t = store.trends().iter().map(|x| x.observed_at).fold(t, i64::max);
    store.known_users().into_iter().filter_map(|u| store.latest_snapshot(u)).map(|s| s.observed_at).fold(t, i64::max)
}

fn write_graph(dir: &Path, g: &Graph) -> Result<(), CliError> {
    let name = g.kind.name();
    let path = dir.join(format!("{name}.edges"));
    let mut w = create(&path)?;
    g.write_edges(&mut w).map_err(io_err(&path))?;
    finish(w, &path)?;
    let d = degree_distributions(g);
    let mut hists = vec![("degree", &d.degree)];
    if g.kind.is_directed() {
        hists.push(("in_degree", &d.in_degree));
        hists.push(("out_degree", &d.out_degree));
    }
    for (label, h) in hists {
        let path = dir.join(format!("{name}_{label}.csv"));
        let mut w = create(&path)?;
        write_histogram(h, &mut w).map_err(io_err(&path))?;
        finish(w, &path)?;
    }
    Ok(())
}

pub fn cmd_mine(dir: &Path, kinds: &[GraphKind], at: Option<Timestamp>) -> Result<(), CliError> {
    let store = load_store(dir)?;
    let out = dir.join("graphs");
    let tweets = store.all_tweets();
    let inter = extract_interactions(&tweets);
    for &k in kinds {
        let g = match k {
            GraphKind::Retweet => inter.retweet.clone(),
            GraphKind::Mention => inter.mention.clone(),
            GraphKind::Reply => inter.reply.clone(),
            GraphKind::Quote => inter.quote.clone(),
            GraphKind::Favorite => favorite_graph(&store.favorites()),
            GraphKind::List => {
                let sim = list_similarity(&store.memberships(), DEFAULT_LIST_CAP);
                for (list, members) in &sim.skipped {
                    log::warn!("list {list} skipped: {members} members");
                }
                sim.graph
            }
            GraphKind::Follow => {
                let t = at.unwrap_or_else(|| store_now(&store));
                follow_snapshot(&store.follow_edges(), &store.follow_scans(), t)
            }
        };
        write_graph(&out, &g)?;
    }
    Ok(())
}

fn parse_users(spec: &str, store: &Store) -> Result<Vec<UserId>, CliError> {
    if spec.trim() == "all" {
        let mut all: BTreeSet<UserId> = store.known_users().into_iter().collect();
        all.extend(store.classes().into_keys());
        return Ok(all.into_iter().collect());
    }
    spec.split(',')
        .map(|s| {
            let n: u64 = s.trim().parse().map_err(|_| CliError::Usage(format!("bad user id `{s}`")))?;
            Ok(UserId::new(n)?)
        })
        .collect()
}

pub fn cmd_vectorize(dir: &Path, users: &str, as_of: Option<Timestamp>, lexicons: Option<&Path>) -> Result<usize, CliError> {
    let store = load_store(dir)?;
    let lex = match lexicons {
        Some(p) => Lexicons::load_dir(p)?,
        None => Lexicons::builtin(),
    };
    let users = parse_users(users, &store)?;
    let as_of = as_of.unwrap_or_else(|| store_now(&store));
    let mut v = Vectorizer::new(&store, lex, ClassifierConfig::default().target_lang);
    let vectors = v.assemble_many(&users, as_of)?;
    let path = dir.join("vectors.jsonl");
    let mut w = create(&path)?;
    write_jsonl(&vectors, &mut w).map_err(io_err(&path))?;
    finish(w, &path)?;
    Ok(vectors.len())
}

/// Requests-per-tweet figures of a crawl.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSummary {
    pub requests: u64,
    pub timeline_requests: u64,
    pub tweets_stored: u64,
    pub timeline_requests_per_tweet: Option<f64>,
    pub requests_per_tweet: Option<f64>,
}

fn read_requests(path: &Path) -> Result<Vec<RequestRecord>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?);
    }
    Ok(out)
}

fn read_truth(path: &Path) -> Result<BTreeMap<UserId, u64>, CliError> {
    let mut out = BTreeMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Usage(format!("{}: malformed line `{line}`", path.display()));
        let (Some(u), Some(n)) = (cols.first(), cols.last()) else { return Err(bad()) };
        let u: u64 = u.parse().map_err(|_| bad())?;
        out.insert(UserId::new(u)?, n.parse().map_err(|_| bad())?);
    }
    Ok(out)
}

pub fn cmd_report(dir: &Path) -> Result<(), CliError> {
    let store = load_store(dir)?;
    let out = reports_dir(dir);
    let classes = store.classes();

    let tweets = store.all_tweets();
    let roots = target_roots(&tweets, |u| classes.get(&u) == Some(&UserClass::Target));
    let threads = thread_lengths(&tweets, &roots);
    let path = out.join("thread_lengths.csv");
    let mut w = create(&path)?;
    writeln!(w, "length,threads").map_err(io_err(&path))?;
    for (len, n) in &threads.histogram {
        writeln!(w, "{len},{n}").map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let truth = read_truth(&dir.join(TRUTH_FILE))?;
    let path = out.join("coverage.csv");
    let mut w = create(&path)?;
    writeln!(w, "user,class,true_tweets,stored_tweets,coverage").map_err(io_err(&path))?;
    for (&u, &n) in &truth {
        let c = classes.get(&u).copied().unwrap_or_default();
        if !c.is_crawled() {
            continue;
        }
        let stored = store.tweet_ids_by(u).len() as u64;
        let cov = if n == 0 { String::new() } else { format!("{:.4}", stored.min(n) as f64 / n as f64) };
        writeln!(w, "{u},{},{n},{stored},{cov}", c.as_str()).map_err(io_err(&path))?;
    }
    finish(w, &path)?;

    let log = read_requests(&dir.join(REQUESTS_FILE))?;
    let timeline = log.iter().filter(|r| r.endpoint == Endpoint::UserTimeline && r.outcome == "ok").count() as u64;
    let stored = store.tweet_count() as u64;
    let per = |n: u64| (stored > 0).then(|| n as f64 / stored as f64);
    let summary = RequestSummary {
        requests: log.len() as u64,
        timeline_requests: timeline,
        tweets_stored: stored,
        timeline_requests_per_tweet: per(timeline),
        requests_per_tweet: per(log.len() as u64),
    };
    let path = out.join("requests_per_tweet.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|source| CliError::Json { path: path.clone(), source })?;
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(())
}

pub fn cmd_export(dir: &Path, collection: &str, ids_only: bool, out: Option<&Path>) -> Result<usize, CliError> {
    let store = load_store(dir)?;
    let c = Collection::from_name(collection)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("exports").join(c.file_name(ids_only)));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let n = if ids_only { store.export_ids(c, &path)? } else { store.export(c, &path)? };
    Ok(n)
}
