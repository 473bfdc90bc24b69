//! Community membership rules: per-user language ratios, the target/stop
//! thresholds, neighbor-ratio promotion, retweet seeding and the daily
//! demotion sweep.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Tweet, UserClass, UserId, UserSnapshot};

const DEFAULT_NAMES: &str = include_str!("../data/common_names.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangStats {
    pub user: UserId,
    pub seen_total: u64,
    pub seen_target: u64,
}

impl LangStats {
    pub fn new(user: UserId) -> LangStats {
        LangStats { user, seen_total: 0, seen_target: 0 }
    }

    pub fn with_counts(user: UserId, seen_total: u64, seen_target: u64) -> LangStats {
        assert!(seen_target <= seen_total, "more target tweets than tweets");
        LangStats { user, seen_total, seen_target }
    }

    pub fn pct_target(&self) -> f64 {
        if self.seen_total == 0 {
            0.0
        } else {
            self.seen_target as f64 / self.seen_total as f64
        }
    }

    pub fn record(&mut self, lang: &str, target_lang: &str) {
        self.seen_total += 1;
        if lang == target_lang {
            self.seen_target += 1;
        }
    }

    pub fn from_tweets<'a>(user: UserId, tweets: impl IntoIterator<Item = &'a Tweet>, target_lang: &str) -> LangStats {
        let mut s = LangStats::new(user);
        for t in tweets {
            s.record(&t.lang, target_lang);
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("user {0} has no friends or followers on record")]
    EmptyNeighborhood(UserId),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid classifier config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub min_tweets: u64,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub target_lang: String,
    /// More than `min_tweets` seen, at least `pct` in the target language.
    pub rule1: Threshold,
    /// As `rule1`, but also requires a name or bio match.
    pub rule2: Threshold,
    /// More than `min_tweets` seen, strictly under `pct` in the target language.
    pub stop_rule: Threshold,
    pub daily_stop: Threshold,
    pub neighbor_min_fraction: f64,
    pub retweet_seed: usize,
    /// Inclusive code point ranges of the target alphabet.
    pub script_ranges: Vec<(u32, u32)>,
    /// One name per line; the built-in list is used when absent.
    pub common_names_file: Option<PathBuf>,
    #[serde(skip)]
    pub common_names: BTreeSet<String>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            target_lang: "el".into(),
            rule1: Threshold { min_tweets: 100, pct: 0.20 },
            rule2: Threshold { min_tweets: 500, pct: 0.10 },
            stop_rule: Threshold { min_tweets: 500, pct: 0.01 },
            daily_stop: Threshold { min_tweets: 500, pct: 0.02 },
            neighbor_min_fraction: 0.30,
            retweet_seed: 10,
            script_ranges: vec![(0x0370, 0x03FF), (0x1F00, 0x1FFF)],
            common_names_file: None,
            common_names: parse_names(DEFAULT_NAMES),
        }
    }
}

fn parse_names(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let rules = [self.rule1, self.rule2, self.stop_rule, self.daily_stop];
        let pcts = rules.iter().map(|r| r.pct).chain([self.neighbor_min_fraction]);
        for p in pcts {
            if !(0.0..=1.0).contains(&p) {
                return Err(ClassifyError::Invalid(format!("threshold {p} outside [0, 1]")));
            }
        }
        if rules.iter().any(|r| r.min_tweets == 0) || self.retweet_seed == 0 {
            return Err(ClassifyError::Invalid("tweet minima must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses JSON; a `common_names_file` path is resolved and loaded.
    pub fn from_json(text: &str) -> Result<ClassifierConfig, ClassifyError> {
        let mut cfg: ClassifierConfig =
            serde_json::from_str(text).map_err(|e| ClassifyError::Invalid(e.to_string()))?;
        cfg.common_names = match &cfg.common_names_file {
            Some(path) => load_names(path)?,
            None => parse_names(DEFAULT_NAMES),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ClassifierConfig, ClassifyError> {
        let text = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io { path: path.to_path_buf(), source })?;
        ClassifierConfig::from_json(&text)
    }

    fn in_script(&self, c: char) -> bool {
        let c = c as u32;
        self.script_ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&c))
    }
}

pub fn load_names(path: &Path) -> Result<BTreeSet<String>, ClassifyError> {
    let text = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_names(&text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Target,
    Stop,
    Inconclusive,
}

pub fn name_or_bio_matches(snapshot: &UserSnapshot, cfg: &ClassifierConfig) -> bool {
    snapshot.name.chars().any(|c| cfg.in_script(c))
        || snapshot.bio.chars().any(|c| cfg.in_script(c))
        || cfg.common_names.contains(&snapshot.name.trim().to_lowercase())
}

pub fn classify_user(stats: &LangStats, snapshot: &UserSnapshot, cfg: &ClassifierConfig) -> Verdict {
    let pct = stats.pct_target();
    let n = stats.seen_total;
    let rule1 = n > cfg.rule1.min_tweets && pct >= cfg.rule1.pct;
    let rule2 = n > cfg.rule2.min_tweets && pct >= cfg.rule2.pct && name_or_bio_matches(snapshot, cfg);
    if rule1 || rule2 {
        Verdict::Target
    } else if n > cfg.stop_rule.min_tweets && pct < cfg.stop_rule.pct {
        Verdict::Stop
    } else {
        Verdict::Inconclusive
    }
}

/// Promotes `user` when strictly more than the configured fraction of its
/// distinct friends and followers are already Target.
pub fn neighbor_resolve(
    user: UserId,
    neighbors: &BTreeSet<UserId>,
    classes: &BTreeMap<UserId, UserClass>,
    cfg: &ClassifierConfig,
) -> Result<Verdict, ClassifyError> {
    if neighbors.is_empty() {
        return Err(ClassifyError::EmptyNeighborhood(user));
    }
    let targets = neighbors.iter().filter(|v| classes.get(v) == Some(&UserClass::Target)).count();
    Ok(if targets as f64 / neighbors.len() as f64 > cfg.neighbor_min_fraction {
        Verdict::Target
    } else {
        Verdict::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedDecision {
    Track,
    Ignore,
}

/// `evidence` is the number of distinct target-language tweets by the
/// candidate that tracked users retweeted.
pub fn retweet_seed(evidence: usize, cfg: &ClassifierConfig) -> SeedDecision {
    if evidence >= cfg.retweet_seed {
        SeedDecision::Track
    } else {
        SeedDecision::Ignore
    }
}

/// Users to move to Stopped: Tracked (never Target) users over the sweep
/// threshold.
pub fn daily_pass<'a>(
    tracked: impl IntoIterator<Item = (&'a LangStats, UserClass)>,
    cfg: &ClassifierConfig,
) -> Vec<UserId> {
    tracked
        .into_iter()
        .filter(|(s, class)| {
            *class == UserClass::Tracked && s.seen_total > cfg.daily_stop.min_tweets && s.pct_target() < cfg.daily_stop.pct
        })
        .map(|(s, _)| s.user)
        .collect()
}
