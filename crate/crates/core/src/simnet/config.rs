use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Timestamp, DAY};

use super::SimError;

/// 2018-01-01T00:00:00Z, aligned to a rate-limit window.
pub const DEFAULT_START: Timestamp = 1_514_764_800;

/// Tweet activity: rates in tweets/day drawn from a truncated power law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActivityConfig {
    pub exponent: f64,
    pub min_rate: f64,
    pub max_rate: f64,
    /// Likes per day as a multiple of the tweet rate.
    pub likes_per_tweet: f64,
    /// Probability a like goes to an arbitrary older tweet instead of a recent one.
    pub old_like_prob: f64,
}

impl Default for ActivityConfig {
    fn default() -> Self {
        ActivityConfig { exponent: 1.8, min_rate: 0.5, max_rate: 120.0, likes_per_tweet: 0.5, old_like_prob: 0.15 }
    }
}

/// Per-tweet behavior probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorMix {
    pub retweet: f64,
    pub reply: f64,
    pub quote: f64,
    /// Probability an original tweet mentions a friend.
    pub mention: f64,
    pub hashtag: f64,
    pub url: f64,
    /// Probability a reply continues the author's own latest tweet.
    pub self_thread: f64,
}

impl Default for BehaviorMix {
    fn default() -> Self {
        BehaviorMix { retweet: 0.25, reply: 0.2, quote: 0.05, mention: 0.2, hashtag: 0.3, url: 0.15, self_thread: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FollowModel {
    pub mean_friends: f64,
    /// Zipf exponent of within-pool popularity used for attachment.
    pub attachment_exponent: f64,
    pub cross_community: f64,
    pub daily_follow: f64,
    pub daily_unfollow: f64,
}

impl Default for FollowModel {
    fn default() -> Self {
        FollowModel { mean_friends: 20.0, attachment_exponent: 0.8, cross_community: 0.05, daily_follow: 0.02, daily_unfollow: 0.005 }
    }
}

/// Daily per-user probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChurnModel {
    pub suspend: f64,
    pub delete: f64,
    pub protect: f64,
    pub reactivate: f64,
    pub profile_change: f64,
}

impl Default for ChurnModel {
    fn default() -> Self {
        ChurnModel { suspend: 0.0002, delete: 0.0002, protect: 0.0002, reactivate: 0.0, profile_change: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ListModel {
    pub owner_prob: f64,
    pub max_lists: usize,
    pub min_members: usize,
    pub max_members: usize,
    pub max_subscribers: usize,
}

impl Default for ListModel {
    fn default() -> Self {
        ListModel { owner_prob: 0.05, max_lists: 3, min_members: 3, max_members: 40, max_subscribers: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub seed: u64,
    pub n_users: usize,
    pub start: Timestamp,
    pub target_lang: String,
    /// Language shares of the non-mixed users; must sum to 1.
    pub community_fractions: BTreeMap<String, f64>,
    /// Share of all users that tweet in the target language only occasionally.
    pub mixed_fraction: f64,
    /// Range of the target-language share of mixed users.
    pub mixed_target_share: (f64, f64),
    /// Probability a non-target tweet carries a target-language word anyway.
    pub keyword_noise: f64,
    pub activity: ActivityConfig,
    pub behavior: BehaviorMix,
    pub follow: FollowModel,
    pub churn: ChurnModel,
    pub lists: ListModel,
    /// Days of tweet history materialized before `start`; older history only
    /// contributes to the reported tweet count.
    pub prehistory_days: i64,
    pub account_age_days: (i64, i64),
    pub places: Vec<String>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            seed: 42,
            n_users: 1000,
            start: DEFAULT_START,
            target_lang: "el".into(),
            community_fractions: [("el".to_string(), 0.6), ("en".to_string(), 0.4)].into_iter().collect(),
            mixed_fraction: 0.1,
            mixed_target_share: (0.01, 0.19),
            keyword_noise: 0.02,
            activity: ActivityConfig::default(),
            behavior: BehaviorMix::default(),
            follow: FollowModel::default(),
            churn: ChurnModel::default(),
            lists: ListModel::default(),
            prehistory_days: 14,
            account_age_days: (30, 1500),
            places: vec!["GR".into()],
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let probs = [
            ("mixed_fraction", self.mixed_fraction),
            ("keyword_noise", self.keyword_noise),
            ("mixed_target_share.0", self.mixed_target_share.0),
            ("mixed_target_share.1", self.mixed_target_share.1),
            ("activity.old_like_prob", self.activity.old_like_prob),
            ("behavior.retweet", self.behavior.retweet),
            ("behavior.reply", self.behavior.reply),
            ("behavior.quote", self.behavior.quote),
            ("behavior.mention", self.behavior.mention),
            ("behavior.hashtag", self.behavior.hashtag),
            ("behavior.url", self.behavior.url),
            ("behavior.self_thread", self.behavior.self_thread),
            ("follow.cross_community", self.follow.cross_community),
            ("follow.daily_follow", self.follow.daily_follow),
            ("follow.daily_unfollow", self.follow.daily_unfollow),
            ("churn.suspend", self.churn.suspend),
            ("churn.delete", self.churn.delete),
            ("churn.protect", self.churn.protect),
            ("churn.reactivate", self.churn.reactivate),
            ("churn.profile_change", self.churn.profile_change),
            ("lists.owner_prob", self.lists.owner_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.behavior.retweet + self.behavior.reply + self.behavior.quote > 1.0 {
            return bad("retweet + reply + quote probabilities exceed 1".into());
        }
        if self.mixed_target_share.0 > self.mixed_target_share.1 {
            return bad("mixed_target_share range is inverted".into());
        }
        if self.community_fractions.values().any(|&f| !(0.0..=1.0).contains(&f)) {
            return bad("community fractions must lie in [0, 1]".into());
        }
        let sum: f64 = self.community_fractions.values().sum();
        if self.n_users > 0 && (sum - 1.0).abs() > 1e-9 {
            return bad(format!("community fractions sum to {sum}, expected 1"));
        }
        if !(self.activity.min_rate >= 0.0 && self.activity.max_rate >= self.activity.min_rate) {
            return bad("activity rate range is invalid".into());
        }
        if self.activity.exponent <= 0.0 || self.activity.likes_per_tweet < 0.0 {
            return bad("activity exponent must be positive and like factor non-negative".into());
        }
        if self.follow.mean_friends < 0.0 || self.follow.attachment_exponent < 0.0 {
            return bad("follow parameters must be non-negative".into());
        }
        if self.prehistory_days < 0 || self.account_age_days.0 < 0 || self.account_age_days.0 > self.account_age_days.1 {
            return bad("history ranges are invalid".into());
        }
        if self.lists.min_members > self.lists.max_members {
            return bad("list member range is inverted".into());
        }
        if self.places.is_empty() {
            return bad("at least one trend place is required".into());
        }
        Ok(())
    }

    /// Non-target language mixed users fall back to.
    pub fn secondary_lang(&self) -> String {
        self.community_fractions
            .keys()
            .find(|l| **l != self.target_lang)
            .cloned()
            .unwrap_or_else(|| "en".into())
    }

    pub fn load(path: &Path) -> Result<WorldConfig, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let cfg: WorldConfig = serde_json::from_str(&text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn prehistory_start(&self) -> Timestamp {
        self.start - self.prehistory_days * DAY
    }
}
