use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{Timestamp, Tweet, DAY};

use super::stats::{gaps, pcnt, top_k, IntervalHistogram, Summary};

pub const TOP_K: usize = 10;
const LAST_MONTH: i64 = 30 * DAY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayStats {
    pub summary: Summary,
    pub min_day: String,
    pub max_day: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityFeatures {
    pub seen_total: u64,
    pub total_inferred: u64,
    pub seen_greek_total: u64,
    pub all_intervals: IntervalHistogram,
    pub top_intervals: IntervalHistogram,
    pub rt_intervals: IntervalHistogram,
    pub reply_intervals: IntervalHistogram,
    pub time_between_any: Option<Summary>,
    pub time_between_top: Option<Summary>,
    pub time_between_rt: Option<Summary>,
    pub time_between_replies: Option<Summary>,
    pub max_daily_interval: Option<Summary>,
    /// Largest gap between consecutive same-day tweets, per UTC day.
    pub daily_max_intervals: BTreeMap<String, i64>,
    pub last_tweeted_at: Option<Timestamp>,
    pub life_time: Option<i64>,
    pub tweets_per_hour_of_day: Vec<u64>,
    /// Monday first.
    pub tweets_per_weekday: Vec<u64>,
    pub tweets_per_active_day: Option<DayStats>,
    pub tweets_per_day: Option<DayStats>,
    pub last_month: Vec<u64>,
    pub seen_top_tweets: u64,
    pub top_tweets_pcnt: Option<f64>,
    /// Own tweets (not retweets) with no hashtag, mention or URL.
    pub plain_tweets: u64,
    pub most_used_sources: Vec<(String, u64)>,
}

pub(crate) fn utc(t: Timestamp) -> DateTime<Utc> {
    DateTime::from_timestamp(t, 0).unwrap_or_default()
}

pub(crate) fn day_label(day: i64) -> String {
    utc(day * DAY).format("%Y-%m-%d").to_string()
}

fn is_top(t: &Tweet) -> bool {
    !t.is_retweet() && !t.is_reply()
}

fn day_stats(counts: &BTreeMap<i64, u64>) -> Option<DayStats> {
    let summary = Summary::of_counts(counts.values().copied())?;
    let pick = |target: f64| {
        counts.iter().find(|(_, &n)| n as f64 == target).map(|(&d, _)| day_label(d)).unwrap_or_default()
    };
    Some(DayStats { min_day: pick(summary.min), max_day: pick(summary.max), summary })
}

fn times(tweets: &[Tweet], keep: impl Fn(&Tweet) -> bool) -> Vec<i64> {
    tweets.iter().filter(|t| keep(t)).map(|t| t.created_at).collect()
}

fn summary_of(g: &[i64]) -> Option<Summary> {
    Summary::of(&g.iter().map(|&x| x as f64).collect::<Vec<_>>())
}

/// Activity features over the tweets of one user, sorted by creation time.
/// `gone` counts referenced tweets of the user that could not be fetched;
/// `created_at` is the account creation time when a snapshot exists; `now`
/// ends the per-day series.
pub fn activity_features(
    tweets: &[Tweet],
    gone: u64,
    created_at: Option<Timestamp>,
    now: Timestamp,
    target_lang: &str,
) -> ActivityFeatures {
    debug_assert!(tweets.windows(2).all(|w| w[0].created_at <= w[1].created_at));
    let seen_total = tweets.len() as u64;
    let any = gaps(&times(tweets, |_| true));
    let top = gaps(&times(tweets, is_top));
    let rt = gaps(&times(tweets, Tweet::is_retweet));
    let rep = gaps(&times(tweets, Tweet::is_reply));

    let mut daily_max: BTreeMap<i64, i64> = BTreeMap::new();
    for w in tweets.windows(2) {
        let (a, b) = (w[0].created_at, w[1].created_at);
        let day = a.div_euclid(DAY);
        if b.div_euclid(DAY) == day {
            let e = daily_max.entry(day).or_insert(0);
            *e = (*e).max(b - a);
        }
    }

    let mut per_hour = vec![0u64; 24];
    let mut per_weekday = vec![0u64; 7];
    let mut per_day: BTreeMap<i64, u64> = BTreeMap::new();
    let mut sources: BTreeMap<String, u64> = BTreeMap::new();
    for t in tweets {
        let dt = utc(t.created_at);
        per_hour[dt.hour() as usize] += 1;
        per_weekday[dt.weekday().num_days_from_monday() as usize] += 1;
        *per_day.entry(t.created_at.div_euclid(DAY)).or_default() += 1;
        if !t.source_client.is_empty() {
            *sources.entry(t.source_client.clone()).or_default() += 1;
        }
    }

    let last = tweets.last().map(|t| t.created_at);
    let mut last_month = vec![0u64; 24];
    if let Some(l) = last {
        for t in tweets.iter().filter(|t| t.created_at > l - LAST_MONTH) {
            last_month[utc(t.created_at).hour() as usize] += 1;
        }
    }

    let tweets_per_day = created_at.or(tweets.first().map(|t| t.created_at)).and_then(|start| {
        let (first, end) = (start.div_euclid(DAY), now.max(start).div_euclid(DAY));
        let all: BTreeMap<i64, u64> = (first..=end).map(|d| (d, per_day.get(&d).copied().unwrap_or(0))).collect();
        day_stats(&all)
    });

    let seen_top_tweets = tweets.iter().filter(|t| is_top(t)).count() as u64;
    ActivityFeatures {
        seen_total,
        total_inferred: seen_total + gone,
        seen_greek_total: tweets.iter().filter(|t| t.lang == target_lang).count() as u64,
        all_intervals: IntervalHistogram::from_intervals(&any),
        top_intervals: IntervalHistogram::from_intervals(&top),
        rt_intervals: IntervalHistogram::from_intervals(&rt),
        reply_intervals: IntervalHistogram::from_intervals(&rep),
        time_between_any: summary_of(&any),
        time_between_top: summary_of(&top),
        time_between_rt: summary_of(&rt),
        time_between_replies: summary_of(&rep),
        max_daily_interval: summary_of(&daily_max.values().copied().collect::<Vec<_>>()),
        daily_max_intervals: daily_max.iter().map(|(&d, &v)| (day_label(d), v)).collect(),
        last_tweeted_at: last,
        life_time: last.zip(created_at).map(|(l, c)| (l - c).max(0)),
        tweets_per_hour_of_day: per_hour,
        tweets_per_weekday: per_weekday,
        tweets_per_active_day: day_stats(&per_day),
        tweets_per_day,
        last_month,
        seen_top_tweets,
        top_tweets_pcnt: pcnt(seen_top_tweets, seen_total),
        plain_tweets: tweets
            .iter()
            .filter(|t| !t.is_retweet() && t.hashtags.is_empty() && t.mentions.is_empty() && t.urls.is_empty())
            .count() as u64,
        most_used_sources: top_k(&sources, TOP_K),
    }
}
