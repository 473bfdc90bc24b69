use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Minimum, maximum, mean, median and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 };
        Some(Summary { min: v[0], max: v[v.len() - 1], mean, median, std: var.sqrt() })
    }

    pub fn of_counts(values: impl IntoIterator<Item = u64>) -> Option<Summary> {
        Summary::of(&values.into_iter().map(|x| x as f64).collect::<Vec<_>>())
    }
}

/// Number of buckets of an [`IntervalHistogram`]: lower bounds 1 s, 2 s, 4 s,
/// up to 2^21 s (about 24 days), the last bucket reaching past 30 days.
pub const INTERVAL_BUCKETS: usize = 22;

/// Time-between-events histogram on doubling buckets. Bucket `k` holds
/// intervals in `[2^k, 2^(k+1))` seconds; intervals under a second land in
/// bucket 0 and anything past the top bound in the last bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalHistogram {
    pub counts: Vec<u64>,
}

impl Default for IntervalHistogram {
    fn default() -> Self {
        IntervalHistogram { counts: vec![0; INTERVAL_BUCKETS] }
    }
}

impl IntervalHistogram {
    pub fn bucket_of(secs: i64) -> usize {
        if secs < 2 {
            return 0;
        }
        (63 - secs.leading_zeros() as usize).min(INTERVAL_BUCKETS - 1)
    }

    pub fn lower_bound(k: usize) -> i64 {
        1 << k
    }

    pub fn add(&mut self, secs: i64) {
        self.counts[IntervalHistogram::bucket_of(secs)] += 1;
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn from_intervals(intervals: &[i64]) -> IntervalHistogram {
        let mut h = IntervalHistogram::default();
        for &d in intervals {
            h.add(d);
        }
        h
    }

    pub fn is_empty(&self) -> bool {
        self.mass() == 0
    }
}

/// Gaps between consecutive timestamps (input sorted).
pub fn gaps(times: &[i64]) -> Vec<i64> {
    times.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Top `k` keys by count, ties broken by key order.
pub fn top_k<K: Ord + Clone>(counts: &BTreeMap<K, u64>, k: usize) -> Vec<(K, u64)> {
    let mut v: Vec<(K, u64)> = counts.iter().map(|(a, &n)| (a.clone(), n)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

/// `100 * num / den`, missing when `den` is zero.
pub fn pcnt(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn is_greek(c: char) -> bool {
    c.is_alphabetic() && matches!(c as u32, 0x370..=0x3FF | 0x1F00..=0x1FFF)
}

pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '«' | '»' | '·' | '\u{037E}' | '\u{0387}' | '\u{2010}'..='\u{205E}')
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharCounts {
    pub total: u64,
    pub upper: u64,
    pub lower: u64,
    pub digit: u64,
    pub alpha: u64,
    pub greek: u64,
    pub punct: u64,
}

impl CharCounts {
    pub fn of(s: &str) -> CharCounts {
        let mut c = CharCounts::default();
        c.add(s);
        c
    }

    pub fn add(&mut self, s: &str) {
        for ch in s.chars() {
            self.total += 1;
            self.upper += ch.is_uppercase() as u64;
            self.lower += ch.is_lowercase() as u64;
            self.digit += ch.is_numeric() as u64;
            self.alpha += ch.is_alphabetic() as u64;
            self.greek += is_greek(ch) as u64;
            self.punct += is_punct(ch) as u64;
        }
    }
}
