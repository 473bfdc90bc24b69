//! Relation graphs mined from stored tweets, likes, lists and follow scans,
//! their degree histograms, and reply-thread lengths.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FavoriteRecord, FollowDirection, FollowEdge, FollowScan, Membership, Timestamp, Tweet, TweetId, UserId};

/// Default largest list whose member pairs are enumerated.
pub const DEFAULT_LIST_CAP: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Retweet,
    Mention,
    Reply,
    Quote,
    Favorite,
    List,
    Follow,
}

impl GraphKind {
    pub const ALL: [GraphKind; 7] = [
        GraphKind::Retweet,
        GraphKind::Mention,
        GraphKind::Reply,
        GraphKind::Quote,
        GraphKind::Favorite,
        GraphKind::List,
        GraphKind::Follow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Retweet => "retweet",
            GraphKind::Mention => "mention",
            GraphKind::Reply => "reply",
            GraphKind::Quote => "quote",
            GraphKind::Favorite => "favorite",
            GraphKind::List => "list",
            GraphKind::Follow => "follow",
        }
    }

    pub fn is_directed(self) -> bool {
        self != GraphKind::List
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("list {list_id} has {members} members, over the cap of {cap}")]
    ListTooLarge { list_id: u64, members: usize, cap: usize },
    #[error("reply cycle through tweet {0}")]
    CycleDetected(TweetId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Weighted edge set. Directed graphs key edges as (src, dst); undirected
/// graphs store each edge once with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub kind: GraphKind,
    pub edges: BTreeMap<(UserId, UserId), u64>,
}

impl Graph {
    pub fn new(kind: GraphKind) -> Graph {
        Graph { kind, edges: BTreeMap::new() }
    }

    pub fn add(&mut self, src: UserId, dst: UserId, w: u64) {
        let key = if self.kind.is_directed() || src <= dst { (src, dst) } else { (dst, src) };
        *self.edges.entry(key).or_default() += w;
    }

    pub fn weight(&self, src: UserId, dst: UserId) -> u64 {
        let key = if self.kind.is_directed() || src <= dst { (src, dst) } else { (dst, src) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> BTreeSet<UserId> {
        self.edges.keys().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Folds another graph of the same kind into this one.
    pub fn merge(&mut self, other: &Graph) {
        for (&(a, b), &w) in &other.edges {
            *self.edges.entry((a, b)).or_default() += w;
        }
    }

    /// Writes `src dst weight` lines sorted by (src, dst).
    pub fn write_edges(&self, mut out: impl Write) -> std::io::Result<()> {
        for (&(a, b), w) in &self.edges {
            writeln!(out, "{a} {b} {w}")?;
        }
        Ok(())
    }
}

/// The four tweet-level interaction graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interactions {
    pub retweet: Graph,
    pub mention: Graph,
    pub reply: Graph,
    pub quote: Graph,
}

impl Interactions {
    pub fn graphs(&self) -> [&Graph; 4] {
        [&self.retweet, &self.mention, &self.reply, &self.quote]
    }
}

/// Edges point from the acting user to the acted-upon user. Mentions carried
/// by a retweet belong to the original text and are not credited to the
/// retweeter.
pub fn extract_interactions<'a>(tweets: impl IntoIterator<Item = &'a Tweet>) -> Interactions {
    let mut g = Interactions {
        retweet: Graph::new(GraphKind::Retweet),
        mention: Graph::new(GraphKind::Mention),
        reply: Graph::new(GraphKind::Reply),
        quote: Graph::new(GraphKind::Quote),
    };
    for t in tweets {
        if let Some((_, a)) = t.retweet_of {
            g.retweet.add(t.author, a, 1);
            continue;
        }
        if let Some((_, a)) = t.reply_to {
            g.reply.add(t.author, a, 1);
        }
        if let Some((_, a)) = t.quote_of {
            g.quote.add(t.author, a, 1);
        }
        for &m in &t.mentions {
            g.mention.add(t.author, m, 1);
        }
    }
    g
}

pub fn favorite_graph<'a>(favorites: impl IntoIterator<Item = &'a FavoriteRecord>) -> Graph {
    let mut g = Graph::new(GraphKind::Favorite);
    for f in favorites {
        g.add(f.user, f.tweet_author, 1);
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListSimilarity {
    pub graph: Graph,
    /// Lists over the member cap as (list id, member count), left out of the graph.
    pub skipped: Vec<(u64, usize)>,
}

/// Undirected co-membership graph; each list adds one to every member pair.
/// Lists above `cap` members are skipped with a warning.
pub fn list_similarity<'a>(memberships: impl IntoIterator<Item = &'a Membership>, cap: usize) -> ListSimilarity {
    let mut by_list: BTreeMap<u64, BTreeSet<UserId>> = BTreeMap::new();
    for m in memberships {
        by_list.entry(m.list_id).or_default().insert(m.member);
    }
    let mut out = ListSimilarity { graph: Graph::new(GraphKind::List), skipped: Vec::new() };
    for (list_id, members) in by_list {
        if members.len() > cap {
            log::warn!("{}", GraphError::ListTooLarge { list_id, members: members.len(), cap });
            out.skipped.push((list_id, members.len()));
            continue;
        }
        let members: Vec<UserId> = members.into_iter().collect();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                out.graph.add(a, b, 1);
            }
        }
    }
    out
}

/// The follow graph as of `t`. For each pair, the later of the source's
/// friends scan and the destination's followers scan (at or before `t`)
/// decides: the edge exists iff it was observed at or after that scan.
/// Pairs no scan covers exist iff observed at all by `t`.
pub fn follow_snapshot(edges: &[FollowEdge], scans: &[FollowScan], t: Timestamp) -> Graph {
    let mut latest: HashMap<(UserId, FollowDirection), Timestamp> = HashMap::new();
    for s in scans.iter().filter(|s| s.observed_at <= t) {
        let e = latest.entry((s.user, s.direction)).or_insert(s.observed_at);
        *e = (*e).max(s.observed_at);
    }
    let mut last_seen: BTreeMap<(UserId, UserId), Timestamp> = BTreeMap::new();
    for e in edges.iter().filter(|e| e.observed_at <= t) {
        let v = last_seen.entry((e.src, e.dst)).or_insert(e.observed_at);
        *v = (*v).max(e.observed_at);
    }
    let mut g = Graph::new(GraphKind::Follow);
    for ((src, dst), seen) in last_seen {
        let authority = [latest.get(&(src, FollowDirection::Friends)), latest.get(&(dst, FollowDirection::Followers))]
            .into_iter()
            .flatten()
            .max()
            .copied();
        if authority.is_none_or(|a| seen >= a) {
            g.add(src, dst, 1);
        }
    }
    g
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistograms {
    pub in_degree: BTreeMap<u64, u64>,
    pub out_degree: BTreeMap<u64, u64>,
    /// In plus out degree for directed graphs; plain degree otherwise.
    pub degree: BTreeMap<u64, u64>,
}

/// Exact degree histograms over the graph's nodes, counting distinct
/// neighbors (edge weights are ignored). For an undirected graph all three
/// histograms hold the plain degree.
pub fn degree_distributions(g: &Graph) -> DegreeHistograms {
    let mut indeg: BTreeMap<UserId, u64> = BTreeMap::new();
    let mut outdeg: BTreeMap<UserId, u64> = BTreeMap::new();
    for &(a, b) in g.edges.keys() {
        *outdeg.entry(a).or_default() += 1;
        indeg.entry(a).or_default();
        *indeg.entry(b).or_default() += 1;
        outdeg.entry(b).or_default();
    }
    let hist = |m: &BTreeMap<UserId, u64>| {
        let mut h: BTreeMap<u64, u64> = BTreeMap::new();
        for &d in m.values() {
            *h.entry(d).or_default() += 1;
        }
        h
    };
    let total: BTreeMap<UserId, u64> = indeg.iter().map(|(u, i)| (*u, i + outdeg[u])).collect();
    if g.kind.is_directed() {
        DegreeHistograms { in_degree: hist(&indeg), out_degree: hist(&outdeg), degree: hist(&total) }
    } else {
        let h = hist(&total);
        DegreeHistograms { in_degree: h.clone(), out_degree: h.clone(), degree: h }
    }
}

/// Writes a `degree,count` CSV with a header line.
pub fn write_histogram(h: &BTreeMap<u64, u64>, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "degree,count")?;
    for (d, c) in h {
        writeln!(out, "{d},{c}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThreadReport {
    /// Longest reply chain per root, counting the root; roots without
    /// replies are absent.
    pub lengths: BTreeMap<TweetId, u64>,
    pub histogram: BTreeMap<u64, u64>,
    /// Tweets at which a reply cycle was cut.
    pub cycles: Vec<TweetId>,
}

/// Non-reply tweets whose authors satisfy `is_target`.
pub fn target_roots<'a>(tweets: impl IntoIterator<Item = &'a Tweet>, is_target: impl Fn(UserId) -> bool) -> BTreeSet<TweetId> {
    tweets
        .into_iter()
        .filter(|t| t.reply_to.is_none() && t.retweet_of.is_none() && is_target(t.author))
        .map(|t| t.id)
        .collect()
}

/// Longest reply path below each root, by memoized depth over the reply
/// forest. Links to tweets outside the set end a chain.
pub fn thread_lengths(tweets: &[Tweet], roots: &BTreeSet<TweetId>) -> ThreadReport {
    let present: BTreeSet<TweetId> = tweets.iter().map(|t| t.id).collect();
    let mut children: HashMap<TweetId, Vec<TweetId>> = HashMap::new();
    for t in tweets {
        if let Some((parent, _)) = t.reply_to {
            if present.contains(&parent) {
                children.entry(parent).or_default().push(t.id);
            }
        }
    }
    for c in children.values_mut() {
        c.sort();
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done(u64),
    }
    let mut memo: HashMap<TweetId, Mark> = HashMap::new();
    let mut report = ThreadReport::default();

    for &root in roots {
        if !present.contains(&root) {
            continue;
        }
        // Iterative post-order DFS: (node, next child index).
        let mut stack: Vec<(TweetId, usize)> = Vec::new();
        if !matches!(memo.get(&root), Some(Mark::Done(_))) {
            memo.insert(root, Mark::Open);
            stack.push((root, 0));
        }
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            let kids = children.get(&node).map(Vec::as_slice).unwrap_or(&[]);
            if *idx < kids.len() {
                let child = kids[*idx];
                *idx += 1;
                match memo.get(&child) {
                    Some(Mark::Done(_)) => {}
                    Some(Mark::Open) => {
                        log::warn!("{}", GraphError::CycleDetected(child));
                        report.cycles.push(child);
                    }
                    None => {
                        memo.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                }
            } else {
                let depth = 1 + kids
                    .iter()
                    .filter_map(|k| match memo.get(k) {
                        Some(Mark::Done(d)) => Some(*d),
                        _ => None,
                    })
                    .max()
                    .unwrap_or(0);
                memo.insert(node, Mark::Done(depth));
                stack.pop();
            }
        }
        if let Some(Mark::Done(len)) = memo.get(&root) {
            if *len >= 2 {
                report.lengths.insert(root, *len);
            }
        }
    }
    for &len in report.lengths.values() {
        *report.histogram.entry(len).or_default() += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tw(id: u64, author: u64) -> Tweet {
        Tweet {
            id: TweetId(id),
            author: UserId(author),
            created_at: 0,
            text: String::new(),
            lang: "en".into(),
            retweet_of: None,
            reply_to: None,
            quote_of: None,
            mentions: vec![],
            hashtags: vec![],
            urls: vec![],
            source_client: String::new(),
            truncated: false,
        }
    }

    fn u(x: u64) -> UserId {
        UserId(x)
    }

    #[test]
    fn interaction_examples() {
        let g = extract_interactions(&[]);
        assert!(g.graphs().iter().all(|g| g.is_empty()));
        let mut a = tw(1, 1);
        a.retweet_of = Some((TweetId(10), u(2)));
        a.mentions = vec![u(5)];
        let mut b = tw(2, 1);
        b.retweet_of = Some((TweetId(11), u(2)));
        let mut c = tw(3, 1);
        c.mentions = vec![u(2), u(3)];
        let g = extract_interactions(&[a, b, c]);
        assert_eq!(g.retweet.weight(u(1), u(2)), 2);
        assert_eq!(g.mention.weight(u(1), u(2)), 1);
        assert_eq!(g.mention.weight(u(1), u(3)), 1);
        assert_eq!(g.mention.weight(u(1), u(5)), 0);
    }

    #[test]
    fn favorites_and_lists() {
        let fav = |t: u64| FavoriteRecord { user: u(1), tweet: TweetId(t), tweet_author: u(2), observed_at: 0 };
        let g = favorite_graph(&[fav(1), fav(2), fav(3)]);
        assert_eq!(g.weight(u(1), u(2)), 3);
        let m = |l: u64, x: u64| Membership { list_id: l, member: u(x) };
        let ms = [m(1, 1), m(1, 2), m(2, 1), m(2, 2), m(3, 2), m(3, 1), m(4, 7)];
        let s = list_similarity(&ms, DEFAULT_LIST_CAP);
        assert_eq!(s.graph.weight(u(2), u(1)), 3);
        assert_eq!(s.graph.edge_count(), 1);
        let four = [m(9, 1), m(9, 2), m(9, 3), m(9, 4)];
        assert_eq!(list_similarity(&four, DEFAULT_LIST_CAP).graph.edge_count(), 6);
        let capped = list_similarity(&four, 3);
        assert!(capped.graph.is_empty());
        assert_eq!(capped.skipped.len(), 1);
    }

    #[test]
    fn follow_latest_scan_wins() {
        assert!(follow_snapshot(&[], &[], 100).is_empty());
        let e = |s, d, t| FollowEdge { src: u(s), dst: u(d), observed_at: t };
        let scan = |x, t| FollowScan { user: u(x), direction: FollowDirection::Friends, observed_at: t };
        let edges = [e(1, 2, 10), e(1, 3, 10), e(1, 2, 20)];
        let scans = [scan(1, 10), scan(1, 20)];
        let g = follow_snapshot(&edges, &scans, 15);
        assert_eq!(g.edge_count(), 2);
        let g = follow_snapshot(&edges, &scans, 25);
        assert_eq!(g.edges.keys().copied().collect::<Vec<_>>(), vec![(u(1), u(2))]);
        let g = follow_snapshot(&[e(4, 5, 7)], &[], 1_000);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn star_degrees() {
        let mut g = Graph::new(GraphKind::Follow);
        for leaf in 2..5 {
            g.add(u(1), u(leaf), 1);
        }
        let h = degree_distributions(&g);
        assert_eq!(h.out_degree, BTreeMap::from([(0, 3), (3, 1)]));
        assert_eq!(h.in_degree, BTreeMap::from([(0, 1), (1, 3)]));
        assert!(degree_distributions(&Graph::new(GraphKind::Retweet)).degree.is_empty());
    }

    #[test]
    fn thread_examples() {
        let root = tw(1, 1);
        let mut r1 = tw(2, 2);
        r1.reply_to = Some((TweetId(1), u(1)));
        let mut r2 = tw(3, 1);
        r2.reply_to = Some((TweetId(2), u(2)));
        let mut r3 = tw(4, 3);
        r3.reply_to = Some((TweetId(1), u(1)));
        let lonely = tw(5, 1);
        let tweets = vec![root, r1, r2, r3, lonely];
        let roots = target_roots(&tweets, |_| true);
        let rep = thread_lengths(&tweets, &roots);
        assert_eq!(rep.lengths, BTreeMap::from([(TweetId(1), 3)]));
        assert_eq!(rep.histogram, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn reply_cycle_is_cut() {
        let mut a = tw(1, 1);
        a.reply_to = Some((TweetId(2), u(1)));
        let mut b = tw(2, 1);
        b.reply_to = Some((TweetId(1), u(1)));
        let rep = thread_lengths(&[a, b], &BTreeSet::from([TweetId(1)]));
        assert_eq!(rep.cycles, vec![TweetId(1)]);
        assert_eq!(rep.lengths.get(&TweetId(1)), Some(&2));
    }
}
