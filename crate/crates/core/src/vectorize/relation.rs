use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graphmine::Graph;
use crate::model::{FavoriteRecord, FollowEdge, Timestamp, UserClass, UserId};

use super::activity::TOP_K;
use super::stats::{pcnt, top_k};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationFeatures {
    pub fr_scanned_at: Option<Timestamp>,
    pub seen_fr: u64,
    pub fr: u64,
    pub gr_fr: u64,
    pub gr_fr_pcnt: Option<f64>,
    pub tr_fr: u64,
    pub tr_fr_pcnt: Option<f64>,
    pub fo_scanned_at: Option<Timestamp>,
    pub seen_fo: u64,
    pub fo: u64,
    pub gr_fo: u64,
    pub gr_fo_pcnt: Option<f64>,
    pub tr_fo: u64,
    pub tr_fo_pcnt: Option<f64>,
    pub fr_fo_jaccard: f64,
    pub fr_and_fo: u64,
    pub fr_or_fo: u64,
    pub gr_fr_fo: u64,
    pub gr_fr_fo_pcnt: Option<f64>,
    pub greek: bool,
    pub favoriters: u64,
    pub favorited: u64,
    pub most_favoriters: Vec<(UserId, u64)>,
    pub most_favorited: Vec<(UserId, u64)>,
}

/// Friend and follower sets of every user in a follow snapshot, plus every
/// edge ever observed.
#[derive(Debug, Clone, Default)]
pub struct FollowIndex {
    friends: BTreeMap<UserId, BTreeSet<UserId>>,
    followers: BTreeMap<UserId, BTreeSet<UserId>>,
    seen_friends: BTreeMap<UserId, BTreeSet<UserId>>,
    seen_followers: BTreeMap<UserId, BTreeSet<UserId>>,
}

impl FollowIndex {
    /// `snapshot` is the follow graph at vector time; `observed` the edges
    /// seen up to then.
    pub fn build<'a>(snapshot: &Graph, observed: impl IntoIterator<Item = &'a FollowEdge>) -> FollowIndex {
        let mut ix = FollowIndex::default();
        for &(s, d) in snapshot.edges.keys() {
            ix.friends.entry(s).or_default().insert(d);
            ix.followers.entry(d).or_default().insert(s);
        }
        for e in observed {
            ix.seen_friends.entry(e.src).or_default().insert(e.dst);
            ix.seen_followers.entry(e.dst).or_default().insert(e.src);
        }
        ix
    }

    pub fn friends(&self, u: UserId) -> BTreeSet<UserId> {
        self.friends.get(&u).cloned().unwrap_or_default()
    }

    pub fn followers(&self, u: UserId) -> BTreeSet<UserId> {
        self.followers.get(&u).cloned().unwrap_or_default()
    }
}

/// Likes given and received, per user.
#[derive(Debug, Clone, Default)]
pub struct FavoriteIndex {
    given: BTreeMap<UserId, BTreeMap<UserId, u64>>,
    received: BTreeMap<UserId, BTreeMap<UserId, u64>>,
}

impl FavoriteIndex {
    pub fn build<'a>(favorites: impl IntoIterator<Item = &'a FavoriteRecord>) -> FavoriteIndex {
        let mut ix = FavoriteIndex::default();
        for f in favorites {
            *ix.given.entry(f.user).or_default().entry(f.tweet_author).or_default() += 1;
            *ix.received.entry(f.tweet_author).or_default().entry(f.user).or_default() += 1;
        }
        ix
    }
}

pub fn jaccard(a: &BTreeSet<UserId>, b: &BTreeSet<UserId>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Relation features of `u`. The `gr_` counts use Target users, the `tr_`
/// counts Tracked and Target users.
pub fn relation_features(
    u: UserId,
    follows: &FollowIndex,
    classes: &BTreeMap<UserId, UserClass>,
    favorites: &FavoriteIndex,
    scanned: (Option<Timestamp>, Option<Timestamp>),
) -> RelationFeatures {
    let class = |v: &UserId| classes.get(v).copied().unwrap_or_default();
    let gr = |s: &BTreeSet<UserId>| s.iter().filter(|v| class(v) == UserClass::Target).count() as u64;
    let tr = |s: &BTreeSet<UserId>| s.iter().filter(|v| class(v).is_crawled()).count() as u64;
    let fr = follows.friends(u);
    let fo = follows.followers(u);
    let union: BTreeSet<UserId> = fr.union(&fo).copied().collect();
    let (nfr, nfo, nu) = (fr.len() as u64, fo.len() as u64, union.len() as u64);
    let empty = BTreeMap::new();
    let given = favorites.given.get(&u).unwrap_or(&empty);
    let received = favorites.received.get(&u).unwrap_or(&empty);
    RelationFeatures {
        fr_scanned_at: scanned.0,
        seen_fr: follows.seen_friends.get(&u).map_or(0, |s| s.len() as u64),
        fr: nfr,
        gr_fr: gr(&fr),
        gr_fr_pcnt: pcnt(gr(&fr), nfr),
        tr_fr: tr(&fr),
        tr_fr_pcnt: pcnt(tr(&fr), nfr),
        fo_scanned_at: scanned.1,
        seen_fo: follows.seen_followers.get(&u).map_or(0, |s| s.len() as u64),
        fo: nfo,
        gr_fo: gr(&fo),
        gr_fo_pcnt: pcnt(gr(&fo), nfo),
        tr_fo: tr(&fo),
        tr_fo_pcnt: pcnt(tr(&fo), nfo),
        fr_fo_jaccard: jaccard(&fr, &fo),
        fr_and_fo: fr.intersection(&fo).count() as u64,
        fr_or_fo: nu,
        gr_fr_fo: gr(&union),
        gr_fr_fo_pcnt: pcnt(gr(&union), nu),
        greek: class(&u) == UserClass::Target,
        favoriters: received.len() as u64,
        favorited: given.len() as u64,
        most_favoriters: top_k(received, TOP_K),
        most_favorited: top_k(given, TOP_K),
    }
}
