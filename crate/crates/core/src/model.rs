//! Domain types shared by every module.
//!
//! All timestamps are UTC seconds since the Unix epoch. Tweet ids follow the
//! snowflake convention: the creation second is packed into the high bits, so
//! ordering ids is ordering by creation time.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// UTC seconds since the Unix epoch.
pub type Timestamp = i64;

pub const MINUTE: i64 = 60;
pub const HOUR: i64 = 3600;
pub const DAY: i64 = 86_400;

/// Offset subtracted from creation seconds before packing them into a [`TweetId`].
pub const SNOWFLAKE_EPOCH: Timestamp = 1_288_834_974;
const SNOWFLAKE_SEQ_BITS: u32 = 22;
const SNOWFLAKE_SEQ_MASK: u64 = (1 << SNOWFLAKE_SEQ_BITS) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("tweet {0} references itself")]
    SelfReference(u64),
    #[error("field `{0}` must be a positive id")]
    NonPositiveId(&'static str),
}

macro_rules! positive_id {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "u64", into = "u64")]
        pub struct $name(pub u64);

        impl $name {
            pub fn new(value: u64) -> Result<Self, ModelError> {
                if value == 0 {
                    Err(ModelError::NonPositiveId($what))
                } else {
                    Ok(Self(value))
                }
            }

            pub fn get(self) -> u64 {
                self.0
            }
        }

        impl TryFrom<u64> for $name {
            type Error = ModelError;
            fn try_from(value: u64) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl From<$name> for u64 {
            fn from(id: $name) -> u64 {
                id.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

positive_id!(UserId, "user id");
positive_id!(TweetId, "tweet id");

impl TweetId {
    /// Packs a creation second and a sequence number into a snowflake id.
    pub fn from_parts(created_at: Timestamp, seq: u64) -> TweetId {
        let secs = (created_at - SNOWFLAKE_EPOCH).max(0) as u64;
        TweetId((secs << SNOWFLAKE_SEQ_BITS) | (seq & SNOWFLAKE_SEQ_MASK) | u64::from(secs == 0 && seq == 0))
    }

    /// The creation second encoded in the id.
    pub fn timestamp(self) -> Timestamp {
        (self.0 >> SNOWFLAKE_SEQ_BITS) as Timestamp + SNOWFLAKE_EPOCH
    }

    /// Smallest id that could have been minted at `t`.
    pub fn lower_bound(t: Timestamp) -> TweetId {
        TweetId::from_parts(t, 0)
    }
}

/// A timestamped observation of a user profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSnapshot {
    pub id: UserId,
    pub screen_name: String,
    pub name: String,
    pub bio: String,
    pub location: String,
    pub time_zone: String,
    pub ui_lang: String,
    pub profile_url: String,
    pub created_at: Timestamp,
    pub tweet_count: u64,
    pub followers_count: u64,
    pub friends_count: u64,
    pub favourites_count: u64,
    pub protected: bool,
    pub verified: bool,
    pub observed_at: Timestamp,
}

impl UserSnapshot {
    /// True when `self` and `other` agree on everything except `tweet_count`
    /// and `observed_at`.
    pub fn same_except_tweet_count(&self, other: &UserSnapshot) -> bool {
        self.id == other.id
            && self.screen_name == other.screen_name
            && self.name == other.name
            && self.bio == other.bio
            && self.location == other.location
            && self.time_zone == other.time_zone
            && self.ui_lang == other.ui_lang
            && self.profile_url == other.profile_url
            && self.created_at == other.created_at
            && self.followers_count == other.followers_count
            && self.friends_count == other.friends_count
            && self.favourites_count == other.favourites_count
            && self.protected == other.protected
            && self.verified == other.verified
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UrlEntity {
    pub short: String,
    pub expanded: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: TweetId,
    pub author: UserId,
    pub created_at: Timestamp,
    pub text: String,
    pub lang: String,
    pub retweet_of: Option<(TweetId, UserId)>,
    pub reply_to: Option<(TweetId, UserId)>,
    pub quote_of: Option<(TweetId, UserId)>,
    pub mentions: Vec<UserId>,
    pub hashtags: Vec<String>,
    pub urls: Vec<UrlEntity>,
    pub source_client: String,
    pub truncated: bool,
}

impl Tweet {
    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }

    pub fn is_reply(&self) -> bool {
        self.reply_to.is_some()
    }

    pub fn is_quote(&self) -> bool {
        self.quote_of.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefKind {
    Retweet,
    Reply,
    Quote,
}

/// One reference carried by a tweet: what kind, which tweet, whose tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TweetRef {
    pub kind: RefKind,
    pub tweet: TweetId,
    pub user: UserId,
}

/// The references present on `t`; at most one per kind.
pub fn tweet_refs(t: &Tweet) -> BTreeSet<TweetRef> {
    [
        (RefKind::Retweet, t.retweet_of),
        (RefKind::Reply, t.reply_to),
        (RefKind::Quote, t.quote_of),
    ]
    .into_iter()
    .filter_map(|(kind, r)| r.map(|(tweet, user)| TweetRef { kind, tweet, user }))
    .collect()
}

/// A tweet record as read from the wire or a file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: Option<u64>,
    pub author: Option<u64>,
    pub created_at: Option<Timestamp>,
    pub text: Option<String>,
    pub lang: Option<String>,
    #[serde(default)]
    pub retweet_of: Option<(u64, u64)>,
    #[serde(default)]
    pub reply_to: Option<(u64, u64)>,
    #[serde(default)]
    pub quote_of: Option<(u64, u64)>,
    #[serde(default)]
    pub mentions: Vec<u64>,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub urls: Vec<UrlEntity>,
    #[serde(default)]
    pub source_client: String,
    #[serde(default)]
    pub truncated: bool,
}

impl From<&Tweet> for RawTweet {
    fn from(t: &Tweet) -> Self {
        let pair = |r: Option<(TweetId, UserId)>| r.map(|(a, b)| (a.0, b.0));
        RawTweet {
            id: Some(t.id.0),
            author: Some(t.author.0),
            created_at: Some(t.created_at),
            text: Some(t.text.clone()),
            lang: Some(t.lang.clone()),
            retweet_of: pair(t.retweet_of),
            reply_to: pair(t.reply_to),
            quote_of: pair(t.quote_of),
            mentions: t.mentions.iter().map(|m| m.0).collect(),
            hashtags: t.hashtags.clone(),
            urls: t.urls.clone(),
            source_client: t.source_client.clone(),
            truncated: t.truncated,
        }
    }
}

/// Checks a raw record and builds a [`Tweet`]. Truncated records pass through
/// with `truncated` set so the caller can queue them for repair.
pub fn validate_tweet(raw: &RawTweet) -> Result<Tweet, ModelError> {
    let id = TweetId::new(raw.id.ok_or(ModelError::MissingField("id"))?)
        .map_err(|_| ModelError::NonPositiveId("id"))?;
    let author = UserId::new(raw.author.ok_or(ModelError::MissingField("author"))?)
        .map_err(|_| ModelError::NonPositiveId("author"))?;
    let created_at = raw.created_at.ok_or(ModelError::MissingField("created_at"))?;
    let text = raw.text.clone().ok_or(ModelError::MissingField("text"))?;
    let lang = raw.lang.clone().ok_or(ModelError::MissingField("lang"))?;

    let reference = |r: Option<(u64, u64)>, field: &'static str| -> Result<_, ModelError> {
        match r {
            None => Ok(None),
            Some((tid, uid)) => {
                let tid = TweetId::new(tid).map_err(|_| ModelError::NonPositiveId(field))?;
                let uid = UserId::new(uid).map_err(|_| ModelError::NonPositiveId(field))?;
                if tid == id {
                    return Err(ModelError::SelfReference(id.0));
                }
                Ok(Some((tid, uid)))
            }
        }
    };

    let mentions = raw
        .mentions
        .iter()
        .map(|&m| UserId::new(m).map_err(|_| ModelError::NonPositiveId("mentions")))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Tweet {
        id,
        author,
        created_at,
        text,
        lang,
        retweet_of: reference(raw.retweet_of, "retweet_of")?,
        reply_to: reference(raw.reply_to, "reply_to")?,
        quote_of: reference(raw.quote_of, "quote_of")?,
        mentions,
        hashtags: raw.hashtags.clone(),
        urls: raw.urls.clone(),
        source_client: raw.source_client.clone(),
        truncated: raw.truncated,
    })
}

/// A directed follow observation: `src` follows `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FollowEdge {
    pub src: UserId,
    pub dst: UserId,
    pub observed_at: Timestamp,
}

impl FollowEdge {
    pub fn new(src: UserId, dst: UserId, observed_at: Timestamp) -> Option<FollowEdge> {
        (src != dst).then_some(FollowEdge { src, dst, observed_at })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowDirection {
    Friends,
    Followers,
}

/// Record of one completed follow enumeration, used to reconstruct the graph
/// with latest-scan-wins semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowScan {
    pub user: UserId,
    pub direction: FollowDirection,
    pub observed_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListRecord {
    pub list_id: u64,
    pub owner: UserId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Membership {
    pub list_id: u64,
    pub member: UserId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subscription {
    pub list_id: u64,
    pub subscriber: UserId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FavoriteRecord {
    pub user: UserId,
    pub tweet: TweetId,
    pub tweet_author: UserId,
    pub observed_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendSnapshot {
    pub place: String,
    pub observed_at: Timestamp,
    pub trends: Vec<String>,
}

/// Per-user crawl bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlState {
    pub user: UserId,
    pub first_seen_tweet: Option<TweetId>,
    pub last_seen_tweet: Option<TweetId>,
    pub first_crawled_at: Option<Timestamp>,
    pub last_crawled_at: Option<Timestamp>,
    pub cap_reached: bool,
    pub profile_fetched_at: Option<Timestamp>,
    pub avatar_fetched_at: Option<Timestamp>,
    pub favorites_scanned_at: Option<Timestamp>,
    pub friends_scanned_at: Option<Timestamp>,
    pub followers_scanned_at: Option<Timestamp>,
    pub friends_profiles_scanned_at: Option<Timestamp>,
    pub followers_profiles_scanned_at: Option<Timestamp>,
    /// Tweets of this user collected through timeline paging.
    pub seen_tweets: u64,
    /// The author's reported tweet count at the end of the last visit.
    pub tweet_count_at_crawl: Option<u64>,
    pub est_rate: f64,
}

impl CrawlState {
    pub fn new(user: UserId) -> CrawlState {
        CrawlState {
            user,
            first_seen_tweet: None,
            last_seen_tweet: None,
            first_crawled_at: None,
            last_crawled_at: None,
            cap_reached: false,
            profile_fetched_at: None,
            avatar_fetched_at: None,
            favorites_scanned_at: None,
            friends_scanned_at: None,
            followers_scanned_at: None,
            friends_profiles_scanned_at: None,
            followers_profiles_scanned_at: None,
            seen_tweets: 0,
            tweet_count_at_crawl: None,
            est_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserClass {
    #[default]
    Unknown,
    Tracked,
    Target,
    Stopped,
    Suspended,
    Dead,
    Protected,
}

impl UserClass {
    /// Classes whose content the crawler collects.
    pub fn is_crawled(self) -> bool {
        matches!(self, UserClass::Tracked | UserClass::Target)
    }

    /// Classes that seeding must never (re-)add.
    pub fn blocks_seeding(self) -> bool {
        matches!(self, UserClass::Stopped | UserClass::Dead | UserClass::Suspended)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Unknown => "unknown",
            UserClass::Tracked => "tracked",
            UserClass::Target => "target",
            UserClass::Stopped => "stopped",
            UserClass::Suspended => "suspended",
            UserClass::Dead => "dead",
            UserClass::Protected => "protected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTransition {
    pub user: UserId,
    pub from: UserClass,
    pub to: UserClass,
    pub at: Timestamp,
}

/// A referenced tweet that could not be retrieved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoneRecord {
    pub tweet: TweetId,
    /// Author of the missing tweet, taken from the referencing tweet.
    pub author: UserId,
    pub referenced_by: UserId,
    pub observed_at: Timestamp,
}
