use serde::{Deserialize, Serialize};

use crate::model::{Timestamp, UserClass, UserSnapshot};

use super::stats::{ratio, CharCounts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFeatures {
    pub screen_name: String,
    pub screen_name_len: u64,
    pub screen_name_upper: u64,
    pub screen_name_lower: u64,
    pub screen_name_digit: u64,
    pub screen_name_alpha: u64,
    pub name: String,
    pub name_len: u64,
    pub name_upper: u64,
    pub name_lower: u64,
    pub name_digit: u64,
    pub name_alpha: u64,
    pub name_greek: u64,
    pub created_at: Timestamp,
    pub tweet_count: u64,
    pub favourites_count: u64,
    pub followers_count: u64,
    pub friends_count: u64,
    pub fr_fo_ratio: Option<f64>,
    pub location: String,
    pub has_location: bool,
    pub time_zone: String,
    pub lang: String,
    pub protected: bool,
    pub verified: bool,
    pub dead: bool,
    pub suspended: bool,
    pub user_url: Option<String>,
    pub bio_words: u64,
    pub bio_upper_words: u64,
    pub bio_lower_words: u64,
    pub bio_punctuation_chars: u64,
    pub bio_digit_chars: u64,
    pub bio_alpha_chars: u64,
    pub bio_upper_chars: u64,
    pub bio_lower_chars: u64,
    pub bio_greek_chars: u64,
    pub bio_total_chars: u64,
}

fn is_upper_word(w: &str) -> bool {
    w.chars().any(char::is_uppercase) && !w.chars().any(char::is_lowercase)
}

fn is_lower_word(w: &str) -> bool {
    w.chars().any(char::is_lowercase) && !w.chars().any(char::is_uppercase)
}

/// Profile features of the latest snapshot; `class` supplies the dead and
/// suspended flags.
pub fn profile_features(s: &UserSnapshot, class: UserClass) -> ProfileFeatures {
    let sn = CharCounts::of(&s.screen_name);
    let nm = CharCounts::of(&s.name);
    let bio = CharCounts::of(&s.bio);
    let words: Vec<&str> = s.bio.split_whitespace().collect();
    ProfileFeatures {
        screen_name: s.screen_name.clone(),
        screen_name_len: sn.total,
        screen_name_upper: sn.upper,
        screen_name_lower: sn.lower,
        screen_name_digit: sn.digit,
        screen_name_alpha: sn.alpha,
        name: s.name.clone(),
        name_len: nm.total,
        name_upper: nm.upper,
        name_lower: nm.lower,
        name_digit: nm.digit,
        name_alpha: nm.alpha,
        name_greek: nm.greek,
        created_at: s.created_at,
        tweet_count: s.tweet_count,
        favourites_count: s.favourites_count,
        followers_count: s.followers_count,
        friends_count: s.friends_count,
        fr_fo_ratio: ratio(s.friends_count, s.followers_count),
        location: s.location.clone(),
        has_location: !s.location.trim().is_empty(),
        time_zone: s.time_zone.clone(),
        lang: s.ui_lang.clone(),
        protected: s.protected,
        verified: s.verified,
        dead: class == UserClass::Dead,
        suspended: class == UserClass::Suspended,
        user_url: (!s.profile_url.is_empty()).then(|| s.profile_url.clone()),
        bio_words: words.len() as u64,
        bio_upper_words: words.iter().filter(|w| is_upper_word(w)).count() as u64,
        bio_lower_words: words.iter().filter(|w| is_lower_word(w)).count() as u64,
        bio_punctuation_chars: bio.punct,
        bio_digit_chars: bio.digit,
        bio_alpha_chars: bio.alpha,
        bio_upper_chars: bio.upper,
        bio_lower_chars: bio.lower,
        bio_greek_chars: bio.greek,
        bio_total_chars: bio.total,
    }
}
