use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{Tweet, UrlEntity};

use super::activity::{day_label, TOP_K};
use super::lexicon::{Gender, Lexicons};
use super::stats::{pcnt, ratio, top_k, CharCounts, Summary};
use super::VectorizeError;

const TOP_LANGUAGES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "class", content = "text", rename_all = "snake_case")]
pub enum Token {
    /// Raw form; counting uses the lowercase form.
    Word(String),
    Hashtag(String),
    Mention(String),
    Url(String),
    Emoticon(String),
    Emoji(String),
}

impl Token {
    /// Key used in the token histogram.
    pub fn key(&self) -> String {
        match self {
            Token::Word(w) => w.to_lowercase(),
            Token::Hashtag(h) => format!("#{}", h.to_lowercase()),
            Token::Mention(m) => format!("@{}", m.to_lowercase()),
            Token::Url(u) | Token::Emoticon(u) | Token::Emoji(u) => u.clone(),
        }
    }
}

pub fn is_emoji(c: char) -> bool {
    matches!(c as u32, 0x1F000..=0x1FAFF | 0x2600..=0x27BF)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\u{FE0F}' | '\u{200D}')
}

/// Whitespace split, then URLs, emoticons, hashtags and mentions are taken
/// whole; everything else is cut into alphanumeric runs (words) and emoji,
/// dropping punctuation.
pub fn tokenize(text: &str, lex: &Lexicons) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if chunk.starts_with("http://") || chunk.starts_with("https://") {
            out.push(Token::Url(chunk.to_string()));
            continue;
        }
        if lex.emoticons.contains(chunk) {
            out.push(Token::Emoticon(chunk.to_string()));
            continue;
        }
        let tag = |p: char| {
            chunk
                .strip_prefix(p)
                .map(|r| r.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '_'))
                .filter(|r| !r.is_empty())
        };
        if let Some(h) = tag('#') {
            out.push(Token::Hashtag(h.to_string()));
            continue;
        }
        if let Some(m) = tag('@') {
            out.push(Token::Mention(m.to_string()));
            continue;
        }
        let mut word = String::new();
        for c in chunk.chars() {
            if c.is_alphanumeric() {
                word.push(c);
                continue;
            }
            if !word.is_empty() {
                out.push(Token::Word(std::mem::take(&mut word)));
            }
            if is_emoji(c) {
                out.push(Token::Emoji(c.to_string()));
            } else if is_joiner(c) {
                continue;
            }
        }
        if !word.is_empty() {
            out.push(Token::Word(word));
        }
    }
    out
}

pub fn url_host(u: &UrlEntity) -> String {
    let s = if u.expanded.is_empty() { &u.short } else { &u.expanded };
    let s = s.split_once("://").map_or(s.as_str(), |(_, r)| r);
    let host = s.split(['/', '?', '#', ':']).next().unwrap_or("").to_lowercase();
    host.strip_prefix("www.").map(str::to_string).unwrap_or(host)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalGender {
    pub male_pcnt: f64,
    pub female_pcnt: f64,
    pub matches: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TextFeatures {
    /// Own tweets (retweets excluded) the text features are computed over.
    pub text_tweets: u64,
    pub total_words: u64,
    pub min_wptw: Option<u64>,
    pub avg_wptw: Option<f64>,
    pub med_wptw: Option<f64>,
    pub std_wptw: Option<f64>,
    pub unique_words: u64,
    pub lex_freq: Option<f64>,
    pub total_bigrams: u64,
    pub unique_bigrams: u64,
    pub bigram_lex_freq: Option<f64>,
    pub articles: u64,
    pub pronouns: u64,
    pub expletives: u64,
    pub locations: u64,
    pub emoticons: u64,
    pub emoji: u64,
    pub alltokens: BTreeMap<String, u64>,
    pub all_caps_words: u64,
    pub all_caps_words_pcnt: Option<f64>,
    pub all_caps_tweets: u64,
    pub all_caps_tweets_pcnt: Option<f64>,
    pub all_nocaps_words: u64,
    pub all_nocaps_words_pcnt: Option<f64>,
    pub punctuation_chars: u64,
    pub punctuation_pcnt: Option<f64>,
    pub total_chars: u64,
    pub digit_chars: u64,
    pub digit_pcnt: Option<f64>,
    pub alpha_chars: u64,
    pub alpha_pcnt: Option<f64>,
    pub upper_chars: u64,
    pub upper_pcnt: Option<f64>,
    pub lower_chars: u64,
    pub lower_pcnt: Option<f64>,
    pub greek_chars: u64,
    pub greek_pcnt: Option<f64>,
    pub total_hashtags: u64,
    pub hashtags_per_tw: Option<Summary>,
    pub uniq_hashtags: u64,
    pub total_rt_hashtags: u64,
    pub uniq_rt_hashtags: u64,
    pub most_common_words: Vec<(String, u64)>,
    pub most_common_bigrams: Vec<(String, u64)>,
    pub most_common_hashtags: Vec<(String, u64)>,
    pub most_common_rt_hashtags: Vec<(String, u64)>,
    pub most_common_urls: Vec<(String, u64)>,
    pub most_common_rt_urls: Vec<(String, u64)>,
    pub seen_urls: u64,
    pub urls_per_tw: Option<Summary>,
    pub avg_edit_distance: Option<f64>,
    pub lexical_gender: Option<LexicalGender>,
    pub number_of_languages: u64,
    pub tweets_per_language: Vec<(String, u64)>,
}

fn is_caps_word(w: &str) -> bool {
    w.chars().count() > 1 && w.chars().any(char::is_uppercase) && !w.chars().any(char::is_lowercase)
}

fn count_pattern(words: &[String], pat: &[&str]) -> u64 {
    if pat.is_empty() || words.len() < pat.len() {
        return 0;
    }
    words.windows(pat.len()).filter(|w| w.iter().zip(pat).all(|(a, b)| a == b)).count() as u64
}

fn bump(m: &mut BTreeMap<String, u64>, k: String) {
    *m.entry(k).or_default() += 1;
}

/// Text features over the tweets of one user. Retweets contribute only to
/// the `rt_` hashtag and URL features. `screen_name` feeds the URL edit
/// distance.
pub fn text_features(tweets: &[Tweet], screen_name: Option<&str>, lex: &Lexicons) -> TextFeatures {
    let mut f = TextFeatures::default();
    let mut chars = CharCounts::default();
    let mut words_per_tweet = Vec::new();
    let mut word_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut bigram_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut unique_words: BTreeSet<String> = BTreeSet::new();
    let mut unique_bigrams: BTreeSet<(String, String)> = BTreeSet::new();
    let mut hashtags: BTreeMap<String, u64> = BTreeMap::new();
    let mut rt_hashtags: BTreeMap<String, u64> = BTreeMap::new();
    let mut domains: BTreeMap<String, u64> = BTreeMap::new();
    let mut rt_domains: BTreeMap<String, u64> = BTreeMap::new();
    let mut languages: BTreeMap<String, u64> = BTreeMap::new();
    let mut hashtags_per = Vec::new();
    let mut urls_per = Vec::new();
    let mut distances = Vec::new();
    let (mut male, mut female) = (0u64, 0u64);
    let screen = screen_name.map(str::to_lowercase);
    let patterns: Vec<(Vec<&str>, Gender)> =
        lex.gender_patterns.iter().map(|(p, &g)| (p.split(' ').collect(), g)).collect();

    for t in tweets {
        if t.is_retweet() {
            for h in &t.hashtags {
                f.total_rt_hashtags += 1;
                bump(&mut rt_hashtags, h.to_lowercase());
            }
            for u in &t.urls {
                bump(&mut rt_domains, url_host(u));
            }
            continue;
        }
        f.text_tweets += 1;
        if !t.lang.is_empty() {
            bump(&mut languages, t.lang.clone());
        }
        chars.add(&t.text);
        let tokens = tokenize(&t.text, lex);
        let mut words: Vec<String> = Vec::new();
        let (mut has_upper, mut has_lower) = (false, false);
        for tok in &tokens {
            bump(&mut f.alltokens, tok.key());
            match tok {
                Token::Word(w) => {
                    let lw = w.to_lowercase();
                    f.total_words += 1;
                    f.all_caps_words += is_caps_word(w) as u64;
                    f.all_nocaps_words += !w.chars().any(char::is_uppercase) as u64;
                    has_upper |= w.chars().any(char::is_uppercase);
                    has_lower |= w.chars().any(char::is_lowercase);
                    f.articles += lex.articles.contains(&lw) as u64;
                    f.pronouns += lex.pronouns.contains(&lw) as u64;
                    f.expletives += lex.expletives.contains(&lw) as u64;
                    f.locations += lex.locations.contains(&lw) as u64;
                    unique_words.insert(lw.clone());
                    if !lex.stopwords.contains(&lw) {
                        bump(&mut word_counts, lw.clone());
                    }
                    words.push(lw);
                }
                Token::Emoticon(_) => f.emoticons += 1,
                Token::Emoji(_) => f.emoji += 1,
                _ => {}
            }
        }
        f.all_caps_tweets += (has_upper && !has_lower) as u64;
        words_per_tweet.push(words.len() as f64);
        for w in words.windows(2) {
            f.total_bigrams += 1;
            unique_bigrams.insert((w[0].clone(), w[1].clone()));
            if !lex.stopwords.contains(&w[0]) && !lex.stopwords.contains(&w[1]) {
                bump(&mut bigram_counts, format!("{} {}", w[0], w[1]));
            }
        }
        for (p, g) in &patterns {
            let n = count_pattern(&words, p);
            match g {
                Gender::Male => male += n,
                Gender::Female => female += n,
            }
        }
        for h in &t.hashtags {
            f.total_hashtags += 1;
            bump(&mut hashtags, h.to_lowercase());
        }
        hashtags_per.push(t.hashtags.len() as u64);
        urls_per.push(t.urls.len() as u64);
        for u in &t.urls {
            f.seen_urls += 1;
            let host = url_host(u);
            if let Some(s) = &screen {
                distances.push(strsim::levenshtein(&host, s) as f64);
            }
            bump(&mut domains, host);
        }
    }

    let wpt = Summary::of(&words_per_tweet);
    f.min_wptw = wpt.map(|s| s.min as u64);
    f.avg_wptw = wpt.map(|s| s.mean);
    f.med_wptw = wpt.map(|s| s.median);
    f.std_wptw = wpt.map(|s| s.std);
    f.unique_words = unique_words.len() as u64;
    f.lex_freq = ratio(f.unique_words, f.total_words);
    f.unique_bigrams = unique_bigrams.len() as u64;
    f.bigram_lex_freq = ratio(f.unique_bigrams, f.total_bigrams);
    f.all_caps_words_pcnt = pcnt(f.all_caps_words, f.total_words);
    f.all_caps_tweets_pcnt = pcnt(f.all_caps_tweets, f.text_tweets);
    f.all_nocaps_words_pcnt = pcnt(f.all_nocaps_words, f.total_words);
    f.total_chars = chars.total;
    f.punctuation_chars = chars.punct;
    f.punctuation_pcnt = pcnt(chars.punct, chars.total);
    f.digit_chars = chars.digit;
    f.digit_pcnt = pcnt(chars.digit, chars.total);
    f.alpha_chars = chars.alpha;
    f.alpha_pcnt = pcnt(chars.alpha, chars.total);
    f.upper_chars = chars.upper;
    f.upper_pcnt = pcnt(chars.upper, chars.total);
    f.lower_chars = chars.lower;
    f.lower_pcnt = pcnt(chars.lower, chars.total);
    f.greek_chars = chars.greek;
    f.greek_pcnt = pcnt(chars.greek, chars.total);
    f.hashtags_per_tw = Summary::of_counts(hashtags_per);
    f.uniq_hashtags = hashtags.len() as u64;
    f.uniq_rt_hashtags = rt_hashtags.len() as u64;
    f.most_common_words = top_k(&word_counts, TOP_K);
    f.most_common_bigrams = top_k(&bigram_counts, TOP_K);
    f.most_common_hashtags = top_k(&hashtags, TOP_K);
    f.most_common_rt_hashtags = top_k(&rt_hashtags, TOP_K);
    f.most_common_urls = top_k(&domains, TOP_K);
    f.most_common_rt_urls = top_k(&rt_domains, TOP_K);
    f.urls_per_tw = Summary::of_counts(urls_per);
    f.avg_edit_distance = Summary::of(&distances).map(|s| s.mean);
    let matches = male + female;
    f.lexical_gender = (matches > 0).then(|| LexicalGender {
        male_pcnt: 100.0 * male as f64 / matches as f64,
        female_pcnt: 100.0 * female as f64 / matches as f64,
        matches,
    });
    f.number_of_languages = languages.len() as u64;
    f.tweets_per_language = top_k(&languages, TOP_LANGUAGES);
    f
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentMeans {
    pub tweets: u64,
    pub pos_tweets: u64,
    pub pos_mean: Option<f64>,
    pub neg_tweets: u64,
    pub neg_mean: Option<f64>,
}

impl SentimentMeans {
    fn add(&mut self, pos: f64, neg: f64, sums: &mut (f64, f64)) {
        self.tweets += 1;
        if pos > 0.0 {
            self.pos_tweets += 1;
            sums.0 += pos;
        }
        if neg > 0.0 {
            self.neg_tweets += 1;
            sums.1 += neg;
        }
    }

    fn finish(&mut self, sums: (f64, f64)) {
        self.pos_mean = (self.pos_tweets > 0).then(|| sums.0 / self.pos_tweets as f64);
        self.neg_mean = (self.neg_tweets > 0).then(|| sums.1 / self.neg_tweets as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityEdge {
    pub a: String,
    pub b: String,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityOverlap {
    pub nodes: BTreeMap<String, u64>,
    pub edges: Vec<EntityEdge>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentFeatures {
    /// Per UTC day, only days with a scored tweet.
    pub daily_sentiment: BTreeMap<String, SentimentMeans>,
    pub senti_entities: BTreeMap<String, SentimentMeans>,
    pub entity_overlap: EntityOverlap,
}

/// Positive and negative score of a text: sums of the matched word weights.
pub fn score(text: &str, lex: &Lexicons) -> (f64, f64) {
    tokenize(text, lex).iter().fold((0.0, 0.0), |(p, n), tok| match tok {
        Token::Word(w) => {
            let (a, b) = lex.sentiment.get(&w.to_lowercase()).copied().unwrap_or((0.0, 0.0));
            (p + a, n + b)
        }
        _ => (p, n),
    })
}

/// Entities a tweet mentions: lexicon entities by alias substring or
/// hashtag equality, and every other hashtag as `#tag`.
pub fn entities_of(t: &Tweet, lex: &Lexicons) -> BTreeSet<String> {
    let text = t.text.to_lowercase();
    let tags: BTreeSet<String> = t.hashtags.iter().map(|h| h.to_lowercase()).collect();
    let mut out = BTreeSet::new();
    let mut claimed = BTreeSet::new();
    for (name, aliases) in &lex.entities {
        let mut hit = false;
        for a in aliases {
            if tags.contains(a) {
                claimed.insert(a.clone());
                hit = true;
            }
            hit |= text.contains(a.as_str());
        }
        if hit {
            out.insert(name.clone());
        }
    }
    out.extend(tags.difference(&claimed).map(|h| format!("#{h}")));
    out
}

/// Daily and per-entity sentiment means and the entity co-mention graph over
/// the user's own tweets.
pub fn sentiment_features(tweets: &[Tweet], lex: &Lexicons) -> Result<SentimentFeatures, VectorizeError> {
    if lex.sentiment.is_empty() {
        return Err(VectorizeError::MissingLexicon("sentiment.tsv".to_string()));
    }
    let mut days: BTreeMap<i64, (SentimentMeans, (f64, f64))> = BTreeMap::new();
    let mut ents: BTreeMap<String, (SentimentMeans, (f64, f64))> = BTreeMap::new();
    let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
    for t in tweets.iter().filter(|t| !t.is_retweet()) {
        let (pos, neg) = score(&t.text, lex);
        if pos > 0.0 || neg > 0.0 {
            let (m, s) = days.entry(t.created_at.div_euclid(crate::model::DAY)).or_default();
            m.add(pos, neg, s);
        }
        let es: Vec<String> = entities_of(t, lex).into_iter().collect();
        for e in &es {
            let (m, s) = ents.entry(e.clone()).or_default();
            m.add(pos, neg, s);
        }
        for i in 0..es.len() {
            for j in i + 1..es.len() {
                *edges.entry((es[i].clone(), es[j].clone())).or_default() += 1;
            }
        }
    }
    let finish = |(mut m, s): (SentimentMeans, (f64, f64))| {
        m.finish(s);
        m
    };
    let nodes = ents.iter().map(|(k, (m, _))| (k.clone(), m.tweets)).collect();
    Ok(SentimentFeatures {
        daily_sentiment: days.into_iter().map(|(d, v)| (day_label(d), finish(v))).collect(),
        senti_entities: ents.into_iter().map(|(k, v)| (k, finish(v))).collect(),
        entity_overlap: EntityOverlap {
            nodes,
            edges: edges.into_iter().map(|((a, b), weight)| EntityEdge { a, b, weight }).collect(),
        },
    })
}
