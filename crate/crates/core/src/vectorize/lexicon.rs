use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::VectorizeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

/// Word lists used by the text and sentiment features. Every key is
/// lowercase; lookups lowercase their input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicons {
    pub sentiment: BTreeMap<String, (f64, f64)>,
    pub articles: BTreeSet<String>,
    pub pronouns: BTreeSet<String>,
    pub expletives: BTreeSet<String>,
    pub locations: BTreeSet<String>,
    /// Word sequences (space separated) mapped to the gender they mark.
    pub gender_patterns: BTreeMap<String, Gender>,
    /// Entity name to aliases; the name itself is always an alias.
    pub entities: BTreeMap<String, BTreeSet<String>>,
    pub stopwords: BTreeSet<String>,
    /// Emoticons are matched on the raw token, so they keep their case.
    pub emoticons: BTreeSet<String>,
}

const FILES: [&str; 9] = [
    "sentiment.tsv",
    "articles.txt",
    "pronouns.txt",
    "expletives.txt",
    "locations.txt",
    "gender.tsv",
    "entities.tsv",
    "stopwords.txt",
    "emoticons.txt",
];

fn entries(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn word_set(src: &str) -> BTreeSet<String> {
    entries(src).map(|(_, l)| l.trim().to_lowercase()).collect()
}

fn bad(file: &str, line: usize, msg: &str) -> VectorizeError {
    VectorizeError::Lexicon { file: file.to_string(), line, msg: msg.to_string() }
}

fn parse_sentiment(src: &str) -> Result<BTreeMap<String, (f64, f64)>, VectorizeError> {
    let mut out = BTreeMap::new();
    for (n, l) in entries(src) {
        let cols: Vec<&str> = l.split('\t').collect();
        let [w, p, q] = cols[..] else { return Err(bad("sentiment.tsv", n, "expected word<TAB>pos<TAB>neg")) };
        let pos: f64 = p.trim().parse().map_err(|_| bad("sentiment.tsv", n, "bad positive score"))?;
        let neg: f64 = q.trim().parse().map_err(|_| bad("sentiment.tsv", n, "bad negative score"))?;
        if pos < 0.0 || neg < 0.0 {
            return Err(bad("sentiment.tsv", n, "negative score"));
        }
        out.insert(w.trim().to_lowercase(), (pos, neg));
    }
    Ok(out)
}

fn parse_gender(src: &str) -> Result<BTreeMap<String, Gender>, VectorizeError> {
    let mut out = BTreeMap::new();
    for (n, l) in entries(src) {
        let Some((pat, g)) = l.split_once('\t') else { return Err(bad("gender.tsv", n, "expected pattern<TAB>gender")) };
        let g = match g.trim() {
            "male" | "m" => Gender::Male,
            "female" | "f" => Gender::Female,
            _ => return Err(bad("gender.tsv", n, "gender must be male or female")),
        };
        let pat = pat.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        out.insert(pat, g);
    }
    Ok(out)
}

fn parse_entities(src: &str) -> Result<BTreeMap<String, BTreeSet<String>>, VectorizeError> {
    let mut out = BTreeMap::new();
    for (n, l) in entries(src) {
        let (name, aliases) = l.split_once('\t').unwrap_or((l, ""));
        let name = name.trim().to_lowercase();
        if name.is_empty() {
            return Err(bad("entities.tsv", n, "empty entity name"));
        }
        let mut set: BTreeSet<String> = aliases.split(',').map(|a| a.trim().to_lowercase()).filter(|a| !a.is_empty()).collect();
        set.insert(name.clone());
        out.insert(name, set);
    }
    Ok(out)
}

impl Lexicons {
    /// The lexicons compiled into the crate.
    pub fn builtin() -> Lexicons {
        Lexicons::parse(|f| {
            Some(match f {
                "sentiment.tsv" => include_str!("../../data/lexicon/sentiment.tsv"),
                "articles.txt" => include_str!("../../data/lexicon/articles.txt"),
                "pronouns.txt" => include_str!("../../data/lexicon/pronouns.txt"),
                "expletives.txt" => include_str!("../../data/lexicon/expletives.txt"),
                "locations.txt" => include_str!("../../data/lexicon/locations.txt"),
                "gender.tsv" => include_str!("../../data/lexicon/gender.tsv"),
                "entities.tsv" => include_str!("../../data/lexicon/entities.tsv"),
                "stopwords.txt" => include_str!("../../data/lexicon/stopwords.txt"),
                "emoticons.txt" => include_str!("../../data/lexicon/emoticons.txt"),
                _ => return None,
            }
            .to_string())
        })
        .expect("builtin lexicons parse")
    }

    /// Loads every lexicon file from `dir`. A missing file is an error.
    pub fn load_dir(dir: &Path) -> Result<Lexicons, VectorizeError> {
        for f in FILES {
            if !dir.join(f).is_file() {
                return Err(VectorizeError::MissingLexicon(f.to_string()));
            }
        }
        let mut err = None;
        let lex = Lexicons::parse(|f| match fs::read_to_string(dir.join(f)) {
            Ok(s) => Some(s),
            Err(e) => {
                err.get_or_insert(VectorizeError::Io(e));
                None
            }
        });
        match err {
            Some(e) => Err(e),
            None => lex,
        }
    }

    fn parse(mut read: impl FnMut(&str) -> Option<String>) -> Result<Lexicons, VectorizeError> {
        let mut get = |f: &str| read(f).ok_or_else(|| VectorizeError::MissingLexicon(f.to_string()));
        Ok(Lexicons {
            sentiment: parse_sentiment(&get("sentiment.tsv")?)?,
            articles: word_set(&get("articles.txt")?),
            pronouns: word_set(&get("pronouns.txt")?),
            expletives: word_set(&get("expletives.txt")?),
            locations: word_set(&get("locations.txt")?),
            gender_patterns: parse_gender(&get("gender.tsv")?)?,
            entities: parse_entities(&get("entities.tsv")?)?,
            stopwords: word_set(&get("stopwords.txt")?),
            emoticons: entries(&get("emoticons.txt")?).map(|(_, l)| l.trim().to_string()).collect(),
        })
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(&w.to_lowercase())
    }
}
