//! Token pools for synthetic tweet text and profiles. Text only needs to be
//! good enough for the text features to have something to count.

use rand::seq::IndexedRandom;
use rand::Rng;

pub const GREEK_STOPWORDS: &[&str] = &[
    "και", "το", "να", "η", "ο", "με", "για", "που", "δεν", "στο", "της", "την", "του", "τα", "θα",
];

const GREEK_WORDS: &[&str] = &[
    "καλημέρα", "σήμερα", "ωραίο", "υπέροχο", "χάλια", "κακό", "καλό", "Αθήνα", "Θεσσαλονίκη",
    "κυβέρνηση", "ποδόσφαιρο", "καφές", "δουλειά", "φίλοι", "θάλασσα", "καιρός", "βροχή", "ήλιος",
    "εκλογές", "μουσική", "ταινία", "βιβλίο", "εγώ", "εσύ", "εμείς", "αυτός", "αυτή", "ένας", "μία",
    "χαρά", "λύπη", "τέλειο", "απαίσιο", "ευχαριστώ", "μπράβο", "ΓΕΙΑ", "ΣΑΣ", "είμαι", "κουρασμένη",
    "κουρασμένος", "Κρήτη", "Πάτρα", "αγάπη", "θυμός", "γέλιο", "σκατά", "γαμώτο", "πολύ", "λίγο",
    "αύριο", "χθες", "τώρα", "πάντα", "ποτέ", "ναι", "όχι", "2018", "10", ":)", ":(", "😀", "😡",
];

const ENGLISH_WORDS: &[&str] = &[
    "the", "and", "to", "a", "of", "in", "is", "it", "good", "great", "bad", "awful", "morning",
    "today", "coffee", "work", "friends", "sea", "weather", "rain", "sun", "election", "music",
    "movie", "book", "I", "you", "we", "love", "hate", "happy", "sad", "thanks", "LOL", "OMG",
    "London", "Paris", "tired", "amazing", "terrible", "very", "little", "tomorrow", "yesterday",
    "now", "always", "never", "yes", "no", "2018", "42", ":)", ":D", "😂", "👍",
];

const GREEK_HASHTAGS: &[&str] = &["ΣΥΡΙΖΑ", "ΝΔ", "ΑΕΚ", "ΠΑΟ", "ΟΣΦΠ", "grnews", "Athens", "Ελλάδα", "σεισμός", "καλοκαίρι"];
const ENGLISH_HASHTAGS: &[&str] = &["news", "music", "football", "tech", "rust", "MondayMotivation", "travel", "food", "cats", "London"];

const GREEK_NAMES: &[&str] = &[
    "Μαρία", "Γιώργος", "Ελένη", "Δημήτρης", "Κατερίνα", "Νίκος", "Σοφία", "Γιάννης", "Αναστασία", "Κώστας",
];
/// Transliterations that also appear in the shipped common-names lexicon.
const GREEK_NAMES_LATIN: &[&str] = &[
    "maria", "giorgos", "eleni", "dimitris", "katerina", "nikos", "sofia", "giannis", "anastasia", "kostas",
];
const ENGLISH_NAMES: &[&str] = &["John", "Emma", "Oliver", "Ava", "James", "Mia", "Liam", "Grace", "Noah", "Ruby"];
const SURNAMES_LATIN: &[&str] = &["Smith", "Brown", "Papadopoulos", "Jones", "Taylor", "Georgiou", "Wilson", "Evans"];
const GREEK_SURNAMES: &[&str] = &["Παπαδόπουλος", "Γεωργίου", "Νικολάου", "Οικονόμου", "Ιωάννου"];

pub const SOURCE_CLIENTS: &[&str] = &["Twitter for Android", "Twitter for iPhone", "Twitter Web Client", "TweetDeck"];

const DOMAINS: &[&str] = &["news.gr", "example.com", "youtube.com", "blog.example.org", "kathimerini.gr", "bbc.co.uk"];

pub fn is_target_like(lang: &str, target_lang: &str) -> bool {
    lang == target_lang
}

pub fn words<R: Rng>(rng: &mut R, lang: &str, target_lang: &str, n: usize) -> Vec<&'static str> {
    let pool = if is_target_like(lang, target_lang) { GREEK_WORDS } else { ENGLISH_WORDS };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Interleave stopwords so target-language text is discoverable by keyword.
        if is_target_like(lang, target_lang) && i % 3 == 1 {
            out.push(*GREEK_STOPWORDS.choose(rng).expect("non-empty"));
        } else {
            out.push(*pool.choose(rng).expect("non-empty"));
        }
    }
    out
}

pub fn noise_word<R: Rng>(rng: &mut R) -> &'static str {
    GREEK_STOPWORDS.choose(rng).expect("non-empty")
}

pub fn hashtag<R: Rng>(rng: &mut R, lang: &str, target_lang: &str) -> &'static str {
    let pool = if is_target_like(lang, target_lang) { GREEK_HASHTAGS } else { ENGLISH_HASHTAGS };
    pool.choose(rng).expect("non-empty")
}

pub fn domain<R: Rng>(rng: &mut R) -> &'static str {
    DOMAINS.choose(rng).expect("non-empty")
}

pub struct Profile {
    pub name: String,
    pub screen_base: String,
    pub bio: String,
    pub location: String,
    pub time_zone: String,
    pub ui_lang: String,
}

/// A profile for a user whose main language is `lang`. `greek_script` picks
/// between native-script and transliterated names for target users.
pub fn profile<R: Rng>(rng: &mut R, lang: &str, target_lang: &str, greek_script: bool) -> Profile {
    let target = is_target_like(lang, target_lang);
    let (name, screen_base) = if target && greek_script {
        let i = rng.random_range(0..GREEK_NAMES.len());
        let surname = GREEK_SURNAMES.choose(rng).expect("non-empty");
        (format!("{} {}", GREEK_NAMES[i], surname), GREEK_NAMES_LATIN[i].to_string())
    } else if target {
        let first = GREEK_NAMES_LATIN.choose(rng).expect("non-empty");
        let mut cap = first.to_string();
        cap[..1].make_ascii_uppercase();
        (cap.clone(), first.to_string())
    } else {
        let first = ENGLISH_NAMES.choose(rng).expect("non-empty");
        let last = SURNAMES_LATIN.choose(rng).expect("non-empty");
        (format!("{first} {last}"), first.to_lowercase())
    };
    let bio_len = rng.random_range(0..8);
    let bio = words(rng, lang, target_lang, bio_len).join(" ");
    let (location, time_zone, ui_lang) = if target {
        (
            ["Αθήνα", "Athens, Greece", "Θεσσαλονίκη", ""].choose(rng).expect("non-empty").to_string(),
            "Athens".to_string(),
            if rng.random_bool(0.7) { target_lang.to_string() } else { "en".to_string() },
        )
    } else {
        (
            ["London", "New York", "", "Paris"].choose(rng).expect("non-empty").to_string(),
            ["London", "Eastern Time (US & Canada)", ""].choose(rng).expect("non-empty").to_string(),
            lang.to_string(),
        )
    };
    Profile { name, screen_base, bio, location, time_zone, ui_lang }
}

pub fn new_bio<R: Rng>(rng: &mut R, lang: &str, target_lang: &str) -> String {
    let n = rng.random_range(1..8);
    words(rng, lang, target_lang, n).join(" ")
}
