//! Text normalization: sentence splitting, tokenization, dictionary
//! lemmatization with pass-through, and stop-word removal.
//!
//! All stages are pure functions over shared read-only tables, so they are
//! safe to run in parallel across articles.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected \"surface<TAB>lemma\"")]
    BadLexiconLine { path: String, line: usize },
}

/// Czech abbreviations that end with a period but do not close a sentence.
const ABBREVIATIONS: &[&str] = &[
    "atd.", "apod.", "bc.", "cca.", "č.", "čj.", "doc.", "dr.", "hod.", "ing.", "judr.", "kč.",
    "mgr.", "mil.", "mj.", "mld.", "mudr.", "nám.", "např.", "p.", "phdr.", "pí.", "popř.",
    "prof.", "př.", "resp.", "s.", "st.", "str.", "sv.", "tis.", "tj.", "tzv.", "ul.",
];

/// Surface-form to lemma table. Lookups of unknown forms return the input
/// unchanged, so lemmatization never drops a token.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    map: HashMap<String, String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let map = pairs
            .into_iter()
            .map(|(k, v)| (fold_case(&k.into()), v.into()))
            .collect();
        Self { map }
    }

    /// Loads a lexicon file: one "surface TAB lemma" pair per line, UTF-8.
    /// Lines starting with '#' and blank lines are ignored.
    pub fn load(path: &Path) -> Result<Self, TextError> {
        let text = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut map = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or(TextError::BadLexiconLine {
                path: path.display().to_string(),
                line: idx + 1,
            })?;
            map.insert(fold_case(surface.trim()), lemma.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Set of stop-word lemmas removed after lemmatization.
#[derive(Debug, Clone, Default)]
pub struct StopList {
    set: HashSet<String>,
}

impl StopList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set = words.into_iter().map(|w| fold_case(&w.into())).collect();
        Self { set }
    }

    /// Loads a stop list: one lemma per line, UTF-8, '#' lines ignored.
    pub fn load(path: &Path) -> Result<Self, TextError> {
        let text = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let set = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(fold_case)
            .collect();
        Ok(Self { set })
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.set.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

fn fold_case(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Splits text into sentences on `.` `!` `?` followed by whitespace and an
/// uppercase letter or digit. Abbreviations from a fixed exception list and
/// single-letter initials do not end a sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') && is_boundary(&chars, i, start) {
            let sentence: String = chars[start..=i].iter().collect();
            let sentence = sentence.trim();
            if !sentence.is_empty() {
                sentences.push(sentence.to_string());
            }
            // skip the whitespace run after the boundary
            let mut next = i + 1;
            while next < chars.len() && chars[next].is_whitespace() {
                next += 1;
            }
            start = next;
            i = next;
            continue;
        }
        i += 1;
    }

    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
    }
    sentences
}

fn is_boundary(chars: &[char], punct: usize, start: usize) -> bool {
    // require whitespace then an uppercase letter or digit
    let mut next = punct + 1;
    if next >= chars.len() || !chars[next].is_whitespace() {
        return false;
    }
    while next < chars.len() && chars[next].is_whitespace() {
        next += 1;
    }
    match chars.get(next) {
        Some(c) if c.is_uppercase() || c.is_numeric() => {}
        _ => return false,
    }

    if chars[punct] != '.' {
        return true;
    }
    // periods after known abbreviations or single-letter initials stay inside
    let mut word_start = punct;
    while word_start > start && !chars[word_start - 1].is_whitespace() {
        word_start -= 1;
    }
    let word: String = chars[word_start..=punct]
        .iter()
        .flat_map(|c| c.to_lowercase())
        .collect();
    if ABBREVIATIONS.contains(&word.as_str()) {
        return false;
    }
    let letters = punct - word_start;
    if letters == 1 && chars[word_start].is_alphabetic() {
        return false;
    }
    true
}

/// Unicode word tokenizer: alphanumeric runs, lowercased, punctuation
/// dropped. A hyphen between two alphanumerics stays inside the token, so
/// "e-mail" survives as one token. Digits are kept.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if c == '-'
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('-');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Dictionary lemmatization with pass-through: the lexicon image when the
/// token is known, otherwise the token itself, unaltered.
pub fn lemmatize<'a>(token: &'a str, lexicon: &'a Lexicon) -> &'a str {
    lexicon.map.get(token).map(String::as_str).unwrap_or(token)
}

/// Full normalization chain: sentences -> tokens -> lemmas -> stop-word
/// removal, order preserving.
pub fn preprocess(text: &str, lexicon: &Lexicon, stops: &StopList) -> Vec<String> {
    split_sentences(text)
        .iter()
        .flat_map(|sentence| tokenize(sentence))
        .map(|token| lemmatize(&token, lexicon).to_string())
        .filter(|lemma| !stops.contains(lemma))
        .collect()
}
