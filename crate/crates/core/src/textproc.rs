//! Tokenization, normalization, syllable counting and vocabularies.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::resources;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("{0:?} has no alphabetic characters")]
    NonAlphabetic(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary word list is invalid: {0}")]
    BadVocabulary(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    /// 0-based index within the sentence.
    pub position: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, position: usize) -> Self {
        let surface = surface.into();
        let lower = surface.to_lowercase();
        Token {
            surface,
            lower,
            position,
        }
    }

    pub fn is_alphabetic(&self) -> bool {
        !self.surface.is_empty() && self.surface.chars().all(char::is_alphabetic)
    }

    pub fn has_alphanumeric(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizedReview {
    pub review_id: String,
    pub sentences: Vec<Vec<Token>>,
}

impl TokenizedReview {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

fn is_terminator(s: &str) -> bool {
    matches!(s, "." | "!" | "?")
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub fn is_abbreviation(lower: &str) -> bool {
    resources::entries(resources::ABBREVIATIONS).any(|a| a == lower)
}

pub fn is_stopword(lower: &str) -> bool {
    resources::entries(resources::STOPWORDS).any(|w| w == lower)
}

/// Splits a whitespace-free chunk into word runs and single punctuation marks.
/// Apostrophes between letters stay inside the word ("don't").
fn split_chunk(chunk: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let c = chars[j].1;
                if c.is_alphanumeric() {
                    j += 1;
                } else if is_apostrophe(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(chunk.len(), |&(b, _)| b);
            out.push(&chunk[start..end]);
            i = j;
        } else {
            out.push(&chunk[start..start + c.len_utf8()]);
            i += 1;
        }
    }
    out
}

/// Splits text into sentences of tokens.
///
/// A sentence ends after a whitespace-delimited chunk whose last mark is one of
/// `. ! ?`, unless the chunk is a listed abbreviation ("e.g.", "Dr.").
/// Punctuation marks and symbols become tokens of their own.
pub fn tokenize(text: &str) -> TokenizedReview {
    let mut sentences: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for chunk in text.split_whitespace() {
        if is_abbreviation(&chunk.to_lowercase()) {
            current.push(Token::new(chunk, current.len()));
            continue;
        }
        let pieces = split_chunk(chunk);
        let ends = pieces.last().is_some_and(|p| is_terminator(p));
        for p in pieces {
            current.push(Token::new(p, current.len()));
        }
        if ends {
            sentences.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    TokenizedReview {
        review_id: String::new(),
        sentences,
    }
}

pub fn tokenize_review(review: &crate::Review) -> TokenizedReview {
    let mut t = tokenize(&review.text);
    t.review_id = review.review_id.clone();
    t
}

/// Collapses runs of three or more identical letters to two ("waaaay" → "waay").
pub fn squeeze_elongation(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev: Option<char> = None;
    let mut run = 0;
    for c in word.chars() {
        if Some(c) == prev && c.is_alphabetic() {
            run += 1;
        } else {
            run = 1;
            prev = Some(c);
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

/// Filtered and/or case-folded copy of `tokens`; positions are renumbered.
///
/// Elongated words are squeezed in every mode.
pub fn normalize(tokens: &[Token], remove_stopwords: bool, lowercase: bool) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !(remove_stopwords && is_stopword(&t.lower)))
        .enumerate()
        .map(|(position, t)| {
            let surface = if lowercase { &t.lower } else { &t.surface };
            let surface = squeeze_elongation(surface);
            Token {
                lower: squeeze_elongation(&t.lower),
                surface,
                position,
            }
        })
        .collect()
}

/// Lowercased, stopword-free words of a review (the bag used by TF-IDF,
/// vocabulary construction and the cue lexicons).
pub fn content_words(review: &TokenizedReview) -> Vec<String> {
    review
        .sentences
        .iter()
        .flat_map(|s| normalize(s, true, true))
        .filter(|t| t.has_alphanumeric())
        .map(|t| t.surface)
        .collect()
}

/// Tokens with special characters removed, lowercased and squeezed; stopwords
/// are kept. This is the network's input preprocessing.
pub fn strip_special(tokens: &[Token]) -> Vec<Token> {
    let kept: Vec<Token> = tokens.iter().filter(|t| t.has_alphanumeric()).cloned().collect();
    normalize(&kept, false, true)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Heuristic syllable count: vowel groups, with `y` acting as a consonant at
/// the start of a word or before a vowel, `u` silent after `q`, a few hiatus
/// pairs counted as two syllables, and silent final `e` / `-es` / `-ed`.
pub fn count_syllables(word: &str) -> Result<usize, TextError> {
    let letters: String = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return Err(TextError::NonAlphabetic(word.to_string()));
    }
    // Non-ASCII letters are treated as consonants.
    let w: Vec<u8> = letters
        .chars()
        .map(|c| if c.is_ascii() { c as u8 } else { b'#' })
        .collect();
    let n = w.len();
    let vowel_at = |i: usize| -> bool {
        let c = w[i];
        if c == b'y' {
            return i > 0 && !(i + 1 < n && is_vowel(w[i + 1]) && w[i + 1] != b'y');
        }
        if c == b'u' && i > 0 && w[i - 1] == b'q' {
            return false;
        }
        is_vowel(c)
    };

    let mut count = 0usize;
    let mut i = 0;
    while i < n {
        if vowel_at(i) {
            let start = i;
            while i < n && vowel_at(i) {
                i += 1;
            }
            count += 1;
            let group = &w[start..i];
            let softened = start > 0 && matches!(w[start - 1], b't' | b'c' | b's' | b'x' | b'g');
            for pair in group.windows(2) {
                let hiatus = matches!(pair, b"ia" | b"io" | b"iu" | b"ua" | b"uo");
                if hiatus && !(softened && pair[0] == b'i') {
                    count += 1;
                }
            }
        } else {
            i += 1;
        }
    }

    if count > 1 {
        let ends = |s: &[u8]| n >= s.len() && &w[n - s.len()..] == s;
        let consonant = |i: usize| !is_vowel(w[i]);
        if ends(b"e") && !(ends(b"le") && n >= 3 && consonant(n - 3)) && !ends(b"ee") {
            count -= 1;
        } else if ends(b"ed") && n >= 3 && !matches!(w[n - 3], b't' | b'd') && consonant(n - 3) {
            count -= 1;
        } else if ends(b"es")
            && n >= 3
            && !matches!(w[n - 3], b's' | b'x' | b'z' | b'c' | b'g' | b'h')
            && consonant(n - 3)
        {
            count -= 1;
        }
    }
    Ok(count.max(1))
}

/// [`count_syllables`] with non-alphabetic input counted as one syllable.
pub fn count_syllables_lenient(word: &str) -> usize {
    count_syllables(word).unwrap_or(1)
}

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

/// Dense word ids with `PAD = 0` and `UNK = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::from_words([PAD.to_string(), UNK.to_string()]).expect("specials only")
    }
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its id-ordered word list (specials included).
    pub fn from_words(words: impl IntoIterator<Item = String>) -> Result<Self, TextError> {
        let words: Vec<String> = words.into_iter().collect();
        if words.len() < 2 || words[0] != PAD || words[1] != UNK {
            return Err(TextError::BadVocabulary("missing <pad>/<unk> prefix".into()));
        }
        let mut index = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(TextError::BadVocabulary(alloc::format!("duplicate {w:?}")));
            }
        }
        Ok(Vocabulary { words, index })
    }

    /// Ids in first-seen order for words occurring at least `min_count` times.
    pub fn from_documents<I, D, S>(documents: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for doc in documents {
            for w in doc {
                let w = w.as_ref();
                match counts.get_mut(w) {
                    Some(c) => *c += 1,
                    None => {
                        counts.insert(w.to_string(), 1);
                        order.push(w.to_string());
                    }
                }
            }
        }
        let mut v = Vocabulary::default();
        for w in order {
            if counts[&w] >= min_count.max(1) && !v.index.contains_key(&w) {
                v.index.insert(w.clone(), v.words.len() as u32);
                v.words.push(w);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.len() <= 2
    }

    /// Id of `word`, or `UNK_ID`.
    pub fn id(&self, word: &str) -> u32 {
        self.get(word).unwrap_or(UNK_ID)
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    /// Words in id order, specials first.
    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = TextError;
    fn try_from(words: Vec<String>) -> Result<Self, TextError> {
        Vocabulary::from_words(words)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Vec<String> {
        v.words
    }
}

/// Vocabulary over the stopword-free, lowercased words of a corpus.
pub fn build_vocabulary(corpus: &Corpus, min_count: usize) -> Result<Vocabulary, TextError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let docs: Vec<Vec<String>> = corpus
        .reviews()
        .iter()
        .map(|r| content_words(&tokenize(&r.text)))
        .collect();
    Ok(Vocabulary::from_documents(docs, min_count))
}
