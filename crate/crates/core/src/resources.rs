//! Word lists shipped with the crate.
//!
//! Each list is a plain-text file, one entry per line; the sentiment lexicon is
//! `word<TAB>score`. Blank lines and lines starting with `#` are ignored by the
//! parsers in [`crate::features`] and [`crate::textproc`].

/// English stopword list used by vocabulary construction and TF-IDF.
pub const STOPWORDS: &str = include_str!("../resources/stopwords.txt");
/// Abbreviations that do not end a sentence.
pub const ABBREVIATIONS: &str = include_str!("../resources/abbreviations.txt");
/// Positive cue words (great, excellent, awesome, ...).
pub const POSITIVE_CUES: &str = include_str!("../resources/positive_cues.txt");
/// Negative cue words (crash, freeze, hang, slow, annoying, ...).
pub const NEGATIVE_CUES: &str = include_str!("../resources/negative_cues.txt");
/// Word → integer score in {−2..2}.
pub const SENTIMENT: &str = include_str!("../resources/sentiment.tsv");

/// Iterates the non-empty, non-comment lines of a list resource.
pub fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}
