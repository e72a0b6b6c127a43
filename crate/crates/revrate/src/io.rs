//! Readers and writers for corpora, annotations, lexicons, embeddings and
//! dependency parses.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use revrate_core::corpus::{Corpus, CorpusError, LoadMode, Review, StarRating};
use revrate_core::deptree::parse_conllu_document;
use revrate_core::features::{EmbeddingTable, Lexicon, Lexicons, SentimentLexicon};
use revrate_core::pipeline::Parses;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// `.csv` files are CSV; everything else is JSONL.
    pub fn infer(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: u64, reason: String },
    #[error("line {line}: duplicate review id {id:?}")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: rating {value} is outside 1..=5")]
    RatingOutOfRange { line: u64, value: i64 },
    #[error("line {line}: review {id:?} has empty text")]
    EmptyText { line: u64, id: String },
}

/// One review as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub app: String,
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub rating: Option<i64>,
}

impl From<&Review> for ReviewRecord {
    fn from(r: &Review) -> Self {
        ReviewRecord {
            app: r.app_id.clone(),
            id: r.review_id.clone(),
            text: r.text.clone(),
            rating: r.rating.map(|s| i64::from(s.value())),
        }
    }
}

fn push_record(corpus: &mut Corpus, line: u64, rec: ReviewRecord) -> Result<(), LoadError> {
    let rating = match rec.rating {
        None => None,
        Some(v) => Some(StarRating::new(v).map_err(|_| LoadError::RatingOutOfRange { line, value: v })?),
    };
    corpus
        .push(Review::new(rec.app, rec.id, rec.text, rating))
        .map_err(|e| match e {
            CorpusError::DuplicateId(id) => LoadError::DuplicateId { line, id },
            CorpusError::EmptyText(id) => LoadError::EmptyText { line, id },
        })
}

/// Parses a JSONL corpus; blank lines are skipped.
pub fn parse_reviews_jsonl(text: &str, mode: LoadMode) -> Result<Corpus, LoadError> {
    let mut corpus = Corpus::new(mode);
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: ReviewRecord = serde_json::from_str(raw).map_err(|e| LoadError::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
        push_record(&mut corpus, line, rec)?;
    }
    Ok(corpus)
}

/// Parses a CSV corpus with header `app,id,text,rating`; an empty rating
/// cell means unrated.
pub fn parse_reviews_csv(text: &str, mode: LoadMode) -> Result<Corpus, LoadError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let malformed = |line: u64, e: &dyn std::fmt::Display| LoadError::MalformedRecord {
        line,
        reason: e.to_string(),
    };
    let headers = reader.headers().map_err(|e| malformed(1, &e))?.clone();
    if headers != vec!["app", "id", "text", "rating"] {
        let found = headers.iter().collect::<Vec<_>>().join(",");
        return Err(malformed(
            1,
            &format!("expected header app,id,text,rating, found {found}"),
        ));
    }
    let mut corpus = Corpus::new(mode);
    for row in reader.records() {
        let row = row.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), &e))?;
        let line = row.position().map_or(0, |p| p.line());
        let rec: ReviewRecord = row.deserialize(Some(&headers)).map_err(|e| malformed(line, &e))?;
        push_record(&mut corpus, line, rec)?;
    }
    Ok(corpus)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

pub fn write_bytes(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::write(path, e))
}

pub fn load_reviews(path: &Path, format: Option<Format>, mode: LoadMode) -> Result<Corpus, CliError> {
    let text = read_text(path)?;
    let parsed = match format.unwrap_or_else(|| Format::infer(path)) {
        Format::Jsonl => parse_reviews_jsonl(&text, mode),
        Format::Csv => parse_reviews_csv(&text, mode),
    };
    parsed.map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn reviews_to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for r in corpus.reviews() {
        out.push_str(&serde_json::to_string(&ReviewRecord::from(r)).expect("plain record"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Deserialize)]
struct AnnotationRecord {
    id: String,
    ratings: Vec<i64>,
}

/// `{"id", "ratings": [...]}` lines in file order.
pub fn parse_annotations(text: &str) -> Result<Vec<(String, Vec<StarRating>)>, LoadError> {
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(raw).map_err(|e| LoadError::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
        if seen.insert(rec.id.clone(), line).is_some() {
            return Err(LoadError::DuplicateId { line, id: rec.id });
        }
        let ratings = rec
            .ratings
            .iter()
            .map(|&v| StarRating::new(v).map_err(|_| LoadError::RatingOutOfRange { line, value: v }))
            .collect::<Result<_, _>>()?;
        out.push((rec.id, ratings));
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<(String, Vec<StarRating>)>, CliError> {
    parse_annotations(&read_text(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Shipped lexicons with any of the three lists replaced from files.
pub fn load_lexicons(
    positive: Option<&Path>,
    negative: Option<&Path>,
    sentiment: Option<&Path>,
) -> Result<Lexicons, CliError> {
    let mut lex = Lexicons::default();
    let bad = |p: &Path, e: &dyn std::fmt::Display| CliError::data(format!("{}: {e}", p.display()));
    if let Some(p) = positive {
        lex.positive = Lexicon::parse("positive", &read_text(p)?).map_err(|e| bad(p, &e))?;
    }
    if let Some(p) = negative {
        lex.negative = Lexicon::parse("negative", &read_text(p)?).map_err(|e| bad(p, &e))?;
    }
    if let Some(p) = sentiment {
        lex.sentiment = SentimentLexicon::parse(&read_text(p)?).map_err(|e| bad(p, &e))?;
    }
    Ok(lex)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, CliError> {
    EmbeddingTable::from_text(&read_text(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Groups keyed CoNLL-U sentences by review id, ordered by their `sent`
/// number (file order when absent).
pub fn parse_parses(text: &str) -> Result<Parses, String> {
    let sentences = parse_conllu_document(text).map_err(|e| e.to_string())?;
    let mut grouped: BTreeMap<String, Vec<(usize, usize, _)>> = BTreeMap::new();
    for (order, s) in sentences.into_iter().enumerate() {
        let id = s
            .review_id
            .ok_or_else(|| format!("sentence {} has no `# review_id = <id>` comment", order + 1))?;
        grouped
            .entry(id)
            .or_default()
            .push((s.sentence.unwrap_or(usize::MAX), order, s.tree));
    }
    Ok(grouped
        .into_iter()
        .map(|(id, mut trees)| {
            trees.sort_by_key(|t| (t.0, t.1));
            (id, trees.into_iter().map(|t| t.2).collect())
        })
        .collect())
}

pub fn load_parses(path: &Path) -> Result<Parses, CliError> {
    parse_parses(&read_text(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_corpus() {
        let text = r#"{"app":"a","id":"r1","text":"Great","rating":5}
{"app":"a","id":"r2","text":"Meh","rating":3}

{"app":"b","id":"r3","text":"Crashes","rating":1}
"#;
        let c = parse_reviews_jsonl(text, LoadMode::default()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.apps().collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(c.reviews()[2].rating.unwrap().value(), 1);
        assert_eq!(reviews_to_jsonl(&c), text.replace("\n\n", "\n"));
    }

    #[test]
    fn jsonl_errors_name_the_line() {
        let bad_rating = "{\"app\":\"a\",\"id\":\"r1\",\"text\":\"x\",\"rating\":5}\n{\"app\":\"a\",\"id\":\"r2\",\"text\":\"x\",\"rating\":6}";
        assert_eq!(
            parse_reviews_jsonl(bad_rating, LoadMode::default()).unwrap_err(),
            LoadError::RatingOutOfRange { line: 2, value: 6 }
        );
        let dup = "{\"app\":\"a\",\"id\":\"r1\",\"text\":\"x\"}\n{\"app\":\"a\",\"id\":\"r1\",\"text\":\"y\"}";
        assert_eq!(
            parse_reviews_jsonl(dup, LoadMode::default()).unwrap_err(),
            LoadError::DuplicateId {
                line: 2,
                id: "r1".into()
            }
        );
        let empty = "{\"app\":\"a\",\"id\":\"r1\",\"text\":\"  \"}";
        assert!(matches!(
            parse_reviews_jsonl(empty, LoadMode::default()),
            Err(LoadError::EmptyText { line: 1, .. })
        ));
        assert!(parse_reviews_jsonl(empty, LoadMode { allow_empty_text: true }).is_ok());
        assert!(matches!(
            parse_reviews_jsonl("{\"app\":1}", LoadMode::default()),
            Err(LoadError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn csv_corpus() {
        let text = "app,id,text,rating\na,r1,\"Great, really\",5\na,r2,\"He said \"\"no\"\"\",\n";
        let c = parse_reviews_csv(text, LoadMode::default()).unwrap();
        assert_eq!(c.reviews()[0].text, "Great, really");
        assert_eq!(c.reviews()[1].text, "He said \"no\"");
        assert_eq!(c.reviews()[1].rating, None);
        let bad = "app,id,text,rating\na,r1,x,5\na,r2,y,0\n";
        assert_eq!(
            parse_reviews_csv(bad, LoadMode::default()).unwrap_err(),
            LoadError::RatingOutOfRange { line: 3, value: 0 }
        );
        assert!(parse_reviews_csv("id,app,text,rating\n", LoadMode::default()).is_err());
    }

    #[test]
    fn annotations() {
        let a = parse_annotations("{\"id\":\"r1\",\"ratings\":[5,4,5]}\n{\"id\":\"r2\",\"ratings\":[1,1]}\n").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].1.len(), 2);
        assert_eq!(
            parse_annotations("{\"id\":\"r1\",\"ratings\":[9]}").unwrap_err(),
            LoadError::RatingOutOfRange { line: 1, value: 9 }
        );
    }

    #[test]
    fn parses_grouped_by_review() {
        let doc = "# review_id = r1 sent = 2\n1\tb\t_\t_\t_\t_\t0\t_\t_\t_\n\n\
                   # review_id = r1 sent = 1\n1\ta\t_\t_\t_\t_\t0\t_\t_\t_\n2\tx\t_\t_\t_\t_\t1\t_\t_\t_\n\n\
                   # review_id = r2\n1\tc\t_\t_\t_\t_\t0\t_\t_\t_\n";
        let p = parse_parses(doc).unwrap();
        assert_eq!(p["r1"].len(), 2);
        assert_eq!(p["r1"][0].forms(), ["a", "x"]);
        assert_eq!(p["r2"][0].forms(), ["c"]);
        assert!(parse_parses("1\ta\t_\t_\t_\t_\t0\t_\t_\t_\n").is_err());
    }
}
