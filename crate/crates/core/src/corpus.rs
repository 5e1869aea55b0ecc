//! Documents, tokenization and flow formation.
//!
//! A corpus file is JSON Lines, one document per line:
//!
//! ```text
//! {"id":"a1","published_at":"2016-06-24T08:00:00Z","source":"Daily Express","title":"...","body":"..."}
//! ```
//!
//! Terms are lowercase runs of Unicode letters and digits of at least two
//! characters. A multi-word term such as `terrorist act` is stored with its
//! tokens joined by a single space and matches adjacent tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_TOKEN_CHARS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(with = "rfc3339")]
    pub published_at: DateTime<Utc>,
    pub source: String,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl Document {
    pub fn date(&self) -> NaiveDate {
        self.published_at.date_naive()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if tokens(&self.title).next().is_none() && tokens(&self.body).next().is_none() {
            return Err("title and body contain no tokens".into());
        }
        Ok(())
    }
}

mod rfc3339 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::AutoSi, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse_timestamp(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad date {raw:?}")))
    }
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Validated document collection, sorted by `(published_at, id)` with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    /// Sorts the documents and checks the id and content invariants.
    /// Exact duplicates are merged.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen: HashMap<&str, &Document> = HashMap::with_capacity(documents.len());
        let mut keep = vec![true; documents.len()];
        for (i, doc) in documents.iter().enumerate() {
            doc.validate().map_err(|message| Error::InvalidDocument {
                id: doc.id.clone(),
                message,
            })?;
            match seen.get(doc.id.as_str()) {
                Some(prev) if *prev == doc => keep[i] = false,
                Some(_) => return Err(Error::DuplicateId(doc.id.clone())),
                None => {
                    seen.insert(&doc.id, doc);
                }
            }
        }
        drop(seen);
        let mut documents: Vec<Document> = documents
            .into_iter()
            .zip(keep)
            .filter_map(|(d, k)| k.then_some(d))
            .collect();
        documents.sort_by(|a, b| (a.published_at, &a.id).cmp(&(b.published_at, &b.id)));
        Ok(Corpus { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    /// Earliest and latest publication instants.
    pub fn date_span(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        Some((
            self.documents.first()?.published_at,
            self.documents.last()?.published_at,
        ))
    }

    // Subsets of a valid corpus stay sorted and unique.
    fn retain(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| keep(d)).cloned().collect(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    published_at: String,
    source: String,
    title: String,
    body: String,
    #[serde(default)]
    language: Option<String>,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

/// Parses JSON Lines corpus text. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        let published_at = parse_timestamp(&raw.published_at).ok_or_else(|| Error::BadDate {
            line: line_no,
            value: raw.published_at.clone(),
        })?;
        let doc = Document {
            id: raw.id,
            published_at,
            source: raw.source,
            title: raw.title,
            body: raw.body,
            language: raw.language,
        };
        doc.validate().map_err(|message| Error::MalformedRecord {
            line: line_no,
            message,
        })?;
        documents.push(doc);
    }
    if documents.is_empty() {
        return Err(Error::EmptyFile);
    }
    Corpus::new(documents)
}

/// Lowercase letter/digit runs of at least two characters.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .flat_map(|t| {
            // Lowercasing can introduce non-alphanumeric marks (e.g. 'İ').
            t.split(|c: char| !c.is_alphanumeric())
                .filter(|p| p.chars().count() >= MIN_TOKEN_CHARS)
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
}

/// Normalizes a term or phrase: tokens joined by single spaces. `None` when
/// nothing survives tokenization.
pub fn normalize_term(raw: &str) -> Option<String> {
    let toks: Vec<String> = tokens(raw).collect();
    (!toks.is_empty()).then(|| toks.join(" "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub doc_id: String,
    pub terms: Vec<String>,
    pub term_counts: BTreeMap<String, usize>,
}

impl TokenizedDoc {
    pub fn from_terms(doc_id: impl Into<String>, terms: Vec<String>) -> Self {
        let mut term_counts = BTreeMap::new();
        for t in &terms {
            *term_counts.entry(t.clone()).or_insert(0) += 1;
        }
        TokenizedDoc {
            doc_id: doc_id.into(),
            terms,
            term_counts,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Occurrences of a normalized term; phrases count adjacent token runs.
    pub fn count(&self, term: &str) -> usize {
        if !term.contains(' ') {
            return self.term_counts.get(term).copied().unwrap_or(0);
        }
        let parts: Vec<&str> = term.split(' ').collect();
        if parts.iter().any(|p| !self.term_counts.contains_key(*p)) {
            return 0;
        }
        self.terms
            .windows(parts.len())
            .filter(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
            .count()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.count(term) > 0
    }
}

pub fn tokenize(doc: &Document, stopwords: &BTreeSet<String>) -> TokenizedDoc {
    let terms = tokens(&doc.title)
        .chain(tokens(&doc.body))
        .filter(|t| !stopwords.contains(t))
        .collect();
    TokenizedDoc::from_terms(doc.id.clone(), terms)
}

pub fn tokenize_corpus(
    corpus: &Corpus,
    stopwords: &BTreeSet<String>,
) -> HashMap<String, TokenizedDoc> {
    corpus
        .documents
        .par_iter()
        .map(|d| (d.id.clone(), tokenize(d, stopwords)))
        .collect()
}

/// Parses a one-entry-per-line word list; `#` starts a comment.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(strip_comment)
        .flat_map(|l| tokens(l).collect::<Vec<_>>())
        .collect()
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Conjunction of disjunctive term groups, minus excluded terms.
///
/// Text form: groups separated by `&`, alternatives by `|`, and a group
/// prefixed with `!` lists excluded terms, e.g.
/// `brexit & referendum | petition & !sport | football`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowQuery {
    required_groups: Vec<BTreeSet<String>>,
    excluded_terms: BTreeSet<String>,
}

impl FlowQuery {
    pub fn new<G, T>(groups: G, excluded: impl IntoIterator<Item = T>) -> Result<Self>
    where
        G: IntoIterator,
        G::Item: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let normalize = |t: T| {
            normalize_term(t.as_ref())
                .ok_or_else(|| Error::InvalidQuery(format!("term {:?} has no tokens", t.as_ref())))
        };
        let mut required_groups = Vec::new();
        for group in groups {
            let group = group.into_iter().map(normalize).collect::<Result<BTreeSet<_>>>()?;
            if group.is_empty() {
                return Err(Error::InvalidQuery("empty term group".into()));
            }
            required_groups.push(group);
        }
        let excluded_terms = excluded.into_iter().map(normalize).collect::<Result<BTreeSet<_>>>()?;
        if required_groups.is_empty() {
            return Err(Error::InvalidQuery("no required term group".into()));
        }
        if let Some(t) = required_groups
            .iter()
            .flatten()
            .find(|t| excluded_terms.contains(*t))
        {
            return Err(Error::InvalidQuery(format!("{t:?} is both required and excluded")));
        }
        Ok(FlowQuery {
            required_groups,
            excluded_terms,
        })
    }

    pub fn required_groups(&self) -> &[BTreeSet<String>] {
        &self.required_groups
    }

    pub fn excluded_terms(&self) -> &BTreeSet<String> {
        &self.excluded_terms
    }

    pub fn matches(&self, doc: &TokenizedDoc) -> bool {
        self.required_groups
            .iter()
            .all(|g| g.iter().any(|t| doc.contains(t)))
            && !self.excluded_terms.iter().any(|t| doc.contains(t))
    }
}

impl FromStr for FlowQuery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut groups: Vec<Vec<&str>> = Vec::new();
        let mut excluded: Vec<&str> = Vec::new();
        for part in s.split('&') {
            let part = part.trim();
            let (negated, body) = match part.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, part),
            };
            let terms: Vec<&str> = body.split('|').map(str::trim).filter(|t| !t.is_empty()).collect();
            if terms.is_empty() {
                return Err(Error::InvalidQuery(format!("empty group in {s:?}")));
            }
            if negated {
                excluded.extend(terms);
            } else {
                groups.push(terms);
            }
        }
        FlowQuery::new(groups, excluded)
    }
}

impl fmt::Display for FlowQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .required_groups
            .iter()
            .map(|g| g.iter().map(String::as_str).collect::<Vec<_>>().join(" | "))
            .collect();
        if !self.excluded_terms.is_empty() {
            let ex: Vec<&str> = self.excluded_terms.iter().map(String::as_str).collect();
            parts.push(format!("!{}", ex.join(" | ")));
        }
        f.write_str(&parts.join(" & "))
    }
}

/// Keeps documents matching `query`. Documents without a tokenized form do
/// not match.
pub fn filter_by_query(
    corpus: &Corpus,
    query: &FlowQuery,
    tokenized: &HashMap<String, TokenizedDoc>,
) -> Corpus {
    corpus.retain(|d| tokenized.get(&d.id).is_some_and(|t| query.matches(t)))
}

/// Keeps documents whose UTC date lies in `[from, to]`.
pub fn filter_by_dates(corpus: &Corpus, from: NaiveDate, to: NaiveDate) -> Result<Corpus> {
    if from > to {
        return Err(Error::InvalidDateRange { from, to });
    }
    Ok(corpus.retain(|d| (from..=to).contains(&d.date())))
}
