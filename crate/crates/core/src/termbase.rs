//! Term significance and the event lexicon.
//!
//! A term's weight in one document is `tf · ln(N / df)`, where `N` counts the
//! non-empty documents. The corpus weight is the sum over documents, which
//! equals `tf_total · ln(N / df)`; that product is the canonical evaluation
//! so ties are exact and independent of accumulation order.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{filter_by_query, normalize_term, strip_comment, Corpus, FlowQuery, TokenizedDoc};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_TOP_M: usize = 200;

/// Event words reported for the Brexit flow.
pub const DEFAULT_EVENT_WORDS: [&str; 6] = [
    "protest",
    "referendum",
    "petition",
    "signatures",
    "demonstration",
    "terrorist act",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TermWeight<T = f64> {
    pub term: String,
    pub tf_total: usize,
    pub df: usize,
    pub weight: T,
}

/// `tf · ln(n / df)`.
pub fn tfidf_weight<T: Scalar>(tf: usize, df: usize, n: usize) -> T {
    T::from_count(tf) * (T::from_count(n) / T::from_count(df)).ln()
}

/// Ranks every term by corpus TF-IDF weight, descending, ties by term.
/// Empty documents are ignored and do not count toward `N`.
pub fn compute_tfidf<'a, T, I>(tokenized: I) -> Result<Vec<TermWeight<T>>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a TokenizedDoc>,
{
    let docs: Vec<&TokenizedDoc> = tokenized.into_iter().filter(|d| !d.is_empty()).collect();
    if docs.is_empty() {
        return Err(Error::NoTerms);
    }
    let n = docs.len();
    let stats = docs
        .par_iter()
        .fold(HashMap::<&str, (usize, usize)>::new, |mut acc, doc| {
            for (term, &count) in &doc.term_counts {
                let e = acc.entry(term.as_str()).or_default();
                e.0 += count;
                e.1 += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (term, (tf, df)) in b {
                let e = a.entry(term).or_default();
                e.0 += tf;
                e.1 += df;
            }
            a
        });
    let mut ranked: Vec<TermWeight<T>> = stats
        .into_iter()
        .map(|(term, (tf_total, df))| TermWeight {
            term: term.to_owned(),
            tf_total,
            df,
            weight: tfidf_weight(tf_total, df, n),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .expect("weights are finite")
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(ranked)
}

/// Document frequency of every ranked term.
pub fn document_frequencies<T>(ranked: &[TermWeight<T>]) -> HashMap<String, usize> {
    ranked.iter().map(|t| (t.term.clone(), t.df)).collect()
}

/// TSV with columns `rank term df tf_total weight`, ranks from 1.
pub fn terms_to_tsv<T: Scalar>(ranked: &[TermWeight<T>]) -> String {
    let mut out = String::from("rank\tterm\tdf\ttf_total\tweight\n");
    for (i, t) in ranked.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", i + 1, t.term, t.df, t.tf_total, t.weight).unwrap();
    }
    out
}

/// Normalized event words and phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLexicon {
    entries: BTreeSet<String>,
}

impl EventLexicon {
    pub fn from_terms<S: AsRef<str>>(terms: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut entries = BTreeSet::new();
        for (i, t) in terms.into_iter().enumerate() {
            let entry = normalize_term(t.as_ref()).ok_or_else(|| Error::InvalidLexiconEntry {
                line: i + 1,
                entry: t.as_ref().to_owned(),
            })?;
            entries.insert(entry);
        }
        if entries.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(EventLexicon { entries })
    }

    /// One entry per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let entry = normalize_term(line).ok_or_else(|| Error::InvalidLexiconEntry {
                line: i + 1,
                entry: line.to_owned(),
            })?;
            entries.insert(entry);
        }
        if entries.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(EventLexicon { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }
}

impl Default for EventLexicon {
    fn default() -> Self {
        EventLexicon::from_terms(DEFAULT_EVENT_WORDS).expect("default lexicon is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTerm<T = f64> {
    pub term: String,
    pub weight: T,
}

/// Lexicon entries among the `top_m` ranked terms, strongest first.
///
/// A phrase scores the minimum weight of its tokens; it matches when every
/// token is in the top `top_m` and the tokens occur adjacently in at least one
/// of `tokenized`.
pub fn match_event_terms<'a, T, I>(
    ranked: &[TermWeight<T>],
    lexicon: &EventLexicon,
    top_m: usize,
    tokenized: I,
) -> Vec<EventTerm<T>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a TokenizedDoc>,
{
    let top: HashMap<&str, T> = ranked
        .iter()
        .take(top_m)
        .map(|t| (t.term.as_str(), t.weight))
        .collect();
    let mut phrases: Vec<(&str, T)> = Vec::new();
    let mut matched: Vec<EventTerm<T>> = Vec::new();
    for entry in &lexicon.entries {
        let weights: Option<Vec<T>> = entry.split(' ').map(|tok| top.get(tok).copied()).collect();
        let Some(weights) = weights else { continue };
        let score = weights.into_iter().fold(T::infinity(), T::min);
        if entry.contains(' ') {
            phrases.push((entry, score));
        } else {
            matched.push(EventTerm {
                term: entry.clone(),
                weight: score,
            });
        }
    }
    if !phrases.is_empty() {
        let mut pending: Vec<Option<(&str, T)>> = phrases.into_iter().map(Some).collect();
        for doc in tokenized {
            for slot in pending.iter_mut() {
                if let Some((phrase, score)) = *slot {
                    if doc.contains(phrase) {
                        matched.push(EventTerm {
                            term: phrase.to_owned(),
                            weight: score,
                        });
                        *slot = None;
                    }
                }
            }
            if pending.iter().all(Option::is_none) {
                break;
            }
        }
    }
    matched.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .expect("weights are finite")
            .then_with(|| a.term.cmp(&b.term))
    });
    matched
}

/// Adds `event_terms` as one more required group of `base`.
pub fn augment_query<S: AsRef<str>>(base: &FlowQuery, event_terms: &[S]) -> Result<FlowQuery> {
    if event_terms.is_empty() {
        return Err(Error::NoEventTerms);
    }
    let mut groups: Vec<Vec<&str>> = base
        .required_groups()
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    groups.push(event_terms.iter().map(AsRef::as_ref).collect());
    FlowQuery::new(groups, base.excluded_terms().iter().map(String::as_str))
}

pub fn filter_event_documents<S: AsRef<str>>(
    corpus: &Corpus,
    tokenized: &HashMap<String, TokenizedDoc>,
    base: &FlowQuery,
    event_terms: &[S],
) -> Result<Corpus> {
    let query = augment_query(base, event_terms)?;
    Ok(filter_by_query(corpus, &query, tokenized))
}
