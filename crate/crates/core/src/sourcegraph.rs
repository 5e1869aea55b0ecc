//! Horizontal visibility graphs and their projection onto sources.
//!
//! Days `i < j` see each other when every day strictly between them is lower
//! than both. Equal intermediate values block visibility.
//!
//! The source graph links the dominant source of day `i` (most documents,
//! ties to the lexicographically smallest name) with that of day `j` for each
//! visibility edge whose endpoints have different dominant sources.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::flowseries::{build_daily_series, DailySeries};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityGraph {
    pub node_count: usize,
    /// Undirected edges `(i, j)` with `i < j`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl VisibilityGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Linear-time construction with a stack of indices whose values strictly
/// decrease from bottom to top.
pub fn horizontal_visibility_graph<T: PartialOrd>(values: &[T]) -> VisibilityGraph {
    let mut edges = BTreeSet::new();
    let mut stack: Vec<usize> = Vec::with_capacity(values.len());
    for j in 0..values.len() {
        while let Some(&top) = stack.last() {
            edges.insert((top, j));
            if values[top] < values[j] {
                stack.pop();
            } else {
                if values[top] == values[j] {
                    stack.pop();
                }
                break;
            }
        }
        stack.push(j);
    }
    VisibilityGraph {
        node_count: values.len(),
        edges,
    }
}

pub fn series_visibility_graph<T: Scalar>(series: &DailySeries<T>) -> VisibilityGraph {
    horizontal_visibility_graph(series.values())
}

/// Daily counts per source over the corpus-wide date range.
pub fn per_source_series<T: Scalar>(corpus: &Corpus) -> Result<BTreeMap<String, DailySeries<T>>> {
    let (first, last) = corpus.date_span().ok_or(Error::EmptyCorpus)?;
    let start = first.date_naive();
    let days = (last.date_naive() - start).num_days() as usize + 1;
    let mut counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for doc in corpus {
        counts.entry(&doc.source).or_insert_with(|| vec![0; days])[(doc.date() - start).num_days() as usize] += 1;
    }
    counts
        .into_iter()
        .map(|(source, c)| {
            let s = DailySeries::new(start, c.into_iter().map(T::from_count).collect())?;
            Ok((source.to_owned(), s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceGraph {
    /// Every source in the corpus with its document count.
    pub nodes: BTreeMap<String, usize>,
    /// Source pairs `(a, b)` with `a < b` and their link counts.
    pub edges: BTreeMap<(String, String), usize>,
}

impl SourceGraph {
    pub fn degree(&self, source: &str) -> usize {
        self.edges
            .keys()
            .filter(|(a, b)| a == source || b == source)
            .count()
    }

    /// `src_a<TAB>src_b<TAB>weight` lines.
    pub fn edges_tsv(&self) -> String {
        let mut out = String::new();
        for ((a, b), w) in &self.edges {
            writeln!(out, "{a}\t{b}\t{w}").unwrap();
        }
        out
    }

    /// `source<TAB>documents<TAB>degree` lines.
    pub fn nodes_tsv(&self) -> String {
        let mut out = String::new();
        for (s, n) in &self.nodes {
            writeln!(out, "{s}\t{n}\t{}", self.degree(s)).unwrap();
        }
        out
    }
}

/// Source with the most documents on each day, `None` for empty days.
pub fn dominant_sources(corpus: &Corpus) -> Result<Vec<Option<String>>> {
    let per_source = per_source_series::<f64>(corpus)?;
    let days = per_source.values().next().map_or(0, DailySeries::len);
    Ok((0..days)
        .map(|i| {
            let mut best: Option<(&str, f64)> = None;
            // BTreeMap order makes the first maximum the smallest name.
            for (source, s) in &per_source {
                let v = s.values()[i];
                if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((source, v));
                }
            }
            best.map(|(s, _)| s.to_owned())
        })
        .collect())
}

pub fn source_link_graph(corpus: &Corpus) -> Result<SourceGraph> {
    let series = build_daily_series::<f64>(corpus)?;
    let hvg = series_visibility_graph(&series);
    let dominant = dominant_sources(corpus)?;
    let mut graph = SourceGraph::default();
    for doc in corpus {
        *graph.nodes.entry(doc.source.clone()).or_insert(0) += 1;
    }
    for &(i, j) in &hvg.edges {
        if let (Some(a), Some(b)) = (&dominant[i], &dominant[j]) {
            if a != b {
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                *graph.edges.entry(key).or_insert(0) += 1;
            }
        }
    }
    Ok(graph)
}
