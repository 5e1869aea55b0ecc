//! Brute-force reference implementations, written directly from the
//! definitions and sharing no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Pearson correlation, literal transcription of the windowed formula:
/// deviations first, then the three sums, then one square root.
pub fn pearson_oracle(window: &[f64], template: &[f64]) -> Option<f64> {
    let k = window.len();
    assert_eq!(k, template.len());
    let xbar: f64 = window.iter().sum::<f64>() / k as f64;
    let pbar: f64 = template.iter().sum::<f64>() / k as f64;
    let dx: Vec<f64> = window.iter().map(|x| x - xbar).collect();
    let dp: Vec<f64> = template.iter().map(|p| p - pbar).collect();
    let mut num = 0.0;
    let mut sx = 0.0;
    let mut sp = 0.0;
    for i in 0..k {
        num += dx[i] * dp[i];
        sx += dx[i] * dx[i];
        sp += dp[i] * dp[i];
    }
    if sx == 0.0 || sp == 0.0 {
        return None;
    }
    Some(num / (sx * sp).sqrt())
}

/// O(n³) horizontal visibility: every pair, every intermediate point.
pub fn hvg_oracle<T: PartialOrd + Copy>(values: &[T]) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let mut visible = true;
            for m in i + 1..j {
                if !(values[i] > values[m] && values[j] > values[m]) {
                    visible = false;
                }
            }
            if visible {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// Piecewise-linear interpolation by scanning every segment.
pub fn interpolate_oracle(points: &[(f64, f64)], x: f64) -> f64 {
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x == x1 {
            return y1;
        }
        if x >= x0 && x < x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    panic!("x = {x} outside the template")
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTerm {
    pub term: String,
    pub df: usize,
    pub tf_total: usize,
    pub weight: f64,
    /// Σ_d tf(t,d)·ln(N/df), accumulated per document.
    pub per_doc_sum: f64,
}

/// Recomputes the TF-IDF ranking from raw term lists: for each distinct term
/// scan every document, counting occurrences by hand.
pub fn tfidf_oracle(docs: &[Vec<String>]) -> Vec<OracleTerm> {
    let nonempty: Vec<&Vec<String>> = docs.iter().filter(|d| !d.is_empty()).collect();
    let n = nonempty.len();
    let vocab: BTreeSet<&String> = nonempty.iter().flat_map(|d| d.iter()).collect();
    let mut out = Vec::new();
    for term in vocab {
        let tfs: Vec<usize> = nonempty
            .iter()
            .map(|d| d.iter().filter(|t| *t == term).count())
            .collect();
        let df = tfs.iter().filter(|&&c| c > 0).count();
        let tf_total: usize = tfs.iter().sum();
        let idf = (n as f64 / df as f64).ln();
        let per_doc_sum = tfs.iter().map(|&c| c as f64 * idf).sum();
        out.push(OracleTerm {
            term: term.clone(),
            df,
            tf_total,
            weight: tf_total as f64 * idf,
            per_doc_sum,
        });
    }
    // Selection sort: repeatedly take the max (weight, then smallest term).
    let mut ranked = Vec::new();
    while !out.is_empty() {
        let mut best = 0;
        for i in 1..out.len() {
            let (a, b) = (&out[i], &out[best]);
            if a.weight > b.weight || (a.weight == b.weight && a.term < b.term) {
                best = i;
            }
        }
        ranked.push(out.remove(best));
    }
    ranked
}

/// Cosine similarity of two dense maps.
pub fn cosine_oracle(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
