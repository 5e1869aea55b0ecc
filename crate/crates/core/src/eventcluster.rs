//! Keyword-seeded spherical k-means.
//!
//! Documents are L2-normalized tf-idf vectors and `Sim(d, C)` is their dot
//! product with a unit centroid. Each iteration assigns every document to its
//! most similar centroid (ties to the lowest index), records
//!
//! ```text
//! Q = Σ_j Σ_{d ∈ C_j} Sim(d, C_j)
//! ```
//!
//! and rebuilds each centroid from the mean of its members, keeping the
//! `top_t` heaviest terms. The loop stops once an assignment pass changes
//! nothing. Each pass costs exactly `k · N` similarity evaluations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{normalize_term, TokenizedDoc};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::termbase::tfidf_weight;

pub const DEFAULT_TOP_T: usize = 25;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Sparse non-negative vector sorted by term, without zero entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T = f64> {
    entries: Vec<(String, T)>,
}

impl<T: Scalar> SparseVector<T> {
    /// Builds from `(term, weight)` pairs; repeated terms are summed and
    /// non-positive weights dropped.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Self {
        let mut map: BTreeMap<String, T> = BTreeMap::new();
        for (term, w) in pairs {
            let e = map.entry(term.into()).or_insert_with(T::zero);
            *e = *e + w;
        }
        SparseVector {
            entries: map.into_iter().filter(|(_, w)| *w > T::zero()).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> + '_ {
        self.entries.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn get(&self, term: &str) -> Option<T> {
        self.entries
            .binary_search_by(|(t, _)| t.as_str().cmp(term))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|(_, w)| *w * *w).sum::<T>().sqrt()
    }

    /// Unit-length copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm();
        (norm > T::zero()).then(|| SparseVector {
            entries: self.entries.iter().map(|(t, w)| (t.clone(), *w / norm)).collect(),
        })
    }

    pub fn dot(&self, other: &Self) -> T {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = T::zero();
        while let (Some((ta, wa)), Some((tb, wb))) = (a.peek(), b.peek()) {
            match ta.cmp(tb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum = sum + *wa * *wb;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector<T = f64> {
    pub doc_id: String,
    pub vector: SparseVector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vectorized<T = f64> {
    pub vectors: Vec<DocVector<T>>,
    /// Documents whose every weight is zero.
    pub omitted: Vec<String>,
}

/// tf-idf vectors, L2-normalized. Terms missing from `df` get no weight.
pub fn vectorize<'a, T, I>(tokenized: I, df: &HashMap<String, usize>, n: usize) -> Vectorized<T>
where
    T: Scalar,
    I: IntoIterator<Item = &'a TokenizedDoc>,
{
    let docs: Vec<&TokenizedDoc> = tokenized.into_iter().collect();
    let built: Vec<(String, Option<SparseVector<T>>)> = docs
        .par_iter()
        .map(|doc| {
            let raw = SparseVector::from_pairs(doc.term_counts.iter().filter_map(|(term, &tf)| {
                df.get(term).map(|&d| (term.as_str(), tfidf_weight::<T>(tf, d, n)))
            }));
            (doc.doc_id.clone(), raw.normalized())
        })
        .collect();
    let mut out = Vectorized {
        vectors: Vec::with_capacity(built.len()),
        omitted: Vec::new(),
    };
    for (doc_id, vector) in built {
        match vector {
            Some(vector) => out.vectors.push(DocVector { doc_id, vector }),
            None => out.omitted.push(doc_id),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centroid<T = f64> {
    /// Cluster label, 1-based.
    pub index: usize,
    pub vector: SparseVector<T>,
    pub seed_terms: Vec<String>,
}

/// One centroid per group of event terms (each term alone by default),
/// weighted uniformly over the group's tokens.
pub fn seed_centroids<T: Scalar, S: AsRef<str>>(
    event_terms: &[S],
    groups: Option<&[Vec<S>]>,
) -> Result<Vec<Centroid<T>>> {
    if event_terms.is_empty() {
        return Err(Error::NoEventTerms);
    }
    let norm = |t: &S| {
        normalize_term(t.as_ref())
            .ok_or_else(|| Error::InvalidSeeds(format!("term {:?} has no tokens", t.as_ref())))
    };
    let terms: Vec<String> = event_terms.iter().map(norm).collect::<Result<_>>()?;
    let groups: Vec<Vec<String>> = match groups {
        None => terms.iter().map(|t| vec![t.clone()]).collect(),
        Some(gs) => {
            let gs: Vec<Vec<String>> = gs
                .iter()
                .map(|g| g.iter().map(norm).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let mut seen = BTreeSet::new();
            for g in &gs {
                if g.is_empty() {
                    return Err(Error::InvalidSeeds("empty group".into()));
                }
                for t in g {
                    if !seen.insert(t.clone()) {
                        return Err(Error::InvalidSeeds(format!("{t:?} appears in two groups")));
                    }
                }
            }
            let all: BTreeSet<String> = terms.iter().cloned().collect();
            if seen != all {
                return Err(Error::InvalidSeeds("groups must partition the event terms".into()));
            }
            gs
        }
    };
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(i, seed_terms)| {
            let tokens: BTreeSet<&str> = seed_terms.iter().flat_map(|t| t.split(' ')).collect();
            let vector = SparseVector::from_pairs(tokens.into_iter().map(|t| (t, T::one())))
                .normalized()
                .expect("seed group has tokens");
            Centroid {
                index: i + 1,
                vector,
                seed_terms,
            }
        })
        .collect())
}

pub fn sim<T: Scalar>(d: &DocVector<T>, c: &Centroid<T>) -> T {
    d.vector.dot(&c.vector)
}

/// Cluster of each document (a position in the centroid list) and its
/// similarity to that centroid. `None` marks the unassigned bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignments<T = f64> {
    pub clusters: Vec<Option<usize>>,
    pub sims: Vec<T>,
}

impl<T: Scalar> Assignments<T> {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.clusters
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == Some(cluster))
            .map(|(i, _)| i)
    }

    /// Sum of member similarities, excluding the unassigned bucket.
    pub fn quality(&self) -> T {
        self.sims.iter().copied().sum()
    }
}

pub fn assign<T: Scalar>(vectors: &[DocVector<T>], centroids: &[Centroid<T>]) -> Assignments<T> {
    assign_counted(vectors, centroids, &AtomicU64::new(0))
}

/// [`assign`], adding the number of similarity evaluations to `counter`.
pub fn assign_counted<T: Scalar>(
    vectors: &[DocVector<T>],
    centroids: &[Centroid<T>],
    counter: &AtomicU64,
) -> Assignments<T> {
    let picks: Vec<(Option<usize>, T)> = vectors
        .par_iter()
        .map(|d| {
            let mut evaluated = 0u64;
            let mut best: (Option<usize>, T) = (None, T::zero());
            for (j, c) in centroids.iter().enumerate() {
                let s = sim(d, c);
                evaluated += 1;
                if s > best.1 {
                    best = (Some(j), s);
                }
            }
            counter.fetch_add(evaluated, Ordering::Relaxed);
            best
        })
        .collect();
    let (clusters, sims) = picks.into_iter().unzip();
    Assignments { clusters, sims }
}

/// Mean of each cluster's members truncated to the `top_t` heaviest terms
/// (ties by term) and renormalized. Empty clusters keep `previous`.
pub fn recompute_centroids<T: Scalar>(
    assignments: &Assignments<T>,
    vectors: &[DocVector<T>],
    top_t: usize,
    previous: &[Centroid<T>],
) -> Vec<Centroid<T>> {
    previous
        .par_iter()
        .enumerate()
        .map(|(j, prev)| {
            let mut sums: BTreeMap<&str, T> = BTreeMap::new();
            let mut count = 0usize;
            for i in assignments.members(j) {
                count += 1;
                for (term, w) in vectors[i].vector.iter() {
                    let e = sums.entry(term).or_insert_with(T::zero);
                    *e = *e + w;
                }
            }
            if count == 0 {
                return prev.clone();
            }
            let size = T::from_count(count);
            let mut mean: Vec<(&str, T)> = sums.into_iter().map(|(t, s)| (t, s / size)).collect();
            mean.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("weights are finite")
                    .then_with(|| a.0.cmp(b.0))
            });
            mean.truncate(top_t.max(1));
            match SparseVector::from_pairs(mean).normalized() {
                Some(vector) => Centroid {
                    index: prev.index,
                    vector,
                    seed_terms: prev.seed_terms.clone(),
                },
                None => prev.clone(),
            }
        })
        .collect()
}

/// `Q` evaluated directly from similarities.
pub fn quality_q<T: Scalar>(
    assignments: &Assignments<T>,
    vectors: &[DocVector<T>],
    centroids: &[Centroid<T>],
) -> T {
    assignments
        .clusters
        .iter()
        .zip(vectors)
        .filter_map(|(c, d)| c.map(|j| sim(d, &centroids[j])))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T = f64> {
    pub doc_ids: Vec<String>,
    pub assignments: Assignments<T>,
    /// Centroids the final assignment was made against.
    pub centroids: Vec<Centroid<T>>,
    /// `Q` after each assignment pass.
    pub q_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Similarity evaluations per assignment pass.
    pub sim_evaluations: Vec<u64>,
}

pub fn kmeans_seeded<T: Scalar>(
    vectors: &[DocVector<T>],
    seeds: &[Centroid<T>],
    max_iter: usize,
    top_t: usize,
) -> Clustering<T> {
    let mut centroids = seeds.to_vec();
    let mut q_history = Vec::new();
    let mut sim_evaluations = Vec::new();
    let mut previous: Option<Assignments<T>> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        let counter = AtomicU64::new(0);
        let current = assign_counted(vectors, &centroids, &counter);
        sim_evaluations.push(counter.into_inner());
        q_history.push(current.quality());
        let stable = previous.as_ref().is_some_and(|p| p.clusters == current.clusters);
        previous = Some(current);
        if stable {
            converged = true;
            break;
        }
        if iterations == max_iter {
            break;
        }
        centroids = recompute_centroids(previous.as_ref().unwrap(), vectors, top_t, &centroids);
    }
    Clustering {
        doc_ids: vectors.iter().map(|d| d.doc_id.clone()).collect(),
        assignments: previous.expect("at least one pass"),
        centroids,
        q_history,
        iterations,
        converged,
        sim_evaluations,
    }
}

#[derive(Debug, Serialize)]
struct WeightedTerm<'a> {
    term: &'a str,
    weight: f64,
}

#[derive(Debug, Serialize)]
struct Member<'a> {
    doc_id: &'a str,
    sim: f64,
}

#[derive(Debug, Serialize)]
struct ClusterEntry<'a> {
    index: usize,
    seed_terms: &'a [String],
    member_count: usize,
    centroid_terms: Vec<WeightedTerm<'a>>,
    members: Vec<Member<'a>>,
}

#[derive(Debug, Serialize)]
struct ClusterReport<'a> {
    iterations: usize,
    converged: bool,
    q_history: Vec<f64>,
    clusters: Vec<ClusterEntry<'a>>,
    unassigned: Vec<&'a str>,
}

impl<T: Scalar> Clustering<T> {
    /// Planted label of each clustered document, 1-based, `None` if unassigned.
    pub fn label_of(&self, i: usize) -> Option<usize> {
        self.assignments.clusters[i].map(|j| self.centroids[j].index)
    }

    /// JSON report: per cluster its seeds, heaviest centroid terms and
    /// members (most similar first), plus `Q` history and iteration count.
    pub fn report_json(&self) -> String {
        let clusters = self
            .centroids
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut terms: Vec<WeightedTerm> = c
                    .vector
                    .iter()
                    .map(|(term, w)| WeightedTerm {
                        term,
                        weight: w.to_f64().unwrap(),
                    })
                    .collect();
                terms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(b.term)));
                let mut members: Vec<Member> = self
                    .assignments
                    .members(j)
                    .map(|i| Member {
                        doc_id: &self.doc_ids[i],
                        sim: self.assignments.sims[i].to_f64().unwrap(),
                    })
                    .collect();
                members.sort_by(|a, b| b.sim.total_cmp(&a.sim).then_with(|| a.doc_id.cmp(b.doc_id)));
                ClusterEntry {
                    index: c.index,
                    seed_terms: &c.seed_terms,
                    member_count: members.len(),
                    centroid_terms: terms,
                    members,
                }
            })
            .collect();
        let report = ClusterReport {
            iterations: self.iterations,
            converged: self.converged,
            q_history: self.q_history.iter().map(|q| q.to_f64().unwrap()).collect(),
            clusters,
            unassigned: self
                .assignments
                .clusters
                .iter()
                .zip(&self.doc_ids)
                .filter(|(c, _)| c.is_none())
                .map(|(_, id)| id.as_str())
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
        out.push('\n');
        out
    }
}
