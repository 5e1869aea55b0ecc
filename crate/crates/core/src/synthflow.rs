//! Synthetic flows with planted ground truth.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64` and split into independent streams with
//! `set_stream`: series noise and corpus draws never share a stream, so each
//! is reproducible on its own and identical across platforms.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_term, tokens, Corpus, Document};
use crate::error::{Error, Result};
use crate::flowseries::{sample_template, DailySeries, LifecycleTemplate};
use crate::scalar::Scalar;

const SERIES_STREAM: u64 = 1;
const CORPUS_STREAM: u64 = 2;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 6, 1).unwrap()
}

/// A lifecycle template planted at `plant_shift` with `plant_scale` days on
/// a constant baseline, plus clamped Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstSpec {
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    pub length_days: usize,
    pub plant_shift: usize,
    pub plant_scale: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub baseline: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl BurstSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if self.plant_scale < 2 {
            return bad("plant_scale must be at least 2");
        }
        if self.plant_shift + self.plant_scale > self.length_days {
            return bad("plant_shift + plant_scale exceeds length_days");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be positive");
        }
        if !(self.baseline >= 0.0 && self.baseline.is_finite()) {
            return bad("baseline must be non-negative");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be non-negative");
        }
        Ok(())
    }
}

pub fn generate_burst_series<T: Scalar>(
    template: &LifecycleTemplate<T>,
    spec: &BurstSpec,
) -> Result<DailySeries<T>> {
    spec.validate()?;
    let samples = sample_template(template, spec.plant_scale)?;
    let mut values = vec![spec.baseline; spec.length_days];
    for (i, p) in samples.iter().enumerate() {
        values[spec.plant_shift + i] += spec.amplitude * p.to_f64().unwrap();
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
        let mut rng = stream_rng(spec.rng_seed, SERIES_STREAM);
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    DailySeries::new(
        spec.start_date,
        values.into_iter().map(|v| T::lit(v.max(0.0))).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedCluster {
    pub keyword: String,
    pub topical_vocab: Vec<String>,
    pub doc_count: usize,
}

fn default_per_doc() -> usize {
    6
}

fn default_sources() -> Vec<String> {
    ["Daily Courier", "Evening Ledger", "Morning Herald", "The Observer Post", "Wire Service"]
        .map(String::from)
        .to_vec()
}

/// Documents drawn per planted cluster. Each contains its cluster keyword,
/// `topical_per_doc` distinct topical terms and `shared_per_doc` distinct
/// background terms; every document also carries the `flow_terms`.
/// `background_docs` extra documents carry no keyword and only shared terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub clusters: Vec<PlantedCluster>,
    pub shared_vocab: Vec<String>,
    #[serde(default)]
    pub flow_terms: Vec<String>,
    #[serde(default = "default_per_doc")]
    pub topical_per_doc: usize,
    #[serde(default = "default_per_doc")]
    pub shared_per_doc: usize,
    #[serde(default)]
    pub background_docs: usize,
    #[serde(default = "default_sources")]
    pub sources: Vec<String>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl ClusterSpec {
    /// Spec with generated vocabularies: `topical_size` terms per keyword
    /// (`<keyword>NN`) and `shared_size` background terms (`commonNN`).
    pub fn planted(
        keywords: &[&str],
        topical_size: usize,
        shared_size: usize,
        docs_each: usize,
        rng_seed: u64,
    ) -> Self {
        let clusters = keywords
            .iter()
            .map(|kw| {
                let stem: String = kw.chars().filter(|c| c.is_alphanumeric()).collect();
                PlantedCluster {
                    keyword: kw.to_string(),
                    topical_vocab: (0..topical_size).map(|j| format!("{stem}{j:02}")).collect(),
                    doc_count: docs_each,
                }
            })
            .collect();
        ClusterSpec {
            clusters,
            shared_vocab: (0..shared_size).map(|j| format!("common{j:02}")).collect(),
            flow_terms: Vec::new(),
            topical_per_doc: default_per_doc(),
            shared_per_doc: default_per_doc(),
            background_docs: 0,
            sources: default_sources(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.clusters.is_empty() {
            return bad("no clusters".into());
        }
        if self.sources.is_empty() || self.sources.iter().any(|s| s.trim().is_empty()) {
            return bad("sources must be non-empty names".into());
        }
        let mut owner: BTreeMap<String, String> = BTreeMap::new();
        let mut claim = |token: String, who: &str| -> Result<()> {
            match owner.insert(token.clone(), who.to_owned()) {
                Some(prev) if prev != who => Err(Error::InvalidSpec(format!(
                    "term {token:?} is shared by {prev:?} and {who:?}"
                ))),
                _ => Ok(()),
            }
        };
        for (c, cl) in self.clusters.iter().enumerate() {
            let who = format!("cluster {}", c + 1);
            if normalize_term(&cl.keyword).is_none() {
                return bad(format!("keyword {:?} has no tokens", cl.keyword));
            }
            if cl.topical_vocab.len() < 10 {
                return bad(format!("{who}: topical vocabulary needs at least 10 terms"));
            }
            if cl.topical_vocab.len() < self.topical_per_doc {
                return bad(format!("{who}: topical_per_doc exceeds vocabulary"));
            }
            if cl.doc_count == 0 {
                return bad(format!("{who}: doc_count must be positive"));
            }
            for t in tokens(&cl.keyword) {
                claim(t, &who)?;
            }
            for term in &cl.topical_vocab {
                let toks: Vec<String> = tokens(term).collect();
                if toks.len() != 1 {
                    return bad(format!("{who}: vocabulary term {term:?} must be a single token"));
                }
                claim(toks.into_iter().next().unwrap(), &who)?;
            }
        }
        let shared: BTreeSet<String> = self.shared_vocab.iter().flat_map(|t| tokens(t)).collect();
        if shared.len() != self.shared_vocab.len() {
            return bad("shared vocabulary terms must be distinct single tokens".into());
        }
        if self.shared_vocab.len() < self.shared_per_doc {
            return bad("shared_per_doc exceeds shared vocabulary".into());
        }
        for t in shared {
            claim(t, "shared vocabulary")?;
        }
        for t in self.flow_terms.iter().flat_map(|t| tokens(t)) {
            claim(t, "flow terms")?;
        }
        Ok(())
    }
}

/// Returns the corpus and the planted cluster (1-based) of every keyword
/// document. Publication days are drawn in proportion to the burst series.
pub fn generate_cluster_corpus<T: Scalar>(
    spec: &ClusterSpec,
    template: &LifecycleTemplate<T>,
    burst: &BurstSpec,
) -> Result<(Corpus, BTreeMap<String, usize>)> {
    spec.validate()?;
    let series = generate_burst_series(template, burst)?;
    let weights: Vec<f64> = series.values().iter().map(|v| v.to_f64().unwrap()).collect();
    let days = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidSpec(format!("burst series cannot weight days: {e}")))?;
    let mut rng = stream_rng(spec.rng_seed, CORPUS_STREAM);
    let flow_prefix = spec.flow_terms.join(" ");

    let timestamp = |rng: &mut ChaCha20Rng| {
        let day = series.date_at(days.sample(rng));
        let secs = rng.random_range(0..86_400u32);
        day.and_time(NaiveTime::MIN + Duration::seconds(secs as i64)).and_utc()
    };

    let mut documents = Vec::new();
    let mut truth = BTreeMap::new();
    for (c, cl) in spec.clusters.iter().enumerate() {
        for i in 0..cl.doc_count {
            let published_at = timestamp(&mut rng);
            let mut words: Vec<&str> = cl
                .topical_vocab
                .choose_multiple(&mut rng, spec.topical_per_doc)
                .chain(spec.shared_vocab.choose_multiple(&mut rng, spec.shared_per_doc))
                .map(String::as_str)
                .collect();
            words.shuffle(&mut rng);
            let source = spec.sources.choose(&mut rng).unwrap().clone();
            let id = format!("c{}-{i:05}", c + 1);
            truth.insert(id.clone(), c + 1);
            documents.push(Document {
                id,
                published_at,
                source,
                title: format!("{flow_prefix} {}", cl.keyword).trim().to_owned(),
                body: words.join(" "),
                language: Some("en".into()),
            });
        }
    }
    let background_words = (spec.topical_per_doc + spec.shared_per_doc).min(spec.shared_vocab.len());
    for i in 0..spec.background_docs {
        let published_at = timestamp(&mut rng);
        let mut words: Vec<&str> = spec
            .shared_vocab
            .choose_multiple(&mut rng, background_words)
            .map(String::as_str)
            .collect();
        words.shuffle(&mut rng);
        let source = spec.sources.choose(&mut rng).unwrap().clone();
        let title = if flow_prefix.is_empty() { words[0].to_owned() } else { flow_prefix.clone() };
        documents.push(Document {
            id: format!("bg-{i:05}"),
            published_at,
            source,
            title,
            body: words.join(" "),
            language: Some("en".into()),
        });
    }
    Ok((Corpus::new(documents)?, truth))
}

/// `doc_id<TAB>cluster` lines.
pub fn truth_to_tsv(truth: &BTreeMap<String, usize>) -> String {
    truth.iter().map(|(id, c)| format!("{id}\t{c}\n")).collect()
}
