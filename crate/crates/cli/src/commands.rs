use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use eventbasis::corpus::{filter_by_dates, filter_by_query, load_corpus, tokenize_corpus, Corpus, TokenizedDoc};
use eventbasis::eventcluster::{kmeans_seeded, seed_centroids, vectorize, Clustering};
use eventbasis::flowseries::{build_daily_series, correlogram, detect_peaks, peaks_to_csv, smooth, DailySeries, Peak};
use eventbasis::sourcegraph::source_link_graph;
use eventbasis::synthflow::{generate_burst_series, generate_cluster_corpus, truth_to_tsv, BurstSpec, ClusterSpec};
use eventbasis::termbase::{
    augment_query, compute_tfidf, document_frequencies, filter_event_documents, match_event_terms, terms_to_tsv,
};
use eventbasis::{FlowQuery, LifecycleTemplate};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::manifest::{ClusteringRecord, Manifest, NarrowingRecord};

pub const FLOW: &str = "flow.jsonl";
pub const SERIES_RAW: &str = "series_raw.csv";
pub const SERIES_SMOOTHED: &str = "series_smoothed.csv";
pub const CORRELOGRAM: &str = "correlogram.csv";
pub const PEAKS: &str = "peaks.csv";
pub const NARROWED: &str = "narrowed.jsonl";
pub const TERMS: &str = "terms.tsv";
pub const EVENT_TERMS: &str = "event_terms.txt";
pub const AUGMENTED_QUERY: &str = "augmented_query.txt";
pub const EVENT_CORPUS: &str = "event_corpus.jsonl";
pub const SOURCE_EDGES: &str = "source_edges.tsv";
pub const SOURCE_NODES: &str = "source_nodes.tsv";
pub const CLUSTERS: &str = "clusters.json";
pub const MANIFEST: &str = "manifest.toml";
pub const SYNTH_SERIES: &str = "series.csv";
pub const SYNTH_CORPUS: &str = "corpus.jsonl";
pub const SYNTH_TRUTH: &str = "truth.tsv";

/// Files written by a command, in order, with their SHA-256 digests.
#[derive(Debug, Default)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub written: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Write {
            path: dir.to_owned(),
            source: e,
        })?;
        Ok(Outcome {
            out_dir: dir.to_owned(),
            ..Default::default()
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Write { path, source: e })?;
        let digest = hex::encode(Sha256::digest(contents.as_bytes()));
        self.written.push((name.to_owned(), digest));
        Ok(())
    }

    fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Query-filtered corpus, restricted to `from..=to` when given.
fn load_flow(cfg: &PipelineConfig) -> Result<(Corpus, HashMap<String, TokenizedDoc>)> {
    let corpus = load_corpus(cfg.require_corpus()?)?;
    let query = cfg.require_query()?;
    let tokenized = tokenize_corpus(&corpus, &cfg.stopwords);
    let mut flow = filter_by_query(&corpus, query, &tokenized);
    if cfg.from.is_some() || cfg.to.is_some() {
        if let Some((first, last)) = flow.date_span() {
            let from = cfg.from.unwrap_or(first.date_naive());
            let to = cfg.to.unwrap_or(last.date_naive());
            flow = if from <= to { filter_by_dates(&flow, from, to)? } else { Corpus::default() };
        }
    }
    if flow.is_empty() {
        return Err(CliError::Data(format!("empty flow: query `{query}` matches no document")));
    }
    Ok((flow, tokenized))
}

fn series_stage(flow: &Corpus, cfg: &PipelineConfig, out: &mut Outcome) -> Result<(DailySeries, DailySeries)> {
    let raw = build_daily_series(flow)?;
    let smoothed = smooth(&raw, cfg.window)?;
    out.write(SERIES_RAW, &raw.to_csv())?;
    out.write(SERIES_SMOOTHED, &smoothed.to_csv())?;
    Ok((raw, smoothed))
}

fn correlogram_stage(series: &DailySeries, cfg: &PipelineConfig, out: &mut Outcome) -> Result<Vec<Peak>> {
    let n = series.len();
    let scales = cfg.scales.values(2, n);
    let shifts = cfg.shifts.values(0, n - 1);
    let corr = correlogram(series, &cfg.template, &scales, &shifts)?;
    if corr.cells().is_empty() {
        return Err(CliError::Data(format!(
            "grid incompatible with series length {n}: no requested (shift, scale) fits (scales {}, shifts {})",
            cfg.scales, cfg.shifts
        )));
    }
    out.write(CORRELOGRAM, &corr.to_csv())?;
    let peaks = if corr.defined().next().is_none() {
        out.warn("every correlogram cell is undefined (constant series windows); no peaks");
        Vec::new()
    } else {
        detect_peaks(&corr, cfg.threshold, cfg.top_n)
    };
    if peaks.is_empty() {
        out.warn(format!("no correlogram peak at or above threshold {}", cfg.threshold));
    }
    out.write(PEAKS, &peaks_to_csv(&peaks))?;
    Ok(peaks)
}

struct Events {
    terms: Vec<String>,
    corpus: Corpus,
}

fn events_stage(
    flow: &Corpus,
    tokenized: &HashMap<String, TokenizedDoc>,
    query: &FlowQuery,
    cfg: &PipelineConfig,
    out: &mut Outcome,
) -> Result<Events> {
    let docs: Vec<&TokenizedDoc> = flow.iter().map(|d| &tokenized[&d.id]).collect();
    let ranked = compute_tfidf::<f64, _>(docs.iter().copied())?;
    out.write(TERMS, &terms_to_tsv(&ranked))?;
    let matched = match_event_terms(&ranked, &cfg.lexicon, cfg.top_m, docs.iter().copied());
    let terms: Vec<String> = matched.into_iter().map(|t| t.term).collect();
    out.write(EVENT_TERMS, &terms.iter().map(|t| format!("{t}\n")).collect::<String>())?;
    if terms.is_empty() {
        out.warn(format!(
            "no lexicon entry is among the top {} terms; event outputs are empty",
            cfg.top_m
        ));
        for name in [AUGMENTED_QUERY, EVENT_CORPUS, SOURCE_EDGES, SOURCE_NODES] {
            out.write(name, "")?;
        }
        return Ok(Events {
            terms,
            corpus: Corpus::default(),
        });
    }
    out.write(AUGMENTED_QUERY, &format!("{}\n", augment_query(query, &terms)?))?;
    let corpus = filter_event_documents(flow, tokenized, query, &terms)?;
    if corpus.is_empty() {
        return Err(CliError::Invariant("matched event terms select no document".into()));
    }
    out.write(EVENT_CORPUS, &corpus.to_jsonl())?;
    let graph = source_link_graph(&corpus)?;
    out.write(SOURCE_EDGES, &graph.edges_tsv())?;
    out.write(SOURCE_NODES, &graph.nodes_tsv())?;
    Ok(Events { terms, corpus })
}

/// Event terms for seeding: one per line, or several joined by `|` to seed
/// one centroid together.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedTerms {
    pub terms: Vec<String>,
    pub groups: Option<Vec<Vec<String>>>,
}

impl SeedTerms {
    pub fn parse(text: &str) -> Self {
        let lines: Vec<Vec<String>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .map(|l| {
                l.split('|')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_owned)
                    .collect::<Vec<_>>()
            })
            .filter(|g| !g.is_empty())
            .collect();
        let grouped = lines.iter().any(|g| g.len() > 1);
        SeedTerms {
            terms: lines.iter().flatten().cloned().collect(),
            groups: grouped.then_some(lines),
        }
    }
}

fn cluster_stage(corpus: &Corpus, seeds: &SeedTerms, cfg: &PipelineConfig, out: &mut Outcome) -> Result<Clustering> {
    if seeds.terms.is_empty() {
        return Err(no_event_terms());
    }
    let tokenized = tokenize_corpus(corpus, &cfg.stopwords);
    let docs: Vec<&TokenizedDoc> = corpus.iter().map(|d| &tokenized[&d.id]).collect();
    let ranked = compute_tfidf::<f64, _>(docs.iter().copied())?;
    let n = docs.iter().filter(|d| !d.is_empty()).count();
    let vectors = vectorize(docs.iter().copied(), &document_frequencies(&ranked), n);
    if !vectors.omitted.is_empty() {
        out.warn(format!(
            "{} document(s) have no distinguishing terms and were not clustered",
            vectors.omitted.len()
        ));
    }
    let centroids = seed_centroids::<f64, _>(&seeds.terms, seeds.groups.as_deref())?;
    let clustering = kmeans_seeded(&vectors.vectors, &centroids, cfg.max_iter, cfg.top_t);
    if !clustering.converged {
        out.warn(format!("k-means stopped after max_iter = {} passes without converging", cfg.max_iter));
    }
    out.write(CLUSTERS, &clustering.report_json())?;
    Ok(clustering)
}

fn no_event_terms() -> CliError {
    CliError::Usage("no event terms: run `eventbasis events` first or pass --event-terms".into())
}

pub fn cmd_series(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&cfg.out_dir)?;
    let (flow, _) = load_flow(cfg)?;
    series_stage(&flow, cfg, &mut out)?;
    Ok(out)
}

pub fn cmd_correlogram(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&cfg.out_dir)?;
    let raw = match &cfg.series {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            DailySeries::parse_csv(&text)?
        }
        None => build_daily_series(&load_flow(cfg)?.0)?,
    };
    let series = if cfg.smoothed { smooth(&raw, cfg.window)? } else { raw };
    correlogram_stage(&series, cfg, &mut out)?;
    Ok(out)
}

pub fn cmd_events(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&cfg.out_dir)?;
    let (flow, tokenized) = load_flow(cfg)?;
    events_stage(&flow, &tokenized, cfg.require_query()?, cfg, &mut out)?;
    Ok(out)
}

pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&cfg.out_dir)?;
    let terms_path = cfg.event_terms.clone().unwrap_or_else(|| out.path(EVENT_TERMS));
    let text = fs::read_to_string(&terms_path).map_err(|_| no_event_terms())?;
    let seeds = SeedTerms::parse(&text);
    if seeds.terms.is_empty() {
        return Err(no_event_terms());
    }
    let corpus_path = cfg.event_corpus.clone().unwrap_or_else(|| out.path(EVENT_CORPUS));
    if !corpus_path.exists() {
        return Err(CliError::Config(format!(
            "event corpus {} does not exist (run `eventbasis events` or pass --event-corpus)",
            corpus_path.display()
        )));
    }
    let corpus = load_corpus(&corpus_path)?;
    cluster_stage(&corpus, &seeds, cfg, &mut out)?;
    Ok(out)
}

/// All stages in order; every artifact is on disk before the next stage
/// starts, and `manifest.toml` records digests and the narrowing decision.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&cfg.out_dir)?;
    let (flow, tokenized) = load_flow(cfg).map_err(|e| e.in_stage("flow"))?;
    out.write(FLOW, &flow.to_jsonl()).map_err(|e| e.in_stage("flow"))?;

    let (raw, smoothed) = series_stage(&flow, cfg, &mut out).map_err(|e| e.in_stage("series"))?;
    let input = if cfg.smoothed { &smoothed } else { &raw };
    let peaks = correlogram_stage(input, cfg, &mut out).map_err(|e| e.in_stage("correlogram"))?;

    let (narrowed, narrowing) = match peaks.first() {
        Some(p) => {
            let n = filter_by_dates(&flow, p.window_start, p.window_end)
                .map_err(|e| CliError::from(e).in_stage("narrowing"))?;
            (n, NarrowingRecord::applied(p))
        }
        None => {
            out.warn("pipeline continues without date narrowing");
            (flow.clone(), NarrowingRecord::skipped(cfg.threshold))
        }
    };
    out.write(NARROWED, &narrowed.to_jsonl()).map_err(|e| e.in_stage("narrowing"))?;

    let query = cfg.require_query()?;
    let events = events_stage(&narrowed, &tokenized, query, cfg, &mut out).map_err(|e| e.in_stage("events"))?;

    let clustering = if events.terms.is_empty() {
        out.warn("clustering skipped: no event terms");
        ClusteringRecord::skipped("no event terms")
    } else {
        let seeds = SeedTerms {
            terms: events.terms.clone(),
            groups: None,
        };
        let c = cluster_stage(&events.corpus, &seeds, cfg, &mut out).map_err(|e| e.in_stage("cluster"))?;
        ClusteringRecord::performed(&c)
    };

    let manifest = Manifest {
        narrowing,
        clustering,
        outputs: out.written.iter().cloned().collect::<BTreeMap<_, _>>(),
    };
    let text = manifest.to_toml()?;
    out.write(MANIFEST, &text)?;
    Ok(out)
}

fn read_spec<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Synthetic fixtures: `series.csv` from a burst spec and, with a cluster
/// spec, `corpus.jsonl` plus `truth.tsv`. `seed` overrides both specs.
pub fn cmd_synth(
    burst: &Path,
    clusters: Option<&Path>,
    template: &LifecycleTemplate,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<Outcome> {
    let mut out = Outcome::new(out_dir)?;
    let mut burst: BurstSpec = read_spec(burst)?;
    if let Some(s) = seed {
        burst.rng_seed = s;
    }
    let series = generate_burst_series(template, &burst)?;
    out.write(SYNTH_SERIES, &series.to_csv())?;
    if let Some(path) = clusters {
        let mut spec: ClusterSpec = read_spec(path)?;
        if let Some(s) = seed {
            spec.rng_seed = s;
        }
        let (corpus, truth) = generate_cluster_corpus(&spec, template, &burst)?;
        out.write(SYNTH_CORPUS, &corpus.to_jsonl())?;
        out.write(SYNTH_TRUTH, &truth_to_tsv(&truth))?;
    }
    Ok(out)
}
