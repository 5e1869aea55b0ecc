//! Flat TOML config file, overridden key by key by command-line flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use eventbasis::corpus::{load_stopwords, FlowQuery};
use eventbasis::eventcluster::{DEFAULT_MAX_ITER, DEFAULT_TOP_T};
use eventbasis::flowseries::{LifecycleTemplate, DEFAULT_SMOOTHING_WINDOW};
use eventbasis::termbase::{EventLexicon, DEFAULT_TOP_M};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::grid::Grid;

pub const DEFAULT_THRESHOLD: f64 = 0.9;
pub const DEFAULT_TOP_N: usize = 10;

/// One layer of settings. Every key is optional so layers can be stacked.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub corpus: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub query: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub template: Option<PathBuf>,
    pub event_terms: Option<PathBuf>,
    pub event_corpus: Option<PathBuf>,
    pub window: Option<usize>,
    pub scales: Option<String>,
    pub shifts: Option<String>,
    pub threshold: Option<f64>,
    pub top_n: Option<usize>,
    pub top_m: Option<usize>,
    pub top_t: Option<usize>,
    pub max_iter: Option<usize>,
    pub smoothed: Option<bool>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut s: Settings =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // Relative paths in a config file are relative to the file.
        if let Some(dir) = path.parent() {
            for p in [
                &mut s.corpus,
                &mut s.series,
                &mut s.stopwords,
                &mut s.lexicon,
                &mut s.template,
                &mut s.event_terms,
                &mut s.event_corpus,
                &mut s.out_dir,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(s)
    }

    /// `self` wins wherever it has a value.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(self, base; corpus, series, query, stopwords, lexicon, template, event_terms,
            event_corpus, window, scales, shifts, threshold, top_n, top_m, top_t, max_iter,
            smoothed, from, to, out_dir, seed, threads)
    }
}

/// Settings with defaults applied and inputs loaded and validated.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub query: Option<FlowQuery>,
    pub stopwords: BTreeSet<String>,
    pub lexicon: EventLexicon,
    pub template: LifecycleTemplate,
    pub event_terms: Option<PathBuf>,
    pub event_corpus: Option<PathBuf>,
    pub window: usize,
    pub scales: Grid,
    pub shifts: Grid,
    pub threshold: f64,
    pub top_n: usize,
    pub top_m: usize,
    pub top_t: usize,
    pub max_iter: usize,
    pub smoothed: bool,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

fn existing(p: Option<PathBuf>, what: &str) -> Result<Option<PathBuf>> {
    match p {
        Some(p) if !p.exists() => Err(CliError::Config(format!("{what} {} does not exist", p.display()))),
        p => Ok(p),
    }
}

fn positive(v: Option<usize>, default: usize, what: &str) -> Result<usize> {
    match v.unwrap_or(default) {
        0 => Err(CliError::Config(format!("{what} must be at least 1"))),
        n => Ok(n),
    }
}

fn date(v: Option<String>, what: &str) -> Result<Option<NaiveDate>> {
    v.map(|s| {
        NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
            .map_err(|_| CliError::Config(format!("{what}: expected YYYY-MM-DD, got {s:?}")))
    })
    .transpose()
}

impl PipelineConfig {
    pub fn resolve(s: Settings) -> Result<Self> {
        let stopwords = match existing(s.stopwords, "stopword file")? {
            Some(p) => load_stopwords(p)?,
            None => BTreeSet::new(),
        };
        let lexicon = match existing(s.lexicon, "lexicon file")? {
            Some(p) => EventLexicon::load(p)?,
            None => EventLexicon::default(),
        };
        let template = match existing(s.template, "template file")? {
            Some(p) => LifecycleTemplate::load(p)?,
            None => LifecycleTemplate::nine_phase(),
        };
        let window = s.window.unwrap_or(DEFAULT_SMOOTHING_WINDOW);
        if window.is_multiple_of(2) {
            return Err(CliError::Config(format!("window must be odd and positive, got {window}")));
        }
        let threshold = s.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(CliError::Config(format!("threshold must lie in (0, 1], got {threshold}")));
        }
        let grid = |v: Option<String>, default: Grid, what: &str| -> Result<Grid> {
            v.map_or(Ok(default), |g| g.parse().map_err(|e| CliError::Config(format!("{what}: {e}"))))
        };
        let query = s
            .query
            .map(|q| q.parse::<FlowQuery>())
            .transpose()?;
        let from = date(s.from, "from")?;
        let to = date(s.to, "to")?;
        if let (Some(a), Some(b)) = (from, to) {
            if a > b {
                return Err(CliError::Config(format!("from {a} is after to {b}")));
            }
        }
        if s.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let out_dir = s.out_dir.unwrap_or_else(|| PathBuf::from("out"));
        Ok(PipelineConfig {
            corpus: existing(s.corpus, "corpus")?,
            series: existing(s.series, "series file")?,
            query,
            stopwords,
            lexicon,
            template,
            event_terms: existing(s.event_terms, "event terms file")?,
            event_corpus: existing(s.event_corpus, "event corpus")?,
            window,
            scales: grid(s.scales, Grid::DEFAULT_SCALES, "scales")?,
            shifts: grid(s.shifts, Grid::All, "shifts")?,
            threshold,
            top_n: positive(s.top_n, DEFAULT_TOP_N, "top_n")?,
            top_m: positive(s.top_m, DEFAULT_TOP_M, "top_m")?,
            top_t: positive(s.top_t, DEFAULT_TOP_T, "top_t")?,
            max_iter: positive(s.max_iter, DEFAULT_MAX_ITER, "max_iter")?,
            smoothed: s.smoothed.unwrap_or(false),
            from,
            to,
            out_dir,
            seed: s.seed,
            threads: s.threads,
        })
    }

    pub fn require_corpus(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::Usage("no corpus given (--corpus or `corpus` in the config)".into()))
    }

    pub fn require_query(&self) -> Result<&FlowQuery> {
        self.query
            .as_ref()
            .ok_or_else(|| CliError::Usage("no query given (--query or `query` in the config)".into()))
    }
}
