//! Command-line front end: each analysis stage as a subcommand, plus a
//! `pipeline` that runs them in order and writes a digest manifest.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod manifest;

pub use commands::{cmd_cluster, cmd_correlogram, cmd_events, cmd_pipeline, cmd_series, cmd_synth, Outcome};
pub use config::{PipelineConfig, Settings};
pub use error::{CliError, Result};
pub use manifest::Manifest;

use eventbasis::LifecycleTemplate;

#[derive(Debug, Parser)]
#[command(name = "eventbasis", version, about = "Locate operation-like bursts in a news flow and the events behind them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daily counts of the query-filtered flow, raw and smoothed
    Series(Flags),
    /// Template correlogram over (shift, scale) and its peaks
    Correlogram(Flags),
    /// TF-IDF ranking, matched event terms, event corpus and source graph
    Events(Flags),
    /// Keyword-seeded k-means over the event corpus
    Cluster(Flags),
    /// All stages in order, with date narrowing and a manifest
    Pipeline(Flags),
    /// Synthetic series and corpus fixtures
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML config; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus JSONL file
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Series CSV to correlate instead of a corpus flow (correlogram only)
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Flow query, e.g. "brexit & referendum | vote & !football"
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Event lexicon, one word or phrase per line [default: built-in six terms]
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Lifecycle template, `position amplitude [# label]` per line
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Event terms for clustering [default: <out-dir>/event_terms.txt]
    #[arg(long)]
    pub event_terms: Option<PathBuf>,
    /// Corpus to cluster [default: <out-dir>/event_corpus.jsonl]
    #[arg(long)]
    pub event_corpus: Option<PathBuf>,
    /// Smoothing window in days, odd [default: 7]
    #[arg(long)]
    pub window: Option<usize>,
    /// Scale grid: a:b[:step], a,b,c or all [default: 10:90]
    #[arg(long)]
    pub scales: Option<String>,
    /// Shift grid, same syntax [default: all]
    #[arg(long)]
    pub shifts: Option<String>,
    /// Peak threshold in (0, 1] [default: 0.9]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Peaks to report [default: 10]
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Ranked terms searched for event words [default: 200]
    #[arg(long)]
    pub top_m: Option<usize>,
    /// Terms kept per centroid [default: 25]
    #[arg(long)]
    pub top_t: Option<usize>,
    /// k-means pass limit [default: 50]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Correlate the smoothed instead of the raw series
    #[arg(long)]
    pub smoothed: bool,
    /// First day of the flow, YYYY-MM-DD
    #[arg(long)]
    pub from: Option<String>,
    /// Last day of the flow, YYYY-MM-DD
    #[arg(long)]
    pub to: Option<String>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Accepted for uniformity; analysis commands are deterministic
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            corpus: self.corpus.clone(),
            series: self.series.clone(),
            query: self.query.clone(),
            stopwords: self.stopwords.clone(),
            lexicon: self.lexicon.clone(),
            template: self.template.clone(),
            event_terms: self.event_terms.clone(),
            event_corpus: self.event_corpus.clone(),
            window: self.window,
            scales: self.scales.clone(),
            shifts: self.shifts.clone(),
            threshold: self.threshold,
            top_n: self.top_n,
            top_m: self.top_m,
            top_t: self.top_t,
            max_iter: self.max_iter,
            smoothed: self.smoothed.then_some(true),
            from: self.from.clone(),
            to: self.to.clone(),
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            threads: self.threads,
        }
    }

    /// Config file (if any) overlaid with the flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let file = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        PipelineConfig::resolve(self.settings().over(file))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Burst spec (TOML)
    #[arg(long)]
    pub burst: PathBuf,
    /// Cluster spec (TOML); adds corpus.jsonl and truth.tsv
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Overrides rng_seed in both specs
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Synth(a) => {
            let template = match &a.template {
                Some(p) => LifecycleTemplate::load(p)?,
                None => LifecycleTemplate::nine_phase(),
            };
            cmd_synth(&a.burst, a.clusters.as_deref(), &template, a.seed, &a.out_dir)
        }
        Command::Series(f)
        | Command::Correlogram(f)
        | Command::Events(f)
        | Command::Cluster(f)
        | Command::Pipeline(f) => {
            let cfg = f.resolve()?;
            let cmd = match command {
                Command::Series(_) => cmd_series,
                Command::Correlogram(_) => cmd_correlogram,
                Command::Events(_) => cmd_events,
                Command::Cluster(_) => cmd_cluster,
                _ => cmd_pipeline,
            };
            with_threads(cfg.threads, || cmd(&cfg))?
        }
    }
}

/// Parses `args`, runs the command and reports on stdout/stderr. Returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for (name, _) in &outcome.written {
                println!("{}", outcome.out_dir.join(name).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
