//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p eventbasis-cli --test acceptance`.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use eventbasis::corpus::TokenizedDoc;
use eventbasis::eventcluster::{kmeans_seeded, seed_centroids, vectorize, DocVector};
use eventbasis::flowseries::{
    correlogram, detect_peaks, sample_template, window_correlation, ControlPoint, DailySeries, LifecycleTemplate,
    DEFAULT_SMOOTHING_WINDOW,
};
use eventbasis::sourcegraph::horizontal_visibility_graph;
use eventbasis::synthflow::{generate_burst_series, generate_cluster_corpus, stream_rng, BurstSpec, ClusterSpec, PlantedCluster};
use eventbasis::termbase::{compute_tfidf, document_frequencies, EventLexicon};
use eventbasis_cli::{run, Command, Flags, Manifest, PipelineConfig, Settings};
use oracles::{hvg_oracle, interpolate_oracle, pearson_oracle, tfidf_oracle};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rng(stream: u64) -> ChaCha20Rng {
    stream_rng(20160623, 100 + stream)
}

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 6, 1).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn random_template(rng: &mut ChaCha20Rng) -> Vec<(f64, f64)> {
    let interior = rng.random_range(0..7);
    let mut xs: Vec<f64> = (0..interior).map(|_| rng.random_range(0.01..0.99)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut pts = vec![(0.0, rng.random_range(0.0..1.0))];
    pts.extend(xs.into_iter().map(|x| (x, rng.random_range(0.0..1.0))));
    pts.push((1.0, rng.random_range(0.0..1.0)));
    pts
}

fn template_from(points: &[(f64, f64)]) -> LifecycleTemplate {
    LifecycleTemplate::new(points.iter().map(|&(x, a)| ControlPoint::new(x, a, None)).collect()).unwrap()
}

fn correlation_oracle() -> Verdict {
    let mut rng = rng(1);
    let t0 = Instant::now();
    let (mut worst, mut undefined) = (0.0f64, 0);
    for case in 0..1000 {
        let n = rng.random_range(2..=200);
        let mut values: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0u32..60))).collect();
        let k = rng.random_range(2..=n);
        let l = rng.random_range(0..=n - k);
        if case % 10 == 0 {
            let v = values[l];
            values[l..l + k].iter_mut().for_each(|x| *x = v);
        }
        let points = random_template(&mut rng);
        let series = DailySeries::new(start(), values.clone()).unwrap();
        let samples = sample_template(&template_from(&points), k).unwrap();
        let direct: Vec<f64> = (0..k).map(|i| interpolate_oracle(&points, i as f64 / (k - 1) as f64)).collect();
        let got = window_correlation(&series, l, k, &samples).unwrap();
        match (got, pearson_oracle(&values[l..l + k], &direct)) {
            (None, None) => undefined += 1,
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            other => return Err(format!("case {case}: definedness differs {other:?}")),
        }
    }
    let took = t0.elapsed();
    let detail = format!("1000 cases, max |diff| {worst:.2e}, {undefined} undefined in both, {took:.2?}");
    if worst <= 1e-12 && took < Duration::from_secs(5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn affine_invariance() -> Verdict {
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let k = rng.random_range(2..=120);
        let tpl = if case % 2 == 0 {
            LifecycleTemplate::nine_phase()
        } else {
            template_from(&random_template(&mut rng))
        };
        let p = sample_template(&tpl, k).unwrap();
        if p.iter().all(|v| *v == p[0]) {
            continue;
        }
        let a = rng.random_range(0.1..500.0);
        let sign = if case % 4 < 2 { 1.0 } else { -1.0 };
        let offset = a + rng.random_range(0.0..100.0);
        let pad = rng.random_range(0..20);
        let mut values = vec![3.0; pad];
        values.extend(p.iter().map(|v| sign * a * v + offset));
        values.extend(vec![3.0; rng.random_range(0..20)]);
        let series = DailySeries::new(start(), values).unwrap();
        let c = window_correlation(&series, pad, k, &p)
            .unwrap()
            .ok_or_else(|| format!("case {case}: undefined"))?;
        worst = worst.max((c - sign).abs());
    }
    let detail = format!("200 windows, max |C - (+/-1)| {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn planted_burst() -> Verdict {
    let tpl = LifecycleTemplate::nine_phase();
    let scales: Vec<usize> = (10..=90).collect();
    let shifts: Vec<usize> = (0..365).collect();
    let t0 = Instant::now();
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..100u64 {
        let spec = BurstSpec {
            start_date: start(),
            length_days: 365,
            plant_shift: 120,
            plant_scale: 40,
            amplitude: 100.0,
            baseline: 5.0,
            noise_sigma: 5.0,
            rng_seed: seed,
        };
        let series = generate_burst_series(&tpl, &spec).unwrap();
        let corr = correlogram(&series, &tpl, &scales, &shifts).unwrap();
        match detect_peaks(&corr, 0.9, 1).first() {
            Some(p) if p.shift.abs_diff(120) <= 3 && p.scale.abs_diff(40) <= 5 => hits += 1,
            Some(p) => misses.push(format!("seed {seed}: ({}, {}, {:.3})", p.shift, p.scale, p.value)),
            None => misses.push(format!("seed {seed}: no peak >= 0.9")),
        }
    }
    let took = t0.elapsed();
    let detail = format!("{hits}/100 seeds recovered, {took:.2?}; scales 10..=90, all shifts{}", if misses.is_empty() {
        String::new()
    } else {
        format!("; misses: {}", misses.join(", "))
    });
    if hits >= 95 && took < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn vectors_of(docs: &[TokenizedDoc]) -> Vec<DocVector> {
    let ranked = compute_tfidf::<f64, _>(docs).unwrap();
    let n = docs.iter().filter(|d| !d.is_empty()).count();
    vectorize(docs, &document_frequencies(&ranked), n).vectors
}

fn kmeans_monotonicity() -> Verdict {
    let mut rng = rng(4);
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i:02}")).collect();
    let (mut worst_drop, mut multi_pass) = (0.0f64, 0);
    for corpus in 0..100 {
        let docs: Vec<TokenizedDoc> = (0..60)
            .map(|i| {
                let len = rng.random_range(3..15);
                let terms = (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect();
                TokenizedDoc::from_terms(format!("d{i:02}"), terms)
            })
            .collect();
        let vectors = vectors_of(&docs);
        let k = rng.random_range(2..=5);
        let seeds: Vec<&str> = vocab.choose_multiple(&mut rng, k).map(String::as_str).collect();
        let centroids = seed_centroids::<f64, _>(&seeds, None).unwrap();
        let c = kmeans_seeded(&vectors, &centroids, 50, vocab.len());
        if c.q_history.len() > 2 {
            multi_pass += 1;
        }
        for w in c.q_history.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        if c.q_history.windows(2).any(|w| w[1] < w[0] - 1e-9) {
            return Err(format!("corpus {corpus}: q_history {:?}", c.q_history));
        }
    }
    Ok(format!(
        "100 corpora x 60 docs, top_t = |V| = 30, largest drop {worst_drop:.2e}, {multi_pass} runs with >2 passes"
    ))
}

fn planted_corpus(seed: u64) -> (Vec<TokenizedDoc>, BTreeMap<String, usize>) {
    let spec = ClusterSpec::planted(&["protest", "petition", "referendum"], 20, 50, 50, seed);
    let burst = BurstSpec {
        start_date: start(),
        length_days: 61,
        plant_shift: 10,
        plant_scale: 40,
        amplitude: 100.0,
        baseline: 5.0,
        noise_sigma: 5.0,
        rng_seed: seed,
    };
    let (corpus, truth) = generate_cluster_corpus(&spec, &LifecycleTemplate::<f64>::nine_phase(), &burst).unwrap();
    let docs = corpus.iter().map(|d| eventbasis::corpus::tokenize(d, &Default::default())).collect();
    (docs, truth)
}

fn planted_clusters() -> Verdict {
    let seeds = ["protest", "petition", "referendum"];
    let centroids = seed_centroids::<f64, _>(&seeds, None).unwrap();
    let mut worst = 1.0f64;
    let mut max_iter = 0;
    for seed in 0..10 {
        let (docs, truth) = planted_corpus(seed);
        let vectors = vectors_of(&docs);
        let c = kmeans_seeded(&vectors, &centroids, 50, 25);
        let correct = (0..c.doc_ids.len())
            .filter(|&i| c.label_of(i) == Some(truth[&c.doc_ids[i]]))
            .count();
        worst = worst.min(correct as f64 / truth.len() as f64);
        max_iter = max_iter.max(c.iterations);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let again = single.install(|| kmeans_seeded(&vectors, &centroids, 50, 25));
        if again.report_json() != c.report_json() || kmeans_seeded(&vectors, &centroids, 50, 25) != c {
            return Err(format!("generator seed {seed}: repeated runs differ"));
        }
        if !c.converged {
            return Err(format!("generator seed {seed}: no convergence in 50 passes"));
        }
    }
    let detail = format!(
        "10 generated corpora of 3x50 docs: worst accuracy {:.1}%, max {max_iter} iterations, repeat runs identical",
        100.0 * worst
    );
    if worst >= 0.95 && max_iter <= 20 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn complexity() -> Verdict {
    let mut checked = 0;
    for (seed, k) in [(0u64, 1usize), (1, 2), (2, 3)] {
        let (docs, _) = planted_corpus(seed);
        let vectors = vectors_of(&docs);
        let seeds = &["protest", "petition", "referendum"][..k];
        let c = kmeans_seeded(&vectors, &seed_centroids::<f64, _>(seeds, None).unwrap(), 50, 25);
        let expected = (k * vectors.len()) as u64;
        if let Some(bad) = c.sim_evaluations.iter().find(|&&e| e != expected) {
            return Err(format!("k={k}, N={}: {bad} evaluations, expected {expected}", vectors.len()));
        }
        checked += c.sim_evaluations.len();
    }
    Ok(format!("{checked} passes over k in 1..=3, N = 150, each exactly k*N sim evaluations"))
}

fn hvg() -> Verdict {
    let mut exhaustive = 0;
    for len in 0..=6u32 {
        for code in 0..3usize.pow(len) {
            let mut c = code;
            let seq: Vec<u8> = (0..len)
                .map(|_| {
                    let v = (c % 3) as u8 + 1;
                    c /= 3;
                    v
                })
                .collect();
            if horizontal_visibility_graph(&seq).edges != hvg_oracle(&seq) {
                return Err(format!("mismatch on {seq:?}"));
            }
            exhaustive += 1;
        }
    }
    let mut rng = rng(7);
    for case in 0..500 {
        let seq: Vec<u32> = if case % 2 == 0 {
            (0..12).map(|_| rng.random_range(0..6)).collect()
        } else {
            let mut v: Vec<u32> = (0..12).collect();
            v.shuffle(&mut rng);
            v
        };
        if horizontal_visibility_graph(&seq).edges != hvg_oracle(&seq) {
            return Err(format!("mismatch on {seq:?}"));
        }
    }
    let mut bounds = 0;
    for n in 2..=60usize {
        for _ in 0..20 {
            let mut v: Vec<f64> = (0..n).map(|i| i as f64 * 1.5).collect();
            v.shuffle(&mut rng);
            let e = horizontal_visibility_graph(&v).edges.len();
            if e < n - 1 || e > 2 * n - 3 {
                return Err(format!("n={n}: {e} edges outside [n-1, 2n-3]"));
            }
            bounds += 1;
        }
    }
    Ok(format!(
        "{exhaustive} exhaustive sequences, 500 random length-12 series, {bounds} distinct-valued series within [n-1, 2n-3]"
    ))
}

fn tfidf() -> Verdict {
    let mut rng = rng(8);
    let vocab = ["aa", "bb", "cc", "dd", "ee", "ff", "gg", "protest", "referendum", "vote"];
    let mut terms_checked = 0;
    for corpus in 0..50 {
        let n = rng.random_range(1..=50);
        let mut docs: Vec<Vec<String>> = (0..n)
            .map(|_| {
                let len = rng.random_range(0..12);
                (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].to_string()).collect()
            })
            .collect();
        if docs.iter().all(Vec::is_empty) {
            docs[0].push("aa".into());
        }
        let tok: Vec<TokenizedDoc> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| TokenizedDoc::from_terms(format!("d{i}"), d.clone()))
            .collect();
        let got = compute_tfidf::<f64, _>(&tok).unwrap();
        let want = tfidf_oracle(&docs);
        let same = got.len() == want.len()
            && got.iter().zip(&want).all(|(g, w)| {
                g.term == w.term && g.df == w.df && g.tf_total == w.tf_total && g.weight.to_bits() == w.weight.to_bits()
            });
        if !same {
            return Err(format!("corpus {corpus}: ranking differs from the oracle"));
        }
        terms_checked += got.len();
    }
    let planted = [
        TokenizedDoc::from_terms("a", vec!["protest".into(), "protest".into(), "protest".into()]),
        TokenizedDoc::from_terms("b", vec!["weather".into()]),
    ];
    let w = compute_tfidf::<f64, _>(&planted).unwrap();
    let p = w.iter().find(|t| t.term == "protest").unwrap().weight;
    let target = 3.0 * 2f64.ln();
    let detail = format!("50 corpora, {terms_checked} ranked terms identical; planted term {p:.6} vs 3 ln 2 = {target:.6}");
    if (p - target).abs() <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn write_full_scale_corpus(dir: &Path) -> usize {
    // 3 event clusters plus background, all carrying the flow keyword.
    let vocab = |stem: &str, n: usize| (0..n).map(|j| format!("{stem}{j:02}")).collect::<Vec<_>>();
    let spec = ClusterSpec {
        clusters: ["referendum", "petition", "protest"]
            .iter()
            .map(|k| PlantedCluster {
                keyword: k.to_string(),
                topical_vocab: vocab(&k[..4], 30),
                doc_count: 2000,
            })
            .collect(),
        shared_vocab: vocab("common", 200),
        flow_terms: vec!["brexit".into()],
        topical_per_doc: 6,
        shared_per_doc: 6,
        background_docs: 43697 - 6000,
        sources: (0..40).map(|i| format!("Outlet {i:02}")).collect(),
        rng_seed: 2016,
    };
    let burst = BurstSpec {
        start_date: start(),
        length_days: 61,
        plant_shift: 12,
        plant_scale: 36,
        amplitude: 1500.0,
        baseline: 300.0,
        noise_sigma: 40.0,
        rng_seed: 2016,
    };
    let (corpus, _) = generate_cluster_corpus(&spec, &LifecycleTemplate::<f64>::nine_phase(), &burst).unwrap();
    corpus.write_jsonl(dir.join("full.jsonl")).unwrap();
    corpus.len()
}

fn reference_parameters() -> Verdict {
    let defaults = PipelineConfig::resolve(Settings::default()).map_err(|e| e.to_string())?;
    if DEFAULT_SMOOTHING_WINDOW != 7 || defaults.window != 7 {
        return Err("default smoothing window is not 7".into());
    }
    let six = ["protest", "referendum", "petition", "signatures", "demonstration", "terrorist act"];
    if defaults.lexicon != EventLexicon::from_terms(six).unwrap() || defaults.lexicon.entries().len() != 6 {
        return Err(format!("default lexicon is {:?}", defaults.lexicon.entries()));
    }
    let dir = tempfile::tempdir().unwrap();
    let docs = write_full_scale_corpus(dir.path());
    let flags = Flags {
        corpus: Some(dir.path().join("full.jsonl")),
        query: Some("brexit".into()),
        out_dir: Some(dir.path().join("out")),
        scales: Some("20:50".into()),
        ..Default::default()
    };
    let t0 = Instant::now();
    let outcome = run(&Command::Pipeline(flags)).map_err(|e| e.to_string())?;
    let took = t0.elapsed();
    let series = DailySeries::<f64>::parse_csv(&std::fs::read_to_string(outcome.path("series_raw.csv")).unwrap())
        .map_err(|e| e.to_string())?;
    let first = series.start_date();
    let last = series.end_date();
    let in_range = first >= start() && last <= NaiveDate::from_ymd_opt(2016, 7, 31).unwrap();
    let detail = format!(
        "window 7, six-term lexicon; {docs}-doc June-July 2016 pipeline in {took:.2?}, series sum {} over {first}..{last}",
        series.total()
    );
    if docs == 43697 && series.total() == 43697.0 && in_range && took <= Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn end_to_end_determinism() -> Verdict {
    let mut manifests = Vec::new();
    for threads in [1, 1, 2, 8] {
        let dir = tempfile::tempdir().unwrap();
        let flags = Flags {
            config: Some(fixture("config.toml")),
            threads: Some(threads),
            out_dir: Some(dir.path().to_owned()),
            ..Default::default()
        };
        let out = run(&Command::Pipeline(flags)).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(out.path("manifest.toml")).unwrap();
        Manifest::parse(&text).map_err(|e| e.to_string())?;
        manifests.push(text);
    }
    if manifests.windows(2).all(|w| w[0] == w[1]) {
        Ok("bundled fixture: 4 runs (threads 1, 1, 2, 8) with byte-identical manifests".into())
    } else {
        Err("manifests differ between runs".into())
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("correlation oracle", correlation_oracle),
        ("affine invariance", affine_invariance),
        ("planted burst recovery", planted_burst),
        ("k-means monotonicity", kmeans_monotonicity),
        ("planted cluster recovery", planted_clusters),
        ("complexity check", complexity),
        ("HVG oracle", hvg),
        ("TF-IDF oracle", tfidf),
        ("reference-parameter fidelity", reference_parameters),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
