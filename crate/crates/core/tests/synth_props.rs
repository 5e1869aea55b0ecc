mod oracles;

use chrono::NaiveDate;
use eventbasis::corpus::parse_corpus;
use eventbasis::flowseries::{build_daily_series, sample_template, LifecycleTemplate};
use eventbasis::synthflow::{generate_burst_series, generate_cluster_corpus, BurstSpec, ClusterSpec};
use oracles::pearson_oracle;
use proptest::prelude::*;

fn burst(length: usize, shift: usize, scale: usize, sigma: f64, seed: u64) -> BurstSpec {
    BurstSpec {
        start_date: NaiveDate::from_ymd_opt(2016, 6, 1).unwrap(),
        length_days: length,
        plant_shift: shift,
        plant_scale: scale,
        amplitude: 100.0,
        baseline: 5.0,
        noise_sigma: sigma,
        rng_seed: seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_plant_correlates_perfectly(shift in 0usize..50, scale in 2usize..60) {
        let tpl = LifecycleTemplate::nine_phase();
        let s = generate_burst_series(&tpl, &burst(120, shift, scale, 0.0, 0)).unwrap();
        let p = sample_template(&tpl, scale).unwrap();
        let c = pearson_oracle(&s.values()[shift..shift + scale], &p).unwrap();
        prop_assert!((c - 1.0).abs() < 1e-12);
        prop_assert!(s.values()[..shift].iter().all(|v| *v == 5.0));
    }

    #[test]
    fn same_seed_same_series(seed in any::<u64>()) {
        let tpl = LifecycleTemplate::nine_phase();
        let a = generate_burst_series::<f64>(&tpl, &burst(90, 10, 30, 5.0, seed)).unwrap();
        let b = generate_burst_series::<f64>(&tpl, &burst(90, 10, 30, 5.0, seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn generated_corpora_round_trip(seed in any::<u64>(), docs in 1usize..20, bg in 0usize..10) {
        let mut spec = ClusterSpec::planted(&["protest", "referendum"], 10, 12, docs, seed);
        spec.background_docs = bg;
        let (c, truth) = generate_cluster_corpus(&spec, &LifecycleTemplate::<f64>::nine_phase(), &burst(30, 0, 20, 0.0, seed)).unwrap();
        prop_assert_eq!(c.len(), 2 * docs + bg);
        prop_assert_eq!(truth.len(), 2 * docs);
        prop_assert_eq!(parse_corpus(&c.to_jsonl()).unwrap(), c);
    }
}

/// 150 documents over a 10-day burst. Multinomial sampling makes C a random
/// variable (simulated pass rate for C >= 0.9 is about 98%), so check a rate.
#[test]
fn doc_histogram_follows_the_burst() {
    let tpl = LifecycleTemplate::<f64>::nine_phase();
    let p = sample_template(&tpl, 10).unwrap();
    let mut passing = 0;
    for seed in 0..50 {
        let b = BurstSpec {
            baseline: 0.0,
            ..burst(10, 0, 10, 0.0, seed)
        };
        let spec = ClusterSpec::planted(&["protest"], 10, 10, 150, seed);
        let (c, _) = generate_cluster_corpus(&spec, &tpl, &b).unwrap();
        let s = build_daily_series::<f64>(&c).unwrap();
        // The corpus series starts at its first document, not the burst start.
        let offset = (s.start_date() - b.start_date).num_days() as usize;
        let mut hist = vec![0.0; 10];
        for (i, v) in s.values().iter().enumerate() {
            hist[offset + i] = *v;
        }
        if pearson_oracle(&hist, &p).unwrap() >= 0.9 {
            passing += 1;
        }
    }
    assert!(passing >= 45, "{passing}/50 seeds reach 0.9");
}

#[test]
fn invalid_specs_are_rejected() {
    let tpl = LifecycleTemplate::<f64>::nine_phase();
    assert!(generate_burst_series(&tpl, &burst(10, 5, 6, 0.0, 0)).is_err());
    assert!(generate_burst_series(&tpl, &burst(10, 0, 1, 0.0, 0)).is_err());
    let mut spec = ClusterSpec::planted(&["protest", "petition"], 10, 10, 5, 0);
    spec.shared_vocab.push("protest".into());
    assert!(spec.validate().is_err());
    assert!(ClusterSpec::planted(&["protest"], 9, 10, 5, 0).validate().is_err());
}
