use proptest::prelude::*;

use super::*;
use crate::calibration::{accuracy, average_confidence, consistency_gap_sum, ece as raw_ece};
use crate::harness::{generate_synthetic, split_sources, SynthConfig};
use crate::protocol::evaluate_query;

fn synth(n: usize, s: f64, seed: u64) -> Dataset {
    generate_synthetic(&SynthConfig {
        classes: 5,
        samples: n,
        logit_spread: 2.5,
        miscalibration: s,
        seed,
    })
    .unwrap()
}

fn sources(data: &Dataset, d: usize, n: usize, eps: Epsilon, seed: u64) -> Vec<PrivateSource> {
    split_sources(data, d, n, eps, seed).unwrap().sources
}

fn cfg(method: Method, eps: Epsilon) -> RecalConfig {
    RecalConfig::default().with_method(method).with_epsilon(eps)
}

fn shards_of(sources: &[PrivateSource]) -> Vec<&Dataset> {
    sources.iter().map(|s| s.local_data()).collect()
}

fn pooled(sources: &[PrivateSource]) -> Dataset {
    Dataset::new(
        sources
            .iter()
            .flat_map(|s| s.local_data().samples().to_vec())
            .collect(),
    )
    .unwrap()
}

#[test]
fn identity_temperature_matches_raw_confidence() {
    let data = synth(50, 1.7, 1);
    let model = none_baseline();
    for s in data.samples() {
        let (label, c) = model.apply(s);
        assert_eq!(label, calibration::predict_label(s));
        assert_eq!(c, calibration::confidence(s, 1.0).unwrap());
    }
    let scheme = BinningScheme::default();
    assert_eq!(model.ece(&data, &scheme).unwrap(), raw_ece(&data, 1.0, &scheme).unwrap());
}

#[test]
fn one_bin_remap_yields_overall_accuracy() {
    let data = synth(300, 2.0, 2);
    let scheme = BinningScheme::new(1).unwrap();
    let model = exact::hist_bin(&[&data], &scheme).unwrap();
    let acc = accuracy(&data).unwrap();
    for s in data.samples() {
        assert!((model.apply(s).1 - acc).abs() < 1e-12);
    }
}

#[test]
fn acc_t_finds_consistency_root() {
    let data = synth(3000, 1.8, 3);
    let mut srcs = sources(&data, 10, 200, Epsilon::INFINITE, 3);
    let pool = pooled(&srcs);
    let acc = accuracy(&pool).unwrap();
    // Fine-grid oracle for the root of Acc − Conf(T) on the searched interval.
    let grid: Vec<f64> = (0..10_000).map(|i| 0.5 + 2.5 * i as f64 / 9_999.0).collect();
    let root = grid
        .iter()
        .cloned()
        .min_by(|a, b| {
            let ga = (acc - average_confidence(&pool, *a).unwrap()).abs();
            let gb = (acc - average_confidence(&pool, *b).unwrap()).abs();
            ga.total_cmp(&gb)
        })
        .unwrap();
    let c = cfg(Method::AccT, Epsilon::INFINITE);
    let t = acc_t(&mut srcs, &c).unwrap().temperature().unwrap();
    assert!(
        (t - root).abs() <= c.search.final_width(),
        "t {t} root {root}"
    );
}

#[test]
fn acc_t_on_consistent_data_beats_endpoints() {
    let data = synth(3000, 1.0, 4);
    let mut srcs = sources(&data, 10, 200, Epsilon::INFINITE, 4);
    let pool = pooled(&srcs);
    let c = cfg(Method::AccT, Epsilon::INFINITE);
    let t = acc_t(&mut srcs, &c).unwrap().temperature().unwrap();
    let gap = |t: f64| consistency_gap_sum(&pool, t).unwrap().abs();
    assert!(gap(t) <= gap(0.5));
    assert!(gap(t) <= gap(3.0));
}

#[test]
fn private_runs_are_reproducible() {
    let data = synth(3000, 2.0, 5);
    let run = || {
        let mut srcs = sources(&data, 20, 50, Epsilon::new(1.0).unwrap(), 99);
        acc_t(&mut srcs, &cfg(Method::AccT, Epsilon::new(1.0).unwrap()))
            .unwrap()
            .temperature()
            .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn nll_t_matches_grid_minimizer() {
    let data = synth(4000, 1.6, 6);
    let mut srcs = sources(&data, 10, 300, Epsilon::INFINITE, 6);
    let pool = pooled(&srcs);
    let mut c = cfg(Method::NllT, Epsilon::INFINITE);
    c.search = SearchConfig::minimize(0.5, 3.0, 20).unwrap();
    let t = nll_t(&mut srcs, &c).unwrap().temperature().unwrap();
    let grid: Vec<f64> = (0..10_000).map(|i| 0.5 + 2.5 * i as f64 / 9_999.0).collect();
    let best = grid
        .iter()
        .cloned()
        .min_by(|a, b| {
            calibration::nll_sum(&pool, *a, 10.0)
                .unwrap()
                .total_cmp(&calibration::nll_sum(&pool, *b, 10.0).unwrap())
        })
        .unwrap();
    let grid_step = 2.5 / 9_999.0;
    assert!((t - best).abs() <= c.search.final_width() + grid_step, "t {t} best {best}");
}

#[test]
fn identical_sources_equal_single_source() {
    let data = synth(400, 2.0, 7);
    let shard = data.select(&(0..100).collect::<Vec<_>>());
    let single = || PrivateSource::new(0, shard.clone(), Epsilon::INFINITE, 1).unwrap();
    let c = cfg(Method::NllT, Epsilon::INFINITE);
    let one = nll_t(&mut [single()], &c).unwrap();
    let two = nll_t(&mut [single(), single()], &c).unwrap();
    assert_eq!(one, two);
}

#[test]
fn nll_query_uses_clipped_value() {
    let extreme = Dataset::new(vec![
        LabeledLogits::new(vec![0.0, 40.0], 0).unwrap(),
        LabeledLogits::new(vec![1.0, 0.0], 0).unwrap(),
    ])
    .unwrap();
    let q = QuerySpec::new(QueryKind::NllSum, 0.8, BinningScheme::default(), Epsilon::INFINITE);
    let v = evaluate_query(&extreme, &q).unwrap()[0];
    assert_eq!(v, calibration::nll_sum(&extreme, 0.8, 10.0).unwrap());
    assert!(v < calibration::nll_sum(&extreme, 0.8, f64::INFINITY).unwrap());
}

#[test]
fn one_bin_ece_t_tracks_acc_t() {
    let data = synth(3000, 2.0, 8);
    let mut c = cfg(Method::EceT, Epsilon::INFINITE);
    c.scheme = BinningScheme::new(1).unwrap();
    let t_ece = ece_t(&mut sources(&data, 10, 200, Epsilon::INFINITE, 8), &c)
        .unwrap()
        .temperature()
        .unwrap();
    let t_acc = acc_t(&mut sources(&data, 10, 200, Epsilon::INFINITE, 8), &c)
        .unwrap()
        .temperature()
        .unwrap();
    assert!((t_ece - t_acc).abs() <= c.search.final_width());
}

#[test]
fn ece_t_beats_interval_endpoints() {
    let data = synth(3000, 2.0, 9);
    let mut srcs = sources(&data, 10, 200, Epsilon::INFINITE, 9);
    let pool = pooled(&srcs);
    let c = cfg(Method::EceT, Epsilon::INFINITE);
    let t = ece_t(&mut srcs, &c).unwrap().temperature().unwrap();
    let g = |t: f64| raw_ece(&pool, t, &c.scheme).unwrap();
    assert!(g(t) <= g(0.5));
    assert!(g(t) <= g(3.0));
}

#[test]
fn hist_bin_noiseless_is_pooled_accuracy() {
    let data = synth(2000, 2.0, 10);
    let mut srcs = sources(&data, 8, 100, Epsilon::INFINITE, 10);
    let pool = pooled(&srcs);
    let c = cfg(Method::HistBin, Epsilon::INFINITE);
    let model = hist_bin(&mut srcs, &c).unwrap();
    let stats = calibration::confidence_stats(&pool, 1.0, &c.scheme).unwrap();
    let RecalibratedModel::BinRemap { remap, .. } = &model else {
        panic!("expected a bin remap");
    };
    let mut saw_empty = false;
    for b in 0..c.scheme.bins() {
        if stats.n_bin[b] == 0 {
            saw_empty = true;
            assert_eq!(remap[b], None);
        } else {
            let acc = stats.n_correct[b] as f64 / stats.n_bin[b] as f64;
            assert!((remap[b].unwrap() - acc).abs() < 1e-12);
        }
    }
    // 5 classes: confidences below 0.2 are impossible, so bins 0..3 are empty.
    assert!(saw_empty);
    let low = LabeledLogits::new(vec![0.0; 5], 0).unwrap();
    let (_, c_low) = model.apply(&low);
    assert_eq!(c_low, 0.2);
}

#[test]
fn noisy_tallies_are_clamped_and_thinned() {
    let scheme = BinningScheme::new(3).unwrap();
    let tallies = [-0.7, 5.0, 0.4, 2.0, 4.0, 0.3];
    let RecalibratedModel::BinRemap { remap, .. } = remap_from_tallies(&tallies, &scheme, 0.5) else {
        unreachable!()
    };
    assert_eq!(remap, vec![Some(0.0), Some(1.0), None]);
}

#[test]
fn one_source_baselines() {
    let data = synth(2000, 2.0, 11);
    let c = cfg(Method::OneSource, Epsilon::new(1.0).unwrap());

    let mut single = sources(&data, 1, 500, Epsilon::new(1.0).unwrap(), 1);
    let noiseless = ece_t(
        &mut sources(&data, 1, 500, Epsilon::INFINITE, 1),
        &cfg(Method::EceT, Epsilon::INFINITE),
    )
    .unwrap();
    assert_eq!(one_source(&single, &c).unwrap(), noiseless);
    assert_eq!(single[0].charges(), 0);
    assert_eq!(single[0].budget().spent(), 0.0);
    let _ = recalibrate(&mut single, &c).unwrap();

    let mut inner_none = c.clone();
    inner_none.one_source_inner = Method::None;
    assert_eq!(one_source(&single, &inner_none).unwrap(), RecalibratedModel::Temperature(1.0));

    let many = sources(&data, 100, 10, Epsilon::new(1.0).unwrap(), 2);
    let first = many[0].local_data().clone();
    assert_eq!(first.len(), 10);
    assert_eq!(
        one_source(&many, &c).unwrap(),
        exact::ece_t(&[&first], &c.search, &c.scheme).unwrap()
    );

    let mut nested = c.clone();
    nested.one_source_inner = Method::OneSource;
    assert!(one_source(&many, &nested).is_err());
}

#[test]
fn none_baseline_charges_nothing() {
    let data = synth(500, 2.0, 12);
    let mut srcs = sources(&data, 4, 50, Epsilon::new(1.0).unwrap(), 12);
    let model = recalibrate(&mut srcs, &cfg(Method::None, Epsilon::new(1.0).unwrap())).unwrap();
    assert_eq!(model, RecalibratedModel::Temperature(1.0));
    assert!(srcs.iter().all(|s| s.charges() == 0 && s.budget().spent() == 0.0));
}

#[test]
fn worst_case_ledgers_close_at_epsilon() {
    let data = synth(2000, 2.0, 13);
    let eps = Epsilon::new(1.0).unwrap();
    for method in [Method::NllT, Method::EceT, Method::AccT, Method::HistBin] {
        let mut srcs = sources(&data, 10, 50, eps, 13);
        let c = cfg(method, eps);
        recalibrate(&mut srcs, &c).unwrap();
        let expected_charges = method.query_count(c.search.iterations());
        let (share, _) = c.temperature_share();
        for s in &srcs {
            assert_eq!(s.charges(), expected_charges, "{method}");
            assert!(s.budget().spent() <= 1.0);
            let expected = if method == Method::HistBin {
                1.0
            } else {
                share.value() * expected_charges as f64
            };
            assert!((s.budget().spent() - expected).abs() < 1e-12, "{method}");
            assert_eq!(s.budget().overdraft(), 0.0);
        }
    }
}

#[test]
fn paper_literal_overdraws_by_one_share() {
    let data = synth(2000, 2.0, 14);
    let eps = Epsilon::new(1.0).unwrap();
    let mut srcs = sources(&data, 10, 50, eps, 14);
    let mut c = cfg(Method::AccT, eps);
    c.accounting = Accounting::PaperLiteral;
    acc_t(&mut srcs, &c).unwrap();
    let k = c.search.iterations();
    for s in &srcs {
        assert_eq!(s.charges(), k + 2);
        assert_eq!(s.budget().spent(), 1.0);
        assert!((s.budget().overdraft() - 1.0 / (k + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn exhausted_ledger_aborts_recalibration() {
    let data = synth(2000, 2.0, 15);
    let eps = Epsilon::new(1.0).unwrap();
    let mut srcs = sources(&data, 4, 50, eps, 15);
    let c = cfg(Method::AccT, eps);
    acc_t(&mut srcs, &c).unwrap();
    assert!(matches!(
        acc_t(&mut srcs, &c),
        Err(Error::BudgetExhausted { source_id: Some(0), .. })
    ));
}

#[test]
fn infinite_epsilon_equals_exact_path_bitwise() {
    let data = synth(3000, 2.0, 16);
    let c = cfg(Method::None, Epsilon::INFINITE);
    let make = || sources(&data, 20, 50, Epsilon::INFINITE, 16);
    let base = make();
    let shards = shards_of(&base);
    assert_eq!(nll_t(&mut make(), &c).unwrap(), exact::nll_t(&shards, &c.search).unwrap());
    assert_eq!(
        ece_t(&mut make(), &c).unwrap(),
        exact::ece_t(&shards, &c.search, &c.scheme).unwrap()
    );
    assert_eq!(acc_t(&mut make(), &c).unwrap(), exact::acc_t(&shards, &c.search).unwrap());
    assert_eq!(
        hist_bin(&mut make(), &c).unwrap(),
        exact::hist_bin(&shards, &c.scheme).unwrap()
    );
}

#[test]
fn parsing() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert_eq!("ACC_T".parse::<Method>().unwrap(), Method::AccT);
    assert!("platt".parse::<Method>().is_err());
    assert_eq!("paper".parse::<Accounting>().unwrap(), Accounting::PaperLiteral);
    assert_eq!("worstcase".parse::<Accounting>().unwrap(), Accounting::WorstCase);
    assert!("strict".parse::<Accounting>().is_err());
}

#[test]
fn empty_source_lists_are_rejected() {
    let c = cfg(Method::AccT, Epsilon::INFINITE);
    assert!(matches!(acc_t(&mut [], &c), Err(Error::NoSources)));
    assert!(matches!(hist_bin(&mut [], &c), Err(Error::NoSources)));
    assert!(matches!(one_source(&[], &c), Err(Error::NoSources)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recalibration_never_changes_labels(
        t in 0.05f64..20.0,
        seed in 0u64..1000,
        remap in proptest::collection::vec(proptest::option::of(0.0f64..=1.0), 15),
    ) {
        let data = synth(40, 1.5, seed);
        let models = [
            RecalibratedModel::Temperature(t),
            RecalibratedModel::BinRemap { scheme: BinningScheme::default(), remap },
        ];
        for model in &models {
            for s in data.samples() {
                let (label, c) = model.apply(s);
                prop_assert_eq!(label, calibration::predict_label(s));
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
