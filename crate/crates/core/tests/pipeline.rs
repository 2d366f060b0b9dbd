//! End-to-end checks across modules: generated signals through extraction,
//! model building, sampling, the experiment grid, and file round trips.

use qasel_core::baselines::Method;
use qasel_core::eval::{
    run_experiment, run_experiment_serial, significance_table, source_contribution,
    ExperimentConfig, KnnClassifier, SplitSpec,
};
use qasel_core::io;
use qasel_core::qubo::build_bqm;
use qasel_core::rng::Rng;
use qasel_core::sampler::{select_features, AnnealSchedule, SamplerKind};
use qasel_core::signals::{
    build_feature_matrix, feature_inventory, FeatureMatrix, StressLabel, WindowSpec,
};
use qasel_core::synth::{generate, SyntheticSpec};

fn quick_schedule() -> AnnealSchedule {
    AnnealSchedule {
        sweeps: 200,
        n_reads: 20,
        ..Default::default()
    }
}

/// 39-column matrix with one dominant feature (a near-copy of the label)
/// placed at a known column, everything else independent noise.
fn label_copy_matrix(seed: u64, rows: usize, informative_col: usize) -> FeatureMatrix {
    let (names, sources) = feature_inventory();
    let mut rng = Rng::from_seed(seed);
    let labels: Vec<StressLabel> = (0..rows)
        .map(|i| StressLabel::from_ordinal(i % 3).unwrap())
        .collect();
    let mut values = Vec::with_capacity(rows * 39);
    for (r, label) in labels.iter().enumerate() {
        let _ = r;
        for c in 0..39 {
            let v = if c == informative_col {
                label.ordinal() as f64 + 0.05 * rng.next_normal()
            } else {
                rng.next_normal()
            };
            values.push(v);
        }
    }
    FeatureMatrix::new(values, names, sources, labels).unwrap()
}

#[test]
fn synthetic_record_to_matrix_and_selection() {
    let spec = SyntheticSpec {
        duration_seconds: 1000.0,
        sampling_rate_hz: 16.0,
        seed: 21,
        ..Default::default()
    };
    let record = generate(&spec).unwrap();
    let extraction = build_feature_matrix(&record, &WindowSpec::default()).unwrap();
    let fm = &extraction.matrix;
    assert_eq!(fm.n_cols(), 39);

    let bqm = build_bqm(fm, 1.0).unwrap();
    assert_eq!(bqm.n(), 39);
    let selected = select_features(&bqm, SamplerKind::Annealing, &quick_schedule(), 7).unwrap();
    assert!(!selected.is_empty());
    assert!(selected.iter().all(|&i| i < 39));
}

#[test]
fn qa_selection_contains_label_copy_verified_by_oracle() {
    // On a small matrix (n <= 24) the annealing selection can be compared
    // with the exhaustive oracle directly.
    let rows = 120;
    let mut rng = Rng::from_seed(3);
    let labels: Vec<StressLabel> = (0..rows)
        .map(|i| StressLabel::from_ordinal(i % 3).unwrap())
        .collect();
    let mut cols: Vec<Vec<f64>> = (0..12)
        .map(|_| (0..rows).map(|_| rng.next_normal()).collect())
        .collect();
    cols[4] = labels
        .iter()
        .map(|l| l.ordinal() as f64 + 0.05 * rng.next_normal())
        .collect();
    let mut values = Vec::new();
    for r in 0..rows {
        for col in &cols {
            values.push(col[r]);
        }
    }
    let names = (0..12).map(|i| format!("ecg_f{i}")).collect();
    let sources = vec![qasel_core::signals::Source::Ecg; 12];
    let fm = FeatureMatrix::new(values, names, sources, labels).unwrap();

    let bqm = build_bqm(&fm, 1.0).unwrap();
    let annealed = select_features(&bqm, SamplerKind::Annealing, &AnnealSchedule::default(), 1)
        .unwrap();
    let exact = select_features(&bqm, SamplerKind::Exhaustive, &AnnealSchedule::default(), 1)
        .unwrap();
    assert_eq!(annealed, exact);
    assert!(exact.contains(&4), "label copy missing from {exact:?}");
}

#[test]
fn monotone_sanity_with_separating_feature() {
    // One near-perfect feature: every method at fraction 1.0 should reach
    // high per-class F1 (median over 5 seeds).
    let mut per_class_medians = vec![Vec::new(), Vec::new(), Vec::new()];
    for seed in 0..5 {
        let fm = label_copy_matrix(100 + seed, 240, 12);
        let cfg = ExperimentConfig {
            fractions: vec![1.0],
            n_repeats: 1,
            schedule: quick_schedule(),
            seed,
            ..Default::default()
        };
        let result = run_experiment(&fm, &cfg).unwrap();
        for row in &result.f1_rows {
            per_class_medians[row.class].push(row.f1);
        }
    }
    for (class, scores) in per_class_medians.iter_mut().enumerate() {
        scores.sort_by(f64::total_cmp);
        let median = scores[scores.len() / 2];
        assert!(
            median >= 0.95,
            "class {class} median F1 {median} below 0.95: {scores:?}"
        );
    }
}

#[test]
fn grid_determinism_and_untouched_inputs() {
    let fm = label_copy_matrix(9, 150, 0);
    let fingerprint = |m: &FeatureMatrix| -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        use std::hash::{Hash, Hasher};
        for r in 0..m.n_rows() {
            for v in m.row(r) {
                v.to_bits().hash(&mut h);
            }
            m.labels()[r].ordinal().hash(&mut h);
        }
        h.finish()
    };
    let cfg = ExperimentConfig {
        fractions: vec![1.0, 0.2],
        n_repeats: 3,
        schedule: quick_schedule(),
        seed: 5,
        ..Default::default()
    };
    // hash the derived test set before and after the grid runs
    let split = SplitSpec {
        test_fraction: cfg.test_fraction,
        stratified: true,
        seed: cfg.seed,
    };
    let (_, test_before) = qasel_core::eval::train_test_split(&fm, &split).unwrap();
    let before = fingerprint(&test_before);

    let a = run_experiment(&fm, &cfg).unwrap();
    let b = run_experiment_serial(&fm, &cfg).unwrap();
    assert_eq!(a, b);

    let (_, test_after) = qasel_core::eval::train_test_split(&fm, &split).unwrap();
    assert_eq!(before, fingerprint(&test_after));
    assert_eq!(before, fingerprint(&test_before));

    // byte-identical reports on rerun
    assert_eq!(
        io::results_csv(&a.f1_rows),
        io::results_csv(&run_experiment(&fm, &cfg).unwrap().f1_rows)
    );
}

#[test]
fn significance_and_contribution_reports() {
    let fm = label_copy_matrix(13, 150, 20);
    let cfg = ExperimentConfig {
        fractions: vec![1.0, 0.2],
        n_repeats: 4,
        methods: vec![Method::Qa, Method::MutualInfo],
        schedule: quick_schedule(),
        seed: 2,
        ..Default::default()
    };
    let result = run_experiment(&fm, &cfg).unwrap();
    let table = significance_table(&result, &cfg).unwrap();
    assert_eq!(table.len(), 2 * 3);
    let csv = io::significance_csv(&table);
    assert_eq!(csv.lines().count(), 7);

    // per (method, fraction) source percentages
    for method in [Method::Qa, Method::MutualInfo] {
        for &fraction in &cfg.fractions {
            let rows: Vec<_> = result
                .selections
                .iter()
                .filter(|s| s.method == method && s.fraction == fraction)
                .cloned()
                .collect();
            let contrib = source_contribution(&rows).unwrap();
            let total: f64 = contrib.iter().map(|(_, p)| p).sum();
            assert!((total - 100.0).abs() < 1e-9);
        }
    }
}

#[test]
fn knn_and_split_against_sklearn_style_flow() {
    // fit on train, evaluate on held-out rows; a sanity workflow check
    let fm = label_copy_matrix(31, 180, 5);
    let (train, test) = qasel_core::eval::train_test_split(
        &fm,
        &SplitSpec {
            seed: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let knn = KnnClassifier::fit(&train, &[5], 5).unwrap();
    let correct = (0..test.n_rows())
        .filter(|&r| knn.predict(test.row(r)) == test.labels()[r].ordinal())
        .count();
    assert!(
        correct as f64 / test.n_rows() as f64 > 0.9,
        "accuracy {}",
        correct as f64 / test.n_rows() as f64
    );
}

#[test]
fn matrix_csv_write_read_matches_memory() {
    let spec = SyntheticSpec {
        duration_seconds: 600.0,
        sampling_rate_hz: 16.0,
        seed: 77,
        ..Default::default()
    };
    let record = generate(&spec).unwrap();
    let fm = build_feature_matrix(&record, &WindowSpec::default())
        .unwrap()
        .matrix;
    let mut path = std::env::temp_dir();
    path.push(format!("qasel-pipeline-{}.csv", std::process::id()));
    std::fs::write(&path, io::feature_matrix_csv(&fm)).unwrap();
    let back = io::read_feature_matrix_csv(&path).unwrap();
    std::fs::remove_file(&path).ok();

    assert_eq!(back.n_rows(), fm.n_rows());
    assert_eq!(back.names(), fm.names());
    assert_eq!(back.sources(), fm.sources());
    assert_eq!(back.labels(), fm.labels());
    for r in 0..fm.n_rows() {
        for (a, b) in fm.row(r).iter().zip(back.row(r)) {
            let tol = 1e-8 * a.abs().max(1.0);
            assert!((a - b).abs() <= tol, "row {r}: {a} vs {b}");
        }
    }
}
