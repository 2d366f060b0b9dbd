//! Property tests for the algebraic invariants the modules promise.

use proptest::prelude::*;

use qasel_core::baselines::{anova_p_value, mutual_info};
use qasel_core::qubo::{build_bqm, pearson, Bqm};
use qasel_core::sampler::{simulated_anneal, AnnealSchedule};
use qasel_core::signals::{
    normalize, window_slices, ButterworthLowpass, FeatureMatrix, Source, StressLabel, WindowSpec,
};
use qasel_core::stats::welch_t_p_value;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, len)
}

fn matrix_from_cols(cols: Vec<Vec<f64>>, labels: Vec<StressLabel>) -> FeatureMatrix {
    let n_rows = labels.len();
    let n_cols = cols.len();
    let mut values = Vec::with_capacity(n_rows * n_cols);
    for r in 0..n_rows {
        for col in &cols {
            values.push(col[r]);
        }
    }
    let names = (0..n_cols).map(|i| format!("f{i}")).collect();
    FeatureMatrix::new(values, names, vec![Source::Ecg; n_cols], labels).unwrap()
}

proptest! {
    #[test]
    fn normalize_idempotent(xs in finite_vec(2..64)) {
        let once = normalize(&xs).unwrap();
        let twice = normalize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_output_has_unit_moments(xs in finite_vec(3..64)) {
        let out = normalize(&xs).unwrap();
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let var = out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        // all-zero output happens only for constant input
        prop_assert!(var < 1e-12 || (var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn filter_linearity(
        seed in 0u64..1000,
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let mut rng = qasel_core::rng::Rng::from_seed(seed);
        let x: Vec<f64> = (0..200).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let filt = ButterworthLowpass::design(1.5, 25.0, 5).unwrap();
        let combined: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
        let fx = filt.filter_zero_phase(&x);
        let fy = filt.filter_zero_phase(&y);
        let fc = filt.filter_zero_phase(&combined);
        for i in 0..200 {
            prop_assert!((fc[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn pearson_affine_and_symmetry(
        pairs in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3..40),
        scale in 0.01..10.0f64,
        shift in -100.0..100.0f64,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        let r_sym = pearson(&y, &x).unwrap();
        prop_assert!((r - r_sym).abs() < 1e-12);
        let xs: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let r_affine = pearson(&xs, &y).unwrap();
        prop_assert!((r - r_affine).abs() < 1e-9);
        // self correlation on nondegenerate input
        let vx = {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
        };
        if vx > 1e-9 {
            prop_assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_matches_pairwise_brute_force(
        seed in 0u64..500,
        n in 2usize..20,
    ) {
        let mut rng = qasel_core::rng::Rng::from_seed(seed);
        let h: Vec<f64> = (0..n).map(|_| rng.next_range(-2.0, 2.0)).collect();
        let mut bqm = Bqm::new(h.clone()).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                bqm.set_coupling(i, j, rng.next_range(-2.0, 2.0)).unwrap();
            }
        }
        let x: Vec<bool> = (0..n).map(|_| rng.next_bool()).collect();
        // independent summation in the same canonical term order
        let mut expect = 0.0;
        for i in 0..n {
            if x[i] {
                expect += h[i];
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if x[i] && x[j] {
                    expect += bqm.coupling(i, j);
                }
            }
        }
        prop_assert_eq!(bqm.energy(&x).unwrap(), expect);
    }

    #[test]
    fn duplicate_feature_never_lowers_energy(
        seed in 0u64..300,
        alpha in 1.0..3.0f64,
    ) {
        // matrix with column 1 duplicating column 0
        let mut rng = qasel_core::rng::Rng::from_seed(seed);
        let labels: Vec<StressLabel> =
            (0..30).map(|i| StressLabel::from_ordinal(i % 3).unwrap()).collect();
        let base: Vec<f64> = labels
            .iter()
            .map(|l| l.ordinal() as f64 + 0.5 * rng.next_normal())
            .collect();
        let noise: Vec<f64> = (0..30).map(|_| rng.next_normal()).collect();
        let fm = matrix_from_cols(vec![base.clone(), base, noise], labels);
        let bqm = build_bqm(&fm, alpha).unwrap();
        // any assignment with the original on: adding the duplicate cannot help
        for pattern in 0..2u8 {
            let with_noise = pattern == 1;
            let without = vec![true, false, with_noise];
            let with = vec![true, true, with_noise];
            prop_assert!(bqm.energy(&with).unwrap() >= bqm.energy(&without).unwrap() - 1e-12);
        }
    }

    #[test]
    fn window_slices_tile_exactly(
        n_samples in 0usize..5000,
        fs in prop::sample::select(vec![1.0f64, 4.0, 10.0, 32.0]),
        window_s in 2.0..40.0f64,
        step_frac in 0.25..1.0f64,
    ) {
        let spec = WindowSpec {
            window_seconds: window_s,
            step_seconds: window_s * step_frac,
        };
        let slices = window_slices(n_samples, fs, &spec);
        let win = (spec.window_seconds * fs).round() as usize;
        let step = (spec.step_seconds * fs).round() as usize;
        if win == 0 || step == 0 || n_samples < win {
            prop_assert!(slices.is_empty());
        } else {
            prop_assert_eq!(slices.len(), (n_samples - win) / step + 1);
            for s in &slices {
                prop_assert_eq!(s.end - s.start, win);
                prop_assert!(s.end <= n_samples);
            }
            for pair in slices.windows(2) {
                prop_assert_eq!(pair[1].start - pair[0].start, step);
            }
        }
    }

    #[test]
    fn p_values_stay_in_unit_interval(
        groups in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64), 6..30),
    ) {
        let labels: Vec<StressLabel> = (0..groups.len() * 3)
            .map(|i| StressLabel::from_ordinal(i % 3).unwrap())
            .collect();
        let feature: Vec<f64> = groups.iter().flat_map(|g| [g.0, g.1, g.2]).collect();
        let p = anova_p_value(&feature, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));

        let a: Vec<f64> = groups.iter().map(|g| g.0).collect();
        let b: Vec<f64> = groups.iter().map(|g| g.1).collect();
        let pw = welch_t_p_value(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&pw));
        let pw_sym = welch_t_p_value(&b, &a).unwrap();
        prop_assert!((pw - pw_sym).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_nonnegative_and_class_symmetric(
        pairs in prop::collection::vec((-20.0..20.0f64, 0usize..3), 4..60),
    ) {
        let feature: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let labels: Vec<StressLabel> =
            pairs.iter().map(|p| StressLabel::from_ordinal(p.1).unwrap()).collect();
        let mi = mutual_info(&feature, &labels, 10).unwrap();
        prop_assert!(mi >= 0.0);
        // relabeling classes permutes histogram columns only
        let swapped: Vec<StressLabel> = labels
            .iter()
            .map(|l| StressLabel::from_ordinal(2 - l.ordinal()).unwrap())
            .collect();
        let mi_swapped = mutual_info(&feature, &swapped, 10).unwrap();
        prop_assert!((mi - mi_swapped).abs() < 1e-12);
    }
}

// Heavier sampler properties get a smaller case budget.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn anneal_energy_never_below_oracle(seed in 0u64..200) {
        let mut rng = qasel_core::rng::Rng::from_seed(seed);
        let n = 10;
        let h: Vec<f64> = (0..n).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let mut bqm = Bqm::new(h).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                bqm.set_coupling(i, j, rng.next_range(-1.0, 1.0)).unwrap();
            }
        }
        let oracle = qasel_core::sampler::exhaustive_solve(&bqm).unwrap();
        let schedule = AnnealSchedule { n_reads: 20, sweeps: 300, ..Default::default() };
        let set = simulated_anneal(&bqm, &schedule, seed).unwrap();
        prop_assert!(set.best().energy >= oracle.energy - 1e-12);
        for s in &set.samples {
            prop_assert_eq!(s.energy, bqm.energy(&s.x).unwrap());
        }
        for pair in set.samples.windows(2) {
            prop_assert!(pair[0].energy <= pair[1].energy);
        }
    }
}
