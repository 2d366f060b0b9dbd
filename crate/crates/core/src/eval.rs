//! Train/test evaluation harness: stratified splitting, training-fraction
//! subsampling, kNN classification, per-class F1, the
//! method x fraction x repetition experiment grid, significance testing
//! against the full-data runs, and per-source selection accounting.
//!
//! Grid cells are independent given their derived seeds and results are
//! assembled in a canonical (method, fraction, repetition, class) order, so
//! parallel and sequential execution emit identical artifacts.

use crate::baselines::{baseline_select, Method};
use crate::error::{Error, Result};
use crate::qubo::build_bqm;
use crate::sampler::{select_features, AnnealSchedule, SamplerKind};
use crate::signals::{FeatureMatrix, Source, StressLabel};
use crate::stats::{mann_whitney_p_value, welch_t_p_value};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Outer train/test split parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.3,
            stratified: true,
            seed: 0,
        }
    }
}

/// Seeded (stratified by default) split. Per-class test counts are
/// round(class_count * test_fraction); train and test rows are disjoint and
/// together cover every row.
pub fn train_test_split(
    fm: &FeatureMatrix,
    spec: &SplitSpec,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must lie in (0, 1)"));
    }
    if fm.n_rows() < 10 {
        return Err(Error::invalid("split needs at least 10 rows"));
    }
    let classes = fm.classes_present();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let mut rng = Rng::from_seed(spec.seed);
    let mut test_rows: Vec<usize> = Vec::new();

    if spec.stratified {
        for class in classes {
            let mut rows: Vec<usize> = (0..fm.n_rows())
                .filter(|&r| fm.labels()[r] == class)
                .collect();
            if rows.len() < 2 {
                return Err(Error::invalid(format!(
                    "class '{class}' has fewer than 2 rows"
                )));
            }
            let n_test = (rows.len() as f64 * spec.test_fraction).round() as usize;
            rng.shuffle(&mut rows);
            test_rows.extend(rows.into_iter().take(n_test));
        }
    } else {
        let mut rows: Vec<usize> = (0..fm.n_rows()).collect();
        rng.shuffle(&mut rows);
        let n_test = (fm.n_rows() as f64 * spec.test_fraction).round() as usize;
        test_rows.extend(rows.into_iter().take(n_test));
    }

    test_rows.sort_unstable();
    let in_test: Vec<bool> = {
        let mut mask = vec![false; fm.n_rows()];
        for &r in &test_rows {
            mask[r] = true;
        }
        mask
    };
    let train_rows: Vec<usize> = (0..fm.n_rows()).filter(|&r| !in_test[r]).collect();
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::invalid("split left an empty train or test set"));
    }
    Ok((fm.select_rows(&train_rows), fm.select_rows(&test_rows)))
}

/// Allocate round(fraction * total) rows across classes by largest
/// remainder, at least one row per class present.
fn stratified_allocation(class_counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = class_counts.iter().sum();
    let target = ((total as f64 * fraction).round() as usize).clamp(1, total);

    let mut alloc: Vec<usize> = Vec::with_capacity(class_counts.len());
    let mut remainders: Vec<(usize, f64)> = Vec::new();
    for (c, &count) in class_counts.iter().enumerate() {
        let ideal = count as f64 * fraction;
        let base = (ideal.floor() as usize).min(count);
        alloc.push(base);
        remainders.push((c, ideal - ideal.floor()));
    }
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut assigned: usize = alloc.iter().sum();
    let mut idx = 0;
    while assigned < target && alloc.iter().zip(class_counts).any(|(a, c)| a < c) {
        let (c, _) = remainders[idx % remainders.len()];
        if alloc[c] < class_counts[c] {
            alloc[c] += 1;
            assigned += 1;
        }
        idx += 1;
    }

    // every class present keeps at least one row
    for c in 0..alloc.len() {
        if class_counts[c] > 0 && alloc[c] == 0 {
            alloc[c] = 1;
            if let Some(donor) = (0..alloc.len())
                .filter(|&d| alloc[d] > 1)
                .max_by_key(|&d| alloc[d])
            {
                alloc[donor] -= 1;
            }
        }
    }
    alloc
}

/// Stratified seeded subsample of round(fraction * rows) rows, at least one
/// per class. fraction = 1 is the identity.
pub fn subsample_training(train: &FeatureMatrix, fraction: f64, seed: u64) -> Result<FeatureMatrix> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("training fraction must lie in (0, 1]"));
    }
    if fraction == 1.0 {
        return Ok(train.clone());
    }
    let mut rng = Rng::from_seed(seed);
    let mut class_counts = [0usize; 3];
    for l in train.labels() {
        class_counts[l.ordinal()] += 1;
    }
    let alloc = stratified_allocation(&class_counts, fraction);

    let mut keep: Vec<usize> = Vec::new();
    for class in StressLabel::ALL {
        let mut rows: Vec<usize> = (0..train.n_rows())
            .filter(|&r| train.labels()[r] == class)
            .collect();
        if rows.is_empty() {
            continue;
        }
        rng.shuffle(&mut rows);
        keep.extend(rows.into_iter().take(alloc[class.ordinal()]));
    }
    keep.sort_unstable();
    Ok(train.select_rows(&keep))
}

/// k-nearest-neighbors over a feature subset, standardized with training
/// statistics. Distance ties resolve to the lower training-row index and
/// vote ties to the lower class index.
#[derive(Clone, Debug)]
pub struct KnnClassifier {
    k: usize,
    feature_indices: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl KnnClassifier {
    pub fn fit(train: &FeatureMatrix, feature_indices: &[usize], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if train.n_rows() < k {
            return Err(Error::invalid(format!(
                "knn needs at least k={k} training rows, got {}",
                train.n_rows()
            )));
        }
        if feature_indices.is_empty() {
            return Err(Error::invalid("knn needs at least one feature"));
        }
        if let Some(&bad) = feature_indices.iter().find(|&&i| i >= train.n_cols()) {
            return Err(Error::invalid(format!("feature index {bad} out of range")));
        }
        let n = train.n_rows() as f64;
        let mut means = Vec::with_capacity(feature_indices.len());
        let mut stds = Vec::with_capacity(feature_indices.len());
        for &c in feature_indices {
            let col = train.column(c);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            means.push(mean);
            stds.push(if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 });
        }
        let rows: Vec<Vec<f64>> = (0..train.n_rows())
            .map(|r| {
                feature_indices
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (train.row(r)[c] - means[j]) / stds[j])
                    .collect()
            })
            .collect();
        let labels = train.labels().iter().map(|l| l.ordinal()).collect();
        Ok(KnnClassifier {
            k,
            feature_indices: feature_indices.to_vec(),
            means,
            stds,
            rows,
            labels,
        })
    }

    /// Predict the class ordinal for a full-width feature row.
    pub fn predict(&self, row: &[f64]) -> usize {
        let query: Vec<f64> = self
            .feature_indices
            .iter()
            .enumerate()
            .map(|(j, &c)| (row[c] - self.means[j]) / self.stds[j])
            .collect();
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d2: f64 = r.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = [0usize; 3];
        for &(_, i) in dist.iter().take(self.k) {
            votes[self.labels[i]] += 1;
        }
        let mut winner = 0;
        for c in 1..3 {
            if votes[c] > votes[winner] {
                winner = c;
            }
        }
        winner
    }
}

/// Per-class F1 for the three stress classes. Any 0/0 (class never
/// predicted, never present, or no true positives) scores 0.
pub fn f1_per_class(truth: &[usize], pred: &[usize]) -> Result<[f64; 3]> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut tp = [0.0f64; 3];
    let mut fp = [0.0f64; 3];
    let mut fn_ = [0.0f64; 3];
    for (&t, &p) in truth.iter().zip(pred) {
        if t == p {
            tp[t] += 1.0;
        } else {
            fp[p] += 1.0;
            fn_[t] += 1.0;
        }
    }
    let mut f1 = [0.0f64; 3];
    for c in 0..3 {
        let precision = if tp[c] + fp[c] > 0.0 { tp[c] / (tp[c] + fp[c]) } else { 0.0 };
        let recall = if tp[c] + fn_[c] > 0.0 { tp[c] / (tp[c] + fn_[c]) } else { 0.0 };
        f1[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    Ok(f1)
}

/// Which test backs the significance table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceTest {
    #[default]
    WelchT,
    MannWhitney,
}

/// Full experiment-grid configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub fractions: Vec<f64>,
    pub n_repeats: usize,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub schedule: AnnealSchedule,
    pub knn_k: usize,
    pub mi_bins: usize,
    pub test_fraction: f64,
    pub significance: SignificanceTest,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            fractions: vec![1.0, 0.3, 0.2, 0.1],
            n_repeats: 10,
            methods: Method::ALL.to_vec(),
            alpha: 1.0,
            schedule: AnnealSchedule::default(),
            knn_k: 5,
            mi_bins: 10,
            test_fraction: 0.3,
            significance: SignificanceTest::WelchT,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::invalid("at least one training fraction required"));
        }
        if self.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::invalid("fractions must lie in (0, 1]"));
        }
        if self.n_repeats == 0 {
            return Err(Error::invalid("at least one repetition required"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method required"));
        }
        if self.knn_k == 0 || self.mi_bins == 0 {
            return Err(Error::invalid("knn_k and mi_bins must be positive"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::invalid("alpha must be nonnegative"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test fraction must lie in (0, 1)"));
        }
        self.schedule.validate()
    }
}

/// One F1 observation of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Row {
    pub method: Method,
    pub fraction: f64,
    pub repetition: usize,
    pub class: usize,
    pub f1: f64,
}

/// One selected feature of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub method: Method,
    pub fraction: f64,
    pub repetition: usize,
    pub feature_index: usize,
    pub feature_name: String,
    pub source: Source,
}

/// Grid output in canonical (method, fraction, repetition, class) order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub f1_rows: Vec<F1Row>,
    pub selections: Vec<SelectionRow>,
}

struct CellOutput {
    per_method: Vec<(Method, [f64; 3], Vec<usize>)>,
}

fn run_cell(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    cfg: &ExperimentConfig,
    fraction: f64,
    rep: usize,
) -> Result<CellOutput> {
    let rep_seed = cfg.seed.wrapping_add(rep as u64);
    let sub = subsample_training(train, fraction, rep_seed)?;

    // QA runs first: its cardinality fixes k for the matched baselines.
    let bqm = build_bqm(&sub, cfg.alpha)?;
    let qa_indices = select_features(&bqm, SamplerKind::Annealing, &cfg.schedule, rep_seed)?;
    let matched_k = qa_indices.len();

    let truth: Vec<usize> = test.labels().iter().map(|l| l.ordinal()).collect();
    let mut per_method = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let indices = match method {
            Method::Qa => qa_indices.clone(),
            Method::MutualInfo => {
                crate::baselines::mutual_info_select(&sub, matched_k, cfg.mi_bins)?.indices
            }
            other => baseline_select(&sub, other, matched_k)?.indices,
        };
        let knn = KnnClassifier::fit(&sub, &indices, cfg.knn_k)?;
        let pred: Vec<usize> = (0..test.n_rows()).map(|r| knn.predict(test.row(r))).collect();
        let f1 = f1_per_class(&truth, &pred)?;
        per_method.push((method, f1, indices));
    }
    Ok(CellOutput { per_method })
}

/// Run the full grid: one fixed outer split, then every
/// method x fraction x repetition cell against the untouched test set.
pub fn run_experiment(fm: &FeatureMatrix, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    experiment_impl(fm, cfg, cfg!(feature = "parallel"))
}

/// Reference sequential grid; identical output to [`run_experiment`].
pub fn run_experiment_serial(fm: &FeatureMatrix, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    experiment_impl(fm, cfg, false)
}

fn experiment_impl(
    fm: &FeatureMatrix,
    cfg: &ExperimentConfig,
    parallel: bool,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let split = SplitSpec {
        test_fraction: cfg.test_fraction,
        stratified: true,
        seed: cfg.seed,
    };
    let (train, test) = train_test_split(fm, &split)?;

    let cell_ids: Vec<(usize, usize)> = (0..cfg.fractions.len())
        .flat_map(|fi| (0..cfg.n_repeats).map(move |rep| (fi, rep)))
        .collect();

    let run = |&(fi, rep): &(usize, usize)| run_cell(&train, &test, cfg, cfg.fractions[fi], rep);

    let cells: Vec<CellOutput> = if parallel {
        #[cfg(feature = "parallel")]
        {
            cell_ids.par_iter().map(run).collect::<Result<Vec<_>>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            cell_ids.iter().map(run).collect::<Result<Vec<_>>>()?
        }
    } else {
        cell_ids.iter().map(run).collect::<Result<Vec<_>>>()?
    };

    let mut f1_rows = Vec::new();
    let mut selections = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (fi, &fraction) in cfg.fractions.iter().enumerate() {
            for rep in 0..cfg.n_repeats {
                let cell = &cells[fi * cfg.n_repeats + rep];
                let (cell_method, f1, indices) = &cell.per_method[mi];
                debug_assert_eq!(*cell_method, method);
                for (class, &score) in f1.iter().enumerate() {
                    f1_rows.push(F1Row {
                        method,
                        fraction,
                        repetition: rep,
                        class,
                        f1: score,
                    });
                }
                for &idx in indices {
                    selections.push(SelectionRow {
                        method,
                        fraction,
                        repetition: rep,
                        feature_index: idx,
                        feature_name: fm.names()[idx].clone(),
                        source: fm.sources()[idx],
                    });
                }
            }
        }
    }
    Ok(ExperimentResult { f1_rows, selections })
}

/// One row of the significance table: a reduced-fraction F1 population
/// tested against the fraction-1.0 population of the same method and class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub method: Method,
    pub class: usize,
    pub fraction: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Welch-t (or Mann-Whitney) comparison of each reduced fraction against
/// the full-training-data runs. Empty when there is no 1.0 fraction or
/// fewer than two repetitions.
pub fn significance_table(
    result: &ExperimentResult,
    cfg: &ExperimentConfig,
) -> Result<Vec<SignificanceRow>> {
    if cfg.n_repeats < 2 || !cfg.fractions.contains(&1.0) {
        return Ok(Vec::new());
    }
    let collect = |method: Method, class: usize, fraction: f64| -> Vec<f64> {
        result
            .f1_rows
            .iter()
            .filter(|r| r.method == method && r.class == class && r.fraction == fraction)
            .map(|r| r.f1)
            .collect()
    };
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for class in 0..3 {
            let baseline = collect(method, class, 1.0);
            for &fraction in cfg.fractions.iter().filter(|&&f| f != 1.0) {
                let sample = collect(method, class, fraction);
                let p = match cfg.significance {
                    SignificanceTest::WelchT => welch_t_p_value(&sample, &baseline)?,
                    SignificanceTest::MannWhitney => mann_whitney_p_value(&sample, &baseline)?,
                };
                rows.push(SignificanceRow {
                    method,
                    class,
                    fraction,
                    p_value: p,
                    significant: p < 0.05,
                });
            }
        }
    }
    Ok(rows)
}

/// Percentage of selected features per source; sums to 100.
pub fn source_contribution(rows: &[SelectionRow]) -> Result<[(Source, f64); 4]> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = [0usize; 4];
    for row in rows {
        let slot = Source::ALL.iter().position(|&s| s == row.source).unwrap();
        counts[slot] += 1;
    }
    let total = rows.len() as f64;
    let mut out = [(Source::HandEda, 0.0); 4];
    for (i, &source) in Source::ALL.iter().enumerate() {
        out[i] = (source, 100.0 * counts[i] as f64 / total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::Source;
    use approx::assert_relative_eq;

    fn matrix(cols: Vec<Vec<f64>>, labels: Vec<StressLabel>) -> FeatureMatrix {
        let n_rows = labels.len();
        let n_cols = cols.len();
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            for col in &cols {
                values.push(col[r]);
            }
        }
        let names = (0..n_cols).map(|i| format!("f{i}")).collect();
        let sources = vec![Source::Ecg; n_cols];
        FeatureMatrix::new(values, names, sources, labels).unwrap()
    }

    fn balanced_labels(counts: [usize; 3]) -> Vec<StressLabel> {
        let mut labels = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            labels.extend(std::iter::repeat_n(StressLabel::from_ordinal(c).unwrap(), n));
        }
        labels
    }

    #[test]
    fn split_counts_per_class() {
        let labels = balanced_labels([34, 33, 33]);
        let mut rng = Rng::from_seed(1);
        let col: Vec<f64> = (0..100).map(|_| rng.next_normal()).collect();
        let fm = matrix(vec![col], labels);
        let (train, test) = train_test_split(&fm, &SplitSpec::default()).unwrap();
        assert_eq!(test.n_rows(), 30);
        assert_eq!(train.n_rows(), 70);
        let mut counts = [0usize; 3];
        for l in test.labels() {
            counts[l.ordinal()] += 1;
        }
        assert_eq!(counts, [10, 10, 10]);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let labels = balanced_labels([20, 20, 20]);
        let col: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        let spec = SplitSpec {
            seed: 7,
            ..Default::default()
        };
        let (tr1, te1) = train_test_split(&fm, &spec).unwrap();
        let (tr2, te2) = train_test_split(&fm, &spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        // disjoint + exhaustive: row values are unique ids here
        let mut seen: Vec<f64> = tr1
            .labels()
            .iter()
            .enumerate()
            .map(|(r, _)| tr1.row(r)[0])
            .chain(te1.labels().iter().enumerate().map(|(r, _)| te1.row(r)[0]))
            .collect();
        seen.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (0..60).map(|i| i as f64).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn split_two_class_rounding() {
        let labels = balanced_labels([10, 10, 0]);
        let col: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        let (_, test) = train_test_split(&fm, &SplitSpec::default()).unwrap();
        let lows = test.labels().iter().filter(|l| **l == StressLabel::Low).count();
        assert_eq!(lows, 3);
    }

    #[test]
    fn subsample_identity_at_full_fraction() {
        let labels = balanced_labels([5, 5, 5]);
        let col: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        assert_eq!(subsample_training(&fm, 1.0, 9).unwrap(), fm);
    }

    #[test]
    fn subsample_rounds_with_min_per_class() {
        let labels = balanced_labels([24, 23, 23]);
        let col: Vec<f64> = (0..70).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        let sub = subsample_training(&fm, 0.1, 3).unwrap();
        assert_eq!(sub.n_rows(), 7);
        let mut counts = [0usize; 3];
        for l in sub.labels() {
            counts[l.ordinal()] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 1), "{counts:?}");
        // determinism
        assert_eq!(sub, subsample_training(&fm, 0.1, 3).unwrap());
    }

    #[test]
    fn subsample_tiny_fraction_keeps_every_class() {
        let labels = balanced_labels([40, 3, 3]);
        let col: Vec<f64> = (0..46).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        let sub = subsample_training(&fm, 0.05, 1).unwrap();
        let mut counts = [0usize; 3];
        for l in sub.labels() {
            counts[l.ordinal()] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 1), "{counts:?}");
    }

    #[test]
    fn knn_unanimous_training_set() {
        let labels = vec![StressLabel::Medium; 8];
        let col: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let fm = matrix(vec![col], labels);
        let knn = KnnClassifier::fit(&fm, &[0], 5).unwrap();
        assert_eq!(knn.predict(&[3.2]), 1);
    }

    #[test]
    fn knn_exact_match_with_k_one() {
        use StressLabel::*;
        let labels = vec![Low, Medium, High, Low, Medium];
        let col = vec![0.0, 10.0, 20.0, 1.0, 11.0];
        let fm = matrix(vec![col], labels);
        let knn = KnnClassifier::fit(&fm, &[0], 1).unwrap();
        assert_eq!(knn.predict(&[10.0]), 1);
        assert_eq!(knn.predict(&[20.0]), 2);
    }

    #[test]
    fn knn_separated_blobs_are_perfect() {
        for seed in 0..5 {
            let mut rng = Rng::from_seed(seed);
            let mut cols = vec![Vec::new(), Vec::new()];
            let mut labels = Vec::new();
            let mut queries: Vec<([f64; 2], usize)> = Vec::new();
            for class in 0..3usize {
                let center = 10.0 * class as f64; // 10 sigma apart
                for _ in 0..30 {
                    cols[0].push(center + rng.next_normal());
                    cols[1].push(center + rng.next_normal());
                    labels.push(StressLabel::from_ordinal(class).unwrap());
                }
                for _ in 0..10 {
                    queries.push((
                        [center + rng.next_normal(), center + rng.next_normal()],
                        class,
                    ));
                }
            }
            let fm = matrix(cols, labels);
            let knn = KnnClassifier::fit(&fm, &[0, 1], 5).unwrap();
            for (q, class) in queries {
                assert_eq!(knn.predict(&q), class, "seed {seed}");
            }
        }
    }

    #[test]
    fn knn_requires_enough_rows() {
        let labels = vec![StressLabel::Low; 3];
        let fm = matrix(vec![vec![1.0, 2.0, 3.0]], labels);
        assert!(KnnClassifier::fit(&fm, &[0], 5).is_err());
    }

    #[test]
    fn f1_perfect_prediction() {
        let t = vec![0, 1, 2, 0, 1, 2];
        assert_eq!(f1_per_class(&t, &t).unwrap(), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn f1_hand_computed_half() {
        // class 0: TP=5, FP=5, FN=5 -> precision = recall = 0.5 -> F1 = 0.5
        let mut truth = vec![0usize; 5];
        let mut pred = vec![0usize; 5];
        truth.extend(vec![1; 5]); // predicted 0, true 1: FP for 0
        pred.extend(vec![0; 5]);
        truth.extend(vec![0; 5]); // predicted 1, true 0: FN for 0
        pred.extend(vec![1; 5]);
        let f1 = f1_per_class(&truth, &pred).unwrap();
        assert_relative_eq!(f1[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn f1_absent_class_is_zero() {
        let t = vec![0, 0, 1, 1];
        let p = vec![0, 0, 1, 1];
        let f1 = f1_per_class(&t, &p).unwrap();
        assert_eq!(f1[2], 0.0);
        assert_eq!(f1[0], 1.0);
    }

    #[test]
    fn f1_rejects_mismatched_lengths() {
        assert!(f1_per_class(&[0, 1], &[0]).is_err());
    }

    fn planted_fm(seed: u64, rows: usize) -> FeatureMatrix {
        let mut rng = Rng::from_seed(seed);
        let labels = balanced_labels([rows / 3, rows / 3, rows - 2 * (rows / 3)]);
        let y: Vec<f64> = labels.iter().map(|l| l.ordinal() as f64).collect();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        // strong planted feature + noise
        cols.push(y.iter().map(|v| 2.0 * v + 0.2 * rng.next_normal()).collect());
        for _ in 0..7 {
            cols.push((0..rows).map(|_| rng.next_normal()).collect());
        }
        matrix(cols, labels)
    }

    #[test]
    fn grid_shape_and_determinism() {
        let fm = planted_fm(5, 90);
        let cfg = ExperimentConfig {
            n_repeats: 3,
            schedule: AnnealSchedule {
                sweeps: 150,
                n_reads: 12,
                ..Default::default()
            },
            seed: 11,
            ..Default::default()
        };
        let a = run_experiment(&fm, &cfg).unwrap();
        assert_eq!(a.f1_rows.len(), 4 * 4 * 3 * 3);
        let b = run_experiment(&fm, &cfg).unwrap();
        assert_eq!(a, b);
        // canonical ordering regardless of execution strategy
        let serial = run_experiment_serial(&fm, &cfg).unwrap();
        assert_eq!(a, serial);
    }

    #[test]
    fn deterministic_selector_ignores_repetition_seed_at_full_fraction() {
        let fm = planted_fm(6, 90);
        let cfg = ExperimentConfig {
            fractions: vec![1.0],
            n_repeats: 4,
            methods: vec![Method::Pearson],
            schedule: AnnealSchedule {
                sweeps: 100,
                n_reads: 8,
                ..Default::default()
            },
            seed: 2,
            ..Default::default()
        };
        let result = run_experiment(&fm, &cfg).unwrap();
        let rep0: Vec<usize> = result
            .selections
            .iter()
            .filter(|s| s.repetition == 0)
            .map(|s| s.feature_index)
            .collect();
        for rep in 1..4 {
            let sel: Vec<usize> = result
                .selections
                .iter()
                .filter(|s| s.repetition == rep)
                .map(|s| s.feature_index)
                .collect();
            assert_eq!(rep0, sel);
        }
    }

    #[test]
    fn significance_table_shape() {
        let fm = planted_fm(7, 90);
        let cfg = ExperimentConfig {
            fractions: vec![1.0, 0.3],
            n_repeats: 4,
            methods: vec![Method::Pearson, Method::MutualInfo],
            schedule: AnnealSchedule {
                sweeps: 100,
                n_reads: 8,
                ..Default::default()
            },
            seed: 3,
            ..Default::default()
        };
        let result = run_experiment(&fm, &cfg).unwrap();
        let table = significance_table(&result, &cfg).unwrap();
        // 2 methods x 3 classes x 1 reduced fraction
        assert_eq!(table.len(), 6);
        for row in &table {
            assert!((0.0..=1.0).contains(&row.p_value));
            assert_eq!(row.significant, row.p_value < 0.05);
        }
        // single repetition -> empty table
        let cfg1 = ExperimentConfig {
            n_repeats: 1,
            ..cfg
        };
        let res1 = run_experiment(&fm, &cfg1).unwrap();
        assert!(significance_table(&res1, &cfg1).unwrap().is_empty());
    }

    #[test]
    fn contribution_percentages() {
        let row = |source: Source| SelectionRow {
            method: Method::Qa,
            fraction: 1.0,
            repetition: 0,
            feature_index: 0,
            feature_name: "f".into(),
            source,
        };
        let rows: Vec<SelectionRow> = std::iter::repeat_n(row(Source::Ecg), 6)
            .chain(std::iter::repeat_n(row(Source::Resp), 4))
            .collect();
        let contrib = source_contribution(&rows).unwrap();
        let value = |s: Source| contrib.iter().find(|(x, _)| *x == s).unwrap().1;
        assert_relative_eq!(value(Source::Ecg), 60.0, epsilon = 1e-9);
        assert_relative_eq!(value(Source::Resp), 40.0, epsilon = 1e-9);
        assert_relative_eq!(value(Source::HandEda), 0.0, epsilon = 1e-9);
        let total: f64 = contrib.iter().map(|(_, p)| p).sum();
        assert_relative_eq!(total, 100.0, epsilon = 1e-9);

        let all_one: Vec<SelectionRow> = std::iter::repeat_n(row(Source::FootEda), 5).collect();
        let contrib = source_contribution(&all_one).unwrap();
        assert_relative_eq!(
            contrib.iter().find(|(s, _)| *s == Source::FootEda).unwrap().1,
            100.0,
            epsilon = 1e-9
        );
        assert!(source_contribution(&[]).is_err());
    }

    #[test]
    fn paper_shape_contribution_arithmetic() {
        // 95% of mass on ECG+RESP reproduces the "more than 95%" arithmetic
        let row = |source: Source| SelectionRow {
            method: Method::Qa,
            fraction: 0.2,
            repetition: 0,
            feature_index: 0,
            feature_name: "f".into(),
            source,
        };
        let rows: Vec<SelectionRow> = std::iter::repeat_n(row(Source::Ecg), 70)
            .chain(std::iter::repeat_n(row(Source::Resp), 25))
            .chain(std::iter::repeat_n(row(Source::HandEda), 3))
            .chain(std::iter::repeat_n(row(Source::FootEda), 2))
            .collect();
        let contrib = source_contribution(&rows).unwrap();
        let value = |s: Source| contrib.iter().find(|(x, _)| *x == s).unwrap().1;
        assert!(value(Source::Ecg) + value(Source::Resp) >= 95.0);
    }
}
