//! Classical filter-style selection baselines: Pearson ranking, histogram
//! mutual information, and one-way ANOVA p-value ranking.

use crate::error::{Error, Result};
use crate::qubo::pearson;
use crate::signals::{FeatureMatrix, StressLabel};
use crate::stats::f_survival;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Selection method identifiers as they appear in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qa,
    Pearson,
    MutualInfo,
    PValue,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Qa, Method::Pearson, Method::MutualInfo, Method::PValue];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Qa => "qa",
            Method::Pearson => "pearson",
            Method::MutualInfo => "mutual_info",
            Method::PValue => "p_value",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qa" => Ok(Method::Qa),
            "pearson" => Ok(Method::Pearson),
            "mutual_info" => Ok(Method::MutualInfo),
            "p_value" => Ok(Method::PValue),
            other => Err(Error::invalid(format!(
                "unknown method '{other}'; valid methods: qa, pearson, mutual_info, p_value"
            ))),
        }
    }
}

/// A ranked selection: the chosen indices plus the per-feature score each
/// method ranked by.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub indices: Vec<usize>,
    pub scores: Vec<f64>,
    pub k: usize,
}

impl SelectionResult {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "subset size k={k} must satisfy 1 <= k <= {n}"
        )));
    }
    Ok(())
}

/// Top-k indices by score. `ascending` ranks small scores first (p-values);
/// otherwise large scores win. Ties go to the lower index.
fn rank_top_k(scores: &[f64], k: usize, ascending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = scores[a].total_cmp(&scores[b]);
        let cmp = if ascending { cmp } else { cmp.reverse() };
        cmp.then(a.cmp(&b))
    });
    let mut top: Vec<usize> = order.into_iter().take(k).collect();
    top.sort_unstable();
    top
}

/// Rank features by |r(feature, label)| descending and keep the top k.
pub fn pearson_select(train: &FeatureMatrix, k: usize) -> Result<SelectionResult> {
    check_k(k, train.n_cols())?;
    if train.n_rows() < 2 {
        return Err(Error::invalid("selection needs at least 2 rows"));
    }
    let y = train.label_ordinals();
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::SingleClass);
    }
    let scores: Vec<f64> = (0..train.n_cols())
        .map(|c| pearson(&train.column(c), &y).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult {
        method: Method::Pearson,
        indices: rank_top_k(&scores, k, false),
        scores,
        k,
    })
}

/// Plug-in mutual information in bits between an equal-width-binned feature
/// and the class labels. Zero-variance features carry no information.
pub fn mutual_info(feature: &[f64], labels: &[StressLabel], bins: usize) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    if feature.len() < 2 {
        return Err(Error::invalid("mutual information needs at least 2 samples"));
    }
    if bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    let lo = feature.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = feature.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let width = hi - lo;

    let n = feature.len() as f64;
    let mut joint = vec![[0usize; 3]; bins];
    let mut feat_marginal = vec![0usize; bins];
    let mut class_marginal = [0usize; 3];
    for (&v, l) in feature.iter().zip(labels) {
        let b = (((v - lo) / width) * bins as f64) as usize;
        let b = b.min(bins - 1);
        joint[b][l.ordinal()] += 1;
        feat_marginal[b] += 1;
        class_marginal[l.ordinal()] += 1;
    }

    let mut mi = 0.0;
    for (b, row) in joint.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let p_bc = count as f64 / n;
            let p_b = feat_marginal[b] as f64 / n;
            let p_c = class_marginal[c] as f64 / n;
            mi += p_bc * (p_bc / (p_b * p_c)).log2();
        }
    }
    Ok(mi.max(0.0))
}

/// One-way ANOVA F-test p-value across the classes present.
///
/// Needs at least two classes with at least two samples each. Identical
/// groups (no variance anywhere) give p = 1; zero within-group variance
/// with separated means gives p = 0 in the limit.
pub fn anova_p_value(feature: &[f64], labels: &[StressLabel]) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    let mut groups: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (&v, l) in feature.iter().zip(labels) {
        groups[l.ordinal()].push(v);
    }
    let present: Vec<&Vec<f64>> = groups.iter().filter(|g| !g.is_empty()).collect();
    if present.len() < 2 {
        return Err(Error::invalid("anova needs at least 2 classes present"));
    }
    if present.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("anova needs at least 2 samples per class"));
    }

    let n_total = feature.len() as f64;
    let grand_mean = feature.iter().sum::<f64>() / n_total;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in &present {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand_mean) * (m - grand_mean);
        ssw += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let df1 = (present.len() - 1) as f64;
    let df2 = n_total - present.len() as f64;
    if ssw <= 0.0 {
        return Ok(if ssb <= 0.0 { 1.0 } else { 0.0 });
    }
    let f = (ssb / df1) / (ssw / df2);
    Ok(f_survival(f, df1, df2))
}

/// Uniform interface over the three classical baselines.
pub fn baseline_select(train: &FeatureMatrix, method: Method, k: usize) -> Result<SelectionResult> {
    match method {
        Method::Pearson => pearson_select(train, k),
        Method::MutualInfo => mutual_info_select(train, k, 10),
        Method::PValue => p_value_select(train, k),
        Method::Qa => Err(Error::invalid(
            "qa is not a baseline; build a model and use the sampler",
        )),
    }
}

/// Rank by mutual information (descending) with `bins` histogram bins.
pub fn mutual_info_select(train: &FeatureMatrix, k: usize, bins: usize) -> Result<SelectionResult> {
    check_k(k, train.n_cols())?;
    let scores: Vec<f64> = (0..train.n_cols())
        .map(|c| mutual_info(&train.column(c), train.labels(), bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult {
        method: Method::MutualInfo,
        indices: rank_top_k(&scores, k, false),
        scores,
        k,
    })
}

/// Rank by ANOVA p-value (ascending).
pub fn p_value_select(train: &FeatureMatrix, k: usize) -> Result<SelectionResult> {
    check_k(k, train.n_cols())?;
    let scores: Vec<f64> = (0..train.n_cols())
        .map(|c| anova_p_value(&train.column(c), train.labels()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionResult {
        method: Method::PValue,
        indices: rank_top_k(&scores, k, true),
        scores,
        k,
    })
}
