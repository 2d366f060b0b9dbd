//! Binary quadratic model over feature-inclusion variables.
//!
//! Training data maps to the model as: bias h[i] = -|r(feature_i, label)|
//! (relevance lowers energy) and coupling J[i][j] = alpha * |r(feature_i,
//! feature_j)| (redundancy raises it), so the minimum-energy assignment
//! selects relevant, mutually non-redundant features. A `Signed` mode keeps
//! the raw correlations instead of their magnitudes.

use crate::error::{Error, Result};
use crate::signals::FeatureMatrix;
use serde::{Deserialize, Serialize};

/// Pearson correlation coefficient; zero-variance inputs yield 0 rather
/// than an error (a constant feature is uninformative, not fatal).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("pearson needs at least 2 samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        cov += da * db;
        vx += da * da;
        vy += db * db;
    }
    if vx <= 0.0 || vy <= 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Feature-target and feature-feature Pearson correlations of a training
/// matrix against the ordinal stress label.
#[derive(Clone, Debug)]
pub struct CorrelationStats {
    pub feature_target: Vec<f64>,
    /// Symmetric with unit diagonal.
    pub feature_feature: Vec<Vec<f64>>,
}

impl CorrelationStats {
    pub fn compute(train: &FeatureMatrix) -> Result<Self> {
        if train.n_rows() < 2 {
            return Err(Error::invalid("correlation needs at least 2 rows"));
        }
        let y = train.label_ordinals();
        if y.iter().all(|&v| v == y[0]) {
            return Err(Error::SingleClass);
        }
        let n = train.n_cols();
        let cols: Vec<Vec<f64>> = (0..n).map(|c| train.column(c)).collect();
        let feature_target = cols
            .iter()
            .map(|c| pearson(c, &y))
            .collect::<Result<Vec<_>>>()?;
        let mut feature_feature = vec![vec![0.0; n]; n];
        for i in 0..n {
            feature_feature[i][i] = 1.0;
            for j in i + 1..n {
                let r = pearson(&cols[i], &cols[j])?;
                feature_feature[i][j] = r;
                feature_feature[j][i] = r;
            }
        }
        Ok(CorrelationStats {
            feature_target,
            feature_feature,
        })
    }
}

/// Whether the model uses |r| (default) or raw signed correlations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationMode {
    #[default]
    Absolute,
    Signed,
}

/// Binary quadratic model: E(x) = sum_i h[i] x[i]
/// + sum_{i<j} J[i][j] x[i] x[j] + offset over x in {0,1}^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Bqm {
    h: Vec<f64>,
    /// Upper triangle (i < j) in row-major order.
    j_upper: Vec<f64>,
    offset: f64,
}

fn tri_len(n: usize) -> usize {
    n * (n - 1) / 2
}

impl Bqm {
    /// Model with the given biases and no couplings.
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("biases must be finite"));
        }
        let n = h.len();
        Ok(Bqm {
            h,
            j_upper: vec![0.0; tri_len(n)],
            offset: 0.0,
        })
    }

    pub fn with_couplings(h: Vec<f64>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let mut bqm = Bqm::new(h)?;
        for &(i, j, v) in couplings {
            bqm.set_coupling(i, j, v)?;
        }
        Ok(bqm)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn biases(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n());
        let n = self.n();
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }

    /// Symmetric access; the diagonal is identically zero.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.j_upper[self.tri_index(a, b)]
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i == j {
            return Err(Error::invalid("coupling diagonal must stay zero"));
        }
        if i >= self.n() || j >= self.n() {
            return Err(Error::invalid(format!(
                "coupling index ({i},{j}) out of range for n={}",
                self.n()
            )));
        }
        if !v.is_finite() {
            return Err(Error::invalid("couplings must be finite"));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let idx = self.tri_index(a, b);
        self.j_upper[idx] = v;
        Ok(())
    }

    /// Exact evaluation of the quadratic form, in the canonical order:
    /// offset, then bias terms ascending, then upper-triangle couplings
    /// row-major.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.n(),
            });
        }
        let mut e = self.offset;
        for (hi, &xi) in self.h.iter().zip(x) {
            if xi {
                e += hi;
            }
        }
        let n = self.n();
        for i in 0..n {
            if !x[i] {
                continue;
            }
            for j in i + 1..n {
                if x[j] {
                    e += self.j_upper[self.tri_index(i, j)];
                }
            }
        }
        Ok(e)
    }

    /// h[i] + sum_{j != i} J[i][j] x[j]: the energy change of setting
    /// x[i] = 1 with the rest of the assignment fixed.
    pub(crate) fn local_field(&self, x: &[bool], i: usize) -> f64 {
        let mut f = self.h[i];
        for (j, &xj) in x.iter().enumerate() {
            if xj && j != i {
                f += self.coupling(i, j);
            }
        }
        f
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&BqmJson::from(self))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: BqmJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// Wire format: {n, h, J: [[i, j, value], ...] (upper triangle), offset}.
#[derive(Serialize, Deserialize)]
struct BqmJson {
    n: usize,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl From<&Bqm> for BqmJson {
    fn from(bqm: &Bqm) -> Self {
        let n = bqm.n();
        let mut j = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let v = bqm.coupling(a, b);
                if v != 0.0 {
                    j.push((a, b, v));
                }
            }
        }
        BqmJson {
            n,
            h: bqm.h.clone(),
            j,
            offset: bqm.offset,
        }
    }
}

impl TryFrom<BqmJson> for Bqm {
    type Error = Error;

    fn try_from(raw: BqmJson) -> Result<Self> {
        if raw.h.len() != raw.n {
            return Err(Error::invalid(format!(
                "bias vector length {} does not match n={}",
                raw.h.len(),
                raw.n
            )));
        }
        let mut bqm = Bqm::new(raw.h)?;
        for (i, j, v) in raw.j {
            if i >= j {
                return Err(Error::invalid(format!(
                    "coupling ({i},{j}) is not upper-triangular"
                )));
            }
            bqm.set_coupling(i, j, v)?;
        }
        if !raw.offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        bqm.offset = raw.offset;
        Ok(bqm)
    }
}

pub fn build_bqm(train: &FeatureMatrix, alpha: f64) -> Result<Bqm> {
    build_bqm_with(train, alpha, CorrelationMode::Absolute)
}

pub fn build_bqm_with(train: &FeatureMatrix, alpha: f64, mode: CorrelationMode) -> Result<Bqm> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be a nonnegative real"));
    }
    let stats = CorrelationStats::compute(train)?;
    let h: Vec<f64> = stats
        .feature_target
        .iter()
        .map(|&r| match mode {
            CorrelationMode::Absolute => -r.abs(),
            CorrelationMode::Signed => -r,
        })
        .collect();
    let mut bqm = Bqm::new(h)?;
    let n = train.n_cols();
    for i in 0..n {
        for j in i + 1..n {
            let r = stats.feature_feature[i][j];
            let v = match mode {
                CorrelationMode::Absolute => alpha * r.abs(),
                CorrelationMode::Signed => alpha * r,
            };
            if v != 0.0 {
                bqm.set_coupling(i, j, v)?;
            }
        }
    }
    Ok(bqm)
}
