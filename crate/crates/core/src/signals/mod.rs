//! Physiological signal preprocessing and per-window feature extraction.
//!
//! A [`SignalRecord`] holds the four raw channels of one recording session.
//! [`build_feature_matrix`] normalizes and low-pass filters each channel,
//! slices the record into overlapping windows, and extracts the full
//! 39-column feature inventory (6 hand-EDA, 6 foot-EDA, 21 ECG, 6 RESP)
//! with one majority-vote stress label per window.

mod ecg;
mod eda;
mod filter;
mod resp;
mod spectrum;

pub use ecg::{detect_r_peaks, extract_ecg_features, extract_ecg_features_with, EcgFeatures, RPeakConfig};
pub use eda::{extract_eda_features, extract_eda_features_with, EdaFeatures, ScrConfig};
pub use filter::{butterworth_lowpass, fit_sinusoid_amplitude, ButterworthLowpass, FilterOutput};
pub use resp::{extract_resp_features, RespFeatures};
pub use spectrum::{band_mean_psd, band_power, welch_psd, Psd};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;

/// Per-sample stress annotation, ordered low to high.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StressLabel {
    Low,
    Medium,
    High,
}

impl StressLabel {
    pub const ALL: [StressLabel; 3] = [StressLabel::Low, StressLabel::Medium, StressLabel::High];

    /// Ordinal encoding used as the classification target (0, 1, 2).
    pub fn ordinal(self) -> usize {
        match self {
            StressLabel::Low => 0,
            StressLabel::Medium => 1,
            StressLabel::High => 2,
        }
    }

    pub fn from_ordinal(v: usize) -> Option<StressLabel> {
        Self::ALL.get(v).copied()
    }

    pub fn parse(s: &str) -> Option<StressLabel> {
        match s {
            "low" => Some(StressLabel::Low),
            "medium" => Some(StressLabel::Medium),
            "high" => Some(StressLabel::High),
            _ => None,
        }
    }
}

impl fmt::Display for StressLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StressLabel::Low => "low",
            StressLabel::Medium => "medium",
            StressLabel::High => "high",
        };
        f.write_str(s)
    }
}

/// Which physiological channel a feature was computed from.
/// Variant order matches the feature-matrix column layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    HandEda,
    FootEda,
    Ecg,
    Resp,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::HandEda, Source::FootEda, Source::Ecg, Source::Resp];
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::HandEda => "H-EDA",
            Source::FootEda => "F-EDA",
            Source::Ecg => "ECG",
            Source::Resp => "RESP",
        };
        f.write_str(s)
    }
}

/// One recording: four synchronized channels plus per-sample labels.
#[derive(Clone, Debug)]
pub struct SignalRecord {
    pub ecg: Vec<f64>,
    pub hand_eda: Vec<f64>,
    pub foot_eda: Vec<f64>,
    pub resp: Vec<f64>,
    pub sampling_rate_hz: f64,
    pub labels: Vec<StressLabel>,
}

impl SignalRecord {
    pub fn new(
        ecg: Vec<f64>,
        hand_eda: Vec<f64>,
        foot_eda: Vec<f64>,
        resp: Vec<f64>,
        sampling_rate_hz: f64,
        labels: Vec<StressLabel>,
    ) -> Result<Self> {
        let n = ecg.len();
        for (name, len) in [
            ("hand_eda", hand_eda.len()),
            ("foot_eda", foot_eda.len()),
            ("resp", resp.len()),
            ("labels", labels.len()),
        ] {
            if len != n {
                return Err(Error::invalid(format!(
                    "channel length mismatch: ecg has {n} samples, {name} has {len}"
                )));
            }
        }
        if !(sampling_rate_hz > 0.0) || !sampling_rate_hz.is_finite() {
            return Err(Error::invalid("sampling rate must be positive"));
        }
        Ok(SignalRecord {
            ecg,
            hand_eda,
            foot_eda,
            resp,
            sampling_rate_hz,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.ecg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ecg.is_empty()
    }
}

/// Running-window geometry in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_seconds: f64,
    pub step_seconds: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            window_seconds: 100.0,
            step_seconds: 50.0,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_seconds > 0.0 && self.step_seconds > 0.0) {
            return Err(Error::invalid("window and step must be positive"));
        }
        if self.step_seconds > self.window_seconds {
            return Err(Error::invalid("step must not exceed the window length"));
        }
        Ok(())
    }
}

/// Low-pass cutoffs applied per channel before extraction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FilterSpec {
    pub eda_cutoff_hz: f64,
    pub ecg_cutoff_hz: f64,
    pub resp_cutoff_hz: f64,
    pub order: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            eda_cutoff_hz: 1.0,
            ecg_cutoff_hz: 40.0,
            resp_cutoff_hz: 10.0,
            order: 5,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("eda", self.eda_cutoff_hz),
            ("ecg", self.ecg_cutoff_hz),
            ("resp", self.resp_cutoff_hz),
        ] {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::invalid(format!("{name} cutoff must be positive")));
            }
        }
        if self.order == 0 {
            return Err(Error::invalid("filter order must be at least 1"));
        }
        Ok(())
    }
}

/// Windows-by-features matrix with per-column metadata and per-row labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_cols: usize,
    names: Vec<String>,
    sources: Vec<Source>,
    labels: Vec<StressLabel>,
}

impl FeatureMatrix {
    pub fn new(
        values: Vec<f64>,
        names: Vec<String>,
        sources: Vec<Source>,
        labels: Vec<StressLabel>,
    ) -> Result<Self> {
        let n_cols = names.len();
        if sources.len() != n_cols {
            return Err(Error::LengthMismatch {
                left: sources.len(),
                right: n_cols,
            });
        }
        if n_cols == 0 {
            return Err(Error::invalid("feature matrix needs at least one column"));
        }
        if values.len() % n_cols != 0 {
            return Err(Error::invalid(format!(
                "value buffer of {} does not divide into {} columns",
                values.len(),
                n_cols
            )));
        }
        let n_rows = values.len() / n_cols;
        if labels.len() != n_rows {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: n_rows,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature values must be finite"));
        }
        Ok(FeatureMatrix {
            values,
            n_cols,
            names,
            sources,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.row(r)[c]).collect()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn labels(&self) -> &[StressLabel] {
        &self.labels
    }

    /// Labels as the ordinal regression target 0/1/2.
    pub fn label_ordinals(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.ordinal() as f64).collect()
    }

    /// Distinct classes present, ascending.
    pub fn classes_present(&self) -> Vec<StressLabel> {
        let mut present = [false; 3];
        for l in &self.labels {
            present[l.ordinal()] = true;
        }
        StressLabel::ALL
            .iter()
            .copied()
            .filter(|l| present[l.ordinal()])
            .collect()
    }

    /// New matrix keeping `rows` in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            values.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        FeatureMatrix {
            values,
            n_cols: self.n_cols,
            names: self.names.clone(),
            sources: self.sources.clone(),
            labels,
        }
    }
}

/// The fixed 39-feature inventory in column order:
/// hand-EDA 0-5, foot-EDA 6-11, ECG 12-32, RESP 33-38.
pub fn feature_inventory() -> (Vec<String>, Vec<Source>) {
    let mut names = Vec::with_capacity(39);
    let mut sources = Vec::with_capacity(39);
    for name in eda::FEATURE_NAMES {
        names.push(format!("h_eda_{name}"));
        sources.push(Source::HandEda);
    }
    for name in eda::FEATURE_NAMES {
        names.push(format!("f_eda_{name}"));
        sources.push(Source::FootEda);
    }
    for name in ecg::FEATURE_NAMES {
        names.push(format!("ecg_{name}"));
        sources.push(Source::Ecg);
    }
    for name in resp::FEATURE_NAMES {
        names.push(format!("resp_{name}"));
        sources.push(Source::Resp);
    }
    (names, sources)
}

/// Infer the source tag from a feature name emitted by [`feature_inventory`].
pub fn source_from_name(name: &str) -> Option<Source> {
    if name.starts_with("h_eda_") {
        Some(Source::HandEda)
    } else if name.starts_with("f_eda_") {
        Some(Source::FootEda)
    } else if name.starts_with("ecg_") {
        Some(Source::Ecg)
    } else if name.starts_with("resp_") {
        Some(Source::Resp)
    } else {
        None
    }
}

/// Z-score over the whole sequence (population standard deviation).
/// Zero-variance input maps to all zeros.
pub fn normalize(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Ok(vec![0.0; samples.len()]);
    }
    let std = var.sqrt();
    Ok(samples.iter().map(|x| (x - mean) / std).collect())
}

/// Start/end sample ranges of the running windows.
///
/// Window and step lengths are rounded to whole samples once, here, so every
/// consumer slices identically; windows never extend past the signal.
pub fn window_slices(n_samples: usize, fs_hz: f64, spec: &WindowSpec) -> Vec<Range<usize>> {
    let win = (spec.window_seconds * fs_hz).round() as usize;
    let step = (spec.step_seconds * fs_hz).round() as usize;
    if win == 0 || step == 0 || n_samples < win {
        return Vec::new();
    }
    let count = (n_samples - win) / step + 1;
    (0..count).map(|i| i * step..i * step + win).collect()
}

/// Majority vote over per-sample labels; ties go to the higher stress class.
pub fn majority_label(labels: &[StressLabel]) -> StressLabel {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.ordinal()] += 1;
    }
    let mut best = StressLabel::Low;
    for l in StressLabel::ALL {
        if counts[l.ordinal()] >= counts[best.ordinal()] {
            best = l;
        }
    }
    best
}

/// What `build_feature_matrix` produced besides the matrix itself.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub matrix: FeatureMatrix,
    /// Windows available before ECG-quality filtering.
    pub n_windows: usize,
    /// Windows dropped because fewer than 3 R peaks were found.
    pub n_dropped: usize,
    /// Non-fatal notes, e.g. a filter skipped because the cutoff is at or
    /// above Nyquist.
    pub warnings: Vec<String>,
}

pub fn build_feature_matrix(record: &SignalRecord, spec: &WindowSpec) -> Result<Extraction> {
    build_feature_matrix_with(
        record,
        spec,
        &FilterSpec::default(),
        &ScrConfig::default(),
        &RPeakConfig::default(),
    )
}

pub fn build_feature_matrix_with(
    record: &SignalRecord,
    spec: &WindowSpec,
    filters: &FilterSpec,
    scr: &ScrConfig,
    rpeak: &RPeakConfig,
) -> Result<Extraction> {
    spec.validate()?;
    filters.validate()?;
    if record.is_empty() {
        return Err(Error::EmptyInput);
    }
    let fs = record.sampling_rate_hz;
    let mut warnings = Vec::new();

    let mut prep = |raw: &[f64], cutoff: f64, channel: &str| -> Result<Vec<f64>> {
        let normalized = normalize(raw)?;
        let out = butterworth_lowpass(&normalized, cutoff, fs, filters.order)?;
        if out.skipped_above_nyquist {
            warnings.push(format!(
                "{channel}: cutoff {cutoff} Hz is at or above Nyquist ({} Hz); filter skipped",
                fs / 2.0
            ));
        }
        Ok(out.samples)
    };

    let hand_eda = prep(&record.hand_eda, filters.eda_cutoff_hz, "hand_eda")?;
    let foot_eda = prep(&record.foot_eda, filters.eda_cutoff_hz, "foot_eda")?;
    let ecg = prep(&record.ecg, filters.ecg_cutoff_hz, "ecg")?;
    let resp = prep(&record.resp, filters.resp_cutoff_hz, "resp")?;

    let slices = window_slices(record.len(), fs, spec);
    let n_windows = slices.len();
    if n_windows == 0 {
        return Err(Error::NoWindows {
            reason: format!(
                "signal of {:.1} s is shorter than the {:.1} s window",
                record.len() as f64 / fs,
                spec.window_seconds
            ),
        });
    }

    let (names, sources) = feature_inventory();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n_dropped = 0usize;

    for range in &slices {
        let ecg_features = match extract_ecg_features_with(&ecg[range.clone()], fs, rpeak) {
            Ok(f) => f,
            Err(Error::DegenerateWindow { .. }) => {
                n_dropped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let h = extract_eda_features_with(&hand_eda[range.clone()], fs, scr)?;
        let f = extract_eda_features_with(&foot_eda[range.clone()], fs, scr)?;
        let r = extract_resp_features(&resp[range.clone()], fs)?;

        values.extend_from_slice(&h.to_array());
        values.extend_from_slice(&f.to_array());
        values.extend_from_slice(&ecg_features.to_array());
        values.extend_from_slice(&r.to_array());
        labels.push(majority_label(&record.labels[range.clone()]));
    }

    if labels.is_empty() {
        return Err(Error::NoWindows {
            reason: format!("all {n_windows} windows dropped for degenerate ECG"),
        });
    }

    let matrix = FeatureMatrix::new(values, names, sources, labels)?;
    Ok(Extraction {
        matrix,
        n_windows,
        n_dropped,
        warnings,
    })
}
