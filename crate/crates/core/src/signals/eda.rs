//! Electrodermal-activity window features built around skin-conductance
//! response (SCR) events.
//!
//! An SCR is a local maximum preceded (within a configurable search span)
//! by an onset where the first-difference slope crosses above a threshold.
//! Its amplitude is peak value minus onset value; its response duration
//! runs from the onset to the first sample falling below
//! onset + recovery_fraction * amplitude, capped at the window end.

use crate::error::{Error, Result};

pub(crate) const FEATURE_NAMES: [&str; 6] = [
    "mean",
    "variance",
    "peak_count",
    "peak_amplitude_sum",
    "response_duration_sum",
    "range",
];

/// SCR detection thresholds. Defaults assume z-scored input.
#[derive(Clone, Copy, Debug)]
pub struct ScrConfig {
    /// Slope (units per second) an onset must exceed.
    pub onset_slope_threshold: f64,
    /// How far before a local maximum an onset may sit, in seconds.
    pub onset_search_seconds: f64,
    /// Recovery level as a fraction of amplitude above the onset value.
    pub recovery_fraction: f64,
    /// Smallest onset-to-peak rise that counts as an event; rejects the
    /// residual sensor-noise bumps that survive low-pass filtering.
    pub min_amplitude: f64,
}

impl Default for ScrConfig {
    fn default() -> Self {
        ScrConfig {
            onset_slope_threshold: 0.01,
            onset_search_seconds: 5.0,
            recovery_fraction: 0.5,
            min_amplitude: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Scr {
    pub onset: usize,
    pub peak: usize,
    pub duration_seconds: f64,
}

/// The six per-window EDA features.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdaFeatures {
    pub mean: f64,
    pub variance: f64,
    pub peak_count: f64,
    pub peak_amplitude_sum: f64,
    /// Seconds summed over all detected SCRs.
    pub response_duration_sum: f64,
    /// max - min over the window; the sixth feature, isolated here so it
    /// can be swapped out without touching the other five.
    pub range: f64,
}

impl EdaFeatures {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.mean,
            self.variance,
            self.peak_count,
            self.peak_amplitude_sum,
            self.response_duration_sum,
            self.range,
        ]
    }
}

pub(crate) fn detect_scrs(window: &[f64], fs_hz: f64, cfg: &ScrConfig) -> Vec<Scr> {
    let n = window.len();
    if n < 3 {
        return Vec::new();
    }
    let search_span = (cfg.onset_search_seconds * fs_hz).round() as usize;

    // onset candidates: sample before a slope upcrossing of the threshold
    let slope = |i: usize| (window[i] - window[i - 1]) * fs_hz;
    let mut onsets: Vec<usize> = Vec::new();
    for i in 1..n {
        let rising = slope(i) > cfg.onset_slope_threshold;
        let was_rising = i >= 2 && slope(i - 1) > cfg.onset_slope_threshold;
        if rising && !was_rising {
            onsets.push(i - 1);
        }
    }

    let mut used = vec![false; onsets.len()];
    let mut scrs = Vec::new();
    for p in 1..n - 1 {
        if !(window[p] > window[p - 1] && window[p] >= window[p + 1]) {
            continue;
        }
        // latest unconsumed onset within the search span
        let found = onsets
            .iter()
            .enumerate()
            .rev()
            .find(|(k, &o)| !used[*k] && o < p && p - o <= search_span);
        let Some((k, &onset)) = found else { continue };
        let amplitude = window[p] - window[onset];
        // sub-threshold pairs leave the onset available for a later peak
        if amplitude < cfg.min_amplitude {
            continue;
        }
        used[k] = true;
        let level = window[onset] + cfg.recovery_fraction * amplitude;
        let recovery_end = (p + 1..n).find(|&q| window[q] < level).unwrap_or(n - 1);
        scrs.push(Scr {
            onset,
            peak: p,
            duration_seconds: (recovery_end - onset) as f64 / fs_hz,
        });
    }
    scrs
}

pub fn extract_eda_features(window: &[f64], fs_hz: f64) -> Result<EdaFeatures> {
    extract_eda_features_with(window, fs_hz, &ScrConfig::default())
}

pub fn extract_eda_features_with(
    window: &[f64],
    fs_hz: f64,
    cfg: &ScrConfig,
) -> Result<EdaFeatures> {
    if window.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(fs_hz > 0.0) {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let variance = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let (min, max) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });

    let scrs = detect_scrs(window, fs_hz, cfg);
    Ok(EdaFeatures {
        mean,
        variance,
        peak_count: scrs.len() as f64,
        peak_amplitude_sum: scrs
            .iter()
            .fold(0.0, |acc, s| acc + (window[s.peak] - window[s.onset])),
        response_duration_sum: scrs.iter().fold(0.0, |acc, s| acc + s.duration_seconds),
        range: max - min,
    })
}
