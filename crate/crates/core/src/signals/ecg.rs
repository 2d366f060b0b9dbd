//! ECG window features: R-peak detection followed by time- and
//! frequency-domain heart-rate-variability measures.
//!
//! Detection follows the classic energy-emphasis recipe: difference filter,
//! squaring, short moving-window integration, then an adaptive threshold at
//! a fraction of the running mean of recent integrated maxima, with a
//! refractory period between accepted beats.

use super::spectrum::{band_power, welch_psd};
use crate::error::{Error, Result};

pub(crate) const FEATURE_NAMES: [&str; 21] = [
    "rr_mean",
    "rr_median",
    "rr_std",
    "rr_min",
    "rr_max",
    "rr_range",
    "rmssd",
    "sdsd",
    "nn50",
    "pnn50",
    "rr_cv",
    "hr_mean",
    "hr_max",
    "hr_min",
    "hr_std",
    "vlf_power",
    "lf_power",
    "hf_power",
    "lf_hf_ratio",
    "lf_norm",
    "hf_norm",
];

const TACHOGRAM_RATE_HZ: f64 = 4.0;
const WELCH_SEGMENT: usize = 256;
const POWER_GUARD: f64 = 1e-12;

/// R-peak detector knobs.
#[derive(Clone, Copy, Debug)]
pub struct RPeakConfig {
    pub integration_window_seconds: f64,
    pub refractory_seconds: f64,
    /// Threshold as a fraction of the running mean of recent peak heights.
    pub threshold_fraction: f64,
    /// How many recent peak heights the running mean tracks.
    pub peak_history: usize,
}

impl Default for RPeakConfig {
    fn default() -> Self {
        RPeakConfig {
            integration_window_seconds: 0.150,
            refractory_seconds: 0.250,
            threshold_fraction: 0.5,
            peak_history: 8,
        }
    }
}

/// Sample indices of detected R peaks, ascending.
pub fn detect_r_peaks(window: &[f64], fs_hz: f64, cfg: &RPeakConfig) -> Vec<usize> {
    let n = window.len();
    if n < 5 || !(fs_hz > 0.0) {
        return Vec::new();
    }
    let w = ((cfg.integration_window_seconds * fs_hz).round() as usize).max(1);
    let refractory = ((cfg.refractory_seconds * fs_hz).round() as usize).max(1);

    // centered difference, squared
    let mut sq = vec![0.0; n];
    for i in 1..n - 1 {
        let d = (window[i + 1] - window[i - 1]) / 2.0;
        sq[i] = d * d;
    }

    // causal moving-window integration
    let mut integ = vec![0.0; n];
    let mut rolling = 0.0;
    for i in 0..n {
        rolling += sq[i];
        if i >= w {
            rolling -= sq[i - w];
        }
        integ[i] = rolling / w.min(i + 1) as f64;
    }

    // initial threshold from the opening stretch, falling back to global
    let lead = ((2.0 * fs_hz) as usize).clamp(1, n);
    let lead_max = integ[..lead].iter().cloned().fold(0.0f64, f64::max);
    let global_max = integ.iter().cloned().fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return Vec::new();
    }
    let mut threshold =
        cfg.threshold_fraction * if lead_max > 0.0 { lead_max } else { global_max };

    let mut accepted: Vec<(usize, f64)> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let update_threshold = |history: &[f64]| {
        cfg.threshold_fraction * history.iter().sum::<f64>() / history.len() as f64
    };

    for i in 1..n - 1 {
        let h = integ[i];
        if !(h > integ[i - 1] && h >= integ[i + 1]) || h < threshold {
            continue;
        }
        match accepted.last().copied() {
            Some((last_i, last_h)) if i - last_i < refractory => {
                if h > last_h {
                    accepted.pop();
                    history.pop();
                    accepted.push((i, h));
                    history.push(h);
                    if history.len() > cfg.peak_history {
                        history.remove(0);
                    }
                    threshold = update_threshold(&history);
                }
            }
            _ => {
                accepted.push((i, h));
                history.push(h);
                if history.len() > cfg.peak_history {
                    history.remove(0);
                }
                threshold = update_threshold(&history);
            }
        }
    }

    // refine each integrated peak to the raw-signal maximum it covers;
    // the causal integrator can crest one window before or after the R wave
    let mut peaks: Vec<usize> = Vec::with_capacity(accepted.len());
    for (i, _) in accepted {
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(n - 1);
        let mut best = lo;
        for j in lo..=hi {
            if window[j] > window[best] {
                best = j;
            }
        }
        if peaks.last().is_none_or(|&p| best > p) {
            peaks.push(best);
        }
    }
    peaks
}

/// The 21 per-window ECG features: 15 time-domain RR/HR statistics and 6
/// spectral measures of the RR tachogram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EcgFeatures {
    pub rr_mean: f64,
    pub rr_median: f64,
    pub rr_std: f64,
    pub rr_min: f64,
    pub rr_max: f64,
    pub rr_range: f64,
    pub rmssd: f64,
    pub sdsd: f64,
    pub nn50: f64,
    /// Percentage of successive RR differences above 50 ms.
    pub pnn50: f64,
    pub rr_cv: f64,
    pub hr_mean: f64,
    pub hr_max: f64,
    pub hr_min: f64,
    pub hr_std: f64,
    pub vlf_power: f64,
    pub lf_power: f64,
    pub hf_power: f64,
    /// 0 when HF power is below the guard, to avoid infinities.
    pub lf_hf_ratio: f64,
    pub lf_norm: f64,
    pub hf_norm: f64,
}

impl EcgFeatures {
    pub fn to_array(&self) -> [f64; 21] {
        [
            self.rr_mean,
            self.rr_median,
            self.rr_std,
            self.rr_min,
            self.rr_max,
            self.rr_range,
            self.rmssd,
            self.sdsd,
            self.nn50,
            self.pnn50,
            self.rr_cv,
            self.hr_mean,
            self.hr_max,
            self.hr_min,
            self.hr_std,
            self.vlf_power,
            self.lf_power,
            self.hf_power,
            self.lf_hf_ratio,
            self.lf_norm,
            self.hf_norm,
        ]
    }
}

fn population_std(xs: &[f64], mean: f64) -> f64 {
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Tachogram spectral band powers: (vlf, lf, hf).
fn tachogram_band_powers(beat_times: &[f64], rr: &[f64]) -> (f64, f64, f64) {
    // RR value rr[k] sits at the time of the closing beat, beat_times[k+1].
    let t_start = beat_times[1];
    let t_end = beat_times[beat_times.len() - 1];
    let dt = 1.0 / TACHOGRAM_RATE_HZ;
    let n_grid = ((t_end - t_start) / dt).floor() as usize + 1;
    if n_grid < 8 {
        return (0.0, 0.0, 0.0);
    }
    let mut grid = Vec::with_capacity(n_grid);
    let mut k = 0usize;
    for j in 0..n_grid {
        let tau = t_start + j as f64 * dt;
        while k + 2 < beat_times.len() && beat_times[k + 2] < tau {
            k += 1;
        }
        let (t0, t1) = (beat_times[k + 1], beat_times[(k + 2).min(beat_times.len() - 1)]);
        let v = if t1 > t0 {
            let frac = ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0);
            rr[k] + frac * (rr[(k + 1).min(rr.len() - 1)] - rr[k])
        } else {
            rr[k]
        };
        grid.push(v);
    }
    let mean = grid.iter().sum::<f64>() / grid.len() as f64;
    for v in &mut grid {
        *v -= mean;
    }
    let psd = welch_psd(&grid, TACHOGRAM_RATE_HZ, WELCH_SEGMENT.min(grid.len()));
    (
        band_power(&psd, 0.003, 0.04),
        band_power(&psd, 0.04, 0.15),
        band_power(&psd, 0.15, 0.4),
    )
}

pub fn extract_ecg_features(window: &[f64], fs_hz: f64) -> Result<EcgFeatures> {
    extract_ecg_features_with(window, fs_hz, &RPeakConfig::default())
}

pub fn extract_ecg_features_with(
    window: &[f64],
    fs_hz: f64,
    cfg: &RPeakConfig,
) -> Result<EcgFeatures> {
    if window.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(fs_hz > 0.0) {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let peaks = detect_r_peaks(window, fs_hz, cfg);
    if peaks.len() < 3 {
        return Err(Error::DegenerateWindow { peaks: peaks.len() });
    }

    let beat_times: Vec<f64> = peaks.iter().map(|&i| i as f64 / fs_hz).collect();
    let rr: Vec<f64> = beat_times.windows(2).map(|p| p[1] - p[0]).collect();

    let rr_mean = rr.iter().sum::<f64>() / rr.len() as f64;
    let mut sorted = rr.clone();
    sorted.sort_by(f64::total_cmp);
    let rr_median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let rr_std = population_std(&rr, rr_mean);
    let rr_min = sorted[0];
    let rr_max = sorted[sorted.len() - 1];

    let diffs: Vec<f64> = rr.windows(2).map(|p| p[1] - p[0]).collect();
    let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let diff_mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let sdsd = population_std(&diffs, diff_mean);
    let nn50 = diffs.iter().filter(|d| d.abs() > 0.05).count() as f64;
    let pnn50 = 100.0 * nn50 / diffs.len() as f64;

    let hr: Vec<f64> = rr.iter().map(|r| 60.0 / r).collect();
    let hr_mean = hr.iter().sum::<f64>() / hr.len() as f64;
    let hr_max = hr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let hr_min = hr.iter().cloned().fold(f64::INFINITY, f64::min);
    let hr_std = population_std(&hr, hr_mean);

    let (vlf_power, lf_power, hf_power) = tachogram_band_powers(&beat_times, &rr);
    let lf_hf_ratio = if hf_power < POWER_GUARD {
        0.0
    } else {
        lf_power / hf_power
    };
    let total = lf_power + hf_power;
    let (lf_norm, hf_norm) = if total < POWER_GUARD {
        (0.0, 0.0)
    } else {
        (lf_power / total, hf_power / total)
    };

    Ok(EcgFeatures {
        rr_mean,
        rr_median,
        rr_std,
        rr_min,
        rr_max,
        rr_range: rr_max - rr_min,
        rmssd,
        sdsd,
        nn50,
        pnn50,
        rr_cv: rr_std / rr_mean,
        hr_mean,
        hr_max,
        hr_min,
        hr_std,
        vlf_power,
        lf_power,
        hf_power,
        lf_hf_ratio,
        lf_norm,
        hf_norm,
    })
}
