//! Respiration window features: distribution moments plus average spectral
//! power in four low-frequency bands.

use super::spectrum::{band_mean_psd, welch_psd};
use crate::error::{Error, Result};

pub(crate) const FEATURE_NAMES: [&str; 6] = [
    "mean",
    "variance",
    "band_0.0_0.1",
    "band_0.1_0.2",
    "band_0.2_0.3",
    "band_0.3_0.4",
];

/// Segment length in seconds for the Welch estimate; 40 s gives 0.025 Hz
/// resolution, four bins per band.
const SEGMENT_SECONDS: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RespFeatures {
    pub mean: f64,
    pub variance: f64,
    pub band_0_0_to_0_1: f64,
    pub band_0_1_to_0_2: f64,
    pub band_0_2_to_0_3: f64,
    pub band_0_3_to_0_4: f64,
}

impl RespFeatures {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.mean,
            self.variance,
            self.band_0_0_to_0_1,
            self.band_0_1_to_0_2,
            self.band_0_2_to_0_3,
            self.band_0_3_to_0_4,
        ]
    }
}

/// Mean Welch PSD over each band; requires fs >= 0.8 Hz so the 0.4 Hz band
/// edge stays below Nyquist.
pub fn extract_resp_features(window: &[f64], fs_hz: f64) -> Result<RespFeatures> {
    if window.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(fs_hz >= 0.8) {
        return Err(Error::invalid(format!(
            "respiration bands need fs >= 0.8 Hz, got {fs_hz}"
        )));
    }
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let variance = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;

    let centered: Vec<f64> = window.iter().map(|x| x - mean).collect();
    let nperseg = ((SEGMENT_SECONDS * fs_hz).round() as usize).max(8);
    let psd = welch_psd(&centered, fs_hz, nperseg);

    Ok(RespFeatures {
        mean,
        variance,
        band_0_0_to_0_1: band_mean_psd(&psd, 0.0, 0.1),
        band_0_1_to_0_2: band_mean_psd(&psd, 0.1, 0.2),
        band_0_2_to_0_3: band_mean_psd(&psd, 0.2, 0.3),
        band_0_3_to_0_4: band_mean_psd(&psd, 0.3, 0.4),
    })
}
