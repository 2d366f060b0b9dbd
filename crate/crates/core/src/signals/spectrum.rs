//! Welch power-spectral-density estimation (Hann taper, 50% overlap,
//! per-segment mean removal, one-sided density scaling).

use rustfft::{num_complex::Complex, FftPlanner};

/// One-sided power spectral density in units of power per Hz.
#[derive(Clone, Debug)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    /// Bin spacing in Hz.
    pub df: f64,
}

/// Welch estimate with segment length `nperseg` (clamped to the signal
/// length) and 50% segment overlap.
pub fn welch_psd(x: &[f64], fs: f64, nperseg: usize) -> Psd {
    assert!(fs > 0.0, "sampling rate must be positive");
    let nperseg = nperseg.min(x.len()).max(1);
    let step = (nperseg / 2).max(1);
    let df = fs / nperseg as f64;
    let n_bins = nperseg / 2 + 1;

    // periodic Hann taper
    let window: Vec<f64> = (0..nperseg)
        .map(|k| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / nperseg as f64).cos()))
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nperseg);

    let mut acc = vec![0.0f64; n_bins];
    let mut n_segments = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); nperseg];

    let mut start = 0;
    while start + nperseg <= x.len() {
        let seg = &x[start..start + nperseg];
        let mean = seg.iter().sum::<f64>() / nperseg as f64;
        for (i, (&s, &w)) in seg.iter().zip(&window).enumerate() {
            buf[i] = Complex::new((s - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        n_segments += 1;
        if start + nperseg == x.len() {
            break;
        }
        start += step;
    }

    let scale = 1.0 / (fs * win_power * n_segments.max(1) as f64);
    let mut values: Vec<f64> = acc.iter().map(|a| a * scale).collect();
    // one-sided: double everything except DC and (for even nperseg) Nyquist
    for (k, v) in values.iter_mut().enumerate() {
        let is_nyquist = nperseg % 2 == 0 && k == n_bins - 1;
        if k != 0 && !is_nyquist {
            *v *= 2.0;
        }
    }
    let freqs = (0..n_bins).map(|k| k as f64 * df).collect();
    Psd { freqs, values, df }
}

/// Integrated power over [lo, hi) Hz.
pub fn band_power(psd: &Psd, lo: f64, hi: f64) -> f64 {
    psd.freqs
        .iter()
        .zip(&psd.values)
        .filter(|(f, _)| **f >= lo && **f < hi)
        .map(|(_, v)| v * psd.df)
        .sum()
}

/// Mean PSD level over [lo, hi) Hz; 0 when no bin falls in the band.
pub fn band_mean_psd(psd: &Psd, lo: f64, hi: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (f, v) in psd.freqs.iter().zip(&psd.values) {
        if *f >= lo && *f < hi {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
