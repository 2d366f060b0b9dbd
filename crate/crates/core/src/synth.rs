//! Synthetic multichannel recordings for tests and demos.
//!
//! The public drivedb-style dataset cannot be redistributed, so the demo
//! and acceptance paths generate class-dependent signals instead: an
//! impulse-like ECG train at the class's mean heart rate with seeded
//! jitter, EDA baselines with Poisson-rate SCR pulses, and a respiration
//! sinusoid at the class's frequency plus noise.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::signals::{SignalRecord, StressLabel};
use serde::{Deserialize, Serialize};

/// Per-class generator parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClassSignalParams {
    /// Mean SCR events per second.
    pub scr_rate_hz: f64,
    pub mean_hr_bpm: f64,
    pub resp_freq_hz: f64,
}

/// Full generator specification. Segments are laid out contiguously in
/// order, each `duration_seconds / segments.len()` long.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub duration_seconds: f64,
    pub sampling_rate_hz: f64,
    pub segments: Vec<StressLabel>,
    /// Indexed by class ordinal.
    pub params: [ClassSignalParams; 3],
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            duration_seconds: 4200.0,
            sampling_rate_hz: 32.0,
            segments: vec![StressLabel::Low, StressLabel::Medium, StressLabel::High],
            params: [
                ClassSignalParams {
                    scr_rate_hz: 0.02,
                    mean_hr_bpm: 65.0,
                    resp_freq_hz: 0.20,
                },
                ClassSignalParams {
                    scr_rate_hz: 0.05,
                    mean_hr_bpm: 75.0,
                    resp_freq_hz: 0.27,
                },
                ClassSignalParams {
                    scr_rate_hz: 0.09,
                    mean_hr_bpm: 88.0,
                    resp_freq_hz: 0.34,
                },
            ],
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        // three default windows (100 s window, 50 s step) must fit
        if !(self.duration_seconds >= 200.0) {
            return Err(Error::invalid(
                "duration must cover at least three default windows (>= 200 s)",
            ));
        }
        if !(self.sampling_rate_hz > 0.0) {
            return Err(Error::invalid("sampling rate must be positive"));
        }
        if self.segments.is_empty() {
            return Err(Error::invalid("at least one segment required"));
        }
        for p in &self.params {
            if !(p.scr_rate_hz > 0.0 && p.mean_hr_bpm > 0.0 && p.resp_freq_hz > 0.0) {
                return Err(Error::invalid("class signal rates must be positive"));
            }
        }
        Ok(())
    }
}

/// RNG stream tags; generation order inside each stream is fixed, so every
/// channel is independently reproducible.
const TAG_ECG: u64 = 1;
const TAG_HAND_EDA: u64 = 2;
const TAG_FOOT_EDA: u64 = 3;
const TAG_RESP: u64 = 4;

pub fn generate(spec: &SyntheticSpec) -> Result<SignalRecord> {
    spec.validate()?;
    let fs = spec.sampling_rate_hz;
    let n = (spec.duration_seconds * fs).round() as usize;
    let seg_len = n / spec.segments.len();

    let class_at = |i: usize| -> StressLabel {
        let seg = (i / seg_len.max(1)).min(spec.segments.len() - 1);
        spec.segments[seg]
    };

    let labels: Vec<StressLabel> = (0..n).map(class_at).collect();
    let ecg = gen_ecg(spec, n, fs, &labels);
    let hand_eda = gen_eda(spec, n, fs, &labels, TAG_HAND_EDA);
    let foot_eda = gen_eda(spec, n, fs, &labels, TAG_FOOT_EDA);
    let resp = gen_resp(spec, n, fs, &labels);

    SignalRecord::new(ecg, hand_eda, foot_eda, resp, fs, labels)
}

fn gen_ecg(spec: &SyntheticSpec, n: usize, fs: f64, labels: &[StressLabel]) -> Vec<f64> {
    let mut rng = Rng::derive(spec.seed, TAG_ECG);
    let mut x = vec![0.0; n];
    // baseline noise
    for v in x.iter_mut() {
        *v = 0.05 * rng.next_normal();
    }
    // beat train with +-4% multiplicative jitter
    let sigma = (0.01 * fs).max(0.5);
    let reach = (3.0 * sigma).ceil() as isize;
    let mut t = 0.3;
    while t < spec.duration_seconds {
        let i = (t * fs).round() as isize;
        for o in -reach..=reach {
            let j = i + o;
            if j >= 0 && (j as usize) < n {
                let d = o as f64;
                x[j as usize] += (-d * d / (2.0 * sigma * sigma)).exp();
            }
        }
        let idx = (i.clamp(0, n as isize - 1)) as usize;
        let hr = spec.params[labels[idx].ordinal()].mean_hr_bpm;
        let rr = 60.0 / hr * (1.0 + 0.04 * (2.0 * rng.next_f64() - 1.0));
        t += rr;
    }
    x
}

fn gen_eda(spec: &SyntheticSpec, n: usize, fs: f64, labels: &[StressLabel], tag: u64) -> Vec<f64> {
    let mut rng = Rng::derive(spec.seed, tag);
    let mut x = vec![0.0; n];
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 / fs;
        // tonic level with a slow drift plus measurement noise
        *v = 2.0 + 0.1 * (2.0 * std::f64::consts::PI * 0.002 * t).sin() + 0.01 * rng.next_normal();
    }
    // phasic SCR pulses from a class-rate Poisson process:
    // linear rise over 1.5 s, exponential decay (tau = 3 s)
    let rise_s = 1.5;
    let decay_tau = 3.0;
    let pulse_len = ((rise_s + 6.0 * decay_tau) * fs) as usize;
    let mut t = rng.next_exp(spec.params[labels[0].ordinal()].scr_rate_hz);
    while t < spec.duration_seconds {
        let start = (t * fs) as usize;
        if start >= n {
            break;
        }
        let amp = rng.next_range(0.6, 1.4);
        for k in 0..pulse_len.min(n - start) {
            let dt = k as f64 / fs;
            let shape = if dt < rise_s {
                dt / rise_s
            } else {
                (-(dt - rise_s) / decay_tau).exp()
            };
            x[start + k] += amp * shape;
        }
        let rate = spec.params[labels[start].ordinal()].scr_rate_hz;
        t += rng.next_exp(rate);
    }
    x
}

fn gen_resp(spec: &SyntheticSpec, n: usize, fs: f64, labels: &[StressLabel]) -> Vec<f64> {
    let mut rng = Rng::derive(spec.seed, TAG_RESP);
    let mut x = vec![0.0; n];
    // accumulate phase so the frequency can change at segment boundaries
    // without a discontinuity
    let mut phase = 0.0f64;
    for (i, v) in x.iter_mut().enumerate() {
        let f = spec.params[labels[i].ordinal()].resp_freq_hz;
        phase += 2.0 * std::f64::consts::PI * f / fs;
        *v = phase.sin() + 0.1 * rng.next_normal();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{build_feature_matrix, WindowSpec};

    fn quick_spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            duration_seconds: 900.0,
            sampling_rate_hz: 16.0,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn label_column_has_contiguous_runs() {
        let rec = generate(&quick_spec(1)).unwrap();
        let mut runs = 1;
        for pair in rec.labels.windows(2) {
            if pair[0] != pair[1] {
                runs += 1;
            }
        }
        assert_eq!(runs, 3);
        assert_eq!(rec.labels[0], StressLabel::Low);
        assert_eq!(*rec.labels.last().unwrap(), StressLabel::High);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&quick_spec(9)).unwrap();
        let b = generate(&quick_spec(9)).unwrap();
        assert_eq!(a.ecg, b.ecg);
        assert_eq!(a.hand_eda, b.hand_eda);
        assert_eq!(a.foot_eda, b.foot_eda);
        assert_eq!(a.resp, b.resp);
        let c = generate(&quick_spec(10)).unwrap();
        assert_ne!(a.ecg, c.ecg);
    }

    #[test]
    fn extraction_pipeline_consumes_generated_records() {
        let rec = generate(&quick_spec(3)).unwrap();
        let extraction = build_feature_matrix(&rec, &WindowSpec::default()).unwrap();
        assert_eq!(extraction.matrix.n_cols(), 39);
        assert!(extraction.matrix.n_rows() >= 15);
        // every class shows up in the window labels
        assert_eq!(extraction.matrix.classes_present().len(), 3);
    }

    #[test]
    fn higher_scr_rate_yields_more_detected_peaks() {
        // high-stress windows should average more SCR events than
        // low-stress windows, through the full extraction pipeline
        let mut high_total = 0.0;
        let mut low_total = 0.0;
        for seed in 0..5 {
            let rec = generate(&quick_spec(100 + seed)).unwrap();
            let extraction = build_feature_matrix(&rec, &WindowSpec::default()).unwrap();
            let fm = &extraction.matrix;
            let peak_col = fm
                .names()
                .iter()
                .position(|n| n == "h_eda_peak_count")
                .unwrap();
            let mut high = (0.0, 0.0);
            let mut low = (0.0, 0.0);
            for r in 0..fm.n_rows() {
                match fm.labels()[r] {
                    StressLabel::High => {
                        high.0 += fm.row(r)[peak_col];
                        high.1 += 1.0;
                    }
                    StressLabel::Low => {
                        low.0 += fm.row(r)[peak_col];
                        low.1 += 1.0;
                    }
                    StressLabel::Medium => {}
                }
            }
            high_total += high.0 / high.1;
            low_total += low.0 / low.1;
        }
        assert!(
            high_total > low_total,
            "mean high-window peaks {high_total} vs low {low_total}"
        );
    }

    #[test]
    fn rejects_short_duration() {
        let spec = SyntheticSpec {
            duration_seconds: 150.0,
            ..Default::default()
        };
        assert!(generate(&spec).is_err());
    }
}
