//! Digital Butterworth low-pass filtering.
//!
//! The filter is designed from the analog prototype through the bilinear
//! transform with frequency prewarping, so the digital magnitude at
//! frequency f equals the analog Butterworth magnitude at the prewarped
//! frequency 2*fs*tan(pi*f/fs). Cascaded second-order sections keep
//! order-5 designs numerically well behaved.

use crate::error::{Error, Result};

/// One second-order section in direct form II transposed
/// (first-order sections padded with b2 = a2 = 0).
#[derive(Clone, Copy, Debug)]
struct Section {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Section {
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Run the section over `x` in place, starting from the steady-state
    /// response to x[0] so constant inputs pass through without transients.
    fn run(&self, x: &mut [f64]) {
        if x.is_empty() {
            return;
        }
        let g = self.dc_gain();
        let x0 = x[0];
        let y0 = g * x0;
        let mut z2 = self.b2 * x0 - self.a2 * y0;
        let mut z1 = self.b1 * x0 - self.a1 * y0 + z2;
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b0 * input + z1;
            z1 = self.b1 * input - self.a1 * y + z2;
            z2 = self.b2 * input - self.a2 * y;
            *v = y;
        }
    }
}

/// Cascaded-SOS Butterworth low-pass filter.
#[derive(Clone, Debug)]
pub struct ButterworthLowpass {
    sections: Vec<Section>,
    order: usize,
}

impl ButterworthLowpass {
    /// Design for the given cutoff; requires cutoff < fs/2.
    pub fn design(cutoff_hz: f64, fs_hz: f64, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("filter order must be at least 1"));
        }
        if !(fs_hz > 0.0 && cutoff_hz > 0.0) {
            return Err(Error::invalid("cutoff and sampling rate must be positive"));
        }
        if cutoff_hz >= fs_hz / 2.0 {
            return Err(Error::invalid(format!(
                "cutoff {cutoff_hz} Hz must be below Nyquist {} Hz",
                fs_hz / 2.0
            )));
        }

        let k = 2.0 * fs_hz;
        // prewarped analog cutoff in rad/s
        let wc = k * (std::f64::consts::PI * cutoff_hz / fs_hz).tan();

        let mut sections = Vec::with_capacity(order / 2 + 1);
        // conjugate pole pairs of the analog prototype, scaled by wc:
        // pole angle theta measured from the imaginary axis, so each pair
        // contributes s^2 + 2 wc sin(theta) s + wc^2
        let pairs = order / 2;
        for m in 0..pairs {
            let theta = std::f64::consts::PI * (2.0 * m as f64 + 1.0) / (2.0 * order as f64);
            let a1_analog = 2.0 * wc * theta.sin();
            let a0_analog = wc * wc;
            let norm = k * k + a1_analog * k + a0_analog;
            sections.push(Section {
                b0: a0_analog / norm,
                b1: 2.0 * a0_analog / norm,
                b2: a0_analog / norm,
                a1: (2.0 * a0_analog - 2.0 * k * k) / norm,
                a2: (k * k - a1_analog * k + a0_analog) / norm,
            });
        }
        if order % 2 == 1 {
            // real pole at -wc
            let norm = k + wc;
            sections.push(Section {
                b0: wc / norm,
                b1: wc / norm,
                b2: 0.0,
                a1: (wc - k) / norm,
                a2: 0.0,
            });
        }
        Ok(ButterworthLowpass { sections, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact DC gain from the coefficients (product over sections).
    pub fn dc_gain(&self) -> f64 {
        self.sections.iter().map(Section::dc_gain).product()
    }

    /// Magnitude of the frequency response at `freq_hz`, evaluated from the
    /// coefficients on the unit circle.
    pub fn magnitude_at(&self, freq_hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / fs_hz;
        let (zr, zi) = (w.cos(), -w.sin()); // z^-1
        let (z2r, z2i) = (zr * zr - zi * zi, 2.0 * zr * zi); // z^-2
        let mut mag = 1.0;
        for s in &self.sections {
            let nr = s.b0 + s.b1 * zr + s.b2 * z2r;
            let ni = s.b1 * zi + s.b2 * z2i;
            let dr = 1.0 + s.a1 * zr + s.a2 * z2r;
            let di = s.a1 * zi + s.a2 * z2i;
            mag *= (nr * nr + ni * ni).sqrt() / (dr * dr + di * di).sqrt();
        }
        mag
    }

    /// Single forward pass.
    pub fn filter_forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y);
        }
        y
    }

    /// Forward-backward (zero-phase) pass with odd-reflection edge padding;
    /// the effective magnitude response is the squared single-pass magnitude.
    pub fn filter_zero_phase(&self, x: &[f64]) -> Vec<f64> {
        if x.len() < 2 {
            return x.to_vec();
        }
        let pad = (3 * (2 * self.order + 1)).min(x.len() - 1);
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }

        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        for s in &self.sections {
            s.run(&mut ext);
        }
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Filtered samples plus a note when the requested cutoff was unusable.
#[derive(Clone, Debug)]
pub struct FilterOutput {
    pub samples: Vec<f64>,
    /// True when cutoff >= Nyquist: the input is returned unchanged and the
    /// caller should surface a warning instead of failing.
    pub skipped_above_nyquist: bool,
}

/// Zero-phase order-`order` Butterworth low-pass. A cutoff at or above
/// Nyquist passes the signal through unchanged (flagged), since low-rate
/// exports legitimately cannot honor high cutoffs.
pub fn butterworth_lowpass(
    samples: &[f64],
    cutoff_hz: f64,
    fs_hz: f64,
    order: usize,
) -> Result<FilterOutput> {
    if order == 0 {
        return Err(Error::invalid("filter order must be at least 1"));
    }
    if !(cutoff_hz > 0.0 && fs_hz > 0.0) {
        return Err(Error::invalid("cutoff and sampling rate must be positive"));
    }
    if cutoff_hz >= fs_hz / 2.0 {
        return Ok(FilterOutput {
            samples: samples.to_vec(),
            skipped_above_nyquist: true,
        });
    }
    let filt = ButterworthLowpass::design(cutoff_hz, fs_hz, order)?;
    Ok(FilterOutput {
        samples: filt.filter_zero_phase(samples),
        skipped_above_nyquist: false,
    })
}

/// Least-squares amplitude of a sinusoid at `freq_hz` fitted over the last
/// half of `x` (steady state); used by the gain tests and the acceptance
/// suite. Solves the 2x2 normal equations for a*sin + b*cos.
pub fn fit_sinusoid_amplitude(x: &[f64], freq_hz: f64, fs_hz: f64) -> f64 {
    let start = x.len() / 2;
    let (mut sss, mut scc, mut ssc, mut sxs, mut sxc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in x.iter().enumerate().skip(start) {
        let t = i as f64 / fs_hz;
        let (s, c) = (2.0 * std::f64::consts::PI * freq_hz * t).sin_cos();
        sss += s * s;
        scc += c * c;
        ssc += s * c;
        sxs += v * s;
        sxc += v * c;
    }
    let det = sss * scc - ssc * ssc;
    if det.abs() < 1e-12 {
        return 0.0;
    }
    let a = (sxs * scc - sxc * ssc) / det;
    let b = (sxc * sss - sxs * ssc) / det;
    (a * a + b * b).sqrt()
}
