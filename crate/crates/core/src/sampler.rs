//! Minimizers for the binary quadratic model.
//!
//! [`exhaustive_solve`] enumerates every assignment (capped at 24 variables)
//! and is the ground-truth oracle. [`simulated_anneal`] is the desk-scale
//! stand-in for annealing hardware: independent restarts of single-bit
//! Metropolis sweeps under a geometric inverse-temperature ramp, resampled
//! `n_reads` times and sorted by energy.
//!
//! Restarts derive their generator from `seed + read_index`, so parallel and
//! sequential execution produce bit-identical sample sets.

use crate::error::{Error, Result};
use crate::qubo::Bqm;
use crate::rng::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Exhaustive enumeration limit: 2^24 states stays in desk-scale seconds.
pub const EXHAUSTIVE_MAX_VARS: usize = 24;

/// Variables enumerated incrementally within one enumeration block.
const BLOCK_BITS: usize = 16;

/// One binary assignment with its exactly re-evaluated energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: Vec<bool>,
    pub energy: f64,
}

impl Sample {
    /// Indices set to 1, ascending.
    pub fn selected_indices(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn bitstring(&self) -> String {
        self.x.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str, energy: f64) -> Result<Self> {
        let x = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("invalid bit '{c}' in bitstring"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(Sample { x, energy })
    }
}

impl Serialize for Sample {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            x: &'a str,
            energy: f64,
        }
        Wire {
            x: &self.bitstring(),
            energy: self.energy,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sample {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            x: String,
            energy: f64,
        }
        let w = Wire::deserialize(deserializer)?;
        Sample::from_bitstring(&w.x, w.energy).map_err(D::Error::custom)
    }
}

/// Resampled collection, ascending by energy with lexicographic tie order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub seed: u64,
    pub n_reads: usize,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    /// The lowest-energy sample.
    pub fn best(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Annealing run parameters. `beta` ramps geometrically from `beta_start`
/// to `beta_end` over `sweeps` full passes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub n_reads: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            n_reads: 100,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::invalid("schedule needs at least one sweep"));
        }
        if self.n_reads == 0 {
            return Err(Error::invalid("schedule needs at least one read"));
        }
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start) {
            return Err(Error::invalid(
                "betas must satisfy 0 < beta_start <= beta_end",
            ));
        }
        Ok(())
    }

    fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = (self.beta_end / self.beta_start).ln();
        (0..self.sweeps)
            .map(|s| self.beta_start * (ratio * s as f64 / (self.sweeps - 1) as f64).exp())
            .collect()
    }
}

/// Global minimum by full enumeration; ties resolve to the
/// lexicographically smallest bit vector (x[0] most significant).
pub fn exhaustive_solve(bqm: &Bqm) -> Result<Sample> {
    exhaustive_impl(bqm, cfg!(feature = "parallel"))
}

/// Reference sequential enumeration; same contract and results as
/// [`exhaustive_solve`], used by the equivalence tests and benches.
pub fn exhaustive_solve_serial(bqm: &Bqm) -> Result<Sample> {
    exhaustive_impl(bqm, false)
}

fn exhaustive_impl(bqm: &Bqm, parallel: bool) -> Result<Sample> {
    let n = bqm.n();
    if n == 0 {
        return Err(Error::invalid("model has no variables"));
    }
    if n > EXHAUSTIVE_MAX_VARS {
        return Err(Error::Capacity {
            n,
            max: EXHAUSTIVE_MAX_VARS,
        });
    }

    let low_bits = n.min(BLOCK_BITS);
    let high_bits = n - low_bits;
    let n_blocks = 1usize << high_bits;

    let run_block = |block: usize| -> Sample {
        // high variables are the leading indices, fixed per block
        let mut x = vec![false; n];
        for (bit, xi) in x.iter_mut().take(high_bits).enumerate() {
            *xi = (block >> (high_bits - 1 - bit)) & 1 == 1;
        }
        let mut best = Sample {
            x: x.clone(),
            energy: bqm.energy(&x).expect("length matches by construction"),
        };
        let mut energy = best.energy;
        // Gray-code walk over the trailing `low_bits` variables; one flip
        // per step keeps the update O(n). Incremental drift within a block
        // stays far below the 1e-9 re-check margin.
        for step in 1u64..(1u64 << low_bits) {
            let flip = high_bits + step.trailing_zeros() as usize;
            let field = bqm.local_field(&x, flip);
            energy += if x[flip] { -field } else { field };
            x[flip] = !x[flip];
            if energy <= best.energy + 1e-9 {
                let exact = bqm.energy(&x).expect("length matches");
                if exact < best.energy || (exact == best.energy && x < best.x) {
                    best.x.copy_from_slice(&x);
                    best.energy = exact;
                }
            }
        }
        best
    };

    let block_bests: Vec<Sample> = if parallel {
        #[cfg(feature = "parallel")]
        {
            (0..n_blocks).into_par_iter().map(run_block).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_blocks).map(run_block).collect()
        }
    } else {
        (0..n_blocks).map(run_block).collect()
    };

    let mut best = None::<Sample>;
    for cand in block_bests {
        best = Some(match best {
            None => cand,
            Some(cur) => {
                if cand.energy < cur.energy || (cand.energy == cur.energy && cand.x < cur.x) {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    Ok(best.expect("at least one block"))
}

/// Best-of-`n_reads` simulated annealing. Deterministic given
/// (model, schedule, seed); read `r` seeds its generator with `seed + r`.
pub fn simulated_anneal(bqm: &Bqm, schedule: &AnnealSchedule, seed: u64) -> Result<SampleSet> {
    anneal_impl(bqm, schedule, seed, cfg!(feature = "parallel"))
}

/// Reference sequential path; bit-identical results to
/// [`simulated_anneal`].
pub fn simulated_anneal_serial(
    bqm: &Bqm,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<SampleSet> {
    anneal_impl(bqm, schedule, seed, false)
}

fn anneal_impl(bqm: &Bqm, schedule: &AnnealSchedule, seed: u64, parallel: bool) -> Result<SampleSet> {
    let n = bqm.n();
    if n == 0 {
        return Err(Error::invalid("model has no variables"));
    }
    schedule.validate()?;
    let betas = schedule.betas();

    let run_read = |read: usize| -> Sample {
        let mut rng = Rng::from_seed(seed.wrapping_add(read as u64));
        let mut x: Vec<bool> = (0..n).map(|_| rng.next_bool()).collect();

        // cached local fields: field[i] = h[i] + sum_j J[i][j] x[j]
        let mut field: Vec<f64> = (0..n).map(|i| bqm.local_field(&x, i)).collect();

        for &beta in &betas {
            for i in 0..n {
                let delta = if x[i] { -field[i] } else { field[i] };
                let accept = delta <= 0.0 || rng.next_f64() < (-beta * delta).exp();
                if !accept {
                    continue;
                }
                x[i] = !x[i];
                let sign = if x[i] { 1.0 } else { -1.0 };
                for (j, f) in field.iter_mut().enumerate() {
                    if j != i {
                        *f += sign * bqm.coupling(i, j);
                    }
                }
            }
        }

        let energy = bqm.energy(&x).expect("length matches by construction");
        Sample { x, energy }
    };

    let mut samples: Vec<Sample> = if parallel {
        #[cfg(feature = "parallel")]
        {
            (0..schedule.n_reads).into_par_iter().map(run_read).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..schedule.n_reads).map(run_read).collect()
        }
    } else {
        (0..schedule.n_reads).map(run_read).collect()
    };

    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.x.cmp(&b.x)));
    Ok(SampleSet {
        seed,
        n_reads: schedule.n_reads,
        samples,
    })
}

/// Which minimizer backs a selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    Exhaustive,
    Annealing,
}

/// Feature indices of the best assignment. An empty winning assignment
/// falls back to the single most-relevant feature (most negative bias,
/// lowest index on ties), since an empty set would break classification
/// downstream.
pub fn select_features(
    bqm: &Bqm,
    sampler: SamplerKind,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<Vec<usize>> {
    let best = match sampler {
        SamplerKind::Exhaustive => exhaustive_solve(bqm)?,
        SamplerKind::Annealing => simulated_anneal(bqm, schedule, seed)?.best().clone(),
    };
    let indices = best.selected_indices();
    if !indices.is_empty() {
        return Ok(indices);
    }
    let mut arg = 0usize;
    for (i, &h) in bqm.biases().iter().enumerate() {
        if h < bqm.bias(arg) {
            arg = i;
        }
    }
    Ok(vec![arg])
}
