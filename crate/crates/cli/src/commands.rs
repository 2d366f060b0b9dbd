//! The four batch commands. Each is a plain function over
//! [`PipelineConfig`] so the binary and the integration tests share one
//! code path; outputs are staged in memory and written together, and a
//! failed evaluation removes any file it already placed.

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use qasel_core::baselines::{baseline_select, mutual_info_select, Method, SelectionResult};
use qasel_core::eval::{run_experiment, significance_table, source_contribution};
use qasel_core::io;
use qasel_core::qubo::{build_bqm_with, Bqm};
use qasel_core::sampler::{select_features, SamplerKind, EXHAUSTIVE_MAX_VARS};
use qasel_core::signals::{build_feature_matrix_with, FeatureMatrix};
use qasel_core::synth::generate;
use std::fs;
use std::path::{Path, PathBuf};

pub struct ExtractSummary {
    pub out_path: PathBuf,
    pub n_windows: usize,
    pub n_rows: usize,
    pub n_dropped: usize,
    pub warnings: Vec<String>,
}

pub struct SelectSummary {
    pub selection_path: PathBuf,
    pub bqm_path: Option<PathBuf>,
    pub indices: Vec<usize>,
}

pub struct EvaluateSummary {
    pub paths: Vec<PathBuf>,
    pub n_f1_rows: usize,
    pub warnings: Vec<String>,
}

pub struct SynthSummary {
    pub out_path: PathBuf,
    pub n_samples: usize,
}

fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))
}

pub fn cmd_extract(cfg: &PipelineConfig, input: &Path, out_dir: &Path) -> Result<ExtractSummary> {
    cfg.window.validate()?;
    cfg.filters.validate()?;
    ensure_out_dir(out_dir)?;

    let record = io::read_signal_csv(input)?;
    let extraction =
        build_feature_matrix_with(&record, &cfg.window, &cfg.filters, &cfg.scr, &cfg.rpeak)?;
    let out_path = out_dir.join("features.csv");
    fs::write(&out_path, io::feature_matrix_csv(&extraction.matrix))?;
    Ok(ExtractSummary {
        out_path,
        n_windows: extraction.n_windows,
        n_rows: extraction.matrix.n_rows(),
        n_dropped: extraction.n_dropped,
        warnings: extraction.warnings,
    })
}

/// The sampler the selection command uses for a model of `n` variables:
/// exhaustive when the oracle can afford it, annealing beyond that.
fn auto_sampler(n: usize) -> SamplerKind {
    if n <= EXHAUSTIVE_MAX_VARS {
        SamplerKind::Exhaustive
    } else {
        SamplerKind::Annealing
    }
}

fn qa_selection(cfg: &PipelineConfig, matrix: &FeatureMatrix) -> Result<(Bqm, Vec<usize>)> {
    let bqm = build_bqm_with(matrix, cfg.alpha, cfg.correlation_mode)?;
    let indices = select_features(&bqm, auto_sampler(bqm.n()), &cfg.schedule, cfg.seed)?;
    Ok((bqm, indices))
}

pub fn cmd_select(cfg: &PipelineConfig, matrix_path: &Path, out_dir: &Path) -> Result<SelectSummary> {
    cfg.schedule.validate()?;
    ensure_out_dir(out_dir)?;
    let matrix = io::read_feature_matrix_csv(matrix_path)?;

    let (selection, bqm_json) = match cfg.select_method {
        Method::Qa => {
            let (bqm, indices) = qa_selection(cfg, &matrix)?;
            let scores: Vec<f64> = bqm.biases().iter().map(|h| -h).collect();
            let k = indices.len();
            let selection = SelectionResult {
                method: Method::Qa,
                indices,
                scores,
                k,
            };
            (selection, Some(bqm.to_json().map_err(qasel_core::Error::from)?))
        }
        method => {
            // matched cardinality: default k is the size of the QA
            // selection on the same data
            let k = match cfg.select_k {
                Some(k) => k,
                None => qa_selection(cfg, &matrix)?.1.len(),
            };
            let selection = match method {
                Method::MutualInfo => mutual_info_select(&matrix, k, cfg.experiment.mi_bins)?,
                other => baseline_select(&matrix, other, k)?,
            };
            (selection, None)
        }
    };

    let selection_path = out_dir.join("selection.json");
    fs::write(
        &selection_path,
        selection.to_json().map_err(qasel_core::Error::from)?,
    )?;
    let bqm_path = match bqm_json {
        Some(json) => {
            let p = out_dir.join("bqm.json");
            fs::write(&p, json)?;
            Some(p)
        }
        None => None,
    };
    Ok(SelectSummary {
        selection_path,
        bqm_path,
        indices: selection.indices,
    })
}

pub fn cmd_evaluate(cfg: &PipelineConfig, matrix_path: &Path, out_dir: &Path) -> Result<EvaluateSummary> {
    cfg.experiment.validate()?;
    ensure_out_dir(out_dir)?;
    let matrix = io::read_feature_matrix_csv(matrix_path)?;

    let result = run_experiment(&matrix, &cfg.experiment)?;
    let significance = significance_table(&result, &cfg.experiment)?;
    let mut warnings = Vec::new();
    if cfg.experiment.n_repeats < 2 {
        warnings.push("significance table left empty: needs at least 2 repetitions".to_string());
    }

    let mut contribution = Vec::new();
    for &method in &cfg.experiment.methods {
        for &fraction in &cfg.experiment.fractions {
            let rows: Vec<_> = result
                .selections
                .iter()
                .filter(|s| s.method == method && s.fraction == fraction)
                .cloned()
                .collect();
            if !rows.is_empty() {
                contribution.push((method.to_string(), fraction, source_contribution(&rows)?));
            }
        }
    }

    // stage everything, then write; remove partial output on failure
    let staged = [
        ("results.csv", io::results_csv(&result.f1_rows)),
        ("selections.csv", io::selections_csv(&result.selections)),
        ("significance.csv", io::significance_csv(&significance)),
        ("contribution.csv", io::contribution_csv(&contribution)),
    ];
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, contents) in &staged {
        let path = out_dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            return Err(CliError::Runtime(format!(
                "writing {} failed: {e}; partial outputs removed",
                path.display()
            )));
        }
        written.push(path);
    }
    Ok(EvaluateSummary {
        paths: written,
        n_f1_rows: result.f1_rows.len(),
        warnings,
    })
}

pub fn cmd_synth(cfg: &PipelineConfig, out_dir: &Path) -> Result<SynthSummary> {
    cfg.synth.validate()?;
    ensure_out_dir(out_dir)?;
    let record = generate(&cfg.synth)?;
    let out_path = out_dir.join("signals.csv");
    fs::write(&out_path, io::signal_csv(&record))?;
    Ok(SynthSummary {
        out_path,
        n_samples: record.len(),
    })
}
