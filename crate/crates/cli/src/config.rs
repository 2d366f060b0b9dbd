//! Flat key-value configuration with dotted section keys.
//!
//! Precedence is flags > file > defaults; the file parser rejects unknown
//! keys so typos fail before any computation starts.

use crate::error::{CliError, Result};
use qasel_core::baselines::Method;
use qasel_core::eval::{ExperimentConfig, SignificanceTest};
use qasel_core::qubo::CorrelationMode;
use qasel_core::sampler::AnnealSchedule;
use qasel_core::signals::{FilterSpec, RPeakConfig, ScrConfig, WindowSpec};
use qasel_core::synth::SyntheticSpec;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Everything the commands need, assembled from defaults, an optional
/// config file, and command-line overrides.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub seed: u64,
    pub window: WindowSpec,
    pub filters: FilterSpec,
    pub scr: ScrConfig,
    pub rpeak: RPeakConfig,
    pub alpha: f64,
    pub correlation_mode: CorrelationMode,
    pub schedule: AnnealSchedule,
    pub experiment: ExperimentConfig,
    pub synth: SyntheticSpec,
    pub select_method: Method,
    pub select_k: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            window: WindowSpec::default(),
            filters: FilterSpec::default(),
            scr: ScrConfig::default(),
            rpeak: RPeakConfig::default(),
            alpha: 1.0,
            correlation_mode: CorrelationMode::Absolute,
            schedule: AnnealSchedule::default(),
            experiment: ExperimentConfig::default(),
            synth: SyntheticSpec::default(),
            select_method: Method::Qa,
            select_k: None,
        }
    }
}

impl PipelineConfig {
    /// Defaults overlaid with a config file when one is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_file(&text, &path.display().to_string())?;
        }
        Ok(cfg)
    }

    /// Push the loose fields into the experiment/synth structs they feed.
    pub fn finalize(&mut self) {
        self.experiment.seed = self.seed;
        self.experiment.alpha = self.alpha;
        self.experiment.schedule = self.schedule;
        self.synth.seed = self.seed;
    }

    fn apply_file(&mut self, text: &str, origin: &str) -> Result<()> {
        let entries = parse_entries(text, origin)?;
        for (key, value) in &entries {
            self.apply_entry(key, value)
                .map_err(|e| CliError::validation(format!("{origin}: key '{key}': {e}")))?;
        }
        Ok(())
    }

    fn apply_entry(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(value: &str) -> std::result::Result<T, String> {
            value
                .parse::<T>()
                .map_err(|_| format!("cannot parse '{value}'"))
        }
        match key {
            "seed" => self.seed = num(value)?,
            "window.seconds" => self.window.window_seconds = num(value)?,
            "window.step" => self.window.step_seconds = num(value)?,
            "filter.eda_cutoff_hz" => self.filters.eda_cutoff_hz = num(value)?,
            "filter.ecg_cutoff_hz" => self.filters.ecg_cutoff_hz = num(value)?,
            "filter.resp_cutoff_hz" => self.filters.resp_cutoff_hz = num(value)?,
            "filter.order" => self.filters.order = num(value)?,
            "scr.onset_slope_threshold" => self.scr.onset_slope_threshold = num(value)?,
            "scr.onset_search_seconds" => self.scr.onset_search_seconds = num(value)?,
            "scr.recovery_fraction" => self.scr.recovery_fraction = num(value)?,
            "scr.min_amplitude" => self.scr.min_amplitude = num(value)?,
            "rpeak.integration_window_seconds" => {
                self.rpeak.integration_window_seconds = num(value)?
            }
            "rpeak.refractory_seconds" => self.rpeak.refractory_seconds = num(value)?,
            "rpeak.threshold_fraction" => self.rpeak.threshold_fraction = num(value)?,
            "rpeak.peak_history" => self.rpeak.peak_history = num(value)?,
            "qubo.alpha" => self.alpha = num(value)?,
            "qubo.mode" => {
                self.correlation_mode = match value {
                    "absolute" => CorrelationMode::Absolute,
                    "signed" => CorrelationMode::Signed,
                    _ => return Err("expected 'absolute' or 'signed'".into()),
                }
            }
            "anneal.sweeps" => self.schedule.sweeps = num(value)?,
            "anneal.beta_start" => self.schedule.beta_start = num(value)?,
            "anneal.beta_end" => self.schedule.beta_end = num(value)?,
            "anneal.n_reads" => self.schedule.n_reads = num(value)?,
            "experiment.fractions" => {
                self.experiment.fractions = value
                    .split(',')
                    .map(|s| num::<f64>(s.trim()))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            }
            "experiment.repeats" => self.experiment.n_repeats = num(value)?,
            "experiment.methods" => {
                self.experiment.methods = value
                    .split(',')
                    .map(|s| Method::from_str(s.trim()).map_err(|e| e.to_string()))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            }
            "experiment.knn_k" => self.experiment.knn_k = num(value)?,
            "experiment.mi_bins" => self.experiment.mi_bins = num(value)?,
            "experiment.test_fraction" => self.experiment.test_fraction = num(value)?,
            "experiment.significance" => {
                self.experiment.significance = match value {
                    "welch_t" => SignificanceTest::WelchT,
                    "mann_whitney" => SignificanceTest::MannWhitney,
                    _ => return Err("expected 'welch_t' or 'mann_whitney'".into()),
                }
            }
            "synth.duration_seconds" => self.synth.duration_seconds = num(value)?,
            "synth.sampling_rate_hz" => self.synth.sampling_rate_hz = num(value)?,
            "select.method" => {
                self.select_method = Method::from_str(value).map_err(|e| e.to_string())?
            }
            "select.k" => self.select_k = Some(num(value)?),
            _ => {
                if let Some(rest) = key.strip_prefix("synth.") {
                    return self.apply_synth_class(rest, value);
                }
                return Err("unknown key".into());
            }
        }
        Ok(())
    }

    fn apply_synth_class(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let (class, field) = key
            .split_once('.')
            .ok_or_else(|| "unknown key".to_string())?;
        let idx = match class {
            "low" => 0,
            "medium" => 1,
            "high" => 2,
            _ => return Err("unknown key".into()),
        };
        let parsed: f64 = value
            .parse()
            .map_err(|_| format!("cannot parse '{value}'"))?;
        match field {
            "scr_rate_hz" => self.synth.params[idx].scr_rate_hz = parsed,
            "mean_hr_bpm" => self.synth.params[idx].mean_hr_bpm = parsed,
            "resp_freq_hz" => self.synth.params[idx].resp_freq_hz = parsed,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }
}

fn parse_entries(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::validation(format!(
                "{origin}:{}: expected 'key = value', got '{line}'",
                idx + 1
            ))
        })?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_pinned_values() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.window.window_seconds, 100.0);
        assert_eq!(cfg.window.step_seconds, 50.0);
        assert_eq!(cfg.filters.eda_cutoff_hz, 1.0);
        assert_eq!(cfg.filters.ecg_cutoff_hz, 40.0);
        assert_eq!(cfg.filters.resp_cutoff_hz, 10.0);
        assert_eq!(cfg.filters.order, 5);
        assert_eq!(cfg.experiment.fractions, vec![1.0, 0.3, 0.2, 0.1]);
        assert_eq!(cfg.experiment.n_repeats, 10);
        assert_eq!(cfg.schedule.n_reads, 100);
    }

    #[test]
    fn file_overrides_defaults() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_file(
            "# comment\nwindow.seconds = 60\nexperiment.methods = qa, pearson\nqubo.alpha = 0.5\nsynth.high.mean_hr_bpm = 95\n",
            "test",
        )
        .unwrap();
        assert_eq!(cfg.window.window_seconds, 60.0);
        assert_eq!(cfg.experiment.methods, vec![Method::Qa, Method::Pearson]);
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.synth.params[2].mean_hr_bpm, 95.0);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut cfg = PipelineConfig::default();
        let err = cfg.apply_file("windw.seconds = 60\n", "test").unwrap_err();
        assert!(err.to_string().contains("windw.seconds"));
    }

    #[test]
    fn malformed_line_is_rejected() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.apply_file("just some words\n", "test").is_err());
    }

    #[test]
    fn finalize_propagates_seed() {
        let mut cfg = PipelineConfig::default();
        cfg.seed = 7;
        cfg.alpha = 2.0;
        cfg.finalize();
        assert_eq!(cfg.experiment.seed, 7);
        assert_eq!(cfg.synth.seed, 7);
        assert_eq!(cfg.experiment.alpha, 2.0);
    }
}
