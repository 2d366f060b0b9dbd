use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qasel::config::PipelineConfig;
use qasel::error::{CliError, Result};
use qasel::{cmd_evaluate, cmd_extract, cmd_select, cmd_synth};
use qasel_core::baselines::Method;
use qasel_core::eval::SignificanceTest;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

/// Feature selection for physiological stress signals: binary quadratic
/// models minimized by simulated annealing, benchmarked against classical
/// filter baselines under shrinking training data.
#[derive(Parser)]
#[command(name = "qasel", version, about)]
struct Cli {
    /// Flat key-value config file (dotted section keys)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; every random draw derives from it
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multichannel recording CSV
    Synth(SynthArgs),
    /// Extract the 39-column feature matrix from a signal CSV
    Extract(ExtractArgs),
    /// Select a feature subset from a feature-matrix CSV
    Select(SelectArgs),
    /// Run the method x fraction x repetition evaluation grid
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Total duration in seconds
    #[arg(long)]
    duration: Option<f64>,
    /// Sampling rate in Hz
    #[arg(long)]
    fs: Option<f64>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Input signal CSV (time,ecg,hand_eda,foot_eda,resp,label)
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    window_seconds: Option<f64>,
    #[arg(long)]
    step_seconds: Option<f64>,
    #[arg(long)]
    eda_cutoff: Option<f64>,
    #[arg(long)]
    ecg_cutoff: Option<f64>,
    #[arg(long)]
    resp_cutoff: Option<f64>,
    #[arg(long)]
    filter_order: Option<usize>,
}

#[derive(Args)]
struct SelectArgs {
    /// Feature-matrix CSV as produced by `extract`
    #[arg(long)]
    matrix: PathBuf,
    /// qa | pearson | mutual_info | p_value
    #[arg(long)]
    method: Option<String>,
    /// Subset size for baselines (default: cardinality of the qa selection)
    #[arg(long)]
    k: Option<usize>,
    /// Redundancy weight of the quadratic model
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    reads: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Feature-matrix CSV as produced by `extract`
    #[arg(long)]
    matrix: PathBuf,
    /// Comma-separated training fractions, e.g. 1.0,0.3,0.2,0.1
    #[arg(long)]
    fractions: Option<String>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Comma-separated methods to compare
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mi_bins: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// welch_t | mann_whitney
    #[arg(long)]
    significance: Option<String>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    reads: Option<usize>,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    match &cli.command {
        Command::Synth(args) => {
            if let Some(d) = args.duration {
                cfg.synth.duration_seconds = d;
            }
            if let Some(fs) = args.fs {
                cfg.synth.sampling_rate_hz = fs;
            }
            cfg.finalize();
            let summary = cmd_synth(&cfg, &cli.out)?;
            println!(
                "wrote {} ({} samples)",
                summary.out_path.display(),
                summary.n_samples
            );
        }
        Command::Extract(args) => {
            if let Some(v) = args.window_seconds {
                cfg.window.window_seconds = v;
            }
            if let Some(v) = args.step_seconds {
                cfg.window.step_seconds = v;
            }
            if let Some(v) = args.eda_cutoff {
                cfg.filters.eda_cutoff_hz = v;
            }
            if let Some(v) = args.ecg_cutoff {
                cfg.filters.ecg_cutoff_hz = v;
            }
            if let Some(v) = args.resp_cutoff {
                cfg.filters.resp_cutoff_hz = v;
            }
            if let Some(v) = args.filter_order {
                cfg.filters.order = v;
            }
            cfg.finalize();
            let summary = cmd_extract(&cfg, &args.input, &cli.out)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "windows: {} ({} dropped for degenerate ECG)",
                summary.n_windows, summary.n_dropped
            );
            println!("wrote {} ({} rows)", summary.out_path.display(), summary.n_rows);
        }
        Command::Select(args) => {
            if let Some(m) = &args.method {
                cfg.select_method = Method::from_str(m).map_err(CliError::from)?;
            }
            if let Some(k) = args.k {
                cfg.select_k = Some(k);
            }
            if let Some(a) = args.alpha {
                cfg.alpha = a;
            }
            if let Some(s) = args.sweeps {
                cfg.schedule.sweeps = s;
            }
            if let Some(r) = args.reads {
                cfg.schedule.n_reads = r;
            }
            cfg.finalize();
            let summary = cmd_select(&cfg, &args.matrix, &cli.out)?;
            println!(
                "selected {} features: {:?}",
                summary.indices.len(),
                summary.indices
            );
            println!("wrote {}", summary.selection_path.display());
            if let Some(p) = &summary.bqm_path {
                println!("wrote {}", p.display());
            }
        }
        Command::Evaluate(args) => {
            if let Some(f) = &args.fractions {
                cfg.experiment.fractions = f
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::validation(format!("bad fraction '{s}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            if let Some(r) = args.repeats {
                cfg.experiment.n_repeats = r;
            }
            if let Some(m) = &args.methods {
                cfg.experiment.methods = m
                    .split(',')
                    .map(|s| Method::from_str(s.trim()).map_err(CliError::from))
                    .collect::<Result<Vec<_>>>()?;
            }
            if let Some(k) = args.knn_k {
                cfg.experiment.knn_k = k;
            }
            if let Some(a) = args.alpha {
                cfg.alpha = a;
            }
            if let Some(b) = args.mi_bins {
                cfg.experiment.mi_bins = b;
            }
            if let Some(t) = args.test_fraction {
                cfg.experiment.test_fraction = t;
            }
            if let Some(s) = &args.significance {
                cfg.experiment.significance = match s.as_str() {
                    "welch_t" => SignificanceTest::WelchT,
                    "mann_whitney" => SignificanceTest::MannWhitney,
                    _ => {
                        return Err(CliError::validation(
                            "significance must be 'welch_t' or 'mann_whitney'",
                        ))
                    }
                };
            }
            if let Some(s) = args.sweeps {
                cfg.schedule.sweeps = s;
            }
            if let Some(r) = args.reads {
                cfg.schedule.n_reads = r;
            }
            cfg.finalize();
            let summary = cmd_evaluate(&cfg, &args.matrix, &cli.out)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("f1 rows: {}", summary.n_f1_rows);
            for p in &summary.paths {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success, not usage errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
