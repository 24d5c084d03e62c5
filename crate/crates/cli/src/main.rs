//! `metametrics` command-line tool.
//!
//! Exit codes: 0 success, 1 a gate verdict failed (`gates` only), 2 usage
//! error, 3 invalid input data.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use metametrics::history::HistorySet;
use metametrics::ingest::{self, IngestError, LoadOptions};
use metametrics::metrics::{compute_reports, SpreadMode, Indicator, MetricsError, ReportOptions};
use metametrics::report::{
    self, evaluate_gates, render_heatmap_csv, render_report, GatePolicy, MetricSelector, Overall,
    ReportFormat,
};
use metametrics::synth::{self, GeneratorConfig};

#[derive(Parser)]
#[command(name = "metametrics", version, about = "Meta-metrics over per-revision test results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// History file (JSON Lines). Repeat to pool several files.
    #[arg(long = "input", required = true, value_name = "FILE")]
    inputs: Vec<PathBuf>,
    /// Ignore unknown keys.
    #[arg(long)]
    lenient: bool,
    /// Remap increasing revision numbers to 1..N per artifact.
    #[arg(long)]
    renumber: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check history files.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        /// Report every invalid line instead of stopping at the first.
        #[arg(long)]
        collect_errors: bool,
    },
    /// Compute base figures and Q-metrics at the given gates.
    Compute {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "gate", required = true, value_name = "N")]
        gates: Vec<usize>,
        #[arg(long = "indicator", value_name = "NAME")]
        indicators: Vec<Indicator>,
        #[arg(long = "situation", value_name = "ID")]
        situations: Vec<String>,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        /// Sum acting-time deviations over every revision, failures as 0.
        #[arg(long)]
        strict_eq7: bool,
        /// Add the current time to the report.
        #[arg(long)]
        stamp: bool,
    },
    /// Evaluate a gate policy; exits with 1 if any verdict fails.
    Gates {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_name = "FILE")]
        policy: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        #[arg(long)]
        strict_eq7: bool,
        #[arg(long)]
        stamp: bool,
    },
    /// Write a min-max normalized heatmap CSV across artifacts.
    Heatmap {
        #[command(flatten)]
        input: InputArgs,
        /// Gates; the heatmap is taken at the last one.
        #[arg(long = "gate", required = true, value_name = "N")]
        gates: Vec<usize>,
        #[arg(long = "metric", required = true, value_name = "SELECTOR")]
        metrics: Vec<MetricSelector>,
        /// Output file, `-` for standard output.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict_eq7: bool,
    },
    /// Generate a synthetic history set from a JSON config.
    Generate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the 892-revision CCS reference history.
    Fixture {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("invalid input:\n{}", .0.join("\n"))]
    DataMany(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::DataMany(_) => 3,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn load(input: &InputArgs, collect_errors: bool) -> Result<HistorySet, CliError> {
    let options = LoadOptions {
        lenient: input.lenient,
        renumber: input.renumber,
        collect_errors,
    };
    ingest::load_history_files(&input.inputs, &options).map_err(|e| {
        let prefix = match &e {
            IngestError::InFile { path, .. } => format!("{}: ", path.display()),
            _ if input.inputs.len() == 1 => format!("{}: ", input.inputs[0].display()),
            _ => String::new(),
        };
        let all = e.errors();
        if all.len() > 1 {
            CliError::DataMany(all.iter().map(|e| format!("{prefix}{e}")).collect())
        } else {
            CliError::Data(format!("{prefix}{}", all[0]))
        }
    })
}

fn spread_mode(strict: bool) -> SpreadMode {
    if strict {
        SpreadMode::Strict
    } else {
        SpreadMode::PassesOnly
    }
}

fn stamp(enabled: bool) -> Option<u64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or_default()
    })
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    if path == Path::new("-") {
        return emit(text);
    }
    fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn emit(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(data)
}

fn check_gates(gates: &[usize]) -> Result<(), CliError> {
    if gates.contains(&0) {
        return Err(CliError::Usage("gates are revision numbers >= 1".into()));
    }
    if gates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage("gates must be strictly increasing".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Validate {
            input,
            collect_errors,
        } => {
            let set = load(&input, collect_errors)?;
            let mut text = String::new();
            for h in &set {
                text.push_str(&format!("{}\t{} revisions\n", h.artifact(), h.len()));
            }
            text.push_str(&format!(
                "ok: {} artifacts, {} records\n",
                set.len(),
                set.record_count()
            ));
            emit(&text)?;
        }
        Command::Compute {
            input,
            gates,
            indicators,
            situations,
            format,
            strict_eq7,
            stamp: stamped,
        } => {
            check_gates(&gates)?;
            let set = load(&input, false)?;
            let options = ReportOptions {
                indicators,
                situations,
                spread: spread_mode(strict_eq7),
            };
            let reports = compute_reports(&set, &gates, &options).map_err(|(artifact, e)| match e {
                MetricsError::OutOfRange { n, len } => CliError::Usage(format!(
                    "gate {n} out of range for artifact {artifact}: history has {len} revisions"
                )),
                other => CliError::Usage(format!("artifact {artifact}: {other}")),
            })?;
            emit(&render_report(&reports, &[], format, stamp(stamped)).map_err(data)?)?;
        }
        Command::Gates {
            input,
            policy,
            format,
            strict_eq7,
            stamp: stamped,
        } => {
            let text = fs::read_to_string(&policy)
                .map_err(|e| CliError::Usage(format!("{}: {e}", policy.display())))?;
            let policy = GatePolicy::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", policy.display())))?;
            let set = load(&input, false)?;
            let reports = report::reports_for_policy(&set, &policy, spread_mode(strict_eq7));
            let verdicts = evaluate_gates(&reports, &policy).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(&render_report(&reports, &verdicts, format, stamp(stamped)).map_err(data)?)?;
            if verdicts.iter().any(|v| v.overall == Overall::Fail) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Heatmap {
            input,
            gates,
            metrics,
            out,
            strict_eq7,
        } => {
            check_gates(&gates)?;
            let set = load(&input, false)?;
            let mut options = ReportOptions {
                spread: spread_mode(strict_eq7),
                ..Default::default()
            };
            for m in &metrics {
                match m {
                    MetricSelector::Q4(ind) if !options.indicators.contains(ind) => {
                        options.indicators.push(*ind)
                    }
                    MetricSelector::Q6(s) if !options.situations.contains(s) => {
                        options.situations.push(s.clone())
                    }
                    _ => {}
                }
            }
            let reports = report::clipped_reports(&set, &gates, &options);
            let gate = *gates.last().expect("clap requires a gate");
            let csv = render_heatmap_csv(&reports, &metrics, gate).map_err(data)?;
            write_out(&out, &csv)?;
        }
        Command::Generate { config, out } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| data(format!("{}: {e}", config.display())))?;
            let config: GeneratorConfig = serde_json::from_str(&text)
                .map_err(|e| data(format!("{}: {e}", config.display())))?;
            let set = synth::generate(&config).map_err(data)?;
            write_set(&set, &out)?;
        }
        Command::Fixture { out } => write_set(&synth::ccs_fixture_set(), &out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn write_set(set: &HistorySet, out: &Path) -> Result<(), CliError> {
    if out == Path::new("-") {
        return emit(&ingest::to_string(set));
    }
    let file = File::create(out).map_err(|e| data(format!("{}: {e}", out.display())))?;
    ingest::write_history_set(set, BufWriter::new(file))
        .map_err(|e| data(format!("{}: {e}", out.display())))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("METAMETRICS_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        CliError::Usage(format!("METAMETRICS_THREADS must be a number, got {value:?}"))
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
