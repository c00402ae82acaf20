//! The `cumdiff` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or validation
//! errors (including a failed equivalence check).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aggregate::{aggregate_ties, AggregatedDataset};
use crate::cumulative::{baseline_curve, cumulative_differences, equivalence_report};
use crate::data::{parse_records, validate_and_sort, ColumnSpec, Mode, ValidatedDataset};
use crate::error::{Error, Result};
use crate::experiment::{null_calibration_experiment, uniformity, Uniformity};
use crate::null::{calibration_null, subpopulation_null, FullPopulationReference, NullModel};
use crate::report::{emit_json, emit_svg, emit_svg_with_baseline, AnalysisReport};
use crate::summary::summarize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Largest boundary discrepancy `check-equivalence` accepts.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "cumdiff",
    version,
    about = "Cumulative-difference statistics for data with tied scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test calibration of predicted probabilities against binary or [0,1] outcomes.
    Calib {
        data: PathBuf,
        #[command(flatten)]
        columns: Columns,
        #[command(flatten)]
        output: Output,
    },
    /// Test a subpopulation against the full population.
    Subpop {
        data: PathBuf,
        /// Full-population data with the same columns.
        #[arg(long)]
        full: PathBuf,
        #[command(flatten)]
        columns: Columns,
        #[command(flatten)]
        output: Output,
    },
    /// Check that the aggregated curve matches randomly tie-broken baselines.
    CheckEquivalence {
        data: PathBuf,
        #[arg(long, value_enum, default_value = "calibration")]
        mode: ModeArg,
        /// Full-population data (subpopulation mode only).
        #[arg(long)]
        full: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        seeds: Vec<u64>,
        #[command(flatten)]
        columns: Columns,
    },
    /// Null-calibration experiment: resimulate calibrated responses for the
    /// data's scores and weights and summarize the Monte Carlo P-values.
    Simulate {
        data: PathBuf,
        #[arg(long, default_value_t = 1000)]
        replicates: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        columns: Columns,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Calibration,
    Subpopulation,
}

#[derive(Debug, Args)]
struct Columns {
    #[arg(long, default_value = "score")]
    score_col: String,
    #[arg(long, default_value = "response")]
    response_col: String,
    /// Weight column; every weight is 1 without it.
    #[arg(long)]
    weight_col: Option<String>,
}

impl Columns {
    fn spec(&self) -> ColumnSpec {
        ColumnSpec::new(&self.score_col, &self.response_col, self.weight_col.clone())
    }
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials for the simulated P-values.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Write the JSON report here (stdout when neither --json nor --svg is given).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    /// Overlay the per-record randomly tie-broken curve on the SVG.
    #[arg(long)]
    show_baseline: bool,
}

/// Runs the CLI with process stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(path: &Path, columns: &Columns, mode: Mode) -> Result<ValidatedDataset> {
    let records = parse_records(&read(path)?, &columns.spec())?;
    validate_and_sort(records, mode)
}

fn build_null(
    agg: &AggregatedDataset,
    full: Option<&ValidatedDataset>,
    err: &mut dyn Write,
) -> Result<NullModel> {
    let null = match full {
        None => calibration_null(agg),
        Some(full) => subpopulation_null(agg, &FullPopulationReference::new(full.clone()))?,
    };
    for w in null.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(null)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Calib {
            data,
            columns,
            output,
        } => {
            let dataset = load(&data, &columns, Mode::Calibration)?;
            analyze(
                &dataset,
                None,
                vec![data.display().to_string()],
                &output,
                out,
                err,
            )
        }
        Command::Subpop {
            data,
            full,
            columns,
            output,
        } => {
            let dataset = load(&data, &columns, Mode::Subpopulation)?;
            let population = load(&full, &columns, Mode::Subpopulation)?;
            let inputs = vec![data.display().to_string(), full.display().to_string()];
            analyze(&dataset, Some(&population), inputs, &output, out, err)
        }
        Command::CheckEquivalence {
            data,
            mode,
            full,
            seeds,
            columns,
        } => {
            let population = match (mode, full) {
                (ModeArg::Subpopulation, Some(full)) => {
                    Some(load(&full, &columns, Mode::Subpopulation)?)
                }
                (ModeArg::Subpopulation, None) => {
                    return Err(Error::InvalidArgument(
                        "subpopulation mode needs --full".into(),
                    ))
                }
                (ModeArg::Calibration, Some(_)) => {
                    return Err(Error::InvalidArgument(
                        "--full only applies to subpopulation mode".into(),
                    ))
                }
                (ModeArg::Calibration, None) => None,
            };
            let mode = match mode {
                ModeArg::Calibration => Mode::Calibration,
                ModeArg::Subpopulation => Mode::Subpopulation,
            };
            let dataset = load(&data, &columns, mode)?;
            let agg = aggregate_ties(&dataset);
            let null = build_null(&agg, population.as_ref(), err)?;
            let curve = cumulative_differences(&agg, &null)?;
            let mut worst: f64 = 0.0;
            for seed in seeds {
                let baseline = baseline_curve(&dataset, &agg, &null, seed)?;
                let d = equivalence_report(&curve, &baseline)?;
                let _ = writeln!(out, "seed {seed}: max |B - C| = {d:e}");
                worst = worst.max(d);
            }
            let _ = writeln!(out, "maximal discrepancy: {worst:e}");
            if worst <= EQUIVALENCE_TOLERANCE {
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(err, "error: discrepancy exceeds {EQUIVALENCE_TOLERANCE:e}");
                Ok(EXIT_DATA)
            }
        }
        Command::Simulate {
            data,
            replicates,
            trials,
            seed,
            json,
            columns,
        } => {
            if replicates == 0 {
                return Err(Error::InvalidArgument(
                    "--replicates must be at least 1".into(),
                ));
            }
            let dataset = load(&data, &columns, Mode::Calibration)?;
            let result = null_calibration_experiment(&dataset, replicates, trials, seed)?;
            let summary = SimulationSummary {
                replicates,
                trials,
                seed,
                max_abs: uniformity(&result.pvalues_max_abs).into(),
                range: uniformity(&result.pvalues_range).into(),
            };
            let mut bytes = serde_json::to_vec_pretty(&summary)?;
            bytes.push(b'\n');
            match json {
                Some(path) => write(&path, &bytes)?,
                None => {
                    let _ = out.write_all(&bytes);
                }
            }
            Ok(EXIT_OK)
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    replicates: u64,
    trials: u64,
    seed: u64,
    max_abs: UniformitySummary,
    range: UniformitySummary,
}

#[derive(Debug, Serialize)]
struct UniformitySummary {
    mean: f64,
    decile_cdf: [f64; 9],
    max_decile_error: f64,
}

impl From<Uniformity> for UniformitySummary {
    fn from(u: Uniformity) -> Self {
        Self {
            mean: u.mean,
            decile_cdf: u.decile_cdf,
            max_decile_error: u.max_decile_error,
        }
    }
}

fn analyze(
    dataset: &ValidatedDataset,
    full: Option<&ValidatedDataset>,
    inputs: Vec<String>,
    output: &Output,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let agg = aggregate_ties(dataset);
    let null = build_null(&agg, full, err)?;
    let curve = cumulative_differences(&agg, &null)?;
    let summary = summarize(&curve, &agg, &null, output.trials, output.seed)?;
    let report = AnalysisReport::new(dataset.mode(), &agg, &curve, summary, inputs);

    if let Some(path) = &output.svg {
        let svg = if output.show_baseline {
            let baseline = baseline_curve(dataset, &agg, &null, output.seed)?;
            emit_svg_with_baseline(&report, &baseline, output.width, output.height)?
        } else {
            emit_svg(&report, output.width, output.height)?
        };
        write(path, &svg)?;
    }
    let json = emit_json(&report);
    match &output.json {
        Some(path) => write(path, &json)?,
        None if output.svg.is_none() => {
            let _ = out.write_all(&json);
        }
        None => {}
    }
    if output.json.is_some() || output.svg.is_some() {
        let s = &report.statistics;
        let _ = writeln!(
            out,
            "{} groups from {} records: max_abs {:.6} (p asym {:.4}, p mc {:.4}), range {:.6} (p mc {:.4})",
            report.n_groups,
            report.n_records,
            s.max_abs,
            s.p_max_abs_asymptotic,
            s.p_max_abs_mc,
            s.range,
            s.p_range_mc
        );
    }
    Ok(EXIT_OK)
}
