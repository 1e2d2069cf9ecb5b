//! Command-line surface.
//!
//! Tables are written as CSV and scalars as `key = value` lines, either to
//! standard output or atomically to `--out`. Diagnostics only ever go to the
//! error stream. Exit codes: 0 success, 1 validation or domain error, 2 I/O
//! or parse error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fundadmin::{
    case_study_report, deflate_series, efficiency_estimate, evaluate_point_with, fit_response,
    incremental_admin_cost, optimize_ar, required_ar_for_min_psr, sweep, y_from_ar, FitKind,
    OutputWeights, ProjectCountMode, ResponseModel, RiskPreference,
};
use thiserror::Error;

use crate::config::{CalibrationKind, ConfigError, RawConfig, RunConfig};
use crate::csvio::{
    read_annual_csv, read_calibration_csv, write_report_csv, write_sweep_csv, CsvError, WriteError,
};
use crate::format::{fixed, scientific, DEFAULT_PRECISION, MAX_PRECISION};

#[derive(Debug, Parser)]
#[command(
    name = "fundadmin",
    version,
    about = "Administration-ratio model for research funding agencies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one operating point, given `--y` or `--ar`.
    Evaluate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        ar: Option<String>,
        /// Fund whole projects only.
        #[arg(long)]
        integer_projects: bool,
    },
    /// Emit PortSR against AR over a grid as CSV.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        stop: Option<String>,
        #[arg(long)]
        step: Option<String>,
    },
    /// Find the administration ratio that maximizes PortSR.
    Optimize {
        #[command(flatten)]
        model: ModelArgs,
        /// Observed administration cost, for the efficiency estimate.
        #[arg(long)]
        observed_admin_cost: Option<String>,
        /// Observed portfolio success rate, for the efficiency estimate.
        #[arg(long)]
        observed_port_sr: Option<String>,
    },
    /// Cheapest operating point guaranteeing a minimum project success rate.
    Invert {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        psr_min: Option<String>,
    },
    /// Fit a response curve to observed data.
    Calibrate {
        #[command(flatten)]
        model: ModelArgs,
        /// CSV with `y,delta_psr` or `ar,port_sr` columns.
        #[arg(long)]
        data: Option<String>,
        /// Curve family to fit: linear or saturating.
        #[arg(long)]
        fit: Option<String>,
        /// Cap of a fitted linear curve.
        #[arg(long)]
        fit_cap: Option<String>,
    },
    /// Case-study report over annual agency records.
    CaseStudy {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        base_year: i32,
        /// Print scalar summary lines instead of the per-year table.
        #[arg(long)]
        summary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        precision: Option<usize>,
    },
}

/// Shared model flags; each overrides the config key of the same meaning.
#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<String>,
    /// Significant digits in output, 1 to 17.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long = "v-p")]
    v_p: Option<String>,
    #[arg(long = "v-i")]
    v_i: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long = "psr-in")]
    psr_in: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    rdi: Option<String>,
    /// Response family: linear or saturating.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    cap: Option<String>,
    /// Treat money inputs as ZAR and convert them to USD.
    #[arg(long)]
    zar_to_usd: bool,
}

impl ModelArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = [
            ("output", &self.out),
            ("precision", &self.precision),
            ("v_p", &self.v_p),
            ("v_i", &self.v_i),
            ("b", &self.b),
            ("psr_in", &self.psr_in),
            ("domain", &self.domain),
            ("rdi", &self.rdi),
            ("response.kind", &self.kind),
            ("response.c", &self.c),
            ("response.k", &self.k),
            ("response.cap", &self.cap),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if self.zar_to_usd {
            out.push(("zar_to_usd", "true".into()));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Model(#[from] fundadmin::Error),
    #[error("{0}")]
    Missing(&'static str),
    #[error("{0}")]
    Empty(&'static str),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 2,
            Self::Config(e) => e.exit_code(),
            Self::Csv(e) => e.exit_code(),
            Self::Model(_) | Self::Missing(_) | Self::Empty(_) => 1,
        }
    }
}

/// Finished command output and where it should go.
struct Output {
    body: String,
    path: Option<PathBuf>,
    warnings: Vec<String>,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 2,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };

    let result = execute(cli.command).and_then(|out| {
        for w in &out.warnings {
            let _ = writeln!(stderr, "warning: {w}");
        }
        emit(&out, stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &out.path {
        None => stdout
            .write_all(out.body.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        Some(path) => write_atomically(path, out.body.as_bytes()),
    }
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so the target is either untouched or complete.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn load_config(
    model: &ModelArgs,
    extra: &[(&'static str, Option<&String>)],
) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&model.config).map_err(|source| CliError::Io {
        path: model.config.clone(),
        source,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    for (key, value) in model.overrides() {
        raw.set(key, value);
    }
    for (key, value) in extra {
        if let Some(v) = value {
            raw.set(key, (*v).clone());
        }
    }
    Ok(raw.validate()?)
}

fn require_response(cfg: &RunConfig) -> Result<ResponseModel<f64>, CliError> {
    cfg.response.ok_or(CliError::Missing(
        "no response model configured; set `response.kind`",
    ))
}

struct Lines {
    body: String,
    precision: usize,
}

impl Lines {
    fn new(precision: usize) -> Self {
        Self {
            body: String::new(),
            precision,
        }
    }

    fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, &fixed(value, self.precision))
    }

    fn text(&mut self, key: &str, value: &str) -> &mut Self {
        self.body.push_str(key);
        self.body.push_str(" = ");
        self.body.push_str(value);
        self.body.push('\n');
        self
    }

    fn point(&mut self, p: &fundadmin::PortfolioPoint<f64>) -> &mut Self {
        self.num("y", p.y)
            .num("ar", p.ar)
            .num("np", p.np)
            .num("psr", p.psr)
            .num("nsp", p.nsp)
            .num("port_sr", p.port_sr)
    }
}

fn execute(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Evaluate {
            model,
            y,
            ar,
            integer_projects,
        } => {
            let mut extra = vec![("evaluate.y", y.as_ref()), ("evaluate.ar", ar.as_ref())];
            let flag = integer_projects.then(|| "true".to_string());
            extra.push(("integer_projects", flag.as_ref()));
            let cfg = load_config(&model, &extra)?;
            let response = require_response(&cfg)?;
            let y = match (cfg.evaluate_y, cfg.evaluate_ar) {
                (Some(y), _) => y,
                (None, Some(ar)) => y_from_ar(&cfg.spec, ar)?,
                (None, None) => {
                    return Err(CliError::Missing(
                        "evaluate needs `evaluate.y` or `evaluate.ar` (or --y / --ar)",
                    ))
                }
            };
            let mode = if cfg.integer_projects {
                ProjectCountMode::Integer
            } else {
                ProjectCountMode::Continuous
            };
            let p = evaluate_point_with(&cfg.spec, &response, y, mode)?;
            let mut lines = Lines::new(cfg.precision);
            lines.point(&p);
            Ok(scalar_output(lines, &cfg))
        }
        Command::Sweep {
            model,
            start,
            stop,
            step,
        } => {
            let cfg = load_config(
                &model,
                &[
                    ("sweep.start", start.as_ref()),
                    ("sweep.stop", stop.as_ref()),
                    ("sweep.step", step.as_ref()),
                ],
            )?;
            let response = require_response(&cfg)?;
            let points = sweep(&cfg.spec, &response, &cfg.grid.values())?;
            let mut body = Vec::new();
            write_sweep_csv(&points, &mut body, cfg.precision).map_err(write_error)?;
            Ok(Output {
                body: String::from_utf8(body).expect("CSV is ASCII"),
                path: cfg.output.clone(),
                warnings: Vec::new(),
            })
        }
        Command::Optimize {
            model,
            observed_admin_cost,
            observed_port_sr,
        } => {
            let cfg = load_config(
                &model,
                &[
                    ("observed.admin_cost", observed_admin_cost.as_ref()),
                    ("observed.port_sr", observed_port_sr.as_ref()),
                ],
            )?;
            let response = require_response(&cfg)?;
            let opt = optimize_ar(&cfg.spec, &response)?;
            let mut lines = Lines::new(cfg.precision);
            lines
                .num("ar_opt", opt.point.ar)
                .num("y_opt", opt.point.y)
                .num("np", opt.point.np)
                .num("psr", opt.point.psr)
                .num("nsp", opt.point.nsp)
                .num("port_sr_opt", opt.point.port_sr)
                .text("boundary", opt.boundary.as_str())
                .text("evaluations", &opt.evaluations.to_string())
                .text("exceeds_typical_ar", &opt.exceeds_typical_ar.to_string());
            match (cfg.observed_admin_cost, cfg.observed_port_sr) {
                (Some(cost), Some(port_sr)) => {
                    let e = efficiency_estimate(&cfg.spec, &response, cost, port_sr)?;
                    lines
                        .num("efficiency", e.efficiency)
                        .num("frontier_y", e.frontier.y)
                        .num("frontier_ar", e.frontier.ar)
                        .num("frontier_admin_cost", e.frontier_admin_cost);
                }
                (None, None) => {}
                _ => {
                    return Err(CliError::Missing(
                        "efficiency needs both `observed.admin_cost` and `observed.port_sr`",
                    ))
                }
            }
            let mut out = scalar_output(lines, &cfg);
            if opt.exceeds_typical_ar {
                out.warnings.push(format!(
                    "optimum administration ratio {} is above {}",
                    fixed(opt.point.ar, cfg.precision),
                    fundadmin::TYPICAL_AR_CEILING
                ));
            }
            Ok(out)
        }
        Command::Invert { model, psr_min } => {
            let mode = psr_min.as_ref().map(|_| "min_psr".to_string());
            let cfg = load_config(
                &model,
                &[
                    ("risk.psr_min", psr_min.as_ref()),
                    ("risk.mode", mode.as_ref()),
                ],
            )?;
            let response = require_response(&cfg)?;
            let RiskPreference::MinPsr(target) = cfg.risk else {
                return Err(CliError::Missing(
                    "invert needs a minimum success rate; set `risk.psr_min` or --psr-min",
                ));
            };
            let p = required_ar_for_min_psr(&cfg.spec, &response, target)?;
            let mut lines = Lines::new(cfg.precision);
            lines.num("psr_min", target).point(&p);
            Ok(scalar_output(lines, &cfg))
        }
        Command::Calibrate {
            model,
            data,
            fit,
            fit_cap,
        } => {
            let cfg = load_config(
                &model,
                &[
                    ("calibrate.data", data.as_ref()),
                    ("calibrate.kind", fit.as_ref()),
                    ("calibrate.cap", fit_cap.as_ref()),
                ],
            )?;
            let path = cfg.calibration_data.clone().ok_or(CliError::Missing(
                "calibrate needs `calibrate.data` or --data",
            ))?;
            let kind = match (cfg.calibration_kind, cfg.response) {
                (Some(k), _) => k,
                (None, Some(ResponseModel::Linear { .. })) => CalibrationKind::Linear,
                (None, _) => CalibrationKind::Saturating,
            };
            let samples = read_calibration_csv(&path, &cfg.spec, cfg.money_rate())?;
            let fit_kind = match kind {
                CalibrationKind::Linear => FitKind::Linear {
                    cap: cfg.calibration_cap,
                },
                CalibrationKind::Saturating => FitKind::Saturating,
            };
            let fitted = fit_response(&samples, fit_kind)?;
            let mut lines = Lines::new(cfg.precision);
            lines.text("kind", fitted.model.kind_name());
            match fitted.model {
                ResponseModel::Linear { slope, cap } => lines.num("c", slope).num("cap", cap),
                ResponseModel::Saturating { ceiling, rate } => {
                    lines.num("c", ceiling).num("k", rate)
                }
            };
            lines
                .text("sse", &scientific(fitted.sse, cfg.precision))
                .text("samples", &fitted.samples.to_string());
            Ok(scalar_output(lines, &cfg))
        }
        Command::CaseStudy {
            data,
            base_year,
            summary,
            out,
            precision,
        } => {
            let precision = precision.unwrap_or(DEFAULT_PRECISION);
            if !(1..=MAX_PRECISION).contains(&precision) {
                return Err(ConfigError::TypeMismatch {
                    key: "precision".into(),
                    value: precision.to_string(),
                    expected: "an integer from 1 to 17",
                }
                .into());
            }
            let records = read_annual_csv(&data)?;
            if records.is_empty() {
                return Err(CliError::Empty("annual data has no rows"));
            }
            let series = if records.iter().any(|r| r.deflator.is_some()) {
                deflate_series(&records, base_year)?
            } else {
                records
            };
            let weights = OutputWeights::default();
            let rows = case_study_report(&series, &weights, base_year)?;
            let body = if summary {
                let last = rows.last().expect("non-empty report");
                let mut lines = Lines::new(precision);
                lines
                    .text("base_year", &base_year.to_string())
                    .text("first_year", &rows[0].year.to_string())
                    .text("last_year", &last.year.to_string());
                match incremental_admin_cost(&series) {
                    Ok(slope) => lines.num("incremental_admin_cost", slope),
                    Err(_) => lines.text("incremental_admin_cost", "undetermined"),
                };
                lines
                    .num(
                        "funding_per_project_index_last",
                        last.funding_per_project_index,
                    )
                    .num("admin_ratio_index_last", last.admin_ratio_index)
                    .num("composite_index_last", last.composite_index)
                    .num("roi_index_last", last.roi_index);
                lines.body
            } else {
                let mut buf = Vec::new();
                write_report_csv(&rows, &mut buf, precision).map_err(write_error)?;
                String::from_utf8(buf).expect("CSV is ASCII")
            };
            Ok(Output {
                body,
                path: out,
                warnings: Vec::new(),
            })
        }
    }
}

fn scalar_output(lines: Lines, cfg: &RunConfig) -> Output {
    Output {
        body: lines.body,
        path: cfg.output.clone(),
        warnings: Vec::new(),
    }
}

fn write_error(e: WriteError) -> CliError {
    match e {
        WriteError::Empty(what) => CliError::Empty(what),
        WriteError::Io(source) => CliError::Io {
            path: PathBuf::from("<buffer>"),
            source,
        },
    }
}
