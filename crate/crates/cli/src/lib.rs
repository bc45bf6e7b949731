//! `jjsim` command-line driver.
//!
//! Resolves a flat configuration (file, then flags), runs one experiment and
//! writes `<out>.csv` (or `<out>.json`) plus `<out>.summary.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde_json::{json, Value};

pub use config::{Experiment, Settings};
pub use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "jjsim", version, about = "Josephson junction dynamics experiments")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Flat JSON file of configuration keys.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Tunneling strength alpha >= 0.
    #[arg(long, value_name = "A", allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Reduced bias current.
    #[arg(long = "i-tot", value_name = "I", allow_hyphen_values = true)]
    pub i_tot: Option<String>,
    /// Equilibrium voltage to start from.
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub v0: Option<String>,
    /// Perturbation of i_S.
    #[arg(long = "delta-is", value_name = "D", allow_hyphen_values = true)]
    pub delta_is: Option<String>,
    /// Integration horizon.
    #[arg(long = "tau-max", value_name = "T")]
    pub tau_max: Option<String>,
    /// Output sampling interval.
    #[arg(long = "dt-out", value_name = "DT")]
    pub dt_out: Option<String>,
    /// Relative tolerance [default: 1e-9].
    #[arg(long, value_name = "R")]
    pub rtol: Option<String>,
    /// Absolute tolerance [default: 1e-9].
    #[arg(long, value_name = "A")]
    pub atol: Option<String>,
    /// adaptive | rk4
    #[arg(long, value_name = "METHOD")]
    pub method: Option<String>,
    /// Output path prefix.
    #[arg(long, value_name = "PATH")]
    pub out: Option<String>,
    /// csv | json
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Any other configuration key, e.g. `--set omega_f=25`.
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    pub set: Vec<String>,
}

impl Cli {
    /// Builds settings: file values first, flags on top.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::new(self.experiment);
        if let Some(path) = &self.config {
            s.load_file(path)?;
        }
        let flags = [
            ("alpha", &self.alpha),
            ("i_tot", &self.i_tot),
            ("v0", &self.v0),
            ("delta_is", &self.delta_is),
            ("tau_max", &self.tau_max),
            ("dt_out", &self.dt_out),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("method", &self.method),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set_str(k, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::invalid("--set", format!("expected KEY=VALUE, got {kv:?}")))?;
            s.set_str(k.trim(), v)?;
        }
        s.validate()?;
        Ok(s)
    }
}

pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = Cli::command()
        .after_long_help(config::key_help())
        .after_help("Run with --help for the list of configuration keys and defaults.")
        .try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Worker count from `JJSIM_THREADS`, if set.
pub fn thread_cap(raw: Option<&str>) -> Result<Option<usize>, CliError> {
    match raw {
        None => Ok(None),
        Some(r) => match r.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::invalid("JJSIM_THREADS", format!("must be a positive integer, got {r:?}"))),
        },
    }
}

/// Runs the experiment and writes every artifact; returns the exit code.
pub fn execute(mut settings: Settings, threads: Option<usize>) -> i32 {
    let started = Instant::now();
    let out = PathBuf::from(settings.text_or("out", settings.experiment.name()));
    let format = settings.text_or("format", "csv");

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| experiments::run(&mut settings)),
        Err(e) => Err(CliError::invalid("JJSIM_THREADS", e.to_string())),
    };

    let mut summary = json!({
        "experiment": settings.experiment.name(),
        "parameters": Value::Object(settings.parameters()),
    });
    let code = match result {
        Ok(report) => match write_data(&out, &format, &report.table) {
            Ok(data_path) => {
                summary["status"] = json!("ok");
                summary["derived"] = Value::Object(report.derived);
                summary["columns"] = report.table.units();
                summary["rows"] = json!(report.table.rows.len());
                summary["data"] = json!(data_path.display().to_string());
                if let Some((cfg, stats)) = report.integrator {
                    summary["integrator"] = json!({
                        "method": experiments::method_name(&cfg),
                        "config": cfg,
                        "accepted": stats.accepted,
                        "rejected": stats.rejected,
                        "evaluations": stats.evaluations,
                    });
                }
                0
            }
            Err(e) => fail(&mut summary, &e),
        },
        Err(e) => fail(&mut summary, &e),
    };
    summary["exit_code"] = json!(code);
    summary["wall_clock_s"] = json!(started.elapsed().as_secs_f64());
    if let Err(e) = output::write_json(&output::with_suffix(&out, "summary.json"), &summary) {
        eprintln!("jjsim: {e}");
        return if code == 0 { e.exit_code() } else { code };
    }
    code
}

fn fail(summary: &mut Value, e: &CliError) -> i32 {
    eprintln!("jjsim: {e}");
    summary["status"] = json!("error");
    summary["error"] = json!(e.to_string());
    e.exit_code()
}

fn write_data(out: &Path, format: &str, table: &output::Table) -> Result<PathBuf, CliError> {
    if format == "json" {
        let path = output::with_suffix(out, "json");
        output::write_json(&path, &output::table_json(table))?;
        Ok(path)
    } else {
        let path = output::with_suffix(out, "csv");
        output::write_csv(&path, table)?;
        Ok(path)
    }
}

/// Full command-line entry point.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let settings = match cli.settings() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("jjsim: {e}");
            return e.exit_code();
        }
    };
    let threads = match thread_cap(std::env::var("JJSIM_THREADS").ok().as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("jjsim: {e}");
            return e.exit_code();
        }
    };
    execute(settings, threads)
}
