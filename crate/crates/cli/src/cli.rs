//! Argument parsing and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{ExperimentSpec, Scheme};
use crate::error::CliError;
use crate::output::{meta_text, resolve_output, write_meta, Table};
use crate::sdpfile;

#[derive(Debug, Parser)]
#[command(
    name = "irs-sop",
    version,
    about = "Worst-user secrecy outage experiments with an IRS-aided uplink"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Configuration sources, applied in order: built-in defaults, `--config`,
/// `--set`, then the dedicated flags.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all available).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (default: a per-command name in $IRS_SOP_OUTPUT_DIR or the
    /// working directory).
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the closed-form outage with sampled eavesdropper channels.
    ValidateSop {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Per-round trace of one AO run per scheme.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Channel draw to use.
        #[arg(long)]
        trial: Option<u64>,
    },
    /// Every sweep value × trial × scheme, plus per-value aggregates.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Sweep with both schemes on paired draws and their differences.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Write the first parametric SDP of an AO run in text form.
    DumpSdp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mm-sop")]
        scheme: Scheme,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Solve an SDP instance file and report solution quality.
    SolveSdp {
        #[command(flatten)]
        common: Common,
        instance: PathBuf,
    },
}

fn resolve(common: &Common, extra: &[(&str, Option<String>)]) -> Result<ExperimentSpec, CliError> {
    let mut spec = ExperimentSpec::default();
    if let Some(path) = &common.config {
        spec.apply_file(path)?;
    }
    for a in &common.set {
        spec.apply_assignment(a)?;
    }
    let flags = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("threads", common.threads.map(|v| v.to_string())),
    ];
    for (key, value) in flags.iter().chain(extra) {
        if let Some(v) = value {
            spec.set(key, v).map_err(CliError::Config)?;
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn finish(table: &Table, path: &Path, meta: String) -> Result<Vec<PathBuf>, CliError> {
    table.write(path)?;
    let meta = write_meta(path, &meta)?;
    Ok(vec![path.to_path_buf(), meta])
}

/// Runs one command; returns the files written. Warnings go to stderr.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::ValidateSop { common, samples } => {
            let spec = resolve(&common, &[("samples", samples.map(|v| v.to_string()))])?;
            let path = resolve_output(common.output.as_deref(), "validate-sop.csv");
            let (table, pass) = commands::validate_sop(&spec)?;
            let files = finish(
                &table,
                &path,
                meta_text("validate-sop", &spec, &[("pass".into(), pass.to_string())]),
            )?;
            if !pass {
                return Err(CliError::Validation(format!(
                    "closed-form and sampled outage disagree beyond 3 standard errors + 0.005, see {}",
                    path.display()
                )));
            }
            Ok(files)
        }
        Command::Optimize { common, trial } => {
            let spec = resolve(&common, &[("trial", trial.map(|v| v.to_string()))])?;
            warn(&spec);
            let path = resolve_output(common.output.as_deref(), "optimize.csv");
            let (table, notes) = commands::optimize(&spec)?;
            finish(&table, &path, meta_text("optimize", &spec, &notes))
        }
        Command::Sweep { common, trials } => sweep(&common, trials, false),
        Command::Compare { common, trials } => sweep(&common, trials, true),
        Command::DumpSdp { common, scheme, lambda } => {
            let spec = resolve(&common, &[])?;
            let path = resolve_output(common.output.as_deref(), "instance.sdp");
            let inst = commands::dump_sdp(&spec, scheme, lambda)?;
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(&path, sdpfile::to_text(&inst)).map_err(|e| CliError::io(&path, e))?;
            let notes = vec![
                ("scheme".into(), scheme.name().into()),
                ("lambda".into(), lambda.to_string()),
            ];
            let meta = write_meta(&path, &meta_text("dump-sdp", &spec, &notes))?;
            Ok(vec![path, meta])
        }
        Command::SolveSdp { common, instance } => {
            let spec = resolve(&common, &[])?;
            let inst = sdpfile::load(&instance)?;
            let path = resolve_output(common.output.as_deref(), "solve-sdp.csv");
            let table = commands::solve_sdp(&spec, &inst)?;
            let notes = vec![("instance".into(), instance.display().to_string())];
            finish(&table, &path, meta_text("solve-sdp", &spec, &notes))
        }
    }
}

fn warn(spec: &ExperimentSpec) {
    for w in commands::warnings(spec) {
        eprintln!("{w}");
    }
}

fn sweep(common: &Common, trials: Option<usize>, compare: bool) -> Result<Vec<PathBuf>, CliError> {
    let spec = resolve(common, &[("trials", trials.map(|v| v.to_string()))])?;
    warn(&spec);
    let name = if compare { "compare" } else { "sweep" };
    let path = resolve_output(common.output.as_deref(), &format!("{name}.csv"));
    let (table, notes, err) = commands::sweep(&spec, compare);
    // partial results are written before the failure is reported
    let files = finish(&table, &path, meta_text(name, &spec, &notes))?;
    match err {
        Some(e) => Err(e),
        None => Ok(files),
    }
}
