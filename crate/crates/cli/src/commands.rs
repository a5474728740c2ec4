//! The experiments behind each subcommand. Each returns the table to write
//! plus notes for the `.meta` file; nothing here touches the filesystem.

use std::time::Instant;

use rayon::prelude::*;

use irs_sop::ao::{run_with_sink, AoResult, PointMetrics};
use irs_sop::channel::sample_channels;
use irs_sop::dinkelbach::{build_instance, ratio_pairs};
use irs_sop::lift::{build_lift, RatioObjective};
use irs_sop::linalg::herm_eig;
use irs_sop::metrics::user_metrics;
use irs_sop::montecarlo::empirical_outage;
use irs_sop::receiver::optimize_receivers;
use irs_sop::rng::{complex_normal, stream, Purpose};
use irs_sop::sdp::{solve_with, SdpInstance, SdpStatus};
use irs_sop::{CVector, PhaseShift, ReceiveMatrix};

use crate::config::{ExperimentSpec, Receivers, Scheme};
use crate::error::CliError;
use crate::output::{num, Table};

pub const MIN_VALIDATION_SAMPLES: usize = 10_000;

/// Notes for the `.meta` file.
pub type Notes = Vec<(String, String)>;

/// Human-readable warnings about a spec that is valid but unusual.
pub fn warnings(spec: &ExperimentSpec) -> Vec<String> {
    let mut out = Vec::new();
    if spec.exceeds_desk_scale() {
        out.push(format!(
            "warning: {} IRS elements exceed the sizes the solver budgets are tuned for (at most 64); runs may be slow",
            spec.max_irs_elements()
        ));
    }
    out
}

fn pool(spec: &ExperimentSpec) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(spec.thread_count())
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Incumbent of one AO run, in the units reported by `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub iterations: usize,
    pub converged: bool,
    pub initial_max_sop: f64,
    pub max_sop: f64,
    pub min_sop: f64,
    pub sinr: Vec<f64>,
    /// Relaxation bound of the round that produced the incumbent; NaN when
    /// the starting point was never beaten.
    pub sdr_bound: f64,
}

impl TrialSummary {
    pub fn from_result(result: &AoResult) -> Self {
        let trace = &result.trace;
        let (point, bound): (&PointMetrics, f64) = match trace.best_iteration {
            0 => (&trace.initial, f64::NAN),
            i => (&trace.records[i - 1].point, trace.records[i - 1].sdr_bound),
        };
        Self {
            iterations: trace.records.len(),
            converged: trace.converged,
            initial_max_sop: trace.initial.p_out,
            max_sop: point.p_out,
            min_sop: point.p_min,
            sinr: point.users.iter().map(|m| m.sinr).collect(),
            sdr_bound: bound,
        }
    }
}

/// One AO run: channels from `(seed, trial, Channels)`, starting phase and
/// randomization from `(seed, trial, Optimizer)`. Rerunning with the same
/// arguments reproduces it exactly.
pub fn run_trial(
    spec: &ExperimentSpec,
    value: Option<usize>,
    trial: u64,
    scheme: Scheme,
) -> Result<AoResult, irs_sop::Error> {
    let cfg = spec.system(value);
    cfg.validate()?;
    let chs = sample_channels(&cfg, &mut stream(spec.seed, trial, Purpose::Channels));
    let mut rng = stream(spec.seed, trial, Purpose::Optimizer);
    run_with_sink(&chs, &cfg, &spec.ao_config(scheme), &mut rng, &mut ())
}

/// Closed-form against sampled outage for a random phase and random (or
/// phase-optimal) receive vectors.
pub fn validate_sop(spec: &ExperimentSpec) -> Result<(Table, bool), CliError> {
    if spec.samples < MIN_VALIDATION_SAMPLES {
        return Err(CliError::Config(format!(
            "samples must be at least {MIN_VALIDATION_SAMPLES}, got {}",
            spec.samples
        )));
    }
    let cfg = spec.system(None);
    cfg.validate()?;
    let chs = sample_channels(&cfg, &mut stream(spec.seed, spec.trial, Purpose::Channels));
    let phi = PhaseShift::random(cfg.irs_elements, &mut stream(spec.seed, spec.trial, Purpose::Optimizer));
    let w = match spec.receivers {
        Receivers::Random => {
            let mut aux = stream(spec.seed, spec.trial, Purpose::Auxiliary);
            let w: Vec<CVector> = (0..cfg.users)
                .map(|_| CVector::new((0..cfg.bs_antennas).map(|_| complex_normal(&mut aux)).collect()))
                .collect();
            ReceiveMatrix::from_unnormalized(w)
        }
        Receivers::Optimal => optimize_receivers(&chs, &phi, &cfg).map_err(irs_sop::Error::from)?,
    };
    let metrics = user_metrics(&chs, &phi, &w, &cfg).map_err(irs_sop::Error::from)?;
    let mut eve = stream(spec.seed, spec.trial, Purpose::Eavesdropper);
    let empirical = empirical_outage(&chs, &phi, &w, &cfg, spec.samples, &mut eve).map_err(irs_sop::Error::from)?;

    let mut table = Table::new(vec![
        "user",
        "z",
        "closed_form_sop",
        "empirical_sop",
        "gap",
        "std_error",
        "threshold",
        "pass",
    ]);
    let mut all_pass = true;
    for (k, (m, &emp)) in metrics.iter().zip(&empirical).enumerate() {
        let p = m.sop;
        let se = (p * (1.0 - p) / spec.samples as f64).sqrt();
        let threshold = 3.0 * se + 0.005;
        let gap = (p - emp).abs();
        let pass = gap <= threshold;
        all_pass &= pass;
        table.push(vec![
            k.to_string(),
            num(m.z),
            num(p),
            num(emp),
            num(gap),
            num(se),
            num(threshold),
            pass.to_string(),
        ]);
    }
    Ok((table, all_pass))
}

/// Per-round trace of one AO run per selected scheme on one channel draw.
pub fn optimize(spec: &ExperimentSpec) -> Result<(Table, Notes), CliError> {
    let mut table = Table::new(vec![
        "scheme",
        "iteration",
        "max_sop",
        "min_sop",
        "incumbent_max_sop",
        "min_z",
        "min_sinr",
        "sdr_bound",
        "recovered_objective",
        "rank_one",
        "dinkelbach_steps",
        "lambda_first",
        "lambda_final",
        "dinkelbach_f",
        "dinkelbach_capped",
        "initial_max_sop",
    ]);
    let mut notes = Notes::new();
    let runs: Vec<(Scheme, Result<AoResult, irs_sop::Error>, f64)> = pool(spec)?.install(|| {
        spec.schemes
            .par_iter()
            .map(|&s| {
                let start = Instant::now();
                let r = run_trial(spec, None, spec.trial, s);
                (s, r, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    for (scheme, result, ms) in runs {
        let result = result?;
        let trace = &result.trace;
        for r in &trace.records {
            let lambdas: Vec<f64> = r.dinkelbach.iter().map(|s| s.lambda_out).collect();
            table.push(vec![
                scheme.name().to_string(),
                r.iteration.to_string(),
                num(r.point.p_out),
                num(r.point.p_min),
                num(r.incumbent_p_out),
                num(r.point.min_z),
                num(r.point.min_sinr),
                num(r.sdr_bound),
                num(r.recovered_objective),
                r.rank_one.to_string(),
                r.dinkelbach.len().to_string(),
                num(lambdas.first().copied().unwrap_or(f64::NAN)),
                num(lambdas.last().copied().unwrap_or(f64::NAN)),
                num(r.dinkelbach.last().map_or(f64::NAN, |s| s.f)),
                r.dinkelbach_capped.to_string(),
                num(trace.initial.p_out),
            ]);
        }
        notes.push((format!("converged.{}", scheme.name()), trace.converged.to_string()));
        notes.push((format!("wall_clock_ms.{}", scheme.name()), format!("{ms:.0}")));
    }
    Ok((table, notes))
}

struct Job {
    point: Option<usize>,
    trial: u64,
    scheme: Scheme,
}

struct Done {
    job: Job,
    result: Result<TrialSummary, irs_sop::Error>,
    ms: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Name of the paired-difference rows in `compare` output.
pub const PAIRED_SCHEME: &str = "mm-sinr-minus-mm-sop";

/// Every sweep value × trial × scheme, then per-value aggregates of
/// `max_sop`. With `compare`, both schemes run on the same draws and paired
/// differences (MM-SINR minus MM-SOP) are added.
///
/// Failed runs become `status = error:<category>` rows; the table is still
/// returned alongside the first failure.
pub fn sweep(spec: &ExperimentSpec, compare: bool) -> (Table, Notes, Option<CliError>) {
    let schemes = if compare {
        vec![Scheme::MmSop, Scheme::MmSinr]
    } else {
        let mut s = spec.schemes.clone();
        s.dedup();
        s
    };
    let mut header = vec![
        "record",
        "scheme",
        "axis",
        "value",
        "trial",
        "seed",
        "iterations",
        "converged",
        "max_sop",
        "min_sop",
        "sinr",
        "sdr_bound",
        "mean",
        "std",
        "count",
        "status",
    ];
    if compare {
        header.extend(["paired_diff", "paired_nonneg"]);
    }
    let mut table = Table::new(header);
    let mut notes = Notes::new();

    let jobs: Vec<Job> = spec
        .points()
        .into_iter()
        .flat_map(|point| {
            let schemes = &schemes;
            (0..spec.trials as u64)
                .flat_map(move |trial| schemes.iter().map(move |&scheme| Job { point, trial, scheme }))
        })
        .collect();
    let total = jobs.len();
    let run = |jobs: Vec<Job>| -> Vec<Done> {
        jobs.into_par_iter()
            .map(|job| {
                let start = Instant::now();
                let result = run_trial(spec, job.point, job.trial, job.scheme).map(|r| TrialSummary::from_result(&r));
                Done {
                    job,
                    result,
                    ms: start.elapsed().as_secs_f64() * 1e3,
                }
            })
            .collect()
    };
    let done = match pool(spec) {
        Ok(p) => p.install(|| run(jobs)),
        Err(e) => return (table, notes, Some(e)),
    };

    let value_cell = |p: Option<usize>| p.map_or(String::new(), |v| v.to_string());
    let axis = spec.sweep.name().to_string();
    let width = table.header.len();
    let blank = || vec![String::new(); width];
    let paired = |d: &Done| -> Option<f64> {
        let other = done
            .iter()
            .find(|o| o.job.point == d.job.point && o.job.trial == d.job.trial && o.job.scheme != d.job.scheme)?;
        let (a, b) = (d.result.as_ref().ok()?, other.result.as_ref().ok()?);
        Some(match d.job.scheme {
            Scheme::MmSinr => a.max_sop - b.max_sop,
            Scheme::MmSop => b.max_sop - a.max_sop,
        })
    };

    let mut first_error = None;
    let mut failed = 0;
    for d in &done {
        let mut row = blank();
        row[0] = "trial".into();
        row[1] = d.job.scheme.name().into();
        row[2] = axis.clone();
        row[3] = value_cell(d.job.point);
        row[4] = d.job.trial.to_string();
        row[5] = spec.seed.to_string();
        match &d.result {
            Ok(s) => {
                row[6] = s.iterations.to_string();
                row[7] = s.converged.to_string();
                row[8] = num(s.max_sop);
                row[9] = num(s.min_sop);
                row[10] = s.sinr.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";");
                row[11] = num(s.sdr_bound);
                row[15] = "ok".into();
            }
            Err(e) => {
                row[15] = format!("error:{}", e.category());
                failed += 1;
                first_error.get_or_insert_with(|| e.clone());
            }
        }
        if compare {
            row[16] = paired(d).map_or(String::new(), num);
        }
        table.push(row);
    }

    for point in spec.points() {
        for &scheme in &schemes {
            let xs: Vec<f64> = done
                .iter()
                .filter(|d| d.job.point == point && d.job.scheme == scheme)
                .filter_map(|d| d.result.as_ref().ok().map(|s| s.max_sop))
                .collect();
            table.push(aggregate_row(blank(), scheme.name(), &axis, value_cell(point), &xs));
        }
        if compare {
            let diffs: Vec<f64> = done
                .iter()
                .filter(|d| d.job.point == point && d.job.scheme == Scheme::MmSop)
                .filter_map(paired)
                .collect();
            let mut row = aggregate_row(blank(), PAIRED_SCHEME, &axis, value_cell(point), &diffs);
            row[17] = diffs.iter().filter(|&&x| x >= 0.0).count().to_string();
            table.push(row);
        }
    }

    for &scheme in &schemes {
        let ms: f64 = done.iter().filter(|d| d.job.scheme == scheme).map(|d| d.ms).sum();
        notes.push((format!("wall_clock_ms.{}", scheme.name()), format!("{ms:.0}")));
    }
    notes.push(("runs".into(), total.to_string()));
    notes.push(("failed_runs".into(), failed.to_string()));
    let err = first_error.map(|first| CliError::Runs { failed, total, first });
    (table, notes, err)
}

fn aggregate_row(mut row: Vec<String>, scheme: &str, axis: &str, value: String, xs: &[f64]) -> Vec<String> {
    row[0] = "aggregate".into();
    row[1] = scheme.into();
    row[2] = axis.into();
    row[3] = value;
    row[14] = xs.len().to_string();
    if xs.is_empty() {
        row[15] = "error:no-runs".into();
    } else {
        let (mean, std) = mean_std(xs);
        row[12] = num(mean);
        row[13] = num(std);
        row[15] = "ok".into();
    }
    row
}

/// The first parametric subproblem an AO run with `scheme` would solve at
/// `lambda`: starting phase, its optimal receivers, then the lift.
pub fn dump_sdp(spec: &ExperimentSpec, scheme: Scheme, lambda: f64) -> Result<SdpInstance, CliError> {
    let cfg = spec.system(None);
    cfg.validate()?;
    let chs = sample_channels(&cfg, &mut stream(spec.seed, spec.trial, Purpose::Channels));
    let phase = PhaseShift::random(cfg.irs_elements, &mut stream(spec.seed, spec.trial, Purpose::Optimizer));
    let w = optimize_receivers(&chs, &phase, &cfg).map_err(irs_sop::Error::from)?;
    let lp = build_lift(&chs, &w, &cfg).map_err(irs_sop::Error::from)?;
    let objective = match scheme {
        Scheme::MmSop => RatioObjective::SecrecyOutage,
        Scheme::MmSinr => RatioObjective::Sinr,
    };
    Ok(build_instance(&ratio_pairs(&lp, objective), lambda).map_err(irs_sop::Error::from)?)
}

/// Solves one instance and reports the solution quality.
pub fn solve_sdp(spec: &ExperimentSpec, inst: &SdpInstance) -> Result<Table, CliError> {
    let settings = spec.ao_config(Scheme::MmSop).dinkelbach.sdp;
    let sol = solve_with(inst, &settings, None).map_err(irs_sop::Error::from)?;
    let q = &sol.q;
    let diag_dev = (0..q.rows()).map(|i| (q[(i, i)] - 1.0).norm()).fold(0.0, f64::max);
    let min_eig = herm_eig(q).map_err(irs_sop::Error::from)?.values[0];
    let violation = (0..inst.constraints())
        .map(|k| sol.u - (inst.a(k) + inst.c(k).frobenius_inner(q)))
        .fold(0.0, f64::max);
    let mut table = Table::new(vec![
        "dim",
        "constraints",
        "status",
        "u",
        "upper_bound",
        "iterations",
        "diag_deviation",
        "min_eigenvalue",
        "constraint_violation",
    ]);
    let status = match sol.status {
        SdpStatus::Optimal => "optimal",
        SdpStatus::MaxIterations => "max-iterations",
        SdpStatus::Infeasible => "infeasible",
    };
    table.push(vec![
        inst.dim().to_string(),
        inst.constraints().to_string(),
        status.into(),
        num(sol.u),
        num(sol.upper_bound.unwrap_or(f64::NAN)),
        sol.iterations.to_string(),
        num(diag_dev),
        num(min_eig),
        num(violation),
    ]);
    Ok(table)
}
