//! Alternating optimization of receivers and IRS phases.
//!
//! Each round computes the optimal receivers for the current phase, solves
//! the relaxed phase subproblem for those receivers (Dinkelbach + SDP),
//! recovers a unit-modulus phase, and evaluates the worst-user SOP
//! `P_out = max_k SOP_k`. The loop stops once `|P_out(i) − P_out(i−1)| ≤ ξ`
//! (with `P_out(0)` the value at the random starting point) or after
//! `iter_max` rounds. Phase recovery is randomized, so `P_out` need not fall
//! monotonically; the best point seen is kept as the incumbent.

use alloc::vec::Vec;

use crate::channel::{effective_channels, ChannelSet, PhaseShift, SystemConfig};
use crate::dinkelbach::{dinkelbach_solve, DinkelbachError, DinkelbachSettings, DinkelbachStep};
use crate::error::Error;
use crate::lift::{build_lift, recover_phase_for, sdr_bound, RatioObjective, DEFAULT_RANDOMIZATION_SAMPLES};
use crate::metrics::{user_metrics_with, UserMetrics};
use crate::receiver::{optimize_receivers, ReceiveMatrix};

pub const DEFAULT_XI: f64 = 1e-4;
pub const DEFAULT_ITER_MAX: usize = 20;

/// Which scheme the phase subproblem serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Minimize the maximum SOP (maximize `min_k z_k`).
    MmSop,
    /// Maximize the minimum SINR.
    MmSinr,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MmSop => "mm-sop",
            Objective::MmSinr => "mm-sinr",
        }
    }

    fn ratio(self) -> RatioObjective {
        match self {
            Objective::MmSop => RatioObjective::SecrecyOutage,
            Objective::MmSinr => RatioObjective::Sinr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoConfig {
    /// Convergence threshold on the change of the tracked quantity.
    pub xi: f64,
    pub iter_max: usize,
    pub dinkelbach: DinkelbachSettings,
    /// Gaussian randomization draws per phase recovery.
    pub randomization_samples: usize,
    pub objective: Objective,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            xi: DEFAULT_XI,
            iter_max: DEFAULT_ITER_MAX,
            dinkelbach: DinkelbachSettings::default(),
            randomization_samples: DEFAULT_RANDOMIZATION_SAMPLES,
            objective: Objective::MmSop,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.xi > 0.0) {
            return Err(Error::Setting("xi must be positive"));
        }
        if self.iter_max == 0 {
            return Err(Error::Setting("iter_max must be at least 1"));
        }
        if !(self.dinkelbach.tau > 0.0) {
            return Err(Error::Setting("tau must be positive"));
        }
        if self.dinkelbach.max_outer == 0 || self.dinkelbach.sdp.max_iter == 0 {
            return Err(Error::Setting("iteration limits must be at least 1"));
        }
        Ok(())
    }
}

/// Worst/best-user summary of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub users: Vec<UserMetrics>,
    /// `max_k SOP_k`.
    pub p_out: f64,
    /// `min_k SOP_k`.
    pub p_min: f64,
    pub min_z: f64,
    pub min_sinr: f64,
}

impl PointMetrics {
    fn new(users: Vec<UserMetrics>) -> Self {
        let fold =
            |f: fn(&UserMetrics) -> f64, init: f64, pick: fn(f64, f64) -> f64| users.iter().map(f).fold(init, pick);
        Self {
            p_out: fold(|m| m.sop, f64::NEG_INFINITY, f64::max),
            p_min: fold(|m| m.sop, f64::INFINITY, f64::min),
            min_z: fold(|m| m.z, f64::INFINITY, f64::min),
            min_sinr: fold(|m| m.sinr, f64::INFINITY, f64::min),
            users,
        }
    }

    fn score(&self, objective: Objective) -> f64 {
        match objective {
            Objective::MmSop => self.min_z,
            Objective::MmSinr => self.min_sinr,
        }
    }
}

/// One AO round.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based round index.
    pub iteration: usize,
    pub point: PointMetrics,
    pub dinkelbach: Vec<DinkelbachStep>,
    /// Dinkelbach hit its outer-iteration cap; its best state was used.
    pub dinkelbach_capped: bool,
    /// Relaxation value `min_k N_k(Q*)/D_k(Q*)`.
    pub sdr_bound: f64,
    /// The same ratio at the recovered phase (never above `sdr_bound`).
    pub recovered_objective: f64,
    pub rank_one: bool,
    /// `P_out` of the incumbent after this round.
    pub incumbent_p_out: f64,
    /// Wall-clock seconds for the round (zero without `std`).
    pub duration_secs: f64,
}

impl IterationRecord {
    pub fn p_out(&self) -> f64 {
        self.point.p_out
    }
}

/// Receives records as the loop produces them.
pub trait TraceSink {
    fn record(&mut self, record: &IterationRecord);
}

impl TraceSink for () {
    fn record(&mut self, _: &IterationRecord) {}
}

impl TraceSink for Vec<IterationRecord> {
    fn record(&mut self, record: &IterationRecord) {
        self.push(record.clone());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoTrace {
    pub objective: Objective,
    /// Metrics at the random starting phase with its optimal receivers.
    pub initial: PointMetrics,
    pub records: Vec<IterationRecord>,
    /// Stopped on the ξ rule rather than the iteration cap.
    pub converged: bool,
    /// Round of the incumbent (0 = starting point).
    pub best_iteration: usize,
}

impl AoTrace {
    /// `P_out` after round `i` (0 = start), carrying the last value forward
    /// past the final round.
    pub fn p_out_at(&self, i: usize) -> f64 {
        if i == 0 || self.records.is_empty() {
            return self.initial.p_out;
        }
        self.records[(i - 1).min(self.records.len() - 1)].point.p_out
    }

    pub fn incumbent_p_out(&self) -> f64 {
        self.records.last().map_or(self.initial.p_out, |r| r.incumbent_p_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoResult {
    pub phase: PhaseShift,
    pub receivers: ReceiveMatrix,
    pub trace: AoTrace,
}

fn evaluate(chs: &ChannelSet, phi: &PhaseShift, w: &ReceiveMatrix, cfg: &SystemConfig) -> Result<PointMetrics, Error> {
    let effective = effective_channels(chs, phi)?;
    Ok(PointMetrics::new(user_metrics_with(chs, &effective, w, cfg)))
}

#[cfg(feature = "std")]
struct Clock(std::time::Instant);

#[cfg(feature = "std")]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }

    fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(not(feature = "std"))]
struct Clock;

#[cfg(not(feature = "std"))]
impl Clock {
    fn start() -> Self {
        Clock
    }

    fn secs(&self) -> f64 {
        0.0
    }
}

/// Min-max SOP alternating optimization.
pub fn run_ao<R: rand::Rng + ?Sized>(
    chs: &ChannelSet,
    cfg: &SystemConfig,
    ao_cfg: &AoConfig,
    rng: &mut R,
) -> Result<AoResult, Error> {
    let ao_cfg = AoConfig {
        objective: Objective::MmSop,
        ..*ao_cfg
    };
    run_with_sink(chs, cfg, &ao_cfg, rng, &mut ())
}

/// Max-min SINR baseline on the same loop; SOP metrics are reported for
/// comparison.
pub fn run_baseline_mmsinr<R: rand::Rng + ?Sized>(
    chs: &ChannelSet,
    cfg: &SystemConfig,
    ao_cfg: &AoConfig,
    rng: &mut R,
) -> Result<AoResult, Error> {
    let ao_cfg = AoConfig {
        objective: Objective::MmSinr,
        ..*ao_cfg
    };
    run_with_sink(chs, cfg, &ao_cfg, rng, &mut ())
}

/// The loop for `ao_cfg.objective`, streaming each round to `sink`.
///
/// `MmSop` stops on `|ΔP_out| ≤ ξ` and keeps the point with the largest
/// `min_k z_k` (equivalently the smallest `P_out`, with ties at `P_out = 1`
/// broken by the margin). `MmSinr` stops on a relative change of
/// `min_k SINR_k` of at most `ξ` and keeps the largest `min_k SINR_k`.
pub fn run_with_sink<R: rand::Rng + ?Sized>(
    chs: &ChannelSet,
    cfg: &SystemConfig,
    ao_cfg: &AoConfig,
    rng: &mut R,
    sink: &mut dyn TraceSink,
) -> Result<AoResult, Error> {
    cfg.validate()?;
    ao_cfg.validate()?;
    let objective = ao_cfg.objective;
    let ratio = objective.ratio();

    let mut phase = PhaseShift::random(cfg.irs_elements, rng);
    let mut receivers = optimize_receivers(chs, &phase, cfg)?;
    let initial = evaluate(chs, &phase, &receivers, cfg)?;

    let mut best = (phase.clone(), receivers.clone(), initial.clone());
    let mut best_iteration = 0;
    let mut previous = initial.clone();
    let mut warm = None;
    let mut records = Vec::new();
    let mut converged = false;

    for iteration in 1..=ao_cfg.iter_max {
        let clock = Clock::start();
        if iteration > 1 {
            receivers = optimize_receivers(chs, &phase, cfg)?;
        }
        let lp = build_lift(chs, &receivers, cfg)?;
        let (outcome, capped) = match dinkelbach_solve(&lp, ratio, &ao_cfg.dinkelbach, warm.as_ref()) {
            Ok(out) => (out, false),
            Err(DinkelbachError::MaxOuterIterations(out)) => (*out, true),
            Err(e) => return Err(e.into()),
        };
        let bound = sdr_bound(&lp, &outcome.q, ratio)?;
        let recovery = recover_phase_for(
            &outcome.q,
            &lp,
            chs,
            &receivers,
            cfg,
            rng,
            ao_cfg.randomization_samples,
            ratio,
        )?;
        warm = Some(outcome.warm);
        phase = recovery.phase;
        let point = evaluate(chs, &phase, &receivers, cfg)?;

        if point.score(objective) > best.2.score(objective) {
            best = (phase.clone(), receivers.clone(), point.clone());
            best_iteration = iteration;
        }
        let change = match objective {
            Objective::MmSop => (point.p_out - previous.p_out).abs(),
            Objective::MmSinr => {
                (point.min_sinr - previous.min_sinr).abs() / previous.min_sinr.abs().max(f64::MIN_POSITIVE)
            }
        };
        let record = IterationRecord {
            iteration,
            point: point.clone(),
            dinkelbach: outcome.state.history,
            dinkelbach_capped: capped,
            sdr_bound: bound,
            recovered_objective: recovery.objective,
            rank_one: recovery.rank_one,
            incumbent_p_out: best.2.p_out,
            duration_secs: clock.secs(),
        };
        sink.record(&record);
        records.push(record);
        previous = point;
        if change <= ao_cfg.xi {
            converged = true;
            break;
        }
    }

    Ok(AoResult {
        phase: best.0,
        receivers: best.1,
        trace: AoTrace {
            objective,
            initial,
            records,
            converged,
            best_iteration,
        },
    })
}
