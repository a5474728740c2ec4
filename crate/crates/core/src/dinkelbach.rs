//! Generalized Dinkelbach iteration for `max_Q min_k N_k(Q)/D_k(Q)` over
//! `{Q ⪰ 0, diag(Q) = 1}`.
//!
//! Each step solves the parametric problem `F(λ) = max_Q min_k(N_k − λD_k)`
//! as an epigraph SDP and moves `λ` to the worst ratio achieved by the
//! maximizer. `F` is decreasing in `λ` and vanishes at the optimal ratio.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::lift::{AffineForm, LiftedProblem, LiftedQ, RatioObjective};
use crate::sdp::{solve_with, SdpError, SdpInstance, SdpSettings, SdpStatus, WarmStart};

pub const DEFAULT_TAU: f64 = 1e-5;
pub const DEFAULT_MAX_OUTER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachSettings {
    pub tau: f64,
    pub max_outer: usize,
    pub sdp: SdpSettings,
}

impl Default for DinkelbachSettings {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            max_outer: DEFAULT_MAX_OUTER,
            sdp: SdpSettings::default(),
        }
    }
}

/// One parametric solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachStep {
    /// `λ` the subproblem was solved at.
    pub lambda_in: f64,
    /// `F(λ_in)` at the solver's point.
    pub f: f64,
    /// `λ` after the step (never below `lambda_in` once a ratio is attained).
    pub lambda_out: f64,
    pub sdp_iterations: usize,
    pub sdp_status: SdpStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachState {
    pub lambda: f64,
    pub f: f64,
    pub iteration: usize,
    pub history: Vec<DinkelbachStep>,
}

impl DinkelbachState {
    /// Attained ratios `λ_1, λ_2, …`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.history.iter().map(|s| s.lambda_out).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachOutcome {
    /// Maximizer attaining the final `λ`.
    pub q: LiftedQ,
    pub state: DinkelbachState,
    /// Solver state for the next, nearby solve.
    pub warm: WarmStart,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DinkelbachError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no ratio forms given")]
    Empty,
    #[error("Dinkelbach did not reach F ≤ τ in {} outer iterations", .0.state.iteration)]
    MaxOuterIterations(Box<DinkelbachOutcome>),
    #[error("denominator {k} evaluated to {value}, below the structural floor {floor}")]
    MalformedLift { k: usize, value: f64, floor: f64 },
    #[error("epigraph SDP reported infeasibility at λ = {lambda}")]
    Infeasible { lambda: f64 },
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Lift(#[from] crate::lift::LiftError),
}

/// The per-user `(N_k, D_k)` pair of a ratio problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioPair {
    pub numerator: AffineForm,
    pub denominator: AffineForm,
}

/// Ratio pairs of a lifted problem.
pub fn ratio_pairs(lp: &LiftedProblem, objective: RatioObjective) -> Vec<RatioPair> {
    (0..lp.users())
        .map(|k| RatioPair {
            numerator: lp.numerator(k, objective),
            denominator: lp.denominator(k),
        })
        .collect()
}

/// Epigraph instance of `max_Q min_k(N_k − λD_k)`.
pub fn build_instance(pairs: &[RatioPair], lambda: f64) -> Result<SdpInstance, SdpError> {
    let dim = pairs.first().map_or(0, |p| p.numerator.matrix.rows());
    let (c, a) = pairs
        .iter()
        .map(|p| {
            let f = p.numerator.minus_scaled(lambda, &p.denominator);
            (f.matrix, f.constant)
        })
        .unzip();
    SdpInstance::new(dim, c, a)
}

fn min_ratio(pairs: &[RatioPair], q: &crate::linalg::CMatrix, floor: f64) -> Result<f64, DinkelbachError> {
    let mut best = f64::INFINITY;
    for (k, p) in pairs.iter().enumerate() {
        let d = p.denominator.eval(q);
        if !(d >= floor) {
            return Err(DinkelbachError::MalformedLift { k, value: d, floor });
        }
        best = best.min(p.numerator.eval(q) / d);
    }
    Ok(best)
}

/// Dinkelbach on a lifted problem; the denominator floor is `min_k t_k / 2`.
pub fn dinkelbach_solve(
    lp: &LiftedProblem,
    objective: RatioObjective,
    settings: &DinkelbachSettings,
    warm: Option<&WarmStart>,
) -> Result<DinkelbachOutcome, DinkelbachError> {
    let floor = (0..lp.users()).map(|k| lp.t(k)).fold(f64::INFINITY, f64::min) / 2.0;
    dinkelbach_pairs(&ratio_pairs(lp, objective), floor, settings, warm)
}

/// Dinkelbach on explicit ratio pairs, starting from `λ = 0`.
///
/// The loop runs until `F ≤ τ`, except that a negative first `F` (the
/// optimal ratio is below zero) continues from the attained ratio. A step
/// whose point attains less than the current `λ` is discarded and ends the
/// loop, so the returned `Q` always attains the returned `λ`.
pub fn dinkelbach_pairs(
    pairs: &[RatioPair],
    denominator_floor: f64,
    settings: &DinkelbachSettings,
    warm: Option<&WarmStart>,
) -> Result<DinkelbachOutcome, DinkelbachError> {
    if !(settings.tau > 0.0) {
        return Err(DinkelbachError::InvalidTolerance(settings.tau));
    }
    if pairs.is_empty() {
        return Err(DinkelbachError::Empty);
    }
    let mut lambda = 0.0;
    let mut attained = false;
    let mut best: Option<(LiftedQ, WarmStart)> = None;
    let mut warm_state = warm.cloned();
    let mut state = DinkelbachState {
        lambda,
        f: f64::INFINITY,
        iteration: 0,
        history: Vec::new(),
    };

    loop {
        if state.iteration >= settings.max_outer {
            let (q, warm) = best.expect("at least one outer iteration ran");
            return Err(DinkelbachError::MaxOuterIterations(Box::new(DinkelbachOutcome {
                q,
                state,
                warm,
            })));
        }
        state.iteration += 1;
        let inst = build_instance(pairs, lambda)?;
        let sol = solve_with(&inst, &settings.sdp, warm_state.as_ref())?;
        if sol.status == SdpStatus::Infeasible {
            return Err(DinkelbachError::Infeasible { lambda });
        }
        let f = sol.u;
        let ratio = min_ratio(pairs, &sol.q, denominator_floor)?;
        warm_state = Some(sol.warm.clone());

        let improves = !attained || ratio >= lambda;
        let lambda_out = if improves { ratio } else { lambda };
        state.history.push(DinkelbachStep {
            lambda_in: lambda,
            f,
            lambda_out,
            sdp_iterations: sol.iterations,
            sdp_status: sol.status,
        });
        state.f = f;
        if improves {
            best = Some((LiftedQ::new(sol.q)?, sol.warm));
            lambda = lambda_out;
            state.lambda = lambda;
        }
        let first_below_optimum = !attained && f < 0.0;
        attained = true;
        // a discarded step has f < 0 (some N_k − λD_k is negative at its
        // maximizer), so the current λ is optimal to solver accuracy
        if !improves || (f <= settings.tau && !first_below_optimum) {
            break;
        }
    }
    let (q, warm) = best.expect("loop ends after an accepted step");
    Ok(DinkelbachOutcome { q, state, warm })
}
