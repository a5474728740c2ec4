//! Lifted (semidefinite) form of the phase-shift subproblem.
//!
//! With receivers fixed, every `|w_kᴴ(h_i + GΦf_i)|²` is a quadratic in
//! `q = vec(Φ)` plus a linear and a constant term. Appending a unit-modulus
//! scalar `l` to get `q̂ = [q; l]` makes it a pure Hermitian form
//! `q̂ᴴM_{i,k}q̂ + v_{i,k}` (exact whenever `|l| = 1`), and lifting
//! `Q = q̂q̂ᴴ` turns it into the affine function `tr(M_{i,k}Q) + v_{i,k}`.
//! The unit-modulus constraints become `diag(Q) = 1`.

use alloc::vec::Vec;

use crate::channel::{effective_channels_with, ChannelSet, PhaseShift, SystemConfig};
use crate::linalg::{arg, herm_eig, unit_phase, CMatrix, CVector, LinalgError, C64};
use crate::math;
use crate::metrics::{f_norm_sqr, user_metrics_with, MetricsError};
use crate::receiver::ReceiveMatrix;
use crate::rng::complex_normal;

/// `λ₂/λ₁` at or below which a lifted solution is treated as rank one.
pub const RANK_ONE_RATIO: f64 = 1e-6;
/// Negative-eigenvalue tolerance (relative to `max(1, λ_max)`) for `Q ⪰ 0`.
pub const PSD_TOL: f64 = 1e-8;
pub const DEFAULT_RANDOMIZATION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lifted matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Which per-user ratio the phase subproblem maximizes the minimum of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioObjective {
    /// `z_k = N_k/D_k` (min-max secrecy outage).
    SecrecyOutage,
    /// `SINR_k = ρ_k(tr(M_{k,k}Q) + v_{k,k}) / D_k` (max-min SINR).
    Sinr,
}

/// `Q ↦ ⟨C, Q⟩ + c₀` for Hermitian `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub matrix: CMatrix,
    pub constant: f64,
}

impl AffineForm {
    pub fn eval(&self, q: &CMatrix) -> f64 {
        self.matrix.frobenius_inner(q) + self.constant
    }

    /// `self − λ·other`.
    pub fn minus_scaled(&self, lambda: f64, other: &AffineForm) -> AffineForm {
        let mut matrix = self.matrix.clone();
        matrix.add_scaled(-lambda, &other.matrix);
        AffineForm {
            matrix,
            constant: self.constant - lambda * other.constant,
        }
    }
}

/// All lifted blocks for one receive matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProblem {
    dim: usize,
    users: usize,
    // generator c_{i,k} with M_{i,k} = c cᴴ minus its corner, row-major [i][k]
    generators: Vec<CVector>,
    m: Vec<CMatrix>,
    v: Vec<f64>,
    t: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    rho: Vec<f64>,
}

impl LiftedProblem {
    /// `Ns + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// `M_{i,k}`: user `i`'s channel seen through receiver `k`.
    pub fn m(&self, i: usize, k: usize) -> &CMatrix {
        &self.m[i * self.users + k]
    }

    /// `v_{i,k} = |w_kᴴh_i|²`.
    pub fn v(&self, i: usize, k: usize) -> f64 {
        self.v[i * self.users + k]
    }

    /// `t_k = σ_b²‖w_k‖²`.
    pub fn t(&self, k: usize) -> f64 {
        self.t[k]
    }

    pub fn c1(&self, k: usize) -> f64 {
        self.c1[k]
    }

    pub fn c2(&self, k: usize) -> f64 {
        self.c2[k]
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `q̂ᴴM_{i,k}q̂ + v_{i,k}`.
    pub fn lifted_gain(&self, i: usize, k: usize, q_hat: &[C64]) -> f64 {
        let c = &self.generators[i * self.users + k];
        let n = self.dim;
        // |cᴴq̂|² − |c_n q̂_n|² + v  equals the quadratic form of M plus v
        let inner: C64 = c.iter().zip(q_hat).map(|(ci, qi)| ci.conj() * qi).sum();
        inner.norm_sqr() - (c[n - 1].conj() * q_hat[n - 1]).norm_sqr() + self.v(i, k)
    }

    /// `D_k(Q) = Σ_{i≠k} ρ_i(tr(M_{i,k}Q) + v_{i,k}) + t_k`.
    pub fn denominator(&self, k: usize) -> AffineForm {
        let mut matrix = CMatrix::zeros(self.dim, self.dim);
        let mut constant = self.t[k];
        for i in (0..self.users).filter(|&i| i != k) {
            matrix.add_scaled(self.rho[i], self.m(i, k));
            constant += self.rho[i] * self.v(i, k);
        }
        AffineForm { matrix, constant }
    }

    /// `N_k(Q)` for the chosen objective.
    pub fn numerator(&self, k: usize, objective: RatioObjective) -> AffineForm {
        match objective {
            RatioObjective::Sinr => AffineForm {
                matrix: self.m(k, k).scale_real(self.rho[k]),
                constant: self.rho[k] * self.v(k, k),
            },
            RatioObjective::SecrecyOutage => {
                let den = self.denominator(k);
                let mut matrix = self.m(k, k).scale_real(self.c1[k]);
                matrix.add_scaled(self.c2[k], &den.matrix);
                AffineForm {
                    matrix,
                    constant: self.c1[k] * self.v(k, k) + self.c2[k] * den.constant,
                }
            }
        }
    }
}

/// Selector `E_n = e_n e_nᵀ` of the `n`-th diagonal entry (0-indexed).
pub fn constraint_matrix(dim: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| {
        if i == n && j == n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `q̂ = [q; 1]`.
pub fn homogenize(phi: &PhaseShift) -> CVector {
    let mut q = phi.coefficients().into_inner();
    q.push(C64::new(1.0, 0.0));
    CVector::new(q)
}

/// Unit-modulus phase from a homogenized vector: `θ_n = arg q̂_n − arg q̂_last`.
pub fn dehomogenize(q_hat: &[C64]) -> PhaseShift {
    let n = q_hat.len() - 1;
    let reference = if q_hat[n] == C64::new(0.0, 0.0) {
        0.0
    } else {
        arg(q_hat[n])
    };
    PhaseShift::new(
        q_hat[..n]
            .iter()
            .map(|z| if *z == C64::new(0.0, 0.0) { 0.0 } else { arg(*z) } - reference)
            .collect(),
    )
}

/// Assembles the lifted blocks for receivers `w`.
pub fn build_lift(chs: &ChannelSet, w: &ReceiveMatrix, cfg: &SystemConfig) -> Result<LiftedProblem, LiftError> {
    let users = cfg.users;
    let nt = chs.bs_antennas();
    let ns = chs.irs_elements();
    if w.users() != users || chs.users() != users {
        return Err(LiftError::DimensionMismatch {
            expected: users,
            got: w.users(),
        });
    }
    if w.bs_antennas() != nt {
        return Err(LiftError::DimensionMismatch {
            expected: nt,
            got: w.bs_antennas(),
        });
    }
    let dim = ns + 1;
    let mut generators = Vec::with_capacity(users * users);
    let mut m = Vec::with_capacity(users * users);
    let mut v = Vec::with_capacity(users * users);
    // Gᴴw_k for every receiver
    let g_adj_w: Vec<CVector> = (0..users).map(|k| chs.g.adjoint_mul_vec(w.w(k))).collect();
    for i in 0..users {
        for k in 0..users {
            let wk = w.w(k);
            let beta: C64 = (0..nt).map(|t| wk[t].conj() * chs.h[(t, i)]).sum();
            // a = E_iᴴw_k = diag(f̄_i)Gᴴw_k; generator [a; β̄]
            let mut c: Vec<C64> = (0..ns).map(|n| chs.f[(n, i)].conj() * g_adj_w[k][n]).collect();
            c.push(beta.conj());
            let c = CVector::new(c);
            let mut block = c.outer(&c);
            block[(ns, ns)] = C64::new(0.0, 0.0);
            generators.push(c);
            m.push(block);
            v.push(beta.norm_sqr());
        }
    }
    let t = (0..users).map(|k| cfg.sigma2_b * w.w(k).norm_sqr()).collect();
    let mut c1 = Vec::with_capacity(users);
    let mut c2 = Vec::with_capacity(users);
    for k in 0..users {
        let scale = 1.0 / (math::exp2(cfg.rate[k]) * (1.0 + f_norm_sqr(chs, k)));
        c1.push(cfg.sigma2_e * scale);
        c2.push(cfg.sigma2_e * (1.0 - math::exp2(cfg.rate[k])) * scale / cfg.rho[k]);
    }
    Ok(LiftedProblem {
        dim,
        users,
        generators,
        m,
        v,
        t,
        c1,
        c2,
        rho: cfg.rho.clone(),
    })
}

/// A lifted phase matrix; Hermitian with matching dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedQ(CMatrix);

impl LiftedQ {
    pub fn new(q: CMatrix) -> Result<Self, LiftError> {
        if !q.is_square() {
            return Err(LiftError::DimensionMismatch {
                expected: q.rows(),
                got: q.cols(),
            });
        }
        if !q.is_hermitian(1e-10 * q.max_abs().max(1.0)) {
            return Err(LiftError::Linalg(LinalgError::NotHermitian {
                deviation: q.hermitian_deviation(),
            }));
        }
        Ok(Self(q.hermitian_part()))
    }

    /// `q̂q̂ᴴ`.
    pub fn rank_one(q_hat: &CVector) -> Self {
        Self(q_hat.outer(q_hat))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

fn check_dim(lp: &LiftedProblem, q: &LiftedQ) -> Result<(), LiftError> {
    if q.dim() != lp.dim {
        return Err(LiftError::DimensionMismatch {
            expected: lp.dim,
            got: q.dim(),
        });
    }
    Ok(())
}

/// `(N_k(Q), D_k(Q))` of the secrecy-outage ratio.
pub fn eval_affine_forms(lp: &LiftedProblem, q: &LiftedQ, k: usize) -> Result<(f64, f64), LiftError> {
    eval_ratio_forms(lp, q, k, RatioObjective::SecrecyOutage)
}

/// `(N_k(Q), D_k(Q))` for either objective.
pub fn eval_ratio_forms(
    lp: &LiftedProblem,
    q: &LiftedQ,
    k: usize,
    objective: RatioObjective,
) -> Result<(f64, f64), LiftError> {
    check_dim(lp, q)?;
    Ok((
        lp.numerator(k, objective).eval(q.matrix()),
        lp.denominator(k).eval(q.matrix()),
    ))
}

/// `min_k N_k(Q)/D_k(Q)`: the relaxation's objective value.
pub fn sdr_bound(lp: &LiftedProblem, q: &LiftedQ, objective: RatioObjective) -> Result<f64, LiftError> {
    let mut best = f64::INFINITY;
    for k in 0..lp.users {
        let (n, d) = eval_ratio_forms(lp, q, k, objective)?;
        best = best.min(n / d);
    }
    Ok(best)
}

/// Outcome of turning a lifted solution back into a phase shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub phase: PhaseShift,
    /// `min_k z_k` or `min_k SINR_k` at `phase`, evaluated exactly.
    pub objective: f64,
    pub rank_one: bool,
    /// Candidates scored (1 when rank one).
    pub candidates: usize,
}

fn score(
    chs: &ChannelSet,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    phase: &PhaseShift,
    objective: RatioObjective,
) -> f64 {
    let effective = effective_channels_with(chs, &phase.coefficients());
    user_metrics_with(chs, &effective, w, cfg)
        .iter()
        .map(|m| match objective {
            RatioObjective::SecrecyOutage => m.z,
            RatioObjective::Sinr => m.sinr,
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rank-one extraction or Gaussian randomization (secrecy-outage scoring).
#[allow(clippy::too_many_arguments)]
pub fn recover_phase<R: rand::Rng + ?Sized>(
    q_star: &LiftedQ,
    lp: &LiftedProblem,
    chs: &ChannelSet,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
    samples: usize,
) -> Result<Recovery, LiftError> {
    recover_phase_for(q_star, lp, chs, w, cfg, rng, samples, RatioObjective::SecrecyOutage)
}

/// [`recover_phase`] scoring candidates by the given objective.
///
/// The leading-eigenvector candidate is always scored alongside the
/// `samples` Gaussian draws `ξ ~ CN(0, Q*)`; ties keep the earliest.
#[allow(clippy::too_many_arguments)]
pub fn recover_phase_for<R: rand::Rng + ?Sized>(
    q_star: &LiftedQ,
    lp: &LiftedProblem,
    chs: &ChannelSet,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
    samples: usize,
    objective: RatioObjective,
) -> Result<Recovery, LiftError> {
    check_dim(lp, q_star)?;
    let n = lp.dim;
    let eig = herm_eig(q_star.matrix())?;
    let (lambda_max, leading) = eig.leading();
    let min_eigenvalue = eig.values[0];
    if min_eigenvalue < -PSD_TOL * lambda_max.max(1.0) {
        return Err(LiftError::NotPsd { min_eigenvalue });
    }
    let second = if n >= 2 { eig.values[n - 2] } else { 0.0 };
    let rank_one = lambda_max > 0.0 && second <= RANK_ONE_RATIO * lambda_max;

    let eig_phase = dehomogenize(&leading);
    let mut best_score = score(chs, w, cfg, &eig_phase, objective);
    let mut best_phase = eig_phase;
    if rank_one {
        return Ok(Recovery {
            phase: best_phase,
            objective: best_score,
            rank_one: true,
            candidates: 1,
        });
    }

    let sqrt_vals: Vec<f64> = eig.values.iter().map(|&l| math::sqrt(l.max(0.0))).collect();
    let mut xi = alloc::vec![C64::new(0.0, 0.0); n];
    let mut r = alloc::vec![C64::new(0.0, 0.0); n];
    for _ in 0..samples {
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = complex_normal(rng) * sqrt_vals[j];
        }
        for (i, x) in xi.iter_mut().enumerate() {
            *x = (0..n).map(|j| eig.vectors[(i, j)] * r[j]).sum();
        }
        let phase = dehomogenize(&xi);
        let s = score(chs, w, cfg, &phase, objective);
        if s > best_score {
            best_score = s;
            best_phase = phase;
        }
    }
    Ok(Recovery {
        phase: best_phase,
        objective: best_score,
        rank_one: false,
        candidates: samples + 1,
    })
}

/// `e^{jθ}` lifted: `q̂ = [e^{jθ}; 1]`, from raw angles.
pub fn homogenized_from_angles(theta: &[f64]) -> CVector {
    let mut q: Vec<C64> = theta.iter().map(|&t| unit_phase(t)).collect();
    q.push(C64::new(1.0, 0.0));
    CVector::new(q)
}
