//! Solvers for the max-min epigraph SDP
//!
//! ```text
//! maximize u   s.t.  diag(Q) = 1,  Q ⪰ 0,  u ≤ a_k + ⟨C_k, Q⟩  (k = 1..K)
//! ```
//!
//! Two methods share the instance and solution types.
//!
//! The default is a primal-dual interior-point method whose dual iterate is
//! always strictly feasible, so every solution carries a certified upper
//! bound; its Newton system has only `n + K` unknowns.
//!
//! The alternative is ADMM on `x = (Q, u, s)` with slacks `s ≥ 0`: the x-step
//! projects onto the affine set `{diag(Q) = 1, ⟨C_k,Q⟩ − σ(u + s_k) = −a_k}`,
//! the z-step onto `PSD × ℝ × ℝ₊`. The affine projection reduces to a `K × K`
//! Schur system independent of the penalty, so the penalty can adapt freely.
//!
//! Either way the returned point is polished to be exactly feasible: `Q` is
//! rescaled to unit diagonal (which keeps it PSD) and `u` is set to
//! `min_k(a_k + ⟨C_k, Q⟩)`.

use alloc::vec::Vec;

use crate::linalg::{psd_part_unchecked, solve_spd_real, CMatrix, LinalgError, C64};
use crate::math;

mod interior;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 50_000;
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("constraint {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("constraint matrix {index} is not Hermitian (deviation {deviation})")]
    NotHermitian { index: usize, deviation: f64 },
    #[error("{count} constraint matrices but {offsets} offsets")]
    CountMismatch { count: usize, offsets: usize },
    #[error("instance needs at least one inequality and dimension ≥ 1")]
    Empty,
    #[error("non-finite data in constraint {index}")]
    NonFinite { index: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `max u` over `diag(Q) = 1`, `Q ⪰ 0`, `u ≤ a_k + ⟨C_k, Q⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    dim: usize,
    c: Vec<CMatrix>,
    a: Vec<f64>,
}

impl SdpInstance {
    pub fn new(dim: usize, c: Vec<CMatrix>, a: Vec<f64>) -> Result<Self, SdpError> {
        if dim == 0 || c.is_empty() {
            return Err(SdpError::Empty);
        }
        if c.len() != a.len() {
            return Err(SdpError::CountMismatch {
                count: c.len(),
                offsets: a.len(),
            });
        }
        for (index, ck) in c.iter().enumerate() {
            if ck.rows() != dim || ck.cols() != dim {
                return Err(SdpError::DimensionMismatch {
                    index,
                    expected: dim,
                    got: ck.rows().max(ck.cols()),
                });
            }
            if !a[index].is_finite() || ck.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(SdpError::NonFinite { index });
            }
            let deviation = ck.hermitian_deviation();
            if deviation > 1e-10 * ck.max_abs().max(1.0) {
                return Err(SdpError::NotHermitian { index, deviation });
            }
        }
        let c = c.into_iter().map(|m| m.hermitian_part()).collect();
        Ok(Self { dim, c, a })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self, k: usize) -> &CMatrix {
        &self.c[k]
    }

    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }

    /// `min_k(a_k + ⟨C_k, Q⟩)`, the objective at a feasible `Q`.
    pub fn objective_at(&self, q: &CMatrix) -> f64 {
        self.c
            .iter()
            .zip(&self.a)
            .map(|(ck, ak)| ak + ck.frobenius_inner(q))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Inner algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdpMethod {
    /// Primal-dual interior point; the Newton system has `n + K` unknowns.
    InteriorPoint,
    /// Operator splitting on the primal.
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings {
    pub method: SdpMethod,
    /// Interior point: certified duality gap, relative to the largest `‖C_k‖_F`
    /// and `1 + |bound|`.
    pub gap_tol: f64,
    /// ADMM: residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    /// Initial penalty; `None` scales it to the instance as `1/(3n)`.
    pub rho: Option<f64>,
    /// Iterations between penalty updates (0 disables them).
    pub adapt_interval: usize,
    /// Coefficient of `u` and `s` in the scaled inequality rows; `None` picks one.
    pub slack_scale: Option<f64>,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            method: SdpMethod::InteriorPoint,
            gap_tol: DEFAULT_GAP_TOL,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            alpha: 1.5,
            rho: None,
            adapt_interval: 50,
            slack_scale: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

/// Solver state that lets a nearby instance start where this one ended.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    q: CMatrix,
    u: f64,
    s: Vec<f64>,
    y_q: CMatrix,
    y_u: f64,
    y_s: Vec<f64>,
    rho: f64,
    scale: f64,
    sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// PSD with unit diagonal.
    pub q: CMatrix,
    /// `min_k(a_k + ⟨C_k, Q⟩)` at the returned `Q`.
    pub u: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// ADMM: primal residual after every iteration. Interior point: certified
    /// gap (scaled) after every iteration.
    pub residual_history: Vec<f64>,
    /// Dual objective of a strictly feasible dual point, when the method
    /// produces one: no feasible `Q` does better than this.
    pub upper_bound: Option<f64>,
    pub warm: WarmStart,
}

// Scaled working copy of an instance plus its cached Schur factor data.
struct Prepared {
    n: usize,
    k: usize,
    scale: f64,
    sigma: f64,
    c: Vec<CMatrix>,
    a: Vec<f64>,
    // D[i][k] = Re (C_k)_ii, row-major n × K
    d: Vec<f64>,
    schur: Vec<f64>,
}

impl Prepared {
    fn new(inst: &SdpInstance, sigma: f64) -> Self {
        let n = inst.dim;
        let k = inst.c.len();
        let norm = inst.c.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
        let scale = if norm > 0.0 { norm } else { 1.0 };
        let c: Vec<CMatrix> = inst.c.iter().map(|m| m.scale_real(1.0 / scale)).collect();
        let a: Vec<f64> = inst.a.iter().map(|v| v / scale).collect();
        let mut d = alloc::vec![0.0; n * k];
        for (j, cj) in c.iter().enumerate() {
            for i in 0..n {
                d[i * k + j] = cj[(i, i)].re;
            }
        }
        let mut schur = alloc::vec![0.0; k * k];
        for p in 0..k {
            for q in 0..k {
                let mut g = c[p].frobenius_inner(&c[q]) + sigma * sigma;
                if p == q {
                    g += sigma * sigma;
                }
                for i in 0..n {
                    g -= d[i * k + p] * d[i * k + q];
                }
                schur[p * k + q] = g;
            }
        }
        Self {
            n,
            k,
            scale,
            sigma,
            c,
            a,
            d,
            schur,
        }
    }

    // Euclidean projection of (q, u, s) onto the affine set, in place.
    fn project_affine(&self, q: &mut CMatrix, u: &mut f64, s: &mut [f64]) {
        let (n, k) = (self.n, self.k);
        let r1: Vec<f64> = (0..n).map(|i| q[(i, i)].re - 1.0).collect();
        let mut rhs: Vec<f64> = (0..k)
            .map(|j| self.c[j].frobenius_inner(q) - self.sigma * (*u + s[j]) + self.a[j])
            .collect();
        for (j, r) in rhs.iter_mut().enumerate() {
            for (i, r1i) in r1.iter().enumerate() {
                *r -= self.d[i * k + j] * r1i;
            }
        }
        let nu = solve_spd_real(&self.schur, &rhs).unwrap_or_else(|| alloc::vec![0.0; k]);
        for i in 0..n {
            let mut mu = r1[i];
            for j in 0..k {
                mu -= self.d[i * k + j] * nu[j];
            }
            q[(i, i)] -= C64::new(mu, 0.0);
        }
        for (j, nuj) in nu.iter().enumerate() {
            q.add_scaled(-nuj, &self.c[j]);
            *u += self.sigma * nuj;
            s[j] += self.sigma * nuj;
        }
    }
}

fn psd_part(q: &CMatrix) -> Result<CMatrix, LinalgError> {
    psd_part_unchecked(q)
}

fn sq_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum()
}

fn sq_norm(a: &CMatrix) -> f64 {
    a.as_slice().iter().map(|x| x.norm_sqr()).sum()
}

/// Rescales a PSD matrix to unit diagonal; vanishing diagonal entries get
/// an isolated unit entry.
pub fn unit_diagonal(q: &CMatrix) -> CMatrix {
    let n = q.rows();
    let inv: Vec<f64> = (0..n)
        .map(|i| {
            let d = q[(i, i)].re;
            if d > 1e-300 {
                1.0 / math::sqrt(d)
            } else {
                0.0
            }
        })
        .collect();
    let mut out = CMatrix::from_fn(n, n, |i, j| q[(i, j)] * (inv[i] * inv[j]));
    for i in 0..n {
        if inv[i] == 0.0 {
            for j in 0..n {
                out[(i, j)] = C64::new(0.0, 0.0);
                out[(j, i)] = C64::new(0.0, 0.0);
            }
        }
        out[(i, i)] = C64::new(1.0, 0.0);
    }
    out
}

/// Solves with the default method at tolerance `tol` (duality gap for the
/// interior-point method, residual for ADMM).
pub fn solve(inst: &SdpInstance, tol: f64, max_iter: usize) -> Result<SdpSolution, SdpError> {
    solve_with(
        inst,
        &SdpSettings {
            tol,
            gap_tol: tol,
            max_iter,
            ..SdpSettings::default()
        },
        None,
    )
}

/// Solves from an optional warm start (the state of a previous solve of the
/// same dimension and constraint count; mismatched states are ignored). Only
/// ADMM uses the warm start.
pub fn solve_with(
    inst: &SdpInstance,
    settings: &SdpSettings,
    warm: Option<&WarmStart>,
) -> Result<SdpSolution, SdpError> {
    if settings.method == SdpMethod::InteriorPoint {
        return interior::solve_interior(inst, settings);
    }
    let sigma = settings.slack_scale.unwrap_or(1.0);
    let p = Prepared::new(inst, sigma);
    let (n, k) = (p.n, p.k);
    let alpha = settings.alpha;

    let compatible = warm.filter(|w| w.q.rows() == n && w.s.len() == k && w.rho > 0.0);
    let (mut z_q, mut z_u, mut z_s, mut y_q, mut y_u, mut y_s, mut rho) = match compatible {
        Some(w) => {
            let f = (w.scale * w.sigma) / (p.scale * sigma);
            (
                w.q.clone(),
                w.u * f,
                w.s.iter().map(|v| v * f).collect::<Vec<_>>(),
                w.y_q.scale_real(f),
                w.y_u * f,
                w.y_s.iter().map(|v| v * f).collect::<Vec<_>>(),
                w.rho,
            )
        }
        None => {
            let q = CMatrix::identity(n);
            let vals: Vec<f64> = (0..k).map(|j| p.a[j] + p.c[j].frobenius_inner(&q)).collect();
            let u = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let s = vals.iter().map(|v| (v - u) / sigma).collect();
            let u = u / sigma;
            let rho = settings.rho.unwrap_or(1.0 / (3.0 * n as f64));
            (q, u, s, CMatrix::zeros(n, n), 0.0, alloc::vec![0.0; k], rho)
        }
    };

    let mut history = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut r_prim = f64::INFINITY;
    let mut r_dual = f64::INFINITY;

    for it in 0..settings.max_iter {
        iterations = it + 1;
        // x-step: affine projection of z − y + e_u/ρ
        let mut x_q = &z_q - &y_q;
        let mut x_u = z_u - y_u + sigma / rho;
        let mut x_s: Vec<f64> = z_s.iter().zip(&y_s).map(|(z, y)| z - y).collect();
        p.project_affine(&mut x_q, &mut x_u, &mut x_s);

        // over-relaxation
        let mut xr_q = x_q.scale_real(alpha);
        xr_q.add_scaled(1.0 - alpha, &z_q);
        let xr_u = alpha * x_u + (1.0 - alpha) * z_u;
        let xr_s: Vec<f64> = x_s
            .iter()
            .zip(&z_s)
            .map(|(x, z)| alpha * x + (1.0 - alpha) * z)
            .collect();

        // z-step: cone projection of x̂ + y
        let prev_q = z_q;
        let prev_u = z_u;
        let prev_s = z_s;
        let v_q = &xr_q + &y_q;
        z_q = psd_part(&v_q)?;
        z_u = xr_u + y_u;
        z_s = xr_s.iter().zip(&y_s).map(|(x, y)| (x + y).max(0.0)).collect();

        // dual update
        y_q = &v_q - &z_q;
        y_u = xr_u + y_u - z_u;
        y_s = xr_s.iter().zip(&y_s).zip(&z_s).map(|((x, y), z)| x + y - z).collect();

        let prim_sq = sq_dist(&x_q, &z_q)
            + (x_u - z_u) * (x_u - z_u)
            + x_s.iter().zip(&z_s).map(|(x, z)| (x - z) * (x - z)).sum::<f64>();
        let dual_sq = sq_dist(&z_q, &prev_q)
            + (z_u - prev_u) * (z_u - prev_u)
            + z_s.iter().zip(&prev_s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        r_prim = math::sqrt(prim_sq);
        r_dual = rho * math::sqrt(dual_sq);
        history.push(r_prim);

        let x_norm = math::sqrt(sq_norm(&x_q) + x_u * x_u + x_s.iter().map(|v| v * v).sum::<f64>());
        let z_norm = math::sqrt(sq_norm(&z_q) + z_u * z_u + z_s.iter().map(|v| v * v).sum::<f64>());
        if !r_prim.is_finite() || !z_norm.is_finite() || z_norm > 1e12 {
            status = SdpStatus::Infeasible;
            break;
        }
        let y_norm = math::sqrt(sq_norm(&y_q) + y_u * y_u + y_s.iter().map(|v| v * v).sum::<f64>());
        // ‖Q‖_F lies in [√n, n] on the feasible set; measure relative to a unit-diagonal entry
        let eps_prim = settings.tol * (1.0 + x_norm.max(z_norm) / n as f64);
        let eps_dual = settings.tol * (1.0 + rho * y_norm);
        if r_prim <= eps_prim && r_dual <= eps_dual {
            status = SdpStatus::Optimal;
            break;
        }

        if settings.adapt_interval > 0 && iterations % settings.adapt_interval == 0 {
            // balance the residuals relative to their own scales
            let prim_rel = r_prim / x_norm.max(z_norm).max(1e-12);
            let dual_rel = r_dual / (rho * y_norm).max(1e-12);
            let factor = math::sqrt(prim_rel / dual_rel.max(1e-300));
            if factor.is_finite() && !(0.2..=5.0).contains(&factor) {
                let factor = factor.clamp(1e-3, 1e3);
                rho *= factor;
                y_q = y_q.scale_real(1.0 / factor);
                y_u /= factor;
                for v in y_s.iter_mut() {
                    *v /= factor;
                }
            }
        }
    }

    let q = unit_diagonal(&z_q);
    let u = inst.objective_at(&q);
    let warm = WarmStart {
        q: z_q,
        u: z_u,
        s: z_s,
        y_q,
        y_u,
        y_s,
        rho,
        scale: p.scale,
        sigma,
    };
    Ok(SdpSolution {
        q,
        u,
        status,
        iterations,
        primal_residual: r_prim,
        dual_residual: r_dual,
        residual_history: history,
        upper_bound: None,
        warm,
    })
}
