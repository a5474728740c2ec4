//! Primal-dual interior-point method (HKM direction, Mehrotra corrector)
//!
//! Standard form with `X = (Q, s)`, free `u`, multipliers `y = (y_d, ν)`:
//!
//! ```text
//! primal:  max u     s.t. diag(Q) = 1,  ⟨C_k,Q⟩ − s_k − u = −a_k,  Q ⪰ 0,  s ≥ 0
//! dual:    min 1ᵀμ + aᵀν   s.t. S = Diag(μ) − Σ_k ν_k C_k ⪰ 0,  ν ≥ 0,  1ᵀν = 1
//! ```
//!
//! with `μ = −y_d`. The dual iterate starts strictly feasible and every step
//! stays in the dual affine set, so `1ᵀμ + aᵀν` is always a certified upper
//! bound; the primal iterate may be infeasible and is polished before use.

use alloc::vec::Vec;

use super::{unit_diagonal, SdpError, SdpInstance, SdpSettings, SdpSolution, SdpStatus, WarmStart};
use crate::linalg::{hpd_inverse, max_psd_step, solve_spd_real, CMatrix};
use crate::math;

/// Iterations allowed per solve.
pub(super) const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.98;
const STALL: usize = 5;

struct Iterate {
    q: CMatrix,
    s: Vec<f64>,
    u: f64,
    mu: Vec<f64>,
    nu: Vec<f64>,
    slack: CMatrix,
}

struct Direction {
    q: CMatrix,
    s: Vec<f64>,
    u: f64,
    mu: Vec<f64>,
    nu: Vec<f64>,
    slack: CMatrix,
}

fn dual_slack(c: &[CMatrix], mu: &[f64], nu: &[f64]) -> CMatrix {
    let mut s = CMatrix::from_real_diag(mu);
    for (ck, vk) in c.iter().zip(nu) {
        s.add_scaled(-vk, ck);
    }
    s
}

// Re tr(AB).
fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for (j, aij) in a.row(i).iter().enumerate() {
            let bji = b[(j, i)];
            acc += aij.re * bji.re - aij.im * bji.im;
        }
    }
    acc
}

// (A + Aᴴ)/2
fn sym(a: &CMatrix) -> CMatrix {
    a.hermitian_part()
}

struct Newton<'a> {
    c: &'a [CMatrix],
    a: &'a [f64],
    it: &'a Iterate,
    s_inv: CMatrix,
    // W = [[Q∘S⁻ᵀ, −P], [−Pᵀ, Re tr(C_k Q C_l S⁻¹) + diag(s/ν)]], P_ik = Re(Q C_k S⁻¹)_ii
    schur: Vec<f64>,
}

impl<'a> Newton<'a> {
    fn new(c: &'a [CMatrix], a: &'a [f64], it: &'a Iterate) -> Option<Self> {
        let n = it.q.rows();
        let k = c.len();
        let m = n + k;
        let (s_inv, _) = hpd_inverse(&it.slack)?;
        let xcs: Vec<CMatrix> = c.iter().map(|ck| it.q.matmul(ck).matmul(&s_inv)).collect();
        let mut schur = alloc::vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let v = it.q[(i, j)] * s_inv[(j, i)];
                schur[i * m + j] = v.re;
            }
        }
        for (kk, xk) in xcs.iter().enumerate() {
            let col = n + kk;
            for i in 0..n {
                let v = -xk[(i, i)].re;
                schur[i * m + col] = v;
                schur[col * m + i] = v;
            }
            for (ll, cl) in c.iter().enumerate().take(kk + 1) {
                let mut v = trace_product(cl, xk);
                if ll == kk {
                    v += it.s[kk] / it.nu[kk];
                }
                schur[col * m + n + ll] = v;
                schur[(n + ll) * m + col] = v;
            }
        }
        Some(Self { c, a, it, s_inv, schur })
    }

    // Jacobi-scaled solve with W; near the optimum W loses numerical
    // definiteness and a diagonal shift of growing size is tried.
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let m = rhs.len();
        let d: Vec<f64> = (0..m)
            .map(|i| 1.0 / math::sqrt(self.schur[i * m + i].max(1e-300)))
            .collect();
        let mut w: Vec<f64> = (0..m * m)
            .map(|idx| self.schur[idx] * d[idx / m] * d[idx % m])
            .collect();
        let r: Vec<f64> = rhs.iter().zip(&d).map(|(x, y)| x * y).collect();
        let mut shift = 0.0;
        for _ in 0..8 {
            if let Some(x) = solve_spd_real(&w, &r) {
                return Some(x.iter().zip(&d).map(|(x, y)| x * y).collect());
            }
            let next = if shift == 0.0 { 1e-14 } else { shift * 100.0 };
            for i in 0..m {
                w[i * m + i] += next - shift;
            }
            shift = next;
        }
        None
    }

    // Direction towards complementarity `target`, with the second-order
    // terms ΔQ·ΔS and Δs∘Δν of a predictor when given.
    fn direction(&self, target: f64, corr: Option<&Direction>) -> Option<Direction> {
        let it = self.it;
        let n = it.q.rows();
        let k = self.c.len();
        let m = n + k;
        // G = target·S⁻¹ − Q − sym(corr_q S⁻¹)
        let mut g = self.s_inv.scale_real(target);
        g.add_scaled(-1.0, &it.q);
        if let Some(d) = corr {
            g.add_scaled(-1.0, &sym(&d.q.matmul(&d.slack).matmul(&self.s_inv)));
        }
        let gs: Vec<f64> = (0..k)
            .map(|j| {
                let cross = corr.map_or(0.0, |d| d.s[j] * d.nu[j]);
                (target - it.s[j] * it.nu[j] - cross) / it.nu[j]
            })
            .collect();

        // With ΔS = Diag(Δμ) − ΣΔν_k C_k, ΔQ = G − sym(Q ΔS S⁻¹) and
        // Δs = g_s − s∘Δν/ν, the primal rows become W·(Δμ, Δν) − e_ν Δu = h.
        let mut b = alloc::vec![0.0; m];
        for i in 0..n {
            b[i] = g[(i, i)].re + it.q[(i, i)].re - 1.0;
        }
        for j in 0..k {
            b[n + j] = -(self.c[j].frobenius_inner(&it.q) + self.c[j].frobenius_inner(&g) - it.s[j] - gs[j] - it.u
                + self.a[j]);
        }
        let e: Vec<f64> = (0..m).map(|i| if i >= n { 1.0 } else { 0.0 }).collect();
        let x1 = self.solve(&b)?;
        let x2 = self.solve(&e)?;
        let e_x1: f64 = e.iter().zip(&x1).map(|(p, q)| p * q).sum();
        let e_x2: f64 = e.iter().zip(&x2).map(|(p, q)| p * q).sum();
        // Σ Δν = 0 keeps 1ᵀν = 1
        let du = -e_x1 / e_x2;
        let sol: Vec<f64> = (0..m).map(|i| x1[i] + du * x2[i]).collect();
        let dmu = sol[..n].to_vec();
        let dnu = sol[n..].to_vec();

        let dslack = dual_slack(self.c, &dmu, &dnu);
        let mut dq = g;
        dq.add_scaled(-1.0, &sym(&it.q.matmul(&dslack).matmul(&self.s_inv)));
        let ds: Vec<f64> = (0..k).map(|j| gs[j] - it.s[j] * dnu[j] / it.nu[j]).collect();
        Some(Direction {
            q: dq,
            s: ds,
            u: du,
            mu: dmu,
            nu: dnu,
            slack: dslack,
        })
    }
}

fn step_lengths(it: &Iterate, d: &Direction) -> Result<(f64, f64), SdpError> {
    let mut alpha = max_psd_step(&it.q, &d.q)?.unwrap_or(0.0);
    for (x, dx) in it.s.iter().zip(&d.s) {
        if *dx < 0.0 {
            alpha = alpha.min(-x / dx);
        }
    }
    let mut beta = max_psd_step(&it.slack, &d.slack)?.unwrap_or(0.0);
    for (x, dx) in it.nu.iter().zip(&d.nu) {
        if *dx < 0.0 {
            beta = beta.min(-x / dx);
        }
    }
    Ok((alpha, beta))
}

fn complementarity(it: &Iterate) -> f64 {
    let n = it.q.rows();
    let k = it.s.len();
    (it.q.frobenius_inner(&it.slack) + it.s.iter().zip(&it.nu).map(|(x, y)| x * y).sum::<f64>()) / (n + k) as f64
}

fn dual_objective(a: &[f64], mu: &[f64], nu: &[f64]) -> f64 {
    mu.iter().sum::<f64>() + a.iter().zip(nu).map(|(x, y)| x * y).sum::<f64>()
}

pub(super) fn solve_interior(inst: &SdpInstance, settings: &SdpSettings) -> Result<SdpSolution, SdpError> {
    let n = inst.dim;
    let k = inst.c.len();
    let norm = inst.c.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let c: Vec<CMatrix> = inst.c.iter().map(|m| m.scale_real(1.0 / scale)).collect();
    let a: Vec<f64> = inst.a.iter().map(|v| v / scale).collect();

    // strictly feasible dual start: diagonally dominant slack
    let nu = alloc::vec![1.0 / k as f64; k];
    let weighted = dual_slack(&c, &alloc::vec![0.0; n], &nu);
    let mu: Vec<f64> = (0..n)
        .map(|i| 1.0 + weighted.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .collect();
    let slack = dual_slack(&c, &mu, &nu);
    let q = CMatrix::identity(n);
    let vals: Vec<f64> = (0..k).map(|j| a[j] + c[j].frobenius_inner(&q)).collect();
    let u = vals.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let s: Vec<f64> = vals.iter().map(|v| v - u).collect();
    let mut it = Iterate { q, s, u, mu, nu, slack };

    let budget = settings.max_iter.min(MAX_ITERATIONS);
    let mut iterations = 0;
    let mut status = SdpStatus::MaxIterations;
    let mut history = Vec::new();
    let mut best: Option<(CMatrix, f64)> = None;
    let mut upper = f64::INFINITY;
    loop {
        let polished = unit_diagonal(&it.q);
        let value = c
            .iter()
            .zip(&a)
            .map(|(ck, ak)| ak + ck.frobenius_inner(&polished))
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((polished, value));
        }
        // every dual iterate is feasible, so the smallest objective is the bound
        upper = upper.min(dual_objective(&a, &it.mu, &it.nu));
        let gap = upper - best.as_ref().map_or(f64::NEG_INFINITY, |(_, b)| *b);
        history.push(gap);
        if gap <= settings.gap_tol * (1.0 + upper.abs()) {
            status = SdpStatus::Optimal;
            break;
        }
        // no progress in STALL iterations means the floor of double precision
        if iterations >= budget || (history.len() > STALL && gap > 0.5 * history[history.len() - 1 - STALL]) {
            break;
        }
        iterations += 1;

        let Some(newton) = Newton::new(&c, &a, &it) else {
            break;
        };
        let mu_c = complementarity(&it);
        let Some(pred) = newton.direction(0.0, None) else {
            break;
        };
        let (ap, bp) = step_lengths(&it, &pred)?;
        let (ap, bp) = (ap.min(1.0), bp.min(1.0));
        let mut trial_q = it.q.clone();
        trial_q.add_scaled(ap, &pred.q);
        let mut trial_slack = it.slack.clone();
        trial_slack.add_scaled(bp, &pred.slack);
        let trial_lp: f64 = (0..k)
            .map(|j| (it.s[j] + ap * pred.s[j]) * (it.nu[j] + bp * pred.nu[j]))
            .sum();
        let mu_aff = (trial_q.frobenius_inner(&trial_slack) + trial_lp) / (n + k) as f64;
        let ratio = (mu_aff / mu_c).clamp(0.0, 1.0);
        let sigma = ratio * ratio * ratio;
        let Some(dir) = newton.direction(sigma * mu_c, Some(&pred)) else {
            break;
        };
        let (alpha, beta) = step_lengths(&it, &dir)?;
        let alpha = (STEP_FRACTION * alpha).min(1.0);
        let mut beta = (STEP_FRACTION * beta).min(1.0);

        it.q.add_scaled(alpha, &dir.q);
        it.q = it.q.hermitian_part();
        for (x, dx) in it.s.iter_mut().zip(&dir.s) {
            *x += alpha * dx;
        }
        it.u += alpha * dir.u;
        // rebuild the slack from (μ, ν) so the dual stays exactly in its affine set
        loop {
            let mu: Vec<f64> = it.mu.iter().zip(&dir.mu).map(|(x, d)| x + beta * d).collect();
            let nu: Vec<f64> = it.nu.iter().zip(&dir.nu).map(|(x, d)| x + beta * d).collect();
            let slack = dual_slack(&c, &mu, &nu);
            if nu.iter().all(|v| *v > 0.0) && hpd_inverse(&slack).is_some() {
                it.mu = mu;
                it.nu = nu;
                it.slack = slack;
                break;
            }
            beta *= 0.5;
            if beta < 1e-14 {
                break;
            }
        }
    }

    let (q, _) = best.expect("evaluated before the first step");
    let u = inst.objective_at(&q);
    let upper = upper * scale;
    let svals: Vec<f64> = (0..k).map(|j| inst.a[j] + inst.c[j].frobenius_inner(&q) - u).collect();
    let warm = WarmStart {
        q: q.clone(),
        u,
        s: svals,
        y_q: CMatrix::zeros(n, n),
        y_u: 0.0,
        y_s: alloc::vec![0.0; k],
        rho: 1.0 / (3.0 * n as f64),
        scale: 1.0,
        sigma: 1.0,
    };
    Ok(SdpSolution {
        q,
        u,
        status,
        iterations,
        primal_residual: 0.0,
        dual_residual: (upper - u).max(0.0),
        residual_history: history,
        upper_bound: Some(upper),
        warm,
    })
}
