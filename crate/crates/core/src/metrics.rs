//! Per-user link quality and the closed-form secrecy outage probability.
//!
//! With receive vector `w_k` the BS sees
//!
//! ```text
//! SINR_k = ρ_k |w_kᴴ a_k|² / (Σ_{i≠k} ρ_i |w_kᴴ a_i|² + σ_b² ‖w_k‖²),   a_i = h_i + GΦf_i
//! ```
//!
//! and the probability that a rate-`R_k` wiretap code leaks is
//! `Γ(N_e, z_k) / Γ(N_e)` with `z_k = φ_k / (1 + ‖Φf_k‖²)` and
//! `φ_k = σ_e² (2^{C_m,k − R_k} − 1) / ρ_k`. The SOP falls as `z_k` grows,
//! so min-max SOP is max-min `z_k`.

use alloc::vec::Vec;

use crate::channel::{effective_channels, interference_matrix, ChannelSet, ConfigError, PhaseShift, SystemConfig};
use crate::linalg::{CMatrix, CVector, C64};
use crate::math;
use crate::receiver::ReceiveMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("incomplete gamma undefined for shape {eps} and lower limit {eta}")]
    Domain { eps: f64, eta: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("receive matrix has {got} rows, expected {expected}")]
    ReceiverCount { expected: usize, got: usize },
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return math::ln(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &coef) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += coef / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * math::ln(core::f64::consts::TAU) + (x + 0.5) * math::ln(t) - t + math::ln(acc)
}

fn is_small_integer(eps: f64) -> bool {
    (1.0..=170.0).contains(&eps) && math::floor(eps) == eps
}

/// Regularized upper incomplete gamma `Q(ε, η) = Γ(ε, η) / Γ(ε)`.
///
/// Integer shapes use the finite sum `e^{−η} Σ_{m<ε} η^m/m!` evaluated as a
/// log-sum-exp; other shapes use the series / continued-fraction pair.
pub fn regularized_upper_gamma(eps: f64, eta: f64) -> Result<f64, MetricsError> {
    if !(eps > 0.0) || !(eta >= 0.0) || !eps.is_finite() || eta.is_nan() {
        return Err(MetricsError::Domain { eps, eta });
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    if eta == f64::INFINITY {
        return Ok(0.0);
    }
    if is_small_integer(eps) {
        let n = eps as usize;
        let ln_eta = math::ln(eta);
        let mut log_terms = Vec::with_capacity(n);
        let mut log_term = 0.0;
        log_terms.push(0.0);
        for m in 1..n {
            log_term += ln_eta - math::ln(m as f64);
            log_terms.push(log_term);
        }
        let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = log_terms.iter().map(|l| math::exp(l - max)).sum();
        let q = math::exp(max + math::ln(sum) - eta);
        return Ok(q.clamp(0.0, 1.0));
    }
    Ok(if eta < eps + 1.0 {
        1.0 - lower_series(eps, eta)
    } else {
        upper_continued_fraction(eps, eta)
    }
    .clamp(0.0, 1.0))
}

// Regularized lower gamma P(a, x) by its power series.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..1000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * math::exp(-x + a * math::ln(x) - ln_gamma(a))
}

// Regularized upper gamma Q(a, x) by modified Lentz continued fraction.
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut cc = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        cc = b + an / cc;
        if cc.abs() < TINY {
            cc = TINY;
        }
        d = 1.0 / d;
        let del = d * cc;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    math::exp(-x + a * math::ln(x) - ln_gamma(a)) * h
}

/// Upper incomplete gamma `Γ(ε, η) = ∫_η^∞ e^{−z} z^{ε−1} dz`.
pub fn upper_incomplete_gamma(eps: f64, eta: f64) -> Result<f64, MetricsError> {
    let q = regularized_upper_gamma(eps, eta)?;
    let complete = if is_small_integer(eps) {
        (1..eps as usize).map(|m| m as f64).product::<f64>()
    } else {
        math::exp(ln_gamma(eps))
    };
    Ok(q * complete)
}

/// `φ_k = σ_e²(2^{C_m − R_k} − 1)/ρ_k`.
pub fn outage_margin(c_m: f64, cfg: &SystemConfig, k: usize) -> f64 {
    cfg.sigma2_e * (math::exp2(c_m - cfg.rate[k]) - 1.0) / cfg.rho[k]
}

/// Closed-form SOP of user `k` given its main-channel capacity.
///
/// A nonpositive margin (`C_m ≤ R_k`) is a certain outage and returns 1.
pub fn secrecy_outage_probability(c_m: f64, cfg: &SystemConfig, f_k: &CVector, k: usize) -> f64 {
    let phi = outage_margin(c_m, cfg, k);
    sop_from_margin(phi, f_k.norm_sqr(), cfg.eve_antennas)
}

/// SOP as a function of `z_k` alone.
pub fn sop_from_z(z: f64, eve_antennas: usize) -> f64 {
    if !(z > 0.0) {
        return 1.0;
    }
    regularized_upper_gamma(eve_antennas as f64, z).unwrap_or(1.0)
}

fn sop_from_margin(phi: f64, f_norm_sqr: f64, eve_antennas: usize) -> f64 {
    if !(phi > 0.0) {
        return 1.0;
    }
    sop_from_z(phi / (1.0 + f_norm_sqr), eve_antennas)
}

/// Everything the optimizer and the reports need about one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserMetrics {
    pub sinr: f64,
    /// Main-channel capacity `log2(1 + SINR)`.
    pub capacity: f64,
    /// `φ_k`; negative when the rate exceeds the main capacity.
    pub phi: f64,
    pub z: f64,
    pub sop: f64,
}

fn check_receivers(w: &ReceiveMatrix, cfg: &SystemConfig) -> Result<(), MetricsError> {
    if w.users() != cfg.users {
        return Err(MetricsError::ReceiverCount {
            expected: cfg.users,
            got: w.users(),
        });
    }
    Ok(())
}

fn sinr_from_effective(effective: &[CVector], w_k: &CVector, cfg: &SystemConfig, k: usize) -> f64 {
    let signal = cfg.rho[k] * w_k.dot(&effective[k]).norm_sqr();
    let mut denom = cfg.sigma2_b * w_k.norm_sqr();
    for (i, a_i) in effective.iter().enumerate() {
        if i != k {
            denom += cfg.rho[i] * w_k.dot(a_i).norm_sqr();
        }
    }
    signal / denom
}

fn metrics_from_sinr(sinr: f64, f_norm_sqr: f64, cfg: &SystemConfig, k: usize) -> UserMetrics {
    let capacity = math::log2(1.0 + sinr);
    // (1 + SINR)·2^{−R} − 1 avoids a log/exp round trip near zero margin
    let phi = cfg.sigma2_e * ((1.0 + sinr) * math::exp2(-cfg.rate[k]) - 1.0) / cfg.rho[k];
    let z = phi / (1.0 + f_norm_sqr);
    UserMetrics {
        sinr,
        capacity,
        phi,
        z,
        sop: sop_from_margin(phi, f_norm_sqr, cfg.eve_antennas),
    }
}

/// SINR of user `k` at the BS.
pub fn sinr(
    chs: &ChannelSet,
    phi: &PhaseShift,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    k: usize,
) -> Result<f64, MetricsError> {
    cfg.check_user(k)?;
    check_receivers(w, cfg)?;
    let effective = effective_channels(chs, phi)?;
    Ok(sinr_from_effective(&effective, w.w(k), cfg, k))
}

/// `z_k = φ_k / (1 + ‖Φf_k‖²)`.
pub fn z_value(
    chs: &ChannelSet,
    phi: &PhaseShift,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    k: usize,
) -> Result<f64, MetricsError> {
    let s = sinr(chs, phi, w, cfg, k)?;
    let q = phi.coefficients();
    let reflected_norm: f64 = (0..q.len()).map(|n| (q[n] * chs.f[(n, k)]).norm_sqr()).sum();
    Ok(metrics_from_sinr(s, reflected_norm, cfg, k).z)
}

/// Metrics of every user, sharing one evaluation of the composite channels.
pub fn user_metrics(
    chs: &ChannelSet,
    phi: &PhaseShift,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
) -> Result<Vec<UserMetrics>, MetricsError> {
    check_receivers(w, cfg)?;
    let effective = effective_channels(chs, phi)?;
    Ok(user_metrics_with(chs, &effective, w, cfg))
}

pub(crate) fn user_metrics_with(
    chs: &ChannelSet,
    effective: &[CVector],
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
) -> Vec<UserMetrics> {
    (0..cfg.users)
        .map(|k| {
            let s = sinr_from_effective(effective, w.w(k), cfg, k);
            metrics_from_sinr(s, f_norm_sqr(chs, k), cfg, k)
        })
        .collect()
}

pub(crate) fn f_norm_sqr(chs: &ChannelSet, k: usize) -> f64 {
    (0..chs.irs_elements()).map(|n| chs.f[(n, k)].norm_sqr()).sum()
}

/// `z_k = c1·(wᴴAw / wᴴBw) + c2` for one user at a fixed phase shift.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioForm {
    pub c1: f64,
    pub c2: f64,
    /// Rank-one signal matrix `a_k a_kᴴ`.
    pub a: CMatrix,
    /// Interference-plus-noise matrix `K̃_k P K̃_kᴴ + σ_b² I`.
    pub b: CMatrix,
}

impl RatioForm {
    /// Generalized Rayleigh quotient `wᴴAw / wᴴBw`.
    pub fn quotient(&self, w: &[C64]) -> f64 {
        self.a.quad_form(w).re / self.b.quad_form(w).re
    }

    pub fn z_at(&self, w: &[C64]) -> f64 {
        self.c1 * self.quotient(w) + self.c2
    }
}

/// Builds `c1`, `c2`, `A_k`, `B_k` for user `k`.
pub fn ratio_form(chs: &ChannelSet, phi: &PhaseShift, cfg: &SystemConfig, k: usize) -> Result<RatioForm, MetricsError> {
    cfg.check_user(k)?;
    let effective = effective_channels(chs, phi)?;
    let a_k = &effective[k];
    let k_tilde = interference_matrix(chs, phi, k)?;
    let powers: Vec<f64> = (0..cfg.users).filter(|&i| i != k).map(|i| cfg.rho[i]).collect();
    let weighted = CMatrix::from_fn(k_tilde.rows(), k_tilde.cols(), |t, j| k_tilde[(t, j)] * powers[j]);
    let mut b = weighted.matmul(&k_tilde.adjoint());
    for t in 0..b.rows() {
        b[(t, t)] += cfg.sigma2_b;
    }
    let scale = 1.0 / (math::exp2(cfg.rate[k]) * (1.0 + f_norm_sqr(chs, k)));
    Ok(RatioForm {
        c1: cfg.sigma2_e * scale,
        c2: cfg.sigma2_e * (1.0 - math::exp2(cfg.rate[k])) * scale / cfg.rho[k],
        a: a_k.outer(a_k),
        b: b.hermitian_part(),
    })
}
