//! Sampling oracle for the secrecy outage probability.
//!
//! Draws eavesdropper channels, evaluates the wiretap capacity
//! `C_w = log2(1 + ρ_k/σ_e² ‖h_{e,k} + G_e Φ f_k‖²)` and counts
//! `C_w ≥ C_m − R_k`. Independent of the closed form in [`crate::metrics`].

use alloc::vec::Vec;

use crate::channel::{sample_eve_channels, ChannelSet, EveChannelSample, PhaseShift, SystemConfig};
use crate::linalg::C64;
use crate::math;
use crate::metrics::{user_metrics, MetricsError};
use crate::receiver::ReceiveMatrix;

/// Wiretap capacity of user `k` for one eavesdropper draw.
pub fn wiretap_capacity(eve: &EveChannelSample, reflected: &[C64], cfg: &SystemConfig, k: usize) -> f64 {
    let ne = eve.h_e.rows();
    let mut gain = 0.0;
    for r in 0..ne {
        let via_irs: C64 = eve.g_e.row(r).iter().zip(reflected).map(|(g, x)| g * x).sum();
        gain += (eve.h_e[(r, k)] + via_irs).norm_sqr();
    }
    math::log2(1.0 + cfg.rho[k] / cfg.sigma2_e * gain)
}

/// Fraction of `samples` eavesdropper draws in which each user's secrecy
/// rate falls below its coding rate. One `G_e` draw is shared by all users
/// within a sample.
pub fn empirical_outage<R: rand::Rng + ?Sized>(
    chs: &ChannelSet,
    phi: &PhaseShift,
    w: &ReceiveMatrix,
    cfg: &SystemConfig,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>, MetricsError> {
    let metrics = user_metrics(chs, phi, w, cfg)?;
    let q = phi.coefficients();
    let reflected: Vec<Vec<C64>> = (0..cfg.users)
        .map(|k| (0..q.len()).map(|n| q[n] * chs.f[(n, k)]).collect())
        .collect();
    let mut outages = alloc::vec![0usize; cfg.users];
    for _ in 0..samples {
        let eve = sample_eve_channels(cfg, rng);
        for k in 0..cfg.users {
            let c_w = wiretap_capacity(&eve, &reflected[k], cfg, k);
            if c_w >= metrics[k].capacity - cfg.rate[k] {
                outages[k] += 1;
            }
        }
    }
    Ok(outages.iter().map(|&n| n as f64 / samples.max(1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channels;
    use crate::receiver::optimize_receivers;
    use crate::rng::{stream, Purpose};

    #[test]
    fn closed_form_matches_sampling() {
        let cfg = SystemConfig::from_snr_db(2, 4, 8, 2, 1.0, 2.0, 77);
        let chs = sample_channels(&cfg, &mut stream(77, 0, Purpose::Channels));
        let phi = PhaseShift::random(8, &mut stream(77, 0, Purpose::Optimizer));
        let w = optimize_receivers(&chs, &phi, &cfg).unwrap();
        let closed = user_metrics(&chs, &phi, &w, &cfg).unwrap();
        let empirical =
            empirical_outage(&chs, &phi, &w, &cfg, 100_000, &mut stream(77, 0, Purpose::Eavesdropper)).unwrap();
        for k in 0..2 {
            assert!(
                (closed[k].sop - empirical[k]).abs() <= 0.01,
                "{} vs {}",
                closed[k].sop,
                empirical[k]
            );
        }
    }

    #[test]
    fn certain_outage_when_rate_exceeds_capacity() {
        let mut cfg = SystemConfig::from_snr_db(1, 2, 2, 1, -20.0, 2.0, 1);
        cfg.rate[0] = 50.0;
        let chs = sample_channels(&cfg, &mut stream(1, 0, Purpose::Channels));
        let phi = PhaseShift::zeros(2);
        let w = optimize_receivers(&chs, &phi, &cfg).unwrap();
        let p = empirical_outage(&chs, &phi, &w, &cfg, 100, &mut stream(1, 0, Purpose::Eavesdropper)).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn wiretap_capacity_without_irs_path() {
        let cfg = SystemConfig::from_snr_db(1, 1, 1, 2, 0.0, 1.0, 0);
        let eve = EveChannelSample {
            h_e: crate::CMatrix::from_fn(2, 1, |r, _| C64::new(r as f64 + 1.0, 0.0)),
            g_e: crate::CMatrix::zeros(2, 1),
        };
        let c_w = wiretap_capacity(&eve, &[C64::new(1.0, 0.0)], &cfg, 0);
        assert!((c_w - 6f64.log2()).abs() < 1e-14);
    }
}
