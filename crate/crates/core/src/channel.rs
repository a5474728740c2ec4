//! System configuration, channel realizations and the IRS phase shift.
//!
//! All legitimate links (`H`: users→BS, `G`: IRS→BS, `F`: users→IRS) and
//! eavesdropper links are drawn i.i.d. `CN(0, 1)`; no pathloss or geometry
//! is modeled. Users are indexed from 0.

use alloc::vec::Vec;

use crate::linalg::{unit_phase, CMatrix, CVector, C64};
use crate::math;
use crate::rng::{complex_normal_matrix, uniform_angle};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{name} must be at least 1")]
    ZeroDimension { name: &'static str },
    #[error("{name} has length {got}, expected one entry per user ({users})")]
    PerUserLength {
        name: &'static str,
        got: usize,
        users: usize,
    },
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("user index {index} out of range for {users} users")]
    IndexOutOfRange { index: usize, users: usize },
    #[error("phase shift has {got} elements, the IRS has {expected}")]
    PhaseLength { expected: usize, got: usize },
}

/// Dimensions, powers, noise levels and coding rates of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of single-antenna users `K`.
    pub users: usize,
    /// BS antennas `Nt`.
    pub bs_antennas: usize,
    /// IRS elements `Ns`.
    pub irs_elements: usize,
    /// Eavesdropper antennas `Ne`.
    pub eve_antennas: usize,
    /// Per-user transmit power (linear).
    pub rho: Vec<f64>,
    /// BS noise variance (linear).
    pub sigma2_b: f64,
    /// Eavesdropper noise variance (linear).
    pub sigma2_e: f64,
    /// Per-user secrecy coding rate in bit/s/Hz.
    pub rate: Vec<f64>,
    pub seed: u64,
}

impl SystemConfig {
    /// Equal-power, equal-rate scenario with unit noise at BS and Eve, so that
    /// `snr_db = 10·log10(ρ)`.
    pub fn from_snr_db(
        users: usize,
        bs_antennas: usize,
        irs_elements: usize,
        eve_antennas: usize,
        snr_db: f64,
        rate: f64,
        seed: u64,
    ) -> Self {
        let rho = math::powf(10.0, snr_db / 10.0);
        Self {
            users,
            bs_antennas,
            irs_elements,
            eve_antennas,
            rho: alloc::vec![rho; users],
            sigma2_b: 1.0,
            sigma2_e: 1.0,
            rate: alloc::vec![rate; users],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("users", self.users),
            ("bs_antennas", self.bs_antennas),
            ("irs_elements", self.irs_elements),
            ("eve_antennas", self.eve_antennas),
        ] {
            if value == 0 {
                return Err(ConfigError::ZeroDimension { name });
            }
        }
        for (name, values) in [("rho", &self.rho), ("rate", &self.rate)] {
            if values.len() != self.users {
                return Err(ConfigError::PerUserLength {
                    name,
                    got: values.len(),
                    users: self.users,
                });
            }
            if let Some(&value) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(ConfigError::NotPositive { name, value });
            }
        }
        for (name, value) in [("sigma2_b", self.sigma2_b), ("sigma2_e", self.sigma2_e)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NotPositive { name, value });
            }
        }
        Ok(())
    }

    /// SNR in dB of user `k` at the BS, `10·log10(ρ_k/σ_b²)`.
    pub fn snr_db(&self, k: usize) -> f64 {
        10.0 * math::log10(self.rho[k] / self.sigma2_b)
    }

    pub(crate) fn check_user(&self, k: usize) -> Result<(), ConfigError> {
        if k >= self.users {
            Err(ConfigError::IndexOutOfRange {
                index: k,
                users: self.users,
            })
        } else {
            Ok(())
        }
    }
}

/// One realization of the legitimate channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `Nt × K`, column `k` is `h_k`.
    pub h: CMatrix,
    /// `Nt × Ns`.
    pub g: CMatrix,
    /// `Ns × K`, column `k` is `f_k`.
    pub f: CMatrix,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.h.cols()
    }

    pub fn bs_antennas(&self) -> usize {
        self.h.rows()
    }

    pub fn irs_elements(&self) -> usize {
        self.g.cols()
    }

    pub fn h_col(&self, k: usize) -> CVector {
        self.h.col(k)
    }

    pub fn f_col(&self, k: usize) -> CVector {
        self.f.col(k)
    }

    /// Same channels with the IRS→BS link removed.
    pub fn without_irs(&self) -> ChannelSet {
        ChannelSet {
            h: self.h.clone(),
            g: CMatrix::zeros(self.g.rows(), self.g.cols()),
            f: self.f.clone(),
        }
    }
}

/// One draw of the eavesdropper's channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EveChannelSample {
    /// `Ne × K`, column `k` is `h_{e,k}`.
    pub h_e: CMatrix,
    /// `Ne × Ns`.
    pub g_e: CMatrix,
}

/// Draws `H`, `G`, `F` in that order, each row by row.
pub fn sample_channels<R: rand::Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelSet {
    let h = complex_normal_matrix(rng, cfg.bs_antennas, cfg.users);
    let g = complex_normal_matrix(rng, cfg.bs_antennas, cfg.irs_elements);
    let f = complex_normal_matrix(rng, cfg.irs_elements, cfg.users);
    ChannelSet { h, g, f }
}

/// Draws `h_e` then `G_e`.
pub fn sample_eve_channels<R: rand::Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> EveChannelSample {
    let h_e = complex_normal_matrix(rng, cfg.eve_antennas, cfg.users);
    let g_e = complex_normal_matrix(rng, cfg.eve_antennas, cfg.irs_elements);
    EveChannelSample { h_e, g_e }
}

/// IRS configuration: one phase per element, the diagonal of `Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShift {
    theta: Vec<f64>,
}

impl PhaseShift {
    /// Angles are wrapped into `[0, 2π)`.
    pub fn new(theta: Vec<f64>) -> Self {
        let tau = core::f64::consts::TAU;
        let theta = theta
            .into_iter()
            .map(|t| {
                let w = t - tau * math::floor(t / tau);
                if w >= tau {
                    0.0
                } else {
                    w
                }
            })
            .collect();
        Self { theta }
    }

    /// All elements at phase zero (`Φ = I`).
    pub fn zeros(len: usize) -> Self {
        Self {
            theta: alloc::vec![0.0; len],
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::new((0..len).map(|_| uniform_angle(rng)).collect())
    }

    /// Projects each entry of `q` onto the unit circle (zero entries map to
    /// phase 0).
    pub fn from_vector(q: &[C64]) -> Self {
        Self::new(
            q.iter()
                .map(|z| {
                    if *z == C64::new(0.0, 0.0) {
                        0.0
                    } else {
                        crate::linalg::arg(*z)
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    /// `q = vec(Φ)`: the unit-modulus reflection coefficients.
    pub fn coefficients(&self) -> CVector {
        CVector::new(self.theta.iter().map(|&t| unit_phase(t)).collect())
    }

    /// `Φ` as a dense diagonal matrix.
    pub fn matrix(&self) -> CMatrix {
        let q = self.coefficients();
        CMatrix::from_fn(q.len(), q.len(), |i, j| if i == j { q[i] } else { C64::new(0.0, 0.0) })
    }
}

fn check_phase(chs: &ChannelSet, phi: &PhaseShift) -> Result<(), ConfigError> {
    if phi.len() != chs.irs_elements() {
        return Err(ConfigError::PhaseLength {
            expected: chs.irs_elements(),
            got: phi.len(),
        });
    }
    Ok(())
}

/// Composite channels `h_k + GΦf_k` for every user, from precomputed `q`.
pub(crate) fn effective_channels_with(chs: &ChannelSet, q: &[C64]) -> Vec<CVector> {
    let nt = chs.bs_antennas();
    let ns = chs.irs_elements();
    (0..chs.users())
        .map(|k| {
            let reflected: Vec<C64> = (0..ns).map(|n| q[n] * chs.f[(n, k)]).collect();
            let mut out = Vec::with_capacity(nt);
            for t in 0..nt {
                let via_irs: C64 = chs.g.row(t).iter().zip(&reflected).map(|(g, r)| g * r).sum();
                out.push(chs.h[(t, k)] + via_irs);
            }
            CVector::new(out)
        })
        .collect()
}

/// `h_k + G·diag(e^{jθ})·f_k`.
pub fn effective_channel(chs: &ChannelSet, phi: &PhaseShift, k: usize) -> Result<CVector, ConfigError> {
    if k >= chs.users() {
        return Err(ConfigError::IndexOutOfRange {
            index: k,
            users: chs.users(),
        });
    }
    check_phase(chs, phi)?;
    let q = phi.coefficients();
    let reflected = CVector::new((0..q.len()).map(|n| q[n] * chs.f[(n, k)]).collect());
    let via_irs = chs.g.mul_vec(&reflected);
    Ok(&chs.h_col(k) + &via_irs)
}

/// Every composite channel, computed once.
pub fn effective_channels(chs: &ChannelSet, phi: &PhaseShift) -> Result<Vec<CVector>, ConfigError> {
    check_phase(chs, phi)?;
    Ok(effective_channels_with(chs, &phi.coefficients()))
}

/// `Nt × (K−1)` matrix of the other users' composite channels, ascending by
/// user index; `Nt × 0` for a single user.
pub fn interference_matrix(chs: &ChannelSet, phi: &PhaseShift, k: usize) -> Result<CMatrix, ConfigError> {
    if k >= chs.users() {
        return Err(ConfigError::IndexOutOfRange {
            index: k,
            users: chs.users(),
        });
    }
    let all = effective_channels(chs, phi)?;
    let others: Vec<CVector> = all
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, v)| v)
        .collect();
    Ok(CMatrix::from_columns(chs.bs_antennas(), &others))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::rng::{stream, Purpose};

    fn cfg(users: usize, nt: usize, ns: usize) -> SystemConfig {
        SystemConfig::from_snr_db(users, nt, ns, 2, 1.0, 2.0, 9)
    }

    #[test]
    fn sampling_is_deterministic_with_expected_shapes() {
        let cfg = cfg(2, 4, 8);
        let a = sample_channels(&cfg, &mut stream(cfg.seed, 0, Purpose::Channels));
        let b = sample_channels(&cfg, &mut stream(cfg.seed, 0, Purpose::Channels));
        assert_eq!(a, b);
        assert_eq!(a.h.shape(), (4, 2));
        assert_eq!(a.g.shape(), (4, 8));
        assert_eq!(a.f.shape(), (8, 2));
        let e = sample_eve_channels(&cfg, &mut stream(cfg.seed, 0, Purpose::Eavesdropper));
        assert_eq!(e.h_e.shape(), (2, 2));
        assert_eq!(e.g_e.shape(), (2, 8));
        let e2 = sample_eve_channels(&cfg, &mut stream(cfg.seed, 0, Purpose::Eavesdropper));
        assert_eq!(e, e2);
    }

    #[test]
    fn sampled_entries_have_unit_variance() {
        let cfg = cfg(10, 100, 100);
        let mut rng = stream(5, 0, Purpose::Channels);
        let chs = sample_channels(&cfg, &mut rng);
        let entries: Vec<C64> = chs
            .h
            .as_slice()
            .iter()
            .chain(chs.g.as_slice())
            .chain(chs.f.as_slice())
            .copied()
            .collect();
        assert!(entries.len() >= 10_000);
        let mean: f64 = entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / entries.len() as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");

        let mut eve_power = 0.0;
        let mut count = 0usize;
        let mut rng = stream(5, 0, Purpose::Eavesdropper);
        let cfg = SystemConfig::from_snr_db(4, 2, 16, 4, 1.0, 2.0, 0);
        while count < 100_000 {
            let s = sample_eve_channels(&cfg, &mut rng);
            for z in s.h_e.as_slice().iter().chain(s.g_e.as_slice()) {
                eve_power += z.norm_sqr();
                count += 1;
            }
        }
        assert!((eve_power / count as f64 - 1.0).abs() < 0.03);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = cfg(2, 4, 8);
        assert!(c.validate().is_ok());
        c.eve_antennas = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroDimension { name: "eve_antennas" }));
        let mut c = cfg(2, 4, 8);
        c.rate = alloc::vec![2.0];
        assert!(matches!(c.validate(), Err(ConfigError::PerUserLength { .. })));
        let mut c = cfg(2, 4, 8);
        c.sigma2_e = 0.0;
        assert!(matches!(c.validate(), Err(ConfigError::NotPositive { .. })));
    }

    #[test]
    fn effective_channel_special_cases() {
        let cfg = cfg(2, 3, 3);
        let mut chs = sample_channels(&cfg, &mut stream(1, 0, Purpose::Channels));
        let phi = PhaseShift::random(3, &mut stream(1, 0, Purpose::Optimizer));

        let mut no_reflect = chs.clone();
        for n in 0..3 {
            no_reflect.f[(n, 0)] = c(0.0, 0.0);
        }
        assert_eq!(effective_channel(&no_reflect, &phi, 0).unwrap(), no_reflect.h_col(0));

        chs.g = CMatrix::identity(3);
        for t in 0..3 {
            chs.h[(t, 1)] = c(0.0, 0.0);
        }
        let eff = effective_channel(&chs, &PhaseShift::zeros(3), 1).unwrap();
        assert!((&eff - &chs.f_col(1)).norm() < 1e-15);

        assert!(matches!(
            effective_channel(&chs, &phi, 2),
            Err(ConfigError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            effective_channel(&chs, &PhaseShift::zeros(2), 0),
            Err(ConfigError::PhaseLength { .. })
        ));
    }

    #[test]
    fn effective_channel_matches_lifted_product() {
        // h_k + E_k q with E_k = G diag(f_k), q = vec(Φ)
        let cfg = cfg(3, 4, 6);
        let chs = sample_channels(&cfg, &mut stream(2, 0, Purpose::Channels));
        let phi = PhaseShift::random(6, &mut stream(2, 1, Purpose::Optimizer));
        let q = phi.coefficients();
        for k in 0..3 {
            let fk = chs.f_col(k);
            let e_k = CMatrix::from_fn(4, 6, |t, n| chs.g[(t, n)] * fk[n]);
            let expected = &chs.h_col(k) + &e_k.mul_vec(&q);
            let got = effective_channel(&chs, &phi, k).unwrap();
            assert!((&got - &expected).norm() < 1e-12);
            // ‖Φ f_k‖ = ‖f_k‖
            let pf = phi.matrix().mul_vec(&fk);
            assert!((pf.norm() - fk.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_channel_is_linear_in_f() {
        let cfg = cfg(1, 3, 4);
        let chs = sample_channels(&cfg, &mut stream(3, 0, Purpose::Channels));
        let phi = PhaseShift::random(4, &mut stream(3, 0, Purpose::Optimizer));
        let base = effective_channel(&chs, &phi, 0).unwrap();
        let mut scaled = chs.clone();
        for n in 0..4 {
            scaled.f[(n, 0)] *= 3.0;
        }
        let h = chs.h_col(0);
        let eff3 = effective_channel(&scaled, &phi, 0).unwrap();
        let lhs = &eff3 - &h;
        let rhs = (&base - &h).scale(c(3.0, 0.0));
        assert!((&lhs - &rhs).norm() < 1e-12);
    }

    #[test]
    fn interference_matrix_ordering() {
        let cfg = cfg(3, 4, 5);
        let chs = sample_channels(&cfg, &mut stream(4, 0, Purpose::Channels));
        let phi = PhaseShift::random(5, &mut stream(4, 0, Purpose::Optimizer));
        let k_tilde = interference_matrix(&chs, &phi, 1).unwrap();
        assert_eq!(k_tilde.shape(), (4, 2));
        assert_eq!(k_tilde.col(0), effective_channel(&chs, &phi, 0).unwrap());
        assert_eq!(k_tilde.col(1), effective_channel(&chs, &phi, 2).unwrap());

        let single = SystemConfig::from_snr_db(1, 4, 5, 2, 1.0, 2.0, 0);
        let chs1 = sample_channels(&single, &mut stream(4, 0, Purpose::Channels));
        assert_eq!(interference_matrix(&chs1, &phi, 0).unwrap().shape(), (4, 0));
    }

    #[test]
    fn phase_shift_wraps_and_is_unit_modulus() {
        let phi = PhaseShift::new(alloc::vec![-0.5, 7.0, core::f64::consts::TAU]);
        for &t in phi.angles() {
            assert!((0.0..core::f64::consts::TAU).contains(&t));
        }
        for z in phi.coefficients().iter() {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
    }
}
