//! Optimal per-user receive vectors at a fixed phase shift.
//!
//! At fixed `Φ` the users decouple and `z_k` is an increasing affine map of
//! the generalized Rayleigh quotient `wᴴA_kw / wᴴB_kw`, so the leading
//! generalized eigenvector of `(A_k, B_k)` is optimal for both the SOP and the
//! SINR objective.

use alloc::vec::Vec;

use crate::channel::{ChannelSet, PhaseShift, SystemConfig};
use crate::linalg::{generalized_max_eigvec, CMatrix, CVector, LinalgError};
use crate::metrics::{ratio_form, MetricsError, RatioForm};

/// Unit-norm tolerance on receiver rows.
pub const UNIT_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReceiverError {
    #[error("receive vector {index} has norm {norm}, expected 1")]
    NotUnitNorm { index: usize, norm: f64 },
    #[error("receive vectors have inconsistent lengths")]
    RaggedRows,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Receive matrix `W`; row `k` is `w_kᴴ`, each `w_k` unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveMatrix {
    w: Vec<CVector>,
}

impl ReceiveMatrix {
    /// Takes the vectors `w_k` (not their adjoints).
    pub fn new(w: Vec<CVector>) -> Result<Self, ReceiverError> {
        if let Some(first) = w.first() {
            if w.iter().any(|v| v.len() != first.len()) {
                return Err(ReceiverError::RaggedRows);
            }
        }
        for (index, v) in w.iter().enumerate() {
            let norm = v.norm();
            if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
                return Err(ReceiverError::NotUnitNorm { index, norm });
            }
        }
        Ok(Self { w })
    }

    /// Normalizes each vector; zero vectors become `e_1`.
    pub fn from_unnormalized(w: Vec<CVector>) -> Self {
        Self {
            w: w.into_iter()
                .map(|v| {
                    let len = v.len();
                    v.normalized().unwrap_or_else(|| CVector::basis(len, 0))
                })
                .collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.w.len()
    }

    pub fn bs_antennas(&self) -> usize {
        self.w.first().map_or(0, |v| v.len())
    }

    /// `w_k`.
    pub fn w(&self, k: usize) -> &CVector {
        &self.w[k]
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.w
    }

    /// `W` as a `K × Nt` matrix with rows `w_kᴴ`.
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.users(), self.bs_antennas(), |k, t| self.w[k][t].conj())
    }
}

/// Maximizer of the quotient for one ratio form, with the maximal quotient.
///
/// A zero signal matrix has no preferred direction; `e_1` is returned with
/// quotient 0.
pub fn optimal_receiver(form: &RatioForm) -> Result<(f64, CVector), ReceiverError> {
    let n = form.a.rows();
    if form.a.max_abs() == 0.0 {
        return Ok((0.0, CVector::basis(n, 0)));
    }
    Ok(generalized_max_eigvec(&form.a, &form.b)?)
}

/// Receive vectors maximizing every user's `z_k` (and SINR) at phase `phi`.
pub fn optimize_receivers(
    chs: &ChannelSet,
    phi: &PhaseShift,
    cfg: &SystemConfig,
) -> Result<ReceiveMatrix, ReceiverError> {
    let mut w = Vec::with_capacity(cfg.users);
    for k in 0..cfg.users {
        let form = ratio_form(chs, phi, cfg, k)?;
        w.push(optimal_receiver(&form)?.1);
    }
    Ok(ReceiveMatrix { w })
}
