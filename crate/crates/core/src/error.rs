//! Crate-level error wrapping each module's error type.

use crate::channel::ConfigError;
use crate::dinkelbach::DinkelbachError;
use crate::lift::LiftError;
use crate::linalg::LinalgError;
use crate::metrics::MetricsError;
use crate::receiver::ReceiverError;
use crate::sdp::SdpError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("linear algebra: {0}")]
    Linalg(#[from] LinalgError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("receiver: {0}")]
    Receiver(#[from] ReceiverError),
    #[error("lift: {0}")]
    Lift(#[from] LiftError),
    #[error("sdp: {0}")]
    Sdp(#[from] SdpError),
    #[error("dinkelbach: {0}")]
    Dinkelbach(#[from] DinkelbachError),
    #[error("invalid optimizer setting: {0}")]
    Setting(&'static str),
}

impl Error {
    /// Short stable label for the error's origin.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) | Error::Setting(_) => "config",
            Error::Linalg(_) => "linalg",
            Error::Metrics(_) => "metrics",
            Error::Receiver(_) => "receiver",
            Error::Lift(_) => "lift",
            Error::Sdp(_) => "sdp",
            Error::Dinkelbach(_) => "dinkelbach",
        }
    }
}
