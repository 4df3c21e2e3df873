use thiserror::Error;

use crate::stability::Regime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state left the physical quadrant at t={t}")]
    NonPhysicalState { t: f64 },

    #[error("no physical stationary point (regime {0})")]
    NoStationaryPoint(Regime),

    #[error("stationary point is not locally stable (regime {0})")]
    NotStableRegime(Regime),
}

pub type Result<T> = std::result::Result<T, Error>;
