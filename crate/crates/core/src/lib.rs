//! Open Lotka-Volterra predator-prey system with constant external fluxes and
//! Langevin noise on one kinetic coefficient.
//!
//! * [`model`]: vector field, noise placements and per-step noise sampling.
//! * [`stability`]: stationary point, eigenvalues and the `(bx, by)` regime map.
//! * [`integrator`]: deterministic, stochastic and linearized runs.
//! * [`ensemble`]: mean squared displacement, `alpha` fits, noise correlations.
//! * [`moments`]: second-moment equations and their zero-flux closed form.
//! * [`basin`]: convergence regions around stable stationary points.
//! * [`cli`]: the `lvflux` command line and its CSV, JSON and PPM artifacts.

pub mod basin;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod integrator;
pub mod model;
pub mod moments;
pub mod output;
pub mod stability;

pub use error::{Error, Result};
pub use model::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget, State};
pub use stability::Regime;
