//! Fixed-step integration of the full nonlinear system and of its
//! linearization about the stationary point.
//!
//! Every run uses the classical four-stage Runge-Kutta step. In stochastic runs
//! the perturbation `xi` is drawn once per step and held constant across the
//! four stages, so the forcing is piecewise constant with per-step standard
//! deviation `A/sqrt(dt)`. With `A = 0` the stochastic path reproduces the
//! deterministic one bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    deterministic_rhs, draw, perturbed_rhs, FluxParams, NoiseSpec, NoiseStream, State,
};
use crate::stability::{analyze, jacobian};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub flux: FluxParams,
    pub noise: Option<NoiseSpec>,
    /// Initial state in absolute coordinates, also for linearized runs.
    pub start: State,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Integrate the deviations from the stationary point under the
    /// linearized dynamics instead of the full system.
    pub linearized: bool,
}

impl SimConfig {
    pub fn new(flux: FluxParams, start: State, dt: f64, t_end: f64) -> Self {
        Self {
            flux,
            noise: None,
            start,
            dt,
            t_end,
            seed: 0,
            linearized: false,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn linearized(mut self, on: bool) -> Self {
        self.linearized = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if !self.start.is_finite() || !self.flux.bx.is_finite() || !self.flux.by.is_finite() {
            return Err(Error::InvalidConfig(
                "start and fluxes must be finite".into(),
            ));
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    /// Number of whole steps; any partial final step is dropped.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, s: State) {
        self.times.push(t);
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Result of a run that may stop early.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    /// States up to the last valid one.
    pub trajectory: Trajectory,
    /// Time of the first state that left the physical quadrant (or, for
    /// linearized runs, became non-finite).
    pub nonphysical_at: Option<f64>,
}

impl Run {
    pub fn into_result(self) -> Result<Trajectory> {
        match self.nonphysical_at {
            Some(t) => Err(Error::NonPhysicalState { t }),
            None => Ok(self.trajectory),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Dynamics {
    Full,
    /// `d' = J d + column * xi`.
    Linear {
        jac: [[f64; 2]; 2],
        column: (f64, f64),
    },
}

/// One RK4 step with the perturbation frozen at `xi`.
#[inline]
fn rk4<F: Fn(State) -> (f64, f64)>(s: State, h: f64, rhs: F) -> State {
    let k1 = rhs(s);
    let k2 = rhs(s.axpy(h / 2.0, k1));
    let k3 = rhs(s.axpy(h / 2.0, k2));
    let k4 = rhs(s.axpy(h, k3));
    State::new(
        s.x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        s.y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Sequential advance of a single path.
pub(crate) struct Stepper {
    flux: FluxParams,
    noise: Option<NoiseSpec>,
    dynamics: Dynamics,
    stream: NoiseStream,
    scale: f64,
    dt: f64,
    pub(crate) state: State,
}

/// One completed step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub xi: f64,
    pub before: State,
    pub after: State,
}

impl Stepper {
    /// `stream_index` selects the random stream under `cfg.seed`.
    pub(crate) fn new(cfg: &SimConfig, stream_index: u64) -> Result<Self> {
        cfg.validate()?;
        let (dynamics, state) = if cfg.linearized {
            let st = analyze(cfg.flux).physical_point()?;
            let column = cfg
                .noise
                .map(|n| n.target.noise_column(st.x, st.y))
                .unwrap_or((0.0, 0.0));
            (
                Dynamics::Linear {
                    jac: jacobian(st),
                    column,
                },
                State::new(cfg.start.x - st.x, cfg.start.y - st.y),
            )
        } else {
            (Dynamics::Full, cfg.start)
        };
        Ok(Self {
            flux: cfg.flux,
            noise: cfg.noise,
            dynamics,
            stream: NoiseStream::new(cfg.seed, stream_index),
            scale: cfg
                .noise
                .map(|n| n.amplitude / cfg.dt.sqrt())
                .unwrap_or(0.0),
            dt: cfg.dt,
            state,
        })
    }

    pub(crate) fn advance(&mut self) -> Step {
        let before = self.state;
        let (xi, after) = match (self.noise, self.dynamics) {
            (None, Dynamics::Full) => {
                let f = self.flux;
                (0.0, rk4(before, self.dt, |s| deterministic_rhs(s, f)))
            }
            (Some(spec), Dynamics::Full) => {
                let xi = draw(&spec, self.scale, &mut self.stream);
                let f = self.flux;
                (
                    xi,
                    rk4(before, self.dt, |s| perturbed_rhs(s, f, spec.target, xi)),
                )
            }
            (noise, Dynamics::Linear { jac, column }) => {
                let xi = match noise {
                    Some(spec) => draw(&spec, self.scale, &mut self.stream),
                    None => 0.0,
                };
                let rhs = |d: State| {
                    (
                        jac[0][0] * d.x + jac[0][1] * d.y + column.0 * xi,
                        jac[1][0] * d.x + jac[1][1] * d.y + column.1 * xi,
                    )
                };
                (xi, rk4(before, self.dt, rhs))
            }
        };
        self.state = after;
        Step { xi, before, after }
    }

    pub(crate) fn is_valid(&self, s: &State) -> bool {
        match self.dynamics {
            Dynamics::Full => s.is_physical(),
            Dynamics::Linear { .. } => s.is_finite(),
        }
    }
}

/// Runs `cfg` on random stream `stream_index`, stopping at the first invalid state.
pub fn simulate_stream(cfg: &SimConfig, stream_index: u64) -> Result<Run> {
    let mut stepper = Stepper::new(cfg, stream_index)?;
    let n = cfg.steps();
    let mut trajectory = Trajectory::with_capacity(n + 1);
    if !stepper.is_valid(&stepper.state) {
        return Ok(Run {
            trajectory,
            nonphysical_at: Some(0.0),
        });
    }
    trajectory.push(0.0, stepper.state);
    for k in 1..=n {
        let step = stepper.advance();
        let t = cfg.time(k);
        if !stepper.is_valid(&step.after) {
            return Ok(Run {
                trajectory,
                nonphysical_at: Some(t),
            });
        }
        trajectory.push(t, step.after);
    }
    Ok(Run {
        trajectory,
        nonphysical_at: None,
    })
}

/// Runs `cfg` as configured: full or linearized, with or without noise.
pub fn simulate(cfg: &SimConfig) -> Result<Run> {
    simulate_stream(cfg, 0)
}

/// Deterministic run of the full system; noise settings in `cfg` are ignored.
pub fn integrate_deterministic(cfg: &SimConfig) -> Result<Trajectory> {
    let cfg = SimConfig {
        noise: None,
        linearized: false,
        ..*cfg
    };
    simulate(&cfg)?.into_result()
}

/// Stochastic run of the full system.
pub fn integrate_stochastic(cfg: &SimConfig) -> Result<Trajectory> {
    if cfg.noise.is_none() {
        return Err(Error::InvalidConfig(
            "stochastic run requires a noise spec".into(),
        ));
    }
    let cfg = SimConfig {
        linearized: false,
        ..*cfg
    };
    simulate(&cfg)?.into_result()
}

/// Run of the deviations `(x - x_st, y - y_st)` under the linearized dynamics,
/// with the noise entering through the column of `cfg.noise.target`.
pub fn integrate_linearized(cfg: &SimConfig) -> Result<Trajectory> {
    let cfg = SimConfig {
        linearized: true,
        ..*cfg
    };
    simulate(&cfg)?.into_result()
}

/// `x - ln x + y - ln y`, conserved by the classic system.
pub fn first_integral(s: State) -> f64 {
    s.x - s.x.ln() + s.y - s.y.ln()
}
