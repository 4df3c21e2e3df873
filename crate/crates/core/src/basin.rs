//! Convergence regions around a locally stable stationary point.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{SimConfig, Stepper};
use crate::model::{FluxParams, State};
use crate::stability::{analyze, fill_grid, Axis, Grid, Regime, StationaryAnalysis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    Diverged,
    /// Neither converged nor diverged within the horizon.
    Undecided,
    /// The start itself is outside the positive quadrant.
    NonPhysical,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::Diverged => "diverged",
            Outcome::Undecided => "undecided",
            Outcome::NonPhysical => "non-physical",
        }
    }

    /// Green, red, gray, black.
    pub fn color(&self) -> [u8; 3] {
        match self {
            Outcome::Converged => [0, 200, 0],
            Outcome::Diverged => [255, 0, 0],
            Outcome::Undecided => [128, 128, 128],
            Outcome::NonPhysical => [0, 0, 0],
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Convergence test parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinConfig {
    pub t_max: f64,
    /// Radius of the capture disk around the stationary point.
    pub eps_in: f64,
    /// Escape radius.
    pub r_out: f64,
    pub dt: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        Self {
            t_max: 2000.0,
            eps_in: 1e-3,
            r_out: 1e3,
            dt: 0.01,
        }
    }
}

impl BasinConfig {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.t_max) && ok(self.eps_in) && ok(self.r_out)) {
            return Err(Error::InvalidConfig(
                "t_max, eps_in and r_out must be positive and finite".into(),
            ));
        }
        if !ok(self.dt) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        Ok(())
    }
}

fn stable_analysis(f: FluxParams) -> Result<StationaryAnalysis> {
    let a = analyze(f);
    if a.regime != Regime::Stable {
        return Err(Error::NotStableRegime(a.regime));
    }
    Ok(a)
}

/// Time a trajectory must stay inside the capture disk: one linear period
/// `2 pi / |Im l|`, or one e-folding time of the slower mode at a node.
fn dwell_time(a: &StationaryAnalysis) -> f64 {
    let im = a.lambda1.im.abs();
    if im > 0.0 {
        2.0 * PI / im
    } else {
        1.0 / a.lambda1.re.abs().min(a.lambda2.re.abs())
    }
}

fn converges_with(a: &StationaryAnalysis, start: State, cfg: &BasinConfig) -> Outcome {
    if !start.is_physical() {
        return Outcome::NonPhysical;
    }
    let st = State::new(a.x_st, a.y_st);
    let dwell = dwell_time(a);
    let eps2 = cfg.eps_in * cfg.eps_in;
    let rout2 = cfg.r_out * cfg.r_out;
    let sim = SimConfig::new(a.flux, start, cfg.dt, cfg.t_max);
    let mut stepper = match Stepper::new(&sim, 0) {
        Ok(s) => s,
        Err(_) => return Outcome::NonPhysical,
    };
    let mut inside_since = (start.dist_sq(&st) < eps2).then_some(0.0);
    for k in 1..=sim.steps() {
        let s = stepper.advance().after;
        let t = sim.time(k);
        if !s.is_physical() || s.norm_sq() > rout2 {
            return Outcome::Diverged;
        }
        if s.dist_sq(&st) < eps2 {
            let since = *inside_since.get_or_insert(t);
            if t - since >= dwell {
                return Outcome::Converged;
            }
        } else {
            inside_since = None;
        }
    }
    Outcome::Undecided
}

/// Integrates from `start` and reports whether the flow settles on the
/// stationary point of `f`.
pub fn converges(f: FluxParams, start: State, cfg: &BasinConfig) -> Result<Outcome> {
    cfg.validate()?;
    Ok(converges_with(&stable_analysis(f)?, start, cfg))
}

pub type BasinGrid = Grid<Outcome>;

impl BasinGrid {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.cells.iter().filter(|&&c| c == outcome).count()
    }

    /// Share of all grid nodes that converged.
    pub fn converged_fraction(&self) -> f64 {
        self.count(Outcome::Converged) as f64 / self.cells.len() as f64
    }

    /// Converged share times the area of the mapped window.
    pub fn converged_area(&self) -> f64 {
        let w = self.x_axis.max - self.x_axis.min;
        let h = self.y_axis.max - self.y_axis.min;
        self.converged_fraction() * w * h
    }
}

/// Applies [`converges`] at every node of the `x_axis` by `y_axis` grid.
pub fn map_basin(
    f: FluxParams,
    x_axis: Axis,
    y_axis: Axis,
    cfg: &BasinConfig,
) -> Result<BasinGrid> {
    cfg.validate()?;
    let a = stable_analysis(f)?;
    Ok(fill_grid(x_axis, y_axis, |x, y| {
        converges_with(&a, State::new(x, y), cfg)
    }))
}
