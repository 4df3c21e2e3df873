//! Flux-modified Lotka-Volterra vector field and the noise model.
//!
//! All quantities are dimensionless with the asymmetry parameter fixed at 1:
//!
//! ```text
//! dx/dt = x - x*y + bx
//! dy/dt = x*y - y + by
//! ```
//!
//! Noise perturbs exactly one kinetic coefficient or flux. In a discrete run
//! the perturbation is drawn once per step with standard deviation `A/sqrt(dt)`,
//! so the integrated impulse over a step has variance `A^2 dt` regardless of
//! the step size.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant external fluxes. Negative values mean hunting, positive sponsoring.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluxParams {
    pub bx: f64,
    pub by: f64,
}

impl FluxParams {
    pub const CLASSIC: FluxParams = FluxParams { bx: 0.0, by: 0.0 };

    pub fn new(bx: f64, by: f64) -> Self {
        Self { bx, by }
    }
}

/// Reduced prey (`x`) and predator (`y`) populations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Both populations strictly positive and finite.
    pub fn is_physical(&self) -> bool {
        self.is_finite() && self.x > 0.0 && self.y > 0.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist_sq(&self, other: &State) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub(crate) fn axpy(&self, h: f64, d: (f64, f64)) -> State {
        State::new(self.x + h * d.0, self.y + h * d.1)
    }
}

/// The single term that carries the Langevin perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTarget {
    /// Prey birthrate: `(1+xi) x`.
    K1,
    /// Prey loss on encounters: `(1+xi) x y` in the prey equation.
    K2,
    /// Predator gain on encounters: `(1+xi) x y` in the predator equation.
    K3,
    /// Predator death rate: `(1+xi) y`.
    K4,
    /// Prey flux: `bx + xi`.
    FluxX,
    /// Predator flux: `by + xi`.
    FluxY,
}

impl NoiseTarget {
    pub const ALL: [NoiseTarget; 6] = [
        NoiseTarget::K1,
        NoiseTarget::K2,
        NoiseTarget::K3,
        NoiseTarget::K4,
        NoiseTarget::FluxX,
        NoiseTarget::FluxY,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseTarget::K1 => "k1",
            NoiseTarget::K2 => "k2",
            NoiseTarget::K3 => "k3",
            NoiseTarget::K4 => "k4",
            NoiseTarget::FluxX => "flux-x",
            NoiseTarget::FluxY => "flux-y",
        }
    }

    /// Column multiplying `xi` in the linearization about `(x_st, y_st)`.
    pub fn noise_column(&self, x_st: f64, y_st: f64) -> (f64, f64) {
        match self {
            NoiseTarget::K1 => (x_st, 0.0),
            NoiseTarget::K2 => (-x_st * y_st, 0.0),
            NoiseTarget::K3 => (0.0, x_st * y_st),
            NoiseTarget::K4 => (0.0, -y_st),
            NoiseTarget::FluxX => (1.0, 0.0),
            NoiseTarget::FluxY => (0.0, 1.0),
        }
    }
}

impl fmt::Display for NoiseTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        NoiseTarget::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown noise target `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    /// Scaled uniform step law `sqrt(3) (2u - 1)`.
    #[default]
    Uniform,
    /// Box-Muller normal deviate.
    Gaussian,
}

impl NoiseDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseDistribution::Uniform => "uniform",
            NoiseDistribution::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for NoiseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(NoiseDistribution::Uniform),
            "gaussian" => Ok(NoiseDistribution::Gaussian),
            _ => Err(format!("unknown distribution `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub target: NoiseTarget,
    /// Amplitude `A` of the correlator `<xi(t) xi(t')> = A^2 delta(t - t')`.
    pub amplitude: f64,
    pub distribution: NoiseDistribution,
}

impl NoiseSpec {
    pub fn new(target: NoiseTarget, amplitude: f64, distribution: NoiseDistribution) -> Self {
        Self {
            target,
            amplitude,
            distribution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Random stream for one trajectory.
///
/// Streams sharing a master seed but differing in index are independent
/// ChaCha8 streams, so trajectory `i` of an ensemble sees the same draws no
/// matter which worker runs it.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `(0, 1)`; an exact zero is replaced by the smallest positive normal.
    pub fn uniform_open(&mut self) -> f64 {
        let u = self.uniform();
        if u == 0.0 {
            f64::MIN_POSITIVE
        } else {
            u
        }
    }
}

impl rand::RngCore for NoiseStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Right-hand side of the flux-modified system.
#[inline]
pub fn deterministic_rhs(s: State, f: FluxParams) -> (f64, f64) {
    let xy = s.x * s.y;
    (s.x - xy + f.bx, xy - s.y + f.by)
}

/// Right-hand side with `xi` applied to the term selected by `target`.
#[inline]
pub fn perturbed_rhs(s: State, f: FluxParams, target: NoiseTarget, xi: f64) -> (f64, f64) {
    let xy = s.x * s.y;
    match target {
        NoiseTarget::K1 => ((1.0 + xi) * s.x - xy + f.bx, xy - s.y + f.by),
        NoiseTarget::K2 => (s.x - (1.0 + xi) * xy + f.bx, xy - s.y + f.by),
        NoiseTarget::K3 => (s.x - xy + f.bx, (1.0 + xi) * xy - s.y + f.by),
        NoiseTarget::K4 => (s.x - xy + f.bx, xy - (1.0 + xi) * s.y + f.by),
        NoiseTarget::FluxX => (s.x - xy + (f.bx + xi), xy - s.y + f.by),
        NoiseTarget::FluxY => (s.x - xy + f.bx, xy - s.y + (f.by + xi)),
    }
}

/// Draws the per-step perturbation for a step of length `dt`.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, dt: f64, rng: &mut R) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok(draw(spec, spec.amplitude / dt.sqrt(), rng))
}

/// Same as [`sample_noise`] with the scale `A/sqrt(dt)` precomputed.
#[inline]
pub(crate) fn draw<R: Rng + ?Sized>(spec: &NoiseSpec, scale: f64, rng: &mut R) -> f64 {
    match spec.distribution {
        NoiseDistribution::Uniform => {
            let u: f64 = rng.gen();
            scale * 3f64.sqrt() * (2.0 * u - 1.0)
        }
        NoiseDistribution::Gaussian => {
            let u1: f64 = rng.gen();
            let mut u2: f64 = rng.gen();
            if u2 == 0.0 {
                u2 = f64::MIN_POSITIVE;
            }
            scale * (2.0 * PI * u1).sin() * (2.0 * (1.0 / u2).ln()).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        (mean, var, m4 / (var * var) - 3.0)
    }

    fn stream(spec: NoiseSpec, dt: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = NoiseStream::new(seed, 0);
        (0..n)
            .map(|_| sample_noise(&spec, dt, &mut rng).unwrap())
            .collect()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(
            deterministic_rhs(State::new(1.0, 1.0), FluxParams::CLASSIC),
            (0.0, 0.0)
        );
        assert_eq!(
            deterministic_rhs(State::new(1.0, 1.0), FluxParams::new(0.1, 0.0)),
            (0.1, 0.0)
        );
        assert_eq!(
            deterministic_rhs(State::new(2.0, 2.0), FluxParams::CLASSIC),
            (-2.0, 2.0)
        );
    }

    #[test]
    fn perturbed_rhs_examples() {
        let s = State::new(1.0, 1.0);
        let f = FluxParams::CLASSIC;
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::K1, 0.5), (0.5, 0.0));
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::K4, 0.5), (0.0, -0.5));
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::K2, 0.5), (-0.5, 0.0));
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::K3, 0.5), (0.0, 0.5));
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::FluxX, 0.5), (0.5, 0.0));
        assert_eq!(perturbed_rhs(s, f, NoiseTarget::FluxY, 0.5), (0.0, 0.5));
    }

    #[test]
    fn zero_amplitude_draws_zero() {
        for dist in [NoiseDistribution::Uniform, NoiseDistribution::Gaussian] {
            let spec = NoiseSpec::new(NoiseTarget::K1, 0.0, dist);
            assert!(stream(spec, 0.05, 1000, 3).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn rejects_bad_dt() {
        let spec = NoiseSpec::new(NoiseTarget::K1, 0.07, NoiseDistribution::Uniform);
        let mut rng = NoiseStream::new(1, 0);
        assert_eq!(
            sample_noise(&spec, 0.0, &mut rng),
            Err(Error::InvalidTimeStep(0.0))
        );
        assert!(sample_noise(&spec, -0.1, &mut rng).is_err());
    }

    #[test]
    fn uniform_stream_statistics() {
        let (a, dt) = (0.07, 0.05);
        let spec = NoiseSpec::new(NoiseTarget::K1, a, NoiseDistribution::Uniform);
        let xs = stream(spec, dt, 1_000_000, 11);
        let (mean, var, _) = moments(&xs);
        let scale = a / dt.sqrt();
        assert!(mean.abs() < 3.0 * scale * 1e-3, "mean {mean}");
        assert!((var / (a * a / dt) - 1.0).abs() < 0.01, "var {var}");
        let bound = 3f64.sqrt() * scale;
        assert!(xs.iter().all(|x| x.abs() <= bound));
    }

    #[test]
    fn gaussian_stream_statistics() {
        let (a, dt) = (0.07, 0.05);
        let spec = NoiseSpec::new(NoiseTarget::K1, a, NoiseDistribution::Gaussian);
        let xs = stream(spec, dt, 1_000_000, 12);
        let (mean, var, kurt) = moments(&xs);
        let scale = a / dt.sqrt();
        assert!(mean.abs() < 3.0 * scale * 1e-3, "mean {mean}");
        assert!((var / (a * a / dt) - 1.0).abs() < 0.01, "var {var}");
        assert!(kurt.abs() < 0.02, "excess kurtosis {kurt}");
        // unbounded: some draws exceed the uniform law's hard bound
        assert!(xs.iter().any(|x| x.abs() > 3f64.sqrt() * scale));
    }

    #[test]
    fn variance_scales_inversely_with_dt() {
        let spec = NoiseSpec::new(NoiseTarget::K1, 0.07, NoiseDistribution::Uniform);
        let (_, v1, _) = moments(&stream(spec, 0.1, 400_000, 5));
        let (_, v2, _) = moments(&stream(spec, 0.05, 400_000, 6));
        assert!((v2 / v1 - 2.0).abs() < 0.03, "ratio {}", v2 / v1);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = NoiseStream::new(9, 0);
        let mut b = NoiseStream::new(9, 0);
        let mut c = NoiseStream::new(9, 1);
        let xa: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn target_names_round_trip() {
        for t in NoiseTarget::ALL {
            assert_eq!(t.name().parse::<NoiseTarget>().unwrap(), t);
        }
        assert!("k5".parse::<NoiseTarget>().is_err());
    }
}
