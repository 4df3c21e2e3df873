//! Ensemble statistics over independent noisy trajectories: mean squared
//! displacement from the stationary point, the slope coefficient `alpha` of
//! `msd ~ alpha A^2 t`, and noise/displacement correlations.
//!
//! Trajectory `i` always draws from random stream `i` of the master seed, and
//! partial sums are combined in a fixed chunk order, so results do not depend
//! on how many worker threads run the ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{SimConfig, Stepper};
use crate::model::State;
use crate::stability::analyze;

/// Trajectories per reduction chunk. Fixed so that summation order is too.
const CHUNK: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdSeries {
    pub times: Vec<f64>,
    /// `<(x - x_st)^2 + (y - y_st)^2>` over trajectories still valid at each time.
    pub msd: Vec<f64>,
    /// Number of trajectories contributing at each time.
    pub valid: Vec<usize>,
    pub m: usize,
}

impl MsdSeries {
    pub fn at(&self, t: f64) -> Option<f64> {
        let k = self
            .times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9 * t.abs().max(1.0))?;
        Some(self.msd[k])
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Default fit window `[t_end / 10, t_end]`.
    pub fn default_window(&self) -> (f64, f64) {
        let t = self.t_end();
        (t / 10.0, t)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "ensemble size must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Displacement of the stepper state from the stationary point.
fn displacement(cfg: &SimConfig, st: State, s: State) -> State {
    if cfg.linearized {
        s
    } else {
        State::new(s.x - st.x, s.y - st.y)
    }
}

/// Squared displacements of trajectory `index` until it fails or ends.
fn squared_displacements(cfg: &SimConfig, st: State, index: usize) -> Result<Vec<f64>> {
    let mut stepper = Stepper::new(cfg, index as u64)?;
    let n = cfg.steps();
    let mut out = Vec::with_capacity(n + 1);
    if !stepper.is_valid(&stepper.state) {
        return Ok(out);
    }
    out.push(displacement(cfg, st, stepper.state).norm_sq());
    for _ in 0..n {
        let step = stepper.advance();
        if !stepper.is_valid(&step.after) {
            break;
        }
        out.push(displacement(cfg, st, step.after).norm_sq());
    }
    Ok(out)
}

/// Runs `m` trajectories of `cfg` (full or linearized as configured) and
/// averages the squared displacement from the stationary point.
pub fn run_msd(cfg: &SimConfig, m: usize) -> Result<MsdSeries> {
    check_m(m)?;
    cfg.validate()?;
    let st = analyze(cfg.flux).physical_point()?;
    let n = cfg.steps() + 1;

    let partials: Vec<(Vec<f64>, Vec<usize>)> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<(Vec<f64>, Vec<usize>)> {
            let mut sum = vec![0.0; n];
            let mut count = vec![0usize; n];
            for i in c * CHUNK..((c + 1) * CHUNK).min(m) {
                for (k, d2) in squared_displacements(cfg, st, i)?.into_iter().enumerate() {
                    sum[k] += d2;
                    count[k] += 1;
                }
            }
            Ok((sum, count))
        })
        .collect::<Result<_>>()?;

    let mut sum = vec![0.0; n];
    let mut valid = vec![0usize; n];
    for (s, c) in &partials {
        for k in 0..n {
            sum[k] += s[k];
            valid[k] += c[k];
        }
    }
    let mut msd: Vec<f64> = sum
        .iter()
        .zip(&valid)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    // all members share the start; avoid the rounding of sum / m
    if valid[0] > 0 {
        msd[0] = cfg.start.dist_sq(&st);
    }
    Ok(MsdSeries {
        times: (0..n).map(|k| cfg.time(k)).collect(),
        msd,
        valid,
        m,
    })
}

/// Per-step sums of (xi dX, xi dY) and their counts for one chunk.
type PairSums = (Vec<(f64, f64)>, Vec<usize>);

/// Least-squares slope of `msd` against `t` through the origin over
/// `[t_min, t_max]`, divided by `A^2`.
pub fn fit_alpha(series: &MsdSeries, amplitude: f64, t_min: f64, t_max: f64) -> Result<f64> {
    if amplitude.is_nan() || amplitude <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "alpha is undefined for amplitude {amplitude}"
        )));
    }
    let (mut stt, mut stm) = (0.0, 0.0);
    let mut used = 0usize;
    for ((&t, &msd), &c) in series.times.iter().zip(&series.msd).zip(&series.valid) {
        if t >= t_min - 1e-12 && t <= t_max + 1e-12 && c > 0 && t > 0.0 {
            stt += t * t;
            stm += t * msd;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::InvalidConfig(format!(
            "fit window [{t_min}, {t_max}] contains no samples"
        )));
    }
    Ok(stm / stt / (amplitude * amplitude))
}

/// Time-averaged `<xi dX>` and `<xi dY>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCorrelation {
    pub xi_dx: f64,
    pub xi_dy: f64,
}

/// Estimates `<xi(t) dX(t)>` and `<xi(t) dY(t)>`.
///
/// Each step's draw is paired with the displacement at the middle of that
/// step, the mean of its start and end states. Pairing with the start alone
/// gives zero and with the end alone gives the full `A^2` column weight; the
/// midpoint carries the half weight of a delta correlator sitting on the
/// boundary of the integration interval. The ensemble average at each step is
/// then averaged over steps ending in `[t_min, t_end]`.
pub fn noise_displacement_correlation(
    cfg: &SimConfig,
    m: usize,
    t_min: f64,
) -> Result<NoiseCorrelation> {
    check_m(m)?;
    cfg.validate()?;
    let st = analyze(cfg.flux).physical_point()?;
    if cfg.noise.is_none() {
        return Ok(NoiseCorrelation {
            xi_dx: 0.0,
            xi_dy: 0.0,
        });
    }
    let n = cfg.steps();

    let partials: Vec<PairSums> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<_> {
            let mut sum = vec![(0.0, 0.0); n];
            let mut count = vec![0usize; n];
            for i in c * CHUNK..((c + 1) * CHUNK).min(m) {
                let mut stepper = Stepper::new(cfg, i as u64)?;
                if !stepper.is_valid(&stepper.state) {
                    continue;
                }
                for k in 0..n {
                    let step = stepper.advance();
                    if !stepper.is_valid(&step.after) {
                        break;
                    }
                    let a = displacement(cfg, st, step.before);
                    let b = displacement(cfg, st, step.after);
                    sum[k].0 += step.xi * 0.5 * (a.x + b.x);
                    sum[k].1 += step.xi * 0.5 * (a.y + b.y);
                    count[k] += 1;
                }
            }
            Ok((sum, count))
        })
        .collect::<Result<_>>()?;

    let mut sum = vec![(0.0, 0.0); n];
    let mut count = vec![0usize; n];
    for (s, c) in &partials {
        for k in 0..n {
            sum[k].0 += s[k].0;
            sum[k].1 += s[k].1;
            count[k] += c[k];
        }
    }

    let (mut ax, mut ay, mut used) = (0.0, 0.0, 0usize);
    for k in 0..n {
        let t = cfg.time(k + 1);
        if t + 1e-12 < t_min || count[k] == 0 {
            continue;
        }
        ax += sum[k].0 / count[k] as f64;
        ay += sum[k].1 / count[k] as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidConfig(format!(
            "averaging window starting at {t_min} contains no steps"
        )));
    }
    Ok(NoiseCorrelation {
        xi_dx: ax / used as f64,
        xi_dy: ay / used as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget};

    fn series(times: Vec<f64>, msd: Vec<f64>) -> MsdSeries {
        let n = times.len();
        MsdSeries {
            times,
            msd,
            valid: vec![1; n],
            m: 1,
        }
    }

    #[test]
    fn alpha_of_exact_lines() {
        let a = 0.07;
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.5).collect();
        let one = series(t.clone(), t.iter().map(|t| a * a * t).collect());
        let two = series(t.clone(), t.iter().map(|t| 2.0 * a * a * t).collect());
        assert!((fit_alpha(&one, a, 5.0, 50.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((fit_alpha(&two, a, 5.0, 50.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_alpha(&one, a, 60.0, 70.0).is_err());
        assert!(fit_alpha(&one, 0.0, 5.0, 50.0).is_err());
    }

    #[test]
    fn zero_noise_at_stationary_point() {
        let cfg = SimConfig::new(FluxParams::CLASSIC, State::new(1.0, 1.0), 0.05, 10.0).with_noise(
            NoiseSpec::new(NoiseTarget::K1, 0.0, NoiseDistribution::Uniform),
        );
        let s = run_msd(&cfg, 8).unwrap();
        assert!(s.msd.iter().all(|&v| v == 0.0));
        assert!(s.valid.iter().all(|&c| c == 8));
        let c = noise_displacement_correlation(&cfg, 8, 1.0).unwrap();
        assert_eq!((c.xi_dx, c.xi_dy), (0.0, 0.0));
    }

    #[test]
    fn initial_msd_is_exact() {
        let cfg =
            SimConfig::new(FluxParams::new(0.1, 0.0), State::new(2.0, 0.5), 0.05, 1.0).with_noise(
                NoiseSpec::new(NoiseTarget::K3, 0.05, NoiseDistribution::Gaussian),
            );
        let st = analyze(cfg.flux).physical_point().unwrap();
        for linearized in [false, true] {
            let s = run_msd(&cfg.linearized(linearized), 5).unwrap();
            assert_eq!(s.msd[0], cfg.start.dist_sq(&st));
        }
    }

    #[test]
    fn failed_trajectories_are_dropped() {
        // strong prey noise near a weakly physical point: some runs die
        let cfg = SimConfig::new(FluxParams::new(-0.2, 0.0), State::new(1.0, 0.8), 0.05, 40.0)
            .with_noise(NoiseSpec::new(
                NoiseTarget::K1,
                0.6,
                NoiseDistribution::Gaussian,
            ));
        let s = run_msd(&cfg, 64).unwrap();
        assert_eq!(s.valid[0], 64);
        assert!(s.valid.windows(2).all(|w| w[1] <= w[0]));
        assert!(*s.valid.last().unwrap() < 64);
        for (v, c) in s.msd.iter().zip(&s.valid) {
            assert!(*c == 0 || *v >= 0.0);
        }
    }

    #[test]
    fn no_stationary_point() {
        let cfg = SimConfig::new(FluxParams::new(-1.0, 2.0), State::new(1.0, 1.0), 0.05, 1.0);
        assert!(matches!(run_msd(&cfg, 4), Err(Error::NoStationaryPoint(_))));
        assert!(run_msd(&cfg, 0).is_err());
    }
}
