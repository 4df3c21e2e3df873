//! Second moments of the linearized prey-birthrate-noise system.
//!
//! With `d' = J d + (x_st xi, 0)` the vector
//! `psi = (<dX^2>, <dY^2>, <dX dY>)` obeys the closed linear system
//! `psi' = L psi + phi` with `psi(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FluxParams;
use crate::stability::analyze;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentState {
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

impl MomentState {
    pub fn trace(&self) -> f64 {
        self.var_x + self.var_y
    }

    fn as_array(&self) -> [f64; 3] {
        [self.var_x, self.var_y, self.cov_xy]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self {
            var_x: a[0],
            var_y: a[1],
            cov_xy: a[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatrix {
    pub l: [[f64; 3]; 3],
    pub phi: [f64; 3],
}

impl MomentMatrix {
    fn rhs(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = self.phi;
        for (o, row) in out.iter_mut().zip(&self.l) {
            *o += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
        }
        out
    }
}

/// Moment matrix and source at the stationary point `(x_st, y_st)`.
///
/// Rows follow from multiplying the linearized equations by `2 dX`, `2 dY` and
/// `(dY, dX)` and averaging. The covariance row has diagonal entry
/// `(1 - y_st) + (x_st - 1) = x_st - y_st`, which is `0` at the classic point.
/// The source is `2 x_st <dX xi>` with `<dX xi> = x_st A^2 / 2`, the
/// boundary-delta value for the noise column `x_st xi`.
pub fn moment_matrix(x_st: f64, y_st: f64, amplitude: f64) -> MomentMatrix {
    MomentMatrix {
        l: [
            [2.0 * (1.0 - y_st), 0.0, -2.0 * x_st],
            [0.0, 2.0 * (x_st - 1.0), 2.0 * y_st],
            [y_st, -x_st, x_st - y_st],
        ],
        phi: [x_st * x_st * amplitude * amplitude, 0.0, 0.0],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
}

/// RK4 integration of `psi' = L psi + phi` from `psi0` over whole steps of `dt`.
pub fn integrate_moments(
    mm: &MomentMatrix,
    psi0: MomentState,
    dt: f64,
    t_end: f64,
) -> Result<MomentSeries> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "horizon must be non-negative, got {t_end}"
        )));
    }
    let n = (t_end / dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut p = psi0.as_array();
    times.push(0.0);
    states.push(psi0);
    let add =
        |a: [f64; 3], h: f64, k: [f64; 3]| [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2]];
    for k in 1..=n {
        let k1 = mm.rhs(p);
        let k2 = mm.rhs(add(p, dt / 2.0, k1));
        let k3 = mm.rhs(add(p, dt / 2.0, k2));
        let k4 = mm.rhs(add(p, dt, k3));
        for i in 0..3 {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        times.push(k as f64 * dt);
        states.push(MomentState::from_array(p));
    }
    Ok(MomentSeries { times, states })
}

/// Moments for prey-birthrate noise of amplitude `A` at flux `f`, from rest.
pub fn solve_moments(f: FluxParams, amplitude: f64, dt: f64, t_end: f64) -> Result<MomentSeries> {
    let st = analyze(f).physical_point()?;
    integrate_moments(
        &moment_matrix(st.x, st.y, amplitude),
        MomentState::default(),
        dt,
        t_end,
    )
}

/// Exact moments at zero flux:
/// `var_x = A^2/2 (t + sin 2t / 2)`, `var_y = A^2/2 (t - sin 2t / 2)`,
/// `cov = A^2/4 (1 - cos 2t)`.
pub fn closed_form_zero_flux(amplitude: f64, t: f64) -> MomentState {
    let a2 = amplitude * amplitude;
    let s = (2.0 * t).sin() / 2.0;
    MomentState {
        var_x: a2 / 2.0 * (t + s),
        var_y: a2 / 2.0 * (t - s),
        cov_xy: a2 / 4.0 * (1.0 - (2.0 * t).cos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{classify, Regime};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matrix_at_classic_point() {
        let a = 0.07;
        let mm = moment_matrix(1.0, 1.0, a);
        assert_eq!(mm.l, [[0.0, 0.0, -2.0], [0.0, 0.0, 2.0], [1.0, -1.0, 0.0]]);
        assert_eq!(mm.phi, [a * a, 0.0, 0.0]);
        assert_eq!(moment_matrix(1.0, 1.0, 0.0).phi, [0.0; 3]);
    }

    #[test]
    fn matrix_first_row_off_classic() {
        let mm = moment_matrix(1.65, 1.66, 0.02);
        let want = [2.0 * (1.0 - 1.66), 0.0, -2.0 * 1.65];
        for (g, w) in mm.l[0].iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!((mm.l[0][0] + 1.32).abs() < 1e-12 && (mm.l[0][2] + 3.3).abs() < 1e-12);
    }

    #[test]
    fn matrix_spectrum_is_pairwise_eigenvalue_sums() {
        // second moments of a 2-D linear system evolve with 2 l1, 2 l2, l1 + l2
        for f in [
            FluxParams::new(1.1, -1.09),
            FluxParams::new(-0.1, 0.3),
            FluxParams::new(0.4, 0.2),
        ] {
            let st = analyze(f).physical_point().unwrap();
            let (x, y) = (st.x, st.y);
            let l = moment_matrix(x, y, 0.0).l;
            let trace = l[0][0] + l[1][1] + l[2][2];
            let det = l[0][0] * (l[1][1] * l[2][2] - l[1][2] * l[2][1])
                - l[0][1] * (l[1][0] * l[2][2] - l[1][2] * l[2][0])
                + l[0][2] * (l[1][0] * l[2][1] - l[1][1] * l[2][0]);
            assert!((trace - 3.0 * (x - y)).abs() < 1e-12);
            assert!((det - 4.0 * (x + y - 1.0) * (x - y)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_pins() {
        let a = 0.07;
        assert_eq!(closed_form_zero_flux(a, 0.0), MomentState::default());
        let m = closed_form_zero_flux(a, PI);
        assert!((m.var_x - a * a * PI / 2.0).abs() < 1e-15);
        assert!((m.var_y - a * a * PI / 2.0).abs() < 1e-15);
        assert!(m.cov_xy.abs() < 1e-15);
        for t in [0.3, 1.7, 12.0, 49.9] {
            assert!((closed_form_zero_flux(a, t).trace() - a * a * t).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_satisfies_moment_system() {
        // central differences of the closed form against L psi + phi
        let a = 0.07;
        let mm = moment_matrix(1.0, 1.0, a);
        let h = 1e-5;
        for t in [0.5, 2.0, 7.3] {
            let d = |f: fn(&MomentState) -> f64| {
                (f(&closed_form_zero_flux(a, t + h)) - f(&closed_form_zero_flux(a, t - h)))
                    / (2.0 * h)
            };
            let lhs = [d(|m| m.var_x), d(|m| m.var_y), d(|m| m.cov_xy)];
            let rhs = mm.rhs(closed_form_zero_flux(a, t).as_array());
            for (l, r) in lhs.iter().zip(rhs) {
                assert!((l - r).abs() < 1e-10, "t={t}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn numeric_solution_matches_closed_form() {
        let a = 0.07;
        let s = solve_moments(FluxParams::CLASSIC, a, 0.01, 50.0).unwrap();
        for (t, m) in s.times.iter().zip(&s.states).skip(1) {
            let c = closed_form_zero_flux(a, *t);
            assert!(rel(m.trace(), a * a * t) < 1e-6, "t={t}");
            assert!(rel(m.var_x, c.var_x) < 1e-4, "t={t}");
            assert!(rel(m.var_y, c.var_y) < 1e-4, "t={t}");
            // cov vanishes at t = k pi; compare absolutely there
            assert!(
                (m.cov_xy - c.cov_xy).abs() <= 1e-4 * c.cov_xy.abs().max(a * a * 1e-3),
                "t={t}"
            );
        }
    }

    #[test]
    fn zero_amplitude_stays_at_rest() {
        let s = solve_moments(FluxParams::new(1.1, -1.09), 0.0, 0.01, 10.0).unwrap();
        assert!(s.states.iter().all(|m| *m == MomentState::default()));
    }

    #[test]
    fn cauchy_schwarz_along_solution() {
        for f in [
            FluxParams::CLASSIC,
            FluxParams::new(1.1, -1.09),
            FluxParams::new(-0.1, 0.3),
        ] {
            let s = solve_moments(f, 0.05, 0.01, 30.0).unwrap();
            for m in &s.states {
                assert!(m.var_x >= 0.0 && m.var_y >= 0.0);
                assert!(m.cov_xy * m.cov_xy <= m.var_x * m.var_y + 1e-9);
            }
        }
    }

    #[test]
    fn homogeneous_part_decays_when_stable() {
        let f = FluxParams::new(-0.1, 0.3);
        assert_eq!(classify(f), Regime::Stable);
        let st = analyze(f).physical_point().unwrap();
        let mm = moment_matrix(st.x, st.y, 0.0);
        let psi0 = MomentState {
            var_x: 1.0,
            var_y: 1.0,
            cov_xy: 0.0,
        };
        let s = integrate_moments(&mm, psi0, 0.01, 60.0).unwrap();
        let norm = |m: &MomentState| m.var_x.hypot(m.var_y).hypot(m.cov_xy);
        assert!(norm(s.states.last().unwrap()) < 0.01 * norm(&psi0));
    }

    #[test]
    fn requires_stationary_point() {
        assert!(matches!(
            solve_moments(FluxParams::new(-1.0, 2.0), 0.1, 0.01, 1.0),
            Err(Error::NoStationaryPoint(Regime::NoStationary))
        ));
        assert!(solve_moments(FluxParams::CLASSIC, 0.1, 0.0, 1.0).is_err());
    }
}
