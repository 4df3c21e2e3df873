//! Stationary points, Jacobian eigenvalues and the regime map of the
//! `(bx, by)` plane.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FluxParams, State};

/// Tolerance on the eigenvalue real part separating stable, oscillatory and
/// unstable points.
pub const ZERO_REAL_PART_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Negative discriminant: no stationary point at all.
    NoStationary,
    /// Stationary point with a non-positive coordinate.
    NonPhysical,
    /// Physical point with some eigenvalue real part `>= 0`.
    Unstable,
    /// Purely imaginary eigenvalue pair: perpetual oscillation.
    ZeroStability,
    /// Both real parts negative.
    Stable,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::NoStationary,
        Regime::NonPhysical,
        Regime::Unstable,
        Regime::ZeroStability,
        Regime::Stable,
    ];

    /// Integer code used in CSV output.
    pub fn code(&self) -> u8 {
        match self {
            Regime::NoStationary => 0,
            Regime::NonPhysical => 1,
            Regime::Unstable => 2,
            Regime::ZeroStability => 3,
            Regime::Stable => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Regime> {
        Regime::ALL.get(code as usize).copied()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::NoStationary => "no-stationary",
            Regime::NonPhysical => "non-physical",
            Regime::Unstable => "unstable",
            Regime::ZeroStability => "zero-stability",
            Regime::Stable => "stable",
        }
    }

    /// Red, black, yellow, brown, green.
    pub fn color(&self) -> [u8; 3] {
        match self {
            Regime::NoStationary => [255, 0, 0],
            Regime::NonPhysical => [0, 0, 0],
            Regime::Unstable => [255, 255, 0],
            Regime::ZeroStability => [150, 75, 0],
            Regime::Stable => [0, 200, 0],
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown regime `{s}`"))
    }
}

/// Full stationary-point analysis for one flux pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryAnalysis {
    pub flux: FluxParams,
    pub exists: bool,
    pub discriminant: f64,
    /// NaN when `exists` is false.
    pub x_st: f64,
    pub y_st: f64,
    /// NaN when `exists` is false.
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub regime: Regime,
}

impl StationaryAnalysis {
    pub fn point(&self) -> Option<State> {
        self.exists.then(|| State::new(self.x_st, self.y_st))
    }

    /// The stationary point, provided it is physical.
    pub fn physical_point(&self) -> Result<State> {
        match self.regime {
            Regime::NoStationary | Regime::NonPhysical => {
                Err(Error::NoStationaryPoint(self.regime))
            }
            _ => Ok(State::new(self.x_st, self.y_st)),
        }
    }
}

/// Existence discriminant `(1 - bx - by)^2 / 4 + bx`.
pub fn discriminant(f: FluxParams) -> f64 {
    let s = 1.0 - f.bx - f.by;
    s * s / 4.0 + f.bx
}

/// Stationary point on the `+sqrt(D)` branch, or `None` when `D < 0`.
///
/// The `-sqrt(D)` branch is a second root of the stationary equations; it is
/// not tracked here.
pub fn steady_state(f: FluxParams) -> Option<State> {
    let d = discriminant(f);
    if d < 0.0 {
        return None;
    }
    let r = d.sqrt();
    Some(State::new(
        (1.0 - f.bx - f.by) / 2.0 + r,
        (1.0 + f.bx + f.by) / 2.0 + r,
    ))
}

/// Roots of `l^2 - (x - y) l + (x + y - 1) = 0`, the characteristic equation of
/// the Jacobian at `(x_st, y_st)`. `lambda1` carries the `+` root.
pub fn eigenvalues(x_st: f64, y_st: f64) -> (Complex64, Complex64) {
    let tr = x_st - y_st;
    let radicand = tr * tr + 4.0 * (1.0 - x_st - y_st);
    let half = tr / 2.0;
    if radicand >= 0.0 {
        let r = radicand.sqrt() / 2.0;
        (Complex64::new(half + r, 0.0), Complex64::new(half - r, 0.0))
    } else {
        let r = (-radicand).sqrt() / 2.0;
        (Complex64::new(half, r), Complex64::new(half, -r))
    }
}

/// Jacobian of the vector field at `s` (independent of the fluxes).
pub fn jacobian(s: State) -> [[f64; 2]; 2] {
    [[1.0 - s.y, -s.x], [s.y, s.x - 1.0]]
}

fn classify_eigenvalues(l1: Complex64, l2: Complex64) -> Regime {
    let eps = ZERO_REAL_PART_TOL;
    if l1.re < -eps && l2.re < -eps {
        Regime::Stable
    } else if l1.re.abs() <= eps && l2.re.abs() <= eps && l1.im != 0.0 {
        Regime::ZeroStability
    } else {
        Regime::Unstable
    }
}

pub fn analyze(f: FluxParams) -> StationaryAnalysis {
    let discriminant = discriminant(f);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    match steady_state(f) {
        None => StationaryAnalysis {
            flux: f,
            exists: false,
            discriminant,
            x_st: f64::NAN,
            y_st: f64::NAN,
            lambda1: nan,
            lambda2: nan,
            regime: Regime::NoStationary,
        },
        Some(p) => {
            let (lambda1, lambda2) = eigenvalues(p.x, p.y);
            let regime = if p.x <= 0.0 || p.y <= 0.0 {
                Regime::NonPhysical
            } else {
                classify_eigenvalues(lambda1, lambda2)
            };
            StationaryAnalysis {
                flux: f,
                exists: true,
                discriminant,
                x_st: p.x,
                y_st: p.y,
                lambda1,
                lambda2,
                regime,
            }
        }
    }
}

pub fn classify(f: FluxParams) -> Regime {
    analyze(f).regime
}

/// Inclusive 1-D range sampled at `min + k * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidConfig("range bounds must be finite".into()));
        }
        if min > max {
            return Err(Error::InvalidConfig(format!(
                "inverted range [{min}, {max}]"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self { min, max, step })
    }

    /// `floor((max - min) / step) + 1`, with a small allowance so that a range
    /// that is an integer multiple of the step keeps its end point.
    pub fn nodes(&self) -> usize {
        let n = (self.max - self.min) / self.step;
        (n + 1e-9).floor() as usize + 1
    }

    pub fn value(&self, k: usize) -> f64 {
        self.min + k as f64 * self.step
    }

    /// Index of the node closest to `v`, if `v` lies within half a step of the axis.
    pub fn nearest(&self, v: f64) -> Option<usize> {
        let k = ((v - self.min) / self.step).round();
        if k < 0.0 || k as usize >= self.nodes() {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// Row-major grid: row `i` runs along the second axis, column `j` along the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub cells: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn rows(&self) -> usize {
        self.y_axis.nodes()
    }

    pub fn cols(&self) -> usize {
        self.x_axis.nodes()
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.cells[row * self.cols() + col]
    }

    pub fn at(&self, x: f64, y: f64) -> Option<T> {
        let j = self.x_axis.nearest(x)?;
        let i = self.y_axis.nearest(y)?;
        Some(self.get(i, j))
    }

    /// `(x, y, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, T)> + '_ {
        let cols = self.cols();
        self.cells.iter().enumerate().map(move |(k, &v)| {
            let (i, j) = (k / cols, k % cols);
            (self.x_axis.value(j), self.y_axis.value(i), v)
        })
    }
}

/// Evaluates `cell(x, y)` over the grid in parallel; assembly is index ordered.
pub(crate) fn fill_grid<T, F>(x_axis: Axis, y_axis: Axis, cell: F) -> Grid<T>
where
    T: Send,
    F: Fn(f64, f64) -> T + Sync,
{
    use rayon::prelude::*;
    let cols = x_axis.nodes();
    let n = cols * y_axis.nodes();
    let cells = (0..n)
        .into_par_iter()
        .map(|k| cell(x_axis.value(k % cols), y_axis.value(k / cols)))
        .collect();
    Grid {
        x_axis,
        y_axis,
        cells,
    }
}

pub type RegimeGrid = Grid<Regime>;

pub fn regime_diagram(bx_range: (f64, f64), by_range: (f64, f64), step: f64) -> Result<RegimeGrid> {
    let x_axis = Axis::new(bx_range.0, bx_range.1, step)?;
    let y_axis = Axis::new(by_range.0, by_range.1, step)?;
    Ok(fill_grid(x_axis, y_axis, |bx, by| {
        classify(FluxParams::new(bx, by))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn classic_point() {
        let p = steady_state(FluxParams::CLASSIC).unwrap();
        assert_eq!(p, State::new(1.0, 1.0));
        let (l1, l2) = eigenvalues(1.0, 1.0);
        assert_eq!(l1, Complex64::new(0.0, 1.0));
        assert_eq!(l2, Complex64::new(0.0, -1.0));
        assert_eq!(classify(FluxParams::CLASSIC), Regime::ZeroStability);
    }

    #[test]
    fn figure_stationary_values() {
        let a = steady_state(FluxParams::new(1.1, -1.09)).unwrap();
        assert!(close(a.x, 1.65, 0.01) && close(a.y, 1.66, 0.01), "{a:?}");
        let b = steady_state(FluxParams::new(-0.1, 0.3)).unwrap();
        assert!(close(b.x, 0.64, 0.01) && close(b.y, 0.84, 0.01), "{b:?}");
    }

    #[test]
    fn eigenvalue_examples() {
        // (x-y)/2 = -0.005; sqrt(4(x+y-1) - (x-y)^2)/2 = sqrt(9.2399)/2
        let (l1, l2) = eigenvalues(1.65, 1.66);
        assert!(close(l1.re, -0.005, 1e-12));
        assert!(close(l1.im, 9.2399f64.sqrt() / 2.0, 1e-12));
        assert!(close(l1.im, 1.52, 0.005));
        assert_eq!(l2, l1.conj());

        let p = steady_state(FluxParams::new(-0.1, 0.0)).unwrap();
        assert!(close(p.x, 1.0, 1e-12) && close(p.y, 0.9, 1e-12));
        let (l1, _) = eigenvalues(p.x, p.y);
        assert!(close(l1.re, 0.05, 1e-12) && l1.im > 0.0);
    }

    #[test]
    fn spot_regimes() {
        let cases = [
            ((0.0, 0.0), Regime::ZeroStability),
            ((0.1, 0.0), Regime::Stable),
            ((-0.1, 0.0), Regime::Unstable),
            ((0.0, 0.1), Regime::Stable),
            ((0.0, -0.1), Regime::Unstable),
            ((0.0, 1.5), Regime::NonPhysical),
            ((-1.0, 2.0), Regime::NoStationary),
        ];
        for ((bx, by), want) in cases {
            assert_eq!(classify(FluxParams::new(bx, by)), want, "({bx}, {by})");
        }
        assert_eq!(discriminant(FluxParams::new(-1.0, 2.0)), -1.0);
    }

    #[test]
    fn real_pair_with_zero_member_is_unstable() {
        assert_eq!(
            classify_eigenvalues(Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)),
            Regime::Unstable
        );
    }

    #[test]
    fn missing_point_reports_nan() {
        let a = analyze(FluxParams::new(-1.0, 2.0));
        assert!(!a.exists && a.x_st.is_nan() && a.point().is_none());
        assert_eq!(
            a.physical_point(),
            Err(Error::NoStationaryPoint(Regime::NoStationary))
        );
    }

    #[test]
    fn single_cell_diagram() {
        let g = regime_diagram((0.0, 0.0), (0.0, 0.0), 1.0).unwrap();
        assert_eq!(g.cells, vec![Regime::ZeroStability]);
    }

    #[test]
    fn diagram_rejects_inverted_range() {
        assert!(regime_diagram((1.0, 0.0), (0.0, 1.0), 0.1).is_err());
        assert!(regime_diagram((0.0, 1.0), (0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn axis_length() {
        assert_eq!(Axis::new(-2.0, 2.0, 0.01).unwrap().nodes(), 401);
        assert_eq!(Axis::new(0.0, 1.0, 0.3).unwrap().nodes(), 4);
        assert_eq!(Axis::new(0.0, 0.0, 1.0).unwrap().nodes(), 1);
    }
}
