use lvflux::basin::{converges, map_basin, BasinConfig, Outcome};
use lvflux::stability::{steady_state, Axis};
use lvflux::{Error, FluxParams, State};

const FIG_B: FluxParams = FluxParams { bx: -0.1, by: 0.3 };

#[test]
fn stationary_neighbourhood_converges() {
    let cfg = BasinConfig::default();
    for f in [FIG_B, FluxParams::new(0.5, 0.2), FluxParams::new(0.0, 0.5)] {
        let st = steady_state(f).unwrap();
        assert_eq!(converges(f, st, &cfg).unwrap(), Outcome::Converged);
        for k in 0..8 {
            let phi = k as f64 * std::f64::consts::FRAC_PI_4;
            let s = State::new(st.x + 1e-3 * phi.cos(), st.y + 1e-3 * phi.sin());
            assert_eq!(
                converges(f, s, &cfg).unwrap(),
                Outcome::Converged,
                "{f:?} k={k}"
            );
        }
    }
}

#[test]
fn halving_step_keeps_converged_cells() {
    let cfg = BasinConfig::default();
    let fine = BasinConfig {
        dt: cfg.dt / 2.0,
        ..cfg
    };
    let axis = Axis::new(0.0, 2.0, 0.25).unwrap();
    let grid = map_basin(FIG_B, axis, axis, &cfg).unwrap();
    let mut checked = 0;
    for (x, y, _) in grid.iter().filter(|c| c.2 == Outcome::Converged) {
        assert_eq!(
            converges(FIG_B, State::new(x, y), &fine).unwrap(),
            Outcome::Converged,
            "({x},{y})"
        );
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn converged_area_is_resolution_stable() {
    let cfg = BasinConfig::default();
    let area = |step| {
        let axis = Axis::new(0.0, 2.0, step).unwrap();
        map_basin(FIG_B, axis, axis, &cfg).unwrap().converged_area()
    };
    let (coarse, fine) = (area(0.05), area(0.025));
    assert!((coarse - fine).abs() / fine < 0.05, "{coarse} vs {fine}");
}

#[test]
fn grid_outcomes_match_pointwise_calls() {
    let cfg = BasinConfig {
        t_max: 300.0,
        ..BasinConfig::default()
    };
    let axis = Axis::new(0.0, 3.0, 0.5).unwrap();
    let grid = map_basin(FIG_B, axis, axis, &cfg).unwrap();
    for (x, y, o) in grid.iter() {
        assert_eq!(converges(FIG_B, State::new(x, y), &cfg).unwrap(), o);
    }
    assert_eq!(grid.get(0, 0), Outcome::NonPhysical);
}

#[test]
fn unstable_flux_is_rejected() {
    let err = converges(
        FluxParams::new(-0.1, 0.0),
        State::new(1.0, 1.0),
        &BasinConfig::default(),
    );
    assert!(matches!(err, Err(Error::NotStableRegime(_))));
}
