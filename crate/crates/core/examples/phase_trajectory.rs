//! Deterministic and noisy phase orbits of the classic system.

use lvflux::integrator::{
    first_integral, integrate_deterministic, integrate_stochastic, SimConfig,
};
use lvflux::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget, State};

fn main() -> lvflux::Result<()> {
    let cfg = SimConfig::new(FluxParams::CLASSIC, State::new(1.5, 1.0), 0.001, 20.0);
    let orbit = integrate_deterministic(&cfg)?;
    let v0 = first_integral(cfg.start);
    let drift = orbit
        .states
        .iter()
        .map(|s| (first_integral(*s) - v0).abs())
        .fold(0.0, f64::max);
    println!(
        "closed orbit: {} steps, first integral drift {drift:.1e}",
        orbit.len() - 1
    );

    let noisy = cfg
        .with_noise(NoiseSpec::new(
            NoiseTarget::K1,
            0.07,
            NoiseDistribution::Uniform,
        ))
        .with_seed(42);
    let walk = integrate_stochastic(&noisy)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "t", "x", "y", "V - V0");
    for (t, s) in walk.times.iter().zip(&walk.states).step_by(2000) {
        println!(
            "{t:>6.1} {:>10.5} {:>10.5} {:>+10.5}",
            s.x,
            s.y,
            first_integral(*s) - v0
        );
    }
    Ok(())
}
