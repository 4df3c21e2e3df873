//! Correlation between a step's noise draw and the displacement it produces.

use lvflux::ensemble::noise_displacement_correlation;
use lvflux::integrator::SimConfig;
use lvflux::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget, State};

fn main() -> lvflux::Result<()> {
    let a = 0.07;
    println!("A^2/2 = {:.5}", a * a / 2.0);
    for target in NoiseTarget::ALL {
        let cfg = SimConfig::new(FluxParams::CLASSIC, State::new(1.0, 1.0), 0.01, 20.0)
            .with_noise(NoiseSpec::new(target, a, NoiseDistribution::Uniform))
            .linearized(true);
        let c = noise_displacement_correlation(&cfg, 500, 2.0)?;
        println!(
            "{:<8} <xi dX> = {:+.5}  <xi dY> = {:+.5}",
            target.name(),
            c.xi_dx,
            c.xi_dy
        );
    }
    Ok(())
}
