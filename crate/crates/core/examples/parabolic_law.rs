//! Ensemble mean square displacement grows as alpha * A^2 * t for every noise
//! placement, in both the linearized and the full system.

use lvflux::ensemble::{fit_alpha, run_msd};
use lvflux::integrator::SimConfig;
use lvflux::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget, State};

fn main() -> lvflux::Result<()> {
    let a = 0.07;
    println!("{:<8} {:>10} {:>10}", "target", "linearized", "full");
    for target in NoiseTarget::ALL {
        let cfg = SimConfig::new(FluxParams::CLASSIC, State::new(1.0, 1.0), 0.01, 50.0)
            .with_noise(NoiseSpec::new(target, a, NoiseDistribution::Uniform))
            .with_seed(1);
        let lin = run_msd(&cfg.linearized(true), 400)?;
        let full = run_msd(&cfg, 400)?;
        let (lo, hi) = lin.default_window();
        println!(
            "{:<8} {:>10.3} {:>10.3}",
            target.name(),
            fit_alpha(&lin, a, lo, hi)?,
            fit_alpha(&full, a, lo, hi)?
        );
    }

    // a start away from the fixed point first falls towards it
    let cfg = SimConfig::new(FluxParams::CLASSIC, State::new(2.0, 2.0), 0.05, 50.0).with_noise(
        NoiseSpec::new(NoiseTarget::K1, a, NoiseDistribution::Uniform),
    );
    let s = run_msd(&cfg, 100)?;
    for t in [0.0, 2.5, 5.0, 10.0, 25.0, 50.0] {
        println!("start (2,2): msd({t}) = {:.4}", s.at(t).unwrap());
    }
    Ok(())
}
