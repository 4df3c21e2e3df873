//! Second moments of the linearized deviations, solved as a linear ODE and
//! compared with a stochastic ensemble.

use lvflux::ensemble::run_msd;
use lvflux::integrator::SimConfig;
use lvflux::moments::{closed_form_zero_flux, solve_moments};
use lvflux::stability::steady_state;
use lvflux::{FluxParams, NoiseDistribution, NoiseSpec, NoiseTarget};

fn main() -> lvflux::Result<()> {
    let a = 0.07;
    let s = solve_moments(FluxParams::CLASSIC, a, 0.01, 10.0)?;
    println!("zero flux, A={a}");
    for k in (250..s.times.len()).step_by(250) {
        let (t, m) = (s.times[k], s.states[k]);
        let c = closed_form_zero_flux(a, t);
        println!(
            "  t={t:>5.2}  var_x={:.6} (exact {:.6})  cov={:+.6}  trace/A^2t={:.6}",
            m.var_x,
            c.var_x,
            m.cov_xy,
            m.trace() / (a * a * t)
        );
    }

    let f = FluxParams::new(1.1, -1.09);
    let a = 0.02;
    let mom = solve_moments(f, a, 0.01, 20.0)?;
    let cfg = SimConfig::new(f, steady_state(f).unwrap(), 0.01, 20.0)
        .with_noise(NoiseSpec::new(
            NoiseTarget::K1,
            a,
            NoiseDistribution::Uniform,
        ))
        .linearized(true);
    let ens = run_msd(&cfg, 1000)?;
    println!("flux (1.1, -1.09), A={a}");
    for k in (200..mom.times.len()).step_by(300) {
        println!(
            "  t={:>5.1}  moments={:.3e}  ensemble={:.3e}",
            mom.times[k],
            mom.states[k].trace(),
            ens.msd[k]
        );
    }
    Ok(())
}
