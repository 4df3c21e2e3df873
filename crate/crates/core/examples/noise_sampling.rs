//! Per-step noise draws: the variance grows as A^2/dt for both distributions.

use lvflux::model::{sample_noise, NoiseStream};
use lvflux::{NoiseDistribution, NoiseSpec, NoiseTarget};

fn main() -> lvflux::Result<()> {
    let a = 0.07;
    let n = 200_000;
    for dist in [NoiseDistribution::Uniform, NoiseDistribution::Gaussian] {
        let spec = NoiseSpec::new(NoiseTarget::K1, a, dist);
        for dt in [0.1, 0.05, 0.01] {
            let mut rng = NoiseStream::new(1, 0);
            let draws: Vec<f64> = (0..n)
                .map(|_| sample_noise(&spec, dt, &mut rng))
                .collect::<Result<_, _>>()?;
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            println!(
                "{:<8} dt={dt:<5} var*dt/A^2 = {:.4}",
                dist.name(),
                var * dt / (a * a)
            );
        }
    }
    Ok(())
}
