//! Stationary point, eigenvalues and regime for a handful of flux settings.

use lvflux::stability::analyze;
use lvflux::FluxParams;

fn main() {
    let cases = [
        (0.0, 0.0),
        (0.1, 0.0),
        (-0.1, 0.0),
        (0.0, 0.5),
        (0.0, 1.5),
        (1.1, -1.09),
        (-0.1, 0.3),
        (-1.0, 2.0),
    ];
    println!(
        "{:>6} {:>6}  {:>8} {:>8}  {:>22}  regime",
        "bx", "by", "x_st", "y_st", "lambda"
    );
    for (bx, by) in cases {
        let a = analyze(FluxParams::new(bx, by));
        if a.exists {
            println!(
                "{bx:>6} {by:>6}  {:>8.4} {:>8.4}  {:>10.4} {:>+10.4}i  {}",
                a.x_st, a.y_st, a.lambda1.re, a.lambda1.im, a.regime
            );
        } else {
            println!(
                "{bx:>6} {by:>6}  {:>8} {:>8}  {:>22}  {}",
                "-", "-", "-", a.regime
            );
        }
    }
}
