//! Region of initial conditions that settle onto a stable stationary point,
//! drawn as text.

use lvflux::basin::{map_basin, BasinConfig, Outcome};
use lvflux::stability::{steady_state, Axis};
use lvflux::FluxParams;

fn main() -> lvflux::Result<()> {
    let f = FluxParams::new(-0.1, 0.3);
    let axis = Axis::new(0.0, 2.0, 0.05)?;
    let grid = map_basin(f, axis, axis, &BasinConfig::default())?;

    let st = steady_state(f).unwrap();
    println!(
        "flux ({}, {}), stationary point ({:.3}, {:.3})",
        f.bx, f.by, st.x, st.y
    );
    for row in (0..grid.rows()).rev() {
        let line: String = (0..grid.cols())
            .map(|col| match grid.get(row, col) {
                Outcome::Converged => '#',
                Outcome::Diverged => '.',
                Outcome::Undecided => '?',
                Outcome::NonPhysical => ' ',
            })
            .collect();
        println!("{line}");
    }
    println!(
        "converged fraction {:.3}, area {:.3}",
        grid.converged_fraction(),
        grid.converged_area()
    );
    Ok(())
}
