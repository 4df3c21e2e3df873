//! Maps the (bx, by) plane to stability regimes and writes a PPM image.
//!
//! `cargo run --release --example regime_diagram -- regimes.ppm`

use std::fs::File;
use std::io::BufWriter;

use lvflux::output::write_ppm;
use lvflux::stability::regime_diagram;
use lvflux::Regime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = regime_diagram((-2.0, 2.0), (-2.0, 2.0), 0.01)?;
    for r in Regime::ALL {
        let n = grid.cells.iter().filter(|&&c| c == r).count();
        println!("{:<15} {:>6} cells", r.name(), n);
    }

    // stable band along the by axis
    let green: Vec<f64> = grid
        .iter()
        .filter(|&(bx, _, r)| bx == 0.0 && r == Regime::Stable)
        .map(|(_, by, _)| by)
        .collect();
    println!(
        "bx=0 stable for by in [{:.2}, {:.2}]",
        green[0],
        green[green.len() - 1]
    );

    if let Some(path) = std::env::args().nth(1) {
        write_ppm(BufWriter::new(File::create(&path)?), &grid, |r| r.color())?;
        println!("wrote {path}");
    }
    Ok(())
}
