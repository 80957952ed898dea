//! Scaling exponent over an (alpha, beta) grid and its upper envelope in the
//! rate fraction.

use coop_outage::exponent::{log_spaced, sweep_exponent};

fn main() -> coop_outage::Result<()> {
    let grid = log_spaced(1e-3, 0.999, 100);
    let sweep = sweep_exponent(1.0, &grid, &grid, 20, 4)?;
    println!("{} grid points", sweep.points.len());
    for e in sweep.envelope() {
        println!("r >= {:.2}: E = {:.6}", e.r_bin, e.envelope_exponent);
    }
    Ok(())
}
