//! Exact outage, optimized Chernoff bounds and the large-K approximation.

use coop_outage::analytics::{bound_set, solve_gamma_star};
use coop_outage::protocol::ProtocolParams;

fn main() -> coop_outage::Result<()> {
    let params = ProtocolParams::from_threshold(0.5, 0.5, 1.0)?;
    let inner = solve_gamma_star(params.alpha(), params.beta())?;
    println!("mu = {:.6}, gamma* = {:.6}, E = {:.6}", inner.mu, inner.gamma_star, inner.exponent_per_node);
    println!("{:>5} {:>11} {:>11} {:>11} {:>11} {:>11}", "K", "exact_uc", "chern_uc", "approx_uc", "exact_mc", "approx_mc");
    for k in [10, 50, 100, 200, 500, 1000] {
        let b = bound_set(&params, k)?;
        println!(
            "{k:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            b.exact_uc.prob(),
            b.chernoff_uc.value(),
            b.approx_uc.value(),
            b.exact_mc.prob(),
            b.approx_mc.value()
        );
    }
    Ok(())
}
