//! Monte Carlo outage estimates at the G = 1/2, beta = 1/2 operating point,
//! side by side with the exact values.

use coop_outage::analytics::exact_outage;
use coop_outage::montecarlo::sweep_outage_vs_k;
use coop_outage::protocol::{CastMode, ProtocolParams};

fn main() -> coop_outage::Result<()> {
    let params = ProtocolParams::from_threshold(0.5, 0.5, 1.0)?;
    let ks = [2, 5, 10, 20, 50];
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for pair in sweep_outage_vs_k(&params, &ks, 200_000, 7, workers)? {
        for mode in CastMode::BOTH {
            let est = pair.get(mode);
            let exact = exact_outage(&params, pair.k, mode)?;
            println!(
                "K={:<3} {mode}  sim {:.5} [{:.5}, {:.5}]  exact {:.5}",
                pair.k, est.p_hat, est.ci95_low, est.ci95_high, exact
            );
        }
        println!("      mean decoders {:.3}, phase-2 power {:.4} P", pair.mean_k1.mean, pair.phase2_power.mean);
    }
    Ok(())
}
