//! Phase rates and the fraction of capacity reached by the two-phase protocol.

use coop_outage::protocol::{rate_profile, ProtocolParams};

fn main() -> coop_outage::Result<()> {
    let snr = 1.0;
    println!("{:>6} {:>6} {:>8} {:>8} {:>8} {:>6}", "alpha", "beta", "r1", "r2", "r_eff", "r");
    for alpha in [0.1, 0.3, 0.6065, 0.9] {
        for beta in [0.1, 0.5, 0.9] {
            let p = ProtocolParams::new(alpha, beta, snr)?;
            let r = rate_profile(&p)?;
            println!(
                "{alpha:>6.3} {beta:>6.2} {:>8.4} {:>8.4} {:>8.4} {:>6.3}",
                r.r1, r.r2, r.r_eff, r.rate_fraction
            );
        }
    }
    Ok(())
}
