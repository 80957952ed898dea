//! Nodes needed for a target outage, and how much the multicast requirement
//! exceeds the unicast one.

use coop_outage::exponent::network_size_gap;
use coop_outage::protocol::ProtocolParams;

fn main() -> coop_outage::Result<()> {
    let params = ProtocolParams::from_threshold(0.5, 0.5, 1.0)?;
    for eps in [1e-2, 1e-3, 1e-6, 1e-12] {
        let g = network_size_gap(&params, eps)?;
        println!(
            "eps {eps:e}: K_uc {:>5}  K_mc {:>5}  gap {:>5}  predicted {:>7.1}  rel.err {:.3}",
            g.k_uc, g.k_mc, g.measured_gap, g.predicted_gap, g.relative_error
        );
    }
    Ok(())
}
