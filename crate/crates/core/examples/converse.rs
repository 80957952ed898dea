//! Above capacity, outage is bounded away from zero no matter how many
//! nodes help; a direct link does not improve with K at all.

use coop_outage::analytics::exact_outage;
use coop_outage::montecarlo::estimate_direct_outage;
use coop_outage::protocol::{achievability_schedule, converse_outage_floor, rate_profile, CastMode};

fn main() -> coop_outage::Result<()> {
    let snr = 1.0;
    for rate in [0.5, 1.0, 1.25, 2.0] {
        println!("R = {rate}: outage >= {:.3}", converse_outage_floor(rate, snr)?);
    }
    for k in [10, 1000] {
        let est = estimate_direct_outage(1.25, snr, k, 100_000, 3, 2)?;
        println!("direct link, K = {k}: outage {:.4} +- {:.4}", est.p_hat, est.std_err);
    }
    for k in [100, 1000, 10_000] {
        let p = achievability_schedule(k, snr)?;
        println!(
            "alpha = 1/ln K, beta = 1/K at K = {k}: r = {:.3}, uc {:.3e}, mc {:.3e}",
            rate_profile(&p)?.rate_fraction,
            exact_outage(&p, k, CastMode::Unicast)?,
            exact_outage(&p, k, CastMode::Multicast)?
        );
    }
    Ok(())
}
