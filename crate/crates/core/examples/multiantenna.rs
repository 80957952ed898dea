//! Capacity of unicast and multicast when nodes carry several antennas.

use coop_outage::protocol::{capacity_multiantenna, CastMode};

fn main() -> coop_outage::Result<()> {
    let snr = 1.0;
    for antennas in [vec![1, 1, 1], vec![2, 2, 4], vec![4, 1, 4], vec![3, 3, 3]] {
        let uc = capacity_multiantenna(CastMode::Unicast, &antennas, snr)?;
        let mc = capacity_multiantenna(CastMode::Multicast, &antennas, snr)?;
        println!("{antennas:?}: unicast {uc:.3}, multicast {mc:.3} bits/use");
    }
    Ok(())
}
