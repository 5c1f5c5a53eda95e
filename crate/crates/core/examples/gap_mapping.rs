//! Exclusion particles on a ring as a zero-range configuration of gaps,
//! and back.

use zrplab::hydro::{gaps_to_zrp, zrp_to_gaps};

fn main() -> zrplab::Result<()> {
    let sites = 12;
    let positions = [1, 2, 6, 10];
    let gaps = gaps_to_zrp(&positions, sites)?;
    println!("particles at {positions:?} on {sites} sites");
    println!("gaps ahead of each particle: {:?}", gaps.occupancy());
    let (back, len) = zrp_to_gaps(&gaps, positions[0])?;
    println!("reconstructed {back:?} on {len} sites");
    Ok(())
}
