use crate::dynamics::Configuration;
use crate::error::{Error, Result};

/// Occupation numbers of the zero-range process seen by exclusion
/// particles: entry `i` is the number of empty sites ahead of particle `i`.
pub fn gaps_to_zrp(positions: &[usize], sites: usize) -> Result<Configuration> {
    if positions.is_empty() {
        return Err(Error::InvalidConfiguration("the gap map needs at least one particle".into()));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) || positions[positions.len() - 1] >= sites {
        return Err(Error::InvalidConfiguration(
            "particle positions must be strictly increasing sites of the ring".into(),
        ));
    }
    let n = positions.len();
    let gaps = (0..n)
        .map(|i| {
            let next = if i + 1 < n { positions[i + 1] } else { positions[0] + sites };
            (next - positions[i] - 1) as u32
        })
        .collect();
    Configuration::new(gaps)
}

/// Inverse of [`gaps_to_zrp`]: positions on a ring of `N + sum gaps`
/// sites, with the first particle at `first`.
pub fn zrp_to_gaps(gaps: &Configuration, first: usize) -> Result<(Vec<usize>, usize)> {
    let sites = gaps.len() + gaps.total() as usize;
    if first >= sites {
        return Err(Error::InvalidConfiguration(format!("first position {first} is off the ring")));
    }
    let mut positions = Vec::with_capacity(gaps.len());
    let mut p = first;
    for &g in gaps.occupancy() {
        positions.push(p);
        p += g as usize + 1;
    }
    Ok((positions, sites))
}
