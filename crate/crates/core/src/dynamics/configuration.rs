use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation numbers on a ring of `L` sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    occupancy: Vec<u32>,
}

impl Configuration {
    pub fn new(occupancy: Vec<u32>) -> Result<Self> {
        if occupancy.is_empty() {
            return Err(Error::InvalidConfiguration("ring needs at least one site".into()));
        }
        Ok(Configuration { occupancy })
    }

    pub fn empty(sites: usize) -> Self {
        Configuration {
            occupancy: vec![0; sites.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    /// Conserved particle number.
    pub fn total(&self) -> u64 {
        self.occupancy.iter().map(|&k| u64::from(k)).sum()
    }

    pub fn occupancy(&self) -> &[u32] {
        &self.occupancy
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.occupancy
    }

    pub fn get(&self, site: usize) -> u32 {
        self.occupancy[site]
    }

    pub fn max_occupancy(&self) -> u32 {
        self.occupancy.iter().copied().max().unwrap_or(0)
    }

    /// Rejects configurations with a site above `cap`.
    pub fn check_cap(&self, cap: u32) -> Result<()> {
        match self.occupancy.iter().position(|&k| k > cap) {
            Some(x) => Err(Error::InvalidConfiguration(format!(
                "site {x} holds {} particles, above the cap {cap}",
                self.occupancy[x]
            ))),
            None => Ok(()),
        }
    }

    /// CSV rows `time,site_index,occupancy` (no header).
    pub fn snapshot_rows(&self, time: f64, out: &mut String) {
        use std::fmt::Write;
        for (i, k) in self.occupancy.iter().enumerate() {
            let _ = writeln!(out, "{time},{i},{k}");
        }
    }
}

impl std::ops::Index<usize> for Configuration {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.occupancy[i]
    }
}
