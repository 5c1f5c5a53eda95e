use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::MeanSe;

/// Cumulative counter state at a fixed time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub time: f64,
    pub crossings: i64,
    pub displacement: i64,
}

/// Net particle crossings of one designated bond `(bond, bond + 1)`, and
/// the net displacement summed over all jumps (which divided by `L` is the
/// space-averaged current).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentCounter {
    bond: usize,
    sites: usize,
    crossings: i64,
    displacement: i64,
    start: f64,
    now: f64,
    checkpoints: Vec<Checkpoint>,
}

impl CurrentCounter {
    pub fn new(bond: usize, sites: usize, start: f64) -> Self {
        CurrentCounter {
            bond: bond % sites.max(1),
            sites,
            crossings: 0,
            displacement: 0,
            start,
            now: start,
            checkpoints: vec![Checkpoint {
                time: start,
                crossings: 0,
                displacement: 0,
            }],
        }
    }

    /// Records a jump of displacement `z` out of `from` (`|z| < L`).
    #[inline]
    pub fn record(&mut self, from: usize, z: i64) {
        let l = self.sites as i64;
        let (x, b) = (from as i64, self.bond as i64);
        if z > 0 {
            if (b - x).rem_euclid(l) < z {
                self.crossings += 1;
            }
        } else if (x - 1 - b).rem_euclid(l) < -z {
            self.crossings -= 1;
        }
        self.displacement += z;
    }

    pub fn checkpoint(&mut self, time: f64) {
        self.now = time;
        if self.checkpoints.last().map(|c| c.time) != Some(time) {
            self.checkpoints.push(Checkpoint {
                time,
                crossings: self.crossings,
                displacement: self.displacement,
            });
        }
    }

    pub fn bond(&self) -> usize {
        self.bond
    }

    pub fn crossings(&self) -> i64 {
        self.crossings
    }

    pub fn displacement(&self) -> i64 {
        self.displacement
    }

    /// Length of the observation window.
    pub fn window(&self) -> f64 {
        self.now - self.start
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }
}

/// Output of [`measure_current`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentEstimate {
    pub bond: usize,
    pub burn_in: f64,
    pub window: f64,
    /// Net crossings of the designated bond per unit time.
    pub current: f64,
    pub se: f64,
    /// Net displacement per site per unit time.
    pub mean_current: f64,
    pub mean_se: f64,
    pub bond_batches: Vec<f64>,
    pub mean_batches: Vec<f64>,
    /// Standardized difference of the second-half and first-half batch means
    /// of the space-averaged current.
    pub drift_z: f64,
}

impl CurrentEstimate {
    /// Batch-mean drift test at three standard errors.
    pub fn looks_stationary(&self) -> bool {
        self.drift_z.abs() <= 3.0
    }
}

/// Current after `burn_in` with batch-means standard errors.
pub fn measure_current(counter: &CurrentCounter, burn_in: f64, batches: usize) -> Result<CurrentEstimate> {
    let window = counter.window();
    if !(window > burn_in) {
        return Err(Error::Measurement(format!(
            "observation window {window} does not exceed burn-in {burn_in}"
        )));
    }
    let from = counter.start + burn_in;
    let cps: Vec<&Checkpoint> = counter.checkpoints.iter().filter(|c| c.time >= from - 1e-9).collect();
    let intervals = cps.len().saturating_sub(1);
    if batches < 2 || intervals < batches {
        return Err(Error::Measurement(format!(
            "{intervals} checkpoint intervals after burn-in cannot form {batches} batches"
        )));
    }
    let l = counter.sites as f64;
    let mut bond_batches = Vec::with_capacity(batches);
    let mut mean_batches = Vec::with_capacity(batches);
    for b in 0..batches {
        let (p, q) = (cps[b * intervals / batches], cps[(b + 1) * intervals / batches]);
        let dt = q.time - p.time;
        bond_batches.push((q.crossings - p.crossings) as f64 / dt);
        mean_batches.push((q.displacement - p.displacement) as f64 / (l * dt));
    }
    let (first, last) = (cps[0], cps[intervals]);
    let span = last.time - first.time;
    let current = (last.crossings - first.crossings) as f64 / span;
    let mean_current = (last.displacement - first.displacement) as f64 / (l * span);
    let se = MeanSe::of(&bond_batches).se;
    let mean_se = MeanSe::of(&mean_batches).se;
    let half = batches / 2;
    let (a, b) = (MeanSe::of(&mean_batches[..half]), MeanSe::of(&mean_batches[half..]));
    let spread = (a.se * a.se + b.se * b.se).sqrt();
    let drift_z = if spread > 0.0 { (b.mean - a.mean) / spread } else { 0.0 };
    Ok(CurrentEstimate {
        bond: counter.bond,
        burn_in,
        window,
        current,
        se,
        mean_current,
        mean_se,
        bond_batches,
        mean_batches,
        drift_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_detection_on_ring() {
        let mut c = CurrentCounter::new(2, 5, 0.0);
        c.record(2, 1); // 2 -> 3 crosses bond (2,3)
        c.record(1, 2); // 1 -> 3 crosses
        c.record(3, -1); // 3 -> 2 crosses backwards
        c.record(4, 1); // 4 -> 0 does not
        c.record(0, -2); // 0 -> 3 crosses bonds (4,0), (3,4): no
        assert_eq!(c.crossings(), 1);
        assert_eq!(c.displacement(), 1);
    }

    #[test]
    fn frozen_counter_measures_zero() {
        let mut c = CurrentCounter::new(0, 10, 0.0);
        for k in 1..=40 {
            c.checkpoint(k as f64);
        }
        let est = measure_current(&c, 0.0, 20).unwrap();
        assert_eq!(est.current, 0.0);
        assert_eq!(est.se, 0.0);
        assert!(measure_current(&c, 50.0, 20).is_err());
        assert!(measure_current(&c, 0.0, 100).is_err());
    }
}
