use serde::Serialize;

use super::test_function::TestFunction;
use super::window::MacroWindow;
use crate::dynamics::Configuration;

/// `pi_n(phi) = n^{-1} sum_x eta(x) phi(x / n)`.
pub fn pairing(config: &Configuration, window: &MacroWindow, test: &TestFunction) -> f64 {
    let (a, b) = test.support();
    let sum: f64 = window
        .sites_in(a, b)
        .map(|i| config[i] as f64 * test.eval(window.x(i)))
        .sum();
    sum / window.scale as f64
}

/// Block averages of the occupation numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockProfile {
    pub width: usize,
    /// Block midpoints (macroscopic).
    pub x: Vec<f64>,
    /// Sites per block (the last one may be shorter).
    pub counts: Vec<usize>,
    pub u: Vec<f64>,
}

impl BlockProfile {
    /// `sum_B |u_B - ref_B| |B| / n` with `ref_B` the block average of the
    /// reference at the block's sites.
    pub fn l1_distance(&self, window: &MacroWindow, first_site: usize, reference: impl Fn(f64) -> f64) -> f64 {
        let n = window.scale as f64;
        let mut site = first_site;
        let mut total = 0.0;
        for (u, &count) in self.u.iter().zip(&self.counts) {
            let r: f64 = (site..site + count).map(|i| reference(window.x(i))).sum::<f64>() / count as f64;
            total += (u - r).abs() * count as f64 / n;
            site += count;
        }
        total
    }
}

/// Default block width `ceil(sqrt(n))`.
pub fn default_block_width(scale: usize) -> usize {
    ((scale as f64).sqrt().ceil() as usize).max(1)
}

/// Block profile over the sites with positions in `[a, b]`. Returns the
/// profile and the first site used.
pub fn block_profile(config: &Configuration, window: &MacroWindow, width: usize, a: f64, b: f64) -> (BlockProfile, usize) {
    let sites = window.sites_in(a, b);
    let first = sites.start;
    let occ = &config.occupancy()[sites];
    let n = window.scale as f64;
    let mut x = Vec::new();
    let mut counts = Vec::new();
    let mut u = Vec::new();
    for (k, chunk) in occ.chunks(width.max(1)).enumerate() {
        let start = first + k * width;
        let count = chunk.len();
        x.push((window.first as f64 + start as f64 + 0.5 * (count as f64 - 1.0)) / n);
        counts.push(count);
        u.push(chunk.iter().map(|&v| v as f64).sum::<f64>() / count as f64);
    }
    (BlockProfile { width, x, counts, u }, first)
}

/// Pairings and block profile at one time.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalMeasureSample {
    pub scale: usize,
    pub time: f64,
    pub pairings: Vec<(String, f64)>,
    pub block: BlockProfile,
}

pub fn empirical_measure(
    config: &Configuration,
    window: &MacroWindow,
    time: f64,
    tests: &[TestFunction],
    block_width: Option<usize>,
) -> EmpiricalMeasureSample {
    let (a, b) = window.span();
    let width = block_width.unwrap_or_else(|| default_block_width(window.scale));
    EmpiricalMeasureSample {
        scale: window.scale,
        time,
        pairings: tests.iter().map(|t| (t.id(), pairing(config, window, t))).collect(),
        block: block_profile(config, window, width, a, b).0,
    }
}
