//! Graphical construction of the dynamics.
//!
//! Each block of length `t0` draws, independently per site, Poisson epochs
//! at the saturated rate, a uniform threshold and a destination per epoch.
//! An epoch at `x` moves one particle when its threshold lies below the
//! actual rate of `x` just before the epoch. Epochs are resolved
//! component by component of the block's interaction graph.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::configuration::Configuration;
use super::graph::{subcritical_threshold, InteractionGraph, Lattice, Range};
use crate::environment::{JumpKernel, RateField, RateFunction};
use crate::error::{Error, Result};
use crate::rng::{self, LabRng};

/// One clock ring of the schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epoch {
    pub time: f64,
    pub site: usize,
    pub threshold: f64,
    pub displacement: i64,
}

/// Epochs, thresholds and destinations of one block.
#[derive(Clone, Debug)]
pub struct GraphicalSchedule {
    pub t0: f64,
    pub rate: f64,
    /// Per site, epochs in increasing time.
    pub epochs: Vec<Vec<Epoch>>,
}

impl GraphicalSchedule {
    pub fn sample(sites: usize, kernel: &JumpKernel, rate: f64, t0: f64, rng: &mut LabRng) -> Self {
        let count = Poisson::new(rate * t0).ok();
        let support = kernel.support();
        let epochs = (0..sites)
            .map(|site| {
                let k = count.as_ref().map_or(0, |d| d.sample(rng) as usize);
                let mut times: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * t0).collect();
                times.sort_by(f64::total_cmp);
                times
                    .into_iter()
                    .map(|time| Epoch {
                        time,
                        site,
                        threshold: rng.random::<f64>() * rate,
                        displacement: pick(support, rng),
                    })
                    .collect()
            })
            .collect();
        GraphicalSchedule { t0, rate, epochs }
    }

    pub fn active(&self) -> Vec<bool> {
        self.epochs.iter().map(|e| !e.is_empty()).collect()
    }

    pub fn epoch_count(&self) -> usize {
        self.epochs.iter().map(Vec::len).sum()
    }
}

fn pick(support: &[(i64, f64)], rng: &mut LabRng) -> i64 {
    if support.len() == 1 {
        return support[0].0;
    }
    let mut u: f64 = rng.random();
    for &(z, p) in support {
        if u < p {
            return z;
        }
        u -= p;
    }
    support[support.len() - 1].0
}

/// The thinning rule shared by both modes.
#[inline]
pub fn accepts(threshold: f64, alpha: f64, rate: f64) -> bool {
    threshold < alpha * rate
}

/// An accepted epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug)]
pub struct HarrisRun {
    pub config: Configuration,
    pub t0: f64,
    pub blocks: usize,
    pub epochs: u64,
    pub largest_component: usize,
    /// Accepted jumps in time order.
    pub jumps: Vec<Jump>,
}

/// Default block length: half the subcritical threshold of the kernel.
pub fn default_block(kernel: &JumpKernel, rate: &RateFunction) -> f64 {
    0.5 * subcritical_threshold(Range::from_kernel(kernel).degree(), rate.tail())
}

/// Zero-range dynamics for `blocks · t0` time units.
pub fn run_harris(
    field: &RateField,
    kernel: &JumpKernel,
    rate: &RateFunction,
    init: &Configuration,
    blocks: usize,
    t0: f64,
    seed: u64,
) -> Result<HarrisRun> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidExperiment(format!("block length {t0} must be positive")));
    }
    if blocks == 0 {
        return Err(Error::InvalidExperiment("at least one block is required".into()));
    }
    if init.len() != field.len() {
        return Err(Error::InvalidConfiguration(format!(
            "configuration has {} sites but the rate field has {}",
            init.len(),
            field.len()
        )));
    }
    let sites = init.len();
    let lattice = Lattice::Ring { len: sites };
    let range = Range::from_kernel(kernel);
    if 2 * kernel.range() as usize >= sites {
        return Err(Error::InvalidKernel(format!(
            "kernel range {} does not fit on a ring of {sites} sites",
            kernel.range()
        )));
    }
    let tail = rate.tail();
    let alphas = field.alphas();
    let mut eta = init.occupancy().to_vec();
    let mut rng = rng::stream(seed, "dynamics/harris");
    let mut jumps = Vec::new();
    let mut epochs_seen = 0u64;
    let mut largest = 0;
    for b in 0..blocks {
        let offset = b as f64 * t0;
        let schedule = GraphicalSchedule::sample(sites, kernel, tail, t0, &mut rng);
        epochs_seen += schedule.epoch_count() as u64;
        let graph = InteractionGraph::from_active(lattice, &range, schedule.active())?;
        largest = largest.max(graph.largest_component());
        let mut groups: Vec<Vec<Epoch>> = vec![Vec::new(); graph.components()];
        for (x, list) in schedule.epochs.iter().enumerate() {
            groups[graph.labels()[x]].extend_from_slice(list);
        }
        let mut block_jumps = Vec::new();
        for mut group in groups {
            group.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.site.cmp(&b.site)));
            for e in group {
                let x = e.site;
                if eta[x] == 0 || !accepts(e.threshold, alphas[x], rate.rate(eta[x])) {
                    continue;
                }
                let y = (x as i64 + e.displacement).rem_euclid(sites as i64) as usize;
                debug_assert_eq!(graph.labels()[x], graph.labels()[y]);
                eta[x] -= 1;
                eta[y] += 1;
                block_jumps.push(Jump {
                    time: offset + e.time,
                    from: x,
                    to: y,
                });
            }
        }
        block_jumps.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.from.cmp(&b.from)));
        jumps.extend(block_jumps);
    }
    Ok(HarrisRun {
        config: Configuration::new(eta)?,
        t0,
        blocks,
        epochs: epochs_seen,
        largest_component: largest,
        jumps,
    })
}

/// Frozen-environment mode: a site held at occupancy `m` is offered
/// `epochs` clock rings; returns the fraction accepted.
pub fn thinning_acceptance(alpha: f64, rate: &RateFunction, m: u32, epochs: usize, seed: u64) -> f64 {
    let mut rng = rng::stream(seed, "dynamics/thinning");
    let tail = rate.tail();
    let r = rate.rate(m);
    let hits = (0..epochs)
        .filter(|_| accepts(rng.random::<f64>() * tail, alpha, r))
        .count();
    hits as f64 / epochs.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_zrp, RunOptions};
    use crate::environment::{sample_rate_field, DisorderLaw};
    use crate::stats::{chi_square_two_sample, ks_test};
    use rayon::prelude::*;

    #[test]
    fn empty_ring_unchanged() {
        let field = RateField::homogeneous(10);
        let init = Configuration::empty(10);
        let run = run_harris(
            &field,
            &JumpKernel::totally_asymmetric(),
            &RateFunction::indicator(),
            &init,
            5,
            0.1,
            1,
        )
        .unwrap();
        assert_eq!(run.config, init);
        assert!(run.jumps.is_empty());
        assert!(run.epochs > 0);
    }

    #[test]
    fn thinning_frequency() {
        let rate = RateFunction::capped_linear(3).unwrap();
        for m in 1..5 {
            let n = 200_000;
            let f = thinning_acceptance(0.7, &rate, m, n, m as u64);
            let p = 0.7 * rate.rate(m) / rate.tail();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() < 3.0 * se, "m={m}: {f} vs {p}");
        }
        assert_eq!(thinning_acceptance(0.7, &rate, 0, 1000, 0), 0.0);
    }

    #[test]
    fn isolated_site_first_jump_is_exponential() {
        let alpha = 0.6;
        let field = RateField::from_alphas(vec![1.0, 1.0, alpha, 1.0, 1.0, 1.0]).unwrap();
        let mut occ = vec![0; 6];
        occ[2] = 1;
        let init = Configuration::new(occ).unwrap();
        let times: Vec<f64> = (0..10_000u64)
            .into_par_iter()
            .map(|s| {
                let run = run_harris(
                    &field,
                    &JumpKernel::totally_asymmetric(),
                    &RateFunction::indicator(),
                    &init,
                    1,
                    40.0,
                    s,
                )
                .unwrap();
                run.jumps.first().map_or(40.0, |j| j.time)
            })
            .collect();
        let (_, p) = ks_test(&times, |t| 1.0 - (-alpha * t).exp(), false);
        assert!(p > 0.01, "{p}");
    }

    #[test]
    fn agrees_with_event_engine() {
        let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
        let field = sample_rate_field(&law, 64, 17).unwrap();
        let kernel = JumpKernel::nearest_neighbor(0.75).unwrap();
        let rate = RateFunction::indicator();
        let init = Configuration::new((0..64).map(|i| (i % 3) as u32).collect()).unwrap();
        let t0 = default_block(&kernel, &rate);
        let blocks = (5.0 / t0).round() as usize;
        let horizon = blocks as f64 * t0;
        let site = 10;
        let reps = 10_000u64;
        let bins = 8;
        let hist = |values: Vec<u32>| {
            let mut h = vec![0u64; bins];
            for v in values {
                h[(v as usize).min(bins - 1)] += 1;
            }
            h
        };
        let a = hist(
            (0..reps)
                .into_par_iter()
                .map(|s| run_harris(&field, &kernel, &rate, &init, blocks, t0, s).unwrap().config[site])
                .collect(),
        );
        let b = hist(
            (0..reps)
                .into_par_iter()
                .map(|s| {
                    run_zrp(&field, &kernel, &rate, &init, horizon, 1_000_000 + s, &RunOptions::default())
                        .unwrap()
                        .config[site]
                })
                .collect(),
        );
        let (_, p) = chi_square_two_sample(&a, &b);
        assert!(p > 0.01, "{a:?} {b:?} p={p}");
    }

    #[test]
    fn conserves_particles() {
        let field = RateField::homogeneous(30);
        let init = Configuration::new(vec![2; 30]).unwrap();
        let kernel = JumpKernel::new(vec![(-1, 0.3), (2, 0.7)]).unwrap();
        let run = run_harris(&field, &kernel, &RateFunction::capped_linear(2).unwrap(), &init, 50, 0.05, 4).unwrap();
        assert_eq!(run.config.total(), 60);
        assert!(run.jumps.windows(2).all(|w| w[0].time <= w[1].time));
    }
}
