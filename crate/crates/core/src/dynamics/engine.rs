//! Event-driven exact simulation.
//!
//! The waiting time to the next jump is exponential with the total rate;
//! the jumping site is chosen in proportion to its rate by descending a
//! [`RateTree`]. Only sites whose rate can change after a jump are
//! refreshed, so each event costs `O(log L)`.

use rand::Rng;

use super::configuration::Configuration;
use super::current::CurrentCounter;
use super::tree::RateTree;
use crate::environment::{JumpKernel, RateField, RateFunction};
use crate::error::{Error, Result};
use crate::rng::{self, LabRng};

/// Jump rules of a conservative particle system on a ring.
pub trait JumpModel {
    /// Total rate at which site `x` emits a particle.
    fn site_rate(&self, occupancy: &[u32], x: usize) -> f64;

    /// Displacement of the particle leaving `x`.
    fn displacement(&self, rng: &mut LabRng) -> i64;

    /// Calls `f` on every site whose rate may change after a jump
    /// `x -> y`.
    fn for_each_affected(&self, x: usize, y: usize, sites: usize, f: &mut dyn FnMut(usize));

    /// Whether a jump into a tracked site also taints the departure site.
    fn taints_backward(&self) -> bool;
}

/// Zero-range dynamics: site `x` emits at rate `alpha_x r(eta(x))`.
#[derive(Clone, Debug)]
pub struct ZrpModel {
    alphas: Vec<f64>,
    rates: Vec<f64>,
    tail: f64,
    displacements: Vec<i64>,
    cumulative: Vec<f64>,
}

impl ZrpModel {
    pub fn new(field: &RateField, kernel: &JumpKernel, rate: &RateFunction) -> Self {
        let mut acc = 0.0;
        let cumulative = kernel
            .support()
            .iter()
            .map(|s| {
                acc += s.1;
                acc
            })
            .collect();
        ZrpModel {
            alphas: field.alphas().to_vec(),
            rates: rate.table().to_vec(),
            tail: rate.tail(),
            displacements: kernel.neighborhood(),
            cumulative,
        }
    }
}

impl JumpModel for ZrpModel {
    #[inline]
    fn site_rate(&self, occupancy: &[u32], x: usize) -> f64 {
        let k = occupancy[x] as usize;
        let r = if k < self.rates.len() { self.rates[k] } else { self.tail };
        self.alphas[x] * r
    }

    #[inline]
    fn displacement(&self, rng: &mut LabRng) -> i64 {
        if self.displacements.len() == 1 {
            return self.displacements[0];
        }
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.displacements[i.min(self.displacements.len() - 1)]
    }

    #[inline]
    fn for_each_affected(&self, x: usize, y: usize, _sites: usize, f: &mut dyn FnMut(usize)) {
        f(x);
        f(y);
    }

    fn taints_backward(&self) -> bool {
        false
    }
}

/// Totally asymmetric K-exclusion: bond `x -> x+1` fires at rate
/// `alpha_x` when `eta(x) >= 1` and `eta(x+1) <= K - 1`.
#[derive(Clone, Debug)]
pub struct KExclusionModel {
    alphas: Vec<f64>,
    cap: u32,
}

impl KExclusionModel {
    pub fn new(field: &RateField, cap: u32) -> Self {
        KExclusionModel {
            alphas: field.alphas().to_vec(),
            cap,
        }
    }
}

impl JumpModel for KExclusionModel {
    #[inline]
    fn site_rate(&self, occupancy: &[u32], x: usize) -> f64 {
        let next = if x + 1 == occupancy.len() { 0 } else { x + 1 };
        if occupancy[x] >= 1 && occupancy[next] < self.cap {
            self.alphas[x]
        } else {
            0.0
        }
    }

    #[inline]
    fn displacement(&self, _rng: &mut LabRng) -> i64 {
        1
    }

    #[inline]
    fn for_each_affected(&self, x: usize, y: usize, sites: usize, f: &mut dyn FnMut(usize)) {
        f((x + sites - 1) % sites);
        f(x);
        f(y);
    }

    fn taints_backward(&self) -> bool {
        true
    }
}

/// Options shared by the engines.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Designated bond `(bond, bond + 1)` for the current counter.
    pub bond: usize,
    /// Counter checkpoint spacing; `None` records only the endpoints.
    pub checkpoint_every: Option<f64>,
    /// Times at which to copy the configuration, increasing.
    pub snapshot_times: Vec<f64>,
    /// Sites marked as influenced by the outside of the simulated window.
    pub sentinel_seeds: Vec<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            bond: 0,
            checkpoint_every: None,
            snapshot_times: Vec::new(),
            sentinel_seeds: Vec::new(),
        }
    }
}

/// Tracks which sites may have been influenced by a set of seed sites:
/// a particle sent from a tainted site taints its destination, and for
/// models whose rates look ahead (exclusion) a jump touching a tainted
/// site taints both ends.
#[derive(Clone, Debug)]
pub struct Sentinel {
    tainted: Vec<bool>,
    count: usize,
}

impl Sentinel {
    fn new(sites: usize, seeds: &[usize]) -> Self {
        let mut tainted = vec![false; sites];
        for &s in seeds {
            tainted[s % sites] = true;
        }
        let count = tainted.iter().filter(|t| **t).count();
        Sentinel { tainted, count }
    }

    fn mark(&mut self, x: usize) {
        if !self.tainted[x] {
            self.tainted[x] = true;
            self.count += 1;
        }
    }

    pub fn is_tainted(&self, x: usize) -> bool {
        self.tainted[x]
    }

    pub fn tainted(&self) -> &[bool] {
        &self.tainted
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// A running trajectory.
pub struct Engine<M: JumpModel> {
    model: M,
    occupancy: Vec<u32>,
    tree: RateTree,
    time: f64,
    rng: LabRng,
    counter: CurrentCounter,
    checkpoint_every: Option<f64>,
    next_checkpoint: f64,
    sentinel: Option<Sentinel>,
    events: u64,
}

impl<M: JumpModel> Engine<M> {
    pub fn new(model: M, init: Configuration, seed: u64, options: &RunOptions) -> Self {
        let sites = init.len();
        let occupancy = init.into_inner();
        let rates: Vec<f64> = (0..sites).map(|x| model.site_rate(&occupancy, x)).collect();
        let sentinel = if options.sentinel_seeds.is_empty() {
            None
        } else {
            Some(Sentinel::new(sites, &options.sentinel_seeds))
        };
        Engine {
            tree: RateTree::new(&rates),
            model,
            occupancy,
            time: 0.0,
            rng: rng::stream(seed, "dynamics/events"),
            counter: CurrentCounter::new(options.bond, sites, 0.0),
            checkpoint_every: options.checkpoint_every.filter(|dt| *dt > 0.0),
            next_checkpoint: options.checkpoint_every.unwrap_or(f64::INFINITY),
            sentinel,
            events: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn occupancy(&self) -> &[u32] {
        &self.occupancy
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.occupancy.clone()).expect("nonempty ring")
    }

    pub fn counter(&self) -> &CurrentCounter {
        &self.counter
    }

    pub fn sentinel(&self) -> Option<&Sentinel> {
        self.sentinel.as_ref()
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn total_rate(&self) -> f64 {
        self.tree.total()
    }

    /// Runs the chain up to time `target`. Restarting the exponential
    /// clock at `target` is exact because the clock is memoryless.
    pub fn advance_to(&mut self, target: f64) {
        let sites = self.occupancy.len();
        while self.time < target {
            let stop = target.min(self.next_checkpoint);
            let total = self.tree.total();
            let dt = if total > 0.0 {
                let u: f64 = self.rng.random();
                -(1.0 - u).ln() / total
            } else {
                f64::INFINITY
            };
            if self.time + dt > stop {
                self.time = stop;
                if stop == self.next_checkpoint {
                    self.counter.checkpoint(stop);
                    self.next_checkpoint += self.checkpoint_every.unwrap_or(f64::INFINITY);
                }
                continue;
            }
            self.time += dt;
            let u: f64 = self.rng.random::<f64>() * total;
            let x = self.tree.find(u);
            let z = self.model.displacement(&mut self.rng);
            let y = (x as i64 + z).rem_euclid(sites as i64) as usize;
            self.occupancy[x] -= 1;
            self.occupancy[y] += 1;
            self.events += 1;
            self.counter.record(x, z);
            if let Some(s) = self.sentinel.as_mut() {
                if s.tainted[x] {
                    s.mark(y);
                } else if self.model.taints_backward() && s.tainted[y] {
                    s.mark(x);
                }
            }
            let (model, occupancy, tree) = (&self.model, &self.occupancy, &mut self.tree);
            model.for_each_affected(x, y, sites, &mut |s| tree.set(s, model.site_rate(occupancy, s)));
        }
        self.counter.checkpoint(self.time);
    }
}

pub type ZrpEngine = Engine<ZrpModel>;
pub type KExclusionEngine = Engine<KExclusionModel>;

/// Result of a trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: Configuration,
    pub counter: CurrentCounter,
    pub snapshots: Vec<(f64, Configuration)>,
    pub events: u64,
    pub tainted: Option<Vec<bool>>,
}

fn check_horizon(horizon: f64, options: &RunOptions) -> Result<()> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidExperiment(format!("horizon {horizon} must be finite and nonnegative")));
    }
    if options.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidExperiment("snapshot times must increase".into()));
    }
    Ok(())
}

fn drive<M: JumpModel>(mut engine: Engine<M>, horizon: f64, options: &RunOptions) -> Trajectory {
    let mut snapshots = Vec::with_capacity(options.snapshot_times.len());
    for &t in options.snapshot_times.iter().filter(|t| **t <= horizon) {
        engine.advance_to(t);
        snapshots.push((t, engine.configuration()));
    }
    engine.advance_to(horizon);
    Trajectory {
        config: engine.configuration(),
        tainted: engine.sentinel.as_ref().map(|s| s.tainted.clone()),
        counter: engine.counter,
        snapshots,
        events: engine.events,
    }
}

/// Disordered zero-range process on the ring.
pub fn run_zrp(
    field: &RateField,
    kernel: &JumpKernel,
    rate: &RateFunction,
    init: &Configuration,
    horizon: f64,
    seed: u64,
    options: &RunOptions,
) -> Result<Trajectory> {
    check_horizon(horizon, options)?;
    if init.len() != field.len() {
        return Err(Error::InvalidConfiguration(format!(
            "configuration has {} sites but the rate field has {}",
            init.len(),
            field.len()
        )));
    }
    if kernel.range() as usize >= init.len().max(2) {
        return Err(Error::InvalidKernel(format!(
            "kernel range {} does not fit on a ring of {} sites",
            kernel.range(),
            init.len()
        )));
    }
    let engine = Engine::new(ZrpModel::new(field, kernel, rate), init.clone(), seed, options);
    Ok(drive(engine, horizon, options))
}

/// Totally asymmetric K-exclusion on the ring.
pub fn run_kexclusion(
    field: &RateField,
    cap: u32,
    init: &Configuration,
    horizon: f64,
    seed: u64,
    options: &RunOptions,
) -> Result<Trajectory> {
    check_horizon(horizon, options)?;
    if cap == 0 {
        return Err(Error::InvalidConfiguration("K must be at least 1".into()));
    }
    if init.len() != field.len() {
        return Err(Error::InvalidConfiguration(format!(
            "configuration has {} sites but the rate field has {}",
            init.len(),
            field.len()
        )));
    }
    init.check_cap(cap)?;
    let engine = Engine::new(KExclusionModel::new(field, cap), init.clone(), seed, options);
    Ok(drive(engine, horizon, options))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::measure_current;
    use crate::stats::{ks_test, MeanSe};
    use statrs::distribution::{DiscreteCDF, Poisson};

    fn single_particle(sites: usize) -> Configuration {
        let mut occ = vec![0; sites];
        occ[0] = 1;
        Configuration::new(occ).unwrap()
    }

    #[test]
    fn empty_ring_is_inert() {
        let field = RateField::homogeneous(8);
        let run = run_zrp(
            &field,
            &JumpKernel::totally_asymmetric(),
            &RateFunction::indicator(),
            &Configuration::empty(8),
            10.0,
            1,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(run.config, Configuration::empty(8));
        assert_eq!(run.counter.crossings(), 0);
        assert_eq!(run.events, 0);
    }

    #[test]
    fn full_exclusion_ring_is_frozen() {
        let field = RateField::homogeneous(6);
        let init = Configuration::new(vec![2; 6]).unwrap();
        let run = run_kexclusion(&field, 2, &init, 50.0, 3, &RunOptions::default()).unwrap();
        assert_eq!(run.config, init);
        assert_eq!(run.events, 0);
    }

    #[test]
    fn cap_violation_rejected() {
        let field = RateField::homogeneous(3);
        let init = Configuration::new(vec![3, 0, 0]).unwrap();
        assert!(run_kexclusion(&field, 2, &init, 1.0, 0, &RunOptions::default()).is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let field = RateField::homogeneous(3);
        let init = Configuration::empty(4);
        let k = JumpKernel::totally_asymmetric();
        assert!(run_zrp(&field, &k, &RateFunction::indicator(), &init, 1.0, 0, &RunOptions::default()).is_err());
        let init = Configuration::empty(3);
        assert!(run_zrp(&field, &k, &RateFunction::indicator(), &init, f64::NAN, 0, &RunOptions::default()).is_err());
    }

    #[test]
    fn single_particle_is_a_poisson_walk() {
        let t = 3.0;
        let sites = 64;
        let field = RateField::homogeneous(sites);
        let kernel = JumpKernel::totally_asymmetric();
        let zrp: Vec<f64> = (0..10_000)
            .map(|rep| {
                let run = run_zrp(
                    &field,
                    &kernel,
                    &RateFunction::indicator(),
                    &single_particle(sites),
                    t,
                    rep,
                    &RunOptions::default(),
                )
                .unwrap();
                run.counter.displacement() as f64
            })
            .collect();
        let kex: Vec<f64> = (0..10_000)
            .map(|rep| {
                let run =
                    run_kexclusion(&field, 1, &single_particle(sites), t, 50_000 + rep, &RunOptions::default()).unwrap();
                run.counter.displacement() as f64
            })
            .collect();
        let poisson = Poisson::new(t).unwrap();
        let cdf = |x: f64| if x < 0.0 { 0.0 } else { poisson.cdf(x.floor() as u64) };
        let (_, p_zrp) = ks_test(&zrp, cdf, true);
        let (_, p_kex) = ks_test(&kex, cdf, true);
        assert!(p_zrp > 0.01, "{p_zrp}");
        assert!(p_kex > 0.01, "{p_kex}");
    }

    #[test]
    fn particle_number_is_conserved() {
        let law = crate::environment::DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
        let field = crate::environment::sample_rate_field(&law, 100, 2).unwrap();
        let kernel = JumpKernel::new(vec![(-2, 0.2), (1, 0.5), (3, 0.3)]).unwrap();
        let init = Configuration::new((0..100).map(|i| (i % 4) as u32).collect()).unwrap();
        let run = run_zrp(
            &field,
            &kernel,
            &RateFunction::capped_linear(3).unwrap(),
            &init,
            20.0,
            7,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(run.config.total(), init.total());
        assert!(run.events > 1000);
        let init = Configuration::new((0..100).map(|i| (i % 3) as u32).collect()).unwrap();
        let run = run_kexclusion(&field, 2, &init, 20.0, 8, &RunOptions::default()).unwrap();
        assert_eq!(run.config.total(), init.total());
        run.config.check_cap(2).unwrap();
    }

    #[test]
    fn tasep_ring_current_matches_exact_value() {
        let sites = 1000;
        let field = RateField::homogeneous(sites);
        let init = Configuration::new((0..sites).map(|i| (i % 2) as u32).collect()).unwrap();
        let options = RunOptions {
            checkpoint_every: Some(10.0),
            ..RunOptions::default()
        };
        let run = run_kexclusion(&field, 1, &init, 2200.0, 11, &options).unwrap();
        let est = measure_current(&run.counter, 200.0, 20).unwrap();
        let exact = 0.25 * sites as f64 / (sites - 1) as f64;
        assert!((est.current - exact).abs() < 3.0 * est.se, "{} +- {}", est.current, est.se);
    }

    #[test]
    fn snapshots_at_requested_times() {
        let field = RateField::homogeneous(10);
        let init = Configuration::new(vec![1; 10]).unwrap();
        let options = RunOptions {
            snapshot_times: vec![0.0, 1.0, 2.0],
            ..RunOptions::default()
        };
        let run = run_zrp(
            &field,
            &JumpKernel::totally_asymmetric(),
            &RateFunction::indicator(),
            &init,
            2.0,
            5,
            &options,
        )
        .unwrap();
        assert_eq!(run.snapshots.len(), 3);
        assert_eq!(run.snapshots[0].1, init);
        assert_eq!(run.snapshots[2].1, run.config);
    }

    #[test]
    fn sentinel_spreads_downstream_only_for_zrp() {
        let sites = 200;
        let field = RateField::homogeneous(sites);
        let init = Configuration::new(vec![1; sites]).unwrap();
        let options = RunOptions {
            sentinel_seeds: vec![100],
            ..RunOptions::default()
        };
        let run = run_zrp(
            &field,
            &JumpKernel::totally_asymmetric(),
            &RateFunction::indicator(),
            &init,
            20.0,
            9,
            &options,
        )
        .unwrap();
        let tainted = run.tainted.unwrap();
        assert!(tainted[100]);
        assert!(tainted[..100].iter().all(|t| !t));
        let reach = tainted.iter().filter(|t| **t).count();
        assert!(reach > 3 && reach < 60, "{reach}");
    }

    #[test]
    fn deterministic_in_seed() {
        let field = RateField::homogeneous(50);
        let init = Configuration::new(vec![2; 50]).unwrap();
        let go = |seed| {
            run_zrp(
                &field,
                &JumpKernel::nearest_neighbor(0.7).unwrap(),
                &RateFunction::indicator(),
                &init,
                30.0,
                seed,
                &RunOptions::default(),
            )
            .unwrap()
            .config
        };
        assert_eq!(go(4), go(4));
        assert_ne!(go(4), go(5));
        let _ = MeanSe::of(&[1.0]);
    }
}
