//! Interaction graphs of a short-time graphical schedule.
//!
//! Two sites are joined when their difference lies in the symmetrized
//! range and at least one of them carries a clock epoch in `[0, t0]`.
//! Over such a block, particles can only be exchanged inside a connected
//! component, so components can be resolved independently.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::JumpKernel;
use crate::error::{Error, Result};
use crate::rng::{self, LabRng};

/// Periodic lattice supporting the graph experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lattice {
    Ring { len: usize },
    Torus { width: usize, height: usize },
}

impl Lattice {
    pub fn sites(&self) -> usize {
        match *self {
            Lattice::Ring { len } => len,
            Lattice::Torus { width, height } => width * height,
        }
    }

    fn shift(&self, x: usize, z: [i64; 2]) -> usize {
        match *self {
            Lattice::Ring { len } => (x as i64 + z[0]).rem_euclid(len as i64) as usize,
            Lattice::Torus { width, height } => {
                let (i, j) = ((x % width) as i64, (x / width) as i64);
                let i = (i + z[0]).rem_euclid(width as i64) as usize;
                let j = (j + z[1]).rem_euclid(height as i64) as usize;
                j * width + i
            }
        }
    }

    fn fits(&self, span: [i64; 2]) -> bool {
        match *self {
            Lattice::Ring { len } => 2 * span[0].unsigned_abs() < len as u64,
            Lattice::Torus { width, height } => {
                2 * span[0].unsigned_abs() < width as u64 && 2 * span[1].unsigned_abs() < height as u64
            }
        }
    }
}

/// Symmetrized range `N ∪ (−N)`, one representative per undirected
/// direction (the lexicographically positive one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Range {
    half: Vec<[i64; 2]>,
}

impl Range {
    pub fn new(displacements: &[[i64; 2]]) -> Result<Self> {
        let mut half: Vec<[i64; 2]> = displacements
            .iter()
            .map(|&z| if z > [0, 0] { z } else { [-z[0], -z[1]] })
            .collect();
        if half.iter().any(|z| *z == [0, 0]) {
            return Err(Error::InvalidKernel("zero displacement in range".into()));
        }
        half.sort_unstable();
        half.dedup();
        if half.is_empty() {
            return Err(Error::InvalidKernel("empty range".into()));
        }
        Ok(Range { half })
    }

    pub fn from_kernel(kernel: &JumpKernel) -> Self {
        let d: Vec<[i64; 2]> = kernel.neighborhood().into_iter().map(|z| [z, 0]).collect();
        Range::new(&d).expect("kernel support excludes zero")
    }

    /// `K = |N*|`.
    pub fn degree(&self) -> usize {
        2 * self.half.len()
    }

    pub fn half(&self) -> &[[i64; 2]] {
        &self.half
    }

    fn span(&self) -> [i64; 2] {
        self.half
            .iter()
            .fold([0, 0], |s, z| [s[0].max(z[0].abs()), s[1].max(z[1].abs())])
    }
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Realized interaction graph.
#[derive(Clone, Debug)]
pub struct InteractionGraph {
    lattice: Lattice,
    active: Vec<bool>,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    edges: Vec<usize>,
}

impl InteractionGraph {
    /// Builds the graph from the set of sites carrying at least one epoch.
    pub fn from_active(lattice: Lattice, range: &Range, active: Vec<bool>) -> Result<Self> {
        let n = lattice.sites();
        if active.len() != n {
            return Err(Error::InvalidConfiguration("activity vector does not match the lattice".into()));
        }
        if !lattice.fits(range.span()) {
            return Err(Error::InvalidKernel("range does not fit on the lattice".into()));
        }
        let mut uf = UnionFind::new(n);
        let mut edge_list = Vec::new();
        for x in 0..n {
            for &z in range.half() {
                let y = lattice.shift(x, z);
                if active[x] || active[y] {
                    uf.union(x, y);
                    edge_list.push(x);
                }
            }
        }
        let mut labels = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        let mut root_label = vec![usize::MAX; n];
        for x in 0..n {
            let r = uf.find(x);
            if root_label[r] == usize::MAX {
                root_label[r] = sizes.len();
                sizes.push(0);
            }
            labels[x] = root_label[r];
            sizes[labels[x]] += 1;
        }
        let mut edges = vec![0; sizes.len()];
        for x in edge_list {
            edges[labels[x]] += 1;
        }
        Ok(InteractionGraph {
            lattice,
            active,
            labels,
            sizes,
            edges,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// Component label of every site, numbered in order of first site.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn component_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn component_edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn components(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest_component(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// `(size, count)` pairs in increasing size.
    pub fn size_histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for &s in &self.sizes {
            *h.entry(s).or_insert(0usize) += 1;
        }
        h.into_iter().collect()
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("size,count\n");
        for (s, c) in self.size_histogram() {
            out.push_str(&format!("{s},{c}\n"));
        }
        out
    }
}

/// Probability that a site carries an epoch of a rate-`rate` clock in
/// `[0, t0]`.
pub fn epoch_probability(rate: f64, t0: f64) -> f64 {
    -(-rate * t0).exp_m1()
}

/// Samples the graph of a schedule on a ring with clocks of rate `r(∞) = 1`.
pub fn build_interaction_graph(kernel: &JumpKernel, t0: f64, sites: usize, seed: u64) -> Result<InteractionGraph> {
    build_interaction_graph_on(Lattice::Ring { len: sites }, &Range::from_kernel(kernel), t0, 1.0, seed)
}

pub fn build_interaction_graph_on(
    lattice: Lattice,
    range: &Range,
    t0: f64,
    rate: f64,
    seed: u64,
) -> Result<InteractionGraph> {
    if !(t0 >= 0.0 && t0.is_finite()) {
        return Err(Error::InvalidExperiment(format!("block length {t0} must be finite and nonnegative")));
    }
    let p = epoch_probability(rate, t0);
    let mut rng = rng::stream(seed, "dynamics/interaction-graph");
    let active = (0..lattice.sites()).map(|_| rng.random::<f64>() < p).collect();
    InteractionGraph::from_active(lattice, range, active)
}

/// Block length at which `K^2 (1 − e^{−2 r t0}) = 1`; below it the
/// path-counting bound decays geometrically.
pub fn subcritical_threshold(degree: usize, rate: f64) -> f64 {
    let k = degree as f64;
    -(1.0 - 1.0 / (k * k)).ln() / (2.0 * rate)
}

/// `K^{2n−1} (1 − e^{−2 r t0})^n`, the bound on the probability that the
/// origin's component contains a self-avoiding path with `2n − 1` edges.
pub fn path_bound(degree: usize, rate: f64, t0: f64, n: u32) -> f64 {
    let k = degree as f64;
    k.powi(2 * n as i32 - 1) * epoch_probability(2.0 * rate, t0).powi(n as i32)
}

/// Origin component found by lazily sampling site activity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OriginComponent {
    pub size: usize,
    pub edges: usize,
}

struct LazySampler {
    state: Vec<u8>,
    touched: Vec<usize>,
    queue: Vec<usize>,
}

impl LazySampler {
    fn new(n: usize) -> Self {
        LazySampler {
            state: vec![0; n],
            touched: Vec::new(),
            queue: Vec::new(),
        }
    }

    // bit 0: activity sampled, bit 1: active, bit 2: visited
    fn active(&mut self, x: usize, p: f64, rng: &mut LabRng) -> bool {
        if self.state[x] & 1 == 0 {
            self.state[x] |= 1 | if rng.random::<f64>() < p { 2 } else { 0 };
            self.touched.push(x);
        }
        self.state[x] & 2 != 0
    }

    fn sample(&mut self, lattice: Lattice, range: &Range, p: f64, rng: &mut LabRng) -> OriginComponent {
        let mut size = 0;
        let mut edges = 0;
        self.queue.clear();
        self.queue.push(0);
        self.active(0, p, rng);
        self.state[0] |= 4;
        while let Some(x) = self.queue.pop() {
            size += 1;
            for &z in range.half() {
                for (y, forward) in [(lattice.shift(x, z), true), (lattice.shift(x, [-z[0], -z[1]]), false)] {
                    let ax = self.active(x, p, rng);
                    let ay = self.active(y, p, rng);
                    if !(ax || ay) {
                        continue;
                    }
                    if forward {
                        edges += 1;
                    }
                    if self.state[y] & 4 == 0 {
                        self.state[y] |= 4;
                        self.queue.push(y);
                    }
                }
            }
        }
        for &x in &self.touched {
            self.state[x] = 0;
        }
        self.touched.clear();
        OriginComponent { size, edges }
    }
}

/// Tail of the origin component's edge count against the path bound.
#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub n: u32,
    pub min_edges: usize,
    pub hits: u64,
    pub empirical: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PercolationReport {
    pub lattice: Lattice,
    pub degree: usize,
    pub rate: f64,
    pub t0: f64,
    pub threshold: f64,
    pub samples: usize,
    pub mean_size: f64,
    pub mean_size_se: f64,
    pub mean_edges: f64,
    pub max_size: usize,
    pub tail: Vec<TailRow>,
}

impl PercolationReport {
    /// Whether every tail row with at least `min_hits` hits sits below the
    /// bound.
    pub fn below_bound(&self, min_hits: u64) -> bool {
        self.tail
            .iter()
            .filter(|r| r.hits >= min_hits)
            .all(|r| r.empirical <= r.bound)
    }

    pub fn tail_csv(&self) -> String {
        let mut out = String::from("n,min_edges,hits,empirical,bound\n");
        for r in &self.tail {
            out.push_str(&format!("{},{},{},{},{}\n", r.n, r.min_edges, r.hits, r.empirical, r.bound));
        }
        out
    }
}

/// Samples the origin's component `samples` times with independent
/// schedules and tabulates its size and edge-count tail.
pub fn percolation_experiment(
    lattice: Lattice,
    range: &Range,
    rate: f64,
    t0: f64,
    samples: usize,
    seed: u64,
) -> Result<PercolationReport> {
    if !lattice.fits(range.span()) {
        return Err(Error::InvalidKernel("range does not fit on the lattice".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidExperiment("at least one sample is required".into()));
    }
    let p = epoch_probability(rate, t0);
    let chunks = 64.min(samples);
    let per: Vec<Vec<OriginComponent>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * samples / chunks;
            let hi = (c + 1) * samples / chunks;
            let mut rng = rng::stream(seed, &format!("dynamics/percolation/{c}"));
            let mut sampler = LazySampler::new(lattice.sites());
            (lo..hi).map(|_| sampler.sample(lattice, range, p, &mut rng)).collect()
        })
        .collect();
    let all: Vec<OriginComponent> = per.into_iter().flatten().collect();
    let sizes: Vec<f64> = all.iter().map(|c| c.size as f64).collect();
    let size_stats = crate::stats::MeanSe::of(&sizes);
    let mean_edges = all.iter().map(|c| c.edges as f64).sum::<f64>() / all.len() as f64;
    let max_edges = all.iter().map(|c| c.edges).max().unwrap_or(0);
    let degree = range.degree();
    let mut tail = Vec::new();
    let mut n = 1u32;
    while (2 * n as usize - 1) <= max_edges.max(1) {
        let min_edges = 2 * n as usize - 1;
        let hits = all.iter().filter(|c| c.edges >= min_edges).count() as u64;
        tail.push(TailRow {
            n,
            min_edges,
            hits,
            empirical: hits as f64 / all.len() as f64,
            bound: path_bound(degree, rate, t0, n),
        });
        n += 1;
    }
    Ok(PercolationReport {
        lattice,
        degree,
        rate,
        t0,
        threshold: subcritical_threshold(degree, rate),
        samples: all.len(),
        mean_size: size_stats.mean,
        mean_size_se: size_stats.se,
        mean_edges,
        max_size: all.iter().map(|c| c.size).max().unwrap_or(0),
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_block_gives_singletons() {
        let g = build_interaction_graph(&JumpKernel::totally_asymmetric(), 0.0, 100, 1).unwrap();
        assert_eq!(g.components(), 100);
        assert_eq!(g.size_histogram(), vec![(1, 100)]);
        assert_eq!(g.histogram_csv(), "size,count\n1,100\n");
    }

    #[test]
    fn nearest_neighbour_threshold() {
        let range = Range::from_kernel(&JumpKernel::totally_asymmetric());
        assert_eq!(range.degree(), 2);
        let t = subcritical_threshold(2, 1.0);
        assert!((t - 0.143841).abs() < 1e-5, "{t}");
        assert!((path_bound(2, 1.0, t, 7) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn edges_need_an_active_endpoint() {
        let range = Range::new(&[[1, 0]]).unwrap();
        let lattice = Lattice::Ring { len: 6 };
        let active = vec![false, true, false, false, false, false];
        let g = InteractionGraph::from_active(lattice, &range, active).unwrap();
        assert_eq!(g.components(), 4);
        assert_eq!(g.largest_component(), 3);
        assert_eq!(g.labels()[0], g.labels()[2]);
        assert_eq!(g.component_edges()[g.labels()[0]], 2);
        let g = InteractionGraph::from_active(lattice, &range, vec![true; 6]).unwrap();
        assert_eq!(g.components(), 1);
        assert_eq!(g.component_edges()[0], 6);
    }

    #[test]
    fn torus_components() {
        let range = Range::new(&[[1, 0], [0, 1]]).unwrap();
        assert_eq!(range.degree(), 4);
        let lattice = Lattice::Torus { width: 4, height: 3 };
        let mut active = vec![false; 12];
        active[5] = true;
        let g = InteractionGraph::from_active(lattice, &range, active).unwrap();
        assert_eq!(g.largest_component(), 5);
        assert_eq!(g.components(), 8);
    }

    #[test]
    fn range_must_fit() {
        let range = Range::new(&[[3, 0]]).unwrap();
        assert!(InteractionGraph::from_active(Lattice::Ring { len: 6 }, &range, vec![false; 6]).is_err());
    }

    #[test]
    fn lazy_sampler_matches_full_graph_law() {
        // P(origin isolated) = (1 − p)^3 for nearest-neighbour range.
        let range = Range::new(&[[1, 0]]).unwrap();
        let rep = percolation_experiment(Lattice::Ring { len: 1000 }, &range, 1.0, 0.1, 40_000, 3).unwrap();
        let q = 1.0 - epoch_probability(1.0, 0.1);
        let isolated = 1.0 - rep.tail[0].empirical;
        let se = (q.powi(3) * (1.0 - q.powi(3)) / 40_000.0).sqrt();
        assert!((isolated - q.powi(3)).abs() < 4.0 * se, "{isolated} vs {}", q.powi(3));
        assert!(rep.below_bound(100));
        let full_mean = {
            let mut total = 0.0;
            for s in 0..20 {
                let g = build_interaction_graph_on(Lattice::Ring { len: 1000 }, &range, 0.1, 1.0, s).unwrap();
                total += g.component_sizes().iter().map(|&c| (c * c) as f64).sum::<f64>() / 1000.0;
            }
            total / 20.0
        };
        assert!((full_mean - rep.mean_size).abs() < 0.03 * full_mean, "{full_mean} {}", rep.mean_size);
    }
}
