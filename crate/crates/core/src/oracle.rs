//! Exact finite-state checks on fixed-particle-number sectors of small
//! rings: generator matrices, their duals, canonical measures,
//! stationarity residuals, duality discrepancies and exact currents.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{JumpKernel, RateField, RateFunction};
use crate::error::{Error, Result};
use crate::rng;

/// All configurations of `particles` particles on `sites` sites, in
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct SectorStateSpace {
    sites: usize,
    particles: u32,
    cap: Option<u32>,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl SectorStateSpace {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        self.index.get(state).copied()
    }
}

pub fn enumerate_sector(sites: usize, particles: u32, cap: Option<u32>) -> Result<SectorStateSpace> {
    if sites == 0 {
        return Err(Error::InfeasibleSector("a ring needs at least one site".into()));
    }
    if let Some(k) = cap {
        if particles as u64 > sites as u64 * k as u64 {
            return Err(Error::InfeasibleSector(format!(
                "{particles} particles do not fit on {sites} sites with cap {k}"
            )));
        }
    }
    let mut states = Vec::new();
    let mut current = vec![0u32; sites];
    fill(0, particles, cap.unwrap_or(u32::MAX), &mut current, &mut states);
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(SectorStateSpace {
        sites,
        particles,
        cap,
        states,
        index,
    })
}

fn fill(site: usize, left: u32, cap: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let n = current.len();
    if site == n - 1 {
        if left <= cap {
            current[site] = left;
            out.push(current.clone());
        }
        return;
    }
    let rest = (n - site - 1) as u64 * cap as u64;
    for k in 0..=left.min(cap) {
        if (left - k) as u64 > rest {
            continue;
        }
        current[site] = k;
        fill(site + 1, left - k, cap, current, out);
    }
}

/// `C(n + k - 1, k - 1)`-type closed-form sector sizes.
pub fn sector_size(sites: usize, particles: u32, cap: Option<u32>) -> u64 {
    // inclusion-exclusion over sites exceeding the cap
    let binom = |n: i64, k: i64| -> u64 {
        if k < 0 || n < k {
            return 0;
        }
        let mut r: u128 = 1;
        for i in 0..k as u128 {
            r = r * (n as u128 - i) / (i + 1);
        }
        r as u64
    };
    let l = sites as i64;
    let n = particles as i64;
    match cap {
        None => binom(n + l - 1, l - 1),
        Some(k) => {
            let k = k as i64;
            let mut total: i128 = 0;
            for j in 0..=l {
                let rem = n - j * (k + 1);
                if rem < 0 {
                    break;
                }
                let term = binom(l, j) as i128 * binom(rem + l - 1, l - 1) as i128;
                total += if j % 2 == 0 { term } else { -term };
            }
            total as u64
        }
    }
}

/// Jump rules whose generator is assembled on a sector.
#[derive(Clone, Debug)]
pub enum SectorModel {
    Zrp { kernel: JumpKernel, rate: RateFunction },
    KExclusion { cap: u32 },
}

impl SectorModel {
    fn label(&self) -> String {
        match self {
            SectorModel::Zrp { kernel, .. } => kernel_label(kernel),
            SectorModel::KExclusion { cap } => format!("tasep-k{cap}"),
        }
    }
}

fn kernel_label(kernel: &JumpKernel) -> String {
    kernel
        .support()
        .iter()
        .map(|(z, p)| format!("{z}:{p:.6}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Rate matrix over a sector: off-diagonal rows plus the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let diag = rows.iter().map(|r| -r.iter().map(|e| e.1).sum::<f64>()).collect();
        GeneratorMatrix { rows, diag }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.rows[i].iter().filter(|e| e.0 == j).map(|e| e.1).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[i][j] += v;
            }
            m[i][i] += self.diag[i];
        }
        m
    }

    /// `(G f)(i) = sum_j G(i, j) f(j)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| self.diag[i] * f[i] + row.iter().map(|&(j, v)| v * f[j]).sum::<f64>())
            .collect()
    }

    /// `(pi G)(j) = sum_i pi(i) G(i, j)`.
    pub fn left_apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diag.iter().zip(pi).map(|(d, p)| d * p).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j] += pi[i] * v;
            }
        }
        out
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(-d))
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.diag)
            .map(|(r, d)| (d + r.iter().map(|e| e.1).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_off_diagonal(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }
}

/// Kernel folded onto the ring: `p_L(z) = sum_m p(z + m L)`.
pub fn periodic_kernel(kernel: &JumpKernel, sites: usize) -> Result<Vec<f64>> {
    if 2 * kernel.range() as usize > sites {
        return Err(Error::InvalidKernel(format!(
            "kernel range {} exceeds half the ring size {sites}",
            kernel.range()
        )));
    }
    let mut p = vec![0.0; sites];
    for &(z, q) in kernel.support() {
        p[z.rem_euclid(sites as i64) as usize] += q;
    }
    Ok(p)
}

/// Generator on the sector.
pub fn build_generator(field: &RateField, model: &SectorModel, sector: &SectorStateSpace) -> Result<GeneratorMatrix> {
    let l = sector.sites();
    if field.len() != l {
        return Err(Error::InvalidConfiguration(format!(
            "rate field has {} sites, sector has {l}",
            field.len()
        )));
    }
    let alphas = field.alphas();
    let rows: Vec<Vec<(usize, f64)>> = match model {
        SectorModel::Zrp { kernel, rate } => {
            let p = periodic_kernel(kernel, l)?;
            sector
                .states()
                .par_iter()
                .map(|eta| {
                    let mut row = Vec::new();
                    let mut next = eta.clone();
                    for x in 0..l {
                        if eta[x] == 0 {
                            continue;
                        }
                        let out = alphas[x] * rate.rate(eta[x]);
                        for (d, &q) in p.iter().enumerate() {
                            if q == 0.0 || d == 0 {
                                continue;
                            }
                            let y = (x + d) % l;
                            next[x] -= 1;
                            next[y] += 1;
                            row.push((sector.index_of(&next).expect("sector is closed"), out * q));
                            next[x] += 1;
                            next[y] -= 1;
                        }
                    }
                    row
                })
                .collect()
        }
        SectorModel::KExclusion { cap } => {
            if sector.cap() != Some(*cap) {
                return Err(Error::InvalidConfiguration("sector cap differs from the model's K".into()));
            }
            sector
                .states()
                .par_iter()
                .map(|eta| {
                    let mut row = Vec::new();
                    let mut next = eta.clone();
                    for x in 0..l {
                        let y = (x + 1) % l;
                        if eta[x] >= 1 && eta[y] < *cap && x != y {
                            next[x] -= 1;
                            next[y] += 1;
                            row.push((sector.index_of(&next).expect("sector is closed"), alphas[x]));
                            next[x] += 1;
                            next[y] -= 1;
                        }
                    }
                    row
                })
                .collect()
        }
    };
    Ok(GeneratorMatrix::from_rows(rows))
}

/// Generator and its dual (kernel reversed) for zero-range dynamics.
pub fn build_generator_pair(
    field: &RateField,
    kernel: &JumpKernel,
    rate: &RateFunction,
    sector: &SectorStateSpace,
) -> Result<(GeneratorMatrix, GeneratorMatrix)> {
    let forward = SectorModel::Zrp {
        kernel: kernel.clone(),
        rate: rate.clone(),
    };
    let dual = SectorModel::Zrp {
        kernel: kernel.reversed(),
        rate: rate.clone(),
    };
    Ok((build_generator(field, &forward, sector)?, build_generator(field, &dual, sector)?))
}

/// Probability vector over a sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorMeasure {
    probs: Vec<f64>,
}

impl SectorMeasure {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Measurement("weights must be finite and positive".into()));
        }
        let total: f64 = weights.iter().sum();
        Ok(SectorMeasure {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(sector: &SectorStateSpace) -> Self {
        SectorMeasure::from_weights(vec![1.0; sector.len()]).expect("nonempty sector")
    }

    /// Canonical restriction of the product measure: weight
    /// `prod_x alpha_x^{-eta(x)} / (r(1)...r(eta(x)))`.
    pub fn canonical(sector: &SectorStateSpace, field: &RateField, rate: &RateFunction) -> Self {
        let alphas = field.alphas();
        let weights = sector
            .states()
            .iter()
            .map(|eta| {
                eta.iter()
                    .zip(alphas)
                    .map(|(&k, a)| a.powi(-(k as i32)) / rate.rate_product(k))
                    .product()
            })
            .collect();
        SectorMeasure::from_weights(weights).expect("positive weights")
    }

    /// Solves `pi G = 0`, `sum pi = 1` densely; for small irreducible sectors.
    pub fn stationary(gen: &GeneratorMatrix) -> Result<Self> {
        let n = gen.len();
        let g = gen.to_dense();
        // transpose system with the last equation replaced by normalization
        let mut a: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g[i][j]).collect()).collect();
        let mut b = vec![0.0; n];
        a[n - 1] = vec![1.0; n];
        b[n - 1] = 1.0;
        let x = solve_dense(a, b)?;
        if x.iter().any(|p| *p <= 0.0) {
            return Err(Error::Measurement("stationary solve produced nonpositive mass".into()));
        }
        SectorMeasure::from_weights(x)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Multiplies one entry and renormalizes.
    pub fn perturbed(&self, index: usize, factor: f64) -> Self {
        let mut w = self.probs.clone();
        w[index] *= factor;
        SectorMeasure::from_weights(w).expect("positive weights")
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Measurement("singular system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// `||pi G||_inf`.
pub fn verify_stationarity(measure: &SectorMeasure, gen: &GeneratorMatrix) -> f64 {
    gen.left_apply(measure.probs()).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `|sum pi g (G f) - sum pi f (G* g)|`.
pub fn verify_duality(f: &[f64], g: &[f64], measure: &SectorMeasure, gen: &GeneratorMatrix, dual: &GeneratorMatrix) -> f64 {
    let gf = gen.apply(f);
    let dg = dual.apply(g);
    let pi = measure.probs();
    let lhs: f64 = (0..pi.len()).map(|i| pi[i] * g[i] * gf[i]).sum();
    let rhs: f64 = (0..pi.len()).map(|i| pi[i] * f[i] * dg[i]).sum();
    (lhs - rhs).abs()
}

/// Tolerance scale `max(1, ||f|| ||g|| max exit rate)`.
pub fn duality_scale(f: &[f64], g: &[f64], gen: &GeneratorMatrix) -> f64 {
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (norm(f) * norm(g) * gen.max_exit_rate()).max(1.0)
}

/// `max |pi(i) G*(i, j) - pi(j) G(j, i)|`.
pub fn weighted_transpose_residual(measure: &SectorMeasure, gen: &GeneratorMatrix, dual: &GeneratorMatrix) -> f64 {
    let g = gen.to_dense();
    let d = dual.to_dense();
    let pi = measure.probs();
    let n = pi.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((pi[i] * d[i][j] - pi[j] * g[j][i]).abs());
        }
    }
    worst
}

/// Mean signed rate of jumps across the bond `(bond, bond + 1)` under the
/// measure.
pub fn exact_stationary_current(
    sector: &SectorStateSpace,
    measure: &SectorMeasure,
    field: &RateField,
    model: &SectorModel,
    bond: usize,
) -> f64 {
    let l = sector.sites() as i64;
    let alphas = field.alphas();
    let b = bond as i64 % l;
    sector
        .states()
        .iter()
        .zip(measure.probs())
        .map(|(eta, p)| {
            let rate: f64 = match model {
                SectorModel::Zrp { kernel, rate } => (0..l)
                    .filter(|&x| eta[x as usize] > 0)
                    .map(|x| {
                        let out = alphas[x as usize] * rate.rate(eta[x as usize]);
                        kernel
                            .support()
                            .iter()
                            .map(|&(z, q)| q * crossings(x, z, b, l) as f64)
                            .sum::<f64>()
                            * out
                    })
                    .sum(),
                SectorModel::KExclusion { cap } => {
                    let y = ((b + 1) % l) as usize;
                    if eta[b as usize] >= 1 && eta[y] < *cap {
                        alphas[b as usize]
                    } else {
                        0.0
                    }
                }
            };
            p * rate
        })
        .sum()
}

/// Signed number of times a jump `x -> x + z` crosses the bond `(b, b+1)`.
fn crossings(x: i64, z: i64, b: i64, l: i64) -> i64 {
    // positions x+1..=x+z for z > 0 pass from b to b+1 when they hit b+1
    let (lo, hi, sign) = if z > 0 { (x + 1, x + z, 1) } else { (x + z + 1, x, -1) };
    let target = (b + 1).rem_euclid(l);
    let first = lo + (target - lo).rem_euclid(l);
    if first > hi {
        0
    } else {
        sign * (1 + (hi - first) / l)
    }
}

/// One randomized check.
#[derive(Clone, Debug)]
pub struct OracleCase {
    pub sites: usize,
    pub particles: u32,
    pub kernel: JumpKernel,
    pub rate: RateFunction,
    pub rate_label: String,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: u32,
    pub cap: Option<u32>,
    pub kernel: String,
    pub rate: String,
    pub seed: u64,
    pub states: usize,
    pub residual: f64,
    pub discrepancy: f64,
    pub scaled_discrepancy: f64,
    pub reduction_gap: f64,
    pub transpose_residual: f64,
    pub pass: bool,
}

/// The randomized suite: rings of 2 to 5 sites, 1 to 4 particles, rates in
/// `[0.5, 1]`, alternating rate functions and kernels.
pub fn default_suite(seed: u64, cases: usize) -> Vec<OracleCase> {
    let mut rng = rng::stream(seed, "oracle/suite");
    (0..cases)
        .map(|i| {
            let sites = rng.random_range(2..=5usize);
            let particles = rng.random_range(1..=4u32);
            let (rate, rate_label) = if i % 2 == 0 {
                (RateFunction::indicator(), "geometric".to_string())
            } else {
                (RateFunction::capped_linear(2).expect("valid"), "min(k,2)".to_string())
            };
            let kernel = if (i / 2) % 2 == 0 {
                JumpKernel::totally_asymmetric()
            } else {
                JumpKernel::nearest_neighbor(2.0 / 3.0).expect("valid")
            };
            let alphas = (0..sites).map(|_| rng.random_range(0.5..=1.0)).collect();
            OracleCase {
                sites,
                particles,
                kernel,
                rate,
                rate_label,
                alphas,
                seed: rng::derive(seed, &format!("oracle/case/{i}")),
            }
        })
        .collect()
}

/// Runs one case with `pairs` random `(f, g)` test pairs.
pub fn run_case(case: &OracleCase, pairs: usize) -> Result<CaseReport> {
    let sector = enumerate_sector(case.sites, case.particles, None)?;
    let field = RateField::from_alphas(case.alphas.clone())?;
    let (gen, dual) = build_generator_pair(&field, &case.kernel, &case.rate, &sector)?;
    let measure = SectorMeasure::canonical(&sector, &field, &case.rate);
    let residual = verify_stationarity(&measure, &gen);
    let mut rng = rng::stream(case.seed, "oracle/test-functions");
    let n = sector.len();
    let mut discrepancy = 0.0f64;
    let mut scaled = 0.0f64;
    for _ in 0..pairs {
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = verify_duality(&f, &g, &measure, &gen, &dual);
        discrepancy = discrepancy.max(d);
        scaled = scaled.max(d / duality_scale(&f, &g, &gen));
    }
    let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ones = vec![1.0; n];
    let reduced = verify_duality(&f, &ones, &measure, &gen, &dual);
    let direct: f64 = gen.left_apply(measure.probs()).iter().zip(&f).map(|(r, x)| r * x).sum::<f64>().abs();
    let transpose_residual = weighted_transpose_residual(&measure, &gen, &dual);
    Ok(CaseReport {
        sites: case.sites,
        particles: case.particles,
        cap: None,
        kernel: kernel_label(&case.kernel),
        rate: case.rate_label.clone(),
        seed: case.seed,
        states: n,
        residual,
        discrepancy,
        scaled_discrepancy: scaled,
        reduction_gap: (reduced - direct).abs(),
        transpose_residual,
        pass: residual < 1e-10 && scaled < 1e-10,
    })
}

pub fn run_suite(cases: &[OracleCase], pairs: usize) -> Result<Vec<CaseReport>> {
    cases.par_iter().map(|c| run_case(c, pairs)).collect()
}

/// One JSON object per line.
pub fn suite_json_lines(reports: &[CaseReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("serializable report"));
        out.push('\n');
    }
    out
}

/// Exact current of a small ring, for comparison with simulation.
pub fn exact_ring_current(field: &RateField, model: &SectorModel, particles: u32, bond: usize) -> Result<f64> {
    let cap = match model {
        SectorModel::KExclusion { cap } => Some(*cap),
        SectorModel::Zrp { .. } => None,
    };
    let sector = enumerate_sector(field.len(), particles, cap)?;
    let gen = build_generator(field, model, &sector)?;
    let measure = match model {
        SectorModel::Zrp { rate, .. } => SectorMeasure::canonical(&sector, field, rate),
        SectorModel::KExclusion { .. } => SectorMeasure::stationary(&gen)?,
    };
    let residual = verify_stationarity(&measure, &gen);
    if residual > 1e-10 {
        return Err(Error::Measurement(format!(
            "reference measure for {} is not stationary (residual {residual:e})",
            model.label()
        )));
    }
    Ok(exact_stationary_current(&sector, &measure, field, model, bond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sector_sizes() {
        assert_eq!(enumerate_sector(3, 0, None).unwrap().states(), &[vec![0, 0, 0]]);
        assert_eq!(enumerate_sector(3, 2, None).unwrap().len(), 6);
        assert_eq!(enumerate_sector(3, 2, Some(1)).unwrap().len(), 3);
        assert!(enumerate_sector(3, 4, Some(1)).is_err());
        let s = enumerate_sector(3, 2, None).unwrap();
        assert_eq!(s.states()[0], vec![0, 0, 2]);
        assert!(s.states().windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn sizes_match_closed_form(l in 1usize..7, n in 0u32..8, cap in proptest::option::of(1u32..4)) {
            let expected = sector_size(l, n, cap);
            match enumerate_sector(l, n, cap) {
                Ok(s) => prop_assert_eq!(s.len() as u64, expected),
                Err(_) => prop_assert_eq!(expected, 0),
            }
        }
    }

    fn example_field() -> RateField {
        RateField::from_alphas(vec![0.6, 0.8, 1.0]).unwrap()
    }

    #[test]
    fn single_state_sector() {
        let sector = enumerate_sector(3, 0, None).unwrap();
        let model = SectorModel::Zrp {
            kernel: JumpKernel::totally_asymmetric(),
            rate: RateFunction::indicator(),
        };
        let gen = build_generator(&example_field(), &model, &sector).unwrap();
        assert_eq!(gen.to_dense(), vec![vec![0.0]]);
    }

    #[test]
    fn hand_computed_entry() {
        let sector = enumerate_sector(3, 2, None).unwrap();
        let model = SectorModel::Zrp {
            kernel: JumpKernel::totally_asymmetric(),
            rate: RateFunction::indicator(),
        };
        let gen = build_generator(&example_field(), &model, &sector).unwrap();
        let from = sector.index_of(&[2, 0, 0]).unwrap();
        let to = sector.index_of(&[1, 1, 0]).unwrap();
        assert_eq!(gen.get(from, to), 0.6);
        assert!(gen.max_row_sum() < 1e-14);
        let measure = SectorMeasure::canonical(&sector, &example_field(), &RateFunction::indicator());
        assert!(verify_stationarity(&measure, &gen) < 1e-12);
        let bad = measure.perturbed(2, 1.01);
        assert!(verify_stationarity(&bad, &gen) > 1e-4);
    }

    #[test]
    fn homogeneous_tasep_sector() {
        let field = RateField::homogeneous(4);
        let sector = enumerate_sector(4, 2, Some(1)).unwrap();
        let gen = build_generator(&field, &SectorModel::KExclusion { cap: 1 }, &sector).unwrap();
        assert!(verify_stationarity(&SectorMeasure::uniform(&sector), &gen) < 1e-12);
        let field = RateField::homogeneous(6);
        let j = exact_ring_current(&field, &SectorModel::KExclusion { cap: 1 }, 3, 0).unwrap();
        assert!((j - 0.3).abs() < 1e-12);
        assert_eq!(exact_ring_current(&field, &SectorModel::KExclusion { cap: 1 }, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_range_limited() {
        let field = RateField::homogeneous(3);
        let sector = enumerate_sector(3, 1, None).unwrap();
        let model = SectorModel::Zrp {
            kernel: JumpKernel::new(vec![(2, 1.0)]).unwrap(),
            rate: RateFunction::indicator(),
        };
        assert!(build_generator(&field, &model, &sector).is_err());
    }

    #[test]
    fn self_dual_symmetric_kernel() {
        let field = RateField::from_alphas(vec![0.7, 0.9, 0.55, 1.0]).unwrap();
        let sector = enumerate_sector(4, 3, None).unwrap();
        let kernel = JumpKernel::nearest_neighbor(0.5).unwrap();
        let (gen, dual) = build_generator_pair(&field, &kernel, &RateFunction::indicator(), &sector).unwrap();
        assert_eq!(gen, dual);
        let measure = SectorMeasure::canonical(&sector, &field, &RateFunction::indicator());
        let f: Vec<f64> = (0..sector.len()).map(|i| (i as f64).sin()).collect();
        assert!(verify_duality(&f, &f, &measure, &gen, &dual) < 1e-12);
    }

    #[test]
    fn suite_passes() {
        let reports = run_suite(&default_suite(1, 20), 100).unwrap();
        for r in &reports {
            assert!(r.pass, "{r:?}");
            assert!(r.reduction_gap < 1e-12);
            assert!(r.transpose_residual < 1e-12);
        }
        let lines = suite_json_lines(&reports);
        assert_eq!(lines.lines().count(), 20);
        assert!(lines.starts_with("{\"L\":"));
    }

    #[test]
    fn bond_crossings() {
        assert_eq!(crossings(0, 1, 0, 5), 1);
        assert_eq!(crossings(1, -1, 0, 5), -1);
        assert_eq!(crossings(2, 1, 0, 5), 0);
        assert_eq!(crossings(4, 2, 0, 5), 1);
        assert_eq!(crossings(0, 7, 0, 5), 2);
    }

    #[test]
    fn zrp_current_equals_canonical_formula() {
        let field = example_field();
        let model = SectorModel::Zrp {
            kernel: JumpKernel::totally_asymmetric(),
            rate: RateFunction::indicator(),
        };
        for n in 1..5 {
            let j = exact_ring_current(&field, &model, n, 1).unwrap();
            let c = crate::equilibria::canonical_ring_current(field.alphas(), n as usize);
            assert!((j - c).abs() < 1e-12, "{n}: {j} vs {c}");
        }
    }

    #[test]
    fn stationary_solve_on_disordered_exclusion() {
        let field = RateField::from_alphas(vec![0.6, 0.8, 1.0, 0.7]).unwrap();
        let sector = enumerate_sector(4, 3, Some(2)).unwrap();
        let gen = build_generator(&field, &SectorModel::KExclusion { cap: 2 }, &sector).unwrap();
        let m = SectorMeasure::stationary(&gen).unwrap();
        assert!(verify_stationarity(&m, &gen) < 1e-12);
        // current is the same across every bond
        let j0 = exact_stationary_current(&sector, &m, &field, &SectorModel::KExclusion { cap: 2 }, 0);
        let j2 = exact_stationary_current(&sector, &m, &field, &SectorModel::KExclusion { cap: 2 }, 2);
        assert!((j0 - j2).abs() < 1e-12);
    }
}
