//! Quenched disorder, jump kernels and rate functions.
//!
//! Site rate factors `alpha_x` are drawn i.i.d. from a [`DisorderLaw`]
//! supported in `[c, 1]` and then frozen into a [`RateField`]. A particle
//! leaves a site holding `k` particles at rate `alpha_x * r(k)` and lands
//! at displacement `z` with probability `p(z)` from the [`JumpKernel`].

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng;

/// Distribution `Q` of a single site rate factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderLaw {
    /// Atoms `(value, weight)`.
    FiniteSupport { atoms: Vec<(f64, f64)> },
    /// Uniform on `[c, 1]`.
    UniformInterval { c: f64 },
    /// `c + (1 - c) B` with `B ~ Beta(a, b)`.
    ShiftedBeta { c: f64, a: f64, b: f64 },
}

impl DisorderLaw {
    /// No disorder: every site has rate factor 1.
    pub fn homogeneous() -> Self {
        DisorderLaw::FiniteSupport {
            atoms: vec![(1.0, 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DisorderLaw::FiniteSupport { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidLaw("finite support law without atoms".into()));
                }
                for &(v, w) in atoms {
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(Error::InvalidLaw(format!("support value {v} outside (0, 1]")));
                    }
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::InvalidLaw(format!("negative weight {w}")));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!("weights sum to {total}, expected 1")));
                }
                if atoms.iter().all(|a| a.1 == 0.0) {
                    return Err(Error::InvalidLaw("all weights zero".into()));
                }
                Ok(())
            }
            DisorderLaw::UniformInterval { c } => check_endpoint(*c),
            DisorderLaw::ShiftedBeta { c, a, b } => {
                check_endpoint(*c)?;
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidLaw(format!("beta shapes ({a}, {b}) must be positive")));
                }
                Ok(())
            }
        }
    }

    /// Left endpoint `c` of the support.
    pub fn left_endpoint(&self) -> f64 {
        match self {
            DisorderLaw::FiniteSupport { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|a| a.0)
                .fold(f64::INFINITY, f64::min),
            DisorderLaw::UniformInterval { c } | DisorderLaw::ShiftedBeta { c, .. } => *c,
        }
    }

    /// Whether `Q(alpha = c) > 0`.
    pub fn has_atom_at_left_endpoint(&self) -> bool {
        match self {
            DisorderLaw::FiniteSupport { .. } => true,
            DisorderLaw::UniformInterval { c } | DisorderLaw::ShiftedBeta { c, .. } => *c >= 1.0,
        }
    }

    fn beta_shape(&self) -> Option<(f64, f64, f64)> {
        match *self {
            DisorderLaw::UniformInterval { c } => Some((c, 1.0, 1.0)),
            DisorderLaw::ShiftedBeta { c, a, b } => Some((c, a, b)),
            DisorderLaw::FiniteSupport { .. } => None,
        }
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DisorderLaw::FiniteSupport { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms.iter().rev().find(|a| a.1 > 0.0).map(|a| a.0).unwrap()
            }
            DisorderLaw::UniformInterval { c } => {
                let u: f64 = rng.random();
                (c + (1.0 - c) * u).min(1.0)
            }
            DisorderLaw::ShiftedBeta { c, a, b } => {
                let beta = Beta::new(*a, *b).expect("validated shapes");
                (c + (1.0 - c) * beta.sample(rng)).min(1.0)
            }
        }
    }

    /// `E_Q[g(alpha)]`. Exact for finite support; adaptive quadrature in the
    /// Beta variable otherwise.
    pub fn expect(&self, g: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
        match self {
            DisorderLaw::FiniteSupport { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|&(v, w)| w * g(v))
                .sum(),
            _ => {
                let (c, a, b) = self.beta_shape().unwrap();
                self.expect_beta_window(&g, c, a, b, 0.0, 1.0, rel_tol)
            }
        }
    }

    /// `E_Q[g(alpha); B in [lo, hi]]` in the Beta variable `B`.
    #[allow(clippy::too_many_arguments)]
    fn expect_beta_window(
        &self,
        g: &impl Fn(f64) -> f64,
        c: f64,
        a: f64,
        b: f64,
        lo: f64,
        hi: f64,
        rel_tol: f64,
    ) -> f64 {
        let log_norm = ln_beta(a, b);
        let integrand = |x: f64| {
            let density = ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - log_norm).exp();
            density * g(c + (1.0 - c) * x)
        };
        quadrature::integrate(integrand, lo, hi, 1e-300, rel_tol).0
    }

    /// Integrates `g` against the law on the Beta-variable windows
    /// `[10^-(k+1), 10^-k]` for `k = 0..decades`, returning the pieces from
    /// the bulk toward the left endpoint. Used to detect divergence of
    /// integrals that blow up at `alpha = c`.
    pub(crate) fn expect_tail_decades(&self, g: impl Fn(f64) -> f64, decades: usize) -> Option<Vec<f64>> {
        let (c, a, b) = self.beta_shape()?;
        let mut pieces = Vec::with_capacity(decades + 1);
        pieces.push(self.expect_beta_window(&g, c, a, b, 0.1, 1.0, 1e-12));
        for k in 1..decades {
            let hi = 10f64.powi(-(k as i32));
            pieces.push(self.expect_beta_window(&g, c, a, b, hi * 0.1, hi, 1e-12));
        }
        Some(pieces)
    }

    /// Quantile function `alpha(u)` for `u in [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DisorderLaw::FiniteSupport { atoms } => {
                let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
                sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut acc = 0.0;
                for &(v, w) in &sorted {
                    acc += w;
                    if u <= acc {
                        return v;
                    }
                }
                sorted.last().unwrap().0
            }
            _ => {
                let (c, a, b) = self.beta_shape().unwrap();
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if beta_cdf(mid, a, b) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                c + (1.0 - c) * 0.5 * (lo + hi)
            }
        }
    }
}

fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    statrs::function::beta::beta_reg(a, b, x.clamp(0.0, 1.0))
}

fn check_endpoint(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidLaw(format!(
            "left endpoint c = {c} must lie in (0, 1) for a continuous law"
        )));
    }
    Ok(())
}

/// A frozen realization of the site rate factors on a ring of `L` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct RateField {
    alphas: Vec<f64>,
    law: Option<DisorderLaw>,
    seed: Option<u64>,
}

impl RateField {
    /// Field from explicit values in `(0, 1]`.
    pub fn from_alphas(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidLaw("empty rate field".into()));
        }
        if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::InvalidLaw(format!("rate factor {bad} outside (0, 1]")));
        }
        Ok(RateField {
            alphas,
            law: None,
            seed: None,
        })
    }

    /// All sites at rate factor 1.
    pub fn homogeneous(sites: usize) -> Self {
        RateField {
            alphas: vec![1.0; sites.max(1)],
            law: Some(DisorderLaw::homogeneous()),
            seed: None,
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn law(&self) -> Option<&DisorderLaw> {
        self.law.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn min_alpha(&self) -> f64 {
        self.alphas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Export as CSV with header `site_index,alpha`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("site_index,alpha\n");
        for (i, a) in self.alphas.iter().enumerate() {
            out.push_str(&format!("{i},{a}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    /// Import a field previously written by [`RateField::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("site_index,alpha") {
            return Err(parse_err("expected header site_index,alpha".into()));
        }
        let mut alphas = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (idx, alpha) = line
                .split_once(',')
                .ok_or_else(|| parse_err(format!("row {row}: expected two columns")))?;
            let idx: usize = idx.trim().parse().map_err(|_| parse_err(format!("row {row}: bad index")))?;
            if idx != alphas.len() {
                return Err(parse_err(format!("row {row}: site indices must be 0..L in order")));
            }
            alphas.push(alpha.trim().parse().map_err(|_| parse_err(format!("row {row}: bad alpha")))?);
        }
        RateField::from_alphas(alphas)
    }
}

/// i.i.d. draws from `law` on `sites` sites, reproducible from the seed.
pub fn sample_rate_field(law: &DisorderLaw, sites: usize, seed: u64) -> Result<RateField> {
    law.validate()?;
    if sites == 0 {
        return Err(Error::InvalidLaw("rate field needs at least one site".into()));
    }
    let mut rng = rng::stream(seed, "environment/rate-field");
    let alphas = (0..sites).map(|_| law.sample(&mut rng)).collect();
    Ok(RateField {
        alphas,
        law: Some(law.clone()),
        seed: Some(seed),
    })
}

/// Translation-invariant jump law `p(z)` on the one-dimensional lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(i64, f64)>", into = "Vec<(i64, f64)>")]
pub struct JumpKernel {
    support: Vec<(i64, f64)>,
}

impl TryFrom<Vec<(i64, f64)>> for JumpKernel {
    type Error = Error;
    fn try_from(v: Vec<(i64, f64)>) -> Result<Self> {
        JumpKernel::new(v)
    }
}

impl From<JumpKernel> for Vec<(i64, f64)> {
    fn from(k: JumpKernel) -> Self {
        k.support
    }
}

impl JumpKernel {
    pub fn new(mut support: Vec<(i64, f64)>) -> Result<Self> {
        support.retain(|s| s.1 != 0.0);
        if support.is_empty() {
            return Err(Error::InvalidKernel("empty support".into()));
        }
        support.sort_by_key(|s| s.0);
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidKernel(format!("displacement {} listed twice", w[0].0)));
            }
        }
        for &(z, p) in &support {
            if z == 0 {
                return Err(Error::InvalidKernel("zero displacement".into()));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidKernel(format!("p({z}) = {p} outside [0, 1]")));
            }
        }
        let total: f64 = support.iter().map(|s| s.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidKernel(format!("probabilities sum to {total}")));
        }
        Ok(JumpKernel { support })
    }

    /// `p(1) = 1`.
    pub fn totally_asymmetric() -> Self {
        JumpKernel { support: vec![(1, 1.0)] }
    }

    /// `p(1) = q`, `p(-1) = 1 - q`.
    pub fn nearest_neighbor(q: f64) -> Result<Self> {
        JumpKernel::new(vec![(-1, 1.0 - q), (1, q)])
    }

    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    /// Mean drift `sum z p(z)`.
    pub fn drift(&self) -> f64 {
        self.support.iter().map(|&(z, p)| z as f64 * p).sum()
    }

    /// `p*(z) = p(-z)`.
    pub fn reversed(&self) -> Self {
        let mut support: Vec<(i64, f64)> = self.support.iter().map(|&(z, p)| (-z, p)).collect();
        support.sort_by_key(|s| s.0);
        JumpKernel { support }
    }

    pub fn is_totally_asymmetric(&self) -> bool {
        self.support == [(1, 1.0)]
    }

    /// Largest `|z|` in the support.
    pub fn range(&self) -> u64 {
        self.support.iter().map(|s| s.0.unsigned_abs()).max().unwrap_or(0)
    }

    /// Displacements with positive probability.
    pub fn neighborhood(&self) -> Vec<i64> {
        self.support.iter().map(|s| s.0).collect()
    }

    /// Syntactic irreducibility check on the line: the displacements must
    /// generate the integers, i.e. their gcd is one.
    pub fn is_irreducible(&self) -> bool {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        self.support.iter().fold(0, |g, s| gcd(g, s.0.unsigned_abs())) == 1
    }
}

/// The monotone bounded jump rate `r(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateTable", into = "RateTable")]
pub struct RateFunction {
    table: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RateTable {
    table: Vec<f64>,
}

impl TryFrom<RateTable> for RateFunction {
    type Error = Error;
    fn try_from(t: RateTable) -> Result<Self> {
        RateFunction::from_table(t.table)
    }
}

impl From<RateFunction> for RateTable {
    fn from(r: RateFunction) -> Self {
        RateTable { table: r.table }
    }
}

impl RateFunction {
    /// Rates `r(0..=k_max)`; `r(k) = r(k_max)` for every larger `k`, so
    /// the last entry is the tail value `r(inf)`.
    pub fn from_table(table: Vec<f64>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::InvalidRate("table must list at least r(0) and r(1)".into()));
        }
        if table[0] != 0.0 {
            return Err(Error::InvalidRate(format!("r(0) = {} must be 0", table[0])));
        }
        if !(table[1] > 0.0) {
            return Err(Error::InvalidRate("r(1) must be positive".into()));
        }
        if table.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidRate("rates must be finite".into()));
        }
        if table.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidRate("rates must be nondecreasing".into()));
        }
        Ok(RateFunction { table })
    }

    /// `r(k) = 1{k >= 1}`: the product measures are geometric.
    pub fn indicator() -> Self {
        RateFunction { table: vec![0.0, 1.0] }
    }

    /// `r(k) = min(k, cap)`.
    pub fn capped_linear(cap: u32) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidRate("cap must be positive".into()));
        }
        RateFunction::from_table((0..=cap).map(f64::from).collect())
    }

    #[inline]
    pub fn rate(&self, k: u32) -> f64 {
        let k = k as usize;
        if k < self.table.len() {
            self.table[k]
        } else {
            self.tail()
        }
    }

    /// `r(inf)`.
    #[inline]
    pub fn tail(&self) -> f64 {
        *self.table.last().unwrap()
    }

    /// Index from which `r` is constant.
    pub fn k_max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Whether `r(k) = 1{k >= 1}`.
    pub fn is_indicator(&self) -> bool {
        self.table.iter().skip(1).all(|&r| r == 1.0)
    }

    /// `r(1) * ... * r(k)`.
    pub fn rate_product(&self, k: u32) -> f64 {
        (1..=k).map(|j| self.rate(j)).product()
    }
}
