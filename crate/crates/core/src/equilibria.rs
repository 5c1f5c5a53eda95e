//! Product-form equilibria and the macroscopic flux.
//!
//! For a fugacity `psi < r(inf)` the single-site law is
//! `mu_psi(k) = psi^k / (Z(psi) r(1)...r(k))`. Under disorder the site
//! `x` marginal is `mu_{phi / alpha_x}`, the averaged density is
//! `rho(phi) = E_Q[M(phi / alpha)]` and the flux `f` is its inverse,
//! extended flat at `c r(inf)` above the critical density.
//!
//! Because a [`RateFunction`] is constant from `k_max` on, every series
//! has an exactly geometric tail and is summed in closed form.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::Configuration;
use crate::environment::{DisorderLaw, RateField, RateFunction};
use crate::error::{Error, Result};
use crate::rng;

/// Relative tolerance of the quadratures over the disorder law.
const LAW_REL_TOL: f64 = 1e-11;

/// Partial sums of `k^j psi^k / R(k)` for `j = 0, 1, 2`.
#[derive(Clone, Copy, Debug)]
struct Series {
    z: f64,
    first: f64,
    second: f64,
}

fn check_psi(psi: f64, rate: &RateFunction) -> Result<()> {
    if !(psi >= 0.0 && psi < rate.tail()) {
        return Err(Error::FugacityOutOfRange {
            psi,
            limit: rate.tail(),
        });
    }
    Ok(())
}

fn series(psi: f64, rate: &RateFunction) -> Series {
    let m = rate.k_max();
    let mut term = 1.0;
    let (mut z, mut first, mut second) = (0.0, 0.0, 0.0);
    for k in 0..m {
        let kf = k as f64;
        z += term;
        first += kf * term;
        second += kf * kf * term;
        term *= psi / rate.rate(k as u32 + 1);
    }
    // term = psi^m / R(m); beyond m the ratio is q = psi / r(inf)
    let q = psi / rate.tail();
    let gap = (rate.tail() - psi) / rate.tail();
    let mf = m as f64;
    z += term / gap;
    first += term * (mf / gap + q / (gap * gap));
    second += term * (mf * mf / gap + 2.0 * mf * q / (gap * gap) + q * (1.0 + q) / (gap * gap * gap));
    Series { z, first, second }
}

/// `Z(psi) = sum_k psi^k / (r(1)...r(k))`.
pub fn partition_z(psi: f64, rate: &RateFunction) -> Result<f64> {
    check_psi(psi, rate)?;
    Ok(series(psi, rate).z)
}

/// `M(psi)`, the mean occupancy under `mu_psi`.
pub fn mean_occupancy(psi: f64, rate: &RateFunction) -> Result<f64> {
    check_psi(psi, rate)?;
    Ok(mean_unchecked(psi, rate))
}

#[inline]
fn mean_unchecked(psi: f64, rate: &RateFunction) -> f64 {
    if rate.is_indicator() {
        return psi / (1.0 - psi);
    }
    let s = series(psi, rate);
    s.first / s.z
}

/// Variance of the occupancy under `mu_psi`.
pub fn occupancy_variance(psi: f64, rate: &RateFunction) -> Result<f64> {
    check_psi(psi, rate)?;
    let s = series(psi, rate);
    let mean = s.first / s.z;
    Ok(s.second / s.z - mean * mean)
}

/// Inverse of `M`: the fugacity with mean occupancy `density`.
pub fn inverse_mean(density: f64, rate: &RateFunction) -> Result<f64> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::InvalidProfile(format!("density {density} must be finite and nonnegative")));
    }
    if rate.is_indicator() {
        return Ok(density / (1.0 + density));
    }
    let (mut lo, mut hi) = (0.0, rate.tail());
    while hi - lo > 1e-14 * rate.tail() {
        let mid = 0.5 * (lo + hi);
        if mean_unchecked(mid, rate) < density {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The single-site law `mu_psi`.
#[derive(Clone, Debug)]
pub struct SingleSiteLaw {
    psi: f64,
    rate: RateFunction,
    z: f64,
    /// `mu_psi(k)` for `k <= k_max`.
    head: Vec<f64>,
}

impl SingleSiteLaw {
    pub fn new(psi: f64, rate: &RateFunction) -> Result<Self> {
        check_psi(psi, rate)?;
        let z = series(psi, rate).z;
        let mut head = Vec::with_capacity(rate.k_max() + 1);
        let mut term = 1.0;
        for k in 0..=rate.k_max() {
            head.push(term / z);
            term *= psi / rate.rate(k as u32 + 1);
        }
        Ok(SingleSiteLaw {
            psi,
            rate: rate.clone(),
            z,
            head,
        })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn partition(&self) -> f64 {
        self.z
    }

    fn ratio(&self) -> f64 {
        self.psi / self.rate.tail()
    }

    pub fn pmf(&self, k: u32) -> f64 {
        let m = self.rate.k_max();
        let k = k as usize;
        if k <= m {
            self.head[k]
        } else {
            self.head[m] * self.ratio().powi((k - m) as i32)
        }
    }

    pub fn cdf(&self, k: u32) -> f64 {
        let m = self.rate.k_max();
        let k = k as usize;
        if k < m {
            return self.head[..=k].iter().sum();
        }
        let below: f64 = self.head[..m].iter().sum();
        let q = self.ratio();
        below + self.head[m] * (1.0 - q.powi((k - m + 1) as i32)) / (1.0 - q)
    }

    pub fn mean(&self) -> f64 {
        mean_unchecked(self.psi, &self.rate)
    }

    /// Exact inverse-CDF draw; the geometric tail is sampled in closed form.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let m = self.rate.k_max();
        let mut u: f64 = rng.random();
        for k in 0..m {
            if u < self.head[k] {
                return k as u32;
            }
            u -= self.head[k];
        }
        let q = self.ratio();
        if q <= 0.0 {
            return m as u32;
        }
        let tail_mass = self.head[m] / (1.0 - q);
        let v = (u / tail_mass).clamp(0.0, 1.0 - f64::EPSILON);
        m as u32 + geometric_count(1.0 - v, q)
    }
}

/// `floor(ln(v) / ln(q))` for `v` in `(0, 1]`: a geometric count with
/// `P(j) = (1 - q) q^j`.
#[inline]
fn geometric_count(v: f64, q: f64) -> u32 {
    if q <= 0.0 {
        return 0;
    }
    let j = (v.ln() / q.ln()).floor();
    if j >= f64::from(u32::MAX) {
        u32::MAX / 2
    } else {
        j as u32
    }
}

/// The quenched product measure `nu^alpha_phi`.
#[derive(Clone, Debug)]
pub struct QuenchedProductLaw {
    phi: f64,
    field: RateField,
    rate: RateFunction,
}

impl QuenchedProductLaw {
    pub fn new(phi: f64, field: RateField, rate: RateFunction) -> Result<Self> {
        let limit = rate.tail() * field.min_alpha();
        if !(phi >= 0.0 && phi < limit) {
            return Err(Error::FugacityOutOfRange { psi: phi, limit });
        }
        Ok(QuenchedProductLaw { phi, field, rate })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn field(&self) -> &RateField {
        &self.field
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    /// Marginal law at `site`.
    pub fn marginal(&self, site: usize) -> SingleSiteLaw {
        SingleSiteLaw::new(self.phi / self.field.alphas()[site], &self.rate).expect("checked at construction")
    }

    /// Expected particle number on the ring.
    pub fn expected_total(&self) -> f64 {
        self.field
            .alphas()
            .iter()
            .map(|a| mean_unchecked(self.phi / a, &self.rate))
            .sum()
    }
}

/// Independent site draws from `nu^alpha_phi`.
pub fn sample_product_measure(law: &QuenchedProductLaw, seed: u64) -> Configuration {
    let mut rng = rng::stream(seed, "equilibria/product-measure");
    let alphas = law.field.alphas();
    let occupancy = if law.rate.is_indicator() {
        alphas
            .iter()
            .map(|a| {
                let q = law.phi / a;
                let u: f64 = rng.random();
                geometric_count(1.0 - u, q)
            })
            .collect()
    } else {
        let mut cache: Option<(f64, SingleSiteLaw)> = None;
        alphas
            .iter()
            .map(|&a| {
                let psi = law.phi / a;
                let hit = matches!(&cache, Some((p, _)) if *p == psi);
                if !hit {
                    cache = Some((psi, SingleSiteLaw::new(psi, &law.rate).expect("checked")));
                }
                cache.as_ref().unwrap().1.sample(&mut rng)
            })
            .collect()
    };
    Configuration::new(occupancy).expect("field is nonempty")
}

/// Equilibrium calculus for one `(law, rate)` pair, with `rho*` computed
/// once.
#[derive(Clone, Debug)]
pub struct Equilibria {
    law: DisorderLaw,
    rate: RateFunction,
    c: f64,
    rho_star: f64,
}

impl Equilibria {
    pub fn new(law: &DisorderLaw, rate: &RateFunction) -> Result<Self> {
        law.validate()?;
        Ok(Equilibria {
            law: law.clone(),
            rate: rate.clone(),
            c: law.left_endpoint(),
            rho_star: critical_density(law, rate),
        })
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    /// Left endpoint `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    /// Supremum of admissible fugacities, `r(inf) c`.
    pub fn phi_limit(&self) -> f64 {
        self.rate.tail() * self.c
    }

    /// Flat value of `f` above `rho*`.
    pub fn saturated_flux(&self) -> f64 {
        self.phi_limit()
    }

    pub fn density(&self, phi: f64) -> Result<f64> {
        if !(phi >= 0.0 && phi < self.phi_limit()) {
            return Err(Error::FugacityOutOfRange {
                psi: phi,
                limit: self.phi_limit(),
            });
        }
        Ok(self.density_unchecked(phi))
    }

    fn density_unchecked(&self, phi: f64) -> f64 {
        if phi == 0.0 {
            return 0.0;
        }
        if self.rate.is_indicator() {
            // M(phi/alpha) = phi / (alpha - phi)
            return self.law.expect(|a| phi / (a - phi), LAW_REL_TOL);
        }
        let rate = &self.rate;
        self.law.expect(|a| mean_unchecked(phi / a, rate), LAW_REL_TOL)
    }

    /// `f(rho)`: bisection on the fugacity below `rho*`, flat above.
    pub fn flux(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidProfile(format!("density {rho} must be nonnegative")));
        }
        if rho == 0.0 {
            return Ok(0.0);
        }
        if rho >= self.rho_star {
            return Ok(self.saturated_flux());
        }
        let (mut lo, mut hi) = (0.0, self.phi_limit());
        while hi - lo > 1e-11 {
            let mid = 0.5 * (lo + hi);
            if self.density_unchecked(mid) < rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `rho(phi) = E_Q[M(phi / alpha)]`.
pub fn density_rho(phi: f64, law: &DisorderLaw, rate: &RateFunction) -> Result<f64> {
    law.validate()?;
    let limit = rate.tail() * law.left_endpoint();
    if !(phi >= 0.0 && phi < limit) {
        return Err(Error::FugacityOutOfRange { psi: phi, limit });
    }
    let eq = Equilibria {
        law: law.clone(),
        rate: rate.clone(),
        c: law.left_endpoint(),
        rho_star: f64::NAN,
    };
    Ok(eq.density_unchecked(phi))
}

/// `rho* = E_Q[M(r(inf) c / alpha)]`, possibly infinite.
///
/// An atom at `c` always diverges. For the indicator rate the integral
/// reduces to `c E[(alpha - c)^-1]`, which has a closed form for the
/// Beta-type laws; other rate functions go through
/// [`critical_density_quadrature`].
pub fn critical_density(law: &DisorderLaw, rate: &RateFunction) -> f64 {
    if law.has_atom_at_left_endpoint() {
        return f64::INFINITY;
    }
    if rate.is_indicator() {
        match *law {
            DisorderLaw::UniformInterval { .. } => return f64::INFINITY,
            DisorderLaw::ShiftedBeta { c, a, b } => {
                // E[1/B] = (a + b - 1) / (a - 1) for a > 1
                return if a > 1.0 {
                    c / (1.0 - c) * (a + b - 1.0) / (a - 1.0)
                } else {
                    f64::INFINITY
                };
            }
            DisorderLaw::FiniteSupport { .. } => unreachable!("atom case handled above"),
        }
    }
    critical_density_quadrature(law, rate)
}

/// Quadrature route to `rho*`, independent of the closed form.
///
/// The integrand is split into decades of the Beta variable toward the
/// left endpoint. The integral is declared divergent when the running
/// total exceeds `1e12` or the decade contributions stop shrinking;
/// otherwise the remaining tail is extrapolated geometrically from the
/// last two decades.
pub fn critical_density_quadrature(law: &DisorderLaw, rate: &RateFunction) -> f64 {
    if law.has_atom_at_left_endpoint() {
        return f64::INFINITY;
    }
    let c = law.left_endpoint();
    let tail = rate.tail();
    let pieces = law
        .expect_tail_decades(
            |a| {
                let psi = tail * c / a;
                if psi >= tail {
                    f64::INFINITY
                } else {
                    mean_unchecked(psi, rate)
                }
            },
            14,
        )
        .expect("continuous law");
    let total: f64 = pieces.iter().sum();
    if !total.is_finite() || total > 1e12 {
        return f64::INFINITY;
    }
    let ratios: Vec<f64> = pieces
        .windows(2)
        .skip(pieces.len().saturating_sub(4))
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    if ratios.iter().all(|&r| r >= 0.99) {
        return f64::INFINITY;
    }
    let last = *pieces.last().unwrap();
    let r = *ratios.last().unwrap();
    if r > 0.0 && r < 1.0 {
        total + last * r / (1.0 - r)
    } else {
        total
    }
}

/// `f(rho)` for a single density.
pub fn flux_f(rho: f64, law: &DisorderLaw, rate: &RateFunction) -> Result<f64> {
    Equilibria::new(law, rate)?.flux(rho)
}

/// Sampled graph of a flux function on a uniform density grid
/// `0, h, 2h, ..., rho_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxTable {
    rho: Vec<f64>,
    flux: Vec<f64>,
    rho_star: f64,
    c: f64,
}

impl FluxTable {
    /// Table from values on the uniform grid with `flux.len()` nodes over
    /// `[0, rho_max]`.
    pub fn from_values(rho_max: f64, flux: Vec<f64>, rho_star: f64, c: f64) -> Result<Self> {
        if flux.len() < 3 {
            return Err(Error::InvalidFlux("need at least three grid points".into()));
        }
        if !(rho_max > 0.0 && rho_max.is_finite()) {
            return Err(Error::InvalidFlux(format!("rho_max = {rho_max} must be positive")));
        }
        if flux.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidFlux("non-finite flux value".into()));
        }
        let n = flux.len() - 1;
        let rho = (0..=n).map(|i| rho_max * i as f64 / n as f64).collect();
        Ok(FluxTable { rho, flux, rho_star, c })
    }

    /// Tabulates a closed-form flux.
    pub fn from_fn(f: impl Fn(f64) -> f64, rho_max: f64, points: usize) -> Result<Self> {
        let n = points.max(3) - 1;
        let flux = (0..=n).map(|i| f(rho_max * i as f64 / n as f64)).collect();
        FluxTable::from_values(rho_max, flux, f64::INFINITY, f64::NAN)
    }

    /// `f(rho) = rho (1 - rho)` on `[0, 1]`.
    pub fn tasep(points: usize) -> Self {
        FluxTable::from_fn(|r| r * (1.0 - r), 1.0, points).expect("valid closed form")
    }

    /// `f(rho) = rho / (1 + rho)` on `[0, rho_max]` (homogeneous geometric ZRP).
    pub fn geometric_zrp(rho_max: f64, points: usize) -> Result<Self> {
        let mut t = FluxTable::from_fn(|r| r / (1.0 + r), rho_max, points)?;
        t.c = 1.0;
        Ok(t)
    }

    /// `f` from the equilibrium calculus on `[0, rho_max]` with grid step
    /// `step`. Densities above `rho*` get the flat value.
    pub fn from_equilibria(eq: &Equilibria, rho_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidFlux(format!("grid step {step} must be positive")));
        }
        let n = ((rho_max / step).round() as usize).max(2);
        let flux = (0..=n)
            .into_par_iter()
            .map(|i| eq.flux(rho_max * i as f64 / n as f64))
            .collect::<Result<Vec<f64>>>()?;
        FluxTable::from_values(rho_max, flux, eq.rho_star(), eq.c())
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn values(&self) -> &[f64] {
        &self.flux
    }

    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn rho_max(&self) -> f64 {
        *self.rho.last().unwrap()
    }

    pub fn step(&self) -> f64 {
        self.rho[1] - self.rho[0]
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Piecewise-linear interpolation, clamped to the table's domain.
    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        let h = self.step();
        let n = self.flux.len() - 1;
        let s = (rho / h).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        self.flux[i] * (1.0 - w) + self.flux[i + 1] * w
    }

    /// Nodal derivative estimates: centered inside, one-sided at the ends.
    pub fn nodal_slopes(&self) -> Vec<f64> {
        let h = self.step();
        let n = self.flux.len() - 1;
        (0..=n)
            .map(|i| {
                if i == 0 {
                    (self.flux[1] - self.flux[0]) / h
                } else if i == n {
                    (self.flux[n] - self.flux[n - 1]) / h
                } else {
                    (self.flux[i + 1] - self.flux[i - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Largest difference quotient in absolute value.
    pub fn max_abs_slope(&self) -> f64 {
        let h = self.step();
        self.flux
            .windows(2)
            .map(|w| ((w[1] - w[0]) / h).abs())
            .fold(0.0, f64::max)
    }

    /// Index of the largest tabulated value.
    pub fn argmax(&self) -> usize {
        self.flux
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Midpoint concavity on interior grid triples, within `tol`.
    pub fn is_concave(&self, tol: f64) -> bool {
        self.flux
            .windows(3)
            .all(|w| w[1] >= 0.5 * (w[0] + w[2]) - tol)
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.flux.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// CSV with header `rho,f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,f\n");
        for (r, f) in self.rho.iter().zip(&self.flux) {
            out.push_str(&format!("{r},{f}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_csv().as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

/// Fugacity `phi < r(inf) min(alpha)` at which the ring's product measure
/// has expected particle number `total`.
pub fn ring_fugacity(alphas: &[f64], rate: &RateFunction, total: f64) -> f64 {
    let limit = rate.tail() * alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let expected = |phi: f64| -> f64 { alphas.iter().map(|a| mean_unchecked(phi / a, rate)).sum() };
    let (mut lo, mut hi) = (0.0, limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if expected(mid) < total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact stationary bond current of the totally asymmetric geometric ZRP on
/// a ring holding exactly `particles` particles.
///
/// The canonical measure gives weight `prod_x alpha_x^{-eta(x)}` and the
/// current through every bond is `h_{N-1}(w) / h_N(w)` with `w_x = 1/alpha_x`
/// and `h_N` the complete homogeneous symmetric polynomial. The recursion
/// over sites is linear, so each step is rescaled by its maximum.
pub fn canonical_ring_current(alphas: &[f64], particles: usize) -> f64 {
    if particles == 0 {
        return 0.0;
    }
    let a_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut g = vec![0.0f64; particles + 1];
    g[0] = 1.0;
    for &a in alphas {
        let w = a_min / a;
        for n in 1..=particles {
            g[n] += w * g[n - 1];
        }
        let scale = g.iter().copied().fold(0.0, f64::max);
        g.iter_mut().for_each(|v| *v /= scale);
    }
    a_min * g[particles - 1] / g[particles]
}
