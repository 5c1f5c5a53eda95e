use crate::equilibria::FluxTable;
use crate::error::{Error, Result};

/// Concave conjugate `f*(v) = inf_rho { v rho - f(rho) }` sampled on a
/// velocity grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateTable {
    velocities: Vec<f64>,
    values: Vec<f64>,
    rho_max: f64,
}

/// Uniform velocity grid spanning the flux's slope range, padded by 10%.
pub fn velocity_grid(flux: &FluxTable, points: usize) -> Vec<f64> {
    let h = flux.step();
    let f = flux.values();
    let n = f.len() - 1;
    let hi = (f[1] - f[0]) / h;
    let lo = (f[n] - f[n - 1]) / h;
    let pad = 0.1 * (hi - lo).abs().max(1e-3);
    let (a, b) = (lo - pad, hi + pad);
    let m = points.max(3) - 1;
    (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect()
}

/// Minimizes the convex piecewise-linear objective over the flux nodes.
fn conjugate_at(flux: &FluxTable, v: f64) -> f64 {
    let rho = flux.rho();
    let f = flux.values();
    let g = |i: usize| v * rho[i] - f[i];
    let (mut lo, mut hi) = (0usize, f.len() - 1);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    (lo..=hi).map(g).fold(f64::INFINITY, f64::min)
}

impl ConjugateTable {
    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Linear interpolation inside the grid. Beyond the padded slope range
    /// the minimizer is an endpoint of the density domain, so `f*` is
    /// affine there with slope `0` (right) or `rho_max` (left).
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        let n = self.velocities.len() - 1;
        let (a, b) = (self.velocities[0], self.velocities[n]);
        if v >= b {
            return self.values[n];
        }
        if v <= a {
            return self.values[0] + self.rho_max * (v - a);
        }
        let s = (v - a) / (b - a) * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// `f**(rho) = inf_v { v rho - f*(v) }` over the grid.
    pub fn biconjugate(&self, rho: f64) -> f64 {
        self.velocities
            .iter()
            .zip(&self.values)
            .map(|(v, fs)| v * rho - fs)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.values.windows(3).all(|w| w[1] >= 0.5 * (w[0] + w[2]) - tol)
    }
}

pub fn concave_conjugate(flux: &FluxTable, velocities: &[f64]) -> Result<ConjugateTable> {
    let scale = flux.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if !flux.is_concave(1e-9 * scale) {
        return Err(Error::InvalidFlux("flux table fails the midpoint concavity test".into()));
    }
    if velocities.len() < 3 || velocities.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidFlux("velocity grid must be increasing with at least three points".into()));
    }
    let span = velocities[velocities.len() - 1] - velocities[0];
    if velocities.windows(2).any(|w| ((w[1] - w[0]) * (velocities.len() - 1) as f64 - span).abs() > 1e-9 * span) {
        return Err(Error::InvalidFlux("velocity grid must be uniform".into()));
    }
    Ok(ConjugateTable {
        values: velocities.iter().map(|&v| conjugate_at(flux, v)).collect(),
        velocities: velocities.to_vec(),
        rho_max: flux.rho_max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flux() {
        let flux = FluxTable::from_fn(|_| 0.0, 2.0, 101).unwrap();
        let v: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let c = concave_conjugate(&flux, &v).unwrap();
        for (x, y) in v.iter().zip(c.values()) {
            assert!((y - (x * 2.0).min(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tasep_conjugate() {
        let flux = FluxTable::tasep(2001);
        let v: Vec<f64> = (0..201).map(|i| -1.0 + 0.01 * i as f64).collect();
        let c = concave_conjugate(&flux, &v).unwrap();
        for (x, y) in v.iter().zip(c.values()) {
            let exact = -(1.0 - x).powi(2) / 4.0;
            assert!((y - exact).abs() < 2.0 * flux.step(), "{x}: {y} vs {exact}");
        }
        assert!(c.is_concave(1e-12));
    }

    #[test]
    fn biconjugate_recovers_flux() {
        let flux = FluxTable::geometric_zrp(3.0, 601).unwrap();
        let v = velocity_grid(&flux, 4001);
        let c = concave_conjugate(&flux, &v).unwrap();
        for (r, f) in flux.rho().iter().zip(flux.values()) {
            assert!((c.biconjugate(*r) - f).abs() < 2.0 * flux.step(), "{r}");
        }
    }

    #[test]
    fn rejects_convex_flux() {
        let flux = FluxTable::from_fn(|r| r * r, 1.0, 11).unwrap();
        assert!(concave_conjugate(&flux, &[-1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn affine_extension() {
        let flux = FluxTable::tasep(101);
        let v = velocity_grid(&flux, 101);
        let c = concave_conjugate(&flux, &v).unwrap();
        assert_eq!(c.eval(10.0), 0.0);
        assert!((c.eval(-10.0) - (-10.0)).abs() < 1e-12);
    }
}
