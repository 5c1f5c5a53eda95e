use crate::equilibria::FluxTable;

use super::solution::SolutionField;

/// Nodal slopes of the table, interpolated linearly; nonincreasing for a
/// concave table.
fn slope_at(flux: &FluxTable, slopes: &[f64], rho: f64) -> f64 {
    let h = flux.step();
    let n = slopes.len() - 1;
    let s = (rho / h).clamp(0.0, n as f64);
    let i = (s.floor() as usize).min(n - 1);
    let w = s - i as f64;
    slopes[i] * (1.0 - w) + slopes[i + 1] * w
}

/// Largest `rho` in `[lo, hi]` with `f'(rho) >= xi`, assuming `f'` is
/// nonincreasing.
fn inverse_slope(flux: &FluxTable, slopes: &[f64], xi: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if slope_at(flux, slopes, m) >= xi {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Self-similar entropy solution of the Riemann problem for a concave flux,
/// evaluated at `x / t`.
pub fn riemann_exact(ul: f64, ur: f64, flux: &FluxTable, x_over_t: f64) -> f64 {
    RiemannSolution::new(ul, ur, flux).eval(x_over_t)
}

/// Precomputed Riemann solution for repeated evaluation.
#[derive(Clone, Debug)]
pub struct RiemannSolution<'a> {
    ul: f64,
    ur: f64,
    flux: &'a FluxTable,
    slopes: Vec<f64>,
    shock: Option<f64>,
}

impl<'a> RiemannSolution<'a> {
    pub fn new(ul: f64, ur: f64, flux: &'a FluxTable) -> Self {
        let shock = if ul < ur {
            Some((flux.eval(ur) - flux.eval(ul)) / (ur - ul))
        } else {
            None
        };
        RiemannSolution {
            ul,
            ur,
            flux,
            slopes: if ul > ur { flux.nodal_slopes() } else { Vec::new() },
            shock,
        }
    }

    /// Shock speed when the solution is a single shock.
    pub fn shock_speed(&self) -> Option<f64> {
        self.shock
    }

    /// Edges of the fan, slowest first, when the solution is a rarefaction.
    pub fn fan(&self) -> Option<(f64, f64)> {
        (self.ul > self.ur).then(|| {
            (
                slope_at(self.flux, &self.slopes, self.ul),
                slope_at(self.flux, &self.slopes, self.ur),
            )
        })
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if self.ul == self.ur {
            return self.ul;
        }
        if let Some(s) = self.shock {
            return if xi < s { self.ul } else { self.ur };
        }
        let (lo, hi) = self.fan().unwrap();
        if xi <= lo {
            self.ul
        } else if xi >= hi {
            self.ur
        } else {
            inverse_slope(self.flux, &self.slopes, xi, self.ur, self.ul)
        }
    }

    /// Samples `u(x, t)` with the discontinuity at `center`.
    pub fn sample(&self, x: &[f64], t: f64, center: f64) -> SolutionField {
        let u = x
            .iter()
            .map(|&p| {
                if t == 0.0 {
                    if p < center {
                        self.ul
                    } else {
                        self.ur
                    }
                } else {
                    self.eval((p - center) / t)
                }
            })
            .collect();
        SolutionField::new(x.to_vec(), t, u)
    }

    /// `∫_a^b u(x, t) dx` to quadrature accuracy, breaking at the waves.
    pub fn integral(&self, a: f64, b: f64, t: f64, center: f64, weight: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = breaks.to_vec();
        if let Some(s) = self.shock {
            cuts.push(center + s * t);
        }
        if let Some((lo, hi)) = self.fan() {
            cuts.push(center + lo * t);
            cuts.push(center + hi * t);
        }
        let f = |x: f64| {
            let u = if t == 0.0 {
                if x < center {
                    self.ul
                } else {
                    self.ur
                }
            } else {
                self.eval((x - center) / t)
            };
            weight(x) * u
        };
        crate::quadrature::integrate_with_breaks(f, a, b, &cuts, 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state() {
        let f = FluxTable::tasep(101);
        assert_eq!(riemann_exact(0.3, 0.3, &f, 5.0), 0.3);
    }

    #[test]
    fn zrp_shock_speed() {
        let f = FluxTable::geometric_zrp(4.0, 4001).unwrap();
        for rho in [0.5, 1.0, 2.0] {
            let r = RiemannSolution::new(0.0, rho, &f);
            let s = r.shock_speed().unwrap();
            assert!((s - 1.0 / (1.0 + rho)).abs() < 1e-6, "{rho}: {s}");
            assert_eq!(r.eval(s - 1e-3), 0.0);
            assert_eq!(r.eval(s + 1e-3), rho);
        }
    }

    #[test]
    fn tasep_fan() {
        let f = FluxTable::tasep(1001);
        for xi in [-1.5f64, -0.9, -0.3, 0.0, 0.4, 0.99, 2.0] {
            let exact = ((1.0 - xi) / 2.0).clamp(0.0, 1.0);
            assert!((riemann_exact(1.0, 0.0, &f, xi) - exact).abs() < 1e-9, "{xi}");
        }
        assert_eq!(riemann_exact(0.0, 1.0, &f, -0.1), 0.0);
        assert_eq!(riemann_exact(0.0, 1.0, &f, 0.1), 1.0);
    }

    #[test]
    fn integral_of_fan() {
        let f = FluxTable::tasep(1001);
        let r = RiemannSolution::new(1.0, 0.0, &f);
        // mass on [-1, 1] is conserved: 1
        let m = r.integral(-1.0, 1.0, 0.5, 0.0, |_| 1.0, &[]);
        assert!((m - 1.0).abs() < 1e-10, "{m}");
    }
}
