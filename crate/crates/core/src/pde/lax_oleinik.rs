use rayon::prelude::*;

use super::conjugate::{concave_conjugate, velocity_grid, ConjugateTable};
use super::profile::Profile;
use super::solution::{Potential, SolutionField};
use crate::equilibria::FluxTable;
use crate::error::{Error, Result};

/// Discretization of the variational formula.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxOleinikOptions {
    /// Velocity grid size for the conjugate; `None` picks one from the
    /// flux table.
    pub velocity_points: Option<usize>,
    /// Spacing of the `y` grid; defaults to the smallest `x` spacing.
    pub dy: Option<f64>,
    /// Restricts the search over `y`.
    pub y_window: Option<(f64, f64)>,
}

impl Default for LaxOleinikOptions {
    fn default() -> Self {
        LaxOleinikOptions {
            velocity_points: None,
            dy: None,
            y_window: None,
        }
    }
}

/// `u(x, t) = ∂_x sup_y { U0(y) + t f*((x - y) / t) }` with `U0' = u0`.
pub fn lax_oleinik_solve(u0: &Profile, flux: &FluxTable, x: &[f64], t: f64) -> Result<SolutionField> {
    lax_oleinik_solve_with(u0, flux, x, t, &LaxOleinikOptions::default())
}

pub fn lax_oleinik_solve_with(
    u0: &Profile,
    flux: &FluxTable,
    x: &[f64],
    t: f64,
    options: &LaxOleinikOptions,
) -> Result<SolutionField> {
    u0.validate(Some(flux.rho_max()))?;
    if x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Solver("x grid must be increasing with at least two points".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Solver(format!("time {t} must be finite and nonnegative")));
    }
    if t == 0.0 {
        return Ok(SolutionField::new(x.to_vec(), 0.0, x.iter().map(|&p| u0.eval(p)).collect()));
    }
    let points = options.velocity_points.unwrap_or(2 * flux.len() + 1).max(3);
    let conj = concave_conjugate(flux, &velocity_grid(flux, points))?;
    let n = x.len();
    let mut half = Vec::with_capacity(n + 1);
    half.push(x[0] - 0.5 * (x[1] - x[0]));
    half.extend(x.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    half.push(x[n - 1] + 0.5 * (x[n - 1] - x[n - 2]));
    let dy = options
        .dy
        .unwrap_or_else(|| x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min));
    if !(dy > 0.0) {
        return Err(Error::Solver(format!("y spacing {dy} must be positive")));
    }
    let potential = potential_at(u0, &conj, &half, t, dy, options.y_window)?;
    let u = (0..n)
        .map(|i| (potential[i + 1] - potential[i]) / (half[i + 1] - half[i]))
        .collect();
    Ok(SolutionField {
        x: x.to_vec(),
        t,
        u,
        potential: Some(Potential {
            x: half,
            values: potential,
        }),
    })
}

/// `U(x, t)` at each point of `xs`.
pub fn potential_at(
    u0: &Profile,
    conj: &ConjugateTable,
    xs: &[f64],
    t: f64,
    dy: f64,
    y_window: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    let v = conj.velocities();
    let (vmin, vmax) = (v[0], v[v.len() - 1]);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - t * vmax - dy;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t * vmin + dy;
    let (ya, yb) = match y_window {
        Some((a, b)) if a < b => (a, b),
        Some(_) => return Err(Error::Solver("empty y window".into())),
        None => (lo, hi),
    };
    let m = ((yb - ya) / dy).ceil() as usize;
    let ys: Vec<f64> = (0..=m).map(|j| (ya + j as f64 * dy).min(yb)).collect();
    let u0_pot: Vec<f64> = ys.par_iter().map(|&y| u0.potential(y)).collect();
    let kinks: Vec<(f64, f64)> = u0
        .kinks()
        .iter()
        .filter(|&&k| k >= ya && k <= yb)
        .map(|&k| (k, u0.potential(k)))
        .collect();
    xs.par_iter()
        .map(|&x| {
            let (a, b) = (x - t * vmax - dy, x - t * vmin + dy);
            let j0 = (((a - ya) / dy).floor().max(0.0)) as usize;
            let j1 = ((((b - ya) / dy).ceil()) as usize).min(m);
            if j0 > j1 {
                return Err(Error::Solver(format!("y window misses the cone of x = {x}")));
            }
            let mut best = f64::NEG_INFINITY;
            let mut arg = j0;
            for j in j0..=j1 {
                let val = u0_pot[j] + t * conj.eval((x - ys[j]) / t);
                if val > best {
                    best = val;
                    arg = j;
                }
            }
            for &(k, pk) in &kinks {
                if k >= a && k <= b {
                    best = best.max(pk + t * conj.eval((x - k) / t));
                }
            }
            let truncated = (a < ya && arg == j0) || (b > yb && arg == j1);
            if truncated {
                return Err(Error::Solver(format!(
                    "supremum at x = {x} attained on the edge of the y window"
                )));
            }
            Ok(best)
        })
        .collect()
}
