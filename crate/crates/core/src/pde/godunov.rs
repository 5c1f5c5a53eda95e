use serde::{Deserialize, Serialize};

use super::profile::Profile;
use super::solution::{cell_centers, SolutionField};
use crate::equilibria::FluxTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Zero-gradient ghost cells.
    Outflow,
}

/// Godunov interface flux for a concave `f` whose maximum sits at
/// `rho_peak`.
#[inline]
pub fn interface_flux(flux: &FluxTable, rho_peak: f64, ul: f64, ur: f64) -> f64 {
    if ul <= ur {
        flux.eval(ul).min(flux.eval(ur))
    } else {
        flux.eval(rho_peak.clamp(ur, ul))
    }
}

/// Time step `cfl Δx / max|f'|`, or `cfl Δx` for a flat table.
pub fn time_step(flux: &FluxTable, dx: f64, cfl: f64) -> f64 {
    let s = flux.max_abs_slope();
    if s > 0.0 {
        cfl * dx / s
    } else {
        cfl * dx
    }
}

/// First-order Godunov scheme on `cells` equal cells over `domain`,
/// initialized with exact cell averages of `u0`.
pub fn godunov_solve(
    u0: &Profile,
    flux: &FluxTable,
    domain: (f64, f64),
    dx: f64,
    cfl: f64,
    t: f64,
    boundary: Boundary,
) -> Result<SolutionField> {
    u0.validate(Some(flux.rho_max()))?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Solver(format!("cfl {cfl} must lie in (0, 1]")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Solver(format!("time {t} must be finite and nonnegative")));
    }
    let (a, b) = domain;
    if !(b > a && dx > 0.0) {
        return Err(Error::Solver("empty domain or nonpositive dx".into()));
    }
    let scale = flux.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if !flux.is_concave(1e-9 * scale) {
        return Err(Error::InvalidFlux("Godunov fluxes assume a concave table".into()));
    }
    let cells = ((b - a) / dx).round() as usize;
    if cells < 2 {
        return Err(Error::Solver("need at least two cells".into()));
    }
    let h = (b - a) / cells as f64;
    let edges: Vec<f64> = (0..=cells).map(|i| a + i as f64 * h).collect();
    let mut u = u0.cell_averages(&edges);
    let peak = flux.rho()[flux.argmax()];
    let dt_max = time_step(flux, h, cfl);
    let mut fluxes = vec![0.0; cells + 1];
    let mut now = 0.0;
    while now < t {
        let dt = dt_max.min(t - now);
        let ghost_l = match boundary {
            Boundary::Periodic => u[cells - 1],
            Boundary::Outflow => u[0],
        };
        let ghost_r = match boundary {
            Boundary::Periodic => u[0],
            Boundary::Outflow => u[cells - 1],
        };
        fluxes[0] = interface_flux(flux, peak, ghost_l, u[0]);
        for i in 1..cells {
            fluxes[i] = interface_flux(flux, peak, u[i - 1], u[i]);
        }
        fluxes[cells] = match boundary {
            Boundary::Periodic => fluxes[0],
            Boundary::Outflow => interface_flux(flux, peak, u[cells - 1], ghost_r),
        };
        let r = dt / h;
        for i in 0..cells {
            u[i] -= r * (fluxes[i + 1] - fluxes[i]);
        }
        now += dt;
    }
    Ok(SolutionField::new(cell_centers(a, b, cells), t, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_data_is_exact() {
        let flux = FluxTable::tasep(101);
        let s = godunov_solve(&Profile::constant(0.3), &flux, (0.0, 1.0), 0.01, 0.9, 1.0, Boundary::Periodic).unwrap();
        assert!(s.u.iter().all(|&u| u == 0.3));
    }

    #[test]
    fn tasep_rarefaction() {
        let flux = FluxTable::tasep(1001);
        let s = godunov_solve(&Profile::step(1.0, 0.0, 0.0), &flux, (-1.0, 1.0), 1e-3, 0.9, 0.5, Boundary::Outflow)
            .unwrap();
        let d = s.l1_to(|x| ((1.0 - x / 0.5) / 2.0).clamp(0.0, 1.0));
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn periodic_mass_conservation() {
        let flux = FluxTable::geometric_zrp(4.0, 401).unwrap();
        let p = Profile::PiecewiseConstant {
            breaks: vec![0.2, 0.5, 0.7],
            values: vec![0.1, 1.7, 0.4, 2.0],
        };
        let s0 = godunov_solve(&p, &flux, (0.0, 1.0), 1e-3, 0.9, 0.0, Boundary::Periodic).unwrap();
        let s = godunov_solve(&p, &flux, (0.0, 1.0), 1e-3, 0.9, 0.8, Boundary::Periodic).unwrap();
        assert!((s.mass() - s0.mass()).abs() < 1e-12);
        assert!(s.u.iter().all(|&u| u >= 0.1 - 1e-12 && u <= 2.0 + 1e-12));
    }

    #[test]
    fn flat_flux_freezes_data() {
        let flux = FluxTable::from_values(4.0, vec![0.5; 41], 0.0, 0.5).unwrap();
        let p = Profile::step(3.0, 2.5, 0.1);
        let s0 = godunov_solve(&p, &flux, (-1.0, 1.0), 0.01, 0.9, 0.0, Boundary::Outflow).unwrap();
        let s = godunov_solve(&p, &flux, (-1.0, 1.0), 0.01, 0.9, 2.0, Boundary::Outflow).unwrap();
        assert_eq!(s.u, s0.u);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn monotone_data_stays_monotone(mut values in proptest::collection::vec(0.0f64..1.0, 2..6), increasing: bool) {
            values.sort_by(f64::total_cmp);
            if !increasing {
                values.reverse();
            }
            let breaks: Vec<f64> = (1..values.len()).map(|i| -0.5 + i as f64 / values.len() as f64).collect();
            let p = Profile::PiecewiseConstant { breaks, values };
            let flux = FluxTable::tasep(201);
            let s = godunov_solve(&p, &flux, (-1.0, 1.0), 5e-3, 0.9, 0.4, Boundary::Outflow).unwrap();
            let ok = if increasing {
                s.u.windows(2).all(|w| w[1] >= w[0] - 1e-12)
            } else {
                s.u.windows(2).all(|w| w[1] <= w[0] + 1e-12)
            };
            prop_assert!(ok);
        }
    }
}
