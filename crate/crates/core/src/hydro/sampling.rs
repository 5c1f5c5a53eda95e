use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::window::MacroWindow;
use crate::dynamics::Configuration;
use crate::environment::{RateField, RateFunction};
use crate::equilibria::{inverse_mean, SingleSiteLaw};
use crate::error::{Error, Result};
use crate::pde::Profile;
use crate::rng;

/// How initial configurations follow the macroscopic profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Site `x` drawn from `mu_psi` with mean `u0(x/n)`, requiring the
    /// profile to stay below `M(r(inf) theta)` for some `theta < c`.
    LocalEquilibrium,
    /// Independent sites with mean `u0(x/n)`: `mu_psi` laws for zero-range,
    /// two-point laws on `{floor u, ceil u}` for exclusion. No bound check.
    #[default]
    Independent,
    /// Deterministic rounding of the cumulative mass.
    Deterministic,
}

/// Samples an initial configuration on `window`.
pub fn sample_initial_profile(
    u0: &Profile,
    window: &MacroWindow,
    field: &RateField,
    model: &Model,
    mode: SamplingMode,
    seed: u64,
) -> Result<Configuration> {
    u0.validate(model.cap().map(f64::from))?;
    if field.len() != window.sites {
        return Err(Error::InvalidConfiguration(format!(
            "rate field has {} sites, window has {}",
            field.len(),
            window.sites
        )));
    }
    let mut rng = rng::stream(seed, "hydro/initial-profile");
    let means: Vec<f64> = (0..window.sites).map(|i| u0.eval(window.x(i))).collect();
    let occupancy = match (mode, model) {
        (SamplingMode::Deterministic, _) => {
            let mut acc = 0.0f64;
            let mut prev = 0i64;
            means
                .iter()
                .map(|m| {
                    acc += m;
                    let r = acc.round() as i64;
                    let k = (r - prev) as u32;
                    prev = r;
                    k
                })
                .collect()
        }
        (_, Model::Zrp { rate, .. }) => {
            if mode == SamplingMode::LocalEquilibrium {
                check_local_equilibrium_bound(u0, field, rate)?;
            }
            let mut laws: HashMap<u64, SingleSiteLaw> = HashMap::new();
            let mut out = Vec::with_capacity(means.len());
            for m in &means {
                let law = match laws.get(&m.to_bits()) {
                    Some(l) => l,
                    None => {
                        let l = SingleSiteLaw::new(inverse_mean(*m, rate)?, rate)?;
                        laws.entry(m.to_bits()).or_insert(l)
                    }
                };
                out.push(law.sample(&mut rng));
            }
            out
        }
        (SamplingMode::LocalEquilibrium, Model::KExclusion { .. }) => {
            return Err(Error::InvalidExperiment(
                "local-equilibrium sampling is defined for zero-range models only".into(),
            ))
        }
        (_, Model::KExclusion { .. }) => means
            .iter()
            .map(|m| {
                let base = m.floor();
                base as u32 + u32::from(rng.random::<f64>() < m - base)
            })
            .collect(),
    };
    Configuration::new(occupancy)
}

/// The profile must stay below `M(r(inf) theta)` for some `theta < c`.
pub fn check_local_equilibrium_bound(u0: &Profile, field: &RateField, rate: &RateFunction) -> Result<()> {
    let c = field.law().map_or_else(|| field.min_alpha(), |l| l.left_endpoint());
    let psi = inverse_mean(u0.max(), rate)?;
    let theta = psi / rate.tail();
    if theta < c {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "sup u0 = {} needs fugacity ratio {theta:.6} >= c = {c}; local-equilibrium sampling is unavailable",
            u0.max()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_rate_field, DisorderLaw};
    use crate::hydro::{pairing, TestFunction};
    use crate::stats::MeanSe;

    #[test]
    fn zero_profile() {
        let w = MacroWindow::covering(-1.0, 1.0, 50);
        let field = RateField::homogeneous(w.sites);
        let c = sample_initial_profile(
            &Profile::constant(0.0),
            &w,
            &field,
            &Model::geometric_zrp(),
            SamplingMode::LocalEquilibrium,
            1,
        )
        .unwrap();
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn geometric_mean_matches() {
        let w = MacroWindow {
            first: 0,
            sites: 1_000_000,
            scale: 1_000_000,
        };
        let field = RateField::homogeneous(w.sites);
        let c = sample_initial_profile(
            &Profile::constant(0.8),
            &w,
            &field,
            &Model::geometric_zrp(),
            SamplingMode::LocalEquilibrium,
            2,
        )
        .unwrap();
        let values: Vec<f64> = c.occupancy().iter().map(|&k| k as f64).collect();
        let s = MeanSe::of(&values);
        assert!(s.within(0.8, 3.0), "{s:?}");
    }

    #[test]
    fn bound_check_rejects_supercritical_profile() {
        let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
        let w = MacroWindow::covering(0.0, 1.0, 100);
        let field = sample_rate_field(&law, w.sites, 3).unwrap();
        let m = Model::geometric_zrp();
        let p = Profile::constant(3.0);
        assert!(sample_initial_profile(&p, &w, &field, &m, SamplingMode::LocalEquilibrium, 1).is_err());
        let c = sample_initial_profile(&p, &w, &field, &m, SamplingMode::Deterministic, 1).unwrap();
        assert!(c.occupancy().iter().all(|&k| k == 3));
        let p = Profile::constant(0.9);
        assert!(sample_initial_profile(&p, &w, &field, &m, SamplingMode::LocalEquilibrium, 1).is_ok());
    }

    #[test]
    fn deterministic_rounding_tracks_mass() {
        let w = MacroWindow::covering(0.0, 1.0, 1000);
        let field = RateField::homogeneous(w.sites);
        let c = sample_initial_profile(
            &Profile::constant(0.37),
            &w,
            &field,
            &Model::KExclusion { cap: 1 },
            SamplingMode::Deterministic,
            0,
        )
        .unwrap();
        assert!((c.total() as f64 - 0.37 * w.sites as f64).abs() <= 1.0);
        assert!(c.max_occupancy() <= 1);
    }

    #[test]
    fn initial_pairing_converges() {
        let phi = TestFunction::triangular(0.0, 1.0);
        let u0 = Profile::step(1.0, 0.0, 0.0);
        let exact = 0.5;
        let mut errs = Vec::new();
        for n in [100usize, 1000, 10_000] {
            let w = MacroWindow::covering(-1.0, 1.0, n);
            let field = RateField::homogeneous(w.sites);
            let e: Vec<f64> = (0..20)
                .map(|r| {
                    let c = sample_initial_profile(
                        &u0,
                        &w,
                        &field,
                        &Model::geometric_zrp(),
                        SamplingMode::LocalEquilibrium,
                        r,
                    )
                    .unwrap();
                    (pairing(&c, &w, &phi) - exact).abs()
                })
                .collect();
            errs.push(MeanSe::of(&e).mean);
        }
        assert!(errs[2] < errs[0] / 4.0, "{errs:?}");
    }
}
