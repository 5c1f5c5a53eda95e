use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::Model;
use super::scaling::QuenchedMode;
use crate::dynamics::{measure_current, Configuration, RunOptions};
use crate::environment::{sample_rate_field, DisorderLaw, RateField};
use crate::equilibria::{canonical_ring_current, ring_fugacity, sample_product_measure, QuenchedProductLaw};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::MeanSe;

/// Initial state of each ring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// Particles spread as evenly as rounding allows.
    #[default]
    Spread,
    /// Zero-range only: a draw from the product measure whose expected
    /// total is the target, corrected to the exact total.
    RingEquilibrium,
}

fn default_batches() -> usize {
    20
}

/// Stationary current on rings of fixed density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSpec {
    pub model: Model,
    pub law: DisorderLaw,
    pub densities: Vec<f64>,
    pub sites: usize,
    pub horizon: f64,
    /// Burn-in time; by default long enough for ten jumps per particle
    /// at the run's average speed, capped at half the horizon.
    #[serde(default)]
    pub burn_in: Option<f64>,
    pub replicas: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
    pub seed: u64,
    /// `Fresh` draws a field per replica, shared across densities.
    #[serde(default)]
    pub quenched: QuenchedMode,
    #[serde(default)]
    pub start: StartMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    pub rho: f64,
    pub particles: u64,
    /// Space-averaged current, mean over replicas.
    pub current: f64,
    pub se: f64,
    pub replica_currents: Vec<f64>,
    pub burn_in: Vec<f64>,
    /// False when any replica fails the batch-mean drift test.
    pub stationary: bool,
    /// Exact finite-ring current averaged over the replicas' fields, when
    /// it is available in closed form.
    pub exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityCheck {
    pub rho: f64,
    /// Chord value minus the estimate; positive values violate concavity.
    pub violation: f64,
    pub pooled_se: f64,
}

impl ConcavityCheck {
    pub fn passes(&self, k: f64) -> bool {
        self.violation <= k * self.pooled_se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFluxTable {
    pub sites: usize,
    pub points: Vec<FluxPoint>,
    pub concavity: Vec<ConcavityCheck>,
}

impl EmpiricalFluxTable {
    pub fn is_concave_within(&self, k: f64) -> bool {
        self.concavity.iter().all(|c| c.passes(k))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,particles,current,se,stationary,exact\n");
        for p in &self.points {
            let exact = p.exact.map_or(String::new(), |e| e.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{exact}\n",
                p.rho, p.particles, p.current, p.se, p.stationary
            ));
        }
        out
    }
}

/// Midpoint-concavity residuals at interior grid points, with the standard
/// errors pooled as if the three estimates were independent.
pub fn concavity_checks(points: &[FluxPoint]) -> Vec<ConcavityCheck> {
    points
        .windows(3)
        .map(|w| {
            let lambda = (w[2].rho - w[1].rho) / (w[2].rho - w[0].rho);
            let chord = lambda * w[0].current + (1.0 - lambda) * w[2].current;
            let var = (lambda * w[0].se).powi(2) + ((1.0 - lambda) * w[2].se).powi(2) + w[1].se.powi(2);
            ConcavityCheck {
                rho: w[1].rho,
                violation: chord - w[1].current,
                pooled_se: var.sqrt(),
            }
        })
        .collect()
}

pub(crate) fn spread(sites: usize, particles: u64) -> Vec<u32> {
    (0..sites as u64)
        .map(|i| ((i + 1) * particles / sites as u64 - i * particles / sites as u64) as u32)
        .collect()
}

/// Ring state with exactly `particles` particles.
pub fn initial_ring_state(
    start: StartMode,
    model: &Model,
    field: &RateField,
    particles: u64,
    seed: u64,
) -> Result<Configuration> {
    match (start, model) {
        (StartMode::Spread, _) => Configuration::new(spread(field.len(), particles)),
        (StartMode::RingEquilibrium, Model::Zrp { rate, .. }) => {
            let phi = ring_fugacity(field.alphas(), rate, particles as f64);
            let law = QuenchedProductLaw::new(phi, field.clone(), rate.clone())?;
            let mut eta = sample_product_measure(&law, seed).into_inner();
            // The slowest site absorbs the difference, as the condensate of
            // the canonical measure would.
            let slowest = (0..eta.len())
                .min_by(|&a, &b| field.alphas()[a].total_cmp(&field.alphas()[b]))
                .unwrap_or(0);
            eta[slowest] = 0;
            let mut total: u64 = eta.iter().map(|&k| u64::from(k)).sum();
            if total <= particles {
                eta[slowest] = (particles - total) as u32;
            }
            let mut rng = rng::stream(seed, "hydro/flux/trim");
            while total > particles {
                let x = rng.random_range(0..eta.len());
                if eta[x] > 0 {
                    eta[x] -= 1;
                    total -= 1;
                }
            }
            Configuration::new(eta)
        }
        (StartMode::RingEquilibrium, Model::KExclusion { .. }) => Err(Error::InvalidExperiment(
            "ring-equilibrium starts are defined for zero-range models only".into(),
        )),
    }
}

fn exact_current(model: &Model, field: &RateField, particles: u64) -> Option<f64> {
    let l = field.len() as f64;
    let n = particles as f64;
    match model {
        Model::Zrp { kernel, rate } if kernel.is_totally_asymmetric() && rate.is_indicator() => {
            Some(canonical_ring_current(field.alphas(), particles as usize))
        }
        Model::KExclusion { cap: 1 } if field.alphas().iter().all(|&a| a == 1.0) => {
            Some(n * (l - n) / (l * (l - 1.0)))
        }
        _ => None,
    }
}

struct ReplicaFlux {
    current: f64,
    se: f64,
    burn_in: f64,
    stationary: bool,
    exact: Option<f64>,
}

pub fn estimate_flux_empirical(spec: &FluxSpec) -> Result<EmpiricalFluxTable> {
    spec.law.validate()?;
    if spec.sites < 2 || spec.replicas == 0 || spec.batches < 2 {
        return Err(Error::InvalidExperiment(
            "flux estimation needs at least 2 sites, one replica and two batches".into(),
        ));
    }
    if !(spec.horizon > 0.0 && spec.horizon.is_finite()) {
        return Err(Error::InvalidExperiment(format!("horizon {} must be positive", spec.horizon)));
    }
    if spec.densities.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidExperiment("densities must be increasing".into()));
    }
    let upper = spec.model.cap().map_or(f64::INFINITY, f64::from);
    if let Some(r) = spec.densities.iter().find(|r| !(**r >= 0.0 && **r <= upper)) {
        return Err(Error::InvalidExperiment(format!("density {r} outside [0, {upper}]")));
    }
    if let Some(b) = spec.burn_in {
        if !(b >= 0.0 && b < spec.horizon) {
            return Err(Error::InvalidExperiment(format!("burn-in {b} must lie in [0, horizon)")));
        }
    }
    let fields: Vec<RateField> = (0..spec.replicas)
        .map(|r| {
            let label = match spec.quenched {
                QuenchedMode::Fresh => format!("hydro/flux/field/{r}"),
                QuenchedMode::Fixed => "hydro/flux/field".to_string(),
            };
            sample_rate_field(&spec.law, spec.sites, rng::derive(spec.seed, &label))
        })
        .collect::<Result<_>>()?;
    let options = RunOptions {
        checkpoint_every: Some(spec.horizon / (spec.batches * 20) as f64),
        ..RunOptions::default()
    };
    let jobs: Vec<(usize, usize)> = (0..spec.densities.len())
        .flat_map(|d| (0..spec.replicas).map(move |r| (d, r)))
        .collect();
    let results: Vec<ReplicaFlux> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let rho = spec.densities[d];
            let particles = (rho * spec.sites as f64).round() as u64;
            let field = &fields[r];
            let init = initial_ring_state(spec.start, &spec.model, field, particles, rng::derive(spec.seed, &format!("hydro/flux/init/{d}/{r}")))?;
            let seed = rng::derive(spec.seed, &format!("hydro/flux/dynamics/{d}/{r}"));
            let run = spec.model.run(field, &init, spec.horizon, seed, &options)?;
            let burn_in = spec.burn_in.unwrap_or_else(|| {
                let speed = run.counter.displacement() as f64 / (spec.sites as f64 * spec.horizon);
                if speed > 0.0 {
                    (10.0 * rho / speed).min(0.5 * spec.horizon)
                } else {
                    0.5 * spec.horizon
                }
            });
            let est = measure_current(&run.counter, burn_in, spec.batches)?;
            Ok(ReplicaFlux {
                current: est.mean_current,
                se: est.mean_se,
                burn_in,
                stationary: est.looks_stationary(),
                exact: exact_current(&spec.model, field, particles),
            })
        })
        .collect::<Result<_>>()?;
    let points: Vec<FluxPoint> = results
        .chunks(spec.replicas)
        .zip(&spec.densities)
        .map(|(reps, &rho)| {
            let currents: Vec<f64> = reps.iter().map(|r| r.current).collect();
            let stats = MeanSe::of(&currents);
            let se = if reps.len() >= 2 { stats.se } else { reps[0].se };
            let exact = reps
                .iter()
                .map(|r| r.exact)
                .collect::<Option<Vec<f64>>>()
                .map(|e| e.iter().sum::<f64>() / e.len() as f64);
            FluxPoint {
                rho,
                particles: (rho * spec.sites as f64).round() as u64,
                current: stats.mean,
                se,
                replica_currents: currents,
                burn_in: reps.iter().map(|r| r.burn_in).collect(),
                stationary: reps.iter().all(|r| r.stationary),
                exact,
            }
        })
        .collect();
    Ok(EmpiricalFluxTable {
        sites: spec.sites,
        concavity: concavity_checks(&points),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(rho: f64, current: f64, se: f64) -> FluxPoint {
        FluxPoint {
            rho,
            particles: 0,
            current,
            se,
            replica_currents: vec![current],
            burn_in: vec![0.0],
            stationary: true,
            exact: None,
        }
    }

    #[test]
    fn concavity_residuals() {
        let pts = vec![point(0.0, 0.0, 0.01), point(0.5, 0.25, 0.01), point(1.0, 0.0, 0.01)];
        let c = concavity_checks(&pts);
        assert_eq!(c.len(), 1);
        assert!((c[0].violation + 0.25).abs() < 1e-12);
        assert!(c[0].passes(2.0));
        let convex = vec![point(0.0, 0.0, 0.01), point(1.0, 0.1, 0.01), point(3.0, 0.9, 0.01)];
        let c = concavity_checks(&convex);
        assert!((c[0].violation - (1.0 / 3.0 * 0.9 - 0.1)).abs() < 1e-12);
        assert!(!c[0].passes(2.0));
    }

    #[test]
    fn spread_is_exact() {
        let s = spread(7, 10);
        assert_eq!(s.iter().sum::<u32>(), 10);
        assert!(s.iter().all(|&k| k == 1 || k == 2));
    }

    #[test]
    fn homogeneous_tasep_matches_exact() {
        let spec = FluxSpec {
            model: Model::KExclusion { cap: 1 },
            law: DisorderLaw::homogeneous(),
            densities: vec![0.2, 0.5, 0.8],
            sites: 200,
            horizon: 2000.0,
            burn_in: None,
            replicas: 4,
            batches: 20,
            seed: 5,
            quenched: QuenchedMode::Fresh,
            start: StartMode::Spread,
        };
        let table = estimate_flux_empirical(&spec).unwrap();
        for p in &table.points {
            let exact = p.exact.unwrap();
            assert!((p.current - exact).abs() < 3.0 * p.se + 1e-3, "{p:?}");
        }
    }

    #[test]
    fn ring_equilibrium_start_keeps_total() {
        let spec = FluxSpec {
            model: Model::geometric_zrp(),
            law: DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 },
            densities: vec![1.0, 3.0],
            sites: 300,
            horizon: 200.0,
            burn_in: Some(50.0),
            replicas: 2,
            batches: 10,
            seed: 3,
            quenched: QuenchedMode::Fixed,
            start: StartMode::RingEquilibrium,
        };
        let field = sample_rate_field(&spec.law, 300, 1).unwrap();
        for n in [0u64, 300, 900] {
            assert_eq!(initial_ring_state(spec.start, &spec.model, &field, n, 4).unwrap().total(), n);
        }
        let table = estimate_flux_empirical(&spec).unwrap();
        assert_eq!(table.points[1].particles, 900);
        assert!(table.points.iter().all(|p| p.exact.is_some()));
    }

    #[test]
    fn rejects_bad_density() {
        let spec = FluxSpec {
            model: Model::KExclusion { cap: 2 },
            law: DisorderLaw::homogeneous(),
            densities: vec![2.5],
            sites: 10,
            horizon: 10.0,
            burn_in: None,
            replicas: 1,
            batches: 2,
            seed: 0,
            quenched: QuenchedMode::Fresh,
            start: StartMode::Spread,
        };
        assert!(estimate_flux_empirical(&spec).is_err());
    }
}
