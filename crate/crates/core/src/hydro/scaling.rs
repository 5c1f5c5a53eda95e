use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::empirical::{block_profile, default_block_width, pairing, BlockProfile};
use super::model::Model;
use super::sampling::{sample_initial_profile, SamplingMode};
use super::test_function::TestFunction;
use super::window::MacroWindow;
use crate::dynamics::RunOptions;
use crate::environment::{sample_rate_field, DisorderLaw};
use crate::equilibria::FluxTable;
use crate::error::{Error, Result};
use crate::pde::{cell_centers, lax_oleinik_solve, Profile, RiemannSolution, SolutionField};
use crate::quadrature::integrate_with_breaks;
use crate::rng;
use crate::stats::MeanSe;

/// How the quenched field is drawn across replicas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuenchedMode {
    /// A new field for every replica.
    #[default]
    Fresh,
    /// One field per scale shared by all replicas.
    Fixed,
}

fn default_margin() -> f64 {
    2.0
}

fn default_flux_step() -> f64 {
    1e-3
}

/// A hydrodynamic scaling experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub model: Model,
    pub law: DisorderLaw,
    pub u0: Profile,
    /// Macroscopic time; each scale `n` is run to `n t`.
    pub t: f64,
    pub scales: Vec<usize>,
    #[serde(default)]
    pub tests: Vec<TestFunction>,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub quenched: QuenchedMode,
    #[serde(default)]
    pub sampling: SamplingMode,
    /// Block width in sites; `ceil(sqrt(n))` when absent.
    #[serde(default)]
    pub block_width: Option<usize>,
    /// Window on which the block profile is compared with the reference.
    #[serde(default)]
    pub profile_window: Option<(f64, f64)>,
    /// Padding factor applied to `t max|f'|`.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Density cutoff of the flux table; `2 max u0` when absent.
    #[serde(default)]
    pub rho_max: Option<f64>,
    #[serde(default = "default_flux_step")]
    pub flux_step: f64,
}

impl ScalingSpec {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("serializable spec");
        hex(&Sha256::digest(json.as_bytes()))
    }

    fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.scales.windows(2).any(|w| w[1] <= w[0]) || self.scales[0] == 0 {
            return Err(Error::InvalidExperiment("scales must be positive and increasing".into()));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidExperiment(format!("time {} must be finite and nonnegative", self.t)));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidExperiment("at least one replica is required".into()));
        }
        if self.tests.is_empty() && self.profile_window.is_none() {
            return Err(Error::InvalidExperiment("nothing to measure: no tests and no profile window".into()));
        }
        if let Some((a, b)) = self.profile_window {
            if !(a < b) {
                return Err(Error::InvalidExperiment("empty profile window".into()));
            }
        }
        for t in &self.tests {
            t.validate()?;
        }
        self.law.validate()?;
        Ok(())
    }

    /// Macroscopic region that has to be free of boundary effects.
    fn region(&self) -> (f64, f64) {
        let mut a = f64::INFINITY;
        let mut b = f64::NEG_INFINITY;
        for t in &self.tests {
            let (l, r) = t.support();
            a = a.min(l);
            b = b.max(r);
        }
        if let Some((l, r)) = self.profile_window {
            a = a.min(l);
            b = b.max(r);
        }
        (a, b)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

enum ReferenceKind {
    Frozen,
    Riemann { ul: f64, ur: f64, at: f64 },
    Numerical(SolutionField),
}

/// Entropy solution at the experiment's time, with pairings against test
/// functions.
pub struct Reference {
    flux: FluxTable,
    u0: Profile,
    t: f64,
    kind: ReferenceKind,
}

impl Reference {
    /// `region` bounds where the reference will be queried.
    pub fn new(u0: &Profile, flux: &FluxTable, t: f64, region: (f64, f64)) -> Result<Self> {
        let frozen = t == 0.0 || flux.rho_star() <= u0.min();
        let kind = if frozen {
            ReferenceKind::Frozen
        } else {
            match u0 {
                Profile::PiecewiseConstant { breaks, values } if breaks.len() == 1 => ReferenceKind::Riemann {
                    ul: values[0],
                    ur: values[1],
                    at: breaks[0],
                },
                _ => {
                    let (a, b) = region;
                    let cells = 4000;
                    let x = cell_centers(a, b, cells);
                    ReferenceKind::Numerical(lax_oleinik_solve(u0, flux, &x, t)?)
                }
            }
        };
        Ok(Reference {
            flux: flux.clone(),
            u0: u0.clone(),
            t,
            kind,
        })
    }

    pub fn flux(&self) -> &FluxTable {
        &self.flux
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.kind {
            ReferenceKind::Frozen => self.u0.eval(x),
            ReferenceKind::Riemann { ul, ur, at } => RiemannSolution::new(*ul, *ur, &self.flux).sample(&[x], self.t, *at).u[0],
            ReferenceKind::Numerical(s) => s.eval(x),
        }
    }

    /// `∫ phi(x) u(x, t) dx`.
    pub fn pairing(&self, test: &TestFunction) -> f64 {
        let (a, b) = test.support();
        match &self.kind {
            ReferenceKind::Frozen => {
                let mut breaks = test.kinks();
                breaks.extend_from_slice(self.u0.kinks());
                integrate_with_breaks(|x| test.eval(x) * self.u0.eval(x), a, b, &breaks, 1e-12)
            }
            ReferenceKind::Riemann { ul, ur, at } => {
                RiemannSolution::new(*ul, *ur, &self.flux).integral(a, b, self.t, *at, |x| test.eval(x), &test.kinks())
            }
            ReferenceKind::Numerical(s) => s
                .weights()
                .iter()
                .zip(s.x.iter().zip(&s.u))
                .map(|(w, (x, u))| w * test.eval(*x) * u)
                .sum(),
        }
    }
}

/// Outcome of one replica at one scale.
#[derive(Clone, Debug, Serialize)]
pub struct ReplicaResult {
    pub scale: usize,
    pub replica: usize,
    pub field_seed: u64,
    pub init_seed: u64,
    pub dynamics_seed: u64,
    pub sites: usize,
    pub particles: u64,
    /// `D_n(phi, t)` per test function, in spec order.
    pub discrepancies: Vec<f64>,
    pub block_l1: Option<f64>,
    /// False when boundary information reached the measured region.
    pub valid: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub scale: usize,
    pub test_id: String,
    pub mean: f64,
    pub se: f64,
    pub valid: usize,
}

/// Block profile of the first replica next to the reference.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileComparison {
    pub scale: usize,
    pub block: BlockProfile,
    pub reference: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub spec_hash: String,
    pub run_id: String,
    pub seed: u64,
    pub test_ids: Vec<String>,
    pub integral_abs: Vec<f64>,
    pub reference_pairings: Vec<f64>,
    pub results: Vec<ReplicaResult>,
    pub summaries: Vec<Summary>,
    pub profiles: Vec<ProfileComparison>,
}

pub const BLOCK_L1_ID: &str = "block_l1";

impl ComparisonReport {
    pub fn summary(&self, scale: usize, test_id: &str) -> Option<&Summary> {
        self.summaries.iter().find(|s| s.scale == scale && s.test_id == test_id)
    }

    /// Replica-mean discrepancies over the scale ladder never increase by
    /// more than one pooled standard error.
    pub fn nonincreasing_within_se(&self, test_id: &str) -> bool {
        let s: Vec<&Summary> = self.summaries.iter().filter(|s| s.test_id == test_id).collect();
        s.windows(2)
            .all(|w| w[1].mean <= w[0].mean + (w[0].se * w[0].se + w[1].se * w[1].se).sqrt())
    }

    /// CSV `scale,test_id,replica,D,valid` with `mean` and `se` summary rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,test_id,replica,D,valid\n");
        let mut ids: Vec<&str> = self.test_ids.iter().map(String::as_str).collect();
        if self.results.iter().any(|r| r.block_l1.is_some()) {
            ids.push(BLOCK_L1_ID);
        }
        let scales: Vec<usize> = {
            let mut s: Vec<usize> = self.results.iter().map(|r| r.scale).collect();
            s.dedup();
            s
        };
        for &n in &scales {
            for (k, id) in ids.iter().enumerate() {
                for r in self.results.iter().filter(|r| r.scale == n) {
                    let d = if k < self.test_ids.len() {
                        r.discrepancies[k]
                    } else {
                        r.block_l1.unwrap_or(f64::NAN)
                    };
                    out.push_str(&format!("{n},{id},{},{d},{}\n", r.replica, u8::from(r.valid)));
                }
                if let Some(s) = self.summary(n, id) {
                    out.push_str(&format!("{n},{id},mean,{},{}\n", s.mean, s.valid));
                    out.push_str(&format!("{n},{id},se,{},{}\n", s.se, s.valid));
                }
            }
        }
        out
    }

    /// CSV `x,u_empirical,u_pde` for one scale.
    pub fn profile_csv(&self, scale: usize) -> Option<String> {
        let p = self.profiles.iter().find(|p| p.scale == scale)?;
        let mut out = String::from("x,u_empirical,u_pde\n");
        for ((x, u), r) in p.block.x.iter().zip(&p.block.u).zip(&p.reference) {
            out.push_str(&format!("{x},{u},{r}\n"));
        }
        Some(out)
    }

    /// JSON manifest with the spec hash, run id and every derived seed.
    pub fn manifest_json(&self) -> String {
        let seeds: Vec<serde_json::Value> = self
            .results
            .iter()
            .map(|r| {
                serde_json::json!({
                    "scale": r.scale,
                    "replica": r.replica,
                    "field": r.field_seed,
                    "init": r.init_seed,
                    "dynamics": r.dynamics_seed,
                })
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "spec_hash": self.spec_hash,
            "run_id": self.run_id,
            "seed": self.seed,
            "seeds": seeds,
        }))
        .expect("serializable manifest")
    }
}

/// Samples, evolves and compares every `(scale, replica)` pair.
pub fn run_scaling_experiment(spec: &ScalingSpec) -> Result<ComparisonReport> {
    spec.validate()?;
    let rho_max = match (spec.rho_max, spec.model.cap()) {
        (Some(r), _) => r,
        (None, Some(k)) => k as f64,
        (None, None) => (2.0 * spec.u0.max()).max(1.0),
    };
    if spec.model.cap().is_none() && rho_max < 2.0 * spec.u0.max() {
        return Err(Error::InvalidExperiment(format!(
            "flux cutoff {rho_max} is below twice the largest initial density"
        )));
    }
    let flux = spec.model.macroscopic_flux(&spec.law, rho_max, spec.flux_step)?;
    let region = spec.region();
    let reference = Reference::new(&spec.u0, &flux, spec.t, region)?;
    let speed = flux.max_abs_slope();
    let pad = spec.margin * spec.t * speed + 0.05;
    let reference_pairings: Vec<f64> = spec.tests.iter().map(|t| reference.pairing(t)).collect();

    let jobs: Vec<(usize, usize)> = spec
        .scales
        .iter()
        .flat_map(|&n| (0..spec.replicas).map(move |r| (n, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, r)| run_replica(spec, n, r, region, pad, &reference, &reference_pairings))
        .collect::<Result<Vec<_>>>()?;

    let mut summaries = Vec::new();
    let mut profiles = Vec::new();
    for &n in &spec.scales {
        let at_scale: Vec<&(ReplicaResult, Option<ProfileComparison>)> =
            results.iter().filter(|(r, _)| r.scale == n).collect();
        let valid: Vec<&ReplicaResult> = at_scale.iter().map(|(r, _)| r).filter(|r| r.valid).collect();
        for (k, t) in spec.tests.iter().enumerate() {
            let d: Vec<f64> = valid.iter().map(|r| r.discrepancies[k]).collect();
            let s = MeanSe::of(&d);
            summaries.push(Summary {
                scale: n,
                test_id: t.id(),
                mean: s.mean,
                se: s.se,
                valid: d.len(),
            });
        }
        if spec.profile_window.is_some() {
            let d: Vec<f64> = valid.iter().filter_map(|r| r.block_l1).collect();
            let s = MeanSe::of(&d);
            summaries.push(Summary {
                scale: n,
                test_id: BLOCK_L1_ID.into(),
                mean: s.mean,
                se: s.se,
                valid: d.len(),
            });
        }
        if let Some(p) = at_scale.iter().find_map(|(_, p)| p.clone()) {
            profiles.push(p);
        }
    }
    let spec_hash = spec.hash();
    let run_id = hex(&Sha256::digest(format!("{spec_hash}:{}", spec.seed).as_bytes()))[..12].to_string();
    Ok(ComparisonReport {
        spec_hash,
        run_id,
        seed: spec.seed,
        test_ids: spec.tests.iter().map(TestFunction::id).collect(),
        integral_abs: spec.tests.iter().map(TestFunction::integral_abs).collect(),
        reference_pairings,
        results: results.into_iter().map(|(r, _)| r).collect(),
        summaries,
        profiles,
    })
}

fn run_replica(
    spec: &ScalingSpec,
    n: usize,
    r: usize,
    region: (f64, f64),
    pad: f64,
    reference: &Reference,
    reference_pairings: &[f64],
) -> Result<(ReplicaResult, Option<ProfileComparison>)> {
    let window = MacroWindow::covering(region.0 - pad, region.1 + pad, n);
    let field_label = match spec.quenched {
        QuenchedMode::Fresh => format!("hydro/field/{n}/{r}"),
        QuenchedMode::Fixed => format!("hydro/field/{n}"),
    };
    let field_seed = rng::derive(spec.seed, &field_label);
    let init_seed = rng::derive(spec.seed, &format!("hydro/init/{n}/{r}"));
    let dynamics_seed = rng::derive(spec.seed, &format!("hydro/dynamics/{n}/{r}"));
    let field = sample_rate_field(&spec.law, window.sites, field_seed)?;
    let init = sample_initial_profile(&spec.u0, &window, &field, &spec.model, spec.sampling, init_seed)?;
    let range = spec.model.range();
    let seam: Vec<usize> = (0..range).chain(window.sites - range..window.sites).collect();
    let options = RunOptions {
        sentinel_seeds: seam,
        ..RunOptions::default()
    };
    let run = spec.model.run(&field, &init, n as f64 * spec.t, dynamics_seed, &options)?;
    let measured = window.sites_in(region.0, region.1);
    let valid = run
        .tainted
        .as_ref()
        .is_none_or(|t| !t[measured.clone()].iter().any(|&b| b));
    let discrepancies = spec
        .tests
        .iter()
        .zip(reference_pairings)
        .map(|(t, exact)| (pairing(&run.config, &window, t) - exact).abs())
        .collect();
    let width = spec.block_width.unwrap_or_else(|| default_block_width(n));
    let block_l1 = spec.profile_window.map(|(a, b)| {
        let (bp, first) = block_profile(&run.config, &window, width, a, b);
        bp.l1_distance(&window, first, |x| reference.density(x))
    });
    let profile = (r == 0).then(|| {
        let (bp, _) = block_profile(&run.config, &window, width, region.0, region.1);
        let reference = bp.x.iter().map(|&x| reference.density(x)).collect();
        ProfileComparison {
            scale: n,
            block: bp,
            reference,
        }
    });
    Ok((
        ReplicaResult {
            scale: n,
            replica: r,
            field_seed,
            init_seed,
            dynamics_seed,
            sites: window.sites,
            particles: init.total(),
            discrepancies,
            block_l1,
            valid,
        },
        profile,
    ))
}
