use serde::{Deserialize, Serialize};

use crate::dynamics::{run_kexclusion, run_zrp, Configuration, RunOptions, Trajectory};
use crate::environment::{DisorderLaw, JumpKernel, RateField, RateFunction};
use crate::equilibria::{Equilibria, FluxTable};
use crate::error::{Error, Result};

/// Particle system driven in an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Zrp { kernel: JumpKernel, rate: RateFunction },
    KExclusion { cap: u32 },
}

impl Model {
    /// Totally asymmetric zero-range process with `r(k) = 1{k >= 1}`.
    pub fn geometric_zrp() -> Self {
        Model::Zrp {
            kernel: JumpKernel::totally_asymmetric(),
            rate: RateFunction::indicator(),
        }
    }

    pub fn run(
        &self,
        field: &RateField,
        init: &Configuration,
        horizon: f64,
        seed: u64,
        options: &RunOptions,
    ) -> Result<Trajectory> {
        match self {
            Model::Zrp { kernel, rate } => run_zrp(field, kernel, rate, init, horizon, seed, options),
            Model::KExclusion { cap } => run_kexclusion(field, *cap, init, horizon, seed, options),
        }
    }

    /// Mean drift of a single particle's jumps.
    pub fn drift(&self) -> f64 {
        match self {
            Model::Zrp { kernel, .. } => kernel.drift(),
            Model::KExclusion { .. } => 1.0,
        }
    }

    pub fn range(&self) -> usize {
        match self {
            Model::Zrp { kernel, .. } => kernel.range() as usize,
            Model::KExclusion { .. } => 1,
        }
    }

    pub fn cap(&self) -> Option<u32> {
        match self {
            Model::Zrp { .. } => None,
            Model::KExclusion { cap } => Some(*cap),
        }
    }

    /// Largest single-site jump rate.
    pub fn max_site_rate(&self) -> f64 {
        match self {
            Model::Zrp { rate, .. } => rate.tail(),
            Model::KExclusion { .. } => 1.0,
        }
    }

    /// Macroscopic flux `gamma f` on `[0, rho_max]`, when it is known in
    /// closed form or from the equilibrium calculus.
    pub fn macroscopic_flux(&self, law: &DisorderLaw, rho_max: f64, step: f64) -> Result<FluxTable> {
        let gamma = self.drift();
        if !(gamma > 0.0) {
            return Err(Error::InvalidExperiment(format!(
                "hydrodynamic experiments need a positive drift, got {gamma}"
            )));
        }
        match self {
            Model::Zrp { rate, .. } => {
                let eq = Equilibria::new(law, rate)?;
                let table = FluxTable::from_equilibria(&eq, rho_max, step)?;
                if gamma == 1.0 {
                    return Ok(table);
                }
                let values = table.values().iter().map(|v| v * gamma).collect();
                FluxTable::from_values(table.rho_max(), values, table.rho_star(), table.c())
            }
            Model::KExclusion { cap } => {
                let homogeneous = matches!(law, DisorderLaw::FiniteSupport { atoms } if atoms.len() == 1 && atoms[0].0 == 1.0);
                if *cap == 1 && homogeneous {
                    let points = ((1.0 / step).round() as usize).max(2) + 1;
                    Ok(FluxTable::tasep(points))
                } else {
                    Err(Error::InvalidExperiment(
                        "the K-exclusion flux is only known in closed form for K = 1 without disorder".into(),
                    ))
                }
            }
        }
    }
}
