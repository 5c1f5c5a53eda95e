use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::Lattice;
use crate::environment::{DisorderLaw, JumpKernel};
use crate::error::{Error, Result};
use crate::hydro::{Model, QuenchedMode, SamplingMode, StartMode, TestFunction};
use crate::pde::{Boundary, Profile};

/// One experiment, read from a TOML file with sections `environment`,
/// `model`, `pde`, `experiment` and `output`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde: Option<PdeSection>,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub law: DisorderLaw,
    /// Rate field to reuse instead of sampling one from `law`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_csv: Option<PathBuf>,
}

/// Where the PDE flux comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxSource {
    /// `rho (1 - rho)` on `[0, 1]`.
    Tasep { points: usize },
    /// `rho / (1 + rho)` on `[0, rho_max]`.
    GeometricZrp { rho_max: f64, points: usize },
    /// The equilibrium flux of the configured model and law.
    Model { rho_max: f64, step: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub flux: FluxSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdeMethod {
    Godunov,
    LaxOleinik,
    Riemann,
}

/// Initial state of a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Empty,
    /// Product measure at fugacity `phi` (zero-range only).
    Product { phi: f64 },
    /// Particles spread evenly at density `density`.
    Spread { density: f64 },
    /// CSV with header `site_index,occupancy`.
    Csv { path: PathBuf },
}

fn default_batches() -> usize {
    20
}

fn default_replicas() -> usize {
    1
}

fn default_step() -> f64 {
    1e-3
}

fn default_cfl() -> f64 {
    0.9
}

fn default_margin() -> f64 {
    2.0
}

fn default_cases() -> usize {
    20
}

fn default_pairs() -> usize {
    100
}

fn default_min_hits() -> u64 {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Flux table and critical density.
    Equilibria {
        rho_max: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
    /// One trajectory with current measurement.
    Simulate {
        sites: usize,
        horizon: f64,
        init: InitialState,
        #[serde(default)]
        burn_in: f64,
        #[serde(default = "default_batches")]
        batches: usize,
        #[serde(default)]
        bond: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snapshot_every: Option<f64>,
        /// Independent initial draws and dynamics on the same field. With
        /// more than one, the reported SE is the spread across replicas.
        #[serde(default = "default_replicas")]
        replicas: usize,
        /// Expected space-averaged current for `--check` (3 SE).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_current: Option<f64>,
    },
    /// Stationary current on rings over a density grid.
    Flux {
        densities: Vec<f64>,
        sites: usize,
        horizon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<f64>,
        replicas: usize,
        #[serde(default = "default_batches")]
        batches: usize,
        #[serde(default)]
        quenched: QuenchedMode,
        #[serde(default)]
        start: StartMode,
        /// Density cutoff for the analytic flux written next to the estimates.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_max: Option<f64>,
        /// `--check`: estimates within 3 SE of the closed-form flux.
        #[serde(default)]
        check_analytic: bool,
        /// `--check`: no midpoint-concavity violation beyond 2 pooled SE.
        #[serde(default)]
        check_concavity: bool,
    },
    /// Hydrodynamic scaling comparison.
    Hydro {
        u0: Profile,
        t: f64,
        scales: Vec<usize>,
        #[serde(default)]
        tests: Vec<TestFunction>,
        replicas: usize,
        #[serde(default)]
        quenched: QuenchedMode,
        #[serde(default)]
        sampling: SamplingMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_width: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile_window: Option<(f64, f64)>,
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_max: Option<f64>,
        #[serde(default = "default_step")]
        flux_step: f64,
        /// `--check`: largest-scale mean D below this multiple of `∫|phi|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
        /// `--check`: largest-scale mean block-profile L1 below this value.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile_tolerance: Option<f64>,
    },
    /// Condensation observables along one trajectory.
    Platoon {
        sites: usize,
        density: f64,
        horizon: f64,
        snapshot_every: f64,
        #[serde(default)]
        start: StartMode,
    },
    /// Entropy solution on a grid.
    Pde {
        u0: Profile,
        t: f64,
        domain: (f64, f64),
        dx: f64,
        #[serde(default = "default_cfl")]
        cfl: f64,
        boundary: Boundary,
        methods: Vec<PdeMethod>,
        /// `--check`: pairwise L1 distances below this value.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    /// Exact stationarity and duality checks on small rings.
    Oracle {
        #[serde(default = "default_cases")]
        cases: usize,
        #[serde(default = "default_pairs")]
        pairs: usize,
    },
    /// Interaction graphs of the graphical construction.
    Graph {
        lattice: Lattice,
        t0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default = "default_min_hits")]
        min_hits: u64,
    },
}

impl Experiment {
    /// Subcommand that runs this experiment.
    pub fn subcommand(&self) -> &'static str {
        match self {
            Experiment::Equilibria { .. } => "equilibria",
            Experiment::Simulate { .. } | Experiment::Flux { .. } => "simulate",
            Experiment::Hydro { .. } | Experiment::Platoon { .. } => "hydro",
            Experiment::Pde { .. } => "pde",
            Experiment::Oracle { .. } => "oracle",
            Experiment::Graph { .. } => "graph",
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable config")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        crate::hydro::hex(&Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn law(&self) -> Result<&DisorderLaw> {
        self.environment
            .as_ref()
            .map(|e| &e.law)
            .ok_or_else(|| Error::Config("missing [environment] section".into()))
    }

    pub fn model(&self) -> Result<&Model> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model] section".into()))
    }

    /// Kernel of a zero-range model, or the totally asymmetric kernel.
    pub fn kernel(&self) -> JumpKernel {
        match &self.model {
            Some(Model::Zrp { kernel, .. }) => kernel.clone(),
            _ => JumpKernel::totally_asymmetric(),
        }
    }
}
