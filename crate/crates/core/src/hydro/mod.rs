//! Hydrodynamic experiments: profile sampling, empirical measures, scaling
//! comparisons with the entropy solution, flux estimation and condensation
//! diagnostics.

mod diagnostics;
mod empirical;
mod flux;
mod gaps;
mod model;
mod sampling;
mod scaling;
mod test_function;
mod window;

pub use diagnostics::{
    annealed_decile_shares, decile_groups, platoon_diagnostics, predicted_decile_shares, PhaseDiagnostics, DECILES,
};
pub use empirical::{block_profile, default_block_width, empirical_measure, pairing, BlockProfile, EmpiricalMeasureSample};
pub(crate) use flux::spread;
pub use flux::{concavity_checks, estimate_flux_empirical, initial_ring_state, ConcavityCheck, EmpiricalFluxTable, FluxPoint, FluxSpec, StartMode};
pub use gaps::{gaps_to_zrp, zrp_to_gaps};
pub use model::Model;
pub use sampling::{check_local_equilibrium_bound, sample_initial_profile, SamplingMode};
pub use scaling::{
    run_scaling_experiment, ComparisonReport, ProfileComparison, QuenchedMode, Reference, ReplicaResult, ScalingSpec,
    Summary, BLOCK_L1_ID,
};
pub(crate) use scaling::hex;
pub use test_function::TestFunction;
pub use window::MacroWindow;
