//! Empirical density against the entropy solution along a ladder of
//! scales, for a subcritical step.

use zrplab::environment::DisorderLaw;
use zrplab::hydro::{run_scaling_experiment, Model, QuenchedMode, SamplingMode, ScalingSpec, TestFunction};
use zrplab::pde::Profile;

fn main() -> zrplab::Result<()> {
    let spec = ScalingSpec {
        model: Model::geometric_zrp(),
        law: DisorderLaw::homogeneous(),
        u0: Profile::step(1.0, 0.0, 0.0),
        t: 1.0,
        scales: vec![100, 400, 1600],
        tests: vec![TestFunction::triangular(0.0, 1.0), TestFunction::triangular(0.5, 0.5)],
        replicas: 8,
        seed: 1,
        quenched: QuenchedMode::Fresh,
        sampling: SamplingMode::LocalEquilibrium,
        block_width: None,
        profile_window: Some((-1.0, 1.0)),
        margin: 2.0,
        rho_max: None,
        flux_step: 1e-3,
    };
    let report = run_scaling_experiment(&spec)?;
    for s in &report.summaries {
        println!("n = {:>5} {:<28} {:.4} ± {:.4}", s.scale, s.test_id, s.mean, s.se);
    }
    Ok(())
}
