//! A supercritical constant profile under the geometric zero-range
//! process: test-function pairings stay close to the frozen profile while
//! the block profile is rough because mass condenses on slow sites.

use zrplab::environment::DisorderLaw;
use zrplab::hydro::{run_scaling_experiment, Model, QuenchedMode, SamplingMode, ScalingSpec, TestFunction};
use zrplab::pde::Profile;

fn main() -> zrplab::Result<()> {
    let mut spec = ScalingSpec {
        model: Model::geometric_zrp(),
        law: DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 },
        u0: Profile::constant(3.0),
        t: 1.0,
        scales: vec![500],
        tests: vec![TestFunction::triangular(0.0, 0.5)],
        replicas: 4,
        seed: 5,
        quenched: QuenchedMode::Fresh,
        sampling: SamplingMode::Deterministic,
        block_width: None,
        profile_window: Some((-0.5, 0.5)),
        margin: 2.0,
        rho_max: Some(6.0),
        flux_step: 1e-3,
    };
    for width in [23, 100, 250] {
        spec.block_width = Some(width);
        let report = run_scaling_experiment(&spec)?;
        for s in &report.summaries {
            println!("w = {width:>3} {:<28} {:.4} ± {:.4}", s.test_id, s.mean, s.se);
        }
    }
    Ok(())
}
