//! Stationary current of the disordered zero-range process started from a
//! product measure, compared with the fugacity. A single ring conserves
//! its particle number, so each run settles on the finite-ring current at
//! the sampled N rather than on the fugacity itself.

use zrplab::dynamics::{measure_current, run_zrp, RunOptions};
use zrplab::environment::{sample_rate_field, DisorderLaw, JumpKernel, RateFunction};
use zrplab::equilibria::{canonical_ring_current, sample_product_measure, QuenchedProductLaw};

fn main() -> zrplab::Result<()> {
    let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
    let kernel = JumpKernel::totally_asymmetric();
    let rate = RateFunction::indicator();
    let field = sample_rate_field(&law, 2000, 1)?;
    let horizon = 400.0;
    let options = RunOptions {
        checkpoint_every: Some(horizon / 400.0),
        ..RunOptions::default()
    };
    for (i, phi) in [0.1, 0.2, 0.3, 0.4].into_iter().enumerate() {
        let product = QuenchedProductLaw::new(phi, field.clone(), rate.clone())?;
        let init = sample_product_measure(&product, 10 + i as u64);
        let t = run_zrp(&field, &kernel, &rate, &init, horizon, 20 + i as u64, &options)?;
        let est = measure_current(&t.counter, 40.0, 20)?;
        println!(
            "phi = {phi}: N = {}, current {:.4} ± {:.4} (ring at this N: {:.4}), drift z {:+.2}",
            init.total(),
            est.mean_current,
            est.mean_se,
            canonical_ring_current(field.alphas(), init.total() as usize),
            est.drift_z
        );
    }
    Ok(())
}
