//! Where the mass goes on a supercritical ring: share of particles on the
//! slowest decile of sites and the maximal occupancy over time.

use zrplab::dynamics::{run_zrp, RunOptions};
use zrplab::environment::{sample_rate_field, DisorderLaw, JumpKernel, RateFunction};
use zrplab::equilibria::Equilibria;
use zrplab::hydro::{annealed_decile_shares, initial_ring_state, platoon_diagnostics, Model, StartMode};

fn main() -> zrplab::Result<()> {
    let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
    let rate = RateFunction::indicator();
    let kernel = JumpKernel::totally_asymmetric();
    let sites = 2000;
    let particles = 3 * sites as u64;
    let field = sample_rate_field(&law, sites, 1)?;
    let init = initial_ring_state(StartMode::Spread, &Model::geometric_zrp(), &field, particles, 2)?;
    let options = RunOptions {
        snapshot_times: (1..=20).map(|k| 100.0 * k as f64).collect(),
        ..RunOptions::default()
    };
    let t = run_zrp(&field, &kernel, &rate, &init, 2000.0, 3, &options)?;
    let d = platoon_diagnostics(&t.snapshots, &field)?;
    print!("{}", d.to_csv());
    println!("max occupancy trend: tau {:.3}, p {:.3}", d.max_trend.0, d.max_trend.1);

    let eq = Equilibria::new(&law, &rate)?;
    // The critical measure itself is out of range; approach it from below.
    let predicted = annealed_decile_shares(&law, &rate, 0.9999 * eq.phi_limit())?;
    println!("near-critical share of the slowest decile (bulk only): {:.4}", predicted[0]);
    Ok(())
}
