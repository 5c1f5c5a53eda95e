//! The graphical construction and the event-driven engine sample the same
//! law: compare their mean currents on a small ring.

use zrplab::dynamics::{run_harris, run_zrp, thinning_acceptance, Configuration, RunOptions};
use zrplab::environment::{sample_rate_field, DisorderLaw, JumpKernel, RateFunction};
use zrplab::oracle::{exact_ring_current, SectorModel};
use zrplab::stats::MeanSe;

fn main() -> zrplab::Result<()> {
    let law = DisorderLaw::UniformInterval { c: 0.5 };
    let kernel = JumpKernel::nearest_neighbor(0.8)?;
    let rate = RateFunction::indicator();
    let field = sample_rate_field(&law, 5, 3)?;
    let init = Configuration::new(vec![2, 1, 0, 1, 0])?;
    let model = SectorModel::Zrp {
        kernel: kernel.clone(),
        rate: rate.clone(),
    };
    let exact = exact_ring_current(&field, &model, 4, 0)?;

    let (t0, blocks, runs) = (0.05, 2000, 200);
    let horizon = t0 * blocks as f64;
    let mut harris = Vec::with_capacity(runs);
    let mut gillespie = Vec::with_capacity(runs);
    for r in 0..runs as u64 {
        let h = run_harris(&field, &kernel, &rate, &init, blocks, t0, 100 + r)?;
        let net: i64 = h
            .jumps
            .iter()
            .map(|j| match (j.from, j.to) {
                (0, 1) => 1,
                (1, 0) => -1,
                _ => 0,
            })
            .sum();
        harris.push(net as f64 / horizon);
        let g = run_zrp(&field, &kernel, &rate, &init, horizon, 500 + r, &RunOptions::default())?;
        gillespie.push(g.counter.crossings() as f64 / horizon);
    }
    let h = MeanSe::of(&harris);
    let g = MeanSe::of(&gillespie);
    println!("exact stationary current across bond 0: {exact:.4}");
    println!("graphical construction: {:.4} ± {:.4}", h.mean, h.se);
    println!("event-driven engine:    {:.4} ± {:.4}", g.mean, g.se);

    let alpha = field.alphas()[0];
    println!(
        "thinning acceptance at alpha = {alpha:.3}: {:.4}",
        thinning_acceptance(alpha, &rate, 1, 100_000, 9)
    );
    Ok(())
}
