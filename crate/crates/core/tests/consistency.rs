use zrplab::dynamics::{measure_current, run_harris, run_kexclusion, run_zrp, Configuration, RunOptions};
use zrplab::environment::{sample_rate_field, DisorderLaw, JumpKernel, RateFunction};
use zrplab::hydro::{gaps_to_zrp, zrp_to_gaps};
use zrplab::oracle::{exact_ring_current, SectorModel};
use zrplab::stats::MeanSe;

fn long_run_current(run: impl Fn(&RunOptions) -> zrplab::dynamics::Trajectory, horizon: f64) -> (f64, f64) {
    let options = RunOptions {
        checkpoint_every: Some(horizon / 2000.0),
        ..RunOptions::default()
    };
    let t = run(&options);
    let est = measure_current(&t.counter, horizon / 20.0, 20).unwrap();
    (est.current, est.se)
}

#[test]
fn zrp_engine_matches_exact_generator() {
    let law = DisorderLaw::UniformInterval { c: 0.5 };
    let field = sample_rate_field(&law, 4, 17).unwrap();
    let kernel = JumpKernel::nearest_neighbor(0.7).unwrap();
    let rate = RateFunction::capped_linear(2).unwrap();
    let model = SectorModel::Zrp {
        kernel: kernel.clone(),
        rate: rate.clone(),
    };
    let exact = exact_ring_current(&field, &model, 3, 1).unwrap();
    let init = Configuration::new(vec![1, 1, 1, 0]).unwrap();
    let (j, se) = long_run_current(
        |o| {
            let o = RunOptions { bond: 1, ..o.clone() };
            run_zrp(&field, &kernel, &rate, &init, 100_000.0, 3, &o).unwrap()
        },
        100_000.0,
    );
    assert!((j - exact).abs() < 4.0 * se, "{j} ± {se} vs {exact}");
}

#[test]
fn kexclusion_engine_matches_exact_generator() {
    let law = DisorderLaw::UniformInterval { c: 0.5 };
    let field = sample_rate_field(&law, 5, 23).unwrap();
    let exact = exact_ring_current(&field, &SectorModel::KExclusion { cap: 2 }, 5, 0).unwrap();
    let init = Configuration::new(vec![2, 1, 1, 1, 0]).unwrap();
    let (j, se) = long_run_current(
        |o| run_kexclusion(&field, 2, &init, 100_000.0, 4, o).unwrap(),
        100_000.0,
    );
    assert!((j - exact).abs() < 4.0 * se, "{j} ± {se} vs {exact}");
}

#[test]
fn graphical_construction_matches_exact_generator() {
    let law = DisorderLaw::UniformInterval { c: 0.5 };
    let field = sample_rate_field(&law, 3, 29).unwrap();
    let kernel = JumpKernel::totally_asymmetric();
    let rate = RateFunction::indicator();
    let model = SectorModel::Zrp {
        kernel: kernel.clone(),
        rate: rate.clone(),
    };
    let exact = exact_ring_current(&field, &model, 2, 0).unwrap();
    let init = Configuration::new(vec![1, 1, 0]).unwrap();
    let (t0, blocks) = (0.05, 4000);
    let currents: Vec<f64> = (0..40)
        .map(|r| {
            let h = run_harris(&field, &kernel, &rate, &init, blocks, t0, 1000 + r).unwrap();
            let crossings = h.jumps.iter().filter(|j| j.from == 0 && j.to == 1).count();
            crossings as f64 / (t0 * blocks as f64)
        })
        .collect();
    let m = MeanSe::of(&currents);
    // Includes the transient from a fixed start, small against the horizon.
    assert!((m.mean - exact).abs() < 4.0 * m.se + 0.01, "{} ± {} vs {exact}", m.mean, m.se);
}

#[test]
fn gap_process_conserves_particles_and_sites() {
    let positions = [0, 3, 4, 9, 15];
    let gaps = gaps_to_zrp(&positions, 20).unwrap();
    assert_eq!(gaps.len(), positions.len());
    assert_eq!(gaps.total() as usize, 20 - positions.len());
    assert_eq!(zrp_to_gaps(&gaps, 0).unwrap(), (positions.to_vec(), 20));
}
