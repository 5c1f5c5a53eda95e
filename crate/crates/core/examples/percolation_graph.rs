//! Components of the interaction graph for a block length below the
//! subcritical threshold, against the path-counting bound.

use zrplab::dynamics::graph::{subcritical_threshold, Range};
use zrplab::dynamics::{build_interaction_graph, percolation_experiment, Lattice};
use zrplab::environment::JumpKernel;

fn main() -> zrplab::Result<()> {
    let kernel = JumpKernel::nearest_neighbor(0.5)?;
    let range = Range::from_kernel(&kernel);
    let threshold = subcritical_threshold(range.degree(), 1.0);
    println!("degree {}, threshold t0 < {threshold:.5}", range.degree());

    let graph = build_interaction_graph(&kernel, 0.1, 100_000, 1)?;
    println!(
        "ring of 1e5 sites: {} components, largest {}",
        graph.components(),
        graph.largest_component()
    );

    let report = percolation_experiment(Lattice::Ring { len: 10_000 }, &range, 1.0, 0.1, 100_000, 2)?;
    println!("mean origin component {:.4} ± {:.4}", report.mean_size, report.mean_size_se);
    print!("{}", report.tail_csv());
    println!("below bound where hits >= 100: {}", report.below_bound(100));
    Ok(())
}
