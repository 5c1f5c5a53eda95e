//! Exact sector generators: stationarity of the product measure and the
//! duality relation on the randomized suite.

use zrplab::oracle::{default_suite, run_suite, suite_json_lines};

fn main() -> zrplab::Result<()> {
    let reports = run_suite(&default_suite(3, 20), 100)?;
    for r in &reports {
        println!(
            "L={} N={} cap={:?} {:<10} {:<10} states {:>4}: residual {:.1e}, duality {:.1e}",
            r.sites, r.particles, r.cap, r.kernel, r.rate, r.states, r.residual, r.scaled_discrepancy
        );
    }
    let all = reports.iter().all(|r| r.pass);
    println!("all cases pass: {all}");
    if std::env::args().any(|a| a == "--json") {
        print!("{}", suite_json_lines(&reports));
    }
    Ok(())
}
