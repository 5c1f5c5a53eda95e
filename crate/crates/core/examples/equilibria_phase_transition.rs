//! Density-fugacity curve and flux of a disordered geometric zero-range
//! process, showing the saturation of the flux at the critical density.

use zrplab::environment::{DisorderLaw, RateFunction};
use zrplab::equilibria::{critical_density, critical_density_quadrature, Equilibria, FluxTable};

fn main() -> zrplab::Result<()> {
    let rate = RateFunction::indicator();
    let law = DisorderLaw::ShiftedBeta { c: 0.5, a: 2.0, b: 1.0 };
    let eq = Equilibria::new(&law, &rate)?;
    println!(
        "c = {}, rho* = {:.6} (quadrature {:.6})",
        eq.c(),
        critical_density(&law, &rate),
        critical_density_quadrature(&law, &rate)
    );

    println!("{:>8} {:>10}", "phi", "R(phi)");
    for k in 1..10 {
        let phi = eq.phi_limit() * k as f64 / 10.0;
        println!("{phi:>8.3} {:>10.5}", eq.density(phi)?);
    }

    let table = FluxTable::from_equilibria(&eq, 4.0, 0.01)?;
    println!("{:>8} {:>10}", "rho", "f(rho)");
    for rho in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
        println!("{rho:>8.2} {:>10.5}", table.eval(rho));
    }

    // An atom at the left endpoint keeps every density subcritical.
    let atom = DisorderLaw::FiniteSupport {
        atoms: vec![(0.5, 0.2), (1.0, 0.8)],
    };
    println!("atom at c: rho* = {}", critical_density(&atom, &rate));
    Ok(())
}
