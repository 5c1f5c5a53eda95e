//! Riemann problems solved three ways: Godunov, the Lax-Oleinik formula
//! and the exact self-similar solution.

use zrplab::equilibria::FluxTable;
use zrplab::pde::{godunov_solve, lax_oleinik_solve, Boundary, Profile, RiemannSolution};

fn main() -> zrplab::Result<()> {
    let cases = [
        ("TASEP rarefaction", FluxTable::tasep(1001), 1.0, 0.0),
        ("TASEP shock", FluxTable::tasep(1001), 0.0, 1.0),
        ("ZRP shock", FluxTable::geometric_zrp(2.0, 2001)?, 0.0, 1.0),
        ("ZRP rarefaction", FluxTable::geometric_zrp(2.0, 2001)?, 1.5, 0.0),
    ];
    let t = 0.5;
    for (name, flux, ul, ur) in &cases {
        let u0 = Profile::step(*ul, *ur, 0.0);
        let g = godunov_solve(&u0, flux, (-1.0, 1.0), 1e-3, 0.9, t, Boundary::Outflow)?;
        let lo = lax_oleinik_solve(&u0, flux, &g.x, t)?;
        let exact = RiemannSolution::new(*ul, *ur, flux);
        let ex = exact.sample(&g.x, t, 0.0);
        println!(
            "{name}: |G-LO| = {:.2e}, |G-exact| = {:.2e}, |LO-exact| = {:.2e}, shock speed {:?}",
            g.l1_distance(&lo)?,
            g.l1_distance(&ex)?,
            lo.l1_distance(&ex)?,
            exact.shock_speed()
        );
    }
    Ok(())
}
