//! Entropy solutions of `u_t + f(u)_x = 0` for concave tabulated `f`:
//! the Lax-Oleinik formula, a Godunov scheme and exact Riemann solutions.

mod conjugate;
mod godunov;
mod lax_oleinik;
mod profile;
mod riemann;
mod solution;

pub use conjugate::{concave_conjugate, velocity_grid, ConjugateTable};
pub use godunov::{godunov_solve, interface_flux, time_step, Boundary};
pub use lax_oleinik::{lax_oleinik_solve, lax_oleinik_solve_with, potential_at, LaxOleinikOptions};
pub use profile::Profile;
pub use riemann::{riemann_exact, RiemannSolution};
pub use solution::{cell_centers, Potential, SolutionField};
