//! Nonlocal P1 Galerkin solve on (0, 1) next to the local solution.

use hsnl::fem1d::{assemble, assemble_local, solve_state, Coefficient, Mesh1D};
use hsnl::kernels::Kernel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = Mesh1D::unit(32)?;
    let f = |_: f64| 1.0;
    let a = Coefficient::function(|x| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).sin());
    let k = Kernel::rescaled(Kernel::constant_ball(1)?.normalize_first_moment()?, 0.05)?;

    let nonlocal = assemble(&k, 1.0, &a, &f, &mesh)?;
    let local = assemble_local(&a, &f, &mesh)?;
    let un = solve_state(&nonlocal)?;
    let ul = solve_state(&local)?;
    println!("galerkin residual: {:.2e}", nonlocal.galerkin_residual(&un));
    println!("{:>8} {:>14} {:>14}", "x", "nonlocal", "local");
    for i in (4..mesh.n_cells).step_by(4) {
        println!("{:>8.4} {:>14.8} {:>14.8}", mesh.node(i), un[i - 1], ul[i - 1]);
    }
    Ok(())
}
