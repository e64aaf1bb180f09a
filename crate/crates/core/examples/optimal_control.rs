//! Box-constrained tracking problem with a nonlocal state equation, solved by
//! projected gradient, and its distance to the local optimum.

use hsnl::control::{p0_l2, solve_optimal, ControlProblem, StateModel};
use hsnl::fem1d::Mesh1D;
use hsnl::kernels::Kernel;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = Mesh1D::unit(32)?;
    let target = Arc::new(|x: f64| 0.5 * x * (1.0 - x));
    let local = ControlProblem::tracking(mesh, StateModel::Local, target, 0.0, 0.8, 1e-3);
    let reference = solve_optimal(&local, 1e-10, 20_000)?;
    println!("local: objective {:.6e}, iterations {}", reference.objective_value, reference.iterations);

    let base = Kernel::constant_ball(1)?.normalize_first_moment()?;
    for delta in [0.1, 0.05, 0.02] {
        let k = Kernel::rescaled(base.clone(), delta)?;
        let p = local.clone().with_model(StateModel::Nonlocal { kernel: k, nu: 1.0 });
        let t = solve_optimal(&p, 1e-10, 20_000)?;
        let active = t.g.iter().filter(|&&g| g >= 0.8 - 1e-12 || g <= 1e-12).count();
        println!(
            "delta {delta:<5} objective {:.6e} residual {:.1e} active cells {active:>2}  |g - g_local| {:.3e}",
            t.objective_value,
            t.residual,
            p0_l2(&mesh, &t.g, &reference.g)
        );
    }
    Ok(())
}
