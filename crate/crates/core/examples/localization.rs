//! Convergence of the nonlocal gradient of a bump to its derivative as the
//! horizon shrinks.

use hsnl::kernels::Kernel;
use hsnl::operators::{localization_study, Bump, Norm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Kernel::constant_ball(1)?;
    let u = Bump::new(vec![0.0], 1.0);
    let deltas = [0.2, 0.1, 0.05, 0.025, 0.0125];
    for norm in [Norm::LInf, Norm::L2] {
        let t = localization_study(&base, 1.0, &u, &deltas, norm, 2001)?;
        println!("{norm:?}");
        for r in &t.rows {
            println!("  delta {:<7} error {:.6e}", r.param, r.error);
        }
        println!("  fitted rate {:.3}", t.order("delta").unwrap_or(f64::NAN));
    }
    Ok(())
}
