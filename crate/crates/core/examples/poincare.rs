//! Discrete Poincaré constants along a horizon ladder and for the local
//! stiffness, which tend to 1/π on the unit interval.

use hsnl::experiments::{local_poincare_sweep, poincare_sweep, LadderKind};
use hsnl::fem1d::Mesh1D;
use hsnl::kernels::Kernel;
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Kernel::constant_ball(1)?.normalize_first_moment()?;
    let mesh = Mesh1D::unit(256)?;
    let t = poincare_sweep(&base, LadderKind::Horizon, &[0.2, 0.1, 0.05, 0.025], 1.0, &mesh, 0.5)?;
    for r in &t.rows {
        println!("delta {:<6} C_P {:.6}  |C_P - 1/pi| {:.3e}", r.param, r.cp, (r.cp - 1.0 / PI).abs());
    }
    println!("uniform bound 0.5 holds: {}", t.pass);

    let local = local_poincare_sweep(1.0, &[16, 32, 64, 128], 1.0)?;
    for r in &local.rows {
        println!("local h {:<10} C_P {:.10}", r.h, r.cp);
    }
    Ok(())
}
