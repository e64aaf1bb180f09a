//! Asymptotic compatibility: the diagonal of a (δ, h) grid converges to the
//! local solution, and a level ladder converges to a fixed nonlocal limit.

use hsnl::experiments::{ac_local_sweep, ac_nonlocal_sweep, LadderKind, Reference, SweepConfig};
use hsnl::kernels::Kernel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Kernel::constant_ball(1)?.normalize_first_moment()?;
    let cfg = SweepConfig::local_standard(base, vec![0.2, 0.1, 0.05, 0.025], vec![16, 32, 64, 128]);
    let t = ac_local_sweep(&cfg)?;
    println!("local limit, diagonal:");
    for r in &t.diagonal {
        println!("  delta {:<6} h {:<10} error {:.6e}", r.param, r.h, r.error);
    }
    println!("  trend {}, order {:.3}", t.diagonal_trend(), t.order("diagonal").unwrap_or(f64::NAN));

    let limit = Kernel::riesz_truncated(1, 0.5)?;
    let mut cfg = SweepConfig::local_standard(limit.clone(), vec![4.0, 16.0, 64.0, 256.0], vec![128]);
    cfg.kind = LadderKind::Level;
    cfg.reference = Reference::FineNonlocalFem { kernel: limit, n_cells: 512 };
    let t = ac_nonlocal_sweep(&cfg)?;
    println!("nonlocal limit, h = 1/128:");
    for r in &t.rows {
        println!("  level {:<5} error {:.6e}", r.param, r.error);
    }
    Ok(())
}
