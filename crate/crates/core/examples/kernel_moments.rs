//! Moments and standing-assumption checks for each kernel family.

use hsnl::kernels::Kernel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernels = [
        Kernel::constant_ball(1)?,
        Kernel::riesz_truncated(1, 0.5)?,
        Kernel::fractional_vanishing(1, 0.1)?,
        Kernel::log_regularized(1, 0.1)?,
        Kernel::log_truncated(1, 0.1)?,
        Kernel::min_level(Kernel::riesz_truncated(1, 0.5)?, 16.0)?,
    ];
    println!("{:<22} {:>12} {:>12} {:>9}", "family", "M1", "M2", "standing");
    for k in &kernels {
        let m = k.moments()?;
        let report = k.validate_assumptions();
        println!("{:<22} {:>12.6} {:>12.6} {:>9}", k.family_name(), m.m1, m.m2, report.standing_ok());
    }

    let normalized = Kernel::riesz_truncated(1, 0.5)?.normalize_first_moment()?;
    println!("\nnormalized riesz_truncated: first moment = {:.12}", normalized.first_moment()?);
    for (r, tail) in normalized.moments()?.tail_mass {
        println!("  tail mass beyond {r:<5}: {tail:.6e}");
    }
    Ok(())
}
