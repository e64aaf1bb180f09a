//! Oscillatory integrals of δz^{δ−2} as δ → 0: the sine integral tends to
//! 2π and the cosine integral to 0.

use hsnl::symbols::appendix_limit_table;
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = appendix_limit_table(&[1e-1, 1e-2, 1e-3, 1e-4])?;
    println!("{:>8} {:>16} {:>16} {:>16}", "delta", "sin", "sin - 2pi", "cos");
    for r in rows {
        println!("{:>8.0e} {:>16.10} {:>16.3e} {:>16.3e}", r.delta, r.sin_integral, r.sin_integral - 2.0 * PI, r.cos_integral);
    }
    Ok(())
}
