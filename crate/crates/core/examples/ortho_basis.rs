//! Orthonormal completion of a unit vector and its closed first row.

use hsnl::symbols::{first_row_formula, ortho_basis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = [0.5_f64, -0.3, 0.8];
    let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mu: Vec<f64> = raw.iter().map(|x| x / n).collect();
    let b = ortho_basis(&mu)?;
    for row in b.matrix() {
        println!("{}", row.iter().map(|v| format!("{v:+.10}")).collect::<Vec<_>>().join("  "));
    }
    println!("orthonormality defect: {:.3e}", b.orthonormality_defect());
    for k in 1..mu.len() {
        println!("v_{k}[0] = {:+.15}  formula = {:+.15}", b.columns[k - 1][0], first_row_formula(&mu, k));
    }
    Ok(())
}
