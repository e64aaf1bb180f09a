//! Fourier symbol of the half-space gradient and the inequality checks on
//! the standard frequency grids.

use hsnl::kernels::Kernel;
use hsnl::symbols::{
    check_cutoff_perturbation, check_eta_bound, check_hermitian, check_linear_bound, standard_grid_1d,
    standard_grid_2d, symbol,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = Kernel::constant_ball(1)?.normalize_first_moment()?;
    for xi in [0.01, 0.5, 1.0, 10.0] {
        let s = symbol(&k, &[1.0], &[xi])?;
        println!("lambda({xi:>5}) = {:+.12} {:+.12}i", s.value[0].re, s.value[0].im);
    }

    for d in [1, 2] {
        let k = Kernel::riesz_truncated(d, 0.5)?;
        let (grid, nu) = if d == 1 { (standard_grid_1d(), vec![1.0]) } else { (standard_grid_2d(), vec![0.6, 0.8]) };
        let reports = [
            check_linear_bound(&k, &nu, &grid)?,
            check_eta_bound(&[0.1, 0.01], &nu, &grid, d)?,
            check_cutoff_perturbation(&k, &nu, &grid)?,
            check_hermitian(&k, &nu, &grid)?,
        ];
        println!("\nd = {d}");
        for r in &reports {
            println!("  {:<22} margin {:>12.4e}  pass {}", r.name, r.margin, r.pass);
        }
    }
    Ok(())
}
