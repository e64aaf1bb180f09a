//! Periodic FFT gradient compared with the pointwise ray-integral operator.

use hsnl::kernels::Kernel;
use hsnl::operators::{gradient_pointwise, gradient_spectral, PeriodicGrid, PlaneWave, SampledField, TestFunction};
use hsnl::quadrature::QuadratureSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = Kernel::rescaled(Kernel::constant_ball(1)?.normalize_first_moment()?, 0.2)?;
    let grid = PeriodicGrid::new(4.0, 128, 1)?;
    let u = PlaneWave::new(vec![3.0], 4.0).with_phase(0.4);
    let out = gradient_spectral(&k, &[1.0], &SampledField::sample(grid.clone(), &u))?;
    println!("aliasing warning: {}, imaginary residue: {:.2e}", out.aliasing_warning, out.imag_residue);

    let spec = QuadratureSpec { rel: 1e-12, abs: 1e-13, ..Default::default() };
    let mut worst: f64 = 0.0;
    for idx in (0..grid.len()).step_by(16) {
        let x = grid.point(idx);
        let p = gradient_pointwise(&k, &[1.0], &u, &x, &spec)?[0];
        let s = out.field.components[0][idx];
        worst = worst.max((p - s).abs());
        println!("x = {:>6.3}  spectral {:+.10}  pointwise {:+.10}  local {:+.10}", x[0], s, p, u.gradient(&x)[0]);
    }
    println!("max difference: {worst:.3e}");
    Ok(())
}
