//! Fourier symbols of the half-space gradient.
//!
//! For a kernel w and a unit direction ν the symbol is
//!
//! ```text
//! λ(ξ) = ∫_{z·ν ≥ 0} (z/|z|) w(z) (e^{2πiξ·z} − 1) dz
//! ```
//!
//! with ξ measured in cycles per unit length. In one dimension ν = ±1; in two
//! dimensions the integral is rotated to ν = e₁ and evaluated in polar
//! coordinates. [`symbol_eta`] gives the symbol of the unit-ball averaging
//! operator used by the compactness scans.

mod basis;
mod bounds;
mod radial;

pub use basis::{ortho_basis, first_row_formula, OrthoBasis};
pub use bounds::*;

use crate::kernels::{Kernel, KernelError};
use crate::quadrature::{graded_breaks, gl33};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("symbols are implemented for d = 1 and d = 2 only (got d = {0})")]
    UnsupportedDimension(usize),
    #[error("direction must be a unit vector of the kernel dimension")]
    InvalidDirection,
    #[error("frequency has the wrong dimension")]
    InvalidFrequency,
    #[error("first or higher moment near the origin diverges")]
    InfiniteMoment,
    #[error("tail mass is not summable")]
    TailNotSummable,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Value of a vector symbol at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSample {
    pub xi: Vec<f64>,
    pub value: Vec<Complex64>,
}

impl SymbolSample {
    pub fn re_part(&self) -> Vec<f64> {
        self.value.iter().map(|v| v.re).collect()
    }

    pub fn im_part(&self) -> Vec<f64> {
        self.value.iter().map(|v| v.im).collect()
    }

    /// Euclidean norm of the complex vector.
    pub fn norm(&self) -> f64 {
        self.value.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the real part.
    pub fn re_norm(&self) -> f64 {
        self.value.iter().map(|v| v.re * v.re).sum::<f64>().sqrt()
    }
}

pub(crate) fn check_direction(nu: &[f64], d: usize) -> Result<(), SymbolError> {
    if nu.len() != d {
        return Err(SymbolError::InvalidDirection);
    }
    let n: f64 = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(SymbolError::InvalidDirection);
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Angular panels on (−π/2, π/2) for a 2-D frequency whose polar angle in
/// the rotated frame is `phi`. Panels are split where ξ·θ̂ = 0 and graded
/// toward that angle; `cycles` sets the number of uniform panels.
fn angular_nodes(phi: f64, cycles: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * PI;
    let mut crit = None;
    for c in [phi - half, phi + half, phi - 1.5 * PI, phi + 1.5 * PI] {
        if c > -half + 1e-14 && c < half - 1e-14 {
            crit = Some(c);
        }
    }
    let mut segs = Vec::new();
    match crit {
        Some(c) => {
            segs.push((-half, c, false, true));
            segs.push((c, half, true, false));
        }
        None => {
            // zero crossings sit on the end points
            segs.push((-half, half, true, true));
        }
    }
    let rule = gl33();
    let mut out = Vec::new();
    for (a, b, ga, gb) in segs {
        let n = (cycles * (b - a) / PI).ceil().max(1.0) as usize;
        let step = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == n { b } else { lo + step };
            let graded = graded_breaks(lo, hi, ga && i == 0, gb && i + 1 == n, 12, 0.25);
            for w in graded.windows(2) {
                out.extend(rule.mapped(w[0], w[1]));
            }
        }
    }
    out
}

/// λ_w^ν(ξ).
pub fn symbol(kernel: &Kernel, nu: &[f64], xi: &[f64]) -> Result<SymbolSample, SymbolError> {
    let d = kernel.dim();
    if d > 2 {
        return Err(SymbolError::UnsupportedDimension(d));
    }
    check_direction(nu, d)?;
    if xi.len() != d {
        return Err(SymbolError::InvalidFrequency);
    }
    let value = if d == 1 {
        let s = nu[0];
        vec![radial::radial_transform(kernel, s * xi[0])? * s]
    } else {
        let (c, s) = (nu[0], nu[1]);
        // ξ' = R_νᵀ ξ
        let xr = [c * xi[0] + s * xi[1], -s * xi[0] + c * xi[1]];
        let mag = norm(&xr);
        if mag == 0.0 {
            vec![Complex64::new(0.0, 0.0); 2]
        } else {
            let phi = xr[1].atan2(xr[0]);
            let reach = kernel.support_radius().unwrap_or(1.0).max(1e-12);
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for (t, w) in angular_nodes(phi, 1.0 + 2.0 * mag * reach) {
                let (st, ct) = t.sin_cos();
                let j = radial::radial_transform(kernel, xr[0] * ct + xr[1] * st)?;
                acc[0] += j * (ct * w);
                acc[1] += j * (st * w);
            }
            vec![acc[0] * c - acc[1] * s, acc[0] * s + acc[1] * c]
        }
    };
    Ok(SymbolSample { xi: xi.to_vec(), value })
}

/// (e^{ix} − 1)/(ix) − 1 = ∫_0^1 (e^{ixz} − 1) dz.
fn eta_1d_core(x: f64) -> Complex64 {
    if x.abs() < 0.1 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..20 {
            term *= Complex64::new(0.0, x) / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        radial::expm1_i(x) / Complex64::new(0.0, x) - 1.0
    }
}

/// ∫_0^1 r (e^{ixr} − 1) dr.
fn eta_2d_core(x: f64) -> Complex64 {
    if x.abs() < 0.5 {
        let mut fact = 1.0;
        let mut pow = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..30 {
            fact *= n as f64;
            pow *= Complex64::new(0.0, x);
            sum += pow / (fact * (n as f64 + 2.0));
        }
        sum
    } else {
        let e = Complex64::new(0.0, x).exp();
        e / Complex64::new(0.0, x) + radial::expm1_i(x) / (x * x) - 0.5
    }
}

/// η_τ(ξ) = ∫_{H_ν∩B_1} (z/|z|)(e^{−2πiτξ·z} − 1) dz.
pub fn symbol_eta(tau: f64, nu: &[f64], xi: &[f64], d: usize) -> Result<Vec<Complex64>, SymbolError> {
    if !(tau > 0.0) {
        return Err(SymbolError::Domain(format!("tau must be positive, got {tau}")));
    }
    if d == 0 || d > 2 {
        return Err(SymbolError::UnsupportedDimension(d));
    }
    check_direction(nu, d)?;
    if xi.len() != d {
        return Err(SymbolError::InvalidFrequency);
    }
    if d == 1 {
        let s = nu[0];
        return Ok(vec![eta_1d_core(-2.0 * PI * s * tau * xi[0]) * s]);
    }
    let (c, s) = (nu[0], nu[1]);
    let xr = [c * xi[0] + s * xi[1], -s * xi[0] + c * xi[1]];
    let mag = norm(&xr);
    if mag == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); 2]);
    }
    let phi = xr[1].atan2(xr[0]);
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    for (t, w) in angular_nodes(phi, 1.0 + 2.0 * tau * mag) {
        let (st, ct) = t.sin_cos();
        let v = eta_2d_core(-2.0 * PI * tau * (xr[0] * ct + xr[1] * st));
        acc[0] += v * (ct * w);
        acc[1] += v * (st * w);
    }
    Ok(vec![acc[0] * c - acc[1] * s, acc[0] * s + acc[1] * c])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball2() -> Kernel {
        Kernel::constant_ball(1).unwrap().with_c_norm(2.0).unwrap()
    }

    #[test]
    fn constant_ball_examples() {
        let k = ball2();
        let v = symbol(&k, &[1.0], &[1.0]).unwrap().value[0];
        assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-10);
        let v = symbol(&k, &[1.0], &[0.5]).unwrap().value[0];
        assert!((v - Complex64::new(-2.0, 4.0 / PI)).norm() < 1e-10);
        assert_eq!(symbol(&k, &[1.0], &[0.0]).unwrap().value[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn reflection_in_one_dimension() {
        let k = Kernel::riesz_truncated(1, 0.5).unwrap();
        let p = symbol(&k, &[1.0], &[2.3]).unwrap().value[0];
        let m = symbol(&k, &[-1.0], &[2.3]).unwrap().value[0];
        assert!((m + p.conj()).norm() < 1e-14);
    }

    #[test]
    fn eta_examples() {
        let v = symbol_eta(0.1, &[1.0], &[5.0], 1).unwrap()[0];
        assert!((v - Complex64::new(-1.0, -2.0 / PI)).norm() < 1e-14);
        assert_eq!(symbol_eta(0.3, &[1.0], &[0.0], 1).unwrap()[0], Complex64::new(0.0, 0.0));
        // series and closed-form branches agree at the switch point
        assert!((eta_1d_core(0.0999999) - eta_1d_core(0.1000001)).norm() < 1e-7);
        assert!((eta_2d_core(0.4999999) - eta_2d_core(0.5000001)).norm() < 1e-7);
    }

    #[test]
    fn rejects_three_dimensions() {
        let k = Kernel::constant_ball(3).unwrap();
        assert!(matches!(symbol(&k, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), Err(SymbolError::UnsupportedDimension(3))));
    }
}
