//! Half-space nonlocal gradient and divergence.
//!
//! ```text
//! G u(x) = ∫_{z·ν≥0} (z/|z|) (u(x+z) − u(x)) w(z) dz
//! D v(x) = ∫_{z·ν≥0} (z/|z|)·(v(x+z) − v(x)) w(z) dz
//! ```
//!
//! Pointwise evaluation integrates the difference form along rays, which is
//! absolutely convergent for Lipschitz inputs when ∫_{B_1}|z|w < ∞. The
//! spectral path multiplies Fourier modes of a periodic sample by the symbol.

mod fields;
mod spectral;

pub use fields::{Affine, Bump, FnField, PlaneWave, Support, TestFunction};
pub use spectral::{gradient_spectral, PeriodicGrid, SampledField, SpectralOutput};

use crate::experiments::{estimate_rate, RateRow, RateTable};
use crate::kernels::{Kernel, KernelError};
use crate::quadrature::{adaptive, gl33, QuadratureError, QuadratureSpec};
use crate::symbols::SymbolError;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("a Lipschitz constant is required for kernels that are not integrable at the origin")]
    MissingLipschitz,
    #[error("the first moment of the kernel near the origin diverges")]
    InfiniteMoment,
    #[error("neither the input nor the kernel has bounded support")]
    UnboundedIntegration,
    #[error("kernel tail is not summable")]
    TailNotSummable,
    #[error("spectral output has an imaginary residue {0:e}")]
    ComplexResidue(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn moment_err(e: KernelError) -> OperatorError {
    match e {
        KernelError::InfiniteMass => OperatorError::InfiniteMoment,
        other => OperatorError::Kernel(other),
    }
}

fn check_nu(nu: &[f64], d: usize) -> Result<(), OperatorError> {
    crate::symbols::check_direction(nu, d).map_err(OperatorError::from)
}

/// ∫_0^∞ (u(x + r e) − u(x)) r^{d−1} w̄(r) dr along the unit direction `e`.
fn ray_integral(kernel: &Kernel, u: &dyn TestFunction, x: &[f64], e: &[f64], spec: &QuadratureSpec) -> Result<f64, OperatorError> {
    let d = kernel.dim();
    let p = (d - 1) as f64;
    let ux = u.value(x);
    let at = |r: f64| -> Vec<f64> { x.iter().zip(e).map(|(a, b)| a + r * b).collect() };

    // Where the ray leaves the support of u, and the breakpoints it crosses.
    let mut breaks = Vec::new();
    let exit = match u.support() {
        Support::Ball { center, radius } => {
            let xc: Vec<f64> = x.iter().zip(&center).map(|(a, b)| a - b).collect();
            let b: f64 = e.iter().zip(&xc).map(|(a, c)| a * c).sum();
            let c: f64 = xc.iter().map(|v| v * v).sum::<f64>() - radius * radius;
            let disc = b * b - c;
            if disc <= 0.0 {
                0.0
            } else {
                let s = disc.sqrt();
                let (r1, r2) = (-b - s, -b + s);
                if r1 > 0.0 {
                    breaks.push(r1);
                }
                r2.max(0.0)
            }
        }
        Support::Unbounded => f64::INFINITY,
    };
    let reach = kernel.support_radius().unwrap_or(f64::INFINITY);
    let end = exit.min(reach);
    if end.is_infinite() {
        return Err(OperatorError::UnboundedIntegration);
    }
    let mut total = 0.0;
    if exit < reach && ux != 0.0 {
        let tail = kernel.radial_integral(exit, f64::INFINITY, p).map_err(|e| match e {
            KernelError::InfiniteMass => OperatorError::TailNotSummable,
            other => OperatorError::Kernel(other),
        })?;
        total -= ux * tail;
    }
    if end <= 0.0 {
        return Ok(total);
    }
    breaks.extend(kernel.breakpoints());
    breaks.extend(u.kinks_along(x, e));
    breaks.push(1.0);
    breaks.retain(|&b| b > 0.0 && b < end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let first = breaks.first().copied().unwrap_or(end).min(1.0).min(end);

    let integrand = |r: f64| (u.value(&at(r)) - ux) * r.powf(p) * kernel.profile(r);
    // u(x + re) − u(x) carries rounding of order ε(|u(x)| + |u(x + re)|).
    let panel = |a: f64, b: f64, lip: f64| -> Result<f64, OperatorError> {
        let mass = kernel.radial_integral(a, b, p).unwrap_or(0.0);
        let noise = 64.0 * f64::EPSILON * (2.0 * ux.abs() + lip * b) * mass;
        let local = QuadratureSpec { abs: spec.abs.max(noise), ..*spec };
        Ok(adaptive(&integrand, a, b, &[], &local)?.value)
    };

    // Near the origin: geometric panels, then a first-order remainder whose
    // slope is the one-sided difference over the innermost panel.
    let singular = kernel.radial_integral(0.0, first, p).is_err();
    let lip = match u.lipschitz() {
        Some(l) => l,
        None if singular => return Err(OperatorError::MissingLipschitz),
        None => 0.0,
    };
    // below this radius x + r e is dominated by rounding
    let floor = 1e-7 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut lo = first;
    let mut levels = 0;
    loop {
        let m1 = kernel.radial_integral(0.0, lo, p + 1.0).map_err(moment_err)?;
        if (lip * m1 <= 1e-3 * spec.abs && levels >= 4) || lo <= floor || m1 == 0.0 {
            let slope = (u.value(&at(lo)) - ux) / lo;
            total += slope * m1;
            break;
        }
        let a = 0.5 * lo;
        total += panel(a, lo, lip)?;
        lo = a;
        levels += 1;
    }
    let mut edges = vec![first];
    edges.extend(breaks.iter().copied().filter(|&b| b > first));
    edges.push(end);
    edges.dedup();
    for w in edges.windows(2) {
        total += panel(w[0], w[1], lip)?;
    }
    Ok(total)
}

fn angular_rule(nu: &[f64]) -> Vec<(f64, f64)> {
    let phi = nu[1].atan2(nu[0]);
    let rule = gl33();
    let mut out = Vec::new();
    let panels = 8;
    let step = PI / panels as f64;
    for i in 0..panels {
        let a = phi - 0.5 * PI + i as f64 * step;
        out.extend(rule.mapped(a, a + step));
    }
    out
}

/// G_w^ν u(x).
pub fn gradient_pointwise(
    kernel: &Kernel,
    nu: &[f64],
    u: &dyn TestFunction,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<f64>, OperatorError> {
    let d = kernel.dim();
    if d > 2 {
        return Err(OperatorError::InvalidInput(format!("pointwise operators support d = 1, 2 (got {d})")));
    }
    check_nu(nu, d)?;
    if u.dim() != d || x.len() != d {
        return Err(OperatorError::InvalidInput("dimension mismatch between kernel, field and point".into()));
    }
    if d == 1 {
        return Ok(vec![nu[0] * ray_integral(kernel, u, x, nu, spec)?]);
    }
    let mut acc = [0.0; 2];
    for (t, w) in angular_rule(nu) {
        let e = [t.cos(), t.sin()];
        let v = ray_integral(kernel, u, x, &e, spec)?;
        acc[0] += w * e[0] * v;
        acc[1] += w * e[1] * v;
    }
    Ok(acc.to_vec())
}

/// D_w^ν v(x) for a vector field given by its components.
pub fn divergence_pointwise(
    kernel: &Kernel,
    nu: &[f64],
    v: &[&dyn TestFunction],
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64, OperatorError> {
    if v.len() != kernel.dim() {
        return Err(OperatorError::InvalidInput("vector field must have d components".into()));
    }
    let mut total = 0.0;
    for (j, comp) in v.iter().enumerate() {
        total += gradient_pointwise(kernel, nu, *comp, x, spec)?[j];
    }
    Ok(total)
}

/// ∫_{H_ν} |z| w(z) (z/|z| ⊗ z/|z|) dz.
pub fn half_space_moment_tensor(kernel: &Kernel, nu: &[f64]) -> Result<Vec<Vec<f64>>, OperatorError> {
    let d = kernel.dim();
    check_nu(nu, d)?;
    let radial = kernel.radial_integral(0.0, f64::INFINITY, d as f64).map_err(moment_err)?;
    if d == 1 {
        return Ok(vec![vec![radial]]);
    }
    if d != 2 {
        return Err(OperatorError::InvalidInput("tensor implemented for d = 1, 2".into()));
    }
    let mut m = vec![vec![0.0; 2]; 2];
    for (t, w) in angular_rule(nu) {
        let e = [t.cos(), t.sin()];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += w * e[i] * e[j] * radial;
            }
        }
    }
    Ok(m)
}

/// Norm used by the localization study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    LInf,
}

/// ‖G_δ u − u′‖_p for the rescaled family w_δ = rescaled(normalized base, δ)
/// on a uniform sampling grid covering the support of G_δ u (d = 1).
pub fn localization_study(
    base: &Kernel,
    nu: f64,
    u: &dyn TestFunction,
    deltas: &[f64],
    norm: Norm,
    samples: usize,
) -> Result<RateTable, OperatorError> {
    if base.dim() != 1 || u.dim() != 1 {
        return Err(OperatorError::InvalidInput("localization study is one-dimensional".into()));
    }
    let base = base.normalize_first_moment()?;
    let (c, rho) = match u.support() {
        Support::Ball { center, radius } => (center[0], radius),
        Support::Unbounded => return Err(OperatorError::UnboundedIntegration),
    };
    let reach = base.support_radius().unwrap_or(1.0);
    let spec = QuadratureSpec { rel: 1e-11, abs: 1e-13, max_panels: 1 << 12 };
    let mut rows = Vec::new();
    for &dl in deltas {
        let k = Kernel::rescaled(base.clone(), dl)?;
        let lo = c - rho - dl * reach;
        let hi = c + rho + dl * reach;
        let h = (hi - lo) / (samples - 1) as f64;
        let errs: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let x = [lo + i as f64 * h];
                let g = gradient_pointwise(&k, &[nu], u, &x, &spec)?[0];
                Ok((g - u.gradient(&x)[0]).abs())
            })
            .collect::<Result<_, OperatorError>>()?;
        let err = match norm {
            Norm::LInf => errs.iter().copied().fold(0.0, f64::max),
            Norm::L2 => (h * errs.iter().map(|e| e * e).sum::<f64>()).sqrt(),
        };
        rows.push(RateRow { param: dl, h, error: err });
    }
    let params: Vec<f64> = rows.iter().map(|r| r.param).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let order = estimate_rate(&errors, &params);
    Ok(RateTable { rows, diagonal: vec![], orders: vec![("delta".into(), order)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel: 1e-12, abs: 1e-14, max_panels: 1 << 12 }
    }

    #[test]
    fn linear_input_gives_slope() {
        let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
        let u = Affine::new(vec![1.0], 0.0);
        let g = gradient_pointwise(&k, &[1.0], &u, &[0.3], &spec()).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        let g = gradient_pointwise(&k, &[-1.0], &u, &[0.3], &spec()).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_input_gives_zero() {
        let k = Kernel::riesz_truncated(1, 0.5).unwrap();
        let u = Affine::new(vec![0.0], 3.0);
        assert_eq!(gradient_pointwise(&k, &[1.0], &u, &[0.0], &spec()).unwrap()[0], 0.0);
    }

    #[test]
    fn bump_close_to_derivative_for_small_horizon() {
        let base = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
        let k = Kernel::rescaled(base, 0.05).unwrap();
        let u = Bump::new(vec![0.0], 1.0);
        let g = gradient_pointwise(&k, &[1.0], &u, &[0.3], &spec()).unwrap()[0];
        // |G u − u′| ≤ ½ sup|u″| ∫_0^δ t² w_δ = sup|u″| δ/3
        assert!((g - (-1.092)).abs() <= 4.0 * 0.05 / 3.0, "{g}");
    }

    #[test]
    fn missing_lipschitz_is_rejected_for_singular_kernels() {
        let k = Kernel::riesz_truncated(1, 0.5).unwrap();
        let u = FnField::new(1, |x: &[f64]| x[0].sin(), |x: &[f64]| vec![x[0].cos()], None, Support::Unbounded);
        assert_eq!(gradient_pointwise(&k, &[1.0], &u, &[0.0], &spec()), Err(OperatorError::MissingLipschitz));
    }

    #[test]
    fn radial_identity_tensor() {
        let base = Kernel::riesz_truncated(2, 0.4).unwrap().normalize_first_moment().unwrap();
        for nu in [[1.0, 0.0], [0.6, -0.8]] {
            let m = half_space_moment_tensor(&base, &nu).unwrap();
            let target = base.first_moment().unwrap() / 4.0;
            assert!((m[0][0] - target).abs() < 1e-8 && (m[1][1] - target).abs() < 1e-8);
            assert!(m[0][1].abs() < 1e-8);
        }
    }
}
