//! One-dimensional radial transform
//!
//! ```text
//! J(κ) = ∫_0^∞ r^{d-1} w̄(r) (e^{2πiκr} − 1) dr
//! ```
//!
//! which is the whole symbol in d = 1 and the inner integral of the polar
//! representation in d = 2.

use super::SymbolError;
use crate::kernels::{Kernel, KernelError};
use crate::quadrature::gl16;
use num_complex::Complex64;
use std::f64::consts::PI;

/// e^{ix} − 1 without cancellation for small x.
pub(crate) fn expm1_i(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    Complex64::new(-2.0 * h * h, x.sin())
}

fn moment(k: &Kernel, a: f64, b: f64, j: u32) -> Result<f64, SymbolError> {
    let p = (k.dim() - 1) as f64 + j as f64;
    k.radial_integral(a, b, p).map_err(|e| match e {
        KernelError::InfiniteMass => SymbolError::InfiniteMoment,
        other => SymbolError::Kernel(other),
    })
}

/// Splits [a, b] so that every piece has width ≤ `width` and end ratio ≤ 2.
fn pieces(a: f64, b: f64, width: f64, out: &mut Vec<(f64, f64)>) {
    if b <= a {
        return;
    }
    // geometric split first so that the profile varies by bounded factors
    let mut edges = vec![a];
    let mut x = a;
    if a > 0.0 {
        while x * 2.0 < b {
            x *= 2.0;
            edges.push(x);
        }
    }
    edges.push(b);
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let step = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let lo = w[0] + i as f64 * step;
            let hi = if i + 1 == n { w[1] } else { lo + step };
            out.push((lo, hi));
        }
    }
}

fn panel_sum(k: &Kernel, omega: f64, panels: &[(f64, f64)]) -> Complex64 {
    let rule = gl16();
    let dm1 = (k.dim() - 1) as i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(a, b) in panels {
        for (r, w) in rule.mapped(a, b) {
            let g = r.powi(dm1) * k.profile(r);
            if g != 0.0 {
                acc += expm1_i(omega * r) * (g * w);
            }
        }
    }
    acc
}

/// J(κ) for the kernel's own dimension.
pub(crate) fn radial_transform(k: &Kernel, kappa: f64) -> Result<Complex64, SymbolError> {
    if kappa == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if kappa < 0.0 {
        return radial_transform(k, -kappa).map(|v| v.conj());
    }
    let omega = 2.0 * PI * kappa;
    let quarter = 0.25 / kappa;
    let bps: Vec<f64> = k.breakpoints().into_iter().filter(|&r| r > 0.0).collect();
    let support = k.support_radius();
    let mut z0 = quarter;
    if let Some(&b) = bps.first() {
        z0 = z0.min(b);
    }
    if let Some(s) = support {
        z0 = z0.min(s);
    }

    // (0, ε): Taylor expansion against exact moments.
    let levels = ((omega * z0 / 1e-5).log2().ceil().max(1.0)) as i32;
    let eps = z0 * 0.5f64.powi(levels);
    let m1 = moment(k, 0.0, eps, 1)?;
    let m2 = moment(k, 0.0, eps, 2)?;
    let m3 = moment(k, 0.0, eps, 3)?;
    let mut total = Complex64::new(-0.5 * omega * omega * m2, omega * m1 - omega.powi(3) * m3 / 6.0);

    // (ε, z0): geometric panels.
    let mut panels = Vec::new();
    let mut hi = z0;
    for _ in 0..levels {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    panels.reverse();

    // (z0, R_end): quarter-period panels split at kernel breakpoints.
    let r_end = match support {
        Some(s) => s,
        None => {
            let last = bps.last().copied().unwrap_or(0.0);
            last.max(1.0).max(z0)
        }
    };
    let mut edges = vec![z0];
    edges.extend(bps.iter().copied().filter(|&b| b > z0 && b < r_end));
    edges.push(r_end);
    for w in edges.windows(2) {
        pieces(w[0], w[1], quarter, &mut panels);
    }
    total += panel_sum(k, omega, &panels);

    if support.is_none() {
        let mass = moment(k, r_end, f64::INFINITY, 0).map_err(|e| match e {
            SymbolError::InfiniteMoment => SymbolError::TailNotSummable,
            other => other,
        })?;
        total += oscillatory_tail(k, omega, r_end) - mass;
    }
    Ok(total)
}

/// ∫_R^∞ r^{d-1} w̄(r) e^{iωr} dr for a monotone decaying tail, summed over
/// half periods with Euler (repeated averaging) acceleration.
fn oscillatory_tail(k: &Kernel, omega: f64, r0: f64) -> Complex64 {
    const TERMS: usize = 64;
    let half = PI / omega;
    let rule = gl16();
    let dm1 = (k.dim() - 1) as i32;
    let mut partial = Vec::with_capacity(TERMS);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..TERMS {
        let a = r0 + j as f64 * half;
        let b = a + half;
        let mut ps = Vec::new();
        pieces(a, b, half, &mut ps);
        let mut term = Complex64::new(0.0, 0.0);
        for (lo, hi) in ps {
            for (r, w) in rule.mapped(lo, hi) {
                let g = r.powi(dm1) * k.profile(r);
                term += Complex64::from_polar(g * w, omega * (r - r0));
            }
        }
        acc += term;
        partial.push(acc);
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect();
    }
    partial[0] * Complex64::from_polar(1.0, omega * r0)
}
