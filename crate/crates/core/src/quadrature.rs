//! Gauss–Legendre rules, adaptive Gauss–Kronrod integration and panel helpers.
//!
//! Everything here is generic over [`Scalar`], so the same routines integrate
//! real and complex valued integrands.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Values that quadrature can accumulate.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Tolerances for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-10, max_panels: 1 << 14 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature hit the panel limit ({panels}) with error estimate {error:e}")]
    PanelLimit { panels: usize, error: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// A Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the n-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + r * x) * (w * r);
        }
        acc
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + r * x, w * r))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn gl8() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(8))
}

pub fn gl16() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(16))
}

pub fn gl33() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(33))
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Returns (value, error estimate, roundoff floor 50ε∫|f|).
fn kronrod15<T: Scalar>(a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> Result<(T, f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let eval = |f: &mut dyn FnMut(f64) -> T, x: f64| -> Result<T, QuadratureError> {
        let v = f(x);
        if v.magnitude().is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };
    let fc = eval(f, c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut mag = fc.magnitude() * WGK[7];
    for j in 0..7 {
        let dx = r * XGK[j];
        let (lo, hi) = (eval(f, c - dx)?, eval(f, c + dx)?);
        mag += (lo.magnitude() + hi.magnitude()) * WGK[j];
        let s = lo + hi;
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * r;
    let g = g * r;
    let err = (k - g).magnitude();
    Ok((k, err, 50.0 * f64::EPSILON * mag * r.abs()))
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    floor: f64,
    order: usize,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err && self.order == o.order
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err).then(o.order.cmp(&self.order))
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over [a, b], starting
/// from the given breakpoints (which must lie inside [a, b]).
pub fn adaptive<T: Scalar>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate<T>, QuadratureError> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, panels: 0 });
    }
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut counter = 0usize;
    let mut total = T::zero();
    let mut err = 0.0;
    let mut floor = 0.0;
    for w in pts.windows(2) {
        let (v, e, fl) = kronrod15(w[0], w[1], &mut f)?;
        total = total + v;
        err += e;
        floor += fl;
        heap.push(Piece { a: w[0], b: w[1], value: v, err: e, floor: fl, order: counter });
        counter += 1;
    }
    loop {
        // Estimates below the roundoff floor cannot be improved by splitting.
        if err <= spec.abs.max(spec.rel * total.magnitude()).max(floor) {
            let (total, err) = sum_pieces(&heap);
            return Ok(Estimate { value: total, error: err, panels: heap.len() });
        }
        if heap.len() >= spec.max_panels {
            return Err(QuadratureError::PanelLimit { panels: heap.len(), error: err });
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b || worst.err == 0.0 {
            // Cannot split further; accept as is.
            err -= worst.err;
            heap.push(Piece { err: 0.0, ..worst });
            if err <= 0.0 || heap.iter().all(|p| p.err == 0.0) {
                let (total, err) = sum_pieces(&heap);
                return Ok(Estimate { value: total, error: err, panels: heap.len() });
            }
            continue;
        }
        let (v1, e1, f1) = kronrod15(worst.a, m, &mut f)?;
        let (v2, e2, f2) = kronrod15(m, worst.b, &mut f)?;
        total = total - worst.value + v1 + v2;
        err = err - worst.err + e1 + e2;
        floor = floor - worst.floor + f1 + f2;
        heap.push(Piece { a: worst.a, b: m, value: v1, err: e1, floor: f1, order: counter });
        heap.push(Piece { a: m, b: worst.b, value: v2, err: e2, floor: f2, order: counter + 1 });
        counter += 2;
    }
}

fn sum_pieces<T: Scalar>(heap: &BinaryHeap<Piece<T>>) -> (T, f64) {
    // Sum in interval order so results do not depend on heap layout.
    let mut v: Vec<&Piece<T>> = heap.iter().collect();
    v.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = T::zero();
    let mut err = 0.0;
    for p in v {
        total = total + p.value;
        err += p.err;
    }
    (total, err)
}

/// Breakpoints splitting [a, b] geometrically toward one or both ends.
///
/// `layers` panels of ratio `sigma` are placed next to each graded end, so the
/// smallest panel has width `sigma^layers` times the half-width.
pub fn graded_breaks(a: f64, b: f64, toward_a: bool, toward_b: bool, layers: usize, sigma: f64) -> Vec<f64> {
    let mut out = vec![a];
    match (toward_a, toward_b) {
        (false, false) => {}
        (true, false) => {
            let w = b - a;
            for k in (1..=layers).rev() {
                out.push(a + w * sigma.powi(k as i32));
            }
        }
        (false, true) => {
            let w = b - a;
            for k in 1..=layers {
                out.push(b - w * sigma.powi(k as i32));
            }
        }
        (true, true) => {
            let m = 0.5 * (a + b);
            let w = m - a;
            for k in (1..=layers).rev() {
                out.push(a + w * sigma.powi(k as i32));
            }
            out.push(m);
            for k in 1..=layers {
                out.push(b - w * sigma.powi(k as i32));
            }
        }
    }
    out.push(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for &n in &[8usize, 16, 33] {
            let r = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let v: f64 = r.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-12 * exact, "n={n}");
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let spec = QuadratureSpec { rel: 1e-12, abs: 1e-14, max_panels: 4000 };
        let e = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, &[], &spec).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        let spec = QuadratureSpec { rel: 1e-12, abs: 1e-14, max_panels: 4000 };
        let w = 40.0;
        let e = adaptive(|x: f64| Complex64::new(0.0, w * x).exp(), 0.0, 1.0, &[], &spec).unwrap();
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((e.value - exact).norm() < 1e-12);
    }

    #[test]
    fn graded_breaks_are_sorted() {
        for (ta, tb) in [(true, false), (false, true), (true, true), (false, false)] {
            let v = graded_breaks(1.0, 2.0, ta, tb, 5, 0.25);
            assert!(v.windows(2).all(|w| w[0] < w[1]), "{ta} {tb} {v:?}");
            assert_eq!(v[0], 1.0);
            assert_eq!(*v.last().unwrap(), 2.0);
        }
    }
}
