//! Radial kernel families and their moments.
//!
//! A kernel is stored as a radial profile w̄(r) in dimension `d`, so that
//! w(z) = w̄(|z|). Moments are reported over full balls and annuli in R^d:
//!
//! ```text
//! partial_moment(a, b, k) = ∫_{a<|z|<b} |z|^k w(z) dz = ω_{d-1} ∫_a^b r^{d-1+k} w̄(r) dr
//! ```
//!
//! where ω_{d-1} is the surface measure of the unit sphere (2, 2π, 4π for
//! d = 1, 2, 3). Power-law and constant families use closed forms; the rest
//! use closed forms of their parts or adaptive quadrature in log r.

use crate::quadrature::{adaptive, QuadratureError, QuadratureSpec};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integral diverges (infinite mass)")]
    InfiniteMass,
    #[error("radius {0} is outside the tabulated range; extrapolation is not allowed")]
    Extrapolation(f64),
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Kernel family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// χ_{r≤1}
    ConstantBall,
    /// r^{-d-s} χ_{r<1}
    RieszTruncated { s: f64 },
    /// 2dδ r^{δ-d-1}
    FractionalVanishing { delta: f64 },
    /// |log δ|^{-1} r^{-1} (r+δ)^{-d}
    LogRegularized { delta: f64 },
    /// (2d/ω_{d-1}) |log δ|^{-1} r^{-d-1} χ_{δ<r<1}
    LogTruncated { delta: f64 },
    /// min{n, w_base}
    MinLevel { level: f64, base: Box<Kernel> },
    /// δ^{-d-1} w_base(r/δ)
    Rescaled { delta: f64, base: Box<Kernel> },
    /// w_base χ_{r<R}
    Cutoff { radius: f64, base: Box<Kernel> },
    /// Linear interpolation in log r between samples; zero outside the table.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// A radial kernel: family, dimension and normalization scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: Family,
    d: usize,
    c_norm: f64,
}

/// Surface measure ω_{d-1} of the unit sphere in R^d.
pub fn sphere_measure(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            // 2π^{d/2}/Γ(d/2) via the recursion ω_{d+1} = 2π ω_{d-1} / (d-1)
            let mut w = if d % 2 == 0 { 2.0 * PI } else { 2.0 };
            let mut k = if d % 2 == 0 { 2 } else { 1 };
            while k < d {
                w *= 2.0 * PI / k as f64;
                k += 2;
            }
            w
        }
    }
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(d: usize) -> f64 {
    sphere_measure(d) / d as f64
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(KernelError::InvalidParameter(format!("{name} must lie in (0,1), got {v}")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(KernelError::InvalidParameter(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

/// ∫_a^b r^e dr, allowing b = ∞.
fn power_integral(a: f64, b: f64, e: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    if a == 0.0 && e <= -1.0 {
        return Err(KernelError::InfiniteMass);
    }
    if b.is_infinite() {
        if e >= -1.0 {
            return Err(KernelError::InfiniteMass);
        }
        return Ok(-a.powf(e + 1.0) / (e + 1.0));
    }
    if e == -1.0 {
        return Ok((b / a).ln());
    }
    Ok((b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0))
}

fn log_quad_spec() -> QuadratureSpec {
    QuadratureSpec { rel: 1e-14, abs: 0.0, max_panels: 1 << 12 }
}

impl Kernel {
    fn new(family: Family, d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { family, d, c_norm: 1.0 })
    }

    pub fn constant_ball(d: usize) -> Result<Self> {
        Self::new(Family::ConstantBall, d)
    }

    pub fn riesz_truncated(d: usize, s: f64) -> Result<Self> {
        check_unit_open("s", s)?;
        Self::new(Family::RieszTruncated { s }, d)
    }

    pub fn fractional_vanishing(d: usize, delta: f64) -> Result<Self> {
        check_unit_open("delta", delta)?;
        Self::new(Family::FractionalVanishing { delta }, d)
    }

    pub fn log_regularized(d: usize, delta: f64) -> Result<Self> {
        check_unit_open("delta", delta)?;
        Self::new(Family::LogRegularized { delta }, d)
    }

    pub fn log_truncated(d: usize, delta: f64) -> Result<Self> {
        check_unit_open("delta", delta)?;
        Self::new(Family::LogTruncated { delta }, d)
    }

    pub fn min_level(base: Kernel, level: f64) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(KernelError::InvalidParameter(format!("level must be positive, got {level}")));
        }
        let d = base.d;
        Self::new(Family::MinLevel { level, base: Box::new(base) }, d)
    }

    pub fn rescaled(base: Kernel, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(KernelError::InvalidParameter(format!("scale must be positive, got {delta}")));
        }
        let d = base.d;
        Self::new(Family::Rescaled { delta, base: Box::new(base) }, d)
    }

    pub fn cutoff(base: Kernel, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(KernelError::InvalidParameter(format!("cutoff radius must be positive, got {radius}")));
        }
        let d = base.d;
        Self::new(Family::Cutoff { radius, base: Box::new(base) }, d)
    }

    /// Tabulated profile. Radii must be positive and strictly increasing.
    /// Sign of the values is not checked here; see [`Kernel::validate_assumptions`].
    pub fn tabulated(d: usize, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(KernelError::InvalidParameter("need at least two (r, w) samples of equal length".into()));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KernelError::InvalidParameter("tabulated radii must be positive and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::InvalidParameter("tabulated values must be finite".into()));
        }
        Self::new(Family::Tabulated { radii, values }, d)
    }

    /// Returns a copy with the normalization scalar replaced.
    pub fn with_c_norm(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(KernelError::InvalidParameter(format!("c_norm must be positive, got {c}")));
        }
        Ok(Self { c_norm: c, ..self.clone() })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::ConstantBall => "constant_ball",
            Family::RieszTruncated { .. } => "riesz_truncated",
            Family::FractionalVanishing { .. } => "fractional_vanishing",
            Family::LogRegularized { .. } => "log_regularized",
            Family::LogTruncated { .. } => "log_truncated",
            Family::MinLevel { .. } => "min_level",
            Family::Rescaled { .. } => "rescaled",
            Family::Cutoff { .. } => "cutoff",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    /// Radial profile w̄(r) for r > 0.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(KernelError::NonPositiveRadius(r));
        }
        if let Family::Tabulated { radii, .. } = &self.family {
            if r < radii[0] || r > *radii.last().unwrap() {
                return Err(KernelError::Extrapolation(r));
            }
        }
        Ok(self.profile(r))
    }

    /// Profile without argument checks; zero outside the support.
    pub fn profile(&self, r: f64) -> f64 {
        let d = self.d as f64;
        let raw = match &self.family {
            Family::ConstantBall => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::RieszTruncated { s } => {
                if r < 1.0 {
                    r.powf(-d - s)
                } else {
                    0.0
                }
            }
            Family::FractionalVanishing { delta } => 2.0 * d * delta * r.powf(delta - d - 1.0),
            Family::LogRegularized { delta } => (r * (r + delta).powf(d)).recip() / delta.ln().abs(),
            Family::LogTruncated { delta } => {
                if r > *delta && r < 1.0 {
                    2.0 * d / sphere_measure(self.d) / delta.ln().abs() * r.powf(-d - 1.0)
                } else {
                    0.0
                }
            }
            Family::MinLevel { level, base } => level.min(base.profile(r)),
            Family::Rescaled { delta, base } => delta.powf(-d - 1.0) * base.profile(r / delta),
            Family::Cutoff { radius, base } => {
                if r < *radius {
                    base.profile(r)
                } else {
                    0.0
                }
            }
            Family::Tabulated { radii, values } => tabulated_value(radii, values, r),
        };
        self.c_norm * raw
    }

    /// Radius beyond which the kernel vanishes, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.family {
            Family::ConstantBall | Family::RieszTruncated { .. } | Family::LogTruncated { .. } => Some(1.0),
            Family::FractionalVanishing { .. } | Family::LogRegularized { .. } => None,
            Family::MinLevel { base, .. } => base.support_radius(),
            Family::Rescaled { delta, base } => base.support_radius().map(|r| r * delta),
            Family::Cutoff { radius, base } => Some(base.support_radius().map_or(*radius, |r| r.min(*radius))),
            Family::Tabulated { radii, .. } => Some(*radii.last().unwrap()),
        }
    }

    /// Radii where the profile is not smooth (jumps, kinks, table nodes), sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match &self.family {
            Family::ConstantBall | Family::RieszTruncated { .. } => vec![1.0],
            Family::FractionalVanishing { .. } | Family::LogRegularized { .. } => vec![],
            Family::LogTruncated { delta } => vec![*delta, 1.0],
            Family::MinLevel { level, base } => {
                let mut b = base.breakpoints();
                if let Some(rc) = self.crossover(*level, base) {
                    if rc > 0.0 {
                        b.push(rc);
                    }
                }
                b
            }
            Family::Rescaled { delta, base } => base.breakpoints().into_iter().map(|r| r * delta).collect(),
            Family::Cutoff { radius, base } => {
                let mut b: Vec<f64> = base.breakpoints().into_iter().filter(|r| r < radius).collect();
                b.push(*radius);
                b
            }
            Family::Tabulated { radii, .. } => radii.clone(),
        };
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Whether the profile is declared nonincreasing on (0, ∞).
    pub fn is_monotone(&self) -> bool {
        match &self.family {
            Family::Tabulated { values, .. } => values.windows(2).all(|w| w[1] <= w[0]) && values[0] >= 0.0,
            Family::MinLevel { base, .. } | Family::Rescaled { base, .. } | Family::Cutoff { base, .. } => {
                base.is_monotone()
            }
            Family::LogTruncated { .. } => false,
            _ => true,
        }
    }

    /// Largest r with base(r) ≥ level for a nonincreasing base; None if the
    /// base is not monotone.
    fn crossover(&self, level: f64, base: &Kernel) -> Option<f64> {
        if !base.is_monotone() {
            return None;
        }
        let f = |r: f64| base.profile(r) >= level;
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        if f(1.0) {
            while f(hi) {
                hi *= 2.0;
                if hi > 1e300 {
                    return Some(f64::INFINITY);
                }
            }
            lo = hi / 2.0;
        } else {
            while !f(lo) {
                lo /= 2.0;
                if lo < 1e-300 {
                    return Some(0.0);
                }
            }
            hi = lo * 2.0;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if f(m) {
                lo = m;
            } else {
                hi = m;
            }
        }
        Some(lo)
    }

    /// ∫_a^b r^p w̄(r) dr (one-dimensional radial integral).
    pub fn radial_integral(&self, a: f64, b: f64, p: f64) -> Result<f64> {
        if !(a >= 0.0) || b.is_nan() {
            return Err(KernelError::InvalidParameter(format!("invalid interval ({a}, {b})")));
        }
        if b <= a {
            return Ok(0.0);
        }
        let d = self.d as f64;
        let c = self.c_norm;
        let v = match &self.family {
            Family::ConstantBall => power_integral(a, b.min(1.0), p)?,
            Family::RieszTruncated { s } => power_integral(a, b.min(1.0), p - d - s)?,
            Family::FractionalVanishing { delta } => 2.0 * d * delta * power_integral(a, b, p + delta - d - 1.0)?,
            Family::LogTruncated { delta } => {
                2.0 * d / sphere_measure(self.d) / delta.ln().abs()
                    * power_integral(a.max(*delta), b.min(1.0), p - d - 1.0)?
            }
            Family::LogRegularized { delta } => self.log_regularized_integral(*delta, a, b, p)? / delta.ln().abs(),
            Family::MinLevel { level, base } => match self.crossover(*level, base) {
                Some(rc) => {
                    let inner = if a < rc { level * power_integral(a, b.min(rc), p)? } else { 0.0 };
                    let outer = if b > rc { base.radial_integral(a.max(rc), b, p)? } else { 0.0 };
                    inner + outer
                }
                None => self.log_quadrature(a, b, p, &base.breakpoints())? / c,
            },
            Family::Rescaled { delta, base } => delta.powf(p - d) * base.radial_integral(a / delta, b / delta, p)?,
            Family::Cutoff { radius, base } => base.radial_integral(a, b.min(*radius), p)?,
            Family::Tabulated { radii, values } => tabulated_integral(radii, values, a, b, p),
        };
        Ok(c * v)
    }

    fn log_regularized_integral(&self, delta: f64, a: f64, b: f64, p: f64) -> Result<f64> {
        // Integrand r^{p-1} (r+δ)^{-d}; behaves like r^{p-1} δ^{-d} near 0 and r^{p-1-d} at ∞.
        let d = self.d as f64;
        let f = |r: f64| r.powf(p - 1.0) * (r + delta).powf(-d);
        let r0 = delta * 1e-9;
        let r1 = delta * 1e9;
        let mut total = 0.0;
        if a < r0 {
            if p <= 0.0 {
                return Err(KernelError::InfiniteMass);
            }
            let hi = b.min(r0);
            let g = |x: f64| delta.powf(-d) * (x.powf(p) / p - d * x.powf(p + 1.0) / ((p + 1.0) * delta));
            total += g(hi) - g(a);
        }
        if b > r1 {
            if p >= d {
                return Err(KernelError::InfiniteMass);
            }
            let lo = a.max(r1);
            let g = |x: f64| {
                if x.is_infinite() {
                    0.0
                } else {
                    -x.powf(p - d) / (d - p) + d * delta * x.powf(p - d - 1.0) / (d + 1.0 - p)
                }
            };
            total += g(b) - g(lo);
        }
        let lo = a.max(r0);
        let hi = b.min(r1);
        if hi > lo {
            let ta = lo.ln();
            let tb = hi.ln();
            let breaks = [delta.ln()];
            let e = adaptive(|t: f64| { let r = t.exp(); r * f(r) }, ta, tb, &breaks, &log_quad_spec())?;
            total += e.value;
        }
        Ok(total)
    }

    fn log_quadrature(&self, a: f64, b: f64, p: f64, breaks: &[f64]) -> Result<f64> {
        let lo = a.max(1e-12);
        let hi = match self.support_radius() {
            Some(r) => b.min(r),
            None => b.min(1e12),
        };
        if hi <= lo {
            return Ok(0.0);
        }
        let tb: Vec<f64> = breaks.iter().filter(|&&x| x > 0.0).map(|x| x.ln()).collect();
        let e = adaptive(|t: f64| { let r = t.exp(); r.powf(p + 1.0) * self.profile(r) }, lo.ln(), hi.ln(), &tb, &log_quad_spec())?;
        Ok(e.value)
    }

    /// ∫_{a<|z|<b} |z|^order w(z) dz over R^d. `b` may be infinite.
    pub fn partial_moment(&self, a: f64, b: f64, order: u32) -> Result<f64> {
        let p = (self.d - 1) as f64 + order as f64;
        Ok(sphere_measure(self.d) * self.radial_integral(a, b, p)?)
    }

    /// Mass beyond radius R.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        self.partial_moment(r, f64::INFINITY, 0)
    }

    /// M¹, M², ε₀ and a few diagnostic radii.
    pub fn moments(&self) -> Result<MomentReport> {
        let m1 = self
            .partial_moment(0.0, 1.0, 1)
            .map_err(|_| KernelError::AssumptionViolation("first moment on the unit ball diverges".into()))?;
        let m2 = self
            .tail_mass(1.0)
            .map_err(|_| KernelError::AssumptionViolation("tail mass beyond the unit ball diverges".into()))?;
        if !(m1 > 0.0) {
            return Err(KernelError::AssumptionViolation(format!("first moment must be positive, got {m1}")));
        }
        let radii = [0.25, 0.5, 1.0, 2.0];
        let mut second_moment_ball = Vec::new();
        let mut tail_mass = Vec::new();
        for &r in &radii {
            second_moment_ball.push((r, self.partial_moment(0.0, r, 2)?));
            tail_mass.push((r, self.tail_mass(r)?));
        }
        let mut epsilon0 = None;
        for k in 1..=60 {
            let eps = 0.5f64.powi(k);
            match self.partial_moment(eps, 1.0, 0) {
                Ok(m) if m > 0.0 && m.is_finite() => {
                    epsilon0 = Some(eps);
                    break;
                }
                _ => {}
            }
        }
        let epsilon0 = epsilon0.ok_or_else(|| KernelError::AssumptionViolation("no dyadic radius with positive annulus mass".into()))?;
        Ok(MomentReport { m1, m2, second_moment_ball, tail_mass, epsilon0 })
    }

    /// Full first moment ∫_{R^d} |z| w(z) dz.
    pub fn first_moment(&self) -> Result<f64> {
        self.partial_moment(0.0, f64::INFINITY, 1)
    }

    /// Scales the kernel so its first moment (or its δ→0 limit for the
    /// vanishing-horizon families) equals 2d.
    pub fn normalize_first_moment(&self) -> Result<Kernel> {
        let d = self.d as f64;
        let omega = sphere_measure(self.d);
        let c = match &self.family {
            Family::FractionalVanishing { .. } => 1.0 / omega,
            Family::LogRegularized { .. } => 2.0 * d / omega,
            Family::LogTruncated { .. } => 1.0,
            _ => {
                let fm = self.first_moment().map_err(|_| {
                    KernelError::AssumptionViolation("first moment is infinite; cannot normalize".into())
                })?;
                if !(fm > 0.0 && fm.is_finite()) {
                    return Err(KernelError::AssumptionViolation(format!("first moment {fm} cannot be normalized")));
                }
                let ratio = 2.0 * d / fm;
                if (ratio - 1.0).abs() < 1e-12 {
                    return Ok(self.clone());
                }
                self.c_norm * ratio
            }
        };
        self.with_c_norm(c)
    }

    /// Horizon parameter for families that carry one.
    pub fn delta(&self) -> Option<f64> {
        match &self.family {
            Family::FractionalVanishing { delta }
            | Family::LogRegularized { delta }
            | Family::LogTruncated { delta }
            | Family::Rescaled { delta, .. } => Some(*delta),
            _ => None,
        }
    }

    /// Same kernel with a different horizon parameter (normalization kept).
    pub fn with_delta(&self, delta: f64) -> Result<Kernel> {
        let fam = match &self.family {
            Family::FractionalVanishing { .. } => {
                check_unit_open("delta", delta)?;
                Family::FractionalVanishing { delta }
            }
            Family::LogRegularized { .. } => {
                check_unit_open("delta", delta)?;
                Family::LogRegularized { delta }
            }
            Family::LogTruncated { .. } => {
                check_unit_open("delta", delta)?;
                Family::LogTruncated { delta }
            }
            Family::Rescaled { base, .. } => return Kernel::rescaled((**base).clone(), delta)?.with_c_norm(self.c_norm),
            _ => return Err(KernelError::InvalidParameter(format!("{} has no horizon parameter", self.family_name()))),
        };
        Ok(Kernel { family: fam, d: self.d, c_norm: self.c_norm })
    }

    /// Checks the standing assumptions and, for horizon families, the
    /// behaviour along a δ ladder.
    pub fn validate_assumptions(&self) -> AssumptionReport {
        let mut samples: Vec<f64> = (0..=90).map(|k| 10f64.powf(-6.0 + k as f64 * 0.1)).collect();
        samples.extend(self.breakpoints());
        samples.sort_by(f64::total_cmp);
        let nonnegative = match &self.family {
            Family::Tabulated { values, .. } => values.iter().all(|v| *v >= 0.0),
            _ => samples.iter().all(|&r| self.profile(r) >= 0.0),
        };
        let m1 = self.partial_moment(0.0, 1.0, 1).ok();
        let m2 = self.tail_mass(1.0).ok();
        let m1_ok = m1.is_some_and(|v| v > 0.0 && v.is_finite());
        let m2_ok = m2.is_some_and(|v| v.is_finite());
        let monotone = if self.d == 1 {
            let vals: Vec<f64> = samples.iter().map(|&r| self.profile(r)).collect();
            Some(vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)))
        } else {
            None
        };
        let mut ladder = Vec::new();
        if self.delta().is_some() {
            for &dl in &DELTA_LADDER {
                if let Ok(k) = self.with_delta(dl) {
                    ladder.push(LadderRow {
                        delta: dl,
                        tail_mass: k.tail_mass(0.5).unwrap_or(f64::INFINITY),
                        first_moment: k.partial_moment(0.0, 1.0, 1).unwrap_or(f64::INFINITY),
                        second_moment: k.partial_moment(0.0, 1.0, 2).unwrap_or(f64::INFINITY),
                    });
                }
            }
        }
        let ladder_ok = if ladder.is_empty() {
            None
        } else {
            let tails_down = ladder.windows(2).all(|w| w[1].tail_mass <= w[0].tail_mass * (1.0 + 1e-12));
            let second_down = ladder.windows(2).all(|w| w[1].second_moment <= w[0].second_moment * (1.0 + 1e-12));
            Some(tails_down && second_down)
        };
        AssumptionReport { nonnegative, m1, m2, m1_ok, m2_ok, monotone, ladder, ladder_ok, target_first_moment: 2.0 * self.d as f64 }
    }
}

/// Horizon ladder used by assumption validation and the sweeps.
pub const DELTA_LADDER: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn tabulated_value(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let n = radii.len();
    if r < radii[0] || r > radii[n - 1] {
        return 0.0;
    }
    let i = match radii.binary_search_by(|x| x.total_cmp(&r)) {
        Ok(i) => return values[i],
        Err(i) => i - 1,
    };
    let t = (r.ln() - radii[i].ln()) / (radii[i + 1].ln() - radii[i].ln());
    values[i] + t * (values[i + 1] - values[i])
}

fn tabulated_integral(radii: &[f64], values: &[f64], a: f64, b: f64, p: f64) -> f64 {
    // On each segment w̄ = A + B t with t = ln r, so ∫ r^p w̄ dr = ∫ e^{αt}(A + Bt) dt with α = p+1.
    let alpha = p + 1.0;
    let mut total = 0.0;
    for i in 0..radii.len() - 1 {
        let lo = a.max(radii[i]);
        let hi = b.min(radii[i + 1]);
        if hi <= lo {
            continue;
        }
        let (t0, t1) = (radii[i].ln(), radii[i + 1].ln());
        let bslope = (values[i + 1] - values[i]) / (t1 - t0);
        let acoef = values[i] - bslope * t0;
        let prim = |t: f64| {
            if alpha == 0.0 {
                acoef * t + 0.5 * bslope * t * t
            } else {
                (t * alpha).exp() * (acoef / alpha + bslope * (t / alpha - 1.0 / (alpha * alpha)))
            }
        };
        total += prim(hi.ln()) - prim(lo.ln());
    }
    total
}

/// Moments of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// ∫_{|z|≤1} |z| w
    pub m1: f64,
    /// ∫_{|z|>1} w
    pub m2: f64,
    /// (R, ∫_{B_R} |z|² w)
    pub second_moment_ball: Vec<(f64, f64)>,
    /// (R, ∫_{|z|>R} w)
    pub tail_mass: Vec<(f64, f64)>,
    /// Largest dyadic radius ≤ 1 with positive finite annulus mass up to 1.
    pub epsilon0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub delta: f64,
    /// ∫_{|z|>1/2} w_δ
    pub tail_mass: f64,
    /// ∫_{B_1} |z| w_δ
    pub first_moment: f64,
    /// ∫_{B_1} |z|² w_δ
    pub second_moment: f64,
}

/// Report of [`Kernel::validate_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub nonnegative: bool,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m1_ok: bool,
    pub m2_ok: bool,
    /// Only checked in d = 1.
    pub monotone: Option<bool>,
    pub ladder: Vec<LadderRow>,
    /// Tail mass and second moment nonincreasing along the ladder.
    pub ladder_ok: Option<bool>,
    pub target_first_moment: f64,
}

impl AssumptionReport {
    /// Standing conditions: nonnegative profile, finite positive M¹, finite M².
    pub fn standing_ok(&self) -> bool {
        self.nonnegative && self.m1_ok && self.m2_ok
    }
}
