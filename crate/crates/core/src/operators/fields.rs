use std::f64::consts::PI;

/// Where a test function may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Ball { center: Vec<f64>, radius: f64 },
    Unbounded,
}

/// A C¹ scalar field with the metadata needed by the pointwise operators.
pub trait TestFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Global Lipschitz constant, if known.
    fn lipschitz(&self) -> Option<f64>;
    fn support(&self) -> Support;
    /// Ray parameters r > 0 where r ↦ u(x + r e) is not smooth.
    fn kinks_along(&self, _x: &[f64], _e: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// a·(1 − |x−c|²/ρ²)² on the ball B_ρ(c), zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Bump { center, radius, amplitude: 1.0 }
    }

    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn s(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / (self.radius * self.radius)
    }
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s = self.s(x);
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s) * (1.0 - s)
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = self.s(x);
        if s >= 1.0 {
            return vec![0.0; x.len()];
        }
        let f = -4.0 * self.amplitude * (1.0 - s) / (self.radius * self.radius);
        x.iter().zip(&self.center).map(|(a, c)| f * (a - c)).collect()
    }

    fn lipschitz(&self) -> Option<f64> {
        // max of 4t(1−t²) at t = 1/√3
        Some(self.amplitude.abs() * 8.0 / (3.0 * 3f64.sqrt()) / self.radius)
    }

    fn support(&self) -> Support {
        Support::Ball { center: self.center.clone(), radius: self.radius }
    }
}

/// a·x + b on all of R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl Affine {
    pub fn new(slope: Vec<f64>, offset: f64) -> Self {
        Affine { slope, offset }
    }
}

impl TestFunction for Affine {
    fn dim(&self) -> usize {
        self.slope.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.offset + self.slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        self.slope.clone()
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.slope.iter().map(|a| a * a).sum::<f64>().sqrt())
    }

    fn support(&self) -> Support {
        Support::Unbounded
    }
}

/// a·sin(2π k·x / L + φ), periodic on the box [0, L)^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    pub wavenumber: Vec<f64>,
    pub length: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl PlaneWave {
    pub fn new(wavenumber: Vec<f64>, length: f64) -> Self {
        PlaneWave { wavenumber, length, amplitude: 1.0, phase: 0.0 }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn scaled(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn arg(&self, x: &[f64]) -> f64 {
        2.0 * PI * self.wavenumber.iter().zip(x).map(|(k, a)| k * a).sum::<f64>() / self.length + self.phase
    }
}

impl TestFunction for PlaneWave {
    fn dim(&self) -> usize {
        self.wavenumber.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * self.arg(x).sin()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let c = self.amplitude * self.arg(x).cos() * 2.0 * PI / self.length;
        self.wavenumber.iter().map(|k| c * k).collect()
    }

    fn lipschitz(&self) -> Option<f64> {
        let k = self.wavenumber.iter().map(|a| a * a).sum::<f64>().sqrt();
        Some(self.amplitude.abs() * 2.0 * PI * k / self.length)
    }

    fn support(&self) -> Support {
        Support::Unbounded
    }
}

type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Closure-backed field with user-declared metadata.
pub struct FnField {
    d: usize,
    value: ScalarFn,
    gradient: VectorFn,
    lipschitz: Option<f64>,
    support: Support,
    kinks: Vec<f64>,
}

impl FnField {
    pub fn new(
        d: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        lipschitz: Option<f64>,
        support: Support,
    ) -> Self {
        FnField { d, value: Box::new(value), gradient: Box::new(gradient), lipschitz, support, kinks: Vec::new() }
    }

    /// Points where a one-dimensional field has a kink.
    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }
}

impl TestFunction for FnField {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    fn support(&self) -> Support {
        self.support.clone()
    }

    fn kinks_along(&self, x: &[f64], e: &[f64]) -> Vec<f64> {
        if self.d != 1 {
            return Vec::new();
        }
        self.kinks.iter().map(|k| (k - x[0]) / e[0]).filter(|r| *r > 0.0).collect()
    }
}
