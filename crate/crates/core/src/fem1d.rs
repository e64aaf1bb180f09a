//! Conforming P1 Galerkin discretization on Ω = (0, L) with the zero volume
//! constraint, i.e. unknowns are the interior hat functions and every
//! function vanishes on R∖Ω.
//!
//! The nonlocal stiffness is B_ij = ∫_R A(x) Gφ_i(x) Gφ_j(x) dx. Hat functions
//! are translates of one reference hat, so Gφ_i(x) = g(x − x_i) where g is
//! evaluated semi-analytically from partial moments on a lattice-periodic
//! quadrature rule. With constant A the stiffness is Toeplitz.

use crate::kernels::{Kernel, KernelError};
use crate::quadrature::{gl8, graded_breaks};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("kernel has unbounded support; apply a cutoff before assembly")]
    NeedsCutoff,
    #[error("stiffness is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("solve residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("coefficient must satisfy A ≥ μ > 0 (found {0})")]
    Coefficient(f64),
    #[error("eigen-iteration did not converge (last change {0:e})")]
    EigenIteration(f64),
    #[error("invalid direction: nu must be +1 or -1")]
    Direction,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Uniform mesh of (0, L).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    pub length: f64,
    pub n_cells: usize,
}

impl Mesh1D {
    pub fn new(length: f64, n_cells: usize) -> Result<Self, FemError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(FemError::InvalidMesh(format!("length must be positive, got {length}")));
        }
        if n_cells < 2 {
            return Err(FemError::InvalidMesh(format!("need at least two cells, got {n_cells}")));
        }
        Ok(Mesh1D { length, n_cells })
    }

    pub fn unit(n_cells: usize) -> Result<Self, FemError> {
        Self::new(1.0, n_cells)
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    /// Number of interior nodes (unknowns).
    pub fn dofs(&self) -> usize {
        self.n_cells - 1
    }

    /// Value at x of the P1 function with interior coefficients `u`.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        if x <= 0.0 || x >= self.length {
            return 0.0;
        }
        let h = self.h();
        let t = x / h;
        let c = (t.floor() as usize).min(self.n_cells - 1);
        let s = t - c as f64;
        let at = |i: usize| if i == 0 || i == self.n_cells { 0.0 } else { u[i - 1] };
        (1.0 - s) * at(c) + s * at(c + 1)
    }

    /// ‖u_h − f‖_{L²(Ω)} by 8-point Gauss per cell.
    pub fn l2_error(&self, u: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
        let h = self.h();
        let mut s = 0.0;
        for c in 0..self.n_cells {
            for (x, w) in gl8().mapped(c as f64 * h, (c + 1) as f64 * h) {
                let e = self.interpolate(u, x) - exact(x);
                s += w * e * e;
            }
        }
        s.sqrt()
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.l2_error(u, |_| 0.0)
    }
}

/// Diffusion coefficient A(x).
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(x),
        }
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "const:{c}"),
            Coefficient::Function(_) => write!(f, "func"),
        }
    }
}

/// Assembled Galerkin system over the interior nodes.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: Mesh1D,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub load: DVector<f64>,
    pub meta: String,
}

impl FemSystem {
    /// Same matrices with a different load vector.
    pub fn with_load(&self, load: DVector<f64>) -> Self {
        FemSystem { load, ..self.clone() }
    }

    /// max_i |(B u − b)_i| / max(1, max_i |b_i|).
    pub fn galerkin_residual(&self, u: &DVector<f64>) -> f64 {
        let r = &self.stiffness * u - &self.load;
        r.amax() / self.load.amax().max(1.0)
    }

    /// sqrt(uᵀ B u).
    pub fn energy_norm(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.stiffness * u)).max(0.0).sqrt()
    }
}

fn nu_sign(nu: f64) -> Result<f64, FemError> {
    if nu == 1.0 || nu == -1.0 {
        Ok(nu)
    } else {
        Err(FemError::Direction)
    }
}

/// G^{+1} φ(y) for the hat of half-width h centred at 0.
fn reference_hat_gradient(kernel: &Kernel, h: f64, y: f64) -> Result<f64, KernelError> {
    let reach = kernel.support_radius().unwrap_or(f64::INFINITY);
    if y >= h || y + h + reach <= 0.0 {
        return Ok(0.0);
    }
    let phi = |x: f64| (1.0 - x.abs() / h).max(0.0);
    let py = phi(y);
    // φ(y+t) on t-pieces: 0 | (y+t+h)/h | (h−y−t)/h | 0
    let cuts = [-h - y, -y, h - y];
    let mut edges = vec![0.0];
    edges.extend(cuts.iter().copied().filter(|&c| c > 0.0 && c < reach));
    edges.push(reach);
    let mut total = 0.0;
    for (k, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let mid = if b.is_finite() { 0.5 * (a + b) } else { a + 1.0 };
        let x = y + mid;
        // φ(y+t) − φ(y) = c0 + c1 t on this piece
        let c1 = if x <= -h || x >= h { 0.0 } else if x < 0.0 { 1.0 / h } else { -1.0 / h };
        let c0 = if k == 0 { 0.0 } else { phi(x) - c1 * mid - py };
        if c0 != 0.0 {
            total += c0 * kernel.radial_integral(a, b, 0.0)?;
        }
        if c1 != 0.0 {
            total += c1 * kernel.radial_integral(a, b, 1.0)?;
        }
    }
    Ok(total)
}

/// G^ν φ_i(x) for the interior hat function φ_i, 1 ≤ i ≤ n_cells − 1.
pub fn hat_gradient(kernel: &Kernel, nu: f64, mesh: &Mesh1D, i: usize, x: f64) -> Result<f64, FemError> {
    if kernel.dim() != 1 {
        return Err(FemError::InvalidMesh("one-dimensional kernel required".into()));
    }
    let s = nu_sign(nu)?;
    if i == 0 || i >= mesh.n_cells {
        return Err(FemError::InvalidMesh(format!("node {i} is not interior")));
    }
    let y = x - mesh.node(i);
    let g = if s > 0.0 {
        reference_hat_gradient(kernel, mesh.h(), y)
    } else {
        reference_hat_gradient(kernel, mesh.h(), -y).map(|v| -v)
    };
    g.map_err(|e| match e {
        KernelError::InfiniteMass => FemError::NeedsCutoff,
        other => FemError::Kernel(other),
    })
}

/// Quadrature nodes on one period [0, h) of the lattice, split where the
/// hat gradient has kinks and graded toward the mesh nodes.
fn lattice_rule(kernel: &Kernel, nu: f64, h: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0, h];
    for r in kernel.breakpoints() {
        let m = (-nu * r).rem_euclid(h);
        if m > 1e-12 * h && m < h * (1.0 - 1e-12) {
            cuts.push(m);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * h);
    let last = cuts.len() - 2;
    let mut out = Vec::new();
    for (k, w) in cuts.windows(2).enumerate() {
        let pts = graded_breaks(w[0], w[1], k == 0, k == last, 10, 0.25);
        for p in pts.windows(2) {
            out.extend(gl8().mapped(p[0], p[1]));
        }
    }
    out
}

struct HatTable {
    /// y-lattice offsets k such that y = k h + y_p
    kmin: i64,
    rule: Vec<(f64, f64)>,
    /// values[k − kmin][p]
    values: Vec<Vec<f64>>,
}

fn hat_table(kernel: &Kernel, nu: f64, h: f64) -> Result<HatTable, FemError> {
    let reach = kernel.support_radius().ok_or(FemError::NeedsCutoff)?;
    let span = (reach / h).ceil() as i64 + 1;
    let (kmin, kmax) = if nu > 0.0 { (-span - 1, 0) } else { (-1, span) };
    let rule = lattice_rule(kernel, nu, h);
    let values = (kmin..=kmax)
        .into_par_iter()
        .map(|k| {
            rule.iter()
                .map(|&(y, _)| {
                    let yy = k as f64 * h + y;
                    let v = if nu > 0.0 {
                        reference_hat_gradient(kernel, h, yy)
                    } else {
                        reference_hat_gradient(kernel, h, -yy).map(|v| -v)
                    };
                    v.map_err(FemError::from)
                })
                .collect::<Result<Vec<f64>, FemError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HatTable { kmin, rule, values })
}

/// Consistent P1 mass matrix over interior nodes.
pub fn mass_matrix(mesh: &Mesh1D) -> DMatrix<f64> {
    let n = mesh.dofs();
    let h = mesh.h();
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 * h / 3.0,
        1 => h / 6.0,
        _ => 0.0,
    })
}

/// load_i = ∫ f φ_i by 8-point Gauss on the two cells of node i.
pub fn load_vector(mesh: &Mesh1D, f: &(dyn Fn(f64) -> f64 + Sync)) -> DVector<f64> {
    let h = mesh.h();
    DVector::from_fn(mesh.dofs(), |k, _| {
        let i = k + 1;
        let xi = mesh.node(i);
        let mut s = 0.0;
        for (a, b) in [(xi - h, xi), (xi, xi + h)] {
            for (x, w) in gl8().mapped(a, b) {
                s += w * f(x) * (1.0 - (x - xi).abs() / h);
            }
        }
        s
    })
}

fn check_coefficient(a: &Coefficient, mesh: &Mesh1D) -> Result<(), FemError> {
    let lo = match a {
        Coefficient::Constant(c) => *c,
        Coefficient::Function(f) => {
            let h = mesh.h();
            let mut m = f64::INFINITY;
            for c in 0..mesh.n_cells {
                for (x, _) in gl8().mapped(c as f64 * h, (c + 1) as f64 * h) {
                    m = m.min(f(x));
                }
            }
            m
        }
    };
    if lo > 0.0 && lo.is_finite() {
        Ok(())
    } else {
        Err(FemError::Coefficient(lo))
    }
}

/// Nonlocal Galerkin system B_ij = ∫ A Gφ_i Gφ_j, load_i = ∫ f φ_i.
pub fn assemble(
    kernel: &Kernel,
    nu: f64,
    a: &Coefficient,
    f: &(dyn Fn(f64) -> f64 + Sync),
    mesh: &Mesh1D,
) -> Result<FemSystem, FemError> {
    if kernel.dim() != 1 {
        return Err(FemError::InvalidMesh("one-dimensional kernel required".into()));
    }
    let nu = nu_sign(nu)?;
    check_coefficient(a, mesh)?;
    let h = mesh.h();
    let n = mesh.dofs();
    let table = hat_table(kernel, nu, h)?;
    let kcount = table.values.len() as i64;
    let get = |k: i64| -> Option<&Vec<f64>> {
        let idx = k - table.kmin;
        (0..kcount).contains(&idx).then(|| &table.values[idx as usize])
    };

    let stiffness = match a {
        Coefficient::Constant(c) => {
            // B_{i,i+l} = c Σ_k Σ_p w_p g_k(p) g_{k−l}(p)
            let lags: Vec<f64> = (0..n as i64)
                .into_par_iter()
                .map(|l| {
                    let mut s = 0.0;
                    for k in table.kmin..table.kmin + kcount {
                        if let (Some(gk), Some(gl)) = (get(k), get(k - l)) {
                            for ((_, w), (x, y)) in table.rule.iter().zip(gk.iter().zip(gl)) {
                                s += w * x * y;
                            }
                        }
                    }
                    c * s
                })
                .collect();
            DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)])
        }
        Coefficient::Function(func) => {
            // lattice cells m with x = m h + y; node i sits at i h
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|ii| {
                    let i = ii as i64 + 1;
                    let mut row = vec![0.0; n];
                    for k in table.kmin..table.kmin + kcount {
                        let m = i + k;
                        let gi = get(k).unwrap();
                        let aw: Vec<f64> = table
                            .rule
                            .iter()
                            .zip(gi)
                            .map(|(&(y, w), g)| w * g * func(m as f64 * h + y))
                            .collect();
                        for (jj, out) in row.iter_mut().enumerate().skip(ii) {
                            if let Some(gj) = get(m - (jj as i64 + 1)) {
                                *out += aw.iter().zip(gj).map(|(a, b)| a * b).sum::<f64>();
                            }
                        }
                    }
                    row
                })
                .collect();
            DMatrix::from_fn(n, n, |i, j| if j >= i { rows[i][j] } else { rows[j][i] })
        }
    };
    Ok(FemSystem {
        mesh: *mesh,
        stiffness,
        mass: mass_matrix(mesh),
        load: load_vector(mesh, f),
        meta: format!("kernel={} nu={nu} A={a:?}", kernel.family_name()),
    })
}

/// Standard P1 system for −(A u′)′ = f with homogeneous Dirichlet data.
pub fn assemble_local(a: &Coefficient, f: &(dyn Fn(f64) -> f64 + Sync), mesh: &Mesh1D) -> Result<FemSystem, FemError> {
    check_coefficient(a, mesh)?;
    let n = mesh.dofs();
    let h = mesh.h();
    let mut k = DMatrix::zeros(n, n);
    for c in 0..mesh.n_cells {
        let abar: f64 = gl8().mapped(c as f64 * h, (c + 1) as f64 * h).map(|(x, w)| w * a.eval(x)).sum::<f64>() / (h * h);
        // cell c spans nodes c and c+1; interior index = node − 1
        let ids = [c.checked_sub(1), if c + 1 < mesh.n_cells { Some(c) } else { None }];
        for (p, ip) in ids.iter().enumerate() {
            for (q, iq) in ids.iter().enumerate() {
                if let (Some(i), Some(j)) = (ip, iq) {
                    k[(*i, *j)] += if p == q { abar } else { -abar };
                }
            }
        }
    }
    Ok(FemSystem {
        mesh: *mesh,
        stiffness: k,
        mass: mass_matrix(mesh),
        load: load_vector(mesh, f),
        meta: format!("local A={a:?}"),
    })
}

/// Cholesky solve of B u = b, checked to 1e−10 relative residual.
pub fn solve_state(system: &FemSystem) -> Result<DVector<f64>, FemError> {
    solve_with(system, &system.load)
}

pub(crate) fn solve_with(system: &FemSystem, rhs: &DVector<f64>) -> Result<DVector<f64>, FemError> {
    let chol = system
        .stiffness
        .clone()
        .cholesky()
        .ok_or_else(|| FemError::NotPositiveDefinite(system.meta.clone()))?;
    let u = chol.solve(rhs);
    let scale = rhs.amax();
    if scale > 0.0 {
        let res = (&system.stiffness * &u - rhs).amax() / (scale + system.stiffness.amax() * u.amax());
        if res > 1e-10 {
            return Err(FemError::Residual(res));
        }
    }
    Ok(u)
}

/// C_P = λ_min^{−1/2} for the pencil (stiffness, mass), by inverse power
/// iteration with Rayleigh quotients.
pub fn poincare_constant(system: &FemSystem) -> Result<f64, FemError> {
    let chol = system
        .stiffness
        .clone()
        .cholesky()
        .ok_or_else(|| FemError::NotPositiveDefinite(system.meta.clone()))?;
    let m = &system.mass;
    let n = m.nrows();
    // start from the discrete sine mode, which overlaps the ground state
    let mut x = DVector::from_fn(n, |i, _| (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).sin());
    let mut lambda = f64::NAN;
    let mut change = f64::INFINITY;
    for _ in 0..500 {
        let y = chol.solve(&(m * &x));
        let my = m * &y;
        let norm = y.dot(&my).sqrt();
        x = y / norm;
        let next = x.dot(&(&system.stiffness * &x)) / x.dot(&(m * &x));
        change = ((next - lambda) / next).abs();
        lambda = next;
        if change < 1e-12 {
            break;
        }
    }
    if !(change < 1e-10) {
        return Err(FemError::EigenIteration(change));
    }
    if !(lambda > 0.0) {
        return Err(FemError::NotPositiveDefinite(format!("smallest eigenvalue {lambda}")));
    }
    Ok(lambda.powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Coefficient {
        Coefficient::Constant(1.0)
    }

    #[test]
    fn local_stiffness_pattern() {
        let mesh = Mesh1D::unit(8).unwrap();
        let s = assemble_local(&unit(), &|_| 1.0, &mesh).unwrap();
        let h = mesh.h();
        assert!((s.stiffness[(3, 3)] - 2.0 / h).abs() < 1e-12);
        assert!((s.stiffness[(3, 4)] + 1.0 / h).abs() < 1e-12);
        assert_eq!(s.stiffness[(3, 5)], 0.0);
        assert!((s.load[2] - h).abs() < 1e-14);
    }

    #[test]
    fn local_solution_is_nodally_exact() {
        let mesh = Mesh1D::unit(16).unwrap();
        let s = assemble_local(&unit(), &|_| 1.0, &mesh).unwrap();
        let u = solve_state(&s).unwrap();
        for i in 1..16 {
            let x = mesh.node(i);
            assert!((u[i - 1] - 0.5 * x * (1.0 - x)).abs() < 1e-13);
        }
    }

    #[test]
    fn hat_gradient_vanishes_away_from_support() {
        let k = Kernel::rescaled(Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap(), 0.1).unwrap();
        let mesh = Mesh1D::unit(8).unwrap();
        assert_eq!(hat_gradient(&k, 1.0, &mesh, 4, 0.7).unwrap(), 0.0);
        assert_eq!(hat_gradient(&k, 1.0, &mesh, 4, 0.2).unwrap(), 0.0);
        assert_eq!(hat_gradient(&k, -1.0, &mesh, 4, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn partition_of_unity_gives_zero() {
        let k = Kernel::riesz_truncated(1, 0.5).unwrap();
        let mesh = Mesh1D::new(8.0, 8).unwrap();
        let x = 4.3;
        let s: f64 = (1..8).map(|i| hat_gradient(&k, 1.0, &mesh, i, x).unwrap()).sum();
        assert!(s.abs() < 1e-12, "{s}");
    }

    #[test]
    fn unbounded_kernel_needs_cutoff() {
        let k = Kernel::fractional_vanishing(1, 0.2).unwrap();
        let mesh = Mesh1D::unit(4).unwrap();
        assert!(matches!(assemble(&k, 1.0, &unit(), &|_| 1.0, &mesh), Err(FemError::NeedsCutoff)));
    }

    #[test]
    fn constant_and_function_coefficients_agree() {
        let k = Kernel::riesz_truncated(1, 0.3).unwrap().normalize_first_moment().unwrap();
        let k = Kernel::rescaled(k, 0.2).unwrap();
        let mesh = Mesh1D::unit(8).unwrap();
        let a = assemble(&k, 1.0, &unit(), &|_| 1.0, &mesh).unwrap();
        let b = assemble(&k, 1.0, &Coefficient::function(|_| 1.0), &|_| 1.0, &mesh).unwrap();
        assert!((a.stiffness - b.stiffness).amax() < 1e-12);
    }

    #[test]
    fn local_poincare_constant() {
        let mesh = Mesh1D::unit(64).unwrap();
        let s = assemble_local(&unit(), &|_| 1.0, &mesh).unwrap();
        let cp = poincare_constant(&s).unwrap();
        assert!((cp - 1.0 / std::f64::consts::PI).abs() < 1e-3);
    }
}
