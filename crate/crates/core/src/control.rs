//! Box-constrained optimal control of the P1 state equation with P0
//! controls:
//!
//! ```text
//! minimize  ∫_Ω F(x, u) + (λ/2) ∫_Ω Γ g²   subject to  B u = ⟨g, φ_i⟩,  α ≤ g ≤ β
//! ```
//!
//! The reduced problem is solved by projected gradient descent with Armijo
//! backtracking. The discrete optimality condition is the cellwise fixed
//! point g_T = clip(−p̄_T / (λ Γ̄_T), α_T, β_T), with p the adjoint state.

use crate::experiments::ScalarFn;
use crate::fem1d::{assemble, assemble_local, Coefficient, FemError, FemSystem, Mesh1D};
use crate::kernels::Kernel;
use crate::quadrature::gl8;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("invalid control problem: {0}")]
    Invalid(String),
    #[error("bounds cross on cell {cell}: sup alpha = {alpha} > inf beta = {beta}; refine the mesh")]
    EmptyCell { cell: usize, alpha: f64, beta: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Integrand F(x, ξ) of the tracking part and its ξ-derivative.
#[derive(Clone)]
pub enum Objective {
    /// F = (ξ − u_des(x))²
    Tracking(ScalarFn),
    Custom {
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        f_xi: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl Objective {
    pub fn f(&self, x: f64, xi: f64) -> f64 {
        match self {
            Objective::Tracking(ud) => (xi - ud(x)).powi(2),
            Objective::Custom { f, .. } => f(x, xi),
        }
    }

    /// F(x, b + δ) − F(x, b), factored for tracking so that small δ does
    /// not cancel.
    pub fn f_diff(&self, x: f64, b: f64, delta: f64) -> f64 {
        match self {
            Objective::Tracking(ud) => delta * (2.0 * (b - ud(x)) + delta),
            Objective::Custom { f, .. } => f(x, b + delta) - f(x, b),
        }
    }

    pub fn f_xi(&self, x: f64, xi: f64) -> f64 {
        match self {
            Objective::Tracking(ud) => 2.0 * (xi - ud(x)),
            Objective::Custom { f_xi, .. } => f_xi(x, xi),
        }
    }
}

/// Which state operator the control acts through.
#[derive(Debug, Clone)]
pub enum StateModel {
    Nonlocal { kernel: Kernel, nu: f64 },
    Local,
}

#[derive(Clone)]
pub struct ControlProblem {
    pub mesh: Mesh1D,
    pub model: StateModel,
    pub coef: Coefficient,
    pub alpha: ScalarFn,
    pub beta: ScalarFn,
    pub lam: f64,
    pub gamma: ScalarFn,
    pub objective: Objective,
}

impl ControlProblem {
    /// Quadratic tracking with constant bounds and Γ ≡ 1.
    pub fn tracking(mesh: Mesh1D, model: StateModel, u_des: ScalarFn, alpha: f64, beta: f64, lam: f64) -> Self {
        ControlProblem {
            mesh,
            model,
            coef: Coefficient::Constant(1.0),
            alpha: Arc::new(move |_| alpha),
            beta: Arc::new(move |_| beta),
            lam,
            gamma: Arc::new(|_| 1.0),
            objective: Objective::Tracking(u_des),
        }
    }

    pub fn with_gamma(mut self, gamma: ScalarFn) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_mesh(mut self, mesh: Mesh1D) -> Self {
        self.mesh = mesh;
        self
    }

    pub fn with_model(mut self, model: StateModel) -> Self {
        self.model = model;
        self
    }

    /// Galerkin system of the state equation (load left at zero).
    pub fn system(&self) -> Result<FemSystem, ControlError> {
        let zero = |_: f64| 0.0;
        Ok(match &self.model {
            StateModel::Nonlocal { kernel, nu } => assemble(kernel, *nu, &self.coef, &zero, &self.mesh)?,
            StateModel::Local => assemble_local(&self.coef, &zero, &self.mesh)?,
        })
    }

    fn cell_points(&self, c: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.mesh.h();
        gl8().mapped(c as f64 * h, (c + 1) as f64 * h)
    }

    /// (sup_T α, inf_T β) per cell, sampled at the cell ends and Gauss points.
    pub fn cell_bounds(&self) -> Result<Vec<(f64, f64)>, ControlError> {
        cell_bounds(&self.mesh, &*self.alpha, &*self.beta)
    }

    /// Cell averages of Γ; errors unless all are positive.
    pub fn gamma_bar(&self) -> Result<Vec<f64>, ControlError> {
        let h = self.mesh.h();
        (0..self.mesh.n_cells)
            .map(|c| {
                let mut lo = f64::INFINITY;
                let mut s = 0.0;
                for (x, w) in self.cell_points(c) {
                    let g = (self.gamma)(x);
                    lo = lo.min(g);
                    s += w * g;
                }
                if lo > 0.0 {
                    Ok(s / h)
                } else {
                    Err(ControlError::Invalid(format!("gamma must have a positive lower bound (cell {c}: {lo})")))
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ControlError> {
        if !(self.lam > 0.0) {
            return Err(ControlError::Invalid(format!("lam must be positive, got {}", self.lam)));
        }
        self.gamma_bar()?;
        self.cell_bounds()?;
        Ok(())
    }
}

fn cell_bounds(mesh: &Mesh1D, alpha: &dyn Fn(f64) -> f64, beta: &dyn Fn(f64) -> f64) -> Result<Vec<(f64, f64)>, ControlError> {
    let h = mesh.h();
    (0..mesh.n_cells)
        .map(|c| {
            let (a, b) = (c as f64 * h, (c + 1) as f64 * h);
            let pts = gl8().mapped(a, b).map(|(x, _)| x).chain([a, b]);
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for x in pts {
                lo = lo.max(alpha(x));
                hi = hi.min(beta(x));
            }
            if lo > hi {
                Err(ControlError::EmptyCell { cell: c, alpha: lo, beta: hi })
            } else {
                Ok((lo, hi))
            }
        })
        .collect()
}

/// P0 projection of q: cell average clipped to [sup_T α, inf_T β].
pub fn control_to_zh(
    q: &dyn Fn(f64) -> f64,
    mesh: &Mesh1D,
    alpha: &dyn Fn(f64) -> f64,
    beta: &dyn Fn(f64) -> f64,
) -> Result<Vec<f64>, ControlError> {
    let h = mesh.h();
    let bounds = cell_bounds(mesh, alpha, beta)?;
    Ok(bounds
        .iter()
        .enumerate()
        .map(|(c, &(lo, hi))| {
            let avg = gl8().mapped(c as f64 * h, (c + 1) as f64 * h).map(|(x, w)| w * q(x)).sum::<f64>() / h;
            avg.max(lo).min(hi)
        })
        .collect())
}

/// ⟨g, φ_i⟩ for a P0 control g.
pub fn control_load(mesh: &Mesh1D, g: &[f64]) -> DVector<f64> {
    let h = mesh.h();
    DVector::from_fn(mesh.dofs(), |k, _| 0.5 * h * (g[k] + g[k + 1]))
}

/// Cell averages of a P1 function with interior coefficients `p`.
pub fn cell_averages(mesh: &Mesh1D, p: &[f64]) -> Vec<f64> {
    let at = |i: usize| if i == 0 || i == mesh.n_cells { 0.0 } else { p[i - 1] };
    (0..mesh.n_cells).map(|c| 0.5 * (at(c) + at(c + 1))).collect()
}

/// ‖a − b‖_{L²} for P0 functions on the same mesh.
pub fn p0_l2(mesh: &Mesh1D, a: &[f64], b: &[f64]) -> f64 {
    (mesh.h() * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).sqrt()
}

/// ‖a − b‖_{L²} for P0 functions on nested uniform meshes.
pub fn p0_l2_nested(mesh_a: &Mesh1D, a: &[f64], mesh_b: &Mesh1D, b: &[f64]) -> f64 {
    let (fm, fa, cm, cb) = if mesh_a.n_cells >= mesh_b.n_cells { (mesh_a, a, mesh_b, b) } else { (mesh_b, b, mesh_a, a) };
    let r = fm.n_cells / cm.n_cells;
    (fm.h() * fa.iter().enumerate().map(|(c, v)| (v - cb[c / r]).powi(2)).sum::<f64>()).sqrt()
}

/// ⟨F_ξ(·, u_h), φ_i⟩ by 8-point Gauss on each cell.
fn adjoint_load(problem: &ControlProblem, u: &[f64]) -> DVector<f64> {
    let mesh = &problem.mesh;
    let h = mesh.h();
    let mut b = DVector::zeros(mesh.dofs());
    for c in 0..mesh.n_cells {
        for (x, w) in problem.cell_points(c) {
            let fx = w * problem.objective.f_xi(x, mesh.interpolate(u, x));
            let s = (x - c as f64 * h) / h;
            if c >= 1 {
                b[c - 1] += fx * (1.0 - s);
            }
            if c + 1 < mesh.n_cells {
                b[c] += fx * s;
            }
        }
    }
    b
}

struct Factored {
    chol: Cholesky<f64, Dyn>,
    stiffness: DMatrix<f64>,
}

impl Factored {
    fn new(system: &FemSystem) -> Result<Self, ControlError> {
        let chol = system
            .stiffness
            .clone()
            .cholesky()
            .ok_or_else(|| FemError::NotPositiveDefinite(system.meta.clone()))?;
        Ok(Factored { chol, stiffness: system.stiffness.clone() })
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>, ControlError> {
        let x = self.chol.solve(rhs);
        let scale = rhs.amax();
        if scale > 0.0 {
            let res = (&self.stiffness * &x - rhs).amax() / (scale + self.stiffness.amax() * x.amax());
            if res > 1e-10 {
                return Err(FemError::Residual(res).into());
            }
        }
        Ok(x)
    }
}

/// Adjoint state p with B p = ⟨F_ξ(·, u_h), φ_i⟩ (B is symmetric).
pub fn solve_adjoint(system: &FemSystem, u: &[f64], problem: &ControlProblem) -> Result<Vec<f64>, ControlError> {
    let b = adjoint_load(problem, u);
    Ok(Factored::new(system)?.solve(&b)?.as_slice().to_vec())
}

/// I(u, g) = ∫ F(x, u_h) + (λ/2) ∫ Γ g².
pub fn objective(u: &[f64], g: &[f64], problem: &ControlProblem) -> Result<f64, ControlError> {
    let gamma = problem.gamma_bar()?;
    Ok(objective_with(u, g, problem, &gamma))
}

fn objective_with(u: &[f64], g: &[f64], problem: &ControlProblem, gamma: &[f64]) -> f64 {
    let mesh = &problem.mesh;
    let mut track = 0.0;
    for c in 0..mesh.n_cells {
        for (x, w) in problem.cell_points(c) {
            track += w * problem.objective.f(x, mesh.interpolate(u, x));
        }
    }
    let reg: f64 = g.iter().zip(gamma).map(|(v, gm)| gm * v * v).sum::<f64>() * mesh.h();
    track + 0.5 * problem.lam * reg
}

/// Discrete optimal state, control and adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalTriple {
    pub u: Vec<f64>,
    pub g: Vec<f64>,
    pub p: Vec<f64>,
    pub residual: f64,
    pub objective_value: f64,
    pub iterations: usize,
    /// objective after each accepted step, starting with the initial value
    pub history: Vec<f64>,
}

/// Reduced-functional evaluator shared by the solver and the checks.
pub struct Reduced<'a> {
    problem: &'a ControlProblem,
    fact: Factored,
    gamma: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

/// State, adjoint and derived quantities at one control.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub value: f64,
    /// L²(Ω)-gradient p̄ + λ Γ̄ g
    pub gradient: Vec<f64>,
    pub residual: f64,
}

impl<'a> Reduced<'a> {
    pub fn new(problem: &'a ControlProblem) -> Result<Self, ControlError> {
        problem.validate()?;
        let system = problem.system()?;
        Ok(Reduced {
            problem,
            fact: Factored::new(&system)?,
            gamma: problem.gamma_bar()?,
            bounds: problem.cell_bounds()?,
        })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        g.iter().zip(&self.bounds).map(|(v, (lo, hi))| v.max(*lo).min(*hi)).collect()
    }

    pub fn state(&self, g: &[f64]) -> Result<Vec<f64>, ControlError> {
        Ok(self.fact.solve(&control_load(&self.problem.mesh, g))?.as_slice().to_vec())
    }

    pub fn value(&self, g: &[f64]) -> Result<f64, ControlError> {
        let u = self.state(g)?;
        Ok(objective_with(&u, g, self.problem, &self.gamma))
    }

    /// j(g + dg) − j(g) where du = S dg, from pointwise differences.
    pub fn decrease(&self, g: &[f64], u: &[f64], dg: &[f64], du: &[f64]) -> f64 {
        let pr = self.problem;
        let mesh = &pr.mesh;
        let mut track = 0.0;
        for c in 0..mesh.n_cells {
            for (x, w) in pr.cell_points(c) {
                track += w * pr.objective.f_diff(x, mesh.interpolate(u, x), mesh.interpolate(du, x));
            }
        }
        let reg: f64 =
            g.iter().zip(dg).zip(&self.gamma).map(|((a, d), gm)| gm * d * (2.0 * a + d)).sum::<f64>() * mesh.h();
        track + 0.5 * pr.lam * reg
    }

    pub fn evaluate(&self, g: &[f64]) -> Result<Evaluation, ControlError> {
        let mesh = &self.problem.mesh;
        let u = self.state(g)?;
        let p = self.fact.solve(&adjoint_load(self.problem, &u))?.as_slice().to_vec();
        let pbar = cell_averages(mesh, &p);
        let lam = self.problem.lam;
        let gradient: Vec<f64> = pbar.iter().zip(g).zip(&self.gamma).map(|((pb, gv), gm)| pb + lam * gm * gv).collect();
        let target: Vec<f64> = pbar.iter().zip(&self.gamma).map(|(pb, gm)| -pb / (lam * gm)).collect();
        let residual = p0_l2(mesh, g, &self.project(&target));
        let value = objective_with(&u, g, self.problem, &self.gamma);
        Ok(Evaluation { u, p, value, gradient, residual })
    }
}

/// Projected gradient with Armijo backtracking from g = Π(0).
pub fn solve_optimal(problem: &ControlProblem, tol: f64, max_iter: usize) -> Result<OptimalTriple, ControlError> {
    let start = vec![0.0; problem.mesh.n_cells];
    solve_optimal_from(problem, &start, tol, max_iter)
}

/// Projected gradient with Armijo backtracking from a given start.
pub fn solve_optimal_from(problem: &ControlProblem, start: &[f64], tol: f64, max_iter: usize) -> Result<OptimalTriple, ControlError> {
    if start.len() != problem.mesh.n_cells {
        return Err(ControlError::Invalid("start control must have one value per cell".into()));
    }
    let red = Reduced::new(problem)?;
    let h = problem.mesh.h();
    let mut g = red.project(start);
    let mut ev = red.evaluate(&g)?;
    let mut history = vec![ev.value];
    let mut iterations = 0;
    while ev.residual > tol {
        if iterations >= max_iter {
            return Err(ControlError::NonConvergence { iterations, residual: ev.residual });
        }
        let mut step = 1.0 / problem.lam;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = red.project(&g.iter().zip(&ev.gradient).map(|(v, d)| v - step * d).collect::<Vec<_>>());
            let slope: f64 = h * trial.iter().zip(&g).zip(&ev.gradient).map(|((t, v), d)| d * (t - v)).sum::<f64>();
            let dg: Vec<f64> = trial.iter().zip(&g).map(|(t, v)| t - v).collect();
            let du = red.state(&dg)?;
            if red.decrease(&g, &ev.u, &dg, &du) <= 1e-4 * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(ControlError::NonConvergence { iterations, residual: ev.residual });
        };
        g = next;
        ev = red.evaluate(&g)?;
        history.push(ev.value);
        iterations += 1;
    }
    Ok(OptimalTriple {
        u: ev.u,
        g,
        p: ev.p,
        residual: ev.residual,
        objective_value: ev.value,
        iterations,
        history,
    })
}

/// Recomputes ‖g − Π(−p̄/(λΓ̄))‖ for a stored triple.
pub fn optimality_residual(problem: &ControlProblem, triple: &OptimalTriple) -> Result<f64, ControlError> {
    let gamma = problem.gamma_bar()?;
    let bounds = problem.cell_bounds()?;
    let pbar = cell_averages(&problem.mesh, &triple.p);
    let target: Vec<f64> = pbar
        .iter()
        .zip(&gamma)
        .zip(&bounds)
        .map(|((pb, gm), (lo, hi))| (-pb / (problem.lam * gm)).max(*lo).min(*hi))
        .collect();
    Ok(p0_l2(&problem.mesh, &triple.g, &target))
}

/// One (δ, h) cell of the control sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSweepRow {
    pub delta: f64,
    pub h: f64,
    pub state_error: f64,
    pub control_l2_error: f64,
    /// |∫(g − g_ref) φ_m| for φ_m ∈ {1, x, sin πx}
    pub moment_errors: [f64; 3],
    pub failed: bool,
}

fn control_moments(mesh: &Mesh1D, g: &[f64]) -> [f64; 3] {
    let h = mesh.h();
    let tests: [fn(f64) -> f64; 3] = [|_| 1.0, |x| x, |x| (std::f64::consts::PI * x).sin()];
    let mut out = [0.0; 3];
    for (m, f) in tests.iter().enumerate() {
        out[m] = g
            .iter()
            .enumerate()
            .map(|(c, v)| v * gl8().mapped(c as f64 * h, (c + 1) as f64 * h).map(|(x, w)| w * f(x)).sum::<f64>())
            .sum();
    }
    out
}

/// Nonlocal optimal pairs for rescaled(base, δ) on each mesh, compared with
/// the local optimal pair on a reference mesh.
pub fn control_ac_sweep(
    template: &ControlProblem,
    base: &Kernel,
    deltas: &[f64],
    n_cells: &[usize],
    reference_cells: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<ControlSweepRow>, ControlError> {
    if n_cells.iter().any(|n| reference_cells % n != 0) {
        return Err(ControlError::Invalid("reference mesh must be a multiple of every sweep mesh".into()));
    }
    let nu = match &template.model {
        StateModel::Nonlocal { nu, .. } => *nu,
        StateModel::Local => 1.0,
    };
    let ref_mesh = Mesh1D::new(template.mesh.length, reference_cells)?;
    let reference = solve_optimal(&template.clone().with_mesh(ref_mesh).with_model(StateModel::Local), tol, max_iter)?;
    let ref_moments = control_moments(&ref_mesh, &reference.g);
    let cells: Vec<(f64, usize)> = deltas.iter().flat_map(|&d| n_cells.iter().map(move |&n| (d, n))).collect();
    cells
        .par_iter()
        .map(|&(delta, n)| {
            let mesh = Mesh1D::new(template.mesh.length, n)?;
            let kernel = Kernel::rescaled(base.clone(), delta).map_err(FemError::from)?;
            let problem = template.clone().with_mesh(mesh).with_model(StateModel::Nonlocal { kernel, nu });
            Ok(match solve_optimal(&problem, tol, max_iter) {
                Ok(t) => {
                    let m = control_moments(&mesh, &t.g);
                    ControlSweepRow {
                        delta,
                        h: mesh.h(),
                        state_error: crate::experiments::l2_difference(&mesh, &t.u, &ref_mesh, &reference.u),
                        control_l2_error: p0_l2_nested(&mesh, &t.g, &ref_mesh, &reference.g),
                        moment_errors: [0, 1, 2].map(|k| (m[k] - ref_moments[k]).abs()),
                        failed: false,
                    }
                }
                Err(ControlError::NonConvergence { .. }) => ControlSweepRow {
                    delta,
                    h: mesh.h(),
                    state_error: f64::NAN,
                    control_l2_error: f64::NAN,
                    moment_errors: [f64::NAN; 3],
                    failed: true,
                },
                Err(e) => return Err(e),
            })
        })
        .collect()
}
