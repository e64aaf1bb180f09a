//! Parameter sweeps for the asymptotic-compatibility and uniform Poincaré
//! studies, reported as rate tables.

use crate::fem1d::{assemble, assemble_local, poincare_constant, solve_state, Coefficient, FemError, Mesh1D};
use crate::kernels::{Kernel, KernelError};
use crate::quadrature::gl8;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("reference solve failed: {0}")]
    Reference(FemError),
    #[error("solve failed at param={param}, h={h}: {source}")]
    Cell { param: f64, h: f64, source: FemError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// One sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub param: f64,
    pub h: f64,
    pub error: f64,
}

/// Sweep results with fitted log-log orders.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub diagonal: Vec<RateRow>,
    /// (label, fitted order); labels are `diagonal`, `param` and `h@<param>`.
    pub orders: Vec<(String, f64)>,
}

impl RateTable {
    pub fn order(&self, label: &str) -> Option<f64> {
        self.orders.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }

    pub fn diagonal_trend(&self) -> Trend {
        Trend::of(&self.diagonal.iter().map(|r| r.error).collect::<Vec<_>>())
    }

    /// Rows sharing `param`, in increasing h-refinement order.
    pub fn row(&self, param: f64) -> Vec<RateRow> {
        self.rows.iter().copied().filter(|r| r.param == param).collect()
    }

    /// A row is converged in h once successive errors differ by < 1%.
    pub fn plateaued(&self, param: f64) -> bool {
        let r = self.row(param);
        r.len() >= 2 && {
            let (a, b) = (r[r.len() - 2].error, r[r.len() - 1].error);
            (a - b).abs() < 0.01 * a.max(b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
}

impl Trend {
    pub fn of(v: &[f64]) -> Trend {
        if v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else if v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else {
            Trend::Flat
        }
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Decreasing => "decreasing",
            Trend::Flat => "flat",
            Trend::Increasing => "increasing",
        })
    }
}

/// Least-squares slope of ln(error) against ln(param). Nonpositive errors
/// are skipped; fewer than two usable points give NaN.
pub fn estimate_rate(errors: &[f64], params: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .zip(params)
        .filter(|(e, p)| **e > 0.0 && **p > 0.0)
        .map(|(e, p)| (p.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

/// ‖u_a − u_b‖_{L²(Ω)} for P1 functions on nested uniform meshes.
pub fn l2_difference(mesh_a: &Mesh1D, u_a: &[f64], mesh_b: &Mesh1D, u_b: &[f64]) -> f64 {
    let fine = if mesh_a.n_cells >= mesh_b.n_cells { mesh_a } else { mesh_b };
    let h = fine.h();
    let mut s = 0.0;
    for c in 0..fine.n_cells {
        for (x, w) in gl8().mapped(c as f64 * h, (c + 1) as f64 * h) {
            let e = mesh_a.interpolate(u_a, x) - mesh_b.interpolate(u_b, x);
            s += w * e * e;
        }
    }
    s.sqrt()
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// What the sweep solutions are compared with.
#[derive(Clone)]
pub enum Reference {
    AnalyticLocal(ScalarFn),
    FineLocalFem { n_cells: usize },
    FineNonlocalFem { kernel: Kernel, n_cells: usize },
}

/// How the ladder parameter turns the base kernel into a sweep kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    /// rescaled(base, δ)
    Horizon,
    /// min_level(base, n)
    Level,
    /// the parameter is the Riesz exponent s; base supplies d
    RieszExponent,
}

#[derive(Clone)]
pub struct SweepConfig {
    pub base: Kernel,
    pub kind: LadderKind,
    pub ladder: Vec<f64>,
    /// number of cells per mesh; h = length / n
    pub n_cells: Vec<usize>,
    pub nu: f64,
    pub coef: Coefficient,
    pub rhs: ScalarFn,
    pub length: f64,
    pub reference: Reference,
}

impl SweepConfig {
    /// A = 1, f = 1 on (0, 1) with the analytic local solution x(1−x)/2.
    pub fn local_standard(base: Kernel, ladder: Vec<f64>, n_cells: Vec<usize>) -> Self {
        SweepConfig {
            base,
            kind: LadderKind::Horizon,
            ladder,
            n_cells,
            nu: 1.0,
            coef: Coefficient::Constant(1.0),
            rhs: Arc::new(|_| 1.0),
            length: 1.0,
            reference: Reference::AnalyticLocal(Arc::new(|x| 0.5 * x * (1.0 - x))),
        }
    }

    pub fn kernel_at(&self, param: f64) -> Result<Kernel, KernelError> {
        match self.kind {
            LadderKind::Horizon => Kernel::rescaled(self.base.clone(), param),
            LadderKind::Level => Kernel::min_level(self.base.clone(), param),
            LadderKind::RieszExponent => Kernel::riesz_truncated(self.base.dim(), param),
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.ladder.is_empty() || (self.ladder.len() > 1 && Trend::of(&self.ladder) == Trend::Flat) {
            return Err(ExperimentError::Config("parameter ladder must be strictly monotone".into()));
        }
        if self.n_cells.is_empty() || self.n_cells.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExperimentError::Config("meshes must be strictly refining".into()));
        }
        let finest = *self.n_cells.last().unwrap();
        let ref_n = match &self.reference {
            Reference::AnalyticLocal(_) => None,
            Reference::FineLocalFem { n_cells } | Reference::FineNonlocalFem { n_cells, .. } => Some(*n_cells),
        };
        if let Some(r) = ref_n {
            if r < 4 * finest || self.n_cells.iter().any(|n| r % n != 0) {
                return Err(ExperimentError::Config(format!(
                    "reference mesh ({r} cells) must be a multiple of every sweep mesh and at least 4x the finest ({finest})"
                )));
            }
        }
        Ok(())
    }
}

/// Galerkin solve on one mesh; returns the interior coefficients.
pub fn nonlocal_solution(kernel: &Kernel, cfg: &SweepConfig, mesh: &Mesh1D) -> Result<Vec<f64>, FemError> {
    let sys = assemble(kernel, cfg.nu, &cfg.coef, &*cfg.rhs, mesh)?;
    Ok(solve_state(&sys)?.as_slice().to_vec())
}

fn run_sweep(cfg: &SweepConfig) -> Result<RateTable, ExperimentError> {
    cfg.validate()?;
    let reference: Option<(Mesh1D, Vec<f64>)> = match &cfg.reference {
        Reference::AnalyticLocal(_) => None,
        Reference::FineLocalFem { n_cells } => {
            let mesh = Mesh1D::new(cfg.length, *n_cells).map_err(ExperimentError::Reference)?;
            let sys = assemble_local(&cfg.coef, &*cfg.rhs, &mesh).map_err(ExperimentError::Reference)?;
            let u = solve_state(&sys).map_err(ExperimentError::Reference)?;
            Some((mesh, u.as_slice().to_vec()))
        }
        Reference::FineNonlocalFem { kernel, n_cells } => {
            let mesh = Mesh1D::new(cfg.length, *n_cells).map_err(ExperimentError::Reference)?;
            let u = nonlocal_solution(kernel, cfg, &mesh).map_err(ExperimentError::Reference)?;
            Some((mesh, u))
        }
    };
    let cells: Vec<(f64, usize)> = cfg.ladder.iter().flat_map(|&p| cfg.n_cells.iter().map(move |&n| (p, n))).collect();
    let rows: Vec<RateRow> = cells
        .par_iter()
        .map(|&(param, n)| {
            let mesh = Mesh1D::new(cfg.length, n).map_err(ExperimentError::Reference)?;
            let h = mesh.h();
            let cell = |source| ExperimentError::Cell { param, h, source };
            let k = cfg.kernel_at(param)?;
            let u = nonlocal_solution(&k, cfg, &mesh).map_err(cell)?;
            let error = match (&cfg.reference, &reference) {
                (Reference::AnalyticLocal(f), _) => mesh.l2_error(&u, |x| f(x)),
                (_, Some((rm, ru))) => l2_difference(&mesh, &u, rm, ru),
                _ => unreachable!(),
            };
            Ok(RateRow { param, h, error })
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut table = RateTable { rows, ..Default::default() };
    if cfg.ladder.len() == cfg.n_cells.len() {
        let k = cfg.n_cells.len();
        table.diagonal = (0..k).map(|i| table.rows[i * k + i]).collect();
        let d = &table.diagonal;
        table.orders.push((
            "diagonal".into(),
            estimate_rate(&d.iter().map(|r| r.error).collect::<Vec<_>>(), &d.iter().map(|r| r.h).collect::<Vec<_>>()),
        ));
    }
    if cfg.n_cells.len() >= 3 {
        for &p in &cfg.ladder {
            let r = table.row(p);
            let o = estimate_rate(&r.iter().map(|r| r.error).collect::<Vec<_>>(), &r.iter().map(|r| r.h).collect::<Vec<_>>());
            table.orders.push((format!("h@{p}"), o));
        }
    }
    if cfg.ladder.len() >= 3 {
        let finest = cfg.length / *cfg.n_cells.last().unwrap() as f64;
        let col: Vec<RateRow> = table.rows.iter().copied().filter(|r| r.h == finest).collect();
        let o = estimate_rate(&col.iter().map(|r| r.error).collect::<Vec<_>>(), &col.iter().map(|r| r.param).collect::<Vec<_>>());
        table.orders.push(("param".into(), o));
    }
    Ok(table)
}

/// Nonlocal solutions for a horizon ladder compared with the local limit.
pub fn ac_local_sweep(cfg: &SweepConfig) -> Result<RateTable, ExperimentError> {
    if cfg.kind != LadderKind::Horizon {
        return Err(ExperimentError::Config("local sweep needs a horizon ladder".into()));
    }
    if matches!(cfg.reference, Reference::FineNonlocalFem { .. }) {
        return Err(ExperimentError::Config("local sweep needs a local reference".into()));
    }
    run_sweep(cfg)
}

/// Solutions for a kernel sequence w_n → w compared with a fine-mesh w solve.
pub fn ac_nonlocal_sweep(cfg: &SweepConfig) -> Result<RateTable, ExperimentError> {
    if cfg.kind == LadderKind::Horizon {
        return Err(ExperimentError::Config("nonlocal sweep needs a level or exponent ladder".into()));
    }
    if !matches!(cfg.reference, Reference::FineNonlocalFem { .. }) {
        return Err(ExperimentError::Config("nonlocal sweep needs a fine nonlocal reference".into()));
    }
    run_sweep(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareRow {
    pub param: f64,
    pub h: f64,
    pub cp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareTable {
    pub rows: Vec<PoincareRow>,
    pub cap: f64,
    pub max_cp: f64,
    /// every value ≤ cap and the last two values differ by < 5%
    pub pass: bool,
}

impl PoincareTable {
    fn new(rows: Vec<PoincareRow>, cap: f64) -> Self {
        let max_cp = rows.iter().map(|r| r.cp).fold(0.0, f64::max);
        let stable = rows.len() < 2 || {
            let (a, b) = (rows[rows.len() - 2].cp, rows[rows.len() - 1].cp);
            (a - b).abs() < 0.05 * a.max(b)
        };
        PoincareTable { pass: max_cp <= cap && stable, rows, cap, max_cp }
    }
}

/// C_P for each kernel of a ladder on one mesh of (0, length).
pub fn poincare_sweep(
    base: &Kernel,
    kind: LadderKind,
    ladder: &[f64],
    nu: f64,
    mesh: &Mesh1D,
    cap: f64,
) -> Result<PoincareTable, ExperimentError> {
    let cfg = SweepConfig {
        base: base.clone(),
        kind,
        ladder: ladder.to_vec(),
        n_cells: vec![mesh.n_cells],
        nu,
        coef: Coefficient::Constant(1.0),
        rhs: Arc::new(|_| 0.0),
        length: mesh.length,
        reference: Reference::AnalyticLocal(Arc::new(|_| 0.0)),
    };
    let rows = ladder
        .par_iter()
        .map(|&param| {
            let k = cfg.kernel_at(param)?;
            let cell = |source| ExperimentError::Cell { param, h: mesh.h(), source };
            let sys = assemble(&k, nu, &cfg.coef, &|_| 0.0, mesh).map_err(cell)?;
            let cp = poincare_constant(&sys).map_err(cell)?;
            Ok(PoincareRow { param, h: mesh.h(), cp })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(PoincareTable::new(rows, cap))
}

/// C_P(h) of the local P1 discretization on (0, length); param holds h.
pub fn local_poincare_sweep(length: f64, n_cells: &[usize], cap: f64) -> Result<PoincareTable, ExperimentError> {
    let rows = n_cells
        .iter()
        .map(|&n| {
            let mesh = Mesh1D::new(length, n).map_err(ExperimentError::Reference)?;
            let sys = assemble_local(&Coefficient::Constant(1.0), &|_| 0.0, &mesh).map_err(ExperimentError::Reference)?;
            let cp = poincare_constant(&sys).map_err(ExperimentError::Reference)?;
            Ok(PoincareRow { param: mesh.h(), h: mesh.h(), cp })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(PoincareTable::new(rows, cap))
}
