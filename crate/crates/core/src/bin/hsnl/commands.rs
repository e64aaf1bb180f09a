//! Subcommands: each declares its keys with defaults, runs, and writes its
//! data files. The returned string is the one-line stdout summary.

use crate::config::{fmt_f64, parse_f64, CliError, RawArgs, Result, RunConfig};
use crate::errors;
use hsnl::control::{solve_optimal_from, ControlProblem, StateModel};
use hsnl::experiments::{
    ac_local_sweep, ac_nonlocal_sweep, estimate_rate, local_poincare_sweep, poincare_sweep, LadderKind, Reference,
    ScalarFn, SweepConfig,
};
use hsnl::fem1d::{assemble, assemble_local, solve_state, Coefficient, Mesh1D};
use hsnl::kernels::Kernel;
use hsnl::operators::{localization_study, Bump, Norm};
use hsnl::symbols::{
    appendix_limit_table, check_cutoff_perturbation, check_eta_bound, check_hermitian, check_integrable_bound,
    check_linear_bound, check_lower_bound_large_xi, check_lower_bound_small_xi, first_row_formula, log_grid,
    ortho_basis, standard_grid_1d, standard_grid_2d, symbol_grid, BoundReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

type Schema = Vec<(&'static str, &'static str)>;

pub const COMMANDS: &[&str] =
    &["symbol", "bounds", "localize", "solve", "poincare", "ac", "control", "appendix", "basis", "validate"];

fn kernel_keys(family: &'static str, scale: &'static str) -> Schema {
    vec![
        ("kernel.family", family),
        ("kernel.d", "1"),
        ("kernel.s", "0.5"),
        ("kernel.delta", "0.1"),
        ("kernel.level", "16"),
        ("kernel.base", "riesz_truncated"),
        ("kernel.scale", scale),
        ("kernel.cutoff", "0"),
        ("kernel.normalize", "true"),
    ]
}

fn schema(command: &str) -> Option<Schema> {
    let mut s = match command {
        "symbol" => {
            let mut s = kernel_keys("constant_ball", "1");
            s.extend([("nu", "1"), ("xi", "0.01,0.1,1,10,100"), ("grid", "")]);
            s
        }
        "bounds" => {
            let mut s = kernel_keys("riesz_truncated", "1");
            s.extend([("nu", "1"), ("taus", "0.1,0.01,0.001"), ("large_n", "1"), ("large_eps", "1")]);
            s
        }
        "localize" => {
            let mut s = kernel_keys("constant_ball", "1");
            s.extend([
                ("nu", "1"),
                ("deltas", "0.2,0.1,0.05,0.025"),
                ("norm", "linf"),
                ("samples", "2001"),
                ("bump.center", "0"),
                ("bump.radius", "1"),
            ]);
            s
        }
        "solve" => {
            let mut s = kernel_keys("constant_ball", "0.1");
            s.extend([
                ("model", "nonlocal"),
                ("nu", "1"),
                ("n", "64"),
                ("length", "1"),
                ("coef", "const:1"),
                ("rhs", "const:1"),
            ]);
            s
        }
        "poincare" => {
            let mut s = kernel_keys("constant_ball", "1");
            s.extend([
                ("ladder", "horizon"),
                ("deltas", "0.2,0.1,0.05,0.025"),
                ("levels", "4,16,64,256"),
                ("ns", "16,32,64,128,256"),
                ("n", "256"),
                ("length", "1"),
                ("nu", "1"),
                ("cap", "0.5"),
            ]);
            s
        }
        "ac" => {
            let mut s = kernel_keys("constant_ball", "1");
            s.extend([
                ("mode", "local"),
                ("deltas", "0.2,0.1,0.05,0.025"),
                ("levels", "4,16,64,256"),
                ("hs", "1/16,1/32,1/64,1/128"),
                ("ref_n", "0"),
                ("length", "1"),
                ("nu", "1"),
                ("coef", "const:1"),
                ("rhs", "const:1"),
            ]);
            s
        }
        "control" => {
            let mut s = kernel_keys("constant_ball", "1");
            s.extend([
                ("udes", "parabola"),
                ("udes.scale", "1"),
                ("alpha", "-10"),
                ("beta", "10"),
                ("lam", "0.01"),
                ("gamma", "const:1"),
                ("delta", "0.01"),
                ("nu", "1"),
                ("n", "32"),
                ("tol", "1e-10"),
                ("max_iter", "20000"),
                ("start", "zero"),
            ]);
            s
        }
        "appendix" => vec![("deltas", "1e-1,1e-2,1e-3")],
        "basis" => vec![("mu", "0.6,0.8"), ("count", "0"), ("d", "3")],
        "validate" => kernel_keys("riesz_truncated", "1"),
        _ => return None,
    };
    s.sort();
    Some(s)
}

pub fn run(raw: RawArgs) -> Result<String> {
    let schema = schema(&raw.command).ok_or_else(|| {
        CliError::Config(format!("unknown subcommand '{}'; expected one of {}", raw.command, COMMANDS.join(", ")))
    })?;
    let cfg = RunConfig::resolve(raw, &schema)?;
    let body = || match cfg.command.as_str() {
        "symbol" => symbol(&cfg),
        "bounds" => bounds(&cfg),
        "localize" => localize(&cfg),
        "solve" => solve(&cfg),
        "poincare" => poincare(&cfg),
        "ac" => ac(&cfg),
        "control" => control(&cfg),
        "appendix" => appendix(&cfg),
        "basis" => basis(&cfg),
        "validate" => validate(&cfg),
        _ => unreachable!(),
    };
    match cfg.threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Writes header + data to `path`, or to stdout when no path is set.
fn emit(cfg: &RunConfig, path: Option<&Path>, data: &str) -> Result<()> {
    let text = format!("{}{}", cfg.header(), data);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_out(cfg: &RunConfig, data: &str) -> Result<()> {
    emit(cfg, cfg.out().map(Path::new), data)
}

fn base_family(name: &str, d: usize, cfg: &RunConfig) -> Result<Kernel> {
    let k = match name {
        "constant_ball" => Kernel::constant_ball(d),
        "riesz_truncated" => Kernel::riesz_truncated(d, cfg.f64("kernel.s")?),
        "fractional_vanishing" => Kernel::fractional_vanishing(d, cfg.f64("kernel.delta")?),
        "log_regularized" => Kernel::log_regularized(d, cfg.f64("kernel.delta")?),
        "log_truncated" => Kernel::log_truncated(d, cfg.f64("kernel.delta")?),
        other => {
            return Err(CliError::Config(format!(
                "kernel family '{other}' unknown; expected constant_ball, riesz_truncated, fractional_vanishing, \
                 log_regularized, log_truncated or min_level"
            )))
        }
    };
    let k = k.map_err(errors::kernel)?;
    if cfg.bool("kernel.normalize")? {
        k.normalize_first_moment().map_err(errors::kernel)
    } else {
        Ok(k)
    }
}

/// family (normalized if asked) → min_level → rescaled → cutoff.
fn build_kernel(cfg: &RunConfig) -> Result<Kernel> {
    let d = cfg.usize("kernel.d")?;
    let family = cfg.str("kernel.family");
    let mut k = if family == "min_level" {
        let base = base_family(cfg.str("kernel.base"), d, cfg)?;
        Kernel::min_level(base, cfg.f64("kernel.level")?).map_err(errors::kernel)?
    } else {
        base_family(family, d, cfg)?
    };
    let scale = cfg.f64("kernel.scale")?;
    if scale != 1.0 {
        k = Kernel::rescaled(k, scale).map_err(errors::kernel)?;
    }
    let cut = cfg.f64("kernel.cutoff")?;
    if cut > 0.0 {
        k = Kernel::cutoff(k, cut).map_err(errors::kernel)?;
    }
    Ok(k)
}

fn direction(cfg: &RunConfig, d: usize) -> Result<Vec<f64>> {
    let nu = cfg.f64_list("nu")?;
    if nu.len() != d {
        return Err(CliError::Config(format!("nu has {} components, kernel dimension is {d}", nu.len())));
    }
    Ok(nu)
}

fn scalar_nu(cfg: &RunConfig) -> Result<f64> {
    let nu = cfg.f64("nu")?;
    if nu == 1.0 || nu == -1.0 {
        Ok(nu)
    } else {
        Err(CliError::Config(format!("nu must be +1 or -1, got {nu}")))
    }
}

/// `const:c` or `func:name`.
fn named_function(key: &str, spec: &str, table: &[(&str, fn(f64) -> f64)]) -> Result<ScalarFn> {
    if let Some(c) = spec.strip_prefix("const:") {
        let c = parse_f64(c).map_err(|m| CliError::Config(format!("{key}: {m}")))?;
        return Ok(Arc::new(move |_| c));
    }
    if let Some(name) = spec.strip_prefix("func:") {
        if let Some((_, f)) = table.iter().find(|(n, _)| *n == name) {
            let f = *f;
            return Ok(Arc::new(f));
        }
        let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Config(format!("{key}: unknown function '{name}'; known: {}", names.join(", "))));
    }
    Err(CliError::Config(format!("{key}: expected const:<c> or func:<name>, got '{spec}'")))
}

const COEF_FUNCS: &[(&str, fn(f64) -> f64)] =
    &[("smooth", |x| 1.0 + 0.5 * (2.0 * PI * x).sin()), ("linear", |x| 1.0 + x)];
const RHS_FUNCS: &[(&str, fn(f64) -> f64)] =
    &[("sine", |x| PI * PI * (PI * x).sin()), ("linear", |x| x), ("step", |x| if x < 0.5 { 1.0 } else { -1.0 })];
const UDES_FUNCS: &[(&str, fn(f64) -> f64)] = &[
    ("zero", |_| 0.0),
    ("parabola", |x| 0.5 * x * (1.0 - x)),
    ("sine", |x| (PI * x).sin()),
    ("step", |x| if x < 0.5 { 1.0 } else { 0.0 }),
];

fn coefficient(cfg: &RunConfig) -> Result<Coefficient> {
    let spec = cfg.str("coef");
    if let Some(c) = spec.strip_prefix("const:") {
        return Ok(Coefficient::Constant(parse_f64(c).map_err(|m| CliError::Config(format!("coef: {m}")))?));
    }
    let f = named_function("coef", spec, COEF_FUNCS)?;
    Ok(Coefficient::function(move |x| f(x)))
}

fn node_csv(mesh: &Mesh1D, interior: &[f64]) -> String {
    let mut s = String::from("x,u\n");
    let n = mesh.n_cells;
    for i in 0..=n {
        let u = if i == 0 || i == n { 0.0 } else { interior[i - 1] };
        let _ = writeln!(s, "{},{}", fmt_f64(mesh.node(i)), fmt_f64(u));
    }
    s
}

fn symbol(cfg: &RunConfig) -> Result<String> {
    let k = build_kernel(cfg)?;
    let d = k.dim();
    let nu = direction(cfg, d)?;
    let grid: Vec<Vec<f64>> = if cfg.str("grid").is_empty() {
        cfg.str("xi")
            .split(',')
            .map(|item| {
                let xi: Vec<f64> = item
                    .split(':')
                    .map(|t| parse_f64(t).map_err(|m| CliError::Config(format!("xi: {m}"))))
                    .collect::<Result<_>>()?;
                if xi.len() != d {
                    return Err(CliError::Config(format!("xi: '{item}' needs {d} components separated by ':'")));
                }
                Ok(xi)
            })
            .collect::<Result<_>>()?
    } else {
        let parts: Vec<&str> = cfg.str("grid").split(':').collect();
        let bad = || CliError::Config("grid: expected log:<lo>:<hi>:<count>".into());
        if parts.len() != 4 || parts[0] != "log" {
            return Err(bad());
        }
        let lo = parse_f64(parts[1]).map_err(|_| bad())?;
        let hi = parse_f64(parts[2]).map_err(|_| bad())?;
        let n: usize = parts[3].parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && n > 0) {
            return Err(bad());
        }
        log_grid(lo, hi, n).into_iter().map(|m| nu.iter().map(|v| v * m).collect()).collect()
    };
    let vals = symbol_grid(&k, &nu, &grid).map_err(errors::symbol)?;
    let mut s = String::new();
    let cols: Vec<String> = ["xi", "re", "im"].iter().flat_map(|p| (1..=d).map(move |i| format!("{p}_{i}"))).collect();
    let _ = writeln!(s, "{}", cols.join(","));
    let mut peak: f64 = 0.0;
    for v in &vals {
        peak = peak.max(v.norm());
        let row: Vec<String> = v
            .xi
            .iter()
            .copied()
            .chain(v.value.iter().map(|c| c.re))
            .chain(v.value.iter().map(|c| c.im))
            .map(fmt_f64)
            .collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    emit_out(cfg, &s)?;
    Ok(format!("points={},max_abs={}", vals.len(), fmt_f64(peak)))
}

fn bounds(cfg: &RunConfig) -> Result<String> {
    let k = build_kernel(cfg)?;
    let d = k.dim();
    let nu = direction(cfg, d)?;
    let grid = if d == 1 { standard_grid_1d() } else { standard_grid_2d() };
    let taus = cfg.f64_list("taus")?;
    let mut reports: Vec<BoundReport> = vec![check_linear_bound(&k, &nu, &grid).map_err(errors::symbol)?];
    if let Ok(r) = check_integrable_bound(&k, &nu, &grid) {
        reports.push(r);
    }
    reports.push(check_eta_bound(&taus, &nu, &grid, d).map_err(errors::symbol)?);
    reports.push(check_cutoff_perturbation(&k, &nu, &grid).map_err(errors::symbol)?);
    reports.push(check_hermitian(&k, &nu, &grid).map_err(errors::symbol)?);
    reports.push(check_lower_bound_small_xi(&k, &nu).map_err(errors::symbol)?);
    let (n, eps) = (cfg.f64("large_n")?, cfg.f64("large_eps")?);
    reports.push(check_lower_bound_large_xi(&k, &nu, n, eps).map_err(errors::symbol)?);
    let mut s = String::from("name,grid_min,grid_max,margin,pass\n");
    let mut failures = 0;
    for r in &reports {
        let pass = if r.informational {
            "info"
        } else if r.pass {
            "true"
        } else {
            failures += 1;
            "false"
        };
        let _ = writeln!(s, "{},{},{},{},{}", r.name, fmt_f64(r.grid_min()), fmt_f64(r.grid_max()), fmt_f64(r.margin), pass);
    }
    emit_out(cfg, &s)?;
    Ok(format!("reports={},failures={failures}", reports.len()))
}

fn localize(cfg: &RunConfig) -> Result<String> {
    let k = build_kernel(cfg)?;
    let nu = scalar_nu(cfg)?;
    let deltas = cfg.f64_list("deltas")?;
    let norm = match cfg.str("norm") {
        "l2" => Norm::L2,
        "linf" => Norm::LInf,
        other => return Err(CliError::Config(format!("norm: expected l2 or linf, got '{other}'"))),
    };
    let u = Bump::new(vec![cfg.f64("bump.center")?], cfg.f64("bump.radius")?);
    let table = localization_study(&k, nu, &u, &deltas, norm, cfg.usize("samples")?).map_err(errors::operator)?;
    let mut s = String::from("delta,error,rate\n");
    for (i, r) in table.rows.iter().enumerate() {
        let rate = if i == 0 {
            f64::NAN
        } else {
            let p = &table.rows[i - 1];
            (r.error / p.error).ln() / (r.param / p.param).ln()
        };
        let _ = writeln!(s, "{},{},{}", fmt_f64(r.param), fmt_f64(r.error), fmt_f64(rate));
    }
    emit_out(cfg, &s)?;
    let errs: Vec<f64> = table.rows.iter().map(|r| r.error).collect();
    Ok(format!(
        "rate={},trend={}",
        fmt_f64(estimate_rate(&errs, &deltas)),
        hsnl::experiments::Trend::of(&errs)
    ))
}

fn solve(cfg: &RunConfig) -> Result<String> {
    let mesh = Mesh1D::new(cfg.f64("length")?, cfg.usize("n")?).map_err(errors::fem)?;
    let coef = coefficient(cfg)?;
    let rhs = named_function("rhs", cfg.str("rhs"), RHS_FUNCS)?;
    let f = move |x: f64| rhs(x);
    let sys = match cfg.str("model") {
        "nonlocal" => {
            let k = build_kernel(cfg)?;
            assemble(&k, scalar_nu(cfg)?, &coef, &f, &mesh).map_err(errors::fem)?
        }
        "local" => assemble_local(&coef, &f, &mesh).map_err(errors::fem)?,
        other => return Err(CliError::Config(format!("model: expected nonlocal or local, got '{other}'"))),
    };
    let u = solve_state(&sys).map_err(errors::fem)?;
    emit_out(cfg, &node_csv(&mesh, u.as_slice()))?;
    Ok(format!(
        "dofs={},residual={},energy={}",
        mesh.dofs(),
        fmt_f64(sys.galerkin_residual(&u)),
        fmt_f64(sys.energy_norm(&u))
    ))
}

fn poincare(cfg: &RunConfig) -> Result<String> {
    let length = cfg.f64("length")?;
    let cap = cfg.f64("cap")?;
    let table = match cfg.str("ladder") {
        "local" => local_poincare_sweep(length, &cfg.usize_list("ns")?, cap).map_err(errors::experiment)?,
        kind => {
            let (kind, ladder) = match kind {
                "horizon" => (LadderKind::Horizon, cfg.f64_list("deltas")?),
                "level" => (LadderKind::Level, cfg.f64_list("levels")?),
                other => {
                    return Err(CliError::Config(format!("ladder: expected horizon, level or local, got '{other}'")))
                }
            };
            let mesh = Mesh1D::new(length, cfg.usize("n")?).map_err(errors::fem)?;
            poincare_sweep(&build_kernel(cfg)?, kind, &ladder, scalar_nu(cfg)?, &mesh, cap).map_err(errors::experiment)?
        }
    };
    let mut s = String::from("delta,h,cp\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{}", fmt_f64(r.param), fmt_f64(r.h), fmt_f64(r.cp));
    }
    emit_out(cfg, &s)?;
    let mut summary = format!("max_cp={},pass={}", fmt_f64(table.max_cp), table.pass);
    if cfg.str("ladder") == "local" {
        let gaps: Vec<f64> = table.rows.iter().map(|r| (r.cp - length / PI).abs()).collect();
        let hs: Vec<f64> = table.rows.iter().map(|r| r.h).collect();
        let _ = write!(summary, ",rate={}", fmt_f64(estimate_rate(&gaps, &hs)));
    }
    Ok(summary)
}

fn mesh_counts(cfg: &RunConfig, length: f64) -> Result<Vec<usize>> {
    cfg.f64_list("hs")?
        .into_iter()
        .map(|h| {
            let n = (length / h).round();
            if !(h > 0.0) || n < 1.0 || (n * h - length).abs() > 1e-9 * length {
                return Err(CliError::Config(format!("hs: {h} does not divide the length {length}")));
            }
            Ok(n as usize)
        })
        .collect()
}

fn ac(cfg: &RunConfig) -> Result<String> {
    let length = cfg.f64("length")?;
    let n_cells = mesh_counts(cfg, length)?;
    let base = build_kernel(cfg)?;
    let coef = coefficient(cfg)?;
    let rhs = named_function("rhs", cfg.str("rhs"), RHS_FUNCS)?;
    let finest = n_cells.iter().copied().max().unwrap_or(1);
    let ref_n = match cfg.usize("ref_n")? {
        0 => 4 * finest,
        n => n,
    };
    let standard = cfg.str("coef") == "const:1" && cfg.str("rhs") == "const:1" && length == 1.0;
    let (kind, ladder, reference) = match cfg.str("mode") {
        "local" => {
            let reference = if standard {
                Reference::AnalyticLocal(Arc::new(|x| 0.5 * x * (1.0 - x)))
            } else {
                Reference::FineLocalFem { n_cells: ref_n }
            };
            (LadderKind::Horizon, cfg.f64_list("deltas")?, reference)
        }
        "nonlocal" => (
            LadderKind::Level,
            cfg.f64_list("levels")?,
            Reference::FineNonlocalFem { kernel: base.clone(), n_cells: ref_n },
        ),
        other => return Err(CliError::Config(format!("mode: expected local or nonlocal, got '{other}'"))),
    };
    let sweep = SweepConfig { base, kind, ladder, n_cells, nu: scalar_nu(cfg)?, coef, rhs, length, reference };
    let table = match kind {
        LadderKind::Horizon => ac_local_sweep(&sweep),
        _ => ac_nonlocal_sweep(&sweep),
    }
    .map_err(errors::experiment)?;
    let mut s = String::from("param,h,l2_error\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{}", fmt_f64(r.param), fmt_f64(r.h), fmt_f64(r.error));
    }
    emit_out(cfg, &s)?;
    if table.diagonal.is_empty() {
        return Ok("diagonal_trend=none".into());
    }
    Ok(format!(
        "diagonal_trend={},diagonal_order={}",
        table.diagonal_trend(),
        fmt_f64(table.order("diagonal").unwrap_or(f64::NAN))
    ))
}

fn control(cfg: &RunConfig) -> Result<String> {
    let mesh = Mesh1D::unit(cfg.usize("n")?).map_err(errors::fem)?;
    let scale = cfg.f64("udes.scale")?;
    let udes_name = cfg.str("udes");
    let shape = UDES_FUNCS
        .iter()
        .find(|(n, _)| *n == udes_name)
        .map(|(_, f)| *f)
        .ok_or_else(|| CliError::Config(format!("udes: unknown target '{udes_name}'")))?;
    let u_des: ScalarFn = Arc::new(move |x| scale * shape(x));
    let delta = cfg.f64("delta")?;
    let model = if delta == 0.0 {
        StateModel::Local
    } else {
        let k = Kernel::rescaled(build_kernel(cfg)?, delta).map_err(errors::kernel)?;
        StateModel::Nonlocal { kernel: k, nu: scalar_nu(cfg)? }
    };
    let (alpha, beta) = (cfg.f64("alpha")?, cfg.f64("beta")?);
    let gamma = named_function("gamma", cfg.str("gamma"), &[])?;
    let problem = ControlProblem::tracking(mesh, model, u_des, alpha, beta, cfg.f64("lam")?).with_gamma(gamma);
    let start: Vec<f64> = match cfg.str("start") {
        "zero" => vec![0.0; mesh.n_cells],
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
            let bounds = problem.cell_bounds().map_err(errors::control)?;
            bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect()
        }
        other => return Err(CliError::Config(format!("start: expected zero or random, got '{other}'"))),
    };
    let triple =
        solve_optimal_from(&problem, &start, cfg.f64("tol")?, cfg.usize("max_iter")?).map_err(errors::control)?;
    let dir = PathBuf::from(cfg.out().unwrap_or("."));
    std::fs::create_dir_all(&dir)?;
    emit(cfg, Some(&dir.join("state.csv")), &node_csv(&mesh, &triple.u))?;
    let mut s = String::from("cell,g\n");
    for (c, g) in triple.g.iter().enumerate() {
        let _ = writeln!(s, "{c},{}", fmt_f64(*g));
    }
    emit(cfg, Some(&dir.join("control.csv")), &s)?;
    Ok(format!(
        "objective={},residual={},iters={}",
        fmt_f64(triple.objective_value),
        fmt_f64(triple.residual),
        triple.iterations
    ))
}

fn appendix(cfg: &RunConfig) -> Result<String> {
    let rows = appendix_limit_table(&cfg.f64_list("deltas")?).map_err(errors::symbol)?;
    let mut s = String::from("delta,sin_integral,cos_integral,sin_integral_unit,cos_integral_unit\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(r.delta),
            fmt_f64(r.sin_integral),
            fmt_f64(r.cos_integral),
            fmt_f64(r.sin_integral_unit),
            fmt_f64(r.cos_integral_unit)
        );
    }
    emit_out(cfg, &s)?;
    let last = rows.last().ok_or_else(|| CliError::Config("deltas: empty list".into()))?;
    Ok(format!(
        "rows={},sin_gap={},cos_gap={}",
        rows.len(),
        fmt_f64((last.sin_integral - 2.0 * PI).abs()),
        fmt_f64(last.cos_integral.abs())
    ))
}

fn basis(cfg: &RunConfig) -> Result<String> {
    let count = cfg.usize("count")?;
    if count == 0 {
        let mut mu = cfg.f64_list("mu")?;
        let n = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(CliError::Config("mu: zero vector".into()));
        }
        mu.iter_mut().for_each(|x| *x /= n);
        let b = ortho_basis(&mu).map_err(errors::symbol)?;
        let d = b.dim();
        let mut s = String::from("column");
        for i in 1..=d {
            let _ = write!(s, ",x_{i}");
        }
        s.push('\n');
        for (k, col) in b.columns.iter().enumerate() {
            let vals: Vec<String> = col.iter().copied().map(fmt_f64).collect();
            let _ = writeln!(s, "{},{}", k + 1, vals.join(","));
        }
        emit_out(cfg, &s)?;
        return Ok(format!("d={d},defect={}", fmt_f64(b.orthonormality_defect())));
    }
    let d = cfg.usize("d")?;
    if d < 2 {
        return Err(CliError::Config("d: need at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
    let mut s = String::from("sample,defect,formula_error\n");
    let (mut worst_defect, mut worst_formula): (f64, f64) = (0.0, 0.0);
    for i in 0..count {
        let mu = loop {
            let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            v[0] = v[0].abs();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 && v[0] / n > 1e-6 {
                v.iter_mut().for_each(|x| *x /= n);
                break v;
            }
        };
        let b = ortho_basis(&mu).map_err(errors::symbol)?;
        let defect = b.orthonormality_defect();
        let formula = (1..d).map(|k| (b.columns[k - 1][0] - first_row_formula(&mu, k)).abs()).fold(0.0, f64::max);
        worst_defect = worst_defect.max(defect);
        worst_formula = worst_formula.max(formula);
        let _ = writeln!(s, "{i},{},{}", fmt_f64(defect), fmt_f64(formula));
    }
    emit_out(cfg, &s)?;
    Ok(format!("samples={count},max_defect={},max_formula_error={}", fmt_f64(worst_defect), fmt_f64(worst_formula)))
}

fn validate(cfg: &RunConfig) -> Result<String> {
    let k = build_kernel(cfg)?;
    let r = k.validate_assumptions();
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "inf".into());
    let flag = |v: Option<bool>| v.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into());
    let mut s = String::new();
    let _ = writeln!(s, "family={}", k.family_name());
    let _ = writeln!(s, "d={}", k.dim());
    let _ = writeln!(s, "c_norm={}", fmt_f64(k.c_norm()));
    let _ = writeln!(s, "nonnegative={}", r.nonnegative);
    let _ = writeln!(s, "m1={}", opt(r.m1));
    let _ = writeln!(s, "m2={}", opt(r.m2));
    let _ = writeln!(s, "m1_ok={}", r.m1_ok);
    let _ = writeln!(s, "m2_ok={}", r.m2_ok);
    let _ = writeln!(s, "monotone={}", flag(r.monotone));
    let _ = writeln!(s, "ladder_ok={}", flag(r.ladder_ok));
    for row in &r.ladder {
        let _ = writeln!(
            s,
            "ladder.delta={},tail_mass={},first_moment={},second_moment={}",
            fmt_f64(row.delta),
            fmt_f64(row.tail_mass),
            fmt_f64(row.first_moment),
            fmt_f64(row.second_moment)
        );
    }
    emit_out(cfg, &s)?;
    if !r.standing_ok() {
        return Err(CliError::Config(format!("kernel {} violates the standing assumptions", k.family_name())));
    }
    Ok("standing=pass".into())
}
