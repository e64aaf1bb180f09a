use hsnl::fem1d::{
    assemble, assemble_local, hat_gradient, load_vector, mass_matrix, poincare_constant, solve_state, Coefficient,
    FemError, Mesh1D,
};
use hsnl::kernels::Kernel;
use hsnl::operators::{gradient_pointwise, FnField, Support};
use hsnl::quadrature::{adaptive, QuadratureSpec};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn hat(mesh: &Mesh1D, i: usize) -> FnField {
    let (c, h) = (mesh.node(i), mesh.h());
    FnField::new(
        1,
        move |x| (1.0 - (x[0] - c).abs() / h).max(0.0),
        move |x| {
            let t = x[0] - c;
            vec![if t.abs() >= h { 0.0 } else if t < 0.0 { 1.0 / h } else { -1.0 / h }]
        },
        Some(1.0 / h),
        Support::Ball { center: vec![c], radius: h },
    )
    .with_kinks(vec![c - h, c, c + h])
}

fn spec() -> QuadratureSpec {
    QuadratureSpec { rel: 1e-12, abs: 1e-13, max_panels: 1 << 14 }
}

/// B_ij = ∫ A Gφ_i Gφ_j with Gφ from the pointwise ray integral and the outer
/// integral by adaptive Gauss–Kronrod.
fn brute_force_stiffness(kernel: &Kernel, nu: f64, a: &dyn Fn(f64) -> f64, mesh: &Mesh1D) -> Vec<Vec<f64>> {
    let n = mesh.dofs();
    let r = kernel.support_radius().unwrap();
    let hats: Vec<FnField> = (1..=n).map(|i| hat(mesh, i)).collect();
    let mut breaks = Vec::new();
    for k in 0..=mesh.n_cells {
        let x = mesh.node(k);
        breaks.extend([x, x - nu * r]);
    }
    let (lo, hi) = (-r, mesh.length + r);
    let outer = QuadratureSpec { rel: 1e-11, abs: 1e-12, max_panels: 1 << 12 };
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let f = |x: f64| {
                let gi = gradient_pointwise(kernel, &[nu], &hats[i], &[x], &spec()).unwrap()[0];
                if gi == 0.0 {
                    return 0.0;
                }
                a(x) * gi * gradient_pointwise(kernel, &[nu], &hats[j], &[x], &spec()).unwrap()[0]
            };
            let v = adaptive(f, lo, hi, &breaks, &outer).unwrap().value;
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    b
}

fn unit_ball(delta: f64) -> Kernel {
    Kernel::rescaled(Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap(), delta).unwrap()
}

#[test]
fn stiffness_matches_brute_force_assembly() {
    let mesh = Mesh1D::unit(8).unwrap();
    let smooth = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let cases: Vec<(Kernel, f64, Coefficient, Box<dyn Fn(f64) -> f64>)> = vec![
        (unit_ball(0.3), 1.0, Coefficient::Constant(1.0), Box::new(|_| 1.0)),
        (unit_ball(0.05), -1.0, Coefficient::function(smooth), Box::new(smooth)),
        (
            Kernel::rescaled(Kernel::riesz_truncated(1, 0.5).unwrap(), 0.2).unwrap(),
            -1.0,
            Coefficient::Constant(2.0),
            Box::new(|_| 2.0),
        ),
        (Kernel::riesz_truncated(1, 0.5).unwrap(), 1.0, Coefficient::function(smooth), Box::new(smooth)),
    ];
    for (k, nu, coef, a) in cases {
        let sys = assemble(&k, nu, &coef, &|_| 0.0, &mesh).unwrap();
        let oracle = brute_force_stiffness(&k, nu, &*a, &mesh);
        for i in 0..mesh.dofs() {
            for j in 0..mesh.dofs() {
                let d = (sys.stiffness[(i, j)] - oracle[i][j]).abs();
                assert!(d <= 1e-8 * (1.0 + oracle[i][j].abs()), "{} nu={nu} ({i},{j}): {d:e}", k.family_name());
            }
        }
    }
}

#[test]
fn hat_gradient_matches_pointwise() {
    let mesh = Mesh1D::unit(16).unwrap();
    for (k, nu) in [(unit_ball(0.05), 1.0), (Kernel::riesz_truncated(1, 0.3).unwrap(), -1.0)] {
        let i = 7;
        let f = hat(&mesh, i);
        for j in 0..60 {
            let x = -0.2 + 1.4 * j as f64 / 59.0;
            let a = hat_gradient(&k, nu, &mesh, i, x).unwrap();
            let b = gradient_pointwise(&k, &[nu], &f, &[x], &spec()).unwrap()[0];
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn hat_gradient_support_and_partition_of_unity() {
    let mesh = Mesh1D::unit(16).unwrap();
    let k = unit_ball(0.1);
    // ν = +1 looks right: zero left of x_{i−1} − R and right of x_{i+1}
    assert_eq!(hat_gradient(&k, 1.0, &mesh, 5, mesh.node(4) - 0.1 - 1e-9).unwrap(), 0.0);
    assert_eq!(hat_gradient(&k, 1.0, &mesh, 5, mesh.node(6) + 1e-9).unwrap(), 0.0);
    // Σ φ_i ≡ 1 on [h, 1 − h]
    for x in [0.2, 0.5, 0.7] {
        let s: f64 = (1..mesh.n_cells).map(|i| hat_gradient(&k, 1.0, &mesh, i, x).unwrap()).sum();
        assert!(s.abs() < 1e-13, "{s}");
    }
}

#[test]
fn local_system_closed_forms() {
    let mesh = Mesh1D::unit(10).unwrap();
    let sys = assemble_local(&Coefficient::Constant(1.0), &|_| 1.0, &mesh).unwrap();
    let h = mesh.h();
    for i in 0..mesh.dofs() {
        for j in 0..mesh.dofs() {
            let want = match i.abs_diff(j) {
                0 => 2.0 / h,
                1 => -1.0 / h,
                _ => 0.0,
            };
            assert!((sys.stiffness[(i, j)] - want).abs() < 1e-12);
        }
        assert!((sys.load[i] - h).abs() < 1e-15);
    }
    let m = mass_matrix(&mesh);
    for i in 1..mesh.dofs() - 1 {
        assert!((m.row(i).sum() - h).abs() < 1e-15);
    }
    let u = solve_state(&sys).unwrap();
    for i in 1..mesh.n_cells {
        let x = mesh.node(i);
        assert!((u[i - 1] - 0.5 * x * (1.0 - x)).abs() < 1e-13);
    }
}

#[test]
fn load_vector_of_constant() {
    let mesh = Mesh1D::new(2.0, 8).unwrap();
    let b = load_vector(&mesh, &|_| 3.0);
    assert!(b.iter().all(|v| (v - 3.0 * mesh.h()).abs() < 1e-14));
}

#[test]
fn solution_is_linear_in_the_load() {
    let mesh = Mesh1D::unit(32).unwrap();
    let k = Kernel::riesz_truncated(1, 0.5).unwrap();
    let a = Coefficient::Constant(1.0);
    let zero = solve_state(&assemble(&k, 1.0, &a, &|_| 0.0, &mesh).unwrap()).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
    let f = |x: f64| (3.0 * x).cos();
    let u1 = solve_state(&assemble(&k, 1.0, &a, &f, &mesh).unwrap()).unwrap();
    let u2 = solve_state(&assemble(&k, 1.0, &a, &|x| 2.0 * f(x), &mesh).unwrap()).unwrap();
    assert!((u2 - 2.0 * &u1).amax() < 1e-13 * u1.amax());
}

#[test]
fn galerkin_orthogonality() {
    let mesh = Mesh1D::unit(64).unwrap();
    let coef = Coefficient::function(|x| 1.0 + x * x);
    for (k, nu) in [(unit_ball(0.05), 1.0), (Kernel::riesz_truncated(1, 0.5).unwrap(), -1.0)] {
        let sys = assemble(&k, nu, &coef, &|x| x.sin(), &mesh).unwrap();
        let u = solve_state(&sys).unwrap();
        assert!(sys.galerkin_residual(&u) <= 1e-9);
    }
}

#[test]
fn energy_grows_under_refinement() {
    for k in [unit_ball(0.1), Kernel::riesz_truncated(1, 0.5).unwrap()] {
        let mut last = 0.0;
        for n in [8, 16, 32, 64, 128] {
            let sys = assemble(&k, 1.0, &Coefficient::Constant(1.0), &|_| 1.0, &Mesh1D::unit(n).unwrap()).unwrap();
            let e = sys.energy_norm(&solve_state(&sys).unwrap());
            assert!(e >= last * (1.0 - 1e-12), "{} n={n}: {e} < {last}", k.family_name());
            last = e;
        }
    }
}

#[test]
fn discrete_coercivity() {
    let mesh = Mesh1D::unit(48).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in [unit_ball(0.2), Kernel::riesz_truncated(1, 0.5).unwrap()] {
        let sys = assemble(&k, 1.0, &Coefficient::Constant(1.0), &|_| 0.0, &mesh).unwrap();
        let lam = poincare_constant(&sys).unwrap().powi(-2);
        for _ in 0..50 {
            let u = DVector::from_fn(mesh.dofs(), |_, _| rng.gen_range(-1.0..1.0));
            let lhs = u.dot(&(&sys.stiffness * &u));
            let rhs = lam * u.dot(&(&sys.mass * &u));
            assert!(lhs >= rhs * (1.0 - 1e-9));
        }
    }
}

#[test]
fn cutoff_stability() {
    let mesh = Mesh1D::unit(32).unwrap();
    let base = Kernel::fractional_vanishing(1, 0.3).unwrap().normalize_first_moment().unwrap();
    let solve = |r: f64| {
        let k = Kernel::cutoff(base.clone(), r).unwrap();
        let sys = assemble(&k, 1.0, &Coefficient::Constant(1.0), &|_| 1.0, &mesh).unwrap();
        solve_state(&sys).unwrap()
    };
    let mut ratios = Vec::new();
    for r in [1.0, 2.0, 4.0] {
        let diff = mesh.l2_norm((solve(r) - solve(2.0 * r)).as_slice());
        ratios.push(diff / base.tail_mass(r).unwrap());
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    assert!(max < 10.0, "{ratios:?}");
}

#[test]
fn poincare_constants_of_the_laplacian() {
    let cp = |len: f64| {
        let sys = assemble_local(&Coefficient::Constant(1.0), &|_| 0.0, &Mesh1D::new(len, 256).unwrap()).unwrap();
        poincare_constant(&sys).unwrap()
    };
    assert!((cp(1.0) - 1.0 / PI).abs() < 1e-5);
    let half = cp(0.5);
    assert!((half - 0.5 / PI).abs() < 1e-5);
    assert!(half < cp(1.0));
}

#[test]
fn assembly_errors() {
    let mesh = Mesh1D::unit(8).unwrap();
    let tail = Kernel::fractional_vanishing(1, 0.2).unwrap();
    let one = Coefficient::Constant(1.0);
    assert!(matches!(assemble(&tail, 1.0, &one, &|_| 1.0, &mesh), Err(FemError::NeedsCutoff)));
    assert!(matches!(assemble(&unit_ball(0.1), 0.5, &one, &|_| 1.0, &mesh), Err(FemError::Direction)));
    let bad = Coefficient::function(|x| x - 0.5);
    assert!(matches!(assemble(&unit_ball(0.1), 1.0, &bad, &|_| 1.0, &mesh), Err(FemError::Coefficient(_))));
    assert!(Mesh1D::unit(0).is_err());
}
