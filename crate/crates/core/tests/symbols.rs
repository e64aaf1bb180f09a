use hsnl::kernels::Kernel;
use hsnl::symbols::{
    appendix_limit_table, check_eta_bound, check_lower_bound_large_xi, check_lower_bound_small_xi,
    first_row_formula, ortho_basis, scaling_identity_check, symbol, symbol_eta,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// 2(e^{2πiξ} − 1)/(2πiξ) − 2
fn constant_ball_oracle(xi: f64) -> Complex64 {
    let a = 2.0 * PI * xi;
    2.0 * ((I * a).exp() - 1.0) / (I * a) - 2.0
}

/// ∫_0^∞ 2δ z^{δ−2}(e^{iωz} − 1) dz = 2δ Γ(δ−1) e^{iπ(δ−1)/2} ω^{1−δ}
fn fractional_oracle(delta: f64, xi: f64) -> Complex64 {
    let w = 2.0 * PI * xi;
    2.0 * delta * gamma(delta - 1.0) * Complex64::from_polar(1.0, PI * (delta - 1.0) / 2.0) * w.powf(1.0 - delta)
}

/// ∫_0^1 z^{−1−s}(e^{iωz} − 1) dz = Σ_{k≥1} (iω)^k / (k!(k − s)), doubled for the two-sided d=1 profile
/// restricted to the half line: only z > 0 contributes for ν = +1.
fn riesz_oracle(s: f64, xi: f64) -> Complex64 {
    let w = 2.0 * PI * xi;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..200 {
        term *= I * w / k as f64;
        sum += term / (k as f64 - s);
        if term.norm() < 1e-30 {
            break;
        }
    }
    sum
}

/// Inner radial integral ∫_0^1 r(e^{iar} − 1) dr.
fn radial_inner(a: f64) -> Complex64 {
    if a.abs() < 1e-3 {
        let mut s = Complex64::new(0.0, 0.0);
        let mut t = Complex64::new(1.0, 0.0);
        for k in 1..12 {
            t *= I * a / k as f64;
            s += t / (k as f64 + 2.0);
        }
        return s;
    }
    let e = (I * a).exp();
    e / (I * a) + (e - 1.0) / (a * a) - 0.5
}

/// Normalized constant ball in d=2 by composite Simpson over the half circle
/// facing ν.
fn constant_ball_2d_oracle(nu: [f64; 2], xi: [f64; 2]) -> [Complex64; 2] {
    let c = 6.0 / PI;
    let phi0 = nu[1].atan2(nu[0]);
    let n = 4000;
    let h = PI / n as f64;
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    for j in 0..=n {
        let wgt = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
        let th = phi0 - PI / 2.0 + j as f64 * h;
        let e = [th.cos(), th.sin()];
        let a = 2.0 * PI * (xi[0] * e[0] + xi[1] * e[1]);
        let v = radial_inner(a);
        acc[0] += wgt * e[0] * v;
        acc[1] += wgt * e[1] * v;
    }
    [acc[0] * c * h / 3.0, acc[1] * c * h / 3.0]
}

#[test]
fn constant_ball_examples() {
    let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    let one = symbol(&k, &[1.0], &[1.0]).unwrap().value[0];
    assert!((one - Complex64::new(-2.0, 0.0)).norm() < 1e-10);
    let half = symbol(&k, &[1.0], &[0.5]).unwrap().value[0];
    assert!((half - Complex64::new(-2.0, 4.0 / PI)).norm() < 1e-10);
    assert_eq!(symbol(&k, &[1.0], &[0.0]).unwrap().value[0], Complex64::new(0.0, 0.0));
}

#[test]
fn constant_ball_matches_closed_form_on_log_grid() {
    let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    for j in 0..200 {
        let xi = 0.01 * 1e4f64.powf(j as f64 / 199.0);
        let v = symbol(&k, &[1.0], &[xi]).unwrap().value[0];
        assert!(rel(v, constant_ball_oracle(xi)) < 1e-8, "xi={xi}");
    }
}

#[test]
fn fractional_matches_gamma_closed_form() {
    for delta in [0.05, 0.1, 0.2, 0.5] {
        // raw profile 2δ r^{δ−2}, which is c_norm = 1 in d = 1
        let k = Kernel::fractional_vanishing(1, delta).unwrap();
        for xi in [0.1, 1.0, 3.7, 10.0, 100.0] {
            let v = symbol(&k, &[1.0], &[xi]).unwrap().value[0];
            let o = fractional_oracle(delta, xi);
            assert!(rel(v, o) < 1e-8, "delta={delta} xi={xi}: {v} vs {o}");
        }
    }
}

#[test]
fn riesz_matches_power_series() {
    for s in [0.3, 0.5, 0.8] {
        let k = Kernel::riesz_truncated(1, s).unwrap();
        for xi in [0.05, 0.3, 1.0, 2.0] {
            let v = symbol(&k, &[1.0], &[xi]).unwrap().value[0];
            let o = riesz_oracle(s, xi);
            assert!(rel(v, o) < 1e-9, "s={s} xi={xi}: {v} vs {o}");
        }
    }
}

#[test]
fn negative_direction_reflects() {
    let k = Kernel::riesz_truncated(1, 0.5).unwrap();
    for xi in [0.3, 2.0] {
        let p = symbol(&k, &[1.0], &[xi]).unwrap().value[0];
        let m = symbol(&k, &[-1.0], &[xi]).unwrap().value[0];
        // λ^{−1}(ξ) = −λ^{+1}(−ξ) = −conj λ^{+1}(ξ)
        assert!((m + p.conj()).norm() < 1e-10 * (1.0 + p.norm()));
    }
}

#[test]
fn two_dimensional_constant_ball_matches_polar_oracle() {
    let k = Kernel::constant_ball(2).unwrap().normalize_first_moment().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let nu = [phi.cos(), phi.sin()];
        let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let v = symbol(&k, &nu, &xi).unwrap().value;
        let o = constant_ball_2d_oracle(nu, xi);
        let err = ((v[0] - o[0]).norm_sqr() + (v[1] - o[1]).norm_sqr()).sqrt();
        let scale = (o[0].norm_sqr() + o[1].norm_sqr()).sqrt();
        assert!(err <= 1e-8 * (1.0 + scale), "nu={nu:?} xi={xi:?}: {err}");
    }
}

#[test]
fn hermitian_symmetry_at_random_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k1 = Kernel::riesz_truncated(1, 0.5).unwrap();
    let k2 = Kernel::riesz_truncated(2, 0.3).unwrap();
    for _ in 0..1000 {
        let xi: f64 = rng.gen_range(-50.0..50.0);
        let a = symbol(&k1, &[1.0], &[xi]).unwrap().value[0];
        let b = symbol(&k1, &[1.0], &[-xi]).unwrap().value[0];
        assert!((a.conj() - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }
    for _ in 0..50 {
        let xi = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let a = symbol(&k2, &[0.6, 0.8], &xi).unwrap().value;
        let b = symbol(&k2, &[0.6, 0.8], &[-xi[0], -xi[1]]).unwrap().value;
        for j in 0..2 {
            assert!((a[j].conj() - b[j]).norm() <= 1e-10 * (1.0 + a[j].norm()));
        }
    }
}

#[test]
fn eta_examples() {
    assert_eq!(symbol_eta(0.1, &[1.0], &[0.0], 1).unwrap()[0], Complex64::new(0.0, 0.0));
    let v = symbol_eta(0.1, &[1.0], &[5.0], 1).unwrap()[0];
    assert!((v - Complex64::new(-1.0, -2.0 / PI)).norm() < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)]).collect();
    let r = check_eta_bound(&[0.3, 0.05], &[0.6, 0.8], &grid, 2).unwrap();
    assert!(r.pass);
}

#[test]
fn scaling_identity_examples() {
    let base = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    let k = Kernel::rescaled(base.clone(), 0.25).unwrap();
    let lhs = symbol(&k, &[1.0], &[2.0]).unwrap().value[0];
    let rhs = constant_ball_oracle(0.5) / 0.25;
    assert!(rel(lhs, rhs) < 1e-10);
    let grid: Vec<Vec<f64>> = [0.1, 1.0, 7.0].iter().map(|&x| vec![x]).collect();
    assert!(scaling_identity_check(&base, &[0.5, 0.1], &grid, &[1.0]).unwrap().pass);
}

#[test]
fn localizes_to_the_gradient_symbol() {
    let base = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    let xi = 0.7;
    let target = I * 2.0 * PI * xi;
    let mut last = f64::INFINITY;
    for dl in [0.1, 0.01, 0.001] {
        let v = symbol(&Kernel::rescaled(base.clone(), dl).unwrap(), &[1.0], &[xi]).unwrap().value[0];
        let err = (v - target).norm();
        assert!(err < last);
        last = err;
    }
    assert!(last < 0.05);
}

#[test]
fn lower_bound_scans() {
    let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    let small = check_lower_bound_small_xi(&k, &[1.0]).unwrap();
    // |λ(ξ)|/|ξ| → 2π as ξ → 0
    assert!((small.lhs.last().unwrap() - 2.0 * PI).abs() < 1e-4);
    assert!(small.pass);
    let large = check_lower_bound_large_xi(&k, &[1.0], 1.0, 0.5).unwrap();
    assert!(large.pass && !large.informational);
    let r = check_lower_bound_large_xi(&Kernel::riesz_truncated(1, 0.5).unwrap(), &[1.0], 1.0, 1.0).unwrap();
    assert!(r.pass);
    let lt = check_lower_bound_large_xi(&Kernel::log_truncated(1, 0.01).unwrap(), &[1.0], 1.0, 1.0).unwrap();
    assert!(lt.informational);
}

#[test]
fn appendix_unit_variant_is_close() {
    for r in appendix_limit_table(&[0.2, 0.1, 0.01]).unwrap() {
        let gap = (Complex64::new(r.cos_integral, r.sin_integral)
            - Complex64::new(r.cos_integral_unit, r.sin_integral_unit))
        .norm();
        assert!(gap <= 4.0 * r.delta, "delta={} gap={gap}", r.delta);
    }
}

#[test]
fn basis_examples() {
    let b = ortho_basis(&[1.0, 0.0]).unwrap();
    assert!((b.columns[0][0] - 0.0).abs() < 1e-15 && (b.columns[0][1] + 1.0).abs() < 1e-15);
    let s = 0.5f64.sqrt();
    let b = ortho_basis(&[s, -s]).unwrap();
    assert!((b.columns[0][0] - s).abs() < 1e-15 && (b.columns[0][1] - s).abs() < 1e-15);
    assert!((first_row_formula(&[s, -s], 1) - s).abs() < 1e-15);
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3 && v[0] / n > 1e-6).then(|| v.iter().map(|x| x / n).collect())
}

fn rotate(phi: f64, v: &[f64]) -> [f64; 2] {
    [phi.cos() * v[0] - phi.sin() * v[1], phi.sin() * v[0] + phi.cos() * v[1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rotation_covariance(phi in 0.0f64..(2.0 * PI), th in 0.0f64..(2.0 * PI), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let k = Kernel::riesz_truncated(2, 0.5).unwrap();
        let nu = [th.cos(), th.sin()];
        let base = symbol(&k, &nu, &[x, y]).unwrap().value;
        let rot = symbol(&k, &rotate(phi, &nu), &rotate(phi, &[x, y])).unwrap().value;
        let re = rotate(phi, &[base[0].re, base[1].re]);
        let im = rotate(phi, &[base[0].im, base[1].im]);
        for j in 0..2 {
            let want = Complex64::new(re[j], im[j]);
            prop_assert!((rot[j] - want).norm() <= 1e-8 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn symbol_vanishes_at_zero(d in 1usize..3, s in 0.1f64..0.9) {
        let k = Kernel::riesz_truncated(d, s).unwrap();
        let mut nu = vec![0.0; d];
        nu[0] = 1.0;
        let v = symbol(&k, &nu, &vec![0.0; d]).unwrap();
        prop_assert!(v.value.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn basis_is_orthonormal_with_closed_first_row(v in proptest::collection::vec(-1.0f64..1.0, 2..=3), flip in any::<bool>()) {
        let mut v = v;
        v[0] = v[0].abs();
        if flip { v.reverse(); v[0] = v[0].abs(); }
        if let Some(mu) = unit(v) {
            let b = ortho_basis(&mu).unwrap();
            prop_assert!(b.orthonormality_defect() <= 1e-12);
            for k in 1..mu.len() {
                prop_assert!((b.columns[k - 1][0] - first_row_formula(&mu, k)).abs() <= 1e-12);
            }
        }
    }
}
