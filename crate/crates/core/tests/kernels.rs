use hsnl::kernels::{sphere_measure, Kernel, KernelError};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn families() -> Vec<Kernel> {
    let mut v = Vec::new();
    for d in [1, 2] {
        v.push(Kernel::constant_ball(d).unwrap());
        v.push(Kernel::riesz_truncated(d, 0.5).unwrap());
        v.push(Kernel::fractional_vanishing(d, 0.1).unwrap());
        v.push(Kernel::log_regularized(d, 0.1).unwrap());
        v.push(Kernel::log_truncated(d, 0.1).unwrap());
        v.push(Kernel::min_level(Kernel::riesz_truncated(d, 0.5).unwrap(), 16.0).unwrap());
        v.push(Kernel::rescaled(Kernel::constant_ball(d).unwrap(), 0.3).unwrap());
        v.push(Kernel::cutoff(Kernel::fractional_vanishing(d, 0.2).unwrap(), 1.5).unwrap());
    }
    v
}

#[test]
fn profile_values() {
    let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    assert_eq!(k.eval(0.5).unwrap(), 2.0);
    let r = Kernel::riesz_truncated(1, 0.5).unwrap();
    assert!(close(r.eval(0.25).unwrap(), 8.0, 1e-15));
    assert_eq!(r.eval(2.0).unwrap(), 0.0);
}

#[test]
fn moments_against_hand_integrals() {
    // ∫_{−1}^{1} |z|·2 dz = 2
    let k = Kernel::constant_ball(1).unwrap().normalize_first_moment().unwrap();
    let m = k.moments().unwrap();
    assert!(close(m.m1, 2.0, 1e-13));
    assert_eq!(m.m2, 0.0);
    // 2∫_0^1 z^{−0.5} dz = 4
    let r = Kernel::riesz_truncated(1, 0.5).unwrap();
    assert!(close(r.moments().unwrap().m1, 4.0, 1e-12));
    // 2∫_{0.25}^{1} z^{−1.5} dz = 4
    assert!(close(r.partial_moment(0.25, 1.0, 0).unwrap(), 4.0, 1e-12));
    assert!(close(k.partial_moment(0.0, 1.0, 1).unwrap(), 2.0, 1e-13));
    assert_eq!(r.partial_moment(0.4, 0.4, 1).unwrap(), 0.0);
}

#[test]
fn fractional_raw_moments_in_two_dimensions() {
    // ∫_{B_R} |z| 4δ|z|^{δ−3} dz = 4δ·2π∫_0^R r^{δ−1} dr = 8π R^δ
    let dl = 0.2;
    let k = Kernel::fractional_vanishing(2, dl).unwrap();
    for r in [0.5, 1.0, 2.0] {
        assert!(close(k.partial_moment(0.0, r, 1).unwrap(), 8.0 * std::f64::consts::PI * r.powf(dl), 1e-11));
    }
    let n = k.normalize_first_moment().unwrap();
    assert!(close(n.c_norm(), 1.0 / (2.0 * std::f64::consts::PI), 1e-14));
}

#[test]
fn normalization_is_idempotent() {
    for k in families() {
        let Ok(n) = k.normalize_first_moment() else { continue };
        let again = n.normalize_first_moment().unwrap();
        assert!(close(n.c_norm(), again.c_norm(), 1e-12), "{}", k.family_name());
    }
}

#[test]
fn cutoff_keeps_first_moment_and_kills_tail() {
    for k in families() {
        let c = Kernel::cutoff(k.clone(), 1.0).unwrap();
        let (a, b) = (k.moments().unwrap(), c.moments().unwrap());
        assert!(close(a.m1, b.m1, 1e-12), "{}", k.family_name());
        assert_eq!(b.m2, 0.0);
    }
}

#[test]
fn standing_assumptions() {
    let r = Kernel::riesz_truncated(1, 0.5).unwrap().validate_assumptions();
    assert!(r.standing_ok());
    assert_eq!(r.monotone, Some(true));
    let t = Kernel::tabulated(1, vec![0.1, 0.5, 1.0], vec![1.0, -0.5, 0.2]).unwrap().validate_assumptions();
    assert!(!t.nonnegative);
    assert!(!t.standing_ok());
}

#[test]
fn tabulated_refuses_extrapolation() {
    let t = Kernel::tabulated(1, vec![0.1, 1.0], vec![2.0, 1.0]).unwrap();
    assert!(matches!(t.eval(2.0), Err(KernelError::Extrapolation(_))));
}

#[test]
fn horizon_ladders_shrink_tail_and_second_moment() {
    for d in [1, 2] {
        let ks = [
            Kernel::fractional_vanishing(d, 0.1).unwrap(),
            Kernel::log_regularized(d, 0.1).unwrap(),
            Kernel::log_truncated(d, 0.1).unwrap(),
        ];
        for k in ks {
            let r = k.normalize_first_moment().unwrap().validate_assumptions();
            assert_eq!(r.ladder_ok, Some(true), "{} d={d}", k.family_name());
            assert!(r.ladder.len() >= 3);
        }
    }
}

#[test]
fn fractional_first_moment_near_target_on_ladder() {
    let k = Kernel::fractional_vanishing(1, 0.1).unwrap().normalize_first_moment().unwrap();
    let r = k.validate_assumptions();
    let row = r.ladder.iter().find(|row| (row.delta - 0.025).abs() < 1e-12).expect("ladder contains 0.025");
    assert!((row.first_moment - 2.0).abs() <= 0.01 * 2.0, "{}", row.first_moment);
}

#[test]
fn sphere_measures() {
    assert_eq!(sphere_measure(1), 2.0);
    assert!(close(sphere_measure(2), 2.0 * std::f64::consts::PI, 1e-15));
    assert!(close(sphere_measure(3), 4.0 * std::f64::consts::PI, 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_moments_are_additive(idx in 0usize..16, a in 0.0f64..0.5, gap1 in 0.01f64..1.0, gap2 in 0.01f64..2.0, order in 0u32..3) {
        let k = &families()[idx];
        let (b, c) = (a + gap1, a + gap1 + gap2);
        // order 0 near the origin diverges for nonintegrable kernels
        let a = if order == 0 { a.max(0.01) } else { a };
        let whole = k.partial_moment(a, c, order);
        let left = k.partial_moment(a, b, order);
        let right = k.partial_moment(b, c, order);
        if let (Ok(w), Ok(l), Ok(r)) = (whole, left, right) {
            prop_assert!(close(w, l + r, 1e-10), "{} {w} vs {}", k.family_name(), l + r);
        }
    }

    #[test]
    fn min_level_is_monotone_in_level(r in 1e-4f64..3.0, n in 1.0f64..500.0) {
        let base = Kernel::riesz_truncated(1, 0.5).unwrap();
        let lo = Kernel::min_level(base.clone(), n).unwrap().eval(r).unwrap();
        let hi = Kernel::min_level(base.clone(), n + 1.0).unwrap().eval(r).unwrap();
        let w = base.eval(r).unwrap();
        prop_assert!(lo <= hi && hi <= w);
    }

    #[test]
    fn rescaling_is_a_change_of_variables(ri in 0usize..3, di in 0usize..2, d in 1usize..3) {
        let radius = [0.5, 1.0, 2.0][ri];
        let dl = [0.1, 0.05][di];
        for base in [Kernel::constant_ball(d).unwrap(), Kernel::riesz_truncated(d, 0.5).unwrap(), Kernel::log_regularized(d, 0.2).unwrap()] {
            let k = Kernel::rescaled(base.clone(), dl).unwrap();
            let lhs = k.partial_moment(0.0, radius, 1).unwrap();
            let rhs = base.partial_moment(0.0, radius / dl, 1).unwrap();
            prop_assert!(close(lhs, rhs, 1e-10), "{} {lhs} {rhs}", base.family_name());
        }
    }
}
