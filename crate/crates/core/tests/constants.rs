use std::f64::consts::{E, PI};

use statrs::function::gamma::gamma;
use vdlab::constants::{asymptotic_ratio, bp_constant, c_nk, c_nk_pow_k, omega, sphere_area, unit_ball_volume};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn ball_volumes() {
    assert!((omega(1) - 2.0).abs() < 1e-15);
    assert!((omega(2) - PI).abs() < 1e-15);
    assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    for n in 1..40 {
        let g = PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0);
        assert!(rel(omega(n), g) < 1e-12, "n={n}");
        assert!(rel(unit_ball_volume(n).unwrap(), g) < 1e-12);
        assert!(rel(sphere_area(n), n as f64 * g) < 1e-12);
    }
}

#[test]
fn small_dimension_constants() {
    assert!((c_nk(2, 1).unwrap() - PI.sqrt() / 2.0).abs() < 1e-12);
    let c31 = (4.0 * PI / 3.0).powf(2.0 / 3.0) / PI;
    assert!((c_nk(3, 1).unwrap() - c31).abs() < 1e-12);
    assert!((c_nk(2, 1).unwrap() - 0.886227).abs() < 1e-6);
}

#[test]
fn constants_lie_between_reciprocal_root_e_and_one() {
    let lo = 1.0 / E.sqrt();
    for n in 2..=200 {
        for k in 1..n {
            let c = c_nk(n, k).unwrap();
            assert!(c > lo && c < 1.0, "n={n} k={k}: {c}");
        }
    }
}

#[test]
fn constant_definition_closes() {
    for n in 2..=60 {
        for k in 1..n {
            let lhs = c_nk(n, k).unwrap().powi(k as i32) * omega(n - k);
            let rhs = omega(n).powf((n - k) as f64 / n as f64);
            assert!(rel(lhs, rhs) < 1e-12, "n={n} k={k}");
            assert!(rel(c_nk_pow_k(n, k).unwrap(), c_nk(n, k).unwrap().powi(k as i32)) < 1e-12);
        }
    }
}

#[test]
fn bp_examples() {
    for n in 2..8 {
        for q in 1..=n {
            assert!((bp_constant(n, n, q).unwrap() - 1.0).abs() < 1e-12);
        }
    }
    assert!((bp_constant(3, 2, 1).unwrap() - 2.0).abs() < 1e-12);
    assert!((bp_constant(4, 2, 1).unwrap() - PI).abs() < 1e-12);
    for n in 2..30 {
        for k in 1..n {
            let expected = n as f64 * omega(n) / ((n - k) as f64 * omega(n - k));
            assert!(rel(bp_constant(n, n - k, 1).unwrap(), expected) < 1e-12);
        }
    }
}

#[test]
fn bp_constant_telescopes() {
    for n in 3..25 {
        for s in 2..n {
            for q in 2..=s {
                let ratio = bp_constant(n, s, q).unwrap() / bp_constant(n, s, q - 1).unwrap();
                let expected = (q as f64).powi((n - s) as i32) * (n - q + 1) as f64 * omega(n - q + 1)
                    / ((s - q + 1) as f64 * omega(s - q + 1));
                assert!(rel(ratio, expected) < 1e-12, "n={n} s={s} q={q}");
            }
        }
    }
}

#[test]
fn large_dimensions_stay_finite() {
    for n in [150, 170, 171, 200] {
        for k in [1, n / 2, n - 1] {
            assert!(bp_constant(n, n - k, 1).unwrap().is_finite());
            assert!(asymptotic_ratio(n, k).unwrap().is_finite());
        }
    }
}

#[test]
fn ball_volume_peaks_at_five() {
    for n in 1..5 {
        assert!(omega(n + 1) > omega(n));
    }
    for n in 5..30 {
        assert!(omega(n + 1) < omega(n));
    }
}

#[test]
fn asymptotic_ratio_is_bounded() {
    let r = asymptotic_ratio(2, 1).unwrap();
    assert!(r.is_finite() && r > 0.0);
    let r = asymptotic_ratio(10, 1).unwrap();
    assert!((0.2..=5.0).contains(&r));
    for n in 5..=100 {
        for k in 1..n {
            let r = asymptotic_ratio(n, k).unwrap();
            assert!((0.2..=5.0).contains(&r), "n={n} k={k}: {r}");
        }
    }
}

#[test]
fn invalid_arguments() {
    assert!(c_nk(3, 0).is_err());
    assert!(c_nk(3, 3).is_err());
    assert!(bp_constant(3, 4, 1).is_err());
    assert!(asymptotic_ratio(1, 1).is_err());
}
