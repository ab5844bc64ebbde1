use nalgebra::DMatrix;
use vdlab::constants::{c_nk, omega};
use vdlab::density::Density;
use vdlab::lab::*;
use vdlab::{Body, RngStream};

fn cfg() -> VerifyConfig {
    VerifyConfig::default().with_stream(RngStream::new(42, 0))
}

fn ball(n: usize, r: f64) -> Body {
    Body::ball(n, r).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn section_upper_balls_are_an_equality_case() {
    let v = verify_section_upper(&ball(3, 1.0), &ball(3, 0.5), 1, None, &cfg()).unwrap();
    let expect = omega(3).powf(2.0 / 3.0) * 0.75;
    let h = v.headline.as_ref().unwrap();
    assert!(close(h.lhs, expect, 1e-12) && close(h.rhs, expect, 1e-12), "{h:?}");
    assert!((expect - 1.9489).abs() < 1e-4);
    assert_eq!(v.status, Status::Verified);
    assert!(v.slack.unwrap().value.abs() < 1e-9);
}

#[test]
fn section_upper_cube_and_ball() {
    let v = verify_section_upper(&Body::cube(4).unwrap(), &ball(4, 1.0), 2, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
    assert!(v.slack.unwrap().value > 0.0);
}

#[test]
fn section_upper_rejects_l_outside_k() {
    let v = verify_section_upper(&ball(3, 1.0), &ball(3, 2.0), 1, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
    assert_eq!(v.exit_code(), 3);
}

#[test]
fn measure_upper_volume_of_balls() {
    let v = verify_measure_upper(&ball(3, 1.0), &ball(3, 0.5), &Density::uniform(), 1, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
    let ratio = v.rhs.unwrap().value / v.lhs.unwrap().value;
    // (n/(n-k)) (1 - β²) / (1 - β³) at β = 1/2
    assert!(close(ratio, 1.5 * 0.75 / 0.875, 1e-12), "{ratio}");
}

#[test]
fn equal_bodies_cancel_to_verified() {
    for n in 3..=5 {
        for k in 1..n {
            let v = verify_section_upper(&ball(n, 1.0), &ball(n, 1.0), k, None, &cfg()).unwrap();
            assert_eq!(v.status, Status::Verified, "n={n} k={k}: {:?}", v.slack);
        }
    }
}

#[test]
fn measure_upper_gaussian() {
    let g = Density::gaussian(1.0, None).unwrap();
    let v = verify_measure_upper(&ball(3, 2.0), &ball(3, 1.0), &g, 1, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
}

#[test]
fn measure_upper_rejects_discontinuous_density() {
    let shell = Density::shell(ball(3, 1.0), ball(3, 0.5)).unwrap();
    let v = verify_measure_upper(&ball(3, 1.0), &ball(3, 0.5), &shell, 1, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
}

#[test]
fn power_upper_balls_and_degenerate_pair() {
    let v = verify_power_upper(&ball(3, 1.0), &ball(3, 0.5), &Density::uniform(), 1, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
    assert!(v.headline.unwrap().implied_constant.unwrap() > 0.0);
    let v = verify_power_upper(&ball(3, 1.0), &ball(3, 1.0), &Density::uniform(), 1, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
    assert_eq!(v.lhs.unwrap().value, 0.0);
    assert_eq!(v.rhs.unwrap().value, 0.0);
}

#[test]
fn power_upper_shell_density() {
    let shell = Density::shell(ball(3, 1.0), ball(3, 0.5)).unwrap();
    let v = verify_power_upper(&ball(3, 1.0), &ball(3, 0.5), &shell, 1, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
    assert!(close(v.lhs.unwrap().value, shell_mass(), 1e-12));
}

fn shell_mass() -> f64 {
    (omega(3) * (1.0 - 0.125)).powi(2)
}

#[test]
fn section_lower_balls_are_an_equality_case() {
    let v = verify_section_lower(&ball(3, 1.0), &ball(3, 0.9), 1, None, &cfg()).unwrap();
    let (l, r) = (v.lhs.unwrap().value, v.rhs.unwrap().value);
    assert!(close(l, r, 1e-12), "{l} {r}");
    assert!((l - 1.0744).abs() < 1e-4, "{l}");
    assert_eq!(v.status, Status::Verified);
}

#[test]
fn section_lower_cube_and_ball() {
    let v = verify_section_lower(&Body::cube(3).unwrap(), &ball(3, 1.0), 1, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
}

#[test]
fn section_lower_rejects_certificate_outside_l() {
    let d = DMatrix::identity(3, 3) * 1.5;
    let v = verify_section_lower(&ball(3, 2.0), &ball(3, 1.0), 1, Some(&d), &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
}

#[test]
fn low_is_sharp_for_small_inner_ball() {
    let v = verify_low(&ball(3, 1.0), &ball(3, 1e-3), 1, &cfg()).unwrap();
    let target = omega(3).powf(2.0 / 3.0);
    assert!((target - 2.5985).abs() < 1e-4);
    assert!((v.lhs.as_ref().unwrap().value - target).abs() < 1e-4);
    assert!((v.rhs.as_ref().unwrap().value - target).abs() < 1e-4);
    assert_eq!(v.status, Status::Verified);
}

#[test]
fn low_cube_ball_and_degenerate() {
    let v = verify_low(&Body::cube(4).unwrap(), &ball(4, 1.0), 2, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
    let v = verify_low(&ball(3, 1.0), &ball(3, 1.0), 1, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
    assert_eq!(v.lhs.unwrap().value, 0.0);
}

#[test]
fn low_measure_uniform_matches_low() {
    let (k, l) = (Body::cube(3).unwrap(), ball(3, 0.8));
    let a = verify_low(&k, &l, 1, &cfg()).unwrap();
    let b = verify_low_measure(&k, &l, &Density::uniform(), 1, &cfg()).unwrap();
    assert_eq!(b.headline.unwrap().rhs, a.rhs.unwrap().value);
}

#[test]
fn low_measure_truncated_gaussian() {
    let g = Density::gaussian(1.0, Some(3.0)).unwrap();
    let v = verify_low_measure(&ball(3, 2.0), &ball(3, 1.0), &g, 1, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
}

#[test]
fn projection_lower_balls_are_an_equality_case() {
    let v = verify_projection_lower(&ball(3, 1.0), &ball(3, 2.0), None, &cfg()).unwrap();
    let (l, r) = (v.lhs.unwrap().value, v.rhs.unwrap().value);
    assert!(close(l, r, 1e-12));
    assert!(close(l, 3.0 * omega(3).powf(2.0 / 3.0), 1e-12), "{l}");
    assert!((l - 7.7954).abs() < 2e-4, "{l}");
    assert!(close(r, c_nk(3, 1).unwrap() * 3.0 * std::f64::consts::PI, 1e-12));
    assert_eq!(v.status, Status::Verified);
}

#[test]
fn projection_lower_ellipsoid() {
    let l = Body::ellipsoid_axes(&[2.0, 2.0, 1.0]).unwrap();
    let v = verify_projection_lower(&ball(3, 1.0), &l, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
    let v = verify_projection_lower(&l, &ball(3, 1.0), None, &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
}

#[test]
fn projection_upper_cases() {
    let v = verify_projection_upper(&ball(3, 1.0), &ball(3, 2.0), None, &cfg()).unwrap();
    let nine_omega = 9.0 * omega(3);
    assert!(close(v.lhs.as_ref().unwrap().value, nine_omega, 1e-12));
    assert!(close(v.rhs.as_ref().unwrap().value, nine_omega, 1e-12));
    assert_eq!(v.status, Status::Verified);
    let l = Body::ellipsoid_axes(&[1.5, 1.5, 1.0]).unwrap();
    let v = verify_projection_upper(&ball(3, 1.0), &l, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
    // f_L(e1) = 1.5²/1.5⁴ < 1 = f_K
    let l = Body::ellipsoid_axes(&[1.5, 1.0, 1.0]).unwrap();
    let v = verify_projection_upper(&ball(3, 1.0), &l, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
    let v = verify_projection_upper(&ball(3, 1.0), &ball(3, 1.0), None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Verified);
}

#[test]
fn projection_verifiers_need_curvature() {
    let v = verify_projection_lower(&ball(3, 0.5), &Body::cube(3).unwrap(), None, &cfg()).unwrap();
    assert_eq!(v.status, Status::HypothesisFailed);
}

#[test]
fn blaschke_petkantschin_indicators() {
    for (n, k) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
        let v = check_blaschke_petkantschin(&ball(n, 1.0), &Density::uniform(), k, &cfg()).unwrap();
        let (l, r) = (v.lhs.unwrap().value, v.rhs.unwrap().value);
        assert!(close(l, omega(n), 1e-12) && close(r, l, 1e-12), "{n} {k} {l} {r}");
        assert_eq!(v.status, Status::Verified);
    }
}

#[test]
fn blaschke_petkantschin_gaussian_mc() {
    let g = Density::gaussian(1.0, None).unwrap();
    let region = Body::cube(3).unwrap().dilate(2.0).unwrap();
    let c = cfg().with_samples(200_000);
    let v = check_blaschke_petkantschin(&region, &g, 1, &c).unwrap();
    assert_eq!(v.status, Status::Verified, "{v:#?}");
    assert!(v.rhs.unwrap().std_error > 0.0);
}

#[test]
fn audits() {
    let b = ball(3, 1.0);
    for mode in [AuditMode::SectionMax, AuditMode::ProjMax, AuditMode::ProjMin] {
        let v = audit_reverse_pair(&b, &b, mode, None, &cfg()).unwrap();
        assert_eq!(v.status, Status::Inconclusive, "{mode}");
    }
    let v = audit_reverse_pair(&b, &ball(3, 0.5), AuditMode::SectionMax, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Inconclusive);
    let c = v.headline.unwrap().implied_constant.unwrap();
    assert!(close(c, 3f64.sqrt() * omega(3) / omega(2), 1e-12));
    let v = audit_reverse_pair(&b, &ball(3, 2.0), AuditMode::ProjMin, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Inconclusive);
    let v = audit_reverse_pair(&b, &ball(3, 2.0), AuditMode::ProjMax, None, &cfg()).unwrap();
    assert_eq!(v.status, Status::Inconclusive);
}

#[test]
fn max_verdicts_are_monotone_in_frames() {
    let (k, l) = (Body::cube(3).unwrap(), Body::cross_polytope(3).unwrap());
    let mut last = f64::NEG_INFINITY;
    for frames in [16, 64, 256] {
        let mut c = cfg();
        c.frames = frames;
        c.max_frames = frames;
        let v = verify_section_upper(&k, &l, 1, None, &c).unwrap();
        let x = v.extremal.unwrap().value.value;
        assert!(x >= last, "{frames}: {x} < {last}");
        last = x;
    }
}

#[test]
fn verdict_json_round_trips() {
    let v = verify_low(&ball(3, 1.0), &ball(3, 0.5), 1, &cfg()).unwrap();
    let s = serde_json::to_string(&v).unwrap();
    assert!(s.contains("\"schema\":\"vdlab.verdict/1\""));
    let back: Verdict = serde_json::from_str(&s).unwrap();
    assert_eq!(back, v);
}
