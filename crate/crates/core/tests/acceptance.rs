//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p vdlab-core --test acceptance [-- <ids>]`.
//! Criteria listed in `KNOWN_FAILURES` print FAIL with the reason and do not
//! fail the target; any other failure, or a known failure that starts
//! passing, makes the target exit non-zero.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdlab::constants::{asymptotic_ratio, c_nk, omega};
use vdlab::density::Density;
use vdlab::lab::{self, Status, Theorem, Verdict, VerifyConfig};
use vdlab::runner::{self, Command, RunConfig, SweepKind};
use vdlab::sphere::haar_frame;
use vdlab::volumetrics::grinberg_functional;
use vdlab::{Body, RngStream};

const KNOWN_FAILURES: &[(u32, &str)] = &[(
    1,
    "c_{3,1} is pinned to 0.827069, but (4π/3)^{2/3}/π = 0.8271340 (gap 6.5e-5 > 1e-6)",
)];

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn verified(v: &Verdict) -> bool {
    v.status == Status::Verified
}

fn c1_constants() -> Check {
    let lo = (-0.5f64).exp();
    let mut worst = (1.0f64, 0.0f64);
    for n in 2..=200 {
        for k in 1..n {
            let c = c_nk(n, k).unwrap();
            worst = (worst.0.min(c), worst.1.max(c));
        }
    }
    let range = worst.0 > lo && worst.1 < 1.0;
    let c21 = c_nk(2, 1).unwrap();
    let c31 = c_nk(3, 1).unwrap();
    let ok21 = (c21 - 0.886227).abs() <= 1e-6;
    let ok31 = (c31 - 0.827069).abs() <= 1e-6;
    check(
        range && ok21 && ok31,
        format!(
            "range [{:.6}, {:.6}] in (1/√e, 1): {range}; c21={c21:.9} ({ok21}); c31={c31:.9} vs 0.827069 ({ok31})",
            worst.0, worst.1
        ),
    )
}

fn c2_blaschke_petkantschin() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    let cfg = VerifyConfig::default().with_stream(RngStream::new(2, 0));
    for (n, k) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
        let v = lab::check_blaschke_petkantschin(&Body::ball(n, 1.0).unwrap(), &Density::uniform(), k, &cfg).unwrap();
        let (l, r) = (v.lhs.as_ref().unwrap(), v.rhs.as_ref().unwrap());
        let good = l.is_exact() && r.is_exact() && rel(l.value, r.value) <= 1e-12;
        ok &= good;
        notes.push(format!("({n},{k}) rel {:.1e}", rel(l.value, r.value)));
    }
    let g = Density::gaussian(1.0, None).unwrap();
    let cube = Body::cube(3).unwrap().dilate(2.0).unwrap();
    let cfg = VerifyConfig::default().with_samples(1_000_000).with_frames(1024).with_stream(RngStream::new(2, 1));
    let v = lab::check_blaschke_petkantschin(&cube, &g, 1, &cfg).unwrap();
    let s = v.slack.as_ref().unwrap();
    let mc = !s.is_exact() && s.value.abs() <= 3.0 * s.std_error && verified(&v);
    notes.push(format!("gaussian MC diff {:.2e} (3se {:.2e})", s.value, 3.0 * s.std_error));
    check(ok && mc, notes.join("; "))
}

fn c3_low_sharpness() -> Check {
    let cfg = VerifyConfig::default().with_frames(64).with_stream(RngStream::new(3, 0));
    let v = lab::verify_low(&Body::ball(3, 1.0).unwrap(), &Body::ball(3, 1e-3).unwrap(), 1, &cfg).unwrap();
    let target = omega(3).powf(2.0 / 3.0);
    let (l, r) = (v.lhs.as_ref().unwrap(), v.rhs.as_ref().unwrap());
    let ok = l.is_exact() && r.is_exact() && (l.value - target).abs() <= 1e-4 && (r.value - target).abs() <= 1e-4;
    check(ok, format!("lhs {:.6}, rhs {:.6}, ω₃^(2/3) {target:.6}", l.value, r.value))
}

fn c4_equality_cases() -> Check {
    let cfg = VerifyConfig::default().with_frames(64).with_stream(RngStream::new(4, 0));
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 3..=5 {
        let nf = n as f64;
        let m = nf - 1.0;
        let (k, l) = (Body::ball(n, 1.0).unwrap(), Body::ball(n, 0.5).unwrap());
        let v = lab::verify_section_upper(&k, &l, 1, None, &cfg).unwrap();
        let expected = nf / m * omega(n) * (1.0 - 0.5f64.powf(m));
        let (lv, rv) = (v.lhs.as_ref().unwrap().value, v.rhs.as_ref().unwrap().value);
        let good = rel(lv, rv) <= 1e-9 && rel(lv, expected) <= 1e-9 && verified(&v);
        ok &= good;
        notes.push(format!("section n={n}: {lv:.6}/{rv:.6}"));

        let (k, l) = (Body::ball(n, 1.0).unwrap(), Body::ball(n, 2.0).unwrap());
        let v = lab::verify_projection_lower(&k, &l, None, &cfg).unwrap();
        let expected = omega(n).powf(m / nf) * (2f64.powf(m) - 1.0);
        let (lv, rv) = (v.lhs.as_ref().unwrap().value, v.rhs.as_ref().unwrap().value);
        let good = rel(lv, rv) <= 1e-9 && rel(lv, expected) <= 1e-9 && verified(&v);
        ok &= good;
        notes.push(format!("projection n={n}: {lv:.6}/{rv:.6}"));
    }
    check(ok, notes.join("; "))
}

fn c5_grinberg() -> Check {
    let frames = 4096;
    let samples = 2000;
    let mut ok = true;
    let mut notes = Vec::new();
    let s = RngStream::new(5, 0);
    let ball3 = grinberg_functional(&Body::ball(3, 1.0).unwrap(), 1, frames, samples, s).unwrap();
    let target = 9.0 * PI / 16.0;
    ok &= (ball3.value - target).abs() <= 3.0 * ball3.std_error + 1e-12;
    notes.push(format!("ball n=3 k=1: {:.6} vs {target:.6}", ball3.value));
    for n in [3, 4] {
        let mut axes = vec![1.0; n];
        axes[0] = 2.0;
        let bodies = [
            Body::cube(n).unwrap(),
            Body::cross_polytope(n).unwrap(),
            Body::ellipsoid_axes(&axes).unwrap(),
        ];
        for k in 1..=2 {
            let ball = grinberg_functional(&Body::ball(n, 1.0).unwrap(), k, frames, samples, s.child(1)).unwrap();
            for (i, d) in bodies.iter().enumerate() {
                let r = grinberg_functional(d, k, frames, samples, s.child(10 + i as u64)).unwrap();
                let good = r.value <= ball.value + 3.0 * r.std_error.hypot(ball.std_error);
                ok &= good;
                if !good {
                    notes.push(format!("{} n={n} k={k}: {:.5} > {:.5}", d.label(), r.value, ball.value));
                }
            }
        }
    }
    notes.push("12 body comparisons".into());
    check(ok, notes.join("; "))
}

/// Random symmetric convex body: cube, cross-polytope, ℓ_p ball, ellipsoid or
/// ball, randomly rotated.
fn random_body(n: usize, rng: &mut ChaCha8Rng) -> Body {
    let b = match rng.random_range(0..5) {
        0 => Body::cube(n).unwrap(),
        1 => Body::cross_polytope(n).unwrap(),
        2 => Body::lp_ball(n, rng.random_range(1.2..6.0), 1.0).unwrap(),
        3 => Body::ellipsoid_axes(&(0..n).map(|_| rng.random_range(0.5..2.0)).collect::<Vec<_>>()).unwrap(),
        _ => Body::ball(n, rng.random_range(0.5..2.0)).unwrap(),
    };
    if rng.random_bool(0.5) {
        let q = haar_frame(n, n, rng).frame().clone();
        b.rotated(q).unwrap()
    } else {
        b
    }
}

/// `(K, L)` with `L = t·L₀ ⊆ K` by radial bounds.
fn nested_pair(n: usize, rng: &mut ChaCha8Rng) -> (Body, Body) {
    let k = random_body(n, rng);
    let l0 = random_body(n, rng);
    let t = rng.random_range(0.3..0.85) * k.radial_bounds().0 / l0.radial_bounds().1;
    (k, l0.dilate(t).unwrap())
}

fn ellipsoid(axes: &[f64], q: &DMatrix<f64>) -> Body {
    let a = q * DMatrix::from_diagonal(&DVector::from_row_slice(axes)) * q.transpose();
    Body::ellipsoid((&a + a.transpose()) * 0.5).unwrap()
}

/// Ellipsoids with `f_K <= f_L`, using `f = det(A)²/‖Au‖^{n+1}` bounds from the axes.
fn curvature_pair(n: usize, rng: &mut ChaCha8Rng) -> (Body, Body) {
    let la: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..1.8)).collect();
    let ka: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.4)).collect();
    let det = |a: &[f64]| a.iter().product::<f64>();
    let max = |a: &[f64]| a.iter().cloned().fold(0.0, f64::max);
    let min = |a: &[f64]| a.iter().cloned().fold(f64::INFINITY, f64::min);
    let e = (n + 1) as i32;
    let fl_min = det(&la).powi(2) / max(&la).powi(e);
    let fk_max = det(&ka).powi(2) / min(&ka).powi(e);
    let t = (rng.random_range(0.3..0.9) * fl_min / fk_max).powf(1.0 / (n as f64 - 1.0));
    let ka: Vec<f64> = ka.iter().map(|a| a * t).collect();
    let ql = haar_frame(n, n, rng).frame().clone();
    let qk = haar_frame(n, n, rng).frame().clone();
    (ellipsoid(&ka, &qk), ellipsoid(&la, &ql))
}

fn random_density(rng: &mut ChaCha8Rng) -> Density {
    if rng.random_bool(0.5) {
        Density::uniform()
    } else {
        Density::gaussian(rng.random_range(0.5..2.0), None).unwrap()
    }
}

const BATTERY: [Theorem; 8] = [
    Theorem::SectionUpper,
    Theorem::SectionLower,
    Theorem::Low,
    Theorem::LowMeasure,
    Theorem::MeasureUpper,
    Theorem::PowerUpper,
    Theorem::ProjLower,
    Theorem::ProjUpper,
];

fn run_battery_case(theorem: Theorem, i: usize) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6_000 + 100 * theorem as u64 + i as u64);
    let n = rng.random_range(3..=5);
    let k = rng.random_range(1..=2);
    let cfg = VerifyConfig::default()
        .with_frames(4096)
        .with_samples(100_000)
        .with_stream(RngStream::new(6, (100 * theorem as u64) + i as u64));
    match theorem {
        Theorem::ProjLower | Theorem::ProjUpper => {
            let (kb, lb) = curvature_pair(n, &mut rng);
            if theorem == Theorem::ProjLower {
                lab::verify_projection_lower(&kb, &lb, None, &cfg).unwrap()
            } else {
                lab::verify_projection_upper(&kb, &lb, None, &cfg).unwrap()
            }
        }
        _ => {
            let (kb, lb) = nested_pair(n, &mut rng);
            let mu = random_density(&mut rng);
            match theorem {
                Theorem::SectionUpper => lab::verify_section_upper(&kb, &lb, k, None, &cfg),
                Theorem::SectionLower => lab::verify_section_lower(&kb, &lb, k, None, &cfg),
                Theorem::Low => lab::verify_low(&kb, &lb, k, &cfg),
                Theorem::LowMeasure => lab::verify_low_measure(&kb, &lb, &mu, k, &cfg),
                Theorem::MeasureUpper => lab::verify_measure_upper(&kb, &lb, &mu, k, None, &cfg),
                Theorem::PowerUpper => lab::verify_power_upper(&kb, &lb, &mu, k, &cfg),
                _ => unreachable!(),
            }
            .unwrap()
        }
    }
}

fn c6_battery() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for theorem in BATTERY {
        let mut counts = [0usize; 5];
        for i in 0..50 {
            let v = run_battery_case(theorem, i);
            let slot = match v.status {
                Status::Verified => 0,
                Status::Inconclusive => 1,
                Status::HypothesisFailed => 2,
                Status::Investigate => 3,
                Status::ReverseConfirmed => 4,
            };
            counts[slot] += 1;
        }
        ok &= counts[0] == 50;
        notes.push(if counts[0] == 50 {
            format!("{theorem} 50/50")
        } else {
            format!(
                "{theorem} {}/50 (inconclusive {}, hypothesis_failed {}, investigate {})",
                counts[0], counts[1], counts[2], counts[3]
            )
        });
    }
    check(ok, notes.join("; "))
}

fn c7_dw() -> Check {
    let mut cfg = RunConfig::new(Command::Sweep { kind: SweepKind::Dw, dims: vec![4, 8, 16, 32, 64, 100] });
    cfg.seed = 7;
    let report = runner::run(&cfg, None).unwrap();
    let runner::Outcome::Sweep { rows, .. } = &report.result else { unreachable!() };
    let ok = rows.len() == 6 && rows.iter().all(|r| r.within);
    let detail = rows.iter().map(|r| format!("n={} ratio {:.3}", r.n, r.ratio)).collect::<Vec<_>>().join("; ");
    check(ok, detail)
}

fn strip_timestamp(r: &runner::Report) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    serde_json::to_string(&v).unwrap()
}

fn c8_reproducibility() -> Check {
    let verify = |theorem, k: &str, l: &str| Command::Verify {
        theorem,
        k_body: k.into(),
        l_body: Some(l.into()),
        density: None,
        certificate: None,
        k: 1,
    };
    let commands = [
        verify(Theorem::SectionUpper, "cube:n=4", "ball:n=4"),
        verify(Theorem::LowMeasure, "lp:n=3:p=3", "dilate:factor=0.4:inner=(cross:n=3)"),
        verify(Theorem::Low, "ball:n=3", "dilate:factor=2:inner=(ball:n=3)"),
        Command::Distance { kind: "dw".parse().unwrap(), body: "cross:n=6".into(), k: None },
        Command::Functional {
            name: "grinberg".parse().unwrap(),
            body: "cube:n=3".into(),
            other: None,
            density: None,
            k: Some(1),
            p: None,
            q: None,
        },
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, c) in commands.into_iter().enumerate() {
        let mut cfg = RunConfig::new(c);
        cfg.seed = 8;
        cfg.frames = 256;
        cfg.max_frames = 1024;
        cfg.samples = 20_000;
        let first = runner::run(&cfg, Some(1)).unwrap();
        let text = runner::render(&first, runner::Format::Json).unwrap();
        let embedded = runner::config_from_report(&text).unwrap();
        let reference = strip_timestamp(&first);
        for w in [1, 2, 8] {
            let again = runner::run(&embedded, Some(w)).unwrap();
            let same = strip_timestamp(&again) == reference;
            ok &= same;
            if !same {
                notes.push(format!("run {i} differs at {w} workers"));
            }
        }
        notes.push(format!("run {i} exit {}", first.exit_code));
    }
    check(ok, notes.join("; "))
}

fn c9_asymptotic_ratio() -> Check {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in 5..=100 {
        for k in 1..n {
            let r = asymptotic_ratio(n, k).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    check(lo >= 0.2 && hi <= 5.0, format!("ratio range [{lo:.4}, {hi:.4}]"))
}

type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "constants", Duration::from_secs(1), c1_constants),
        (2, "blaschke-petkantschin identity", Duration::from_secs(60), c2_blaschke_petkantschin),
        (3, "sharpness of the low bound", Duration::from_secs(1), c3_low_sharpness),
        (4, "equality cases", Duration::from_secs(1), c4_equality_cases),
        (5, "grinberg maximality", Duration::from_secs(300), c5_grinberg),
        (6, "theorem battery", Duration::from_secs(1800), c6_battery),
        (7, "mean width distance growth", Duration::from_secs(300), c7_dw),
        (8, "reproducibility", Duration::from_secs(600), c8_reproducibility),
        (9, "asymptotic ratio", Duration::from_secs(10), c9_asymptotic_ratio),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (id, name, budget, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let c = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = c.pass && in_time;
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        println!(
            "{} {id}. {name}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            c.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        match (pass, known) {
            (false, Some((_, why))) => println!("     known failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("     listed as a known failure but passed");
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected acceptance result(s)");
        std::process::exit(1);
    }
}
