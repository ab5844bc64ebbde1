//! Certificate-explicit verifiers.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::search::{direction_generator, extremum, frame_generator, score_estimate, Found, Goal};
use super::{check_order, decide, signed_pow, Headline, Meta, Orientation, Status, Theorem, Verdict, VerifyConfig, VERDICT_SCHEMA};
use crate::constants::{bp_constant, c_nk, c_nk_pow_k, omega, sphere_area};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::geometry::{contains, curvature_dominates, Body, Direction, HypothesisCheck, Subspace};
use crate::sphere::{fill_direction, haar_frame, mc_moments, mc_sphere, mean_width};
use crate::stats::{Joint, Method, Moments, Propagator, SampleEstimate};
use crate::volumetrics::{measures, projection_volume, volume};

pub(super) fn dims(k: &Body, l: &Body) -> Result<usize> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: l.dim() });
    }
    Ok(k.dim())
}

pub(super) fn hyp_contains(name: &str, outer: &Body, inner: &Body, cfg: &VerifyConfig, tag: u64) -> Result<HypothesisCheck> {
    Ok(contains(outer, inner, cfg.hypothesis_directions, cfg.stream.child(100 + tag))?.into_check(name))
}

pub(super) fn hyp_curvature(k: &Body, l: &Body, cfg: &VerifyConfig) -> Result<HypothesisCheck> {
    curvature_dominates(k, l, cfg.hypothesis_directions, cfg.stream.child(120))
}

fn resolve(d: Option<&DMatrix<f64>>, fallback: Option<DMatrix<f64>>, of: &Body) -> Result<(DMatrix<f64>, Body)> {
    let a = d.cloned().or(fallback).ok_or_else(|| Error::NoCertificate(of.label().to_string()))?;
    let body = Body::ellipsoid(a.clone())?;
    Ok((a, body))
}

/// Verdict under construction.
pub(super) struct Draft {
    pub v: Verdict,
}

impl Draft {
    pub fn new(
        theorem: Theorem,
        orientation: Orientation,
        n: usize,
        k: usize,
        cfg: &VerifyConfig,
        hypotheses: Vec<HypothesisCheck>,
        certificate: Option<&DMatrix<f64>>,
    ) -> Self {
        Self {
            v: Verdict {
                schema: VERDICT_SCHEMA.into(),
                theorem,
                status: Status::Inconclusive,
                orientation,
                lhs: None,
                rhs: None,
                slack: None,
                headline: None,
                extremal: None,
                hypotheses,
                certificate: certificate.map(|a| a.transpose().iter().copied().collect()),
                details: BTreeMap::new(),
                meta: Meta {
                    n,
                    k,
                    frames: 0,
                    samples: cfg.samples,
                    seed: cfg.stream.seed,
                    stream_id: cfg.stream.stream_id,
                },
            },
        }
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.v.hypotheses.iter().all(HypothesisCheck::passed)
    }

    pub fn failed(mut self) -> Verdict {
        self.v.status = Status::HypothesisFailed;
        self.v
    }

    /// Evaluates both sides and sets the status from the oriented slack.
    pub fn sides<L, R>(&mut self, p: &Propagator, lhs: L, rhs: R)
    where
        L: Fn(&[f64]) -> f64,
        R: Fn(&[f64]) -> f64,
    {
        let l = p.estimate(&lhs);
        let r = p.estimate(&rhs);
        let s = match self.v.orientation {
            Orientation::Le => p.estimate(|x| rhs(x) - lhs(x)),
            Orientation::Ge => p.estimate(|x| lhs(x) - rhs(x)),
            Orientation::Eq => p.estimate(|x| -(lhs(x) - rhs(x)).abs()),
        };
        let floor = 1e-12 * p.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        self.v.status = decide(&l, &r, &s, floor);
        self.v.lhs = Some(l);
        self.v.rhs = Some(r);
        self.v.slack = Some(s);
    }

    pub fn extremal<C: super::search::Candidate>(&mut self, found: &Found<C>, goal: Goal, value: SampleEstimate) {
        self.v.meta.frames = found.frames_used;
        self.v.extremal = Some(found.extremal(goal, value));
    }

    pub fn headline(&mut self, form: &str, lhs: f64, rhs: f64, implied: Option<f64>) {
        self.v.headline = Some(Headline {
            form: form.into(),
            lhs,
            rhs,
            implied_constant: implied.filter(|c| c.is_finite()),
        });
    }

    pub fn detail(&mut self, key: &str, value: f64) {
        self.v.details.insert(key.into(), value);
    }
}

/// Paired `μ(K ∩ F), μ(L ∩ F)` over subspaces of dimension `m`.
fn section_extremum(
    k: &Body,
    l: &Body,
    mu: &Density,
    m: usize,
    goal: Goal,
    cfg: &VerifyConfig,
    power: i32,
) -> Result<(Found<Subspace>, SampleEstimate)> {
    let n = k.dim();
    let stream = cfg.stream.child(11);
    let score = move |x: &[f64]| x[0].powi(power) - x[1].powi(power);
    let found = extremum(
        goal,
        cfg,
        stream,
        frame_generator(n, m, stream.child(7)),
        |f: &Subspace, s, st| measures(&[k, l], mu, Some(f), s, st),
        score,
    )?;
    let value = score_estimate(&found.joint, score);
    Ok((found, value))
}

fn independent(parts: &[SampleEstimate]) -> Joint {
    let d = parts.len();
    let mut cov = vec![0.0; d * d];
    for (i, e) in parts.iter().enumerate() {
        cov[i * d + i] = e.std_error * e.std_error;
    }
    let exact = parts.iter().all(SampleEstimate::is_exact);
    let mut j = Joint::exact(parts.iter().map(|e| e.value).collect());
    j.cov = cov;
    if !exact {
        j.method = Method::Mc;
        j.samples = parts.iter().map(|e| e.samples).sum();
    }
    j
}

/// `|K | ξ^⊥|, |L | ξ^⊥|` over directions, extremizing `|L|ξ^⊥| - |K|ξ^⊥|`.
pub(super) fn projection_extremum(k: &Body, l: &Body, goal: Goal, cfg: &VerifyConfig) -> Result<(Found<Direction>, SampleEstimate)> {
    let n = k.dim();
    let stream = cfg.stream.child(11);
    let score = |x: &[f64]| x[1] - x[0];
    let found = extremum(
        goal,
        cfg,
        stream,
        direction_generator(n, stream.child(7)),
        |xi: &Direction, s, st| {
            Ok(independent(&[projection_volume(k, xi, s, st.child(1))?, projection_volume(l, xi, s, st.child(2))?]))
        },
        score,
    )?;
    let value = score_estimate(&found.joint, score);
    Ok((found, value))
}

/// `|K|, |L|` on common directions (exact when closed forms exist).
pub(super) fn volumes(k: &Body, l: &Body, cfg: &VerifyConfig) -> Result<Joint> {
    measures(&[k, l], &Density::uniform(), None, cfg.samples, cfg.stream.child(10))
}

fn symmetric_flags(k: &Body, l: &Body) -> [HypothesisCheck; 2] {
    [
        HypothesisCheck::flag("K symmetric", k.is_symmetric(), "K is not origin-symmetric"),
        HypothesisCheck::flag("L symmetric", l.is_symmetric(), "L is not origin-symmetric"),
    ]
}

/// `(n/m)(|K| - |K|^{k/n}|L|^{m/n}) <= (n/m) c_{n,k}^k |D|^{k/n} max_F(|K∩F| - |L∩F|)`
/// for an ellipsoid `D ⊇ K`; `D` defaults to the closed-form certificate.
pub fn verify_section_upper(k: &Body, l: &Body, order: usize, d: Option<&DMatrix<f64>>, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    check_order(n, order)?;
    let (a, db) = resolve(d, k.enclosing_ellipsoid(), k)?;
    let mut hyps = vec![hyp_contains("L ⊆ K", k, l, cfg, 1)?, hyp_contains("K ⊆ D", &db, k, cfg, 2)?];
    hyps.extend(symmetric_flags(k, l));
    let mut draft = Draft::new(Theorem::SectionUpper, Orientation::Le, n, order, cfg, hyps, Some(&a));
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let m = n - order;
    let (nf, kf, mf) = (n as f64, order as f64, m as f64);
    let ck = c_nk_pow_k(n, order)?;
    let vd = db.exact_volume().expect("ellipsoid volume");
    let (found, max) = section_extremum(k, l, &Density::uniform(), m, Goal::Max, cfg, 1)?;
    let mut p = Propagator::new();
    p.add(&volumes(k, l, cfg)?);
    p.add(&found.joint);
    draft.sides(
        &p,
        |x| nf / mf * (x[0] - x[0].powf(kf / nf) * x[1].powf(mf / nf)),
        |x| nf / mf * ck * vd.powf(kf / nf) * (x[2] - x[3]),
    );
    let x = p.values();
    draft.headline(
        "|K|^{(n-k)/n} - |L|^{(n-k)/n} <= c_{n,k}^k (|D|/|K|)^{k/n} max_F(|K∩F| - |L∩F|)",
        x[0].powf(mf / nf) - x[1].powf(mf / nf),
        ck * (vd / x[0]).powf(kf / nf) * (x[2] - x[3]),
        None,
    );
    draft.detail("c_nk_pow_k", ck);
    draft.detail("volume_D", vd);
    draft.detail("ovr_bound", (vd / x[0]).powf(1.0 / nf));
    draft.extremal(&found, Goal::Max, max);
    Ok(draft.v)
}

/// `μ(K) - μ(L) <= (n/m) c_{n,k}^k |D|^{k/n} max_F(μ(K∩F) - μ(L∩F))` for
/// an even continuous density and an ellipsoid `D ⊇ K`.
pub fn verify_measure_upper(
    k: &Body,
    l: &Body,
    mu: &Density,
    order: usize,
    d: Option<&DMatrix<f64>>,
    cfg: &VerifyConfig,
) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    check_order(n, order)?;
    let (a, db) = resolve(d, k.enclosing_ellipsoid(), k)?;
    let hyps = vec![
        HypothesisCheck::flag("density even", mu.is_even(), "density is not declared even"),
        HypothesisCheck::flag("density continuous", mu.is_continuous(), "density is not declared continuous"),
        hyp_contains("L ⊆ K", k, l, cfg, 1)?,
        hyp_contains("K ⊆ D", &db, k, cfg, 2)?,
    ];
    let mut draft = Draft::new(Theorem::MeasureUpper, Orientation::Le, n, order, cfg, hyps, Some(&a));
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let m = n - order;
    let (nf, kf, mf) = (n as f64, order as f64, m as f64);
    let ck = c_nk_pow_k(n, order)?;
    let vd = db.exact_volume().expect("ellipsoid volume");
    let (found, max) = section_extremum(k, l, mu, m, Goal::Max, cfg, 1)?;
    let vk = volume(k, cfg.samples, cfg.stream.child(12))?;
    let mut p = Propagator::new();
    p.add(&measures(&[k, l], mu, None, cfg.samples, cfg.stream.child(10))?);
    p.add(&found.joint);
    p.add_estimate(&vk);
    draft.sides(&p, |x| x[0] - x[1], |x| nf / mf * ck * vd.powf(kf / nf) * (x[2] - x[3]));
    let x = p.values();
    let statement_rhs = nf / mf * ck * x[4].powf(kf / nf) * (x[2] - x[3]);
    draft.headline(
        "μ(K) - μ(L) <= (n/(n-k)) c_{n,k}^k |K|^{k/n} max_F(μ(K∩F) - μ(L∩F))",
        x[0] - x[1],
        statement_rhs,
        None,
    );
    draft.detail("c_nk_pow_k", ck);
    draft.detail("volume_D", vd);
    draft.detail("volume_K", x[4]);
    draft.extremal(&found, Goal::Max, max);
    Ok(draft.v)
}

/// `μ(K)^m - μ(L)^m <= p(n,m,m) c_{n,k}^{-kn} |K|^{km/n} max_F(μ(K∩F)^m - μ(L∩F)^m)`
/// with `m = n - k`, for convex `K` and any density.
pub fn verify_power_upper(k: &Body, l: &Body, mu: &Density, order: usize, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    check_order(n, order)?;
    let hyps = vec![
        HypothesisCheck::flag("K convex", k.is_convex(), "K is not declared convex"),
        hyp_contains("L ⊆ K", k, l, cfg, 1)?,
    ];
    let mut draft = Draft::new(Theorem::PowerUpper, Orientation::Le, n, order, cfg, hyps, None);
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let m = n - order;
    let (nf, kf, mf) = (n as f64, order as f64, m as f64);
    let ck = c_nk_pow_k(n, order)?;
    let pc = bp_constant(n, m, m)?;
    let konst = pc * ck.powf(-nf);
    let e = kf * mf / nf;
    let mi = m as i32;
    let (found, max) = section_extremum(k, l, mu, m, Goal::Max, cfg, mi)?;
    let vk = volume(k, cfg.samples, cfg.stream.child(12))?;
    let mut p = Propagator::new();
    p.add(&measures(&[k, l], mu, None, cfg.samples, cfg.stream.child(10))?);
    p.add(&found.joint);
    p.add_estimate(&vk);
    let lhs = |x: &[f64]| x[0].powi(mi) - x[1].powi(mi);
    let maxf = |x: &[f64]| x[2].powi(mi) - x[3].powi(mi);
    draft.sides(&p, lhs, |x| konst * x[4].powf(e) * maxf(x));
    let x = p.values();
    let base = x[4].powf(e) * maxf(x);
    let implied = (lhs(x) > 0.0 && base > 0.0).then(|| (lhs(x) / base).powf(1.0 / (kf * mf)) / mf.sqrt());
    draft.headline(
        "μ(K)^{n-k} - μ(L)^{n-k} <= (c0 √(n-k))^{k(n-k)} |K|^{k(n-k)/n} max_F(μ(K∩F)^{n-k} - μ(L∩F)^{n-k})",
        lhs(x),
        mf.sqrt().powf(kf * mf) * base,
        implied,
    );
    draft.detail("bp_constant", pc);
    draft.detail("explicit_constant", konst);
    draft.detail("volume_K", x[4]);
    draft.extremal(&found, Goal::Max, max);
    Ok(draft.v)
}

/// `∫ρ_D^k, ∫ρ_L^k, ∫‖θ‖_L` over the sphere on common directions.
fn lower_moments(d: &Body, l: &Body, order: usize, cfg: &VerifyConfig) -> Result<Joint> {
    let pw = order as i32;
    if let (Some(rd), Some(rl)) = (d.ball_radius(), l.ball_radius()) {
        return Ok(Joint::exact(vec![rd.powi(pw), rl.powi(pw), 1.0 / rl]));
    }
    let stream = cfg.stream.child(13);
    let m = mc_sphere(d.dim(), 3, cfg.samples, stream, |t, out| {
        out[0] = d.radial(t).powi(pw);
        out[1] = l.radial(t).powi(pw);
        out[2] = 1.0 / l.radial(t);
    })?;
    Ok(Joint::from_moments(&m, &[1.0; 3], stream))
}

/// `(n/m)(|L|^{k/n}|K|^{m/n} - |L|) >= (|S^{n-1}|/|S^{m-1}|) ∫ρ_D^k dσ min_F(|K∩F| - |L∩F|)`
/// for an ellipsoid `D ⊆ L`.
pub fn verify_section_lower(k: &Body, l: &Body, order: usize, d: Option<&DMatrix<f64>>, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    check_order(n, order)?;
    let (a, db) = resolve(d, l.inscribed_ellipsoid(), l)?;
    let mut hyps = vec![hyp_contains("L ⊆ K", k, l, cfg, 1)?, hyp_contains("D ⊆ L", l, &db, cfg, 2)?];
    hyps.extend(symmetric_flags(k, l));
    let mut draft = Draft::new(Theorem::SectionLower, Orientation::Ge, n, order, cfg, hyps, Some(&a));
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let m = n - order;
    let (nf, kf, mf) = (n as f64, order as f64, m as f64);
    let area_ratio = sphere_area(n) / sphere_area(m);
    let (found, min) = section_extremum(k, l, &Density::uniform(), m, Goal::Min, cfg, 1)?;
    let mut p = Propagator::new();
    p.add(&volumes(k, l, cfg)?);
    p.add(&found.joint);
    p.add(&lower_moments(&db, l, order, cfg)?);
    draft.sides(
        &p,
        |x| nf / mf * (x[1].powf(kf / nf) * x[0].powf(mf / nf) - x[1]),
        |x| area_ratio * x[4] * (x[2] - x[3]),
    );
    let x = p.values();
    let dkk = x[5] / x[4];
    let m_bar = x[6] * x[1].powf(1.0 / nf);
    let lhs_h = dkk * (x[0].powf(mf / nf) - x[1].powf(mf / nf));
    let rhs_h = (x[2] - x[3]) / (nf.sqrt() * m_bar).powf(kf);
    let implied = (lhs_h >= 0.0 && rhs_h > 0.0).then(|| (lhs_h / rhs_h).powf(1.0 / kf));
    draft.headline(
        "d_k^k (|K|^{(n-k)/n} - |L|^{(n-k)/n}) >= (c/(√n M(L̄)))^k min_F(|K∩F| - |L∩F|)",
        lhs_h,
        rhs_h,
        implied,
    );
    draft.detail("dk_pow_k_bound", dkk);
    draft.detail("m_functional_L", x[6]);
    draft.detail("radial_moment_D", x[4]);
    draft.extremal(&found, Goal::Min, min);
    Ok(draft.v)
}

/// `(|K| - |L|)^{m/n} >= c_{n,k}^k min_F(|K∩F| - |L∩F|)`.
pub fn verify_low(k: &Body, l: &Body, order: usize, cfg: &VerifyConfig) -> Result<Verdict> {
    verify_low_measure_impl(Theorem::Low, k, l, &Density::uniform(), order, cfg)
}

/// `(μ(K) - μ(L))^{m/n} >= c_{n,k}^k ‖g‖_∞^{-k/n} (E_ν (μ(K∩F) - μ(L∩F))^{n/m})^{m/n}`
/// together with the min form.
pub fn verify_low_measure(k: &Body, l: &Body, mu: &Density, order: usize, cfg: &VerifyConfig) -> Result<Verdict> {
    verify_low_measure_impl(Theorem::LowMeasure, k, l, mu, order, cfg)
}

/// Haar average of `(μ(K∩F) - μ(L∩F))^{n/m}`.
fn average_power(k: &Body, l: &Body, mu: &Density, m: usize, cfg: &VerifyConfig) -> Result<SampleEstimate> {
    let n = k.dim();
    let count = cfg.frames.min(1024);
    let per = cfg.screen_samples.max(cfg.samples / count);
    let stream = cfg.stream.child(14);
    let e = n as f64 / m as f64;
    let values: Vec<Result<(f64, bool)>> = crate::par::map_indexed(count, |i| {
        let f = haar_frame(n, m, &mut stream.item_rng(i as u64));
        let j = measures(&[k, l], mu, Some(&f), per, stream.child(i as u64))?;
        Ok((signed_pow(j.values[0] - j.values[1], e), j.method == Method::Exact))
    });
    let mut mom = Moments::new(1);
    let mut exact = true;
    for v in values {
        let (v, ex) = v?;
        mom.push(&[v]);
        exact &= ex;
    }
    if exact {
        return Ok(SampleEstimate::exact(mom.mean()[0]));
    }
    Ok(SampleEstimate::new(mom.mean()[0], mom.std_error(0), (count * per) as u64, stream, Method::Mc))
}

fn verify_low_measure_impl(theorem: Theorem, k: &Body, l: &Body, mu: &Density, order: usize, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    check_order(n, order)?;
    let g = mu
        .sup_bound(n)
        .ok_or_else(|| Error::InvalidDensity(format!("density {} has no sup bound", mu.label())))?;
    let hyps = vec![hyp_contains("L ⊆ K", k, l, cfg, 1)?];
    let mut draft = Draft::new(theorem, Orientation::Ge, n, order, cfg, hyps, None);
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let m = n - order;
    let (nf, kf, mf) = (n as f64, order as f64, m as f64);
    let ck = c_nk_pow_k(n, order)?;
    let scale = ck * g.powf(-kf / nf);
    let (found, min) = section_extremum(k, l, mu, m, Goal::Min, cfg, 1)?;
    let mut p = Propagator::new();
    p.add(&measures(&[k, l], mu, None, cfg.samples, cfg.stream.child(10))?);
    p.add(&found.joint);
    let lhs = |x: &[f64]| signed_pow(x[0] - x[1], mf / nf);
    let min_rhs = |x: &[f64]| scale * (x[2] - x[3]);
    if theorem == Theorem::Low {
        draft.sides(&p, lhs, min_rhs);
        draft.detail("c_nk_pow_k", ck);
        draft.extremal(&found, Goal::Min, min);
        return Ok(draft.v);
    }

    // Min form first, then the averaged form as the primary check.
    draft.sides(&p, lhs, min_rhs);
    let min_status = draft.v.status;
    let (min_l, min_r, min_s) = (draft.v.lhs.clone().unwrap(), draft.v.rhs.clone().unwrap(), draft.v.slack.clone().unwrap());
    p.add_estimate(&average_power(k, l, mu, m, cfg)?);
    draft.sides(&p, lhs, |x| scale * signed_pow(x[4], mf / nf));
    draft.v.status = draft.v.status.worst(min_status);
    draft.headline(
        "(μ(K) - μ(L))^{(n-k)/n} >= c_{n,k}^k ‖g‖_∞^{-k/n} min_F(μ(K∩F) - μ(L∩F))",
        min_l.value,
        min_r.value,
        None,
    );
    draft.detail("min_form_slack", min_s.value);
    draft.detail("min_form_slack_se", min_s.std_error);
    draft.detail("sup_density", g);
    draft.detail("c_nk_pow_k", ck);
    draft.detail("average_power", p.values()[4]);
    draft.extremal(&found, Goal::Min, min);
    Ok(draft.v)
}

/// `|L|^{(n-1)/n} - |K|^{(n-1)/n} >= c_{n,1} (|D|/|L|)^{1/n} min_ξ(|L|ξ^⊥| - |K|ξ^⊥|)`
/// for `f_K <= f_L` and an ellipsoid `D ⊆ L`.
pub fn verify_projection_lower(k: &Body, l: &Body, d: Option<&DMatrix<f64>>, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    let (a, db) = resolve(d, l.inscribed_ellipsoid(), l)?;
    let hyps = vec![hyp_curvature(k, l, cfg)?, hyp_contains("D ⊆ L", l, &db, cfg, 2)?];
    let mut draft = Draft::new(Theorem::ProjLower, Orientation::Ge, n, 1, cfg, hyps, Some(&a));
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let nf = n as f64;
    let e = (nf - 1.0) / nf;
    let c1 = c_nk(n, 1)?;
    let vd = db.exact_volume().expect("ellipsoid volume");
    let (found, min) = projection_extremum(k, l, Goal::Min, cfg)?;
    let mut p = Propagator::new();
    p.add(&volumes(k, l, cfg)?);
    p.add(&found.joint);
    draft.sides(&p, |x| x[1].powf(e) - x[0].powf(e), |x| c1 * (vd / x[1]).powf(1.0 / nf) * (x[3] - x[2]));
    let x = p.values();
    let dvr = (x[1] / vd).powf(1.0 / nf);
    draft.headline(
        "|L|^{(n-1)/n} - |K|^{(n-1)/n} >= (c_{n,1}/d_vr) min_ξ(|L|ξ^⊥| - |K|ξ^⊥|)",
        x[1].powf(e) - x[0].powf(e),
        c1 / dvr * (x[3] - x[2]),
        None,
    );
    draft.detail("c_n1", c1);
    draft.detail("dvr_bound", dvr);
    draft.extremal(&found, Goal::Min, min);
    Ok(draft.v)
}

/// `n(|L|^{(n-1)/n}|K|^{1/n} - |K|) <= (nω_n/ω_{n-1}) w(D) max_ξ(|L|ξ^⊥| - |K|ξ^⊥|)`
/// for `f_K <= f_L` and an ellipsoid `D ⊇ K`.
pub fn verify_projection_upper(k: &Body, l: &Body, d: Option<&DMatrix<f64>>, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    let (a, db) = resolve(d, k.enclosing_ellipsoid(), k)?;
    let hyps = vec![hyp_curvature(k, l, cfg)?, hyp_contains("K ⊆ D", &db, k, cfg, 2)?];
    let mut draft = Draft::new(Theorem::ProjUpper, Orientation::Le, n, 1, cfg, hyps, Some(&a));
    if !draft.hypotheses_pass() {
        return Ok(draft.failed());
    }
    let nf = n as f64;
    let e = (nf - 1.0) / nf;
    let ratio = sphere_area(n) / omega(n - 1);
    let (found, max) = projection_extremum(k, l, Goal::Max, cfg)?;
    let mut p = Propagator::new();
    p.add(&volumes(k, l, cfg)?);
    p.add(&found.joint);
    p.add_estimate(&mean_width(&db, cfg.samples, cfg.stream.child(13))?);
    draft.sides(&p, |x| nf * (x[1].powf(e) * x[0].powf(1.0 / nf) - x[0]), |x| ratio * x[4] * (x[3] - x[2]));
    let x = p.values();
    let dv = x[1].powf(e) - x[0].powf(e);
    let base = x[4] / (nf.sqrt() * x[0].powf(1.0 / nf)) * (x[3] - x[2]);
    let implied = (dv >= 0.0 && base > 0.0).then(|| dv / base);
    draft.headline(
        "|L|^{(n-1)/n} - |K|^{(n-1)/n} <= (c/√n) d_w w(K̄) max_ξ(|L|ξ^⊥| - |K|ξ^⊥|)",
        dv,
        base,
        implied,
    );
    draft.detail("mean_width_D", x[4]);
    draft.extremal(&found, Goal::Max, max);
    Ok(draft.v)
}

/// `∫_{region} g = p(n,m,1) E_ν ∫_{region ∩ F} g(x) ‖x‖^k dx` with `m = n - k`.
pub fn check_blaschke_petkantschin(region: &Body, mu: &Density, order: usize, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = region.dim();
    check_order(n, order)?;
    let m = n - order;
    let pc = bp_constant(n, m, 1)?;
    let e = m - 1 + order;
    let mut draft = Draft::new(Theorem::BpIdentity, Orientation::Eq, n, order, cfg, Vec::new(), None);
    let lhs = measures(&[region], mu, None, cfg.samples, cfg.stream.child(10))?;
    let exact_rhs = match region.ball_radius() {
        Some(r) if mu.is_radial() => {
            let axis = Direction::axis(n, 0);
            Some(pc * sphere_area(m) * mu.radial_integral(axis.coords(), 0.0, r, e))
        }
        _ => None,
    };
    let rhs = match exact_rhs {
        Some(v) => Joint::exact(vec![v]),
        None => {
            let stream = cfg.stream.child(11);
            let per = (cfg.samples / cfg.frames).max(1);
            let mom = mc_moments(1, cfg.frames, stream, |rng, out| {
                let f = haar_frame(n, m, rng);
                let (mut u, mut theta) = (vec![0.0; m], vec![0.0; n]);
                let mut acc = 0.0;
                for _ in 0..per {
                    fill_direction(rng, &mut u);
                    f.embed(&u, &mut theta);
                    acc += mu.radial_integral(&theta, 0.0, region.radial(&theta), e);
                }
                out[0] = acc / per as f64;
                Ok(())
            })?;
            Joint::from_moments(&mom, &[pc * sphere_area(m)], stream)
        }
    };
    draft.v.meta.frames = if exact_rhs.is_some() { 0 } else { cfg.frames };
    let mut p = Propagator::new();
    p.add(&lhs);
    p.add(&rhs);
    draft.sides(&p, |x| x[0], |x| x[1]);
    let diff = p.estimate(|x| x[0] - x[1]);
    let eps = super::tolerance(diff.value, 0.0).max(1e-12 * p.values()[0].abs());
    draft.v.status = if diff.value.abs() <= 3.0 * diff.std_error + eps { Status::Verified } else { Status::Investigate };
    draft.detail("bp_constant", pc);
    draft.detail("difference", diff.value);
    draft.detail("difference_se", diff.std_error);
    Ok(draft.v)
}
