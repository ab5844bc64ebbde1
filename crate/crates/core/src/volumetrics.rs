//! Volumes, sections, projections and measures of star bodies.
//!
//! Every estimator returns a [`SampleEstimate`]; closed forms are used when
//! the family has one and are flagged with [`Method::Exact`].

use rand::Rng;

use crate::constants::{omega, sphere_area};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::geometry::{dot, euclid, Body, Direction, Subspace};
use crate::par;
use crate::rng::RngStream;
use crate::sphere::{fill_direction, mc_moments, mc_sphere, sample_grassmann};
use crate::stats::{Joint, Method, Moments, Propagator, SampleEstimate};

/// Dimension limit of the generic projection estimator.
pub const MAX_GENERIC_PROJECTION_DIM: usize = 6;

fn mc(m: &Moments, scale: f64, samples: usize, stream: RngStream) -> SampleEstimate {
    SampleEstimate::new(m.mean()[0] * scale, m.std_error(0) * scale.abs(), samples as u64, stream, Method::Mc)
}

/// `|K|`, exact when available.
pub fn volume(k: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    match k.exact_volume() {
        Some(v) => Ok(SampleEstimate::exact(v)),
        None => volume_polar_mc(k, samples, stream),
    }
}

/// `|K| = ω_n ∫ ρ_K^n dσ` by sphere sampling.
pub fn volume_polar_mc(k: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let n = k.dim();
    let m = mc_sphere(n, 1, samples, stream, |t, out| out[0] = k.radial(t).powi(n as i32))?;
    Ok(mc(&m, omega(n), samples, stream))
}

/// `|K|` by counting uniform points of the box `[-r_max, r_max]^n` with `‖x‖_K <= 1`.
pub fn volume_rejection(k: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let n = k.dim();
    let r = k.radial_bounds().1;
    let m = mc_moments(1, samples, stream, |rng, out| {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-r..r)).collect();
        out[0] = if k.gauge(&x) <= 1.0 { 1.0 } else { 0.0 };
        Ok(())
    })?;
    Ok(mc(&m, (2.0 * r).powi(n as i32), samples, stream))
}

fn check_frame(k: &Body, f: &Subspace) -> Result<()> {
    if k.dim() != f.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: f.ambient_dim() });
    }
    Ok(())
}

/// `|K ∩ F|` as an `m`-dimensional volume, exact when available.
pub fn section_volume(k: &Body, f: &Subspace, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    check_frame(k, f)?;
    match k.exact_section(f) {
        Some(v) => Ok(SampleEstimate::exact(v)),
        None => volume_polar_mc(&k.restrict(f)?, samples, stream),
    }
}

/// `|K ∩ F|` by the polar formula inside `F`, ignoring closed forms.
pub fn section_volume_mc(k: &Body, f: &Subspace, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    check_frame(k, f)?;
    volume_polar_mc(&k.restrict(f)?, samples, stream)
}

/// `|K | ξ^⊥|`, exact for balls, ellipsoids, cubes and cross-polytopes;
/// generic Monte Carlo for convex bodies with `n <= 6`.
pub fn projection_volume(k: &Body, xi: &Direction, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    if xi.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: xi.dim() });
    }
    match k.exact_projection(xi.coords()) {
        Some(v) => Ok(SampleEstimate::exact(v)),
        None => projection_volume_mc(k, xi, samples, stream),
    }
}

/// Shadow area by sampling the disk `r_max·B ∩ ξ^⊥` and testing
/// `min_t ‖y + tξ‖_K <= 1` (golden-section search; the gauge is convex in t).
pub fn projection_volume_mc(k: &Body, xi: &Direction, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let n = k.dim();
    if n > MAX_GENERIC_PROJECTION_DIM {
        return Err(Error::NotComputable(format!(
            "generic projection volume is limited to n <= {MAX_GENERIC_PROJECTION_DIM} (got n={n})"
        )));
    }
    if !k.is_convex() {
        return Err(Error::NotComputable("shadow estimation needs a convex body".into()));
    }
    let h = Subspace::hyperplane(xi)?;
    let r = k.radial_bounds().1;
    let m = mc_moments(1, samples, stream, |rng, out| {
        let mut u = vec![0.0; n - 1];
        fill_direction(rng, &mut u);
        let rad = r * rng.random::<f64>().powf(1.0 / (n - 1) as f64);
        u.iter_mut().for_each(|x| *x *= rad);
        let mut y = vec![0.0; n];
        h.embed(&u, &mut y);
        out[0] = if in_shadow(k, &y, xi.coords(), r) { 1.0 } else { 0.0 };
        Ok(())
    })?;
    Ok(mc(&m, omega(n - 1) * r.powi(n as i32 - 1), samples, stream))
}

fn in_shadow(k: &Body, y: &[f64], xi: &[f64], r: f64) -> bool {
    let mut p = vec![0.0; y.len()];
    let mut g = |t: f64| {
        p.iter_mut().zip(y.iter().zip(xi)).for_each(|(pi, (yi, xii))| *pi = yi + t * xii);
        k.gauge(&p)
    };
    const PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (-r, r);
    let mut c = b - PHI * (b - a);
    let mut d = a + PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc <= 1.0 || gd <= 1.0 {
            return true;
        }
        if b - a < 1e-12 * r {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + PHI * (b - a);
            gd = g(d);
        }
    }
    gc.min(gd) <= 1.0
}

/// Exact `μ(K ∩ F)` (or `μ(K)` without a frame) when available.
fn exact_measure(k: &Body, mu: &Density, f: Option<&Subspace>) -> Option<f64> {
    let m = f.map_or(k.dim(), Subspace::dim);
    if mu.is_uniform() {
        return match f {
            Some(f) => k.exact_section(f),
            None => k.exact_volume(),
        };
    }
    if mu.is_radial() {
        let r = k.ball_radius()?;
        let theta = Direction::axis(k.dim(), 0);
        return Some(sphere_area(m) * mu.radial_integral(theta.coords(), 0.0, r, m - 1));
    }
    None
}

/// Joint estimate of `μ(K_i ∩ F)` for several bodies on common directions
/// (`μ(K_i)` when `f` is `None`), so differences have small variance.
pub fn measures(bodies: &[&Body], mu: &Density, f: Option<&Subspace>, samples: usize, stream: RngStream) -> Result<Joint> {
    let n = bodies.first().map(|b| b.dim()).ok_or_else(|| Error::InvalidParameter("no bodies".into()))?;
    for b in bodies {
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
        }
    }
    if let Some(f) = f {
        check_frame(bodies[0], f)?;
    }
    let m = f.map_or(n, Subspace::dim);
    let exact: Vec<Option<f64>> = bodies.iter().map(|b| exact_measure(b, mu, f)).collect();
    if exact.iter().all(Option::is_some) {
        return Ok(Joint::exact(exact.into_iter().flatten().collect()));
    }
    let d = bodies.len();
    let e = m - 1;
    let moments = mc_sphere(m, d, samples, stream, |u, out| {
        let mut theta = vec![0.0; n];
        match f {
            Some(f) => f.embed(u, &mut theta),
            None => theta.copy_from_slice(u),
        }
        for (i, b) in bodies.iter().enumerate() {
            out[i] = if exact[i].is_some() { 0.0 } else { mu.radial_integral(&theta, 0.0, b.radial(&theta), e) };
        }
    })?;
    let mut joint = Joint::from_moments(&moments, &vec![sphere_area(m); d], stream);
    for (i, v) in exact.iter().enumerate() {
        if let Some(v) = v {
            joint.set_exact(i, *v);
        }
    }
    Ok(joint)
}

/// `μ(K) = ∫_{S^{n-1}} ∫_0^{ρ_K} r^{n-1} g(rθ) dr dθ`.
pub fn measure_total(k: &Body, mu: &Density, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    Ok(measures(&[k], mu, None, samples, stream)?.component(0))
}

/// `μ(K ∩ F) = ∫_{S^{n-1} ∩ F} ∫_0^{ρ_K} r^{m-1} g(rθ) dr dθ` with `m = dim F`.
pub fn measure_section(k: &Body, mu: &Density, f: &Subspace, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    Ok(measures(&[k], mu, Some(f), samples, stream)?.component(0))
}

/// `V₁(K, L) = (1/n) ∫ h_L f_K dθ`.
pub fn mixed_volume_v1(k: &Body, l: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: l.dim() });
    }
    if !k.has_curvature() {
        return Err(Error::MissingOracle("curvature"));
    }
    if !l.has_support() {
        return Err(Error::MissingOracle("support"));
    }
    let n = k.dim();
    if let (Some(rk), Some(rl)) = (k.ball_radius(), l.ball_radius()) {
        return Ok(SampleEstimate::exact(omega(n) * rk.powi(n as i32 - 1) * rl));
    }
    let m = mc_sphere(n, 1, samples, stream, |t, out| {
        out[0] = l.support(t).unwrap_or(f64::NAN) * k.curvature(t).unwrap_or(f64::NAN)
    })?;
    Ok(mc(&m, omega(n), samples, stream))
}

/// Section volumes `|D ∩ F_i|` for frames `F_i`; frame `i` uses `stream.child(i)`.
pub fn section_volumes(d: &Body, frames: &[Subspace], samples: usize, stream: RngStream) -> Result<Vec<SampleEstimate>> {
    par::map_indexed(frames.len(), |i| section_volume(d, &frames[i], samples, stream.child(i as u64)))
        .into_iter()
        .collect()
}

/// Grinberg functional `R̃_k(D) = |D|^{-(n-k)} E_ν |D ∩ F|^n`.
pub fn grinberg_functional(d: &Body, k: usize, frames: usize, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let n = d.dim();
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    let fs = sample_grassmann(n, n - k, frames, stream.child(1))?;
    let secs = section_volumes(d, &fs, samples, stream.child(2))?;
    let mut mom = Moments::new(1);
    for s in &secs {
        mom.push(&[s.value.powi(n as i32)]);
    }
    let power_mean = SampleEstimate::new(mom.mean()[0], mom.std_error(0), frames as u64, stream, Method::Mc);
    let vol = volume(d, samples, stream.child(3))?;
    let mut p = Propagator::new();
    p.add_estimate(&power_mean);
    p.add_estimate(&vol);
    let e = (n - k) as f64;
    Ok(p.estimate(|x| x[0] / x[1].powf(e)))
}

/// `|conv(0, x_1, ..., x_q)| = sqrt(det Gram) / q!` for points of `R^m`.
pub fn simplex_volume(points: &[Vec<f64>]) -> f64 {
    let q = points.len();
    let gram = nalgebra::DMatrix::from_fn(q, q, |i, j| dot(&points[i], &points[j]));
    let fact: f64 = (1..=q).map(|i| i as f64).product();
    gram.determinant().max(0.0).sqrt() / fact
}

/// `S_{p,q}^p(ν) = ∫⋯∫ |conv(0, x_1..x_q)|^p dν(x_1)⋯dν(x_q)` for
/// `ν = g·1_C` on `R^m`, sampling `q` uniform points of `r_max(C)·B^m`.
pub fn sylvester_moment(
    mu: &Density,
    region: &Body,
    p: f64,
    q: usize,
    samples: usize,
    stream: RngStream,
) -> Result<SampleEstimate> {
    let m = region.dim();
    if q < 1 || q > m {
        return Err(Error::InvalidParameter(format!("need 1 <= q <= m, got q={q}, m={m}")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let r = region.radial_bounds().1;
    let cell = omega(m) * r.powi(m as i32);
    let moments = mc_moments(2, samples, stream, |rng, out| {
        let mut weight = 1.0;
        let mut pts = Vec::with_capacity(q);
        for _ in 0..q {
            let mut x = vec![0.0; m];
            fill_direction(rng, &mut x);
            let rad = r * rng.random::<f64>().powf(1.0 / m as f64);
            x.iter_mut().for_each(|v| *v *= rad);
            weight *= if region.gauge(&x) <= 1.0 { mu.eval(&x) * cell } else { 0.0 };
            pts.push(x);
        }
        let first = pts[0].clone();
        out[0] = if weight > 0.0 {
            let vol = if q == 1 { euclid(&first) } else { simplex_volume(&pts) };
            weight * vol.powf(p)
        } else {
            0.0
        };
        out[1] = weight;
        Ok(())
    })?;
    if moments.mean()[1] <= 0.0 {
        return Err(Error::Degenerate("the measure has no sampled mass on the region".into()));
    }
    Ok(mc(&moments, 1.0, samples, stream))
}

/// Pfiefer's normalized functional `S_p(C) = (|C|^{-(m+p)} ∫_C⋯∫_C |conv(0, x_1..x_m)|^p)^{1/p}`.
pub fn pfiefer_functional(region: &Body, p: f64, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let m = region.dim();
    let s = sylvester_moment(&Density::uniform(), region, p, m, samples, stream.child(1))?;
    let vol = volume(region, samples, stream.child(2))?;
    let mut prop = Propagator::new();
    prop.add_estimate(&s);
    prop.add_estimate(&vol);
    Ok(prop.estimate(|x| (x[0] / x[1].powf(m as f64 + p)).powf(1.0 / p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms_are_flagged_exact() {
        let b = Body::ball(3, 1.0).unwrap();
        let v = volume(&b, 10, RngStream::new(1, 1)).unwrap();
        assert!(v.is_exact());
        assert!((v.value - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_measure_exponent_matches_volume() {
        let c = Body::cube(3).unwrap();
        let s = RngStream::new(4, 2);
        let mu = measures(&[&c], &Density::uniform(), None, 20_000, s).unwrap();
        assert!(mu.values[0] == 8.0);
        let f = Subspace::coordinate(3, &[0, 2]).unwrap();
        let (c0, s0) = (0.3f64.cos(), 0.3f64.sin());
        let q = nalgebra::DMatrix::from_row_slice(3, 3, &[c0, 0.0, -s0, 0.0, 1.0, 0.0, s0, 0.0, c0]);
        let x = Body::cross_polytope(3).unwrap().rotated(q).unwrap();
        let a = measures(&[&x], &Density::uniform(), Some(&f), 20_000, s).unwrap().component(0);
        let b = section_volume_mc(&x, &f, 20_000, s).unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * b.value);
    }
}
