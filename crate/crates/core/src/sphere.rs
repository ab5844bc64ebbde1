//! Uniform sampling of `S^{n-1}` and Haar sampling of Grassmannians.
//!
//! Sphere samples are drawn in chunks of [`par::CHUNK`]; chunk `c` uses
//! `stream.item_rng(c)`. Frame `i` of a Grassmannian sample uses
//! `stream.item_rng(i)`, so the first `N` frames do not depend on how many
//! frames are requested in total.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{euclid, Body, Direction, Subspace};
use crate::par;
use crate::rng::RngStream;
use crate::stats::{merge_all, Method, Moments, SampleEstimate};

/// Overwrites `out` with a uniform direction.
pub fn fill_direction(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        out.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        let r = euclid(out);
        if r > 1e-300 {
            out.iter_mut().for_each(|x| *x /= r);
            return;
        }
    }
}

pub fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> Direction {
    let mut v = vec![0.0; n];
    fill_direction(rng, &mut v);
    Direction::normalize(v).expect("non-zero by construction")
}

/// Haar-distributed `m`-frame: QR of an `n×m` Gaussian matrix with the
/// signs fixed so that `R` has a positive diagonal.
pub fn haar_frame(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Subspace {
    loop {
        let g = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        if let Ok(s) = Subspace::from_basis(g) {
            return s;
        }
    }
}

fn check_dims(n: usize, count: usize) -> Result<()> {
    if n < 1 || count < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and count >= 1, got n={n}, count={count}")));
    }
    Ok(())
}

/// `count` i.i.d. uniform directions in `R^n`.
pub fn sample_sphere(n: usize, count: usize, stream: RngStream) -> Result<Vec<Direction>> {
    check_dims(n, count)?;
    let per_chunk = par::map_indexed(count.div_ceil(par::CHUNK), |c| {
        let mut rng = stream.item_rng(c as u64);
        let len = par::CHUNK.min(count - c * par::CHUNK);
        (0..len).map(|_| random_direction(n, &mut rng)).collect::<Vec<_>>()
    });
    Ok(per_chunk.into_iter().flatten().collect())
}

/// `count` Haar-random `m`-dimensional subspaces of `R^n`.
pub fn sample_grassmann(n: usize, m: usize, count: usize, stream: RngStream) -> Result<Vec<Subspace>> {
    check_dims(n, count)?;
    if m < 1 || m >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    Ok(par::map_indexed(count, |i| haar_frame(n, m, &mut stream.item_rng(i as u64))))
}

/// Monte Carlo over chunks: `f` draws whatever it needs from the generator
/// and writes `dim` outputs per sample.
pub fn mc_moments<F>(dim: usize, samples: usize, stream: RngStream, f: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync + Send,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let parts = par::map_indexed(samples.div_ceil(par::CHUNK), |c| -> Result<Moments> {
        let mut rng = stream.item_rng(c as u64);
        let len = par::CHUNK.min(samples - c * par::CHUNK);
        let mut m = Moments::new(dim);
        let mut out = vec![0.0; dim];
        for _ in 0..len {
            f(&mut rng, &mut out)?;
            m.push(&out);
        }
        Ok(m)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(merge_all(parts, dim))
}

/// Monte Carlo over uniform directions; non-finite outputs abort with the
/// offending direction.
pub fn mc_sphere<F>(n: usize, dim: usize, samples: usize, stream: RngStream, f: F) -> Result<Moments>
where
    F: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    mc_moments(dim, samples, stream, |rng, out| {
        let mut theta = [0.0f64; 64];
        let mut heap;
        let theta: &mut [f64] = if n <= 64 {
            &mut theta[..n]
        } else {
            heap = vec![0.0; n];
            &mut heap
        };
        fill_direction(rng, theta);
        f(theta, out);
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { direction: theta.to_vec() });
        }
        Ok(())
    })
}

fn estimate(m: &Moments, samples: usize, stream: RngStream) -> SampleEstimate {
    SampleEstimate::new(m.mean()[0], m.std_error(0), samples as u64, stream, Method::Mc)
}

/// `∫_{S^{n-1}} f dσ`.
pub fn spherical_mean<F>(n: usize, samples: usize, stream: RngStream, f: F) -> Result<SampleEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let m = mc_sphere(n, 1, samples, stream, |t, out| out[0] = f(t))?;
    Ok(estimate(&m, samples, stream))
}

/// `M(K) = ∫ ‖θ‖_K dσ(θ)`.
pub fn m_functional(k: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    if let Some(r) = k.ball_radius() {
        return Ok(SampleEstimate::exact(1.0 / r));
    }
    spherical_mean(k.dim(), samples, stream, |t| 1.0 / k.radial(t))
}

/// Mean width `w(K) = ∫ h_K dσ` (no factor 2).
pub fn mean_width(k: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    if !k.has_support() {
        return Err(Error::MissingOracle("support"));
    }
    if let Some(r) = k.ball_radius() {
        return Ok(SampleEstimate::exact(r));
    }
    spherical_mean(k.dim(), samples, stream, |t| k.support(t).unwrap_or(f64::NAN))
}

/// `∫ ρ_K^k dσ`.
pub fn radial_moment(k: &Body, power: usize, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    if power < 1 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    if let Some(r) = k.ball_radius() {
        return Ok(SampleEstimate::exact(r.powi(power as i32)));
    }
    spherical_mean(k.dim(), samples, stream, |t| k.radial(t).powi(power as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_has_no_error() {
        let e = spherical_mean(4, 5000, RngStream::new(1, 0), |_| 2.5).unwrap();
        assert_eq!(e.value, 2.5);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn non_finite_integrand_reports_direction() {
        let r = spherical_mean(3, 100, RngStream::new(1, 0), |t| if t[0] > 0.0 { f64::INFINITY } else { 0.0 });
        match r {
            Err(Error::NonFinite { direction }) => assert!(direction[0] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frames_have_prefix_property() {
        let s = RngStream::new(3, 9);
        let a = sample_grassmann(5, 2, 10, s).unwrap();
        let b = sample_grassmann(5, 2, 20, s).unwrap();
        assert_eq!(a[..], b[..10]);
    }
}
