//! Sampled hypothesis checks: containment and curvature domination.

use serde::{Deserialize, Serialize};

use super::{Body, Direction};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::RngStream;
use crate::sphere::sample_sphere;

/// Margin below which a sampled check fails.
pub const MARGIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Pass,
    Fail,
    NotCheckable,
}

/// Outcome of one sampled hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub status: HypothesisStatus,
    pub worst_margin: Option<f64>,
    pub worst_direction: Option<Vec<f64>>,
    pub probes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisCheck {
    pub fn passed(&self) -> bool {
        self.status == HypothesisStatus::Pass
    }

    /// A flag-type hypothesis (symmetry, evenness, ...).
    pub fn flag(name: &str, ok: bool, note: &str) -> Self {
        Self {
            name: name.into(),
            status: if ok { HypothesisStatus::Pass } else { HypothesisStatus::Fail },
            worst_margin: None,
            worst_direction: None,
            probes: 0,
            note: (!ok).then(|| note.to_string()),
        }
    }

    pub fn not_checkable(name: &str, note: &str) -> Self {
        Self {
            name: name.into(),
            status: HypothesisStatus::NotCheckable,
            worst_margin: None,
            worst_direction: None,
            probes: 0,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub pass: bool,
    pub margin: f64,
    pub worst_direction: Vec<f64>,
    pub probes: usize,
}

impl ContainmentReport {
    pub fn into_check(self, name: &str) -> HypothesisCheck {
        HypothesisCheck {
            name: name.into(),
            status: if self.pass { HypothesisStatus::Pass } else { HypothesisStatus::Fail },
            worst_margin: Some(self.margin),
            worst_direction: Some(self.worst_direction),
            probes: self.probes,
            note: None,
        }
    }
}

/// Coordinate axes, sign-pattern diagonals and `random` uniform directions.
pub fn probe_directions(n: usize, random: usize, stream: RngStream) -> Result<Vec<Direction>> {
    let mut out = Vec::new();
    for i in 0..n {
        let e = Direction::axis(n, i);
        out.push(e.neg());
        out.push(e);
    }
    let inv = 1.0 / (n as f64).sqrt();
    if n <= 10 {
        for mask in 0u32..(1 << n) {
            let v = (0..n).map(|i| if mask & (1 << i) != 0 { -inv } else { inv }).collect();
            out.push(Direction::normalize(v)?);
        }
    } else {
        let d = Direction::normalize(vec![inv; n])?;
        out.push(d.neg());
        out.push(d);
    }
    if random > 0 {
        out.extend(sample_sphere(n, random, stream)?);
    }
    Ok(out)
}

/// Minimum of `margin(θ)` over probes, ties broken by probe order.
fn worst<F>(probes: &[Direction], margin: F) -> (f64, usize)
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let values = par::map_indexed(probes.len(), |i| margin(probes[i].coords()));
    values
        .iter()
        .enumerate()
        .fold((f64::INFINITY, 0), |(m, at), (i, v)| if *v < m || v.is_nan() && !m.is_nan() { (*v, i) } else { (m, at) })
}

/// Checks `inner ⊆ outer` by `min_θ ρ_outer(θ) - ρ_inner(θ) >= -1e-10`.
pub fn contains(outer: &Body, inner: &Body, directions: usize, stream: RngStream) -> Result<ContainmentReport> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch { expected: outer.dim(), got: inner.dim() });
    }
    let probes = probe_directions(outer.dim(), directions, stream)?;
    let (margin, at) = worst(&probes, |t| outer.radial(t) - inner.radial(t));
    Ok(ContainmentReport {
        pass: margin >= -MARGIN_TOL,
        margin,
        worst_direction: probes[at].coords().to_vec(),
        probes: probes.len(),
    })
}

/// Checks `f_K <= f_L` by the sampled worst margin `min_ξ f_L(ξ) - f_K(ξ)`.
pub fn curvature_dominates(k: &Body, l: &Body, directions: usize, stream: RngStream) -> Result<HypothesisCheck> {
    const NAME: &str = "curvature f_K <= f_L";
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: l.dim() });
    }
    if !k.has_curvature() || !l.has_curvature() {
        return Ok(HypothesisCheck::not_checkable(NAME, "curvature oracle available only for balls and ellipsoids"));
    }
    let probes = probe_directions(k.dim(), directions, stream)?;
    let margin = |t: &[f64]| {
        let (fk, fl) = (k.curvature(t).unwrap_or(f64::NAN), l.curvature(t).unwrap_or(f64::NAN));
        (fl - fk) / fl.abs().max(1.0)
    };
    let (rel, at) = worst(&probes, margin);
    let t = probes[at].coords();
    let abs = l.curvature(t).unwrap_or(f64::NAN) - k.curvature(t).unwrap_or(f64::NAN);
    Ok(HypothesisCheck {
        name: NAME.into(),
        status: if rel >= -MARGIN_TOL { HypothesisStatus::Pass } else { HypothesisStatus::Fail },
        worst_margin: Some(abs),
        worst_direction: Some(t.to_vec()),
        probes: probes.len(),
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_include_axes_and_diagonals() {
        let p = probe_directions(3, 5, RngStream::new(1, 1)).unwrap();
        assert_eq!(p.len(), 6 + 8 + 5);
    }
}
