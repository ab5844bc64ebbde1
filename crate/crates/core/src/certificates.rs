//! Ellipsoid containment certificates and the distance bounds they imply.
//!
//! Ellipsoids are intersection bodies of every order and projection bodies,
//! so an ellipsoid inside or around a body bounds each class distance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{contains, Body};
use crate::rng::RngStream;
use crate::sphere::mc_sphere;
use crate::stats::{Joint, Propagator, SampleEstimate};
use crate::volumetrics::volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Encloses,
    Inscribed,
}

/// An ellipsoid `E = A·B₂ⁿ` with a sampled containment margin against its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidCertificate {
    /// Row-major `n×n` shape matrix.
    pub shape: Vec<f64>,
    pub n: usize,
    pub relation: Relation,
    pub target: String,
    pub margin: f64,
    pub probes: usize,
}

impl EllipsoidCertificate {
    /// Builds a certificate from a user-supplied shape matrix and checks it
    /// against `target` on sampled directions.
    pub fn from_matrix(
        target: &Body,
        a: DMatrix<f64>,
        relation: Relation,
        directions: usize,
        stream: RngStream,
    ) -> Result<Self> {
        let n = target.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        let e = Body::ellipsoid(a.clone())?;
        let report = match relation {
            Relation::Encloses => contains(&e, target, directions, stream)?,
            Relation::Inscribed => contains(target, &e, directions, stream)?,
        };
        if !report.pass {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid fails containment against {} (margin {:.3e})",
                target.label(),
                report.margin
            )));
        }
        Ok(Self {
            shape: a.transpose().iter().copied().collect(),
            n,
            relation,
            target: target.label().to_string(),
            margin: report.margin,
            probes: report.probes,
        })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.shape)
    }

    pub fn body(&self) -> Result<Body> {
        Body::ellipsoid(self.matrix())
    }
}

/// Closed-form ellipsoid containing `k` (cube → √n·B₂ⁿ, cross-polytope → B₂ⁿ, ...).
pub fn enclosing_ellipsoid(k: &Body, directions: usize, stream: RngStream) -> Result<EllipsoidCertificate> {
    let a = k
        .enclosing_ellipsoid()
        .ok_or_else(|| Error::NoCertificate(k.label().to_string()))?;
    EllipsoidCertificate::from_matrix(k, a, Relation::Encloses, directions, stream)
}

/// Closed-form ellipsoid contained in `l` (cube → B₂ⁿ, cross-polytope → n^{-1/2}·B₂ⁿ, ...).
pub fn inscribed_ellipsoid(l: &Body, directions: usize, stream: RngStream) -> Result<EllipsoidCertificate> {
    let a = l
        .inscribed_ellipsoid()
        .ok_or_else(|| Error::NoCertificate(l.label().to_string()))?;
    EllipsoidCertificate::from_matrix(l, a, Relation::Inscribed, directions, stream)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Ovr,
    Dk,
    Vr,
    W,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ovr" => Ok(Self::Ovr),
            "dk" | "d_k" => Ok(Self::Dk),
            "dvr" | "vr" => Ok(Self::Vr),
            "dw" | "w" => Ok(Self::W),
            other => Err(Error::InvalidParameter(format!("unknown distance kind '{other}' (ovr|dk|dvr|dw)"))),
        }
    }
}

/// An upper bound for a class distance, witnessed by `certificate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub kind: DistanceKind,
    pub value: SampleEstimate,
    pub certificate: EllipsoidCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

fn volume_ratio(big: &Body, small: &Body, samples: usize, stream: RngStream) -> Result<SampleEstimate> {
    let n = big.dim() as f64;
    let mut p = Propagator::new();
    p.add_estimate(&volume(big, samples, stream.child(1))?);
    p.add_estimate(&volume(small, samples, stream.child(2))?);
    Ok(p.estimate(|x| (x[0] / x[1]).powf(1.0 / n)))
}

/// Ratio `E f(θ) / E g(θ)` over common directions.
fn paired_ratio<F, G>(n: usize, samples: usize, stream: RngStream, f: F, g: G, power: f64) -> Result<SampleEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    G: Fn(&[f64]) -> f64 + Sync + Send,
{
    let m = mc_sphere(n, 2, samples, stream, |t, out| {
        out[0] = f(t);
        out[1] = g(t);
    })?;
    let mut p = Propagator::new();
    p.add(&Joint::from_moments(&m, &[1.0, 1.0], stream));
    Ok(p.estimate(|x| (x[0] / x[1]).powf(power)))
}

/// `(|E|/|K|)^{1/n}` for the enclosing certificate `E`.
pub fn ovr_bound(k: &Body, order: usize, cert: &EllipsoidCertificate, samples: usize, stream: RngStream) -> Result<DistanceBound> {
    let e = cert.body()?;
    Ok(DistanceBound {
        kind: DistanceKind::Ovr,
        value: volume_ratio(&e, k, samples, stream)?,
        certificate: cert.clone(),
        k: Some(order),
    })
}

/// `(∫ρ_L^k / ∫ρ_D^k)^{1/k}` for the inscribed certificate `D`.
pub fn dk_bound(l: &Body, order: usize, cert: &EllipsoidCertificate, samples: usize, stream: RngStream) -> Result<DistanceBound> {
    if order < 1 || order >= l.dim() {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k={order}")));
    }
    let d = cert.body()?;
    let pow = order as i32;
    let value = match (l.ball_radius(), d.ball_radius()) {
        (Some(rl), Some(rd)) => SampleEstimate::exact(rl / rd),
        _ => paired_ratio(l.dim(), samples, stream, |t| l.radial(t).powi(pow), |t| d.radial(t).powi(pow), 1.0 / order as f64)?,
    };
    Ok(DistanceBound { kind: DistanceKind::Dk, value, certificate: cert.clone(), k: Some(order) })
}

/// `(|L|/|D|)^{1/n}` for the inscribed certificate `D`.
pub fn dvr_bound(l: &Body, cert: &EllipsoidCertificate, samples: usize, stream: RngStream) -> Result<DistanceBound> {
    let d = cert.body()?;
    Ok(DistanceBound {
        kind: DistanceKind::Vr,
        value: volume_ratio(l, &d, samples, stream)?,
        certificate: cert.clone(),
        k: None,
    })
}

/// `w(E)/w(K)` for the enclosing certificate `E`.
pub fn dw_bound(k: &Body, cert: &EllipsoidCertificate, samples: usize, stream: RngStream) -> Result<DistanceBound> {
    if !k.has_support() {
        return Err(Error::MissingOracle("support"));
    }
    let e = cert.body()?;
    let value = match (e.ball_radius(), k.ball_radius()) {
        (Some(re), Some(rk)) => SampleEstimate::exact(re / rk),
        _ => paired_ratio(
            k.dim(),
            samples,
            stream,
            |t| e.support(t).unwrap_or(f64::NAN),
            |t| k.support(t).unwrap_or(f64::NAN),
            1.0,
        )?,
    };
    Ok(DistanceBound { kind: DistanceKind::W, value, certificate: cert.clone(), k: None })
}
