//! Bounded non-negative densities and their radial integrals.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::geometry::{Body, BodyRegistry, BodySpec};
use crate::quadrature;
use crate::text::{fmt_f64, parse_fields};

/// A user-supplied density on `R^n`.
pub trait DensityOracle: Send + Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

#[derive(Clone)]
enum Kind {
    Uniform,
    /// `(2πσ²)^{-d/2} exp(-|x|²/2σ²)`, optionally cut off outside `radius`.
    Gaussian { sigma: f64, radius: Option<f64> },
    /// Indicator of `outer \ inner`.
    Shell { outer: Body, inner: Body },
    /// `min(‖x‖_inner - 1, 1 - ‖x‖_outer)_+`: continuous, zero on `inner` and off `outer`.
    Tent { outer: Body, inner: Body },
    Custom(Arc<dyn DensityOracle>),
}

/// A density `g` with its declared sup bound, evenness, continuity and
/// support radius.
#[derive(Clone)]
pub struct Density {
    kind: Kind,
    sup_bound: Option<f64>,
    even: bool,
    continuous: bool,
    support_radius: f64,
    label: String,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("label", &self.label)
            .field("sup_bound", &self.sup_bound)
            .field("even", &self.even)
            .field("continuous", &self.continuous)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

fn gaussian_norm(d: usize, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-(d as f64) / 2.0)
}

/// `∫_a^b r^e dr`.
fn power_integral(a: f64, b: f64, e: usize) -> f64 {
    let e1 = (e + 1) as i32;
    (b.powi(e1) - a.powi(e1)) / e1 as f64
}

/// `∫_a^b r^e (α r + β) dr`.
fn linear_integral(a: f64, b: f64, e: usize, alpha: f64, beta: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let e2 = (e + 2) as i32;
    alpha * (b.powi(e2) - a.powi(e2)) / e2 as f64 + beta * power_integral(a, b, e)
}

/// `∫_0^b r^e exp(-r²/2σ²) dr` via the regularized lower incomplete gamma function.
fn gaussian_radial(b: f64, e: usize, sigma: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let s = (e as f64 + 1.0) / 2.0;
    let full = (s * 2f64.ln() - 2f64.ln() + ln_gamma(s)).exp() * sigma.powi(e as i32 + 1);
    full * gamma_lr(s, b * b / (2.0 * sigma * sigma))
}

impl Density {
    /// `g ≡ 1`: the measure is volume.
    pub fn uniform() -> Self {
        Self {
            kind: Kind::Uniform,
            sup_bound: Some(1.0),
            even: true,
            continuous: true,
            support_radius: f64::INFINITY,
            label: "uniform".into(),
        }
    }

    /// Centered Gaussian with standard deviation `sigma`, normalized in the
    /// dimension of the points it is evaluated at.
    pub fn gaussian(sigma: f64, radius: Option<f64>) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidDensity(format!("sigma must be positive, got {sigma}")));
        }
        if let Some(r) = radius {
            if !(r > 0.0) {
                return Err(Error::InvalidDensity(format!("cutoff radius must be positive, got {r}")));
            }
        }
        let label = match radius {
            Some(r) => format!("gaussian:sigma={sigma}:radius={r}"),
            None => format!("gaussian:sigma={sigma}"),
        };
        Ok(Self {
            kind: Kind::Gaussian { sigma, radius },
            sup_bound: None,
            even: true,
            continuous: radius.is_none(),
            support_radius: radius.unwrap_or(f64::INFINITY),
            label,
        })
    }

    /// Indicator of `outer \ inner`.
    pub fn shell(outer: Body, inner: Body) -> Result<Self> {
        Self::two_body(outer, inner, false)
    }

    /// Continuous tent supported in `outer \ inner`.
    pub fn tent(outer: Body, inner: Body) -> Result<Self> {
        Self::two_body(outer, inner, true)
    }

    fn two_body(outer: Body, inner: Body, tent: bool) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(Error::DimensionMismatch { expected: outer.dim(), got: inner.dim() });
        }
        let even = outer.is_symmetric() && inner.is_symmetric();
        let support_radius = outer.radial_bounds().1;
        let name = if tent { "tent" } else { "shell" };
        let label = format!("{name}:outer=({}):inner=({})", outer.label(), inner.label());
        let kind = if tent { Kind::Tent { outer, inner } } else { Kind::Shell { outer, inner } };
        Ok(Self { kind, sup_bound: Some(1.0), even, continuous: tent, support_radius, label })
    }

    /// A density from a user oracle; all metadata is declared by the caller.
    pub fn custom(
        oracle: Arc<dyn DensityOracle>,
        sup_bound: Option<f64>,
        even: bool,
        continuous: bool,
        support_radius: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if let Some(s) = sup_bound {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidDensity(format!("sup bound must be finite and non-negative, got {s}")));
            }
        }
        if !(support_radius > 0.0) {
            return Err(Error::InvalidDensity("support radius must be positive".into()));
        }
        Ok(Self { kind: Kind::Custom(oracle), sup_bound, even, continuous, support_radius, label: label.into() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }

    /// Whether `g(x)` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        matches!(self.kind, Kind::Uniform | Kind::Gaussian { .. })
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `‖g‖_∞` bound for points of `R^d`.
    pub fn sup_bound(&self, d: usize) -> Option<f64> {
        match self.kind {
            Kind::Gaussian { sigma, .. } => Some(gaussian_norm(d, sigma)),
            _ => self.sup_bound,
        }
    }

    /// `g(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Uniform => 1.0,
            Kind::Gaussian { sigma, radius } => {
                let r2 = x.iter().map(|v| v * v).sum::<f64>();
                if radius.is_some_and(|r| r2 > r * r) {
                    0.0
                } else {
                    gaussian_norm(x.len(), *sigma) * (-r2 / (2.0 * sigma * sigma)).exp()
                }
            }
            Kind::Shell { outer, inner } => {
                let (go, gi) = (outer.gauge(x), inner.gauge(x));
                if go <= 1.0 && gi > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Tent { outer, inner } => (inner.gauge(x) - 1.0).min(1.0 - outer.gauge(x)).max(0.0),
            Kind::Custom(o) => o.eval(x),
        }
    }

    /// `∫_a^b r^e g(rθ) dr` for a unit vector `θ` of the ambient space.
    pub fn radial_integral(&self, theta: &[f64], a: f64, b: f64, e: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => power_integral(a, b, e),
            Kind::Gaussian { sigma, radius } => {
                let b = radius.map_or(b, |r| b.min(r));
                if b <= a {
                    return 0.0;
                }
                let c = gaussian_norm(theta.len(), *sigma);
                c * (gaussian_radial(b, e, *sigma) - gaussian_radial(a, e, *sigma))
            }
            Kind::Shell { outer, inner } => {
                let lo = a.max(inner.radial(theta));
                let hi = b.min(outer.radial(theta));
                if hi > lo {
                    power_integral(lo, hi, e)
                } else {
                    0.0
                }
            }
            Kind::Tent { outer, inner } => {
                let (ro, ri) = (outer.radial(theta), inner.radial(theta));
                if ro <= ri {
                    return 0.0;
                }
                let kink = 2.0 / (1.0 / ri + 1.0 / ro);
                linear_integral(a.max(ri), b.min(kink), e, 1.0 / ri, -1.0)
                    + linear_integral(a.max(kink), b.min(ro), e, -1.0 / ro, 1.0)
            }
            Kind::Custom(o) => {
                let b = b.min(self.support_radius);
                quadrature::integrate(
                    |r| {
                        let p: Vec<f64> = theta.iter().map(|t| r * t).collect();
                        r.powi(e as i32) * o.eval(&p)
                    },
                    a,
                    b,
                )
            }
        }
    }
}

/// Declarative description of a density: `uniform`, `gaussian:sigma=1`,
/// `gaussian:sigma=1:radius=2`, `shell:outer=(ball:n=3):inner=(...)`,
/// `tent:outer=(...):inner=(...)`, `custom:name=...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform,
    Gaussian {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Shell {
        outer: BodySpec,
        inner: BodySpec,
    },
    Tent {
        outer: BodySpec,
        inner: BodySpec,
    },
    Custom {
        name: String,
    },
}

impl DensitySpec {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim_start();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() });
        }
        let f = parse_fields(s, 0)?;
        let spec = match f.family {
            "uniform" => {
                f.only(&[])?;
                Self::Uniform
            }
            "gaussian" => {
                f.only(&["sigma", "radius"])?;
                let radius = match f.get("radius") {
                    Some(_) => Some(f.f64("radius")?),
                    None => None,
                };
                Self::Gaussian { sigma: f.f64_or("sigma", 1.0)?, radius }
            }
            "shell" | "tent" => {
                f.only(&["outer", "inner"])?;
                let (o, opos) = f.nested("outer")?;
                let (i, ipos) = f.nested("inner")?;
                let outer = BodySpec::parse(o).map_err(|e| shift(e, opos))?;
                let inner = BodySpec::parse(i).map_err(|e| shift(e, ipos))?;
                if f.family == "shell" {
                    Self::Shell { outer, inner }
                } else {
                    Self::Tent { outer, inner }
                }
            }
            "custom" => {
                f.only(&["name"])?;
                Self::Custom { name: f.require("name")?.value.to_string() }
            }
            other => {
                return Err(Error::Parse {
                    pos: f.pos,
                    msg: format!("unknown density '{other}' (expected uniform, gaussian, shell, tent, custom)"),
                })
            }
        };
        Ok(spec)
    }

    pub fn build_with(&self, bodies: &BodyRegistry, densities: &DensityRegistry) -> Result<Density> {
        match self {
            Self::Uniform => Ok(Density::uniform()),
            Self::Gaussian { sigma, radius } => Density::gaussian(*sigma, *radius),
            Self::Shell { outer, inner } => Density::shell(outer.build_with(bodies)?, inner.build_with(bodies)?),
            Self::Tent { outer, inner } => Density::tent(outer.build_with(bodies)?, inner.build_with(bodies)?),
            Self::Custom { name } => densities.get(name),
        }
    }

    pub fn build(&self) -> Result<Density> {
        self.build_with(&BodyRegistry::default(), &DensityRegistry::default())
    }
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + by, msg },
        other => other,
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => write!(f, "uniform"),
            Self::Gaussian { sigma, radius: None } => write!(f, "gaussian:sigma={}", fmt_f64(*sigma)),
            Self::Gaussian { sigma, radius: Some(r) } => {
                write!(f, "gaussian:sigma={}:radius={}", fmt_f64(*sigma), fmt_f64(*r))
            }
            Self::Shell { outer, inner } => write!(f, "shell:outer=({outer}):inner=({inner})"),
            Self::Tent { outer, inner } => write!(f, "tent:outer=({outer}):inner=({inner})"),
            Self::Custom { name } => write!(f, "custom:name={name}"),
        }
    }
}

impl FromStr for DensitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Named custom densities.
#[derive(Clone, Default)]
pub struct DensityRegistry {
    densities: BTreeMap<String, Density>,
}

impl DensityRegistry {
    pub fn insert(&mut self, name: impl Into<String>, density: Density) {
        self.densities.insert(name.into(), density);
    }

    pub fn get(&self, name: &str) -> Result<Density> {
        self.densities
            .get(name)
            .cloned()
            .ok_or_else(|| Error::InvalidDensity(format!("no custom density registered as '{name}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_radial_matches_quadrature() {
        let g = Density::gaussian(0.7, None).unwrap();
        let theta = [0.0, 1.0, 0.0];
        for e in [0usize, 1, 2, 4] {
            let closed = g.radial_integral(&theta, 0.3, 1.9, e);
            let quad = quadrature::integrate(|r| r.powi(e as i32) * g.eval(&[0.0, r, 0.0]), 0.3, 1.9);
            assert!((closed - quad).abs() < 1e-12 * quad.abs().max(1e-300), "e={e}: {closed} vs {quad}");
        }
    }

    #[test]
    fn tent_matches_quadrature() {
        let outer = Body::ball(2, 2.0).unwrap();
        let inner = Body::ellipsoid_axes(&[1.0, 0.5]).unwrap();
        let t = Density::tent(outer, inner).unwrap();
        let theta = [0.6, 0.8];
        let closed = t.radial_integral(&theta, 0.0, 3.0, 1);
        let kink = {
            let ri = 1.0 / ((0.6f64 / 1.0).powi(2) + (0.8f64 / 0.5).powi(2)).sqrt();
            2.0 / (1.0 / ri + 0.5)
        };
        let f = |r: f64| r * t.eval(&[0.6 * r, 0.8 * r]);
        let ri = 1.0 / (0.36f64 + 2.56).sqrt();
        let quad = quadrature::integrate(f, ri, kink) + quadrature::integrate(f, kink, 2.0);
        assert!((closed - quad).abs() < 1e-10, "{closed} vs {quad}");
    }

    #[test]
    fn specs_round_trip() {
        for s in ["uniform", "gaussian:sigma=1", "gaussian:sigma=0.5:radius=2", "shell:outer=(ball:n=3):inner=(dilate:factor=0.5:inner=(ball:n=3))"] {
            let d = DensitySpec::parse(s).unwrap();
            assert_eq!(d.to_string(), s);
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(DensitySpec::parse(&json).unwrap(), d);
        }
        assert!(DensitySpec::parse("gaussian:sigma=-1").unwrap().build().is_err());
        match DensitySpec::parse("shell:outer=(ball:n=3):inner=(cub:n=3)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 30),
            other => panic!("{other:?}"),
        }
    }
}
