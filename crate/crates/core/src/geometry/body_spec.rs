use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Body, RadialOracle};
use crate::error::{Error, Result};
use crate::text::{fmt_f64, parse_fields};

/// An `ℓ_p` exponent; serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(pub f64);

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Self(x)),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity") => Ok(Self(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid exponent '{s}'"))),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// Declarative description of a body.
///
/// Text form: `ball:n=3`, `lp:n=4:p=3`, `ellipsoid:n=3:axes=2,1,1`,
/// `dilate:factor=0.5:inner=(ball:n=3)`. The JSON form uses the same keys
/// plus a `family` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        n: usize,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        radius: f64,
    },
    #[serde(alias = "lp_ball")]
    Lp {
        n: usize,
        p: PExponent,
    },
    Cube {
        n: usize,
    },
    #[serde(alias = "cross_polytope")]
    Cross {
        n: usize,
    },
    Ellipsoid {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axes: Option<Vec<f64>>,
        /// Row-major `n×n` shape matrix.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<Vec<f64>>,
    },
    Dilate {
        factor: f64,
        inner: Box<BodySpec>,
    },
    Custom {
        name: String,
    },
}

impl BodySpec {
    pub fn ball(n: usize) -> Self {
        Self::Ball { n, radius: 1.0 }
    }

    pub fn dilate(self, factor: f64) -> Self {
        Self::Dilate { factor, inner: Box::new(self) }
    }

    /// Parses the text form, or JSON when the input starts with `{`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim_start();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() });
        }
        parse_at(s, 0)
    }

    /// Builds the body, resolving `custom` names in `registry`.
    pub fn build_with(&self, registry: &BodyRegistry) -> Result<Body> {
        self.validate()?;
        match self {
            Self::Ball { n, radius } => Body::ball(*n, *radius),
            Self::Lp { n, p } => Body::lp_ball(*n, p.0, 1.0),
            Self::Cube { n } => Body::cube(*n),
            Self::Cross { n } => Body::cross_polytope(*n),
            Self::Ellipsoid { n, axes: Some(a), shape: None } => {
                if a.len() != *n {
                    return Err(Error::InvalidBody(format!("ellipsoid needs {n} axes, got {}", a.len())));
                }
                Body::ellipsoid_axes(a)
            }
            Self::Ellipsoid { n, axes: None, shape: Some(m) } => {
                if m.len() != n * n {
                    return Err(Error::InvalidBody(format!("ellipsoid shape needs {} entries, got {}", n * n, m.len())));
                }
                Body::ellipsoid(DMatrix::from_row_slice(*n, *n, m))
            }
            Self::Ellipsoid { .. } => Err(Error::InvalidBody("ellipsoid needs exactly one of axes= or shape=".into())),
            Self::Dilate { factor, inner } => inner.build_with(registry)?.dilate(*factor),
            Self::Custom { name } => registry.get(name),
        }
    }

    /// Builds a canonical body; `custom` specs fail.
    pub fn build(&self) -> Result<Body> {
        self.build_with(&BodyRegistry::default())
    }

    fn validate(&self) -> Result<()> {
        let n = match self {
            Self::Ball { n, .. } | Self::Lp { n, .. } | Self::Cube { n } | Self::Cross { n } | Self::Ellipsoid { n, .. } => *n,
            Self::Dilate { factor, .. } => {
                if !(*factor > 0.0) || !factor.is_finite() {
                    return Err(Error::InvalidBody(format!("dilate factor must be positive, got {factor}")));
                }
                return Ok(());
            }
            Self::Custom { .. } => return Ok(()),
        };
        if n < 2 {
            return Err(Error::InvalidBody(format!("dimension must be at least 2, got {n}")));
        }
        if let Self::Lp { p, .. } = self {
            if !(p.0 > 0.0) {
                return Err(Error::InvalidBody(format!("lp exponent must be positive, got {}", p.0)));
            }
        }
        Ok(())
    }

    /// Ambient dimension, when it can be read off the spec.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Ball { n, .. } | Self::Lp { n, .. } | Self::Cube { n } | Self::Cross { n } | Self::Ellipsoid { n, .. } => Some(*n),
            Self::Dilate { inner, .. } => inner.dim(),
            Self::Custom { .. } => None,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ball { n, radius } if *radius == 1.0 => write!(f, "ball:n={n}"),
            Self::Ball { n, radius } => write!(f, "ball:n={n}:radius={}", fmt_f64(*radius)),
            Self::Lp { n, p } => write!(f, "lp:n={n}:p={}", fmt_f64(p.0)),
            Self::Cube { n } => write!(f, "cube:n={n}"),
            Self::Cross { n } => write!(f, "cross:n={n}"),
            Self::Ellipsoid { n, axes, shape } => {
                write!(f, "ellipsoid:n={n}")?;
                if let Some(a) = axes {
                    write!(f, ":axes={}", join(a))?;
                }
                if let Some(s) = shape {
                    write!(f, ":shape={}", join(s))?;
                }
                Ok(())
            }
            Self::Dilate { factor, inner } => write!(f, "dilate:factor={}:inner=({inner})", fmt_f64(*factor)),
            Self::Custom { name } => write!(f, "custom:name={name}"),
        }
    }
}

impl FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn parse_at(s: &str, offset: usize) -> Result<BodySpec> {
    let f = parse_fields(s, offset)?;
    let spec = match f.family {
        "ball" => {
            f.only(&["n", "radius"])?;
            BodySpec::Ball { n: f.usize("n")?, radius: f.f64_or("radius", 1.0)? }
        }
        "lp" | "lp_ball" => {
            f.only(&["n", "p"])?;
            BodySpec::Lp { n: f.usize("n")?, p: PExponent(f.f64("p")?) }
        }
        "cube" => {
            f.only(&["n"])?;
            BodySpec::Cube { n: f.usize("n")? }
        }
        "cross" | "cross_polytope" => {
            f.only(&["n"])?;
            BodySpec::Cross { n: f.usize("n")? }
        }
        "ellipsoid" => {
            f.only(&["n", "axes", "shape"])?;
            BodySpec::Ellipsoid { n: f.usize("n")?, axes: f.list("axes")?, shape: f.list("shape")? }
        }
        "dilate" => {
            f.only(&["factor", "inner"])?;
            let (inner, pos) = f.nested("inner")?;
            BodySpec::Dilate { factor: f.f64("factor")?, inner: Box::new(parse_at(inner, pos)?) }
        }
        "custom" => {
            f.only(&["name"])?;
            BodySpec::Custom { name: f.require("name")?.value.to_string() }
        }
        other => {
            return Err(Error::Parse {
                pos: f.pos,
                msg: format!("unknown body family '{other}' (expected ball, lp, cube, cross, ellipsoid, dilate, custom)"),
            })
        }
    };
    spec.validate().map_err(|e| Error::Parse { pos: f.pos, msg: e.to_string() })?;
    Ok(spec)
}

/// Named custom bodies available to `custom:name=...` specs.
#[derive(Clone, Default)]
pub struct BodyRegistry {
    bodies: BTreeMap<String, Body>,
}

impl BodyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, body: Body) {
        self.bodies.insert(name.into(), body);
    }

    /// Registers a radial oracle with declared bounds and flags.
    pub fn register(
        &mut self,
        name: &str,
        dim: usize,
        oracle: Arc<dyn RadialOracle>,
        bounds: (f64, f64),
        symmetric: bool,
        convex: bool,
    ) -> Result<()> {
        let body = Body::custom(dim, oracle, bounds, symmetric, convex, format!("custom:name={name}"))?;
        self.insert(name, body);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Body> {
        self.bodies
            .get(name)
            .cloned()
            .ok_or_else(|| Error::InvalidBody(format!("no custom body registered as '{name}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_examples_parse() {
        assert_eq!(BodySpec::parse("ball:n=3").unwrap(), BodySpec::ball(3));
        assert_eq!(BodySpec::parse("lp:n=4:p=3").unwrap(), BodySpec::Lp { n: 4, p: PExponent(3.0) });
        let e = BodySpec::parse("ellipsoid:n=3:axes=2,1,1").unwrap();
        assert_eq!(e, BodySpec::Ellipsoid { n: 3, axes: Some(vec![2.0, 1.0, 1.0]), shape: None });
        let d = BodySpec::parse("dilate:factor=0.5:inner=(ball:n=3)").unwrap();
        assert_eq!(d, BodySpec::ball(3).dilate(0.5));
    }

    #[test]
    fn display_round_trips() {
        for s in ["ball:n=3", "lp:n=4:p=inf", "cross:n=5", "ellipsoid:n=2:shape=2,0.5,0.5,1", "dilate:factor=2:inner=(dilate:factor=0.5:inner=(cube:n=3))"] {
            let spec = BodySpec::parse(s).unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(BodySpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn json_uses_identical_keys() {
        let spec = BodySpec::parse("dilate:factor=0.5:inner=(lp:n=4:p=inf)").unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"dilate","factor":0.5,"inner":{"family":"lp","n":4,"p":"inf"}}"#);
        assert_eq!(BodySpec::parse(&json).unwrap(), spec);
    }

    #[test]
    fn invalid_specs_are_rejected_with_positions() {
        assert!(matches!(BodySpec::parse("lp:n=3:p=-1"), Err(Error::Parse { .. })));
        assert!(matches!(BodySpec::parse("dilate:factor=0:inner=(ball:n=3)"), Err(Error::Parse { .. })));
        assert!(matches!(BodySpec::parse("ball:n=1"), Err(Error::Parse { .. })));
        match BodySpec::parse("dilate:factor=1:inner=(bal:n=3)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 23),
            other => panic!("{other:?}"),
        }
        assert!(BodySpec::parse("ellipsoid:n=2:shape=1,2,2,1").unwrap().build().is_err());
    }
}
