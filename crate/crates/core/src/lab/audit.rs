//! Audits of reversed inequalities for user-supplied pairs.
//!
//! The reversal is tested against a reference constant; the constant that
//! would make the pair an equality is always reported.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::search::Goal;
use super::verify::{dims, projection_extremum, volumes, Draft};
use super::{decide_reverse, Orientation, Theorem, Verdict, VerifyConfig};
use crate::constants::c_nk;
use crate::density::Density;
use crate::error::{Error, Result};
use crate::geometry::{Body, Subspace};
use crate::sphere::{m_functional, mean_width};
use crate::stats::Propagator;
use crate::volumetrics::measures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// `|K|^{(n-1)/n} - |L|^{(n-1)/n} > (c/(√n M(L̄))) max_ξ(|K∩ξ^⊥| - |L∩ξ^⊥|)`.
    SectionMax,
    /// `max_ξ(|L|ξ^⊥| - |K|ξ^⊥|) < (1/c_{n,1})(|L|^{(n-1)/n} - |K|^{(n-1)/n})`.
    ProjMax,
    /// `min_ξ(|L|ξ^⊥| - |K|ξ^⊥|) > (c√n/w(K̄))(|L|^{(n-1)/n} - |K|^{(n-1)/n})`.
    ProjMin,
}

impl AuditMode {
    /// Reference constant used when none is given: the supremum of the
    /// implied constant over concentric balls for `SectionMax`, and 1 for
    /// `ProjMin` (`ProjMax` has an explicit constant).
    pub fn default_constant(self) -> f64 {
        match self {
            AuditMode::SectionMax => (2.0 * std::f64::consts::PI).sqrt(),
            AuditMode::ProjMax | AuditMode::ProjMin => 1.0,
        }
    }

    fn theorem(self) -> Theorem {
        match self {
            AuditMode::SectionMax => Theorem::AuditSectionMax,
            AuditMode::ProjMax => Theorem::AuditProjMax,
            AuditMode::ProjMin => Theorem::AuditProjMin,
        }
    }
}

impl fmt::Display for AuditMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditMode::SectionMax => "section_max",
            AuditMode::ProjMax => "proj_max",
            AuditMode::ProjMin => "proj_min",
        })
    }
}

impl FromStr for AuditMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "section_max" => Ok(AuditMode::SectionMax),
            "proj_max" => Ok(AuditMode::ProjMax),
            "proj_min" => Ok(AuditMode::ProjMin),
            _ => Err(Error::InvalidParameter(format!("unknown audit mode '{s}' (section_max|proj_max|proj_min)"))),
        }
    }
}

/// Tests the reversed inequality of `mode` for the pair `(K, L)`; the
/// status is `reverse_confirmed` only when the reversal holds beyond
/// three standard errors.
pub fn audit_reverse_pair(k: &Body, l: &Body, mode: AuditMode, c_ref: Option<f64>, cfg: &VerifyConfig) -> Result<Verdict> {
    cfg.validate()?;
    let n = dims(k, l)?;
    if n < 2 {
        return Err(Error::InvalidParameter("audits need n >= 2".into()));
    }
    let c = c_ref.unwrap_or(mode.default_constant());
    let nf = n as f64;
    let e = (nf - 1.0) / nf;
    let orientation = match mode {
        AuditMode::ProjMax => Orientation::Le,
        AuditMode::SectionMax | AuditMode::ProjMin => Orientation::Ge,
    };
    let mut draft = Draft::new(mode.theorem(), orientation, n, 1, cfg, Vec::new(), None);
    let mut p = Propagator::new();
    p.add(&volumes(k, l, cfg)?);
    match mode {
        AuditMode::SectionMax => {
            let stream = cfg.stream.child(11);
            let score = |x: &[f64]| x[0] - x[1];
            let found = super::search::extremum(
                Goal::Max,
                cfg,
                stream,
                super::search::frame_generator(n, n - 1, stream.child(7)),
                |f: &Subspace, s, st| measures(&[k, l], &Density::uniform(), Some(f), s, st),
                score,
            )?;
            let max = super::search::score_estimate(&found.joint, score);
            p.add(&found.joint);
            p.add_estimate(&m_functional(l, cfg.samples, cfg.stream.child(13))?);
            // x: |K|, |L|, |K∩F|, |L∩F|, M(L)
            let lhs = |x: &[f64]| x[0].powf(e) - x[1].powf(e);
            let base = |x: &[f64]| (x[2] - x[3]) / (nf.sqrt() * x[4] * x[1].powf(1.0 / nf));
            draft.sides(&p, lhs, |x| c * base(x));
            let x = p.values();
            draft.headline(
                "|K|^{(n-1)/n} - |L|^{(n-1)/n} > (c/(√n M(L̄))) max_ξ(|K∩ξ^⊥| - |L∩ξ^⊥|)",
                lhs(x),
                c * base(x),
                (base(x) > 0.0).then(|| lhs(x) / base(x)),
            );
            draft.detail("m_functional_L", x[4]);
            draft.extremal(&found, Goal::Max, max);
        }
        AuditMode::ProjMax | AuditMode::ProjMin => {
            let goal = if mode == AuditMode::ProjMax { Goal::Max } else { Goal::Min };
            let (found, ext) = projection_extremum(k, l, goal, cfg)?;
            p.add(&found.joint);
            let dv = |x: &[f64]| x[1].powf(e) - x[0].powf(e);
            let proj = |x: &[f64]| x[3] - x[2];
            if mode == AuditMode::ProjMax {
                let c1 = c_nk(n, 1)?;
                draft.sides(&p, proj, |x| dv(x) / c1);
                let x = p.values();
                draft.headline(
                    "max_ξ(|L|ξ^⊥| - |K|ξ^⊥|) <= (1/c) (|L|^{(n-1)/n} - |K|^{(n-1)/n})",
                    proj(x),
                    dv(x) / c1,
                    (proj(x) > 0.0).then(|| dv(x) / proj(x)),
                );
                draft.detail("c_n1", c1);
            } else {
                p.add_estimate(&mean_width(k, cfg.samples, cfg.stream.child(13))?);
                // w(K̄) = w(K)/|K|^{1/n}
                let base = |x: &[f64]| nf.sqrt() * x[0].powf(1.0 / nf) / x[4] * dv(x);
                draft.sides(&p, proj, |x| c * base(x));
                let x = p.values();
                draft.headline(
                    "min_ξ(|L|ξ^⊥| - |K|ξ^⊥|) >= (c√n/w(K̄)) (|L|^{(n-1)/n} - |K|^{(n-1)/n})",
                    proj(x),
                    c * base(x),
                    (base(x) > 0.0).then(|| proj(x) / base(x)),
                );
                draft.detail("mean_width_K", x[4]);
            }
            draft.extremal(&found, goal, ext);
        }
    }
    draft.detail("reference_constant", c);
    let v = &draft.v;
    let status = decide_reverse(v.lhs.as_ref().unwrap(), v.rhs.as_ref().unwrap(), v.slack.as_ref().unwrap());
    draft.v.status = status;
    Ok(draft.v)
}
