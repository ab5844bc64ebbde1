//! Verifiers for volume-difference inequalities.
//!
//! Each verifier evaluates an inequality whose constants are all explicit
//! once an ellipsoid certificate `D` is fixed, with the extremum over
//! subspaces (or directions) replaced by a sampled extremum. A sampled max
//! never exceeds the true max and a sampled min is never below the true
//! min, so a check that holds beyond its error bars is sound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::HypothesisCheck;
use crate::rng::RngStream;
use crate::stats::SampleEstimate;

mod audit;
mod search;
mod verify;

pub use audit::{audit_reverse_pair, AuditMode};
pub use verify::{
    check_blaschke_petkantschin, verify_low, verify_low_measure, verify_measure_upper, verify_power_upper,
    verify_projection_lower, verify_projection_upper, verify_section_lower, verify_section_upper,
};

pub const VERDICT_SCHEMA: &str = "vdlab.verdict/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    SectionUpper,
    MeasureUpper,
    PowerUpper,
    SectionLower,
    Low,
    LowMeasure,
    ProjLower,
    ProjUpper,
    BpIdentity,
    AuditSectionMax,
    AuditProjMax,
    AuditProjMin,
}

impl Theorem {
    pub const VERIFIABLE: [Theorem; 9] = [
        Theorem::SectionUpper,
        Theorem::MeasureUpper,
        Theorem::PowerUpper,
        Theorem::SectionLower,
        Theorem::Low,
        Theorem::LowMeasure,
        Theorem::ProjLower,
        Theorem::ProjUpper,
        Theorem::BpIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::SectionUpper => "section-upper",
            Theorem::MeasureUpper => "measure-upper",
            Theorem::PowerUpper => "power-upper",
            Theorem::SectionLower => "section-lower",
            Theorem::Low => "low",
            Theorem::LowMeasure => "low-measure",
            Theorem::ProjLower => "proj-lower",
            Theorem::ProjUpper => "proj-upper",
            Theorem::BpIdentity => "bp-identity",
            Theorem::AuditSectionMax => "audit-section-max",
            Theorem::AuditProjMax => "audit-proj-max",
            Theorem::AuditProjMin => "audit-proj-min",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::VERIFIABLE
            .iter()
            .chain(&[Theorem::AuditSectionMax, Theorem::AuditProjMax, Theorem::AuditProjMin])
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Inconclusive,
    HypothesisFailed,
    ReverseConfirmed,
    /// The checked inequality fails beyond its error bars although every
    /// hypothesis passed.
    Investigate,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified | Status::ReverseConfirmed => 0,
            Status::Inconclusive => 2,
            Status::HypothesisFailed => 3,
            Status::Investigate => 4,
        }
    }

    fn severity(self) -> u8 {
        match self {
            Status::Verified | Status::ReverseConfirmed => 0,
            Status::Inconclusive => 1,
            Status::HypothesisFailed => 2,
            Status::Investigate => 3,
        }
    }

    /// The more severe of two statuses.
    pub fn worst(self, other: Status) -> Status {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

/// The theorem's displayed form, evaluated with the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub form: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Constant that would make the displayed form an equality, when the
    /// statement carries an unspecified absolute constant.
    pub implied_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremal {
    pub goal: String,
    /// Columns of the extremal frame (a single normal for projections).
    pub frame: Vec<Vec<f64>>,
    pub value: SampleEstimate,
    pub frames_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub n: usize,
    pub k: usize,
    pub frames: usize,
    pub samples: usize,
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: String,
    pub theorem: Theorem,
    pub status: Status,
    pub orientation: Orientation,
    pub lhs: Option<SampleEstimate>,
    pub rhs: Option<SampleEstimate>,
    /// Positive when the checked relation holds.
    pub slack: Option<SampleEstimate>,
    pub headline: Option<Headline>,
    pub extremal: Option<Extremal>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub certificate: Option<Vec<f64>>,
    pub details: BTreeMap<String, f64>,
    pub meta: Meta,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Sampling budget and seed for one verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Initial number of candidate frames (or directions).
    pub frames: usize,
    /// Cap for frame doubling.
    pub max_frames: usize,
    /// Samples for global quantities and for the re-estimated extremum.
    pub samples: usize,
    /// Samples per candidate frame while screening.
    pub screen_samples: usize,
    /// Random probe directions for containment and curvature hypotheses.
    pub hypothesis_directions: usize,
    pub stream: RngStream,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            frames: 4096,
            max_frames: 4 * 4096,
            samples: 100_000,
            screen_samples: 256,
            hypothesis_directions: 10_000,
            stream: RngStream::from_env(),
        }
    }
}

impl VerifyConfig {
    pub fn with_frames(mut self, frames: usize) -> Self {
        self.frames = frames;
        self.max_frames = 4 * frames;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_stream(mut self, stream: RngStream) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.samples == 0 || self.screen_samples == 0 {
            return Err(Error::InvalidParameter("frames and samples must be positive".into()));
        }
        if self.max_frames < self.frames {
            return Err(Error::InvalidParameter("max_frames must be at least frames".into()));
        }
        Ok(())
    }
}

fn tolerance(lhs: f64, rhs: f64) -> f64 {
    1e-9 * lhs.abs().max(rhs.abs())
}

/// Verified when the slack clears three standard errors, investigate when
/// it is negative beyond them, inconclusive otherwise. `floor` is an absolute
/// rounding allowance taken from the magnitude of the inputs, since both
/// sides may themselves be differences that cancel.
fn decide(lhs: &SampleEstimate, rhs: &SampleEstimate, slack: &SampleEstimate, floor: f64) -> Status {
    let eps = tolerance(lhs.value, rhs.value) + floor;
    let band = 3.0 * slack.std_error;
    if slack.value >= band - eps {
        Status::Verified
    } else if slack.value < -band - eps {
        Status::Investigate
    } else {
        Status::Inconclusive
    }
}

/// A reversal is confirmed only when its slack is strictly positive beyond
/// the error bars.
fn decide_reverse(lhs: &SampleEstimate, rhs: &SampleEstimate, slack: &SampleEstimate) -> Status {
    let eps = tolerance(lhs.value, rhs.value);
    if slack.value > 3.0 * slack.std_error + eps {
        Status::ReverseConfirmed
    } else {
        Status::Inconclusive
    }
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    Ok(())
}

/// `sign(x)·|x|^p`.
fn signed_pow(x: f64, p: f64) -> f64 {
    x.signum() * x.abs().powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_ids_round_trip() {
        for t in Theorem::VERIFIABLE {
            assert_eq!(t.as_str().parse::<Theorem>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.as_str()));
        }
    }

    #[test]
    fn status_rule() {
        let e = |v, se| SampleEstimate::new(v, se, 1, RngStream::new(0, 0), crate::stats::Method::Mc);
        let (l, r) = (e(1.0, 0.0), e(2.0, 0.0));
        assert_eq!(decide(&l, &r, &e(0.4, 0.1), 0.0), Status::Verified);
        assert_eq!(decide(&l, &r, &e(0.2, 0.1), 0.0), Status::Inconclusive);
        assert_eq!(decide(&l, &r, &e(-0.4, 0.1), 0.0), Status::Investigate);
        assert_eq!(decide(&l, &r, &e(0.0, 0.0), 0.0), Status::Verified);
        assert_eq!(decide_reverse(&l, &r, &e(0.0, 0.0)), Status::Inconclusive);
        let (tiny, zero) = (e(1.3e-15, 0.0), e(0.0, 0.0));
        assert_eq!(decide(&tiny, &zero, &e(-1.3e-15, 0.0), 0.0), Status::Investigate);
        assert_eq!(decide(&tiny, &zero, &e(-1.3e-15, 0.0), 4e-12), Status::Verified);
    }
}
