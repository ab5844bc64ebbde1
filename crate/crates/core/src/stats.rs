//! Sample moments, estimates and first-order error propagation.

use serde::{Deserialize, Serialize};

use crate::par;
use crate::rng::RngStream;

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mc,
    Derived,
}

impl Method {
    /// Exact only if both inputs are exact.
    pub fn join(self, other: Method) -> Method {
        match (self, other) {
            (Method::Exact, Method::Exact) => Method::Exact,
            (Method::Mc, Method::Mc) => Method::Mc,
            _ => Method::Derived,
        }
    }
}

/// A value with its standard error and sampling provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub ci95: (f64, f64),
    pub method: Method,
}

impl SampleEstimate {
    pub fn new(value: f64, std_error: f64, samples: u64, stream: RngStream, method: Method) -> Self {
        let std_error = std_error.max(0.0);
        Self {
            value,
            std_error,
            samples,
            seed: stream.seed,
            stream_id: stream.stream_id,
            ci95: (value - 1.96 * std_error, value + 1.96 * std_error),
            method,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, 0, RngStream::new(0, 0), Method::Exact)
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    /// Multiplies value and error by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.value *= factor;
        out.std_error *= factor.abs();
        out.ci95 = (out.value - 1.96 * out.std_error, out.value + 1.96 * out.std_error);
        out
    }

    /// `|self - other| <= z * sqrt(se1^2 + se2^2) + abs_tol`.
    pub fn agrees_with(&self, other: &SampleEstimate, z: f64, abs_tol: f64) -> bool {
        let se = self.std_error.hypot(other.std_error);
        (self.value - other.value).abs() <= z * se + abs_tol
    }
}

/// Streaming mean and co-moment matrix of a vector-valued sample (Welford).
#[derive(Debug, Clone)]
pub struct Moments {
    count: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        let mut delta = [0.0f64; 8];
        let mut heap;
        let delta: &mut [f64] = if d <= 8 {
            &mut delta[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        for i in 0..d {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] * inv;
        }
        for i in 0..d {
            let after = x[i] - self.mean[i];
            for j in 0..d {
                self.comoment[i * d + j] += delta[j] * after;
            }
        }
    }

    /// Chan et al. parallel merge.
    pub fn merge(mut self, other: Moments) -> Moments {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let d = self.dim();
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta: Vec<f64> = (0..d).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..d {
            self.mean[i] += delta[i] * nb / n;
        }
        self.count += other.count;
        self
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Covariance matrix of the sample mean (row-major).
    pub fn mean_covariance(&self) -> Vec<f64> {
        let n = self.count as f64;
        if self.count < 2 {
            return vec![0.0; self.comoment.len()];
        }
        self.comoment.iter().map(|c| c / ((n - 1.0) * n)).collect()
    }

    pub fn std_error(&self, i: usize) -> f64 {
        let d = self.dim();
        self.mean_covariance()[i * d + i].max(0.0).sqrt()
    }
}

/// Merges per-item moments in a fixed pairwise order.
pub fn merge_all(items: Vec<Moments>, dim: usize) -> Moments {
    par::reduce_pairwise(items, Moments::merge).unwrap_or_else(|| Moments::new(dim))
}

/// Several estimates computed on common samples, with their covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub values: Vec<f64>,
    pub cov: Vec<f64>,
    pub samples: u64,
    pub stream: RngStream,
    pub method: Method,
}

impl Joint {
    pub fn exact(values: Vec<f64>) -> Self {
        let d = values.len();
        Self { values, cov: vec![0.0; d * d], samples: 0, stream: RngStream::new(0, 0), method: Method::Exact }
    }

    /// Mean of the moments scaled componentwise by `scale`.
    pub fn from_moments(m: &Moments, scale: &[f64], stream: RngStream) -> Self {
        let d = m.dim();
        let cov = m.mean_covariance();
        let values = (0..d).map(|i| m.mean()[i] * scale[i]).collect();
        let cov = (0..d * d).map(|ij| cov[ij] * scale[ij / d] * scale[ij % d]).collect();
        Self { values, cov, samples: m.count(), stream, method: Method::Mc }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn std_error(&self, i: usize) -> f64 {
        self.cov[i * self.dim() + i].max(0.0).sqrt()
    }

    /// Replaces component `i` with an exact value.
    pub fn set_exact(&mut self, i: usize, value: f64) {
        let d = self.dim();
        self.values[i] = value;
        for j in 0..d {
            self.cov[i * d + j] = 0.0;
            self.cov[j * d + i] = 0.0;
        }
    }

    pub fn component(&self, i: usize) -> SampleEstimate {
        let method = if self.std_error(i) == 0.0 && self.method != Method::Mc { Method::Exact } else { self.method };
        SampleEstimate::new(self.values[i], self.std_error(i), self.samples, self.stream, method)
    }

    pub fn from_estimate(e: &SampleEstimate) -> Self {
        Self {
            values: vec![e.value],
            cov: vec![e.std_error * e.std_error],
            samples: e.samples,
            stream: RngStream::new(e.seed, e.stream_id),
            method: e.method,
        }
    }
}

/// First-order (delta method) propagation over independent blocks of
/// correlated inputs.
#[derive(Debug, Default, Clone)]
pub struct Propagator {
    values: Vec<f64>,
    blocks: Vec<(usize, Vec<f64>)>,
    samples: u64,
    all_exact: bool,
    any: bool,
}

impl Propagator {
    pub fn new() -> Self {
        Self { all_exact: true, ..Default::default() }
    }

    /// Adds a block; returns the index of its first component.
    pub fn add(&mut self, j: &Joint) -> usize {
        let start = self.values.len();
        self.values.extend_from_slice(&j.values);
        self.blocks.push((start, j.cov.clone()));
        self.samples += j.samples;
        self.all_exact &= j.cov.iter().all(|c| *c == 0.0);
        self.any = true;
        start
    }

    pub fn add_estimate(&mut self, e: &SampleEstimate) -> usize {
        self.add(&Joint::from_estimate(e))
    }

    pub fn add_exact(&mut self, v: f64) -> usize {
        self.add(&Joint::exact(vec![v]))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value and standard error of `f` at the current inputs.
    pub fn eval<F: Fn(&[f64]) -> f64>(&self, f: F) -> (f64, f64) {
        let value = f(&self.values);
        let mut var = 0.0;
        let mut x = self.values.clone();
        for (start, cov) in &self.blocks {
            let d = (cov.len() as f64).sqrt() as usize;
            if cov.iter().all(|c| *c == 0.0) {
                continue;
            }
            let grad: Vec<f64> = (0..d)
                .map(|i| {
                    let idx = start + i;
                    if cov[i * d + i] == 0.0 {
                        return 0.0;
                    }
                    partial(&f, &mut x, idx, value)
                })
                .collect();
            for i in 0..d {
                for j in 0..d {
                    var += grad[i] * grad[j] * cov[i * d + j];
                }
            }
        }
        (value, var.max(0.0).sqrt())
    }

    pub fn estimate<F: Fn(&[f64]) -> f64>(&self, f: F) -> SampleEstimate {
        let (v, se) = self.eval(f);
        let method = if self.all_exact { Method::Exact } else { Method::Derived };
        SampleEstimate::new(v, se, self.samples, RngStream::new(0, 0), method)
    }
}

fn partial<F: Fn(&[f64]) -> f64>(f: &F, x: &mut [f64], idx: usize, f0: f64) -> f64 {
    let x0 = x[idx];
    let h = 1e-6 * x0.abs().max(1e-8);
    x[idx] = x0 + h;
    let up = f(x);
    x[idx] = x0 - h;
    let down = f(x);
    x[idx] = x0;
    if up.is_finite() && down.is_finite() {
        (up - down) / (2.0 * h)
    } else if up.is_finite() {
        (up - f0) / h
    } else if down.is_finite() {
        (f0 - down) / h
    } else {
        0.0
    }
}
