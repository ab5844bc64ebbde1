//! Star and convex bodies given by radial, support and curvature oracles.

mod body_spec;
mod checks;

pub use body_spec::{BodyRegistry, BodySpec, PExponent};
pub use checks::{contains, curvature_dominates, probe_directions, ContainmentReport, HypothesisCheck, HypothesisStatus};

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::omega;
use crate::error::{Error, Result};

pub(crate) const ORTHO_TOL: f64 = 1e-12;

/// A unit vector in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes a non-zero vector.
    pub fn normalize(v: Vec<f64>) -> Result<Self> {
        let norm = euclid(&v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    /// Accepts a vector that is already of unit length within `1e-12`.
    pub fn from_unit(v: Vec<f64>) -> Result<Self> {
        if (euclid(&v) - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidParameter(format!("not a unit vector (norm {})", euclid(&v))));
        }
        Ok(Self(v))
    }

    /// The `i`-th coordinate vector of `R^n`.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs `f` with a zeroed scratch buffer of length `len`.
pub(crate) fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [f64]) -> R) -> R {
    if len <= 32 {
        let mut buf = [0.0f64; 32];
        f(&mut buf[..len])
    } else {
        let mut buf = vec![0.0; len];
        f(&mut buf)
    }
}

/// `out = M u` for a column-major matrix.
pub(crate) fn mat_vec(m: &DMatrix<f64>, u: &[f64], out: &mut [f64]) {
    let (rows, cols) = m.shape();
    debug_assert_eq!(u.len(), cols);
    out[..rows].iter_mut().for_each(|x| *x = 0.0);
    let data = m.as_slice();
    for (j, uj) in u.iter().enumerate() {
        if *uj == 0.0 {
            continue;
        }
        let col = &data[j * rows..(j + 1) * rows];
        for (o, c) in out.iter_mut().zip(col) {
            *o += c * uj;
        }
    }
}

/// `out = Mᵀ u`.
pub(crate) fn mat_t_vec(m: &DMatrix<f64>, u: &[f64], out: &mut [f64]) {
    let rows = m.nrows();
    let data = m.as_slice();
    for (j, o) in out.iter_mut().enumerate() {
        *o = dot(&data[j * rows..(j + 1) * rows], u);
    }
}

/// An `m`-dimensional linear subspace of `R^n` given by an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps an `n×m` frame, checking `FᵀF = I` within `1e-12`.
    pub fn new(frame: DMatrix<f64>) -> Result<Self> {
        let (n, m) = frame.shape();
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!("frame must be n×m with 1 <= m <= n, got {n}×{m}")));
        }
        let gram = frame.transpose() * &frame;
        let err = (gram - DMatrix::identity(m, m)).abs().max();
        if err > ORTHO_TOL {
            return Err(Error::InvalidParameter(format!("frame columns not orthonormal (error {err:e})")));
        }
        Ok(Self { frame })
    }

    /// Orthonormalizes the columns of `basis` (QR with positive diagonal).
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        let (n, m) = basis.shape();
        if m == 0 || m > n {
            return Err(Error::InvalidParameter("basis must have 1..=n columns".into()));
        }
        let qr = basis.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..m {
            if r[(j, j)].abs() < 1e-14 {
                return Err(Error::InvalidParameter("basis is rank deficient".into()));
            }
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Ok(Self { frame: q })
    }

    /// Span of the listed coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let mut f = DMatrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            if i >= n {
                return Err(Error::InvalidParameter(format!("axis {i} out of range for n={n}")));
            }
            f[(i, j)] = 1.0;
        }
        Self::new(f)
    }

    /// The hyperplane `ξ^⊥`.
    pub fn hyperplane(xi: &Direction) -> Result<Self> {
        let n = xi.dim();
        if n < 2 {
            return Err(Error::InvalidParameter("hyperplane needs n >= 2".into()));
        }
        // Start from the identity with the column most aligned to ξ removed.
        let skip = (0..n)
            .max_by(|a, b| xi.coords()[*a].abs().total_cmp(&xi.coords()[*b].abs()))
            .unwrap_or(0);
        let mut basis = DMatrix::zeros(n, n);
        basis.column_mut(0).copy_from_slice(xi.coords());
        let mut col = 1;
        for i in 0..n {
            if i != skip {
                basis[(i, col)] = 1.0;
                col += 1;
            }
        }
        let full = Self::from_basis(basis)?;
        Ok(Self { frame: full.frame.columns(1, n - 1).into_owned() })
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    /// `F u` for `u ∈ R^m`.
    pub fn embed(&self, u: &[f64], out: &mut [f64]) {
        mat_vec(&self.frame, u, out);
    }

    /// The same subspace with the frame negated.
    pub fn negated(&self) -> Self {
        Self { frame: -&self.frame }
    }

    /// Composition: a subspace of `self` given by a frame in `self`'s coordinates.
    pub fn compose(&self, inner: &Subspace) -> Result<Self> {
        if inner.ambient_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: inner.ambient_dim() });
        }
        Self::new(&self.frame * &inner.frame)
    }

    /// Frame columns as row vectors, for reports.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.frame.column(j).iter().copied().collect()).collect()
    }
}

/// A user-supplied radial function.
pub trait RadialOracle: Send + Sync {
    fn radial(&self, u: &[f64]) -> f64;

    /// Support function, when the body is convex and it is known.
    fn support(&self, _u: &[f64]) -> Option<f64> {
        None
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> RadialOracle for F {
    fn radial(&self, u: &[f64]) -> f64 {
        self(u)
    }
}

#[derive(Debug)]
pub struct EllipsoidData {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    diag: Option<Vec<f64>>,
    det: f64,
}

impl EllipsoidData {
    fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidBody("ellipsoid shape matrix must be square".into()));
        }
        let scale = a.abs().max().max(1e-300);
        if (&a - a.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::InvalidBody("ellipsoid shape matrix must be symmetric".into()));
        }
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidBody("ellipsoid shape matrix must be positive definite".into()))?;
        let det = chol.l().diagonal().iter().map(|x| x * x).product::<f64>();
        let a_inv = chol.inverse();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == 0.0));
        let diag = is_diag.then(|| a.diagonal().iter().copied().collect());
        Ok(Self { a, a_inv, diag, det })
    }

    fn norm_a(&self, u: &[f64]) -> f64 {
        match &self.diag {
            Some(d) => d.iter().zip(u).map(|(a, x)| (a * x) * (a * x)).sum::<f64>().sqrt(),
            None => with_scratch(u.len(), |buf| {
                mat_vec(&self.a, u, buf);
                euclid(buf)
            }),
        }
    }

    fn norm_a_inv(&self, u: &[f64]) -> f64 {
        match &self.diag {
            Some(d) => d.iter().zip(u).map(|(a, x)| (x / a) * (x / a)).sum::<f64>().sqrt(),
            None => with_scratch(u.len(), |buf| {
                mat_vec(&self.a_inv, u, buf);
                euclid(buf)
            }),
        }
    }

    /// Eigenvalues of the shape matrix (semi-axes), ascending.
    fn axes(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = match &self.diag {
            Some(d) => d.clone(),
            None => self.a.clone().symmetric_eigenvalues().iter().copied().collect(),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }
}

#[derive(Clone)]
enum Shape {
    Ball { radius: f64 },
    Lp { p: f64, scale: f64 },
    Ellipsoid(Arc<EllipsoidData>),
    Rotated { inner: Arc<Body>, q: Arc<DMatrix<f64>> },
    Section { inner: Arc<Body>, frame: Arc<DMatrix<f64>> },
    Scaled { inner: Arc<Body>, factor: f64 },
    Custom(Arc<dyn RadialOracle>),
}

/// A star body about the origin, with optional support and curvature oracles.
///
/// Bodies are immutable; cloning shares the underlying data.
#[derive(Clone)]
pub struct Body {
    dim: usize,
    shape: Shape,
    symmetric: bool,
    convex: bool,
    bounds: (f64, f64),
    label: String,
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Body")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("symmetric", &self.symmetric)
            .field("convex", &self.convex)
            .field("bounds", &self.bounds)
            .finish()
    }
}

fn lp_norm(u: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        u.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        euclid(u)
    } else {
        u.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p <= 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidBody("dimension must be at least 1".into()));
    }
    Ok(())
}

impl Body {
    /// Euclidean ball of the given radius.
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        check_dim(n)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        let label = if radius == 1.0 { format!("ball:n={n}") } else { format!("{radius}*ball:n={n}") };
        Ok(Self { dim: n, shape: Shape::Ball { radius }, symmetric: true, convex: true, bounds: (radius, radius), label })
    }

    /// `scale · B_p^n`; `p = ∞` is the cube and `p = 1` the cross-polytope.
    pub fn lp_ball(n: usize, p: f64, scale: f64) -> Result<Self> {
        check_dim(n)?;
        if !(p > 0.0) {
            return Err(Error::InvalidBody(format!("lp exponent must be positive, got {p}")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidBody(format!("scale must be positive, got {scale}")));
        }
        if p == 2.0 {
            return Self::ball(n, scale);
        }
        // ‖θ‖_p over the sphere ranges between 1 and n^{1/p - 1/2} (ordered by p vs 2).
        let diag = (n as f64).powf(if p.is_infinite() { -0.5 } else { 1.0 / p - 0.5 });
        let (lo_norm, hi_norm) = if p < 2.0 { (1.0, diag) } else { (diag, 1.0) };
        let bounds = (scale / hi_norm, scale / lo_norm);
        let label = if p.is_infinite() {
            format!("cube:n={n}")
        } else if p == 1.0 {
            format!("cross:n={n}")
        } else {
            format!("lp:n={n}:p={p}")
        };
        let label = if scale == 1.0 { label } else { format!("{scale}*{label}") };
        Ok(Self { dim: n, shape: Shape::Lp { p, scale }, symmetric: true, convex: p >= 1.0, bounds, label })
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::lp_ball(n, f64::INFINITY, 1.0)
    }

    pub fn cross_polytope(n: usize) -> Result<Self> {
        Self::lp_ball(n, 1.0, 1.0)
    }

    /// `A · B_2^n` for a symmetric positive definite `A`.
    pub fn ellipsoid(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        check_dim(n)?;
        let data = EllipsoidData::new(a)?;
        let axes = data.axes();
        let bounds = (axes[0], axes[n - 1]);
        let label = match &data.diag {
            Some(d) => format!(
                "ellipsoid:n={n}:axes={}",
                d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            None => format!("ellipsoid:n={n}:matrix"),
        };
        Ok(Self { dim: n, shape: Shape::Ellipsoid(Arc::new(data)), symmetric: true, convex: true, bounds, label })
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn ellipsoid_axes(axes: &[f64]) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidBody("ellipsoid axes must be positive".into()));
        }
        Self::ellipsoid(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(axes)))
    }

    /// A body from a user radial oracle. Bounds and evenness are declared by
    /// the caller and never inferred.
    pub fn custom(
        dim: usize,
        oracle: Arc<dyn RadialOracle>,
        bounds: (f64, f64),
        symmetric: bool,
        convex: bool,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if !(bounds.0 > 0.0 && bounds.0 <= bounds.1 && bounds.1.is_finite()) {
            return Err(Error::InvalidBody(format!("invalid radial bounds {bounds:?}")));
        }
        Ok(Self { dim, shape: Shape::Custom(oracle), symmetric, convex, bounds, label: label.into() })
    }

    /// `t · K`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidBody(format!("dilation factor must be positive, got {t}")));
        }
        let shape = match &self.shape {
            Shape::Ball { radius } => Shape::Ball { radius: radius * t },
            Shape::Lp { p, scale } => Shape::Lp { p: *p, scale: scale * t },
            Shape::Ellipsoid(e) => Shape::Ellipsoid(Arc::new(EllipsoidData::new(&e.a * t)?)),
            Shape::Scaled { inner, factor } => Shape::Scaled { inner: inner.clone(), factor: factor * t },
            _ => Shape::Scaled { inner: Arc::new(self.clone()), factor: t },
        };
        Ok(Self {
            dim: self.dim,
            shape,
            symmetric: self.symmetric,
            convex: self.convex,
            bounds: (self.bounds.0 * t, self.bounds.1 * t),
            label: format!("{t}*({})", self.label),
        })
    }

    /// `Q K` for an orthogonal `Q`.
    pub fn rotated(&self, q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: q.nrows() });
        }
        Subspace::new(q.clone())?;
        let shape = match &self.shape {
            Shape::Ball { .. } => return Ok(self.clone()),
            Shape::Ellipsoid(e) => {
                let a = &q * &e.a * q.transpose();
                let a = (&a + a.transpose()) * 0.5;
                Shape::Ellipsoid(Arc::new(EllipsoidData::new(a)?))
            }
            _ => Shape::Rotated { inner: Arc::new(self.clone()), q: Arc::new(q) },
        };
        Ok(Self { shape, label: format!("rot({})", self.label), ..self.clone() })
    }

    /// The section `K ∩ F` as an `m`-dimensional star body in the frame's coordinates.
    pub fn restrict(&self, f: &Subspace) -> Result<Self> {
        if f.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: f.ambient_dim() });
        }
        let shape = match &self.shape {
            Shape::Ball { radius } => Shape::Ball { radius: *radius },
            Shape::Section { inner, frame } => {
                Shape::Section { inner: inner.clone(), frame: Arc::new(frame.as_ref() * f.frame()) }
            }
            _ => Shape::Section { inner: Arc::new(self.clone()), frame: Arc::new(f.frame().clone()) },
        };
        Ok(Self {
            dim: f.dim(),
            shape,
            symmetric: self.symmetric,
            convex: self.convex,
            bounds: self.bounds,
            label: format!("({})∩F{}", self.label, f.dim()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// `(r_min, r_max)` with `r_min <= ρ_K <= r_max`.
    pub fn radial_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Radius of the ball when the body is a Euclidean ball.
    pub fn ball_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { radius } => Some(*radius),
            Shape::Ellipsoid(e) => {
                let ax = e.axes();
                (ax[ax.len() - 1] - ax[0] <= 1e-15 * ax[0]).then_some(ax[0])
            }
            Shape::Scaled { inner, factor } => inner.ball_radius().map(|r| r * factor),
            Shape::Rotated { inner, .. } | Shape::Section { inner, .. } => inner.ball_radius(),
            _ => None,
        }
    }

    /// Shape matrix when the body is an ellipsoid or ball.
    pub fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.shape {
            Shape::Ball { radius } => Some(DMatrix::identity(self.dim, self.dim) * *radius),
            Shape::Ellipsoid(e) => Some(e.a.clone()),
            Shape::Scaled { inner, factor } => inner.ellipsoid_matrix().map(|a| a * *factor),
            Shape::Rotated { inner, q } => inner.ellipsoid_matrix().map(|a| q.as_ref() * a * q.transpose()),
            _ => None,
        }
    }

    /// Shape matrix of a closed-form ellipsoid containing the body.
    pub fn enclosing_ellipsoid(&self) -> Option<DMatrix<f64>> {
        let id = DMatrix::identity(self.dim, self.dim);
        match &self.shape {
            Shape::Lp { p, scale } => {
                let t = if *p >= 2.0 { (self.dim as f64).powf(0.5 - 1.0 / p) } else { 1.0 };
                Some(id * (scale * t))
            }
            Shape::Scaled { inner, factor } => inner.enclosing_ellipsoid().map(|a| a * *factor),
            Shape::Rotated { inner, q } => inner.enclosing_ellipsoid().map(|a| q.as_ref() * a * q.transpose()),
            _ => self.ellipsoid_matrix(),
        }
    }

    /// Shape matrix of a closed-form ellipsoid contained in the body.
    pub fn inscribed_ellipsoid(&self) -> Option<DMatrix<f64>> {
        let id = DMatrix::identity(self.dim, self.dim);
        match &self.shape {
            Shape::Lp { p, scale } => {
                let t = if *p >= 2.0 { 1.0 } else { (self.dim as f64).powf(0.5 - 1.0 / p) };
                Some(id * (scale * t))
            }
            Shape::Scaled { inner, factor } => inner.inscribed_ellipsoid().map(|a| a * *factor),
            Shape::Rotated { inner, q } => inner.inscribed_ellipsoid().map(|a| q.as_ref() * a * q.transpose()),
            _ => self.ellipsoid_matrix(),
        }
    }

    /// `ρ_K(u)` for a unit vector `u`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => *radius,
            Shape::Lp { p, scale } => scale / lp_norm(u, *p),
            Shape::Ellipsoid(e) => 1.0 / e.norm_a_inv(u),
            Shape::Scaled { inner, factor } => factor * inner.radial(u),
            Shape::Rotated { inner, q } => with_scratch(self.dim, |buf| {
                mat_t_vec(q, u, buf);
                inner.radial(buf)
            }),
            Shape::Section { inner, frame } => with_scratch(inner.dim, |buf| {
                mat_vec(frame, u, buf);
                inner.radial(buf)
            }),
            Shape::Custom(o) => o.radial(u),
        }
    }

    /// Minkowski functional `‖x‖_K = ‖x‖_2 / ρ_K(x/‖x‖_2)`; zero at the origin.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let r = euclid(x);
        if r == 0.0 {
            return 0.0;
        }
        with_scratch(x.len(), |buf| {
            buf.iter_mut().zip(x).for_each(|(b, v)| *b = v / r);
            r / self.radial(buf)
        })
    }

    /// Support function `h_K(u)`; `None` when no support oracle exists.
    pub fn support(&self, u: &[f64]) -> Option<f64> {
        match &self.shape {
            Shape::Ball { radius } => Some(*radius),
            Shape::Lp { p, scale } => Some(scale * lp_norm(u, conjugate_exponent(*p))),
            Shape::Ellipsoid(e) => Some(e.norm_a(u)),
            Shape::Scaled { inner, factor } => inner.support(u).map(|h| factor * h),
            Shape::Rotated { inner, q } => with_scratch(self.dim, |buf| {
                mat_t_vec(q, u, buf);
                inner.support(buf)
            }),
            Shape::Section { .. } => None,
            Shape::Custom(o) => o.support(u),
        }
    }

    pub fn has_support(&self) -> bool {
        let probe = Direction::axis(self.dim, 0);
        self.support(probe.coords()).is_some()
    }

    /// Curvature function `f_K(u)`; present for balls and ellipsoids only.
    pub fn curvature(&self, u: &[f64]) -> Option<f64> {
        let n = self.dim as i32;
        match &self.shape {
            Shape::Ball { radius } => Some(radius.powi(n - 1)),
            Shape::Ellipsoid(e) => Some(e.det * e.det / e.norm_a(u).powi(n + 1)),
            Shape::Scaled { inner, factor } => inner.curvature(u).map(|f| f * factor.powi(n - 1)),
            Shape::Rotated { inner, q } => with_scratch(self.dim, |buf| {
                mat_t_vec(q, u, buf);
                inner.curvature(buf)
            }),
            _ => None,
        }
    }

    pub fn has_curvature(&self) -> bool {
        let probe = Direction::axis(self.dim, 0);
        self.curvature(probe.coords()).is_some()
    }

    /// Lower bound of `f_K` over the sphere, when available in closed form.
    pub fn curvature_bounds(&self) -> Option<(f64, f64)> {
        let n = self.dim as i32;
        match &self.shape {
            Shape::Ball { radius } => Some((radius.powi(n - 1), radius.powi(n - 1))),
            Shape::Ellipsoid(e) => {
                let ax = e.axes();
                let d2 = e.det * e.det;
                Some((d2 / ax[ax.len() - 1].powi(n + 1), d2 / ax[0].powi(n + 1)))
            }
            Shape::Scaled { inner, factor } => {
                inner.curvature_bounds().map(|(a, b)| (a * factor.powi(n - 1), b * factor.powi(n - 1)))
            }
            Shape::Rotated { inner, .. } => inner.curvature_bounds(),
            _ => None,
        }
    }

    /// Closed-form volume, when the family has one.
    pub fn exact_volume(&self) -> Option<f64> {
        let n = self.dim;
        match &self.shape {
            Shape::Ball { radius } => Some(omega(n) * radius.powi(n as i32)),
            Shape::Lp { p, scale } => Some(scale.powi(n as i32) * lp_unit_volume(n, *p)),
            Shape::Ellipsoid(e) => Some(omega(n) * e.det),
            Shape::Scaled { inner, factor } => inner.exact_volume().map(|v| v * factor.powi(n as i32)),
            Shape::Rotated { inner, .. } => inner.exact_volume(),
            Shape::Section { inner, frame } => {
                inner.exact_section(&Subspace { frame: frame.as_ref().clone() })
            }
            Shape::Custom(_) => None,
        }
    }

    /// Closed-form `|K ∩ F|` (as an `m`-dimensional volume).
    pub fn exact_section(&self, f: &Subspace) -> Option<f64> {
        let m = f.dim();
        if m == 1 {
            let col: Vec<f64> = f.frame.column(0).iter().copied().collect();
            let neg: Vec<f64> = col.iter().map(|x| -x).collect();
            return Some(self.radial(&col) + self.radial(&neg));
        }
        match &self.shape {
            Shape::Ball { radius } => Some(omega(m) * radius.powi(m as i32)),
            Shape::Ellipsoid(e) => {
                let b = &e.a_inv * &f.frame;
                let gram = b.transpose() * b;
                Some(omega(m) / gram.determinant().sqrt())
            }
            Shape::Scaled { inner, factor } => inner.exact_section(f).map(|v| v * factor.powi(m as i32)),
            Shape::Rotated { inner, q } => inner.exact_section(&Subspace { frame: q.transpose() * &f.frame }),
            Shape::Section { inner, frame } => inner.exact_section(&Subspace { frame: frame.as_ref() * &f.frame }),
            _ => None,
        }
    }

    /// Closed-form `|K | ξ^⊥|`.
    pub fn exact_projection(&self, xi: &[f64]) -> Option<f64> {
        let n = self.dim;
        if n < 2 {
            return None;
        }
        let e = (n - 1) as i32;
        match &self.shape {
            Shape::Ball { radius } => Some(omega(n - 1) * radius.powi(e)),
            Shape::Ellipsoid(d) => Some(omega(n - 1) * d.det * d.norm_a_inv(xi)),
            Shape::Lp { p, scale } if p.is_infinite() => {
                Some(scale.powi(e) * 2f64.powi(e) * xi.iter().map(|x| x.abs()).sum::<f64>())
            }
            Shape::Lp { p, scale } if *p == 1.0 && n <= 20 => {
                // Facets of B_1^n have normals ε/√n and area √n/(n-1)!.
                let mut total = 0.0;
                for mask in 0u32..(1u32 << (n - 1)) {
                    let mut s = xi[0];
                    for (i, x) in xi.iter().enumerate().skip(1) {
                        if mask & (1 << (i - 1)) != 0 {
                            s -= x;
                        } else {
                            s += x;
                        }
                    }
                    total += s.abs();
                }
                let fact: f64 = (1..n).map(|i| i as f64).product();
                Some(scale.powi(e) * total / fact)
            }
            Shape::Scaled { inner, factor } => inner.exact_projection(xi).map(|v| v * factor.powi(e)),
            Shape::Rotated { inner, q } => with_scratch(n, |buf| {
                mat_t_vec(q, xi, buf);
                inner.exact_projection(buf)
            }),
            _ => None,
        }
    }
}

/// `|B_p^n| = 2^n Γ(1+1/p)^n / Γ(1+n/p)`.
pub fn lp_unit_volume(n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return 2f64.powi(n as i32);
    }
    if p == 1.0 {
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        return 2f64.powi(n as i32) / fact;
    }
    if p == 2.0 {
        return omega(n);
    }
    use statrs::function::gamma::ln_gamma;
    let ln = n as f64 * (2f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + n as f64 / p);
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(v: &[f64]) -> Vec<f64> {
        Direction::normalize(v.to_vec()).unwrap().coords().to_vec()
    }

    #[test]
    fn ball_identities() {
        let b = Body::ball(3, 1.0).unwrap();
        let u = unit(&[0.3, -0.2, 0.9]);
        assert_eq!(b.radial(&u), 1.0);
        assert_eq!(b.support(&u), Some(1.0));
        assert_eq!(b.curvature(&u), Some(1.0));
    }

    #[test]
    fn ellipsoid_closed_forms() {
        let e = Body::ellipsoid_axes(&[2.0, 1.0, 1.0]).unwrap();
        let e1 = [1.0, 0.0, 0.0];
        assert!((e.support(&e1).unwrap() - 2.0).abs() < 1e-15);
        assert!((e.radial(&e1) - 2.0).abs() < 1e-15);
        assert!((e.curvature(&e1).unwrap() - 0.25).abs() < 1e-15);
        assert!((e.exact_volume().unwrap() - 2.0 * 4.0 * PI / 3.0).abs() < 1e-13);
        let s = e.exact_section(&Subspace::hyperplane(&Direction::axis(3, 1)).unwrap()).unwrap();
        assert!((s - 2.0 * PI).abs() < 1e-13);
        assert!((e.exact_projection(&e1).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn cube_diagonal_radius() {
        let c = Body::cube(3).unwrap();
        let u = unit(&[1.0, 1.0, 1.0]);
        assert!((c.radial(&u) - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(c.exact_projection(&[1.0, 0.0, 0.0]), Some(4.0));
    }

    #[test]
    fn cross_polytope_projection() {
        let x = Body::cross_polytope(3).unwrap();
        assert!((x.exact_projection(&[1.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-14);
        let x2 = Body::cross_polytope(2).unwrap();
        assert!((x2.exact_projection(&[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_bodies_rejected() {
        assert!(Body::lp_ball(3, -1.0, 1.0).is_err());
        assert!(Body::ball(3, 0.0).is_err());
        assert!(Body::cube(3).unwrap().dilate(0.0).is_err());
        let non_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Body::ellipsoid(non_pd).is_err());
        let non_sym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(Body::ellipsoid(non_sym).is_err());
    }

    #[test]
    fn restricted_ellipse() {
        let e = Body::ellipsoid_axes(&[2.0, 1.0, 1.0]).unwrap();
        let f = Subspace::coordinate(3, &[0, 1]).unwrap();
        let r = e.restrict(&f).unwrap();
        for i in 0..16 {
            let t = i as f64 * 0.37;
            let expect = (t.cos().powi(2) / 4.0 + t.sin().powi(2)).powf(-0.5);
            assert!((r.radial(&[t.cos(), t.sin()]) - expect).abs() < 1e-14);
        }
        let cube_sq = Body::cube(3).unwrap().restrict(&f).unwrap();
        let u = unit(&[1.0, 1.0]);
        assert!((cube_sq.radial(&u) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hyperplane_is_orthogonal_to_normal() {
        let xi = Direction::normalize(vec![0.2, -0.5, 0.7, 0.1]).unwrap();
        let h = Subspace::hyperplane(&xi).unwrap();
        assert_eq!(h.dim(), 3);
        for c in h.columns() {
            assert!(dot(&c, xi.coords()).abs() < 1e-14);
        }
    }

    #[test]
    fn lp_volume_matches_special_cases() {
        assert!((lp_unit_volume(3, 1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((lp_unit_volume(4, 2.0000001) - omega(4)).abs() < 1e-5);
        assert_eq!(lp_unit_volume(4, f64::INFINITY), 16.0);
    }
}
