//! Single-chart tensor engine.
//!
//! Metrics, scalar functions and vector fields are evaluatable callables on a
//! coordinate chart with a mandatory domain box. Derivatives come from
//! analytic hooks when present and from [`DerivativeScheme`] otherwise.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};

mod diff;
mod engine;

pub use diff::{first_partials, second_partials, DerivativeScheme};
pub use engine::{
    christoffel, covariant_derivative, covariant_jacobian, curvature_tensors, field_jacobian,
    lie_bracket, metric_jet, orthonormal_frame, scalar_calculus, scalar_partials,
    sectional_curvature, sectional_scan, signature, Christoffel, Curvature, MetricJet,
    ScalarCalculus, ScalarJet,
};

pub type Mat = DMatrix<f64>;

pub(crate) type MatFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;
pub(crate) type MatListFn = Arc<dyn Fn(&[f64]) -> Vec<Mat> + Send + Sync>;
pub(crate) type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub(crate) type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Chart coordinates of a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Appends one coordinate, e.g. the `t` of a product point `(p, t)`.
    pub fn extended(&self, last: f64) -> Point {
        let mut c = self.0.clone();
        c.push(last);
        Point(c)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

/// Chart-basis components of a tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Result<Self> {
        if base.dim() != components.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.dim(),
                found: components.len(),
            });
        }
        Ok(TangentVector { base, components })
    }

    pub fn scaled(&self, c: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: self.components.iter().map(|x| c * x).collect(),
        }
    }
}

/// Closed interval `[lo, hi]`; infinite bounds are allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn unbounded() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Per-axis box bounding the chart region where a metric may be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox(pub Vec<Interval>);

impl DomainBox {
    pub fn new(axes: Vec<Interval>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if a.lo.is_nan() || a.hi.is_nan() || a.lo > a.hi {
                return Err(GeometryError::EmptyDomain(format!(
                    "axis {i} has bounds [{}, {}]",
                    a.lo, a.hi
                )));
            }
        }
        Ok(DomainBox(axes))
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        DomainBox(vec![Interval::new(lo, hi); dim])
    }

    pub fn unbounded(dim: usize) -> Self {
        DomainBox(vec![Interval::unbounded(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn axes(&self) -> &[Interval] {
        &self.0
    }

    pub fn axis(&self, i: usize) -> Interval {
        self.0[i]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.0.len()
            && p.iter().zip(&self.0).all(|(x, a)| x.is_finite() && a.contains(*x))
    }

    /// `self × other`, axes concatenated.
    pub fn product(&self, other: &DomainBox) -> DomainBox {
        let mut axes = self.0.clone();
        axes.extend_from_slice(&other.0);
        DomainBox(axes)
    }

    pub fn center(&self) -> Point {
        Point(
            self.0
                .iter()
                .map(|a| {
                    if a.lo.is_finite() && a.hi.is_finite() {
                        a.midpoint()
                    } else if a.lo.is_finite() {
                        a.lo
                    } else if a.hi.is_finite() {
                        a.hi
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }

    pub(crate) fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.0.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.0.len(),
                found: p.len(),
            });
        }
        if !self.contains(p) {
            return Err(GeometryError::OutOfDomain { point: p.to_vec() });
        }
        Ok(())
    }
}

/// Sign `ε` of the `dt²` block: `+1` for Riemannian static manifolds,
/// `−1` for static spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "i8", into = "i8")
)]
pub enum SignEpsilon {
    Plus,
    Minus,
}

impl SignEpsilon {
    pub fn value(self) -> f64 {
        match self {
            SignEpsilon::Plus => 1.0,
            SignEpsilon::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for SignEpsilon {
    type Error = GeometryError;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(SignEpsilon::Plus),
            -1 => Ok(SignEpsilon::Minus),
            other => Err(GeometryError::InvalidParameter(format!(
                "epsilon must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl From<SignEpsilon> for i8 {
    fn from(e: SignEpsilon) -> i8 {
        match e {
            SignEpsilon::Plus => 1,
            SignEpsilon::Minus => -1,
        }
    }
}

impl fmt::Display for SignEpsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignEpsilon::Plus => "+1",
            SignEpsilon::Minus => "-1",
        })
    }
}

/// An evaluatable pseudo-Riemannian metric on a chart.
///
/// `d1(p)[k]` is `∂_k g` and `d2(p)[k * dim + l]` is `∂_k ∂_l g`.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    domain: DomainBox,
    eval: MatFn,
    d1: Option<MatListFn>,
    d2: Option<MatListFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(domain: DomainBox, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Mat + Send + Sync + 'static,
    {
        MetricField {
            dim: domain.dim(),
            domain,
            eval: Arc::new(eval),
            d1: None,
            d2: None,
        }
    }

    pub fn with_first_derivatives<F>(mut self, d1: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<Mat> + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_second_derivatives<F>(mut self, d2: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<Mat> + Send + Sync + 'static,
    {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub(crate) fn from_parts(
        domain: DomainBox,
        eval: MatFn,
        d1: Option<MatListFn>,
        d2: Option<MatListFn>,
    ) -> Self {
        MetricField {
            dim: domain.dim(),
            domain,
            eval,
            d1,
            d2,
        }
    }

    /// Constant metric `g` on `domain`.
    pub fn constant(domain: DomainBox, g: Mat) -> Self {
        let n = domain.dim();
        let zero = Mat::zeros(n, n);
        let z1 = zero.clone();
        MetricField::new(domain, move |_| g.clone())
            .with_first_derivatives(move |_| vec![z1.clone(); n])
            .with_second_derivatives(move |_| vec![zero.clone(); n * n])
    }

    /// Euclidean metric on `domain`.
    pub fn euclidean(domain: DomainBox) -> Self {
        let n = domain.dim();
        MetricField::constant(domain, Mat::identity(n, n))
    }

    /// The same metric with analytic derivative hooks removed, so every
    /// derivative goes through the differencing scheme.
    pub fn without_analytic_derivatives(&self) -> Self {
        MetricField {
            d1: None,
            d2: None,
            ..self.clone()
        }
    }

    /// The same metric on a different (usually smaller) domain box.
    pub fn restricted(&self, domain: DomainBox) -> Result<Self> {
        if domain.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: domain.dim(),
            });
        }
        Ok(MetricField {
            domain,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn has_analytic_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn has_analytic_d2(&self) -> bool {
        self.d2.is_some()
    }

    /// Metric components at `p`, without domain checks.
    pub fn eval_unchecked(&self, p: &[f64]) -> Mat {
        (self.eval)(p)
    }

    pub fn eval(&self, p: &[f64]) -> Result<Mat> {
        self.domain.check(p)?;
        Ok((self.eval)(p))
    }

    pub fn inner(&self, p: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        let g = self.eval(p)?;
        Ok(bilinear(&g, v, w))
    }

    pub(crate) fn eval_fn(&self) -> &MatFn {
        &self.eval
    }

    pub(crate) fn d1_fn(&self) -> Option<&MatListFn> {
        self.d1.as_ref()
    }

    pub(crate) fn d2_fn(&self) -> Option<&MatListFn> {
        self.d2.as_ref()
    }
}

/// A real function on a chart with optional analytic gradient and Hessian
/// (coordinate partials).
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: RealFn,
    grad: Option<VecFn>,
    hess: Option<MatFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_grad", &self.grad.is_some())
            .field("analytic_hess", &self.hess.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            grad: None,
            hess: None,
        }
    }

    pub fn with_gradient<F>(mut self, grad: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_hessian<F>(mut self, hess: F) -> Self
    where
        F: Fn(&[f64]) -> Mat + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        ScalarField::new(dim, move |_| value)
            .with_gradient(move |_| vec![0.0; dim])
            .with_hessian(move |_| Mat::zeros(dim, dim))
    }

    pub fn without_analytic_derivatives(&self) -> Self {
        ScalarField {
            grad: None,
            hess: None,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }

    pub fn analytic_gradient(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.grad.as_ref().map(|g| g(p))
    }

    pub fn analytic_hessian(&self, p: &[f64]) -> Option<Mat> {
        self.hess.as_ref().map(|h| h(p))
    }

    /// The function `(x, y) ↦ self(x)` on a chart of dimension `total ≥ dim`
    /// whose leading coordinates are those of `self`.
    pub fn extend_trailing(&self, total: usize) -> ScalarField {
        let n = self.dim;
        assert!(total >= n, "extension must not shrink the chart");
        let f = self.eval.clone();
        let mut out = ScalarField::new(total, move |p| f(&p[..n]));
        if let Some(g) = self.grad.clone() {
            out = out.with_gradient(move |p| {
                let mut v = g(&p[..n]);
                v.resize(total, 0.0);
                v
            });
        }
        if let Some(h) = self.hess.clone() {
            out = out.with_hessian(move |p| {
                let mut m = Mat::zeros(total, total);
                m.view_mut((0, 0), (n, n)).copy_from(&h(&p[..n]));
                m
            });
        }
        out
    }

    /// `(x, y) ↦ a(x) · b(y)` on the product chart.
    pub fn tensor_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
        let (na, nb) = (a.dim, b.dim);
        let n = na + nb;
        let (fa, fb) = (a.eval.clone(), b.eval.clone());
        let mut out = ScalarField::new(n, move |p| fa(&p[..na]) * fb(&p[na..]));
        if let (Some(ga), Some(gb)) = (a.grad.clone(), b.grad.clone()) {
            let (fa, fb) = (a.eval.clone(), b.eval.clone());
            let (ga2, gb2) = (ga.clone(), gb.clone());
            out = out.with_gradient(move |p| {
                let (x, y) = (&p[..na], &p[na..]);
                let (va, vb) = (fa(x), fb(y));
                let mut g: Vec<f64> = ga2(x).into_iter().map(|d| d * vb).collect();
                g.extend(gb2(y).into_iter().map(|d| d * va));
                g
            });
            if let (Some(ha), Some(hb)) = (a.hess.clone(), b.hess.clone()) {
                let (fa, fb) = (a.eval.clone(), b.eval.clone());
                out = out.with_hessian(move |p| {
                    let (x, y) = (&p[..na], &p[na..]);
                    let (va, vb) = (fa(x), fb(y));
                    let (dga, dgb) = (ga(x), gb(y));
                    let mut m = Mat::zeros(n, n);
                    m.view_mut((0, 0), (na, na)).copy_from(&(ha(x) * vb));
                    m.view_mut((na, na), (nb, nb)).copy_from(&(hb(y) * va));
                    for i in 0..na {
                        for j in 0..nb {
                            let v = dga[i] * dgb[j];
                            m[(i, na + j)] = v;
                            m[(na + j, i)] = v;
                        }
                    }
                    m
                });
            }
        }
        out
    }
}

/// An evaluatable vector field on a chart. `jacobian(p)[(k, i)] = ∂_i V^k`.
#[derive(Clone)]
pub struct VectorFieldSpec {
    dim: usize,
    eval: VecFn,
    jacobian: Option<MatFn>,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorFieldSpec {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorFieldSpec {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian<F>(mut self, jac: F) -> Self
    where
        F: Fn(&[f64]) -> Mat + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// Constant-component field, e.g. a coordinate field `∂_i`.
    pub fn constant(components: Vec<f64>) -> Self {
        let n = components.len();
        VectorFieldSpec::new(n, move |_| components.clone())
            .with_jacobian(move |_| Mat::zeros(n, n))
    }

    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[axis] = 1.0;
        VectorFieldSpec::constant(c)
    }

    pub fn without_analytic_jacobian(&self) -> Self {
        VectorFieldSpec {
            jacobian: None,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.eval)(p)
    }

    pub fn analytic_jacobian(&self, p: &[f64]) -> Option<Mat> {
        self.jacobian.as_ref().map(|j| j(p))
    }

    /// Lift of a field on `L` to `L × ℝ^extra`: components zero-padded,
    /// independent of the trailing coordinates.
    pub fn lift(&self, extra: usize) -> VectorFieldSpec {
        let n = self.dim;
        let total = n + extra;
        let f = self.eval.clone();
        let mut out = VectorFieldSpec::new(total, move |p| {
            let mut v = f(&p[..n]);
            v.resize(total, 0.0);
            v
        });
        if let Some(j) = self.jacobian.clone() {
            out = out.with_jacobian(move |p| {
                let mut m = Mat::zeros(total, total);
                m.view_mut((0, 0), (n, n)).copy_from(&j(&p[..n]));
                m
            });
        }
        out
    }

    /// Field on `N × self-chart` with zero components along the leading `lead`
    /// coordinates; used to place a fibre field on a warped product.
    pub fn pad_leading(&self, lead: usize) -> VectorFieldSpec {
        let n = self.dim;
        let total = lead + n;
        let f = self.eval.clone();
        let mut out = VectorFieldSpec::new(total, move |p| {
            let mut v = vec![0.0; lead];
            v.extend(f(&p[lead..]));
            v
        });
        if let Some(j) = self.jacobian.clone() {
            out = out.with_jacobian(move |p| {
                let mut m = Mat::zeros(total, total);
                m.view_mut((lead, lead), (n, n)).copy_from(&j(&p[lead..]));
                m
            });
        }
        out
    }

    /// `self + other`; the Jacobian is kept only if both are analytic.
    pub fn sum(&self, other: &VectorFieldSpec) -> VectorFieldSpec {
        assert_eq!(self.dim, other.dim, "summands must share a chart");
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = VectorFieldSpec::new(self.dim, move |p| {
            a(p).into_iter().zip(b(p)).map(|(x, y)| x + y).collect()
        });
        if let (Some(ja), Some(jb)) = (self.jacobian.clone(), other.jacobian.clone()) {
            out = out.with_jacobian(move |p| ja(p) + jb(p));
        }
        out
    }

    /// `φ · V` for a scalar `φ`; analytic only if both are.
    pub fn scaled_by(&self, phi: &ScalarField) -> VectorFieldSpec {
        let (v, f) = (self.eval.clone(), phi.eval.clone());
        let mut out = VectorFieldSpec::new(self.dim, move |p| {
            let s = f(p);
            v(p).into_iter().map(|x| s * x).collect()
        });
        if let (Some(j), Some(g)) = (self.jacobian.clone(), phi.grad.clone()) {
            let (v, f) = (self.eval.clone(), phi.eval.clone());
            let n = self.dim;
            out = out.with_jacobian(move |p| {
                let (s, vals, dphi) = (f(p), v(p), g(p));
                let mut m = j(p) * s;
                for k in 0..n {
                    for i in 0..n {
                        m[(k, i)] += dphi[i] * vals[k];
                    }
                }
                m
            });
        }
        out
    }
}

pub(crate) fn bilinear(g: &Mat, v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        if v[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            s += g[(i, j)] * v[i] * w[j];
        }
    }
    s
}

pub(crate) fn mat_vec(m: &Mat, v: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    (0..n)
        .map(|i| (0..v.len()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            if d < 0.0 {
                -d
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

