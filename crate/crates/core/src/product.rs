//! Product metrics: static `L ×_{εf} ℝ`, warped `N ×_λ F` and doubly warped
//! `N × ℝ²`, plus the closed-form connection and curvature identities of a
//! static manifold as residuals against the generic engine.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};
use crate::manifold::{
    bilinear, curvature_tensors, field_jacobian, max_abs_diff, metric_jet, scalar_calculus,
    DerivativeScheme, DomainBox, Interval, Mat, MatListFn, MetricField, Point, ScalarField,
    SignEpsilon, VectorFieldSpec,
};
use crate::manifold::{christoffel, Christoffel};
use crate::report::DefectReport;
use crate::sampling;

/// Default sampling interval for the `t` (and `s`) factors.
pub const DEFAULT_LINE_DOMAIN: Interval = Interval::new(-5.0, 5.0);

/// `L ×_{εf} ℝ` with metric `g_L + ε f² dt²`; `t` is the last coordinate.
#[derive(Clone, Debug)]
pub struct StaticProductSpec {
    pub base: MetricField,
    pub warp: ScalarField,
    pub eps: SignEpsilon,
    pub t_domain: Interval,
}

impl StaticProductSpec {
    pub fn new(base: MetricField, warp: ScalarField, eps: SignEpsilon) -> Self {
        StaticProductSpec {
            base,
            warp,
            eps,
            t_domain: DEFAULT_LINE_DOMAIN,
        }
    }

    pub fn with_t_domain(mut self, t_domain: Interval) -> Self {
        self.t_domain = t_domain;
        self
    }

    /// Dimension of the product.
    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn domain(&self) -> DomainBox {
        self.base
            .domain()
            .product(&DomainBox(vec![self.t_domain]))
    }

    pub fn metric(&self) -> Result<MetricField> {
        build_static(self)
    }
}

/// `N ×_λ F` with metric `g_N + λ² g_F`; the `F` coordinates come last.
#[derive(Clone, Debug)]
pub struct WarpedProductSpec {
    pub base: MetricField,
    pub warp: ScalarField,
    pub fiber: MetricField,
}

/// `N × ℝ²` with metric `g_N + λ² ds² + ε f² dt²`; coordinates `(x, s, t)`.
#[derive(Clone, Debug)]
pub struct DoublyWarpedSpec {
    pub base: MetricField,
    pub lambda: ScalarField,
    pub warp: ScalarField,
    pub eps: SignEpsilon,
    pub s_domain: Interval,
    pub t_domain: Interval,
}

impl DoublyWarpedSpec {
    pub fn new(base: MetricField, lambda: ScalarField, warp: ScalarField, eps: SignEpsilon) -> Self {
        DoublyWarpedSpec {
            base,
            lambda,
            warp,
            eps,
            s_domain: DEFAULT_LINE_DOMAIN,
            t_domain: DEFAULT_LINE_DOMAIN,
        }
    }

    /// The same space read as the static product `(N ×_λ ℝ_s) ×_{εf} ℝ_t`.
    pub fn as_static(&self) -> Result<StaticProductSpec> {
        let line = MetricField::euclidean(DomainBox(vec![self.s_domain]));
        let l = build_warped(&WarpedProductSpec {
            base: self.base.clone(),
            warp: self.lambda.clone(),
            fiber: line,
        })?;
        Ok(StaticProductSpec {
            base: l,
            warp: self.warp.extend_trailing(self.base.dim() + 1),
            eps: self.eps,
            t_domain: self.t_domain,
        })
    }
}

fn check_warp_dim(warp: &ScalarField, base: &MetricField) -> Result<()> {
    if warp.dim() != base.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: base.dim(),
            found: warp.dim(),
        });
    }
    Ok(())
}

/// Samples the warp on the base box (center plus a low-discrepancy cloud
/// when the box is bounded) and rejects nonpositive or non-finite values.
fn probe_positive(warp: &ScalarField, domain: &DomainBox) -> Result<()> {
    let mut probes = vec![domain.center()];
    if let Ok(cloud) = sampling::halton(domain, 64, 0) {
        probes.extend(cloud);
    }
    for p in &probes {
        let v = warp.eval(p);
        if !(v > 0.0) || !v.is_finite() {
            return Err(GeometryError::NonPositiveWarp { value: v });
        }
    }
    Ok(())
}

/// The block metric `g_L ⊕ ε f² dt²`, with analytic derivative hooks
/// whenever the base metric and the warp supply them.
pub fn build_static(spec: &StaticProductSpec) -> Result<MetricField> {
    check_warp_dim(&spec.warp, &spec.base)?;
    probe_positive(&spec.warp, spec.base.domain())?;
    let n = spec.base.dim();
    let total = n + 1;
    let e = spec.eps.value();
    let base = spec.base.clone();
    let warp = spec.warp.clone();

    let (b, w) = (base.clone(), warp.clone());
    let eval = Arc::new(move |q: &[f64]| {
        let mut g = Mat::zeros(total, total);
        g.view_mut((0, 0), (n, n)).copy_from(&b.eval_unchecked(&q[..n]));
        let f = w.eval(&q[..n]);
        g[(n, n)] = e * f * f;
        g
    });

    let probe = spec.base.domain().center();
    let analytic_grad = warp.analytic_gradient(&probe).is_some();
    let analytic_hess = warp.analytic_hessian(&probe).is_some();

    let d1: Option<MatListFn> = match base.d1_fn() {
        Some(bd1) if analytic_grad => {
            let (bd1, w) = (bd1.clone(), warp.clone());
            Some(Arc::new(move |q: &[f64]| {
                let p = &q[..n];
                let f = w.eval(p);
                let df = w.analytic_gradient(p).unwrap_or_else(|| vec![0.0; n]);
                let mut out: Vec<Mat> = bd1(p)
                    .into_iter()
                    .enumerate()
                    .map(|(k, dk)| {
                        let mut m = Mat::zeros(total, total);
                        m.view_mut((0, 0), (n, n)).copy_from(&dk);
                        m[(n, n)] = 2.0 * e * f * df[k];
                        m
                    })
                    .collect();
                out.push(Mat::zeros(total, total));
                out
            }))
        }
        _ => None,
    };

    let d2: Option<MatListFn> = match base.d2_fn() {
        Some(bd2) if analytic_grad && analytic_hess => {
            let (bd2, w) = (bd2.clone(), warp.clone());
            Some(Arc::new(move |q: &[f64]| {
                let p = &q[..n];
                let f = w.eval(p);
                let df = w.analytic_gradient(p).unwrap_or_else(|| vec![0.0; n]);
                let hf = w.analytic_hessian(p).unwrap_or_else(|| Mat::zeros(n, n));
                let bd = bd2(p);
                let mut out = vec![Mat::zeros(total, total); total * total];
                for k in 0..n {
                    for l in 0..n {
                        let m = &mut out[k * total + l];
                        m.view_mut((0, 0), (n, n)).copy_from(&bd[k * n + l]);
                        m[(n, n)] = 2.0 * e * (df[k] * df[l] + f * hf[(k, l)]);
                    }
                }
                out
            }))
        }
        _ => None,
    };

    Ok(MetricField::from_parts(spec.domain(), eval, d1, d2))
}

/// The block metric `g_N ⊕ λ² g_F`.
pub fn build_warped(spec: &WarpedProductSpec) -> Result<MetricField> {
    check_warp_dim(&spec.warp, &spec.base)?;
    probe_positive(&spec.warp, spec.base.domain())?;
    let n = spec.base.dim();
    let m = spec.fiber.dim();
    let total = n + m;
    let (base, warp, fiber) = (spec.base.clone(), spec.warp.clone(), spec.fiber.clone());

    let (b, w, fi) = (base.clone(), warp.clone(), fiber.clone());
    let eval = Arc::new(move |q: &[f64]| {
        let mut g = Mat::zeros(total, total);
        g.view_mut((0, 0), (n, n)).copy_from(&b.eval_unchecked(&q[..n]));
        let l = w.eval(&q[..n]);
        g.view_mut((n, n), (m, m))
            .copy_from(&(fi.eval_unchecked(&q[n..]) * (l * l)));
        g
    });

    let probe = spec.base.domain().center();
    let analytic_grad = warp.analytic_gradient(&probe).is_some();
    let analytic_hess = warp.analytic_hessian(&probe).is_some();

    let d1: Option<MatListFn> = match (base.d1_fn(), fiber.d1_fn()) {
        (Some(bd1), Some(fd1)) if analytic_grad => {
            let (bd1, fd1, w, fi) = (bd1.clone(), fd1.clone(), warp.clone(), fiber.clone());
            Some(Arc::new(move |q: &[f64]| {
                let (x, y) = (&q[..n], &q[n..]);
                let l = w.eval(x);
                let dl = w.analytic_gradient(x).unwrap_or_else(|| vec![0.0; n]);
                let gf = fi.eval_unchecked(y);
                let mut out = Vec::with_capacity(total);
                for (k, dk) in bd1(x).into_iter().enumerate() {
                    let mut mm = Mat::zeros(total, total);
                    mm.view_mut((0, 0), (n, n)).copy_from(&dk);
                    mm.view_mut((n, n), (m, m))
                        .copy_from(&(&gf * (2.0 * l * dl[k])));
                    out.push(mm);
                }
                for dk in fd1(y) {
                    let mut mm = Mat::zeros(total, total);
                    mm.view_mut((n, n), (m, m)).copy_from(&(dk * (l * l)));
                    out.push(mm);
                }
                out
            }))
        }
        _ => None,
    };

    let d2: Option<MatListFn> = match (base.d2_fn(), fiber.d1_fn(), fiber.d2_fn()) {
        (Some(bd2), Some(fd1), Some(fd2)) if analytic_grad && analytic_hess => {
            let (bd2, fd1, fd2, w, fi) = (
                bd2.clone(),
                fd1.clone(),
                fd2.clone(),
                warp.clone(),
                fiber.clone(),
            );
            Some(Arc::new(move |q: &[f64]| {
                let (x, y) = (&q[..n], &q[n..]);
                let l = w.eval(x);
                let dl = w.analytic_gradient(x).unwrap_or_else(|| vec![0.0; n]);
                let hl = w.analytic_hessian(x).unwrap_or_else(|| Mat::zeros(n, n));
                let gf = fi.eval_unchecked(y);
                let dgf = fd1(y);
                let ddgf = fd2(y);
                let bd = bd2(x);
                let mut out = vec![Mat::zeros(total, total); total * total];
                for k in 0..total {
                    for j in 0..total {
                        let mm = &mut out[k * total + j];
                        match (k < n, j < n) {
                            (true, true) => {
                                mm.view_mut((0, 0), (n, n)).copy_from(&bd[k * n + j]);
                                let c = 2.0 * (dl[k] * dl[j] + l * hl[(k, j)]);
                                mm.view_mut((n, n), (m, m)).copy_from(&(&gf * c));
                            }
                            (true, false) => {
                                let c = 2.0 * l * dl[k];
                                mm.view_mut((n, n), (m, m)).copy_from(&(&dgf[j - n] * c));
                            }
                            (false, true) => {
                                let c = 2.0 * l * dl[j];
                                mm.view_mut((n, n), (m, m)).copy_from(&(&dgf[k - n] * c));
                            }
                            (false, false) => {
                                let c = l * l;
                                mm.view_mut((n, n), (m, m))
                                    .copy_from(&(&ddgf[(k - n) * m + (j - n)] * c));
                            }
                        }
                    }
                }
                out
            }))
        }
        _ => None,
    };

    Ok(MetricField::from_parts(
        spec.base.domain().product(spec.fiber.domain()),
        eval,
        d1,
        d2,
    ))
}

/// `g_N + λ² ds² + ε f² dt²`.
pub fn build_doubly_warped(spec: &DoublyWarpedSpec) -> Result<MetricField> {
    check_warp_dim(&spec.lambda, &spec.base)?;
    check_warp_dim(&spec.warp, &spec.base)?;
    build_static(&spec.as_static()?)
}

/// Tolerance and test fields for [`static_product_residuals`].
#[derive(Clone, Debug)]
pub struct ProductIdentityOptions {
    pub tolerance: f64,
    /// Fields on `L`; `None` means the coordinate fields of the base chart.
    pub fields: Option<Vec<VectorFieldSpec>>,
}

impl Default for ProductIdentityOptions {
    fn default() -> Self {
        ProductIdentityOptions {
            tolerance: 1e-4,
            fields: None,
        }
    }
}

/// Names of the six static-manifold identities, in report order.
pub const PRODUCT_IDENTITIES: [&str; 6] = [
    "lifted_connection",
    "mixed_connection",
    "time_acceleration",
    "time_curvature",
    "lifted_curvature",
    "mixed_curvature",
];

fn pad(v: &[f64], total: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(total, 0.0);
    out
}

fn pad_mat(m: &Mat, total: usize) -> Mat {
    let n = m.nrows();
    let mut out = Mat::zeros(total, total);
    out.view_mut((0, 0), (n, n)).copy_from(m);
    out
}

fn nabla(gamma: &Christoffel, jac: &Mat, vals: &[f64], dir: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let g = gamma.contract(dir, vals);
    (0..n)
        .map(|k| g[k] + (0..n).map(|i| jac[(k, i)] * dir[i]).sum::<f64>())
        .collect()
}

/// Sup-norm residuals of the six closed-form connection and curvature
/// identities of `L ×_{εf} ℝ` over `samples` (points of the product chart):
///
/// 1. `∇_X̃ Ỹ = lift(∇_X Y)`
/// 2. `∇_X̃ ∂_t = ∇_{∂_t} X̃ = (X(f)/f) ∂_t`
/// 3. `∇_{∂_t} ∂_t = −ε f lift(∇f)`
/// 4. `R(X̃, ∂_t)∂_t = −ε f lift(∇_X ∇f)`
/// 5. `R(X̃, Ỹ)Z̃ = lift(R^L(X, Y)Z)`, compared lowered against every basis vector
/// 6. `R(X̃, Ỹ)∂_t = 0`
pub fn static_product_residuals(
    spec: &StaticProductSpec,
    scheme: &DerivativeScheme,
    samples: &[Point],
    opts: &ProductIdentityOptions,
) -> Result<Vec<DefectReport>> {
    let m = build_static(spec)?;
    let n = spec.base.dim();
    let total = n + 1;
    let e = spec.eps.value();
    let fields: Vec<VectorFieldSpec> = match &opts.fields {
        Some(f) => {
            for v in f {
                if v.dim() != n {
                    return Err(GeometryError::DimensionMismatch {
                        expected: n,
                        found: v.dim(),
                    });
                }
            }
            f.clone()
        }
        None => (0..n).map(|i| VectorFieldSpec::coordinate(n, i)).collect(),
    };
    let et = {
        let mut v = vec![0.0; total];
        v[n] = 1.0;
        v
    };

    let mut local: [Vec<(Point, f64)>; 6] = Default::default();
    for q in samples {
        m.domain().check(q)?;
        let p = &q[..n];
        let full = curvature_tensors(&m, scheme, q)?;
        let gm = &full.christoffel;
        let base_curv = curvature_tensors(&spec.base, scheme, p)?;
        let gl = christoffel(&spec.base, scheme, p)?;
        let fc = scalar_calculus(&spec.base, scheme, &spec.warp, p)?;
        let f = fc.value;

        let vals: Vec<Vec<f64>> = fields.iter().map(|x| x.eval(p)).collect();
        let jacs: Vec<Mat> = fields
            .iter()
            .map(|x| field_jacobian(x, spec.base.domain(), scheme, p))
            .collect::<Result<_>>()?;
        let lifted: Vec<Vec<f64>> = vals.iter().map(|v| pad(v, total)).collect();
        let ljacs: Vec<Mat> = jacs.iter().map(|j| pad_mat(j, total)).collect();

        let mut r = [0.0_f64; 6];
        for a in 0..fields.len() {
            for b in 0..fields.len() {
                let lhs = nabla(gm, &ljacs[b], &lifted[b], &lifted[a]);
                let rhs = pad(&nabla(&gl, &jacs[b], &vals[b], &vals[a]), total);
                r[0] = r[0].max(max_abs_diff(&lhs, &rhs));
            }

            let xf: f64 = vals[a].iter().zip(&fc.partials).map(|(x, d)| x * d).sum();
            let want: Vec<f64> = et.iter().map(|c| c * xf / f).collect();
            let zero = Mat::zeros(total, total);
            let d_xt = nabla(gm, &zero, &et, &lifted[a]);
            let d_tx = nabla(gm, &ljacs[a], &lifted[a], &et);
            r[1] = r[1]
                .max(max_abs_diff(&d_xt, &want))
                .max(max_abs_diff(&d_tx, &want));

            let lhs = full.apply(&lifted[a], &et, &et);
            let rhs: Vec<f64> = pad(&fc.nabla_gradient(&vals[a]), total)
                .into_iter()
                .map(|c| -e * f * c)
                .collect();
            r[3] = r[3].max(max_abs_diff(&lhs, &rhs));

            for b in 0..fields.len() {
                let lhs = full.apply(&lifted[a], &lifted[b], &et);
                r[5] = r[5].max(max_abs_diff(&lhs, &vec![0.0; total]));
                for c in 0..fields.len() {
                    let rm = full.apply(&lifted[a], &lifted[b], &lifted[c]);
                    let rl = base_curv.apply(&vals[a], &vals[b], &vals[c]);
                    for k in 0..total {
                        let mut ek = vec![0.0; total];
                        ek[k] = 1.0;
                        let lo_m = bilinear(&full.metric, &rm, &ek);
                        let lo_l = if k < n {
                            bilinear(&base_curv.metric, &rl, &ek[..n])
                        } else {
                            0.0
                        };
                        r[4] = r[4].max((lo_m - lo_l).abs());
                    }
                }
            }
        }

        let lhs = gm.contract(&et, &et);
        let rhs: Vec<f64> = pad(&fc.gradient, total)
            .into_iter()
            .map(|c| -e * f * c)
            .collect();
        r[2] = max_abs_diff(&lhs, &rhs);

        for (acc, v) in local.iter_mut().zip(r) {
            acc.push((q.clone(), v));
        }
    }

    Ok(PRODUCT_IDENTITIES
        .iter()
        .zip(local)
        .map(|(name, s)| DefectReport::from_samples(name.to_string(), s, opts.tolerance))
        .collect())
}

/// Metric of the `t = t0` slice of a static product, read back from the
/// product metric.
pub fn slice_metric(product: &MetricField, base_dim: usize, p: &[f64], t0: f64) -> Result<Mat> {
    let mut q = p.to_vec();
    q.push(t0);
    let g = product.eval(&q)?;
    Ok(g.view((0, 0), (base_dim, base_dim)).into_owned())
}

/// `det g` at `p`, exposed for positivity and signature probes.
pub fn metric_determinant(m: &MetricField, scheme: &DerivativeScheme, p: &[f64]) -> Result<f64> {
    Ok(metric_jet(m, scheme, p, false)?.g.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::sectional_curvature;

    fn line(lo: f64, hi: f64) -> MetricField {
        MetricField::euclidean(DomainBox(vec![Interval::new(lo, hi)]))
    }

    fn cosh_warp(r: f64) -> ScalarField {
        ScalarField::new(1, move |p| (r * p[0]).cosh())
            .with_gradient(move |p| vec![r * (r * p[0]).sinh()])
            .with_hessian(move |p| Mat::from_element(1, 1, r * r * (r * p[0]).cosh()))
    }

    #[test]
    fn minkowski_plane() {
        let spec = StaticProductSpec::new(line(-1.0, 1.0), ScalarField::constant(1, 1.0), SignEpsilon::Minus);
        let g = build_static(&spec).unwrap().eval(&[0.2, 0.3]).unwrap();
        assert_eq!(g, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
    }

    #[test]
    fn hyperbolic_plane_curvature() {
        for eps in [SignEpsilon::Plus, SignEpsilon::Minus] {
            let spec = StaticProductSpec::new(line(-3.0, 3.0), cosh_warp(2.0), eps);
            let m = build_static(&spec).unwrap();
            let k = sectional_curvature(&m, &DerivativeScheme::default(), &[0.4, 1.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
            assert!((k + 4.0).abs() < 1e-8, "{k}");
            let m = m.without_analytic_derivatives();
            let k = sectional_curvature(&m, &DerivativeScheme::default(), &[0.4, 1.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
            assert!((k + 4.0).abs() < 1e-5, "{k}");
        }
    }

    #[test]
    fn nonpositive_warp_rejected() {
        let spec = StaticProductSpec::new(
            line(-1.0, 1.0),
            ScalarField::new(1, |p| p[0]),
            SignEpsilon::Plus,
        );
        assert!(matches!(build_static(&spec), Err(GeometryError::NonPositiveWarp { .. })));
    }

    #[test]
    fn slice_reproduces_base_exactly() {
        let base = MetricField::new(DomainBox::cube(2, 0.5, 2.0), |p| {
            Mat::from_row_slice(2, 2, &[1.0 + p[0], 0.1 * p[1], 0.1 * p[1], p[0] * p[0]])
        });
        let spec = StaticProductSpec::new(base.clone(), ScalarField::new(2, |p| 1.0 + p[0] * p[1]), SignEpsilon::Minus);
        let m = build_static(&spec).unwrap();
        let p = [0.7, 1.3];
        assert_eq!(slice_metric(&m, 2, &p, 0.4).unwrap(), base.eval(&p).unwrap());
    }

    #[test]
    fn warped_hooks_match_differencing() {
        let base = line(-1.0, 1.0);
        let lam = ScalarField::new(1, |p| p[0].exp())
            .with_gradient(|p| vec![p[0].exp()])
            .with_hessian(|p| Mat::from_element(1, 1, p[0].exp()));
        let fiber = build_static(&StaticProductSpec::new(line(-2.0, 2.0), cosh_warp(1.0), SignEpsilon::Minus)).unwrap();
        let w = build_warped(&WarpedProductSpec { base, warp: lam, fiber }).unwrap();
        assert!(w.has_analytic_d1() && w.has_analytic_d2());
        let s = DerivativeScheme::default();
        let p = [0.3, -0.4, 1.1];
        let a = curvature_tensors(&w, &s, &p).unwrap();
        let b = curvature_tensors(&w.without_analytic_derivatives(), &s, &p).unwrap();
        assert!((a.ricci.clone() - b.ricci.clone()).abs().max() < 1e-5);
        assert!((a.scalar - b.scalar).abs() < 1e-5);
    }

    #[test]
    fn product_identities_on_hyperbolic_static_plane() {
        let spec = StaticProductSpec::new(line(-3.0, 3.0), cosh_warp(1.0), SignEpsilon::Minus);
        let samples = sampling::halton(&spec.domain(), 20, 1).unwrap();
        let reps = static_product_residuals(&spec, &DerivativeScheme::default(), &samples, &ProductIdentityOptions::default()).unwrap();
        assert_eq!(reps.len(), 6);
        for r in &reps {
            assert!(r.passed, "{} {}", r.identity, r.sup_defect);
        }
    }
}
