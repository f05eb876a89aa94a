use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ode::jet1;
use super::{CatalogSpace, ScalarSpec, CATALOG_LINE};
use crate::error::{GeometryError, Result};
use crate::manifold::{
    curvature_tensors, orthonormal_frame, scalar_calculus, DerivativeScheme, DomainBox, Interval,
    Mat, MetricField, Point, ScalarField, SignEpsilon,
};
use crate::product::{build_warped, StaticProductSpec, WarpedProductSpec};
use crate::report::DefectReport;

/// Least-squares Einstein constant and the remaining defect.
#[derive(Clone, Debug)]
pub struct EinsteinFit {
    pub delta: f64,
    pub report: DefectReport,
}

/// Ricci tensor in an orthonormal frame, with the frame signs.
fn frame_ricci(m: &MetricField, s: &DerivativeScheme, p: &[f64]) -> Result<(Mat, Vec<f64>)> {
    let c = curvature_tensors(m, s, p)?;
    let (frame, signs) = orthonormal_frame(&c.metric, s.degeneracy_floor)?;
    let n = frame.len();
    let e = Mat::from_fn(n, n, |i, a| frame[a][i]);
    Ok((e.transpose() * &c.ricci * e, signs))
}

fn frame_defect(r: &Mat, signs: &[f64], delta: f64) -> f64 {
    let n = signs.len();
    let mut d = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let want = if a == b { delta * signs[a] } else { 0.0 };
            d = d.max((r[(a, b)] - want).abs());
        }
    }
    d
}

/// Fits `Ric ≈ δ g` over the samples. In an orthonormal frame with signs
/// `η_a` the least-squares constant is `δ = Σ η_a Ric_aa / (#samples · n)`;
/// the report holds `max_{a,b} |Ric_ab − δ η_a δ_ab|` per sample.
pub fn einstein_defect(
    m: &MetricField,
    s: &DerivativeScheme,
    samples: &[Point],
    tolerance: f64,
) -> Result<EinsteinFit> {
    if samples.is_empty() {
        return Err(GeometryError::EmptyDomain("no samples for the Einstein fit".into()));
    }
    let frames: Vec<(Mat, Vec<f64>)> = samples
        .iter()
        .map(|p| frame_ricci(m, s, p))
        .collect::<Result<_>>()?;
    let n = m.dim().max(1);
    let trace: f64 = frames
        .iter()
        .map(|(r, signs)| (0..signs.len()).map(|a| signs[a] * r[(a, a)]).sum::<f64>())
        .sum();
    let delta = trace / (samples.len() * n) as f64;
    let out = samples
        .iter()
        .zip(&frames)
        .map(|(p, (r, signs))| (p.clone(), frame_defect(r, signs, delta)))
        .collect();
    Ok(EinsteinFit {
        delta,
        report: DefectReport::from_samples("einstein", out, tolerance),
    })
}

/// `max_{a,b} |Ric_ab − δ η_a δ_ab|` for a prescribed `δ`.
pub fn einstein_defect_fixed(
    m: &MetricField,
    s: &DerivativeScheme,
    samples: &[Point],
    delta: f64,
    tolerance: f64,
) -> Result<DefectReport> {
    let mut out = Vec::with_capacity(samples.len());
    for p in samples {
        let (r, signs) = frame_ricci(m, s, p)?;
        out.push((p.clone(), frame_defect(&r, &signs, delta)));
    }
    Ok(DefectReport::from_samples("einstein_fixed", out, tolerance))
}

/// Constants of the Einstein reduction on `N ×_λ (ℝ_s ×_c ℝ_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EinsteinChainConfig {
    /// Einstein constant `δ`.
    pub delta: f64,
    /// `a = c''/c`.
    pub a_const: f64,
    /// The constant `b` in `λ³K = b + δλ³/3`.
    pub b_const: f64,
    /// Phase in `c(s) = cosh(rs + b)` or `e^{rs + b}`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub b_shift: f64,
}

/// `N ×_λ (ℝ_s ×_c ℝ_t)` with metric `g_N + λ²(ds² + ε c(s)² dt²)`.
#[derive(Clone, Debug)]
pub struct EinsteinChainSpec {
    pub base: MetricField,
    pub lambda: ScalarField,
    /// One-variable warp of the fibre.
    pub c: ScalarField,
    pub eps: SignEpsilon,
    pub s_domain: Interval,
    pub t_domain: Interval,
}

impl EinsteinChainSpec {
    pub fn new(base: MetricField, lambda: ScalarField, c: ScalarField, eps: SignEpsilon) -> Self {
        EinsteinChainSpec {
            base,
            lambda,
            c,
            eps,
            s_domain: CATALOG_LINE,
            t_domain: CATALOG_LINE,
        }
    }

    /// Reads a catalog warped product over a model plane; the plane's warp
    /// is shifted by `b_shift`.
    pub fn from_catalog(space: &CatalogSpace, b_shift: f64) -> Result<Self> {
        let CatalogSpace::WarpedProduct {
            base,
            lambda,
            fiber,
        } = space
        else {
            return Err(GeometryError::InvalidParameter(format!(
                "{} is not a warped product",
                space.name()
            )));
        };
        let c = match **fiber {
            CatalogSpace::R2eps { .. } => ScalarSpec::constant(1.0),
            CatalogSpace::H2eps { r, .. } => ScalarSpec::Cosh {
                amp: 1.0,
                coef: r,
                shift: b_shift,
                axis: 0,
            },
            CatalogSpace::H2hatEps { r, .. } => ScalarSpec::Exp {
                amp: b_shift.exp(),
                coef: r,
                axis: 0,
            },
            _ => {
                return Err(GeometryError::InvalidParameter(format!(
                    "fiber {} is not a model plane",
                    fiber.name()
                )))
            }
        };
        space.validate()?;
        let b = base.metric()?;
        let n = b.dim();
        Ok(EinsteinChainSpec::new(
            b,
            lambda.to_field(n)?,
            c.to_field(1)?,
            fiber.eps().expect("model plane"),
        ))
    }

    /// `L = N ×_λ ℝ_s`.
    pub fn static_base(&self) -> Result<MetricField> {
        build_warped(&WarpedProductSpec {
            base: self.base.clone(),
            warp: self.lambda.clone(),
            fiber: MetricField::euclidean(DomainBox(vec![self.s_domain])),
        })
    }

    /// `L ×_{ε λc} ℝ_t`.
    pub fn static_product(&self) -> Result<StaticProductSpec> {
        Ok(StaticProductSpec::new(
            self.static_base()?,
            ScalarField::tensor_product(&self.lambda, &self.c),
            self.eps,
        )
        .with_t_domain(self.t_domain))
    }
}

/// Names of the residuals returned by [`einstein_chain_residuals`], in order.
pub const EINSTEIN_CHAIN_IDENTITIES: [&str; 16] = [
    "base_ricci",
    "fiber_ricci",
    "hessian_base",
    "hessian_fiber",
    "static_einstein",
    "base_einstein",
    "lambda_laplacian",
    "warp_ratio",
    "lambda_hessian",
    "lambda_trace",
    "lambda_curvature",
    "curvature_integral",
    "lambda_energy",
    "lambda_reparametrized",
    "curvature_sign",
    "b_sign",
];

/// Residuals of the reduction of the Einstein condition on
/// `N ×_λ (ℝ_s ×_c ℝ_t)` with `f = λc`, `L = N ×_λ ℝ_s`, `X, Y` tangent to
/// `N` and `K` the curvature of `N`:
///
/// * `base_ricci`: `Ric^L(X,Y) = Ric^N(X,Y) − H_λ(X,Y)/λ`
/// * `fiber_ricci`: `Ric^L(∂s,∂s) = −λ Δλ`
/// * `hessian_base`: `H_f(X,Y) = c H_λ(X,Y)`
/// * `hessian_fiber`: `H_f(∂s,∂s) = λ(c|∇λ|² + c'')`
/// * `static_einstein`: `Ric^L = H_f/f + δ g_L`
/// * `base_einstein`: `Ric^N = 2H_λ/λ + δ g_N`
/// * `lambda_laplacian`: `−λΔλ = |∇λ|² + c''/c + δλ²`
/// * `warp_ratio`: `c''/c = a`
/// * `lambda_hessian`: `H_λ = λ(K − δ)/2 · g_N`
/// * `lambda_trace`: `Δλ = λ(K − δ)`
/// * `lambda_curvature`: `−λ²K = |∇λ|² + a`
/// * `curvature_integral`: `λ³K = b + δλ³/3`
/// * `lambda_energy`: `−b/λ − δλ²/3 = |∇λ|² + a`
/// * `lambda_reparametrized`: `|∇λ|² = −a − b/λ − δλ²/3`
/// * `curvature_sign`, `b_sign`: positive parts of `K` and `b`
///
/// Samples are points `(x, s)` of `L` or `(x, s, t)` of the spacetime.
/// `N` must be two-dimensional.
pub fn einstein_chain_residuals(
    spec: &EinsteinChainSpec,
    cfg: &EinsteinChainConfig,
    s: &DerivativeScheme,
    samples: &[Point],
    tolerance: f64,
) -> Result<Vec<DefectReport>> {
    let n = spec.base.dim();
    if n != 2 {
        return Err(GeometryError::DimensionMismatch {
            expected: 2,
            found: n,
        });
    }
    if spec.lambda.dim() != n || spec.c.dim() != 1 {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: spec.lambda.dim(),
        });
    }
    let l = spec.static_base()?;
    let f = ScalarField::tensor_product(&spec.lambda, &spec.c);
    let EinsteinChainConfig {
        delta,
        a_const: a,
        b_const: b,
        ..
    } = *cfg;

    let mut local: Vec<Vec<(Point, f64)>> = vec![Vec::new(); EINSTEIN_CHAIN_IDENTITIES.len()];
    for q in samples {
        if q.len() < n + 1 {
            return Err(GeometryError::DimensionMismatch {
                expected: n + 1,
                found: q.len(),
            });
        }
        let ql = &q[..n + 1];
        let x = &q[..n];
        let cl = curvature_tensors(&l, s, ql)?;
        let cn = curvature_tensors(&spec.base, s, x)?;
        let lam = scalar_calculus(&spec.base, s, &spec.lambda, x)?;
        let fl = scalar_calculus(&l, s, &f, ql)?;
        let (cv, _, css) = jet1(&spec.c, q[n], s)?;
        if !(cv > 0.0) {
            return Err(GeometryError::NonPositiveWarp { value: cv });
        }
        let lv = lam.value;
        if !(lv > 0.0) {
            return Err(GeometryError::NonPositiveWarp { value: lv });
        }
        let grad2 = lam.gradient_norm_sq();
        let k = cn.scalar / 2.0;
        let fv = fl.value;

        let mut r = [0.0f64; 16];
        for i in 0..n {
            for j in 0..n {
                let (ricl, ricn, hl) = (cl.ricci[(i, j)], cn.ricci[(i, j)], lam.hessian[(i, j)]);
                let gn = cn.metric[(i, j)];
                r[0] = r[0].max((ricl - (ricn - hl / lv)).abs());
                r[2] = r[2].max((fl.hessian[(i, j)] - cv * hl).abs());
                r[5] = r[5].max((ricn - 2.0 * hl / lv - delta * gn).abs());
                r[8] = r[8].max((hl - lv * (k - delta) / 2.0 * gn).abs());
            }
        }
        r[1] = (cl.ricci[(n, n)] + lv * lam.laplacian).abs();
        r[3] = (fl.hessian[(n, n)] - lv * (cv * grad2 + css)).abs();
        for i in 0..=n {
            for j in 0..=n {
                let want = fl.hessian[(i, j)] / fv + delta * cl.metric[(i, j)];
                r[4] = r[4].max((cl.ricci[(i, j)] - want).abs());
            }
        }
        r[6] = (-lv * lam.laplacian - (grad2 + css / cv + delta * lv * lv)).abs();
        r[7] = (css / cv - a).abs();
        r[9] = (lam.laplacian - lv * (k - delta)).abs();
        r[10] = (-lv * lv * k - (grad2 + a)).abs();
        r[11] = (lv.powi(3) * k - b - delta * lv.powi(3) / 3.0).abs();
        r[12] = (-b / lv - delta * lv * lv / 3.0 - (grad2 + a)).abs();
        r[13] = (grad2 - (-a - b / lv - delta * lv * lv / 3.0)).abs();
        r[14] = k.max(0.0);
        r[15] = b.max(0.0);
        for (bucket, v) in local.iter_mut().zip(r) {
            bucket.push((q.clone(), v));
        }
    }
    Ok(EINSTEIN_CHAIN_IDENTITIES
        .iter()
        .zip(local)
        .map(|(name, pts)| DefectReport::from_samples(*name, pts, tolerance))
        .collect())
}
