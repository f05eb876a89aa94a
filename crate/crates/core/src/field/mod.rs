//! Killing, irrotational and static checks for vector fields, the projection
//! of a field on a static product onto its slices, and flow-based
//! decomposition.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{GeometryError, Result};
use crate::manifold::{
    bilinear, covariant_jacobian, field_jacobian, mat_vec, metric_jet, scalar_partials,
    DerivativeScheme, Mat, MetricField, Point, ScalarField, VectorFieldSpec,
};
use crate::product::{build_static, StaticProductSpec};
use crate::report::DefectReport;

mod flow;

pub use flow::{
    flow_certificate, integrate_flow, verify_flow_decomposition, FlowConfig, FlowDecomposition,
    FlowDecompositionOptions, Leaf,
};

/// `sup |g(∇_{e_i}V, e_j) + g(∇_{e_j}V, e_i)|` over samples and coordinate
/// pairs; zero exactly for Killing fields.
pub fn killing_defect(
    m: &MetricField,
    scheme: &DerivativeScheme,
    v: &VectorFieldSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<DefectReport> {
    check_field(m, v)?;
    let n = m.dim();
    let mut out = Vec::with_capacity(samples.len());
    for p in samples {
        let nab = covariant_jacobian(m, scheme, v, p)?;
        let g = m.eval(p)?;
        // a[(j, i)] = g(∇_{e_i} V, e_j)
        let a = &g * &nab;
        let mut d = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                d = d.max((a[(j, i)] + a[(i, j)]).abs());
            }
        }
        out.push((p.clone(), d));
    }
    Ok(DefectReport::from_samples("killing", out, tolerance))
}

/// Integrability defect of the distribution orthogonal to `V`.
#[derive(Clone, Debug)]
pub struct FrobeniusDefect {
    /// `|ω∧dω| / |ω|²` with `|ω|` the coordinate norm of `ω = g(V, ·)`;
    /// unchanged when `V` is multiplied by a nonvanishing function.
    pub normalized: DefectReport,
    pub raw: DefectReport,
}

/// Sup norm of the components `(ω∧dω)_{ijk}`, `ω = g(V, ·)`; identically
/// zero in dimension ≤ 2.
pub fn frobenius_defect(
    m: &MetricField,
    scheme: &DerivativeScheme,
    v: &VectorFieldSpec,
    samples: &[Point],
    tolerance: f64,
) -> Result<FrobeniusDefect> {
    check_field(m, v)?;
    let n = m.dim();
    let mut raw = Vec::with_capacity(samples.len());
    let mut norm = Vec::with_capacity(samples.len());
    for p in samples {
        if n <= 2 {
            m.domain().check(p)?;
            raw.push((p.clone(), 0.0));
            norm.push((p.clone(), 0.0));
            continue;
        }
        let jet = metric_jet(m, scheme, p, false)?;
        let jac = field_jacobian(v, m.domain(), scheme, p)?;
        let vals = v.eval(p);
        let omega = mat_vec(&jet.g, &vals);
        // dw[(j, k)] = ∂_j ω_k
        let mut dw = Mat::zeros(n, n);
        for j in 0..n {
            let dgv = mat_vec(&jet.dg[j], &vals);
            for k in 0..n {
                let mut s = dgv[k];
                for l in 0..n {
                    s += jet.g[(k, l)] * jac[(l, j)];
                }
                dw[(j, k)] = s;
            }
        }
        let d = |j: usize, k: usize| dw[(j, k)] - dw[(k, j)];
        let mut sup = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let c = omega[i] * d(j, k) + omega[j] * d(k, i) + omega[k] * d(i, j);
                    sup = sup.max(c.abs());
                }
            }
        }
        let w2: f64 = omega.iter().map(|x| x * x).sum();
        raw.push((p.clone(), sup));
        norm.push((p.clone(), if w2 > 0.0 { sup / w2 } else { 0.0 }));
    }
    Ok(FrobeniusDefect {
        normalized: DefectReport::from_samples("frobenius", norm, tolerance),
        raw: DefectReport::from_samples("frobenius_raw", raw, tolerance),
    })
}

fn check_field(m: &MetricField, v: &VectorFieldSpec) -> Result<()> {
    if m.dim() != v.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: m.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// Step for the `t`-derivatives of `a` and `V^t`.
pub const T_STEP: f64 = 1e-5;

/// Splitting `V = a ∂_t + lift(V^t)` of a field on `L ×_{εf} ℝ`.
#[derive(Clone, Debug)]
pub struct FieldDecomposition {
    spec: StaticProductSpec,
    metric: MetricField,
    field: VectorFieldSpec,
}

impl FieldDecomposition {
    pub fn new(spec: &StaticProductSpec, v: &VectorFieldSpec) -> Result<Self> {
        let metric = build_static(spec)?;
        check_field(&metric, v)?;
        Ok(FieldDecomposition {
            spec: spec.clone(),
            metric,
            field: v.clone(),
        })
    }

    pub fn spec(&self) -> &StaticProductSpec {
        &self.spec
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    fn base_dim(&self) -> usize {
        self.spec.base.dim()
    }

    fn point(&self, p: &[f64], t: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        q.push(t);
        q
    }

    /// `a(p, t) = g(V, ∂_t) / (ε f²)`.
    pub fn a(&self, p: &[f64], t: f64) -> f64 {
        let q = self.point(p, t);
        let n = self.base_dim();
        let g = self.metric.eval_unchecked(&q);
        let v = self.field.eval(&q);
        let gvt: f64 = (0..=n).map(|j| g[(n, j)] * v[j]).sum();
        gvt / g[(n, n)]
    }

    /// Components of `V^t = π_* V` at `p`.
    pub fn vt(&self, p: &[f64], t: f64) -> Vec<f64> {
        let mut v = self.field.eval(&self.point(p, t));
        v.truncate(self.base_dim());
        v
    }

    pub fn a_t(&self, p: &[f64], t: f64) -> f64 {
        (self.a(p, t + T_STEP) - self.a(p, t - T_STEP)) / (2.0 * T_STEP)
    }

    pub fn dvt_dt(&self, p: &[f64], t: f64) -> Vec<f64> {
        let (hi, lo) = (self.vt(p, t + T_STEP), self.vt(p, t - T_STEP));
        hi.iter()
            .zip(&lo)
            .map(|(a, b)| (a - b) / (2.0 * T_STEP))
            .collect()
    }

    /// `max |V − (a ∂_t + lift V^t)|` at `(p, t)`.
    pub fn reconstruction_defect(&self, p: &[f64], t: f64) -> f64 {
        let mut rebuilt = self.vt(p, t);
        rebuilt.push(self.a(p, t));
        let v = self.field.eval(&self.point(p, t));
        crate::manifold::max_abs_diff(&v, &rebuilt)
    }

    /// The slice field `V^t` on `L`.
    pub fn slice_field(&self, t: f64) -> VectorFieldSpec {
        let me = self.clone();
        VectorFieldSpec::new(self.base_dim(), move |p| me.vt(p, t))
    }

    /// The function `a^t = a(·, t)` on `L`.
    pub fn slice_a(&self, t: f64) -> ScalarField {
        let me = self.clone();
        ScalarField::new(self.base_dim(), move |p| me.a(p, t))
    }
}

/// One slice of a decomposition.
#[derive(Clone, Debug)]
pub struct FieldSlice {
    pub t: f64,
    pub a: ScalarField,
    pub vt: VectorFieldSpec,
}

pub fn project_field(spec: &StaticProductSpec, v: &VectorFieldSpec, t: f64) -> Result<FieldSlice> {
    let d = FieldDecomposition::new(spec, v)?;
    Ok(FieldSlice {
        t,
        a: d.slice_a(t),
        vt: d.slice_field(t),
    })
}

/// Tolerance and exclusion threshold for [`projection_residuals`].
#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    pub tolerance: f64,
    /// Samples with `|a^t| ≤ exclusion` or `|V^t| ≤ exclusion` are skipped
    /// for the third residual, which divides by both.
    pub exclusion: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            tolerance: 1e-4,
            exclusion: 1e-4,
        }
    }
}

/// The three projection residuals of a field on a static product.
#[derive(Clone, Debug)]
pub struct ProjectionResiduals {
    /// `|d/dt V^t + ε f² ∇^L a^t|` in the `g_L` norm.
    pub r1: DefectReport,
    /// `|V^t(ln f) + a_t|`.
    pub r2: DefectReport,
    /// `max_X |X(ln(a^t f)) − X(ln √g(V^t, V^t))|` over an orthonormal set
    /// `X ⊥ V^t`.
    pub r3: DefectReport,
    pub r3_evaluated: usize,
    pub r3_excluded: usize,
}

impl ProjectionResiduals {
    pub fn reports(&self) -> [&DefectReport; 3] {
        [&self.r1, &self.r2, &self.r3]
    }
}

fn norm_in(g: &Mat, v: &[f64]) -> f64 {
    bilinear(g, v, v).abs().sqrt()
}

/// Gram–Schmidt completion of `first` to an orthonormal set of `g`; returns
/// the vectors orthogonal to `first`.
fn orthonormal_complement(g: &Mat, first: &[f64]) -> Vec<Vec<f64>> {
    let n = g.nrows();
    let mut frame: Vec<(Vec<f64>, f64)> = Vec::new();
    let nf = bilinear(g, first, first);
    if nf.abs() > 1e-12 {
        let s = 1.0 / nf.abs().sqrt();
        frame.push((first.iter().map(|x| x * s).collect(), nf.signum()));
    }
    for k in 0..n {
        if frame.len() == n {
            break;
        }
        let mut c = vec![0.0; n];
        c[k] = 1.0;
        for (e, sg) in &frame {
            let proj = bilinear(g, &c, e) * sg;
            for (ci, ei) in c.iter_mut().zip(e) {
                *ci -= proj * ei;
            }
        }
        let nn = bilinear(g, &c, &c);
        if nn.abs() > 1e-10 {
            let s = 1.0 / nn.abs().sqrt();
            frame.push((c.into_iter().map(|x| x * s).collect(), nn.signum()));
        }
    }
    frame.into_iter().skip(1).map(|(e, _)| e).collect()
}

/// Residuals of the slice equations `d/dt V^t = −ε f² ∇^L a^t`,
/// `V^t(ln f) = −a_t` and, for `X ⊥ V^t`, `X(ln(a^t f)) = X(ln √g(V^t, V^t))`,
/// over the product grid `base_samples × t_samples`.
///
/// If every sample is excluded from the third residual the report is empty
/// (sup 0) and the exclusion is visible through `r3_evaluated == 0`.
pub fn projection_residuals(
    spec: &StaticProductSpec,
    v: &VectorFieldSpec,
    scheme: &DerivativeScheme,
    t_samples: &[f64],
    base_samples: &[Point],
    opts: &ProjectionOptions,
) -> Result<ProjectionResiduals> {
    let d = FieldDecomposition::new(spec, v)?;
    let base = &spec.base;
    let n = base.dim();
    let e = spec.eps.value();
    let (mut r1, mut r2, mut r3) = (Vec::new(), Vec::new(), Vec::new());
    let (mut evaluated, mut excluded) = (0, 0);
    for &t in t_samples {
        let a_t_fn = d.slice_a(t);
        let vt_fn = d.slice_field(t);
        let vt_norm2 = {
            let b = base.clone();
            let vf = vt_fn.clone();
            ScalarField::new(n, move |p| {
                let w = vf.eval(p);
                bilinear(&b.eval_unchecked(p), &w, &w)
            })
        };
        for p in base_samples {
            let q = Point(d.point(p, t));
            let g = base.eval(p)?;
            let ginv = g
                .clone()
                .try_inverse()
                .ok_or(GeometryError::DegenerateMetric {
                    point: p.to_vec(),
                    det: g.determinant(),
                })?;
            let f_jet = scalar_partials(&spec.warp, base.domain(), scheme, p)?;
            let f = f_jet.value;
            let da = scalar_partials(&a_t_fn, base.domain(), scheme, p)?;
            let grad_a = mat_vec(&ginv, &da.partials);

            let dvt = d.dvt_dt(p, t);
            let res1: Vec<f64> = dvt
                .iter()
                .zip(&grad_a)
                .map(|(x, y)| x + e * f * f * y)
                .collect();
            r1.push((q.clone(), norm_in(&g, &res1)));

            let vt = d.vt(p, t);
            let vt_lnf: f64 = vt.iter().zip(&f_jet.partials).map(|(x, y)| x * y).sum::<f64>() / f;
            r2.push((q.clone(), (vt_lnf + d.a_t(p, t)).abs()));

            let a = da.value;
            let vn = norm_in(&g, &vt);
            if a.abs() <= opts.exclusion || vn <= opts.exclusion {
                excluded += 1;
                continue;
            }
            evaluated += 1;
            let dn = scalar_partials(&vt_norm2, base.domain(), scheme, p)?;
            let mut worst = 0.0_f64;
            for x in orthonormal_complement(&g, &vt) {
                let dir = |grad: &[f64]| -> f64 { x.iter().zip(grad).map(|(u, w)| u * w).sum() };
                let lhs = dir(&da.partials) / a + dir(&f_jet.partials) / f;
                let rhs = dir(&dn.partials) / (2.0 * dn.value);
                worst = worst.max((lhs - rhs).abs());
            }
            r3.push((q, worst));
        }
    }
    Ok(ProjectionResiduals {
        r1: DefectReport::from_samples("projection_r1", r1, opts.tolerance),
        r2: DefectReport::from_samples("projection_r2", r2, opts.tolerance),
        r3: DefectReport::from_samples("projection_r3", r3, opts.tolerance),
        r3_evaluated: evaluated,
        r3_excluded: excluded,
    })
}

/// Zero threshold for the dichotomy scan, relative to the field sup norm.
pub const ZERO_TOL_REL: f64 = 1e-7;

/// Classification of one slice field `V^t` on the base grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SliceVerdict {
    IdenticallyZero,
    NowhereZero,
    /// Zeros and nonzeros on the same slice; for a genuine static field
    /// this means the grid is too coarse or the field is not static.
    Mixed,
}

#[derive(Clone, Debug)]
pub struct DichotomyScan {
    pub zero_tol: f64,
    pub verdicts: Vec<(f64, SliceVerdict)>,
    /// Set when any slice is [`SliceVerdict::Mixed`].
    pub flagged: bool,
}

/// Classifies every `V^t`, `t ∈ t_grid`, as identically zero, nowhere zero
/// or mixed on `base_grid`, using the `g_L` norm and
/// `zero_tol = 1e-7 · sup |V^t|` over the whole grid.
pub fn dichotomy_scan(
    spec: &StaticProductSpec,
    v: &VectorFieldSpec,
    t_grid: &[f64],
    base_grid: &[Point],
) -> Result<DichotomyScan> {
    if t_grid.is_empty() || base_grid.is_empty() {
        return Err(GeometryError::InvalidParameter(
            "dichotomy scan needs nonempty grids".to_string(),
        ));
    }
    let d = FieldDecomposition::new(spec, v)?;
    let metrics: Vec<Mat> = base_grid
        .iter()
        .map(|p| spec.base.eval(p))
        .collect::<Result<_>>()?;
    let norms: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| {
            base_grid
                .iter()
                .zip(&metrics)
                .map(|(p, g)| norm_in(g, &d.vt(p, t)))
                .collect()
        })
        .collect();
    let sup = norms.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
    let zero_tol = ZERO_TOL_REL * sup;
    let verdicts: Vec<(f64, SliceVerdict)> = t_grid
        .iter()
        .zip(&norms)
        .map(|(&t, row)| {
            let hi = row.iter().fold(0.0_f64, |a, &b| a.max(b));
            let lo = row.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let verdict = if hi <= zero_tol {
                SliceVerdict::IdenticallyZero
            } else if lo > zero_tol {
                SliceVerdict::NowhereZero
            } else {
                SliceVerdict::Mixed
            };
            (t, verdict)
        })
        .collect();
    let flagged = verdicts.iter().any(|(_, v)| *v == SliceVerdict::Mixed);
    Ok(DichotomyScan {
        zero_tol,
        verdicts,
        flagged,
    })
}

/// Outcome of [`proportionality_check`].
#[derive(Clone, Debug)]
pub struct Proportionality {
    pub proportional: bool,
    /// `(t, h(t))` with `h` the least-squares factor in `V^t ≈ h(t) V^{t0}`.
    pub h: Vec<(f64, f64)>,
    pub max_relative_residual: f64,
}

/// Relative residual bound for [`Proportionality::proportional`].
pub const PROPORTIONALITY_TOL: f64 = 1e-6;

/// Fits `V^t ≈ h(t) V^{t0}` by least squares in the `g_L` inner product
/// summed over `base_grid`.
pub fn proportionality_check(
    spec: &StaticProductSpec,
    v: &VectorFieldSpec,
    t0: f64,
    t_grid: &[f64],
    base_grid: &[Point],
) -> Result<Proportionality> {
    let scan = dichotomy_scan(spec, v, &[t0], base_grid)?;
    if scan.verdicts[0].1 != SliceVerdict::NowhereZero {
        return Err(GeometryError::VanishingReference);
    }
    let d = FieldDecomposition::new(spec, v)?;
    let metrics: Vec<Mat> = base_grid
        .iter()
        .map(|p| spec.base.eval(p))
        .collect::<Result<_>>()?;
    let reference: Vec<Vec<f64>> = base_grid.iter().map(|p| d.vt(p, t0)).collect();
    let ref_sq: f64 = reference
        .iter()
        .zip(&metrics)
        .map(|(r, g)| bilinear(g, r, r).abs())
        .sum();
    let mut h = Vec::with_capacity(t_grid.len());
    let mut worst = 0.0_f64;
    for &t in t_grid {
        let cur: Vec<Vec<f64>> = base_grid.iter().map(|p| d.vt(p, t)).collect();
        let dot: f64 = cur
            .iter()
            .zip(&reference)
            .zip(&metrics)
            .map(|((c, r), g)| bilinear(g, c, r))
            .sum();
        let ht = if t == t0 { 1.0 } else { dot / ref_sq };
        let mut res = 0.0;
        let mut cur_sq = 0.0;
        for ((c, r), g) in cur.iter().zip(&reference).zip(&metrics) {
            let diff: Vec<f64> = c.iter().zip(r).map(|(x, y)| x - ht * y).collect();
            res += bilinear(g, &diff, &diff).abs();
            cur_sq += bilinear(g, c, c).abs();
        }
        let scale = cur_sq.sqrt() + ht.abs() * ref_sq.sqrt();
        let rel = if scale > 0.0 { res.sqrt() / scale } else { 0.0 };
        worst = worst.max(rel);
        h.push((t, ht));
    }
    Ok(Proportionality {
        proportional: worst <= PROPORTIONALITY_TOL,
        h,
        max_relative_residual: worst,
    })
}
