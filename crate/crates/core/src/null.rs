//! Lightlike sectional curvature of degenerate planes in Lorentzian metrics.
//!
//! For a degenerate plane `Π = span(u, v)` with `u` lightlike and `v`
//! spacelike, `K_u(Π) = g(R(v,u)u, v) / g(v,v)`. The value scales with
//! `u ↦ cu` as `c²`, so only its sign (and vanishing) is intrinsic.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, Result};
use crate::manifold::{
    bilinear, curvature_tensors, orthonormal_frame, scalar_calculus, signature, Curvature,
    DerivativeScheme, Mat, MetricField, Point, SignEpsilon,
};
use crate::product::{build_static, StaticProductSpec};

/// Tolerance on `g(u,u)` and `g(u,v)`, relative to the coordinate norms.
pub const NULL_TOL: f64 = 1e-10;

/// A degenerate tangent plane given by a lightlike `u` and a spacelike `v`
/// orthogonal to it.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneratePlane {
    pub base: Point,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DegeneratePlane {
    pub fn new(m: &MetricField, base: Point, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let g = m.eval(&base)?;
        Self::checked(&g, base, u, v)
    }

    fn checked(g: &Mat, base: Point, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = g.nrows();
        if u.len() != n || v.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: if u.len() != n { u.len() } else { v.len() },
            });
        }
        let (nu, nv) = (euclid(&u), euclid(&v));
        let uu = bilinear(g, &u, &u);
        let uv = bilinear(g, &u, &v);
        let vv = bilinear(g, &v, &v);
        if nu == 0.0 || uu.abs() > NULL_TOL * nu * nu.max(1.0) {
            return Err(GeometryError::InvalidPlane(format!("u is not lightlike: g(u,u) = {uu:e}")));
        }
        if !(vv > 0.0) {
            return Err(GeometryError::InvalidPlane(format!("v is not spacelike: g(v,v) = {vv:e}")));
        }
        if uv.abs() > NULL_TOL * nu.max(1.0) * nv.max(1.0) {
            return Err(GeometryError::InvalidPlane(format!("g(u,v) = {uv:e} is not zero")));
        }
        Ok(DegeneratePlane { base, u, v })
    }

    /// The same plane with `u` replaced by `c·u`.
    pub fn rescaled(&self, c: f64) -> DegeneratePlane {
        DegeneratePlane {
            u: self.u.iter().map(|x| c * x).collect(),
            ..self.clone()
        }
    }

    /// The same plane with spacelike vector `v + a·u`.
    pub fn with_sheared_v(&self, a: f64) -> DegeneratePlane {
        DegeneratePlane {
            v: self.v.iter().zip(&self.u).map(|(v, u)| v + a * u).collect(),
            ..self.clone()
        }
    }
}

fn require_lorentzian(g: &Mat, floor: f64) -> Result<()> {
    let (neg, _, zero) = signature(g, floor);
    if neg != 1 || zero != 0 {
        return Err(GeometryError::NotLorentzian { negative: neg });
    }
    if g.nrows() < 3 {
        return Err(GeometryError::InvalidPlane(
            "lightlike sectional curvature needs dimension at least 3".to_string(),
        ));
    }
    Ok(())
}

/// `g(R(v,u)u, v) / g(v,v)` from precomputed curvature.
pub fn lightlike_from(curv: &Curvature, u: &[f64], v: &[f64]) -> f64 {
    curv.lowered(v, u, u, v) / bilinear(&curv.metric, v, v)
}

pub fn lightlike_sectional(
    m: &MetricField,
    scheme: &DerivativeScheme,
    plane: &DegeneratePlane,
) -> Result<f64> {
    let g = m.eval(&plane.base)?;
    require_lorentzian(&g, scheme.degeneracy_floor)?;
    let plane = DegeneratePlane::checked(&g, plane.base.clone(), plane.u.clone(), plane.v.clone())?;
    let curv = curvature_tensors(m, scheme, &plane.base)?;
    Ok(lightlike_from(&curv, &plane.u, &plane.v))
}

/// Both sides of the static-space formula
/// `K_u(span(v, u)) = K^L(span(v, w)) + Hess f(v, v) / f`, `u = w + (1/f)∂_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurluzResidual {
    pub lightlike: f64,
    pub base_sectional: f64,
    pub hessian_term: f64,
    pub residual: f64,
}

/// Evaluates the formula at the product point `q = (p, t)` for `v, w`
/// unit and orthogonal in `g_L`.
pub fn curluz_residual(
    spec: &StaticProductSpec,
    scheme: &DerivativeScheme,
    q: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<CurluzResidual> {
    if spec.eps != SignEpsilon::Minus {
        return Err(GeometryError::InvalidParameter(
            "the lightlike formula applies to static spaces (eps = -1)".to_string(),
        ));
    }
    let n = spec.base.dim();
    if n < 2 {
        return Err(GeometryError::InvalidParameter(
            "the base must have dimension at least 2".to_string(),
        ));
    }
    if q.len() != n + 1 || v.len() != n || w.len() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: v.len().max(w.len()),
        });
    }
    let p = &q[..n];
    let gl = spec.base.eval(p)?;
    let (vv, ww, vw) = (bilinear(&gl, v, v), bilinear(&gl, w, w), bilinear(&gl, v, w));
    if (vv - 1.0).abs() > 1e-8 || (ww - 1.0).abs() > 1e-8 || vw.abs() > 1e-8 {
        return Err(GeometryError::InvalidPlane(format!(
            "v, w must be orthonormal in the base metric (g(v,v) = {vv}, g(w,w) = {ww}, g(v,w) = {vw})"
        )));
    }
    let m = build_static(spec)?;
    let base_curv = curvature_tensors(&spec.base, scheme, p)?;
    let k_l = base_curv.sectional(v, w, scheme.degeneracy_floor)?;
    let fc = scalar_calculus(&spec.base, scheme, &spec.warp, p)?;
    let hess = fc.hess(v, v) / fc.value;

    let mut u = w.to_vec();
    u.push(1.0 / fc.value);
    let mut vt = v.to_vec();
    vt.push(0.0);
    let plane = DegeneratePlane::new(&m, Point(q.to_vec()), u, vt)?;
    let ku = lightlike_sectional(&m, scheme, &plane)?;
    Ok(CurluzResidual {
        lightlike: ku,
        base_sectional: k_l,
        hessian_term: hess,
        residual: (ku - (k_l + hess)).abs(),
    })
}

/// Statistics of `K_u` over a family of degenerate planes at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullScan {
    pub min_abs: f64,
    pub min: f64,
    pub max: f64,
    pub planes: usize,
}

/// Scans degenerate planes at `p`.
///
/// With `T` the unit timelike reference vector (the most timelike coordinate
/// direction when one exists) and `v, w` unit spacelike, orthogonal to each
/// other and to `T`, each plane is `span(v, u)` with `u = w − T`, so that
/// `g(u, T) = 1`. The family contains every ordered pair `(v, ±w)` of the
/// deterministic orthonormal frame of `T^⊥` followed by `n_planes` random
/// pairs from the seeded stream. The result is evidence on a finite family,
/// not a certificate over all degenerate planes.
pub fn null_curvature_scan(
    m: &MetricField,
    scheme: &DerivativeScheme,
    p: &[f64],
    n_planes: usize,
    seed: u64,
) -> Result<NullScan> {
    if n_planes == 0 {
        return Err(GeometryError::InvalidParameter(
            "n_planes must be at least 1".to_string(),
        ));
    }
    let g = m.eval(p)?;
    require_lorentzian(&g, scheme.degeneracy_floor)?;
    let n = g.nrows();
    let curv = curvature_tensors(m, scheme, p)?;
    let (frame, signs) = orthonormal_frame(&g, scheme.degeneracy_floor)?;
    let t_idx = signs
        .iter()
        .position(|s| *s < 0.0)
        .ok_or(GeometryError::NotLorentzian { negative: 0 })?;
    let t = frame[t_idx].clone();
    let spatial: Vec<Vec<f64>> = frame
        .iter()
        .zip(&signs)
        .filter(|(_, s)| **s > 0.0)
        .map(|(e, _)| e.clone())
        .collect();

    let mut values = Vec::new();
    let mut eval_plane = |v: &[f64], w: &[f64]| -> Result<()> {
        let u: Vec<f64> = w.iter().zip(&t).map(|(a, b)| a - b).collect();
        let plane = DegeneratePlane::checked(&g, Point(p.to_vec()), u, v.to_vec())?;
        values.push(lightlike_from(&curv, &plane.u, &plane.v));
        Ok(())
    };

    for (a, v) in spatial.iter().enumerate() {
        for (b, w) in spatial.iter().enumerate() {
            if a == b {
                continue;
            }
            eval_plane(v, w)?;
            let neg: Vec<f64> = w.iter().map(|x| -x).collect();
            eval_plane(v, &neg)?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < n_planes {
        attempts += 1;
        if attempts > 100 * n_planes {
            return Err(GeometryError::RetriesExhausted(
                "random degenerate planes".to_string(),
            ));
        }
        let mut pair: Vec<Vec<f64>> = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // remove the T component (g(T,T) = −1), then earlier draws
            let ct = bilinear(&g, &c, &t);
            for (ci, ti) in c.iter_mut().zip(&t) {
                *ci += ct * ti;
            }
            for e in &pair {
                let ce = bilinear(&g, &c, e);
                for (ci, ei) in c.iter_mut().zip(e) {
                    *ci -= ce * ei;
                }
            }
            let nn = bilinear(&g, &c, &c);
            if nn > 1e-8 * euclid(&c).powi(2).max(1e-300) {
                let s = 1.0 / nn.sqrt();
                pair.push(c.into_iter().map(|x| x * s).collect());
            } else {
                break;
            }
        }
        if pair.len() != 2 {
            continue;
        }
        match eval_plane(&pair[0], &pair[1]) {
            Ok(()) => accepted += 1,
            Err(GeometryError::InvalidPlane(_)) => continue,
            Err(e) => return Err(e),
        }
    }

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_abs = values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Ok(NullScan {
        min_abs,
        min,
        max,
        planes: values.len(),
    })
}

/// The degenerate plane used to show that a static space with warp
/// `f = λ(x)c(s)` admits a second static field: `v` the unit vector along
/// `v_axis` and `u = ∂_s/|∂_s| − ∂_t/|∂_t|`.
pub fn warped_null_plane(
    m: &MetricField,
    p: &[f64],
    v_axis: usize,
    s_axis: usize,
    t_axis: usize,
) -> Result<DegeneratePlane> {
    let g = m.eval(p)?;
    let n = g.nrows();
    if v_axis >= n || s_axis >= n || t_axis >= n {
        return Err(GeometryError::InvalidParameter(format!(
            "axes ({v_axis}, {s_axis}, {t_axis}) out of range for dimension {n}"
        )));
    }
    let mut u = vec![0.0; n];
    u[s_axis] = 1.0 / g[(s_axis, s_axis)].abs().sqrt();
    u[t_axis] = -1.0 / g[(t_axis, t_axis)].abs().sqrt();
    let mut v = vec![0.0; n];
    v[v_axis] = 1.0 / g[(v_axis, v_axis)].abs().sqrt();
    DegeneratePlane::checked(&g, Point(p.to_vec()), u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{DomainBox, ScalarField};

    fn minkowski3() -> MetricField {
        MetricField::constant(
            DomainBox::cube(3, -1.0, 1.0),
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0])),
        )
    }

    #[test]
    fn flat_lightlike_curvature_vanishes() {
        let m = minkowski3();
        let plane = DegeneratePlane::new(&m, Point(vec![0.0; 3]), vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(lightlike_sectional(&m, &DerivativeScheme::default(), &plane).unwrap(), 0.0);
        let scan = null_curvature_scan(&m, &DerivativeScheme::default(), &[0.0; 3], 10, 3).unwrap();
        assert_eq!(scan.min_abs, 0.0);
        assert_eq!(scan.planes, 14);
    }

    #[test]
    fn invalid_planes_rejected() {
        let m = minkowski3();
        assert!(DegeneratePlane::new(&m, Point(vec![0.0; 3]), vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.0]).is_err());
        assert!(DegeneratePlane::new(&m, Point(vec![0.0; 3]), vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]).is_err());
        let riem = MetricField::euclidean(DomainBox::cube(3, -1.0, 1.0));
        let plane = DegeneratePlane { base: Point(vec![0.0; 3]), u: vec![1.0, 0.0, 1.0], v: vec![0.0, 1.0, 0.0] };
        assert!(matches!(
            lightlike_sectional(&riem, &DerivativeScheme::default(), &plane),
            Err(GeometryError::NotLorentzian { negative: 0 })
        ));
    }

    #[test]
    fn curluz_with_constant_warp_is_base_curvature() {
        let base = MetricField::euclidean(DomainBox::cube(2, -1.0, 1.0));
        let spec = StaticProductSpec::new(base, ScalarField::constant(2, 1.0), SignEpsilon::Minus);
        let r = curluz_residual(&spec, &DerivativeScheme::default(), &[0.1, 0.2, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(r.residual < 1e-12 && r.lightlike.abs() < 1e-12);
    }
}
