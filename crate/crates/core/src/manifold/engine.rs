use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, Result};

use super::diff::{first_partials, second_partials, DerivativeScheme};
use super::{bilinear, mat_vec, DomainBox, Mat, MetricField, ScalarField, VectorFieldSpec};

/// Metric value, inverse and coordinate derivatives at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: Mat,
    pub ginv: Mat,
    /// `dg[k] = ∂_k g`.
    pub dg: Vec<Mat>,
    /// `ddg[k * n + l] = ∂_k ∂_l g`, present when requested.
    pub ddg: Option<Vec<Mat>>,
}

fn flatten(m: &MetricField) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |q: &[f64]| m.eval_fn()(q).as_slice().to_vec()
}

fn reshape(n: usize, flat: Vec<Vec<f64>>) -> Vec<Mat> {
    flat.into_iter()
        .map(|v| Mat::from_column_slice(n, n, &v))
        .collect()
}

pub fn metric_jet(
    m: &MetricField,
    s: &DerivativeScheme,
    p: &[f64],
    second: bool,
) -> Result<MetricJet> {
    s.validate()?;
    m.domain().check(p)?;
    let n = m.dim();
    let g = m.eval_fn()(p);
    let ginv = invert(&g, p, s.degeneracy_floor)?;
    let dg = match m.d1_fn() {
        Some(d1) => d1(p),
        None => reshape(
            n,
            first_partials(&flatten(m), p, m.domain(), s.first_step, s.richardson)?,
        ),
    };
    let ddg = if second {
        Some(match m.d2_fn() {
            Some(d2) => d2(p),
            None => reshape(
                n,
                second_partials(&flatten(m), p, m.domain(), s.second_step, s.richardson)?,
            ),
        })
    } else {
        None
    };
    Ok(MetricJet { g, ginv, dg, ddg })
}

fn invert(g: &Mat, p: &[f64], floor: f64) -> Result<Mat> {
    let n = g.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let det = g.determinant();
    if !(det.abs() > floor) {
        return Err(GeometryError::DegenerateMetric {
            point: p.to_vec(),
            det,
        });
    }
    g.clone()
        .try_inverse()
        .ok_or_else(|| GeometryError::DegenerateMetric {
            point: p.to_vec(),
            det,
        })
}

/// Christoffel symbols of the second kind, `Γ^k_{ij}` stored at `(k, i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ^k_{ij} x^i y^j`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * x[i] * y[j];
                    }
                }
                s
            })
            .collect()
    }
}

fn first_kind(jet: &MetricJet) -> Vec<f64> {
    // Γ_{l,ij} = ½(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}) at (l, i, j)
    let n = jet.g.nrows();
    let mut out = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(l * n + i) * n + j] =
                    0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)]);
            }
        }
    }
    out
}

fn raise_first(ginv: &Mat, low: &[f64]) -> Vec<f64> {
    let n = ginv.nrows();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(k, l)] * low[(l * n + i) * n + j];
                }
                out[(k * n + i) * n + j] = s;
            }
        }
    }
    out
}

pub(crate) fn christoffel_from_jet(jet: &MetricJet) -> Christoffel {
    let n = jet.g.nrows();
    Christoffel {
        n,
        data: raise_first(&jet.ginv, &first_kind(jet)),
    }
}

/// Levi-Civita connection coefficients at `p`.
pub fn christoffel(m: &MetricField, s: &DerivativeScheme, p: &[f64]) -> Result<Christoffel> {
    let jet = metric_jet(m, s, p, false)?;
    Ok(christoffel_from_jet(&jet))
}

/// Riemann, Ricci and scalar curvature at a point.
///
/// The convention is `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`; the
/// component `R^l_{ijk}` stored at `(l, i, j, k)` is the `l`-th component of
/// `R(∂_i, ∂_j)∂_k`, and `Ric(Y, Z) = tr(X ↦ R(X,Y)Z)`. With this sign the
/// sectional curvature `g(R(v,w)w, v)/Q` of a round sphere is positive.
#[derive(Clone, Debug)]
pub struct Curvature {
    n: usize,
    riemann: Vec<f64>,
    pub metric: Mat,
    pub christoffel: Christoffel,
    pub ricci: Mat,
    pub scalar: f64,
}

impl Curvature {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn riemann(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.riemann[((l * n + i) * n + j) * n + k]
    }

    /// Components of `R(x, y)z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if z[k] == 0.0 {
                        continue;
                    }
                    let c = x[i] * y[j] * z[k];
                    for (l, o) in out.iter_mut().enumerate() {
                        *o += self.riemann(l, i, j, k) * c;
                    }
                }
            }
        }
        out
    }

    /// `g(R(x, y)z, w)`.
    pub fn lowered(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        bilinear(&self.metric, &self.apply(x, y, z), w)
    }

    /// `g(R(v,w)w, v) / (g(v,v)g(w,w) − g(v,w)²)`.
    pub fn sectional(&self, v: &[f64], w: &[f64], floor: f64) -> Result<f64> {
        let g = &self.metric;
        let q = bilinear(g, v, v) * bilinear(g, w, w) - bilinear(g, v, w).powi(2);
        if !(q.abs() > floor) {
            return Err(GeometryError::DegeneratePlane { denominator: q });
        }
        Ok(self.lowered(v, w, w, v) / q)
    }
}

pub(crate) fn curvature_from_jet(jet: &MetricJet) -> Curvature {
    let n = jet.g.nrows();
    let ddg = jet.ddg.as_ref().expect("second derivatives requested");
    let low = first_kind(jet);
    let gamma = raise_first(&jet.ginv, &low);
    let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;

    // ∂_m g^{kl} = −g^{ka} ∂_m g_{ab} g^{bl}
    let dginv: Vec<Mat> = jet.dg.iter().map(|d| -(&jet.ginv * d * &jet.ginv)).collect();

    // dgamma[m][(k,i,j)] = ∂_m Γ^k_{ij}
    let mut dgamma = vec![vec![0.0; n * n * n]; n];
    for (m, dgm) in dgamma.iter_mut().enumerate() {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let dlow = 0.5
                        * (ddg[m * n + i][(j, l)] + ddg[m * n + j][(i, l)]
                            - ddg[m * n + l][(i, j)]);
                    let lo = low[idx3(l, i, j)];
                    for k in 0..n {
                        dgm[idx3(k, i, j)] += dginv[m][(k, l)] * lo + jet.ginv[(k, l)] * dlow;
                    }
                }
            }
        }
    }

    let mut riemann = vec![0.0; n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut r = dgamma[i][idx3(l, j, k)] - dgamma[j][idx3(l, i, k)];
                    for m in 0..n {
                        r += gamma[idx3(l, i, m)] * gamma[idx3(m, j, k)]
                            - gamma[idx3(l, j, m)] * gamma[idx3(m, i, k)];
                    }
                    riemann[((l * n + i) * n + j) * n + k] = r;
                }
            }
        }
    }

    let mut ricci = Mat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += riemann[((i * n + i) * n + j) * n + k];
            }
            ricci[(j, k)] = s;
        }
    }
    let scalar = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| jet.ginv[(j, k)] * ricci[(j, k)])
        .sum();

    Curvature {
        n,
        riemann,
        metric: jet.g.clone(),
        christoffel: Christoffel { n, data: gamma },
        ricci,
        scalar,
    }
}

pub fn curvature_tensors(m: &MetricField, s: &DerivativeScheme, p: &[f64]) -> Result<Curvature> {
    let jet = metric_jet(m, s, p, true)?;
    Ok(curvature_from_jet(&jet))
}

pub fn sectional_curvature(
    m: &MetricField,
    s: &DerivativeScheme,
    p: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    check_len(m.dim(), v)?;
    check_len(m.dim(), w)?;
    curvature_tensors(m, s, p)?.sectional(v, w, s.degeneracy_floor)
}

/// Extremes of the sectional curvature over `n_planes` random nondegenerate
/// planes at `p`. Degenerate draws are redrawn, at most `100 · n_planes`
/// attempts in total.
pub fn sectional_scan(
    m: &MetricField,
    s: &DerivativeScheme,
    p: &[f64],
    n_planes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_planes == 0 {
        return Err(GeometryError::InvalidParameter(
            "n_planes must be at least 1".to_string(),
        ));
    }
    let curv = curvature_tensors(m, s, p)?;
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut accepted = 0;
    for _ in 0..100 * n_planes {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        match curv.sectional(&v, &w, s.degeneracy_floor) {
            Ok(k) => {
                lo = lo.min(k);
                hi = hi.max(k);
                accepted += 1;
                if accepted == n_planes {
                    return Ok((lo, hi));
                }
            }
            Err(GeometryError::DegeneratePlane { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GeometryError::RetriesExhausted(
        "nondegenerate sectional planes".to_string(),
    ))
}

/// `J[(k, i)] = ∂_i V^k`, analytic when available.
pub fn field_jacobian(
    v: &VectorFieldSpec,
    domain: &DomainBox,
    s: &DerivativeScheme,
    p: &[f64],
) -> Result<Mat> {
    domain.check(p)?;
    if let Some(j) = v.analytic_jacobian(p) {
        return Ok(j);
    }
    let n = v.dim();
    let parts = first_partials(&|q| v.eval(q), p, domain, s.first_step, s.richardson)?;
    let mut j = Mat::zeros(n, n);
    for (i, col) in parts.iter().enumerate() {
        for k in 0..n {
            j[(k, i)] = col[k];
        }
    }
    Ok(j)
}

/// `N[(k, i)] = (∇_{∂_i} V)^k = ∂_i V^k + Γ^k_{ij} V^j`.
pub fn covariant_jacobian(
    m: &MetricField,
    s: &DerivativeScheme,
    v: &VectorFieldSpec,
    p: &[f64],
) -> Result<Mat> {
    check_len(m.dim(), &vec![0.0; v.dim()])?;
    let gamma = christoffel(m, s, p)?;
    let jac = field_jacobian(v, m.domain(), s, p)?;
    Ok(nabla_from(&gamma, &jac, &v.eval(p)))
}

pub(crate) fn nabla_from(gamma: &Christoffel, jac: &Mat, vals: &[f64]) -> Mat {
    let n = gamma.dim();
    let mut out = jac.clone();
    for k in 0..n {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += gamma.get(k, i, j) * vals[j];
            }
            out[(k, i)] += s;
        }
    }
    out
}

/// `(∇_x V)^k = x^i ∂_i V^k + Γ^k_{ij} x^i V^j`.
pub fn covariant_derivative(
    m: &MetricField,
    s: &DerivativeScheme,
    v: &VectorFieldSpec,
    p: &[f64],
    x: &[f64],
) -> Result<Vec<f64>> {
    check_len(m.dim(), x)?;
    Ok(mat_vec(&covariant_jacobian(m, s, v, p)?, x))
}

/// Value and coordinate partials of a scalar function at a point.
#[derive(Clone, Debug)]
pub struct ScalarJet {
    pub value: f64,
    pub partials: Vec<f64>,
    pub second: Mat,
}

pub fn scalar_partials(
    h: &ScalarField,
    domain: &DomainBox,
    s: &DerivativeScheme,
    p: &[f64],
) -> Result<ScalarJet> {
    domain.check(p)?;
    let n = p.len();
    let wrapped = |q: &[f64]| vec![h.eval(q)];
    let partials = match h.analytic_gradient(p) {
        Some(g) => g,
        None => first_partials(&wrapped, p, domain, s.first_step, s.richardson)?
            .into_iter()
            .map(|v| v[0])
            .collect(),
    };
    let second = match h.analytic_hessian(p) {
        Some(hh) => hh,
        None => {
            let d2 = second_partials(&wrapped, p, domain, s.second_step, s.richardson)?;
            Mat::from_fn(n, n, |k, l| d2[k * n + l][0])
        }
    };
    Ok(ScalarJet {
        value: h.eval(p),
        partials,
        second,
    })
}

/// Gradient, Hessian and Laplacian of a scalar function.
#[derive(Clone, Debug)]
pub struct ScalarCalculus {
    pub value: f64,
    /// Coordinate partials `∂_k h`.
    pub partials: Vec<f64>,
    /// `grad^k = g^{kl} ∂_l h`.
    pub gradient: Vec<f64>,
    /// `Hess_{ij} = ∂_i∂_j h − Γ^k_{ij} ∂_k h`.
    pub hessian: Mat,
    pub laplacian: f64,
    pub metric: Mat,
}

impl ScalarCalculus {
    /// `∇_x ∇h = g^{-1} Hess(x, ·)`.
    pub fn nabla_gradient(&self, x: &[f64]) -> Vec<f64> {
        let ginv = self
            .metric
            .clone()
            .try_inverse()
            .unwrap_or_else(|| Mat::zeros(self.metric.nrows(), self.metric.ncols()));
        mat_vec(&ginv, &mat_vec(&self.hessian, x))
    }

    pub fn hess(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.hessian, x, y)
    }

    /// `g(∇h, ∇h)`.
    pub fn gradient_norm_sq(&self) -> f64 {
        self.partials
            .iter()
            .zip(&self.gradient)
            .map(|(a, b)| a * b)
            .sum()
    }
}

pub fn scalar_calculus(
    m: &MetricField,
    s: &DerivativeScheme,
    h: &ScalarField,
    p: &[f64],
) -> Result<ScalarCalculus> {
    check_len(m.dim(), &vec![0.0; h.dim()])?;
    let jet = metric_jet(m, s, p, false)?;
    let gamma = christoffel_from_jet(&jet);
    let sj = scalar_partials(h, m.domain(), s, p)?;
    let n = m.dim();
    let gradient = mat_vec(&jet.ginv, &sj.partials);
    let mut hessian = sj.second.clone();
    for i in 0..n {
        for j in 0..n {
            let mut c = 0.0;
            for k in 0..n {
                c += gamma.get(k, i, j) * sj.partials[k];
            }
            hessian[(i, j)] -= c;
        }
    }
    let hessian = (&hessian + hessian.transpose()) * 0.5;
    let laplacian = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| jet.ginv[(i, j)] * hessian[(i, j)])
        .sum();
    Ok(ScalarCalculus {
        value: sj.value,
        partials: sj.partials,
        gradient,
        hessian,
        laplacian,
        metric: jet.g,
    })
}

/// `[V, W]^k = V^i ∂_i W^k − W^i ∂_i V^k`.
pub fn lie_bracket(
    v: &VectorFieldSpec,
    w: &VectorFieldSpec,
    domain: &DomainBox,
    s: &DerivativeScheme,
    p: &[f64],
) -> Result<Vec<f64>> {
    if v.dim() != w.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let jv = field_jacobian(v, domain, s, p)?;
    let jw = field_jacobian(w, domain, s, p)?;
    let (vv, wv) = (v.eval(p), w.eval(p));
    let a = mat_vec(&jw, &vv);
    let b = mat_vec(&jv, &wv);
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// `(negative, positive, zero)` eigenvalue counts of a symmetric matrix;
/// eigenvalues with `|λ| ≤ floor` count as zero.
pub fn signature(g: &Mat, floor: f64) -> (usize, usize, usize) {
    if g.nrows() == 0 {
        return (0, 0, 0);
    }
    let eig = SymmetricEigen::new(g.clone());
    let mut c = (0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= floor {
            c.2 += 1;
        } else if l < 0.0 {
            c.0 += 1;
        } else {
            c.1 += 1;
        }
    }
    c
}

/// An orthonormal frame `(e_a)` of `g` with `g(e_a, e_b) = signs[a] δ_ab`.
///
/// Riemannian metrics get Gram–Schmidt on the coordinate basis. For a
/// Lorentzian metric the unit timelike vector comes first (the most
/// timelike coordinate vector when one exists), followed by Gram–Schmidt
/// of the coordinate basis projected onto its orthogonal complement; other
/// signatures fall back to normalized eigenvectors. The construction is
/// deterministic and reproduces normalized coordinate vectors for diagonal
/// metrics.
pub fn orthonormal_frame(g: &Mat, floor: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = g.nrows();
    let (neg, _, zero) = signature(g, floor);
    if zero > 0 {
        return Err(GeometryError::DegenerateMetric {
            point: Vec::new(),
            det: g.determinant(),
        });
    }
    let basis = |k: usize| {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        e
    };
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut signs: Vec<f64> = Vec::with_capacity(n);
    match neg {
        0 | 1 => {
            if neg == 1 {
                let t = timelike_unit(g)?;
                frame.push(t);
                signs.push(-1.0);
            }
            for k in 0..n {
                if frame.len() == n {
                    break;
                }
                let mut c = basis(k);
                for (e, sg) in frame.iter().zip(&signs) {
                    let proj = bilinear(g, &c, e) * sg;
                    for (ci, ei) in c.iter_mut().zip(e) {
                        *ci -= proj * ei;
                    }
                }
                let nn = bilinear(g, &c, &c);
                if nn > 1e-10 {
                    let inv = 1.0 / nn.sqrt();
                    frame.push(c.into_iter().map(|x| x * inv).collect());
                    signs.push(1.0);
                }
            }
            if frame.len() != n {
                return Err(GeometryError::RetriesExhausted(
                    "orthonormal frame".to_string(),
                ));
            }
        }
        _ => {
            let eig = SymmetricEigen::new(g.clone());
            for a in 0..n {
                let l = eig.eigenvalues[a];
                let inv = 1.0 / l.abs().sqrt();
                frame.push(eig.eigenvectors.column(a).iter().map(|x| x * inv).collect());
                signs.push(if l < 0.0 { -1.0 } else { 1.0 });
            }
        }
    }
    Ok((frame, signs))
}

/// Unit timelike vector of a Lorentzian metric: the most timelike coordinate
/// vector when one is timelike, else the negative eigenvector.
pub(crate) fn timelike_unit(g: &Mat) -> Result<Vec<f64>> {
    let n = g.nrows();
    let mut best: Option<(usize, f64)> = None;
    for k in 0..n {
        let gkk = g[(k, k)];
        if gkk < 0.0 && best.map_or(true, |(_, b)| gkk < b) {
            best = Some((k, gkk));
        }
    }
    if let Some((k, gkk)) = best {
        let mut t = vec![0.0; n];
        t[k] = 1.0 / (-gkk).sqrt();
        return Ok(t);
    }
    let eig = SymmetricEigen::new(g.clone());
    let (a, l) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, l)| if l < acc.1 { (i, l) } else { acc });
    if l >= 0.0 {
        return Err(GeometryError::NotLorentzian { negative: 0 });
    }
    let inv = 1.0 / (-l).sqrt();
    Ok(eig.eigenvectors.column(a).iter().map(|x| x * inv).collect())
}

fn check_len(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}
