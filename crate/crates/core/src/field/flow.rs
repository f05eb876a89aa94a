use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{GeometryError, Result};
use crate::manifold::{bilinear, max_abs_diff, Mat, MetricField, Point, VectorFieldSpec};
use crate::report::DefectReport;

/// Fixed-step RK4 settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub step: f64,
    /// Largest `|t|` accepted by [`integrate_flow`].
    pub max_time: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step: 1e-3,
            max_time: 100.0,
        }
    }
}

const MIN_STEP: f64 = 1e-12;

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, w)| u + a * w).collect()
}

/// `Φ_t(p)` for the flow of `V`, by fixed-step RK4 with
/// `ceil(|t| / step)` equal steps.
pub fn integrate_flow(
    m: &MetricField,
    v: &VectorFieldSpec,
    p: &[f64],
    t: f64,
    cfg: &FlowConfig,
) -> Result<Point> {
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(GeometryError::InvalidParameter(format!(
            "flow step must be positive, got {}",
            cfg.step
        )));
    }
    if cfg.step < MIN_STEP {
        return Err(GeometryError::StepUnderflow { step: cfg.step });
    }
    if !t.is_finite() || t.abs() > cfg.max_time {
        return Err(GeometryError::InvalidParameter(format!(
            "flow time {t} exceeds max_time {}",
            cfg.max_time
        )));
    }
    if v.dim() != m.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: m.dim(),
            found: v.dim(),
        });
    }
    m.domain().check(p)?;
    let steps = (t.abs() / cfg.step).ceil() as usize;
    if steps == 0 {
        return Ok(Point(p.to_vec()));
    }
    let h = t / steps as f64;
    let mut x = p.to_vec();
    for i in 0..steps {
        let k1 = v.eval(&x);
        let k2 = v.eval(&axpy(&x, 0.5 * h, &k1));
        let k3 = v.eval(&axpy(&x, 0.5 * h, &k2));
        let k4 = v.eval(&axpy(&x, h, &k3));
        for j in 0..x.len() {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !m.domain().contains(&x) {
            return Err(GeometryError::DomainExit {
                time: (i + 1) as f64 * h,
            });
        }
    }
    Ok(Point(x))
}

/// Max coordinate difference between the flow computed with `cfg.step` and
/// with half of it.
pub fn flow_certificate(
    m: &MetricField,
    v: &VectorFieldSpec,
    p: &[f64],
    t: f64,
    cfg: &FlowConfig,
) -> Result<f64> {
    let full = integrate_flow(m, v, p, t, cfg)?;
    let half = integrate_flow(
        m,
        v,
        p,
        t,
        &FlowConfig {
            step: 0.5 * cfg.step,
            ..*cfg
        },
    )?;
    Ok(max_abs_diff(&full, &half))
}

/// A parametrized piece of a hypersurface orthogonal to the field, supplied
/// in closed form (or as a numerically integrated curve).
#[derive(Clone)]
pub struct Leaf {
    pub dim: usize,
    pub chart: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// Parameter values at which the decomposition is checked.
    pub params: Vec<Vec<f64>>,
}

impl fmt::Debug for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Leaf")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

impl Leaf {
    pub fn new<F>(dim: usize, chart: F, params: Vec<Vec<f64>>) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Leaf {
            dim,
            chart: Arc::new(chart),
            params,
        }
    }
}

/// Settings for [`verify_flow_decomposition`].
#[derive(Clone, Debug)]
pub struct FlowDecompositionOptions {
    pub flow: FlowConfig,
    /// Flow times `τ` at which `σ(y, τ) = Φ_τ(φ(y))` is examined.
    pub times: Vec<f64>,
    /// Step for differencing `σ` along the leaf parameters.
    pub leaf_step: f64,
    pub tolerance: f64,
    /// Bound on `|g(V, ∂φ/∂y_i)|` accepted for the supplied leaf.
    pub orthogonality_tol: f64,
}

impl Default for FlowDecompositionOptions {
    fn default() -> Self {
        FlowDecompositionOptions {
            flow: FlowConfig::default(),
            times: vec![-0.5, -0.25, 0.25, 0.5],
            leaf_step: 1e-4,
            tolerance: 1e-4,
            orthogonality_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowDecomposition {
    /// `sup |σ*g − (g|_leaf ⊕ g(V, V) dτ²)|`, componentwise.
    pub pullback: DefectReport,
    /// `sup | |V|_{σ(y, τ)} − |V|_{φ(y)} |`.
    pub warp_invariance: DefectReport,
    /// Largest change in `σ` when the RK4 step is halved.
    pub halving_delta: f64,
}

fn leaf_tangents(leaf: &Leaf, y: &[f64], h: f64) -> Vec<Vec<f64>> {
    (0..leaf.dim)
        .map(|i| {
            let at = |d: f64| {
                let mut z = y.to_vec();
                z[i] += d;
                (leaf.chart)(&z)
            };
            // Richardson-extrapolated central difference
            let c = |d: f64| -> Vec<f64> {
                at(d).iter()
                    .zip(&at(-d))
                    .map(|(a, b)| (a - b) / (2.0 * d))
                    .collect()
            };
            let (full, half) = (c(h), c(0.5 * h));
            full.iter()
                .zip(&half)
                .map(|(a, b)| (4.0 * b - a) / 3.0)
                .collect()
        })
        .collect()
}

fn sigma_jacobian(
    m: &MetricField,
    v: &VectorFieldSpec,
    leaf: &Leaf,
    y: &[f64],
    tau: f64,
    h: f64,
    cfg: &FlowConfig,
) -> Result<(Point, Vec<Vec<f64>>)> {
    let flow_from = |z: &[f64]| integrate_flow(m, v, &(leaf.chart)(z), tau, cfg);
    let centre = flow_from(y)?;
    let mut cols = Vec::with_capacity(leaf.dim + 1);
    for i in 0..leaf.dim {
        let at = |d: f64| {
            let mut z = y.to_vec();
            z[i] += d;
            flow_from(&z)
        };
        let c = |d: f64| -> Result<Vec<f64>> {
            let (a, b) = (at(d)?, at(-d)?);
            Ok(a.iter().zip(b.iter()).map(|(p, q)| (p - q) / (2.0 * d)).collect())
        };
        let (full, half) = (c(h)?, c(0.5 * h)?);
        cols.push(
            full.iter()
                .zip(&half)
                .map(|(a, b)| (4.0 * b - a) / 3.0)
                .collect(),
        );
    }
    cols.push(v.eval(&centre));
    Ok((centre, cols))
}

fn gram(g: &Mat, cols: &[Vec<f64>]) -> Mat {
    let k = cols.len();
    Mat::from_fn(k, k, |a, b| bilinear(g, &cols[a], &cols[b]))
}

/// Checks that the flow of `V` started on an orthogonal leaf splits the
/// metric: with `σ(y, τ) = Φ_τ(φ(y))`, the pullback `σ*g` must equal the
/// leaf metric plus `g(V, V) dτ²`, and `|V|` must be constant along flow
/// lines.
pub fn verify_flow_decomposition(
    m: &MetricField,
    v: &VectorFieldSpec,
    leaf: &Leaf,
    opts: &FlowDecompositionOptions,
) -> Result<FlowDecomposition> {
    let h = opts.leaf_step;
    let mut pull = Vec::new();
    let mut warp = Vec::new();
    let mut halving = 0.0_f64;
    let half_cfg = FlowConfig {
        step: 0.5 * opts.flow.step,
        ..opts.flow
    };
    for y in &leaf.params {
        if y.len() != leaf.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: leaf.dim,
                found: y.len(),
            });
        }
        let x0 = (leaf.chart)(y);
        let g0 = m.eval(&x0)?;
        let v0 = v.eval(&x0);
        let tangents = leaf_tangents(leaf, y, h);
        for tng in &tangents {
            let d = bilinear(&g0, &v0, tng).abs();
            if d > opts.orthogonality_tol {
                return Err(GeometryError::NonOrthogonalLeaf { defect: d });
            }
        }
        let leaf_metric = gram(&g0, &tangents);
        let vv0 = bilinear(&g0, &v0, &v0);
        let k = leaf.dim;
        let mut want = Mat::zeros(k + 1, k + 1);
        want.view_mut((0, 0), (k, k)).copy_from(&leaf_metric);
        want[(k, k)] = vv0;

        for &tau in &opts.times {
            let (at, cols) = sigma_jacobian(m, v, leaf, y, tau, h, &opts.flow)?;
            let g = m.eval(&at)?;
            let got = gram(&g, &cols);
            let defect = (&got - &want).abs().max();
            let mut label = y.clone();
            label.push(tau);
            pull.push((Point(label.clone()), defect));

            let vt = v.eval(&at);
            let n_now = bilinear(&g, &vt, &vt).abs().sqrt();
            warp.push((Point(label), (n_now - vv0.abs().sqrt()).abs()));

            let half = integrate_flow(m, v, &x0, tau, &half_cfg)?;
            halving = halving.max(max_abs_diff(&at, &half));
        }
    }
    Ok(FlowDecomposition {
        pullback: DefectReport::from_samples("flow_pullback", pull, opts.tolerance),
        warp_invariance: DefectReport::from_samples("flow_warp_invariance", warp, opts.tolerance),
        halving_delta: halving,
    })
}
