//! Explicit spaces and static fields: the model planes `ℝ²_[ε]`,
//! `H²_[ε](r)`, `Ĥ²_[ε](r)` and products built from them, their static field
//! families, the ODE pair for the fibre warp, the Tod surface family and the
//! Einstein residual chain.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{GeometryError, Result};
use crate::manifold::{DomainBox, Interval, Mat, MetricField, ScalarField, SignEpsilon};
use crate::product::{build_static, build_warped, StaticProductSpec, WarpedProductSpec};

mod einstein;
mod fields;
mod ode;
mod tod;

pub use einstein::{
    einstein_chain_residuals, einstein_defect, einstein_defect_fixed, EinsteinChainConfig,
    EinsteinChainSpec, EinsteinFit, EINSTEIN_CHAIN_IDENTITIES,
};
pub use fields::{catalog_field, FieldFamily, StaticFieldFamily};
pub use ode::{ode_residuals, ode_solution_catalog, OdeResiduals, OdeSolution};
pub use tod::{tod_curvature, tod_profile, tod_surface_metric};

/// Sampling interval used for the `s` and `t` axes of catalog spaces.
pub const CATALOG_LINE: Interval = Interval::new(-3.0, 3.0);

/// Largest accepted `r`.
pub const MAX_RATE: f64 = 10.0;

/// Closed-form scalar functions with analytic gradient and Hessian.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum ScalarSpec {
    Constant {
        value: f64,
    },
    /// `amp · e^{coef · x_axis}`
    Exp {
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        amp: f64,
        coef: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        axis: usize,
    },
    /// `amp · cosh(coef · x_axis + shift)`
    Cosh {
        #[cfg_attr(feature = "serde", serde(default = "one"))]
        amp: f64,
        coef: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        shift: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        axis: usize,
    },
    /// `alpha · e^{rate · x_axis} + beta · e^{−rate · x_axis}`
    ExpPair {
        alpha: f64,
        beta: f64,
        rate: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        axis: usize,
    },
    /// `c0 + lin · x_axis + quad · x_axis²`
    Quadratic {
        c0: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        lin: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        quad: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        axis: usize,
    },
    /// `∏_i cosh(coef · x_i)`
    CoshProduct { coef: f64 },
    /// `c0 + amp · sin(k · x + phase)`
    Wave {
        c0: f64,
        amp: f64,
        k: Vec<f64>,
        #[cfg_attr(feature = "serde", serde(default))]
        phase: f64,
    },
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

/// Value, first and second derivative of a one-variable profile.
fn profile(spec: &ScalarSpec, x: f64) -> (f64, f64, f64) {
    match *spec {
        ScalarSpec::Exp { amp, coef, .. } => {
            let v = amp * (coef * x).exp();
            (v, coef * v, coef * coef * v)
        }
        ScalarSpec::Cosh {
            amp, coef, shift, ..
        } => {
            let y = coef * x + shift;
            let (c, s) = (y.cosh(), y.sinh());
            (amp * c, amp * coef * s, amp * coef * coef * c)
        }
        ScalarSpec::ExpPair {
            alpha, beta, rate, ..
        } => {
            let (a, b) = (alpha * (rate * x).exp(), beta * (-rate * x).exp());
            (a + b, rate * (a - b), rate * rate * (a + b))
        }
        ScalarSpec::Quadratic { c0, lin, quad, .. } => {
            (c0 + lin * x + quad * x * x, lin + 2.0 * quad * x, 2.0 * quad)
        }
        _ => (0.0, 0.0, 0.0),
    }
}

impl ScalarSpec {
    pub fn constant(value: f64) -> Self {
        ScalarSpec::Constant { value }
    }

    pub fn cosh(coef: f64) -> Self {
        ScalarSpec::Cosh {
            amp: 1.0,
            coef,
            shift: 0.0,
            axis: 0,
        }
    }

    pub fn exp(coef: f64) -> Self {
        ScalarSpec::Exp {
            amp: 1.0,
            coef,
            axis: 0,
        }
    }

    fn axis(&self) -> Option<usize> {
        match *self {
            ScalarSpec::Exp { axis, .. }
            | ScalarSpec::Cosh { axis, .. }
            | ScalarSpec::ExpPair { axis, .. }
            | ScalarSpec::Quadratic { axis, .. } => Some(axis),
            _ => None,
        }
    }

    /// The function on a chart of dimension `dim`.
    pub fn to_field(&self, dim: usize) -> Result<ScalarField> {
        if let Some(axis) = self.axis() {
            if axis >= dim {
                return Err(GeometryError::InvalidParameter(format!(
                    "scalar axis {axis} out of range for dimension {dim}"
                )));
            }
            let spec = self.clone();
            let (s1, s2) = (spec.clone(), spec.clone());
            return Ok(ScalarField::new(dim, move |p| profile(&spec, p[axis]).0)
                .with_gradient(move |p| {
                    let mut g = vec![0.0; dim];
                    g[axis] = profile(&s1, p[axis]).1;
                    g
                })
                .with_hessian(move |p| {
                    let mut h = Mat::zeros(dim, dim);
                    h[(axis, axis)] = profile(&s2, p[axis]).2;
                    h
                }));
        }
        match self {
            ScalarSpec::Constant { value } => Ok(ScalarField::constant(dim, *value)),
            ScalarSpec::CoshProduct { coef } => {
                let a = *coef;
                Ok(ScalarField::new(dim, move |p| p.iter().map(|x| (a * x).cosh()).product())
                    .with_gradient(move |p| {
                        (0..dim)
                            .map(|i| {
                                p.iter()
                                    .enumerate()
                                    .map(|(j, x)| {
                                        if i == j {
                                            a * (a * x).sinh()
                                        } else {
                                            (a * x).cosh()
                                        }
                                    })
                                    .product()
                            })
                            .collect()
                    })
                    .with_hessian(move |p| {
                        Mat::from_fn(dim, dim, |i, j| {
                            p.iter()
                                .enumerate()
                                .map(|(m, x)| {
                                    let y = a * x;
                                    match (m == i, m == j) {
                                        (true, true) => a * a * y.cosh(),
                                        (true, false) | (false, true) => a * y.sinh(),
                                        (false, false) => y.cosh(),
                                    }
                                })
                                .product()
                        })
                    }))
            }
            ScalarSpec::Wave { c0, amp, k, phase } => {
                if k.len() != dim {
                    return Err(GeometryError::DimensionMismatch {
                        expected: dim,
                        found: k.len(),
                    });
                }
                let (c0, amp, phase) = (*c0, *amp, *phase);
                let (k0, k1, k2) = (k.clone(), k.clone(), k.clone());
                let arg = move |k: &[f64], p: &[f64]| {
                    k.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + phase
                };
                Ok(ScalarField::new(dim, move |p| c0 + amp * arg(&k0, p).sin())
                    .with_gradient(move |p| {
                        let c = amp * arg(&k1, p).cos();
                        k1.iter().map(|ki| ki * c).collect()
                    })
                    .with_hessian(move |p| {
                        let s = -amp * arg(&k2, p).sin();
                        Mat::from_fn(dim, dim, |i, j| k2[i] * k2[j] * s)
                    }))
            }
            _ => unreachable!("axis-based profiles handled above"),
        }
    }
}

/// A named space from the catalog. Two-dimensional model planes use
/// coordinates `(s, t)` with metric `ds² + ε c(s)² dt²`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum CatalogSpace {
    /// Zero-dimensional factor.
    Point,
    /// Flat `ℝ^dim` on the cube `[−3, 3]^dim`.
    Euclidean { dim: usize },
    /// Round sphere `ρ²(dθ² + sin²θ dφ²)`, `θ ∈ [0.3, π − 0.3]`.
    Sphere { radius: f64 },
    /// `ds² + ε dt²`.
    R2eps { eps: SignEpsilon },
    /// `ds² + ε cosh²(rs) dt²`, curvature `−r²`.
    H2eps { eps: SignEpsilon, r: f64 },
    /// `ds² + ε e^{2rs} dt²`, curvature `−r²`.
    H2hatEps { eps: SignEpsilon, r: f64 },
    /// `base ×_{εf} ℝ` with the warp given on the base chart.
    Static {
        base: Box<CatalogSpace>,
        warp: ScalarSpec,
        eps: SignEpsilon,
    },
    /// `g_N + λ² ds² + ε f² dt²`.
    DoublyWarped {
        base: Box<CatalogSpace>,
        lambda: ScalarSpec,
        f: ScalarSpec,
        eps: SignEpsilon,
    },
    /// `g_N + λ² g_F`.
    WarpedProduct {
        base: Box<CatalogSpace>,
        lambda: ScalarSpec,
        fiber: Box<CatalogSpace>,
    },
    /// `(1/h) du² + h dv²`, `h(u) = k1 + k2/u + k3 u²`.
    TodSurface {
        k1: f64,
        k2: f64,
        k3: f64,
        u_domain: Interval,
        #[cfg_attr(feature = "serde", serde(default = "catalog_line"))]
        v_domain: Interval,
    },
    /// Direct product `g_1 ⊕ g_2`.
    DirectProductSurfaces {
        first: Box<CatalogSpace>,
        second: Box<CatalogSpace>,
    },
}

#[cfg(feature = "serde")]
fn catalog_line() -> Interval {
    CATALOG_LINE
}

fn check_rate(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= MAX_RATE) {
        return Err(GeometryError::InvalidParameter(format!(
            "r must lie in (0, {MAX_RATE}], got {r}"
        )));
    }
    Ok(())
}

impl CatalogSpace {
    pub fn name(&self) -> String {
        match self {
            CatalogSpace::Point => "point".into(),
            CatalogSpace::Euclidean { dim } => format!("euclidean({dim})"),
            CatalogSpace::Sphere { radius } => format!("sphere({radius})"),
            CatalogSpace::R2eps { eps } => format!("r2eps[{eps}]"),
            CatalogSpace::H2eps { eps, r } => format!("h2eps[{eps}]({r})"),
            CatalogSpace::H2hatEps { eps, r } => format!("h2hat_eps[{eps}]({r})"),
            CatalogSpace::Static { base, eps, .. } => format!("static[{eps}]({})", base.name()),
            CatalogSpace::DoublyWarped { base, eps, .. } => {
                format!("doubly_warped[{eps}]({})", base.name())
            }
            CatalogSpace::WarpedProduct { base, fiber, .. } => {
                format!("warped_product({}, {})", base.name(), fiber.name())
            }
            CatalogSpace::TodSurface { k1, k2, k3, .. } => format!("tod_surface({k1}, {k2}, {k3})"),
            CatalogSpace::DirectProductSurfaces { first, second } => {
                format!("direct_product({}, {})", first.name(), second.name())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CatalogSpace::Point => 0,
            CatalogSpace::Euclidean { dim } => *dim,
            CatalogSpace::Sphere { .. }
            | CatalogSpace::R2eps { .. }
            | CatalogSpace::H2eps { .. }
            | CatalogSpace::H2hatEps { .. }
            | CatalogSpace::TodSurface { .. } => 2,
            CatalogSpace::Static { base, .. } => base.dim() + 1,
            CatalogSpace::DoublyWarped { base, .. } => base.dim() + 2,
            CatalogSpace::WarpedProduct { base, fiber, .. } => base.dim() + fiber.dim(),
            CatalogSpace::DirectProductSurfaces { first, second } => first.dim() + second.dim(),
        }
    }

    /// `ε` of the space read as a static product, when it is one.
    pub fn eps(&self) -> Option<SignEpsilon> {
        match self {
            CatalogSpace::R2eps { eps }
            | CatalogSpace::H2eps { eps, .. }
            | CatalogSpace::H2hatEps { eps, .. }
            | CatalogSpace::Static { eps, .. }
            | CatalogSpace::DoublyWarped { eps, .. } => Some(*eps),
            CatalogSpace::WarpedProduct { fiber, .. } => fiber.eps(),
            _ => None,
        }
    }

    /// The warp `c(s)` of a model plane, as a function of `s`.
    pub fn plane_warp(&self) -> Option<ScalarSpec> {
        match *self {
            CatalogSpace::R2eps { .. } => Some(ScalarSpec::constant(1.0)),
            CatalogSpace::H2eps { r, .. } => Some(ScalarSpec::cosh(r)),
            CatalogSpace::H2hatEps { r, .. } => Some(ScalarSpec::exp(r)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CatalogSpace::Point | CatalogSpace::R2eps { .. } => Ok(()),
            CatalogSpace::Euclidean { dim } => {
                if *dim == 0 {
                    Err(GeometryError::InvalidParameter(
                        "euclidean dimension must be positive".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            CatalogSpace::Sphere { radius } => {
                if *radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidParameter(format!(
                        "sphere radius must be positive, got {radius}"
                    )))
                }
            }
            CatalogSpace::H2eps { r, .. } | CatalogSpace::H2hatEps { r, .. } => check_rate(*r),
            CatalogSpace::Static { base, .. } => base.validate(),
            CatalogSpace::DoublyWarped { base, .. } => base.validate(),
            CatalogSpace::WarpedProduct { base, fiber, .. } => {
                base.validate()?;
                fiber.validate()
            }
            CatalogSpace::TodSurface { .. } => Ok(()),
            CatalogSpace::DirectProductSurfaces { first, second } => {
                first.validate()?;
                second.validate()
            }
        }
    }

    /// The space as a static product `L ×_{εf} ℝ`, `t` last, when it has
    /// that shape. Warped products over a model plane become
    /// `(N ×_λ ℝ_s) ×_{ε λc} ℝ_t`.
    pub fn static_product(&self) -> Result<StaticProductSpec> {
        self.validate()?;
        let line = || MetricField::euclidean(DomainBox(vec![CATALOG_LINE]));
        let spec = match self {
            CatalogSpace::R2eps { eps }
            | CatalogSpace::H2eps { eps, .. }
            | CatalogSpace::H2hatEps { eps, .. } => {
                let c = self.plane_warp().expect("model plane").to_field(1)?;
                StaticProductSpec::new(line(), c, *eps)
            }
            CatalogSpace::Static { base, warp, eps } => {
                let b = base.metric()?;
                let w = warp.to_field(b.dim())?;
                StaticProductSpec::new(b, w, *eps)
            }
            CatalogSpace::DoublyWarped {
                base,
                lambda,
                f,
                eps,
            } => {
                let b = base.metric()?;
                let n = b.dim();
                let mut d = crate::product::DoublyWarpedSpec::new(
                    b,
                    lambda.to_field(n)?,
                    f.to_field(n)?,
                    *eps,
                );
                d.s_domain = CATALOG_LINE;
                d.as_static()?
            }
            CatalogSpace::WarpedProduct {
                base,
                lambda,
                fiber,
            } => {
                let c = fiber.plane_warp().ok_or_else(|| {
                    GeometryError::InvalidParameter(format!(
                        "fiber {} is not a model plane",
                        fiber.name()
                    ))
                })?;
                let eps = fiber.eps().expect("model plane has eps");
                let b = base.metric()?;
                let n = b.dim();
                let lam = lambda.to_field(n)?;
                let l = build_warped(&WarpedProductSpec {
                    base: b,
                    warp: lam.clone(),
                    fiber: line(),
                })?;
                let f = ScalarField::tensor_product(&lam, &c.to_field(1)?);
                StaticProductSpec::new(l, f, eps)
            }
            other => {
                return Err(GeometryError::InvalidParameter(format!(
                    "{} is not a static product",
                    other.name()
                )))
            }
        };
        Ok(spec.with_t_domain(CATALOG_LINE))
    }

    /// The metric of the space on its declared domain.
    pub fn metric(&self) -> Result<MetricField> {
        self.validate()?;
        match self {
            CatalogSpace::Point => Ok(MetricField::euclidean(DomainBox(Vec::new()))),
            CatalogSpace::Euclidean { dim } => Ok(MetricField::euclidean(DomainBox::cube(
                *dim,
                CATALOG_LINE.lo,
                CATALOG_LINE.hi,
            ))),
            CatalogSpace::Sphere { radius } => Ok(sphere_metric(*radius)),
            CatalogSpace::R2eps { .. }
            | CatalogSpace::H2eps { .. }
            | CatalogSpace::H2hatEps { .. }
            | CatalogSpace::Static { .. }
            | CatalogSpace::DoublyWarped { .. } => build_static(&self.static_product()?),
            CatalogSpace::WarpedProduct {
                base,
                lambda,
                fiber,
            } => {
                let b = base.metric()?;
                let n = b.dim();
                build_warped(&WarpedProductSpec {
                    base: b,
                    warp: lambda.to_field(n)?,
                    fiber: fiber.metric()?,
                })
            }
            CatalogSpace::TodSurface {
                k1,
                k2,
                k3,
                u_domain,
                v_domain,
            } => tod_surface_metric(*k1, *k2, *k3, *u_domain, *v_domain),
            CatalogSpace::DirectProductSurfaces { first, second } => {
                let a = first.metric()?;
                build_warped(&WarpedProductSpec {
                    warp: ScalarField::constant(a.dim(), 1.0),
                    base: a,
                    fiber: second.metric()?,
                })
            }
        }
    }
}

fn sphere_metric(rho: f64) -> MetricField {
    let r2 = rho * rho;
    let dom = DomainBox(vec![
        Interval::new(0.3, core::f64::consts::PI - 0.3),
        CATALOG_LINE,
    ]);
    MetricField::new(dom, move |p| {
        let s = p[0].sin();
        Mat::from_row_slice(2, 2, &[r2, 0.0, 0.0, r2 * s * s])
    })
    .with_first_derivatives(move |p| {
        vec![
            Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, r2 * (2.0 * p[0]).sin()]),
            Mat::zeros(2, 2),
        ]
    })
    .with_second_derivatives(move |p| {
        vec![
            Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0 * r2 * (2.0 * p[0]).cos()]),
            Mat::zeros(2, 2),
            Mat::zeros(2, 2),
            Mat::zeros(2, 2),
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{curvature_tensors, DerivativeScheme};

    #[test]
    fn model_planes_have_curvature_minus_r_squared() {
        let s = DerivativeScheme::default();
        for eps in [SignEpsilon::Plus, SignEpsilon::Minus] {
            for r in [0.5, 1.0, 2.0] {
                for space in [CatalogSpace::H2eps { eps, r }, CatalogSpace::H2hatEps { eps, r }] {
                    let m = space.metric().unwrap();
                    let c = curvature_tensors(&m, &s, &[0.3, -0.2]).unwrap();
                    // in dimension 2 the scalar curvature is 2K
                    assert!((c.scalar / 2.0 + r * r).abs() < 1e-8, "{}", space.name());
                }
            }
        }
    }

    #[test]
    fn sphere_curvature() {
        let m = CatalogSpace::Sphere { radius: 2.0 }.metric().unwrap();
        let c = curvature_tensors(&m, &DerivativeScheme::default(), &[1.0, 0.0]).unwrap();
        assert!((c.scalar / 2.0 - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rates_are_validated() {
        assert!(CatalogSpace::H2eps { eps: SignEpsilon::Plus, r: 0.0 }.metric().is_err());
        assert!(CatalogSpace::H2eps { eps: SignEpsilon::Plus, r: 11.0 }.metric().is_err());
    }

    #[test]
    fn warped_product_agrees_with_static_reading() {
        let space = CatalogSpace::WarpedProduct {
            base: Box::new(CatalogSpace::Euclidean { dim: 1 }),
            lambda: ScalarSpec::Cosh { amp: 1.0, coef: 0.5, shift: 0.0, axis: 0 },
            fiber: Box::new(CatalogSpace::H2eps { eps: SignEpsilon::Minus, r: 1.0 }),
        };
        let a = space.metric().unwrap();
        let b = build_static(&space.static_product().unwrap()).unwrap();
        let p = [0.4, -1.1, 2.0];
        assert!((a.eval(&p).unwrap() - b.eval(&p).unwrap()).abs().max() < 1e-14);
    }

    #[test]
    fn cosh_product_derivatives() {
        let f = ScalarSpec::CoshProduct { coef: 1.0 }.to_field(2).unwrap();
        let p = [0.3, -0.4];
        let h = f.analytic_hessian(&p).unwrap();
        assert!((h[(0, 1)] - 0.3f64.sinh() * (-0.4f64).sinh()).abs() < 1e-15);
        assert!((h[(0, 0)] - f.eval(&p)).abs() < 1e-15);
    }
}
