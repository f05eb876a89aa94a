use alloc::format;
use alloc::vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::CatalogSpace;
use crate::error::{GeometryError, Result};
use crate::manifold::{Mat, SignEpsilon, VectorFieldSpec};

/// Largest accepted `|α|`, `|β|`, `|γ|`.
pub const MAX_FIELD_PARAM: f64 = 10.0;

/// Killing fields on the model planes that are independent of `∂t`.
///
/// * `CoshPlane` on `H²_[ε](r)`:
///   `V = (−(ε/r) h'(t) tanh(rs) + γ) ∂t + h(t) ∂s` with
///   `h = α sin(rt + β)` for `ε = −1` and `h = α e^{rt} + β e^{−rt}` for `ε = +1`.
/// * `ExpPlane` on `Ĥ²_[ε](r)`:
///   `V = (εα/(2r) e^{−2rs} − rα t²/2 − rβ t + γ) ∂t + (αt + β) ∂s`.
/// * `FlatPlane` on `ℝ²_[ε]`: `V = γ ∂t + ∂s`; `α` and `β` are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FieldFamily {
    #[cfg_attr(feature = "serde", serde(rename = "Prop45_2", alias = "cosh_plane"))]
    CoshPlane,
    #[cfg_attr(feature = "serde", serde(rename = "Prop45_3", alias = "exp_plane"))]
    ExpPlane,
    #[cfg_attr(feature = "serde", serde(rename = "Prop45_4", alias = "flat_plane"))]
    FlatPlane,
}

impl FieldFamily {
    pub const ALL: [FieldFamily; 3] = [
        FieldFamily::CoshPlane,
        FieldFamily::ExpPlane,
        FieldFamily::FlatPlane,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FieldFamily::CoshPlane => "cosh_plane",
            FieldFamily::ExpPlane => "exp_plane",
            FieldFamily::FlatPlane => "flat_plane",
        }
    }

    /// Whether `space` is the model plane carrying this family.
    fn matches(self, space: &CatalogSpace) -> bool {
        matches!(
            (self, space),
            (FieldFamily::CoshPlane, CatalogSpace::H2eps { .. })
                | (FieldFamily::ExpPlane, CatalogSpace::H2hatEps { .. })
                | (FieldFamily::FlatPlane, CatalogSpace::R2eps { .. })
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StaticFieldFamily {
    pub family: FieldFamily,
    #[cfg_attr(feature = "serde", serde(default))]
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gamma: f64,
}

impl StaticFieldFamily {
    pub fn new(family: FieldFamily, alpha: f64, beta: f64, gamma: f64) -> Self {
        StaticFieldFamily {
            family,
            alpha,
            beta,
            gamma,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v.abs() <= MAX_FIELD_PARAM) {
                return Err(GeometryError::InvalidParameter(format!(
                    "|{name}| must be at most {MAX_FIELD_PARAM}, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The field of `family` on `space` in coordinates `(s, t)`, or on
/// `N × (s, t)` when `space` is a warped product over the matching plane
/// (the field is then tangent to the fibre). The Jacobian is analytic.
pub fn catalog_field(space: &CatalogSpace, family: &StaticFieldFamily) -> Result<VectorFieldSpec> {
    family.validate()?;
    space.validate()?;
    let mismatch = || GeometryError::FamilyMismatch {
        family: family.family.label().into(),
        space: space.name(),
    };
    match space {
        CatalogSpace::WarpedProduct { base, fiber, .. } => {
            if !family.family.matches(fiber) {
                return Err(mismatch());
            }
            Ok(plane_field(fiber, family)?.pad_leading(base.dim()))
        }
        s if family.family.matches(s) => plane_field(s, family),
        _ => Err(mismatch()),
    }
}

fn plane_field(space: &CatalogSpace, fam: &StaticFieldFamily) -> Result<VectorFieldSpec> {
    let StaticFieldFamily {
        alpha, beta, gamma, ..
    } = *fam;
    match *space {
        CatalogSpace::H2eps { eps, r } => {
            let e = eps.value();
            // (h, h', h'')
            let h = move |t: f64| match eps {
                SignEpsilon::Minus => {
                    let y = r * t + beta;
                    let v = alpha * y.sin();
                    (v, alpha * r * y.cos(), -r * r * v)
                }
                SignEpsilon::Plus => {
                    let (a, b) = (alpha * (r * t).exp(), beta * (-r * t).exp());
                    (a + b, r * (a - b), r * r * (a + b))
                }
            };
            Ok(VectorFieldSpec::new(2, move |p| {
                let (hv, ht, _) = h(p[1]);
                vec![hv, -(e / r) * ht * (r * p[0]).tanh() + gamma]
            })
            .with_jacobian(move |p| {
                let (_, ht, htt) = h(p[1]);
                let sech = 1.0 / (r * p[0]).cosh();
                Mat::from_row_slice(
                    2,
                    2,
                    &[
                        0.0,
                        ht,
                        -e * ht * sech * sech,
                        -(e / r) * htt * (r * p[0]).tanh(),
                    ],
                )
            }))
        }
        CatalogSpace::H2hatEps { eps, r } => {
            let e = eps.value();
            Ok(VectorFieldSpec::new(2, move |p| {
                let (s, t) = (p[0], p[1]);
                vec![
                    alpha * t + beta,
                    e * alpha / (2.0 * r) * (-2.0 * r * s).exp() - r * alpha * t * t / 2.0
                        - r * beta * t
                        + gamma,
                ]
            })
            .with_jacobian(move |p| {
                let (s, t) = (p[0], p[1]);
                Mat::from_row_slice(
                    2,
                    2,
                    &[
                        0.0,
                        alpha,
                        -e * alpha * (-2.0 * r * s).exp(),
                        -r * alpha * t - r * beta,
                    ],
                )
            }))
        }
        CatalogSpace::R2eps { .. } => Ok(VectorFieldSpec::constant(vec![1.0, gamma])),
        _ => unreachable!("family matched a model plane"),
    }
}
