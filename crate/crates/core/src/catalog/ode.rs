use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ScalarSpec;
use crate::error::{GeometryError, Result};
use crate::manifold::{scalar_partials, DerivativeScheme, DomainBox, ScalarField, SignEpsilon};

/// Sup residuals of `c'' c − c'² = k` and `h'' = εk h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeResiduals {
    pub c_residual: f64,
    pub h_residual: f64,
}

/// `(value, first, second)` of a one-variable field, analytic when the
/// field carries hooks.
pub(crate) fn jet1(f: &ScalarField, x: f64, scheme: &DerivativeScheme) -> Result<(f64, f64, f64)> {
    let p = [x];
    let v = f.eval(&p);
    if let (Some(g), Some(h)) = (f.analytic_gradient(&p), f.analytic_hessian(&p)) {
        return Ok((v, g[0], h[(0, 0)]));
    }
    let j = scalar_partials(f, &DomainBox::unbounded(1), scheme, &p)?;
    Ok((v, j.partials[0], j.second[(0, 0)]))
}

/// Evaluates both residuals; `c` is sampled at `s_samples` and `h` at
/// `t_samples`. Both fields are one-dimensional.
pub fn ode_residuals(
    c: &ScalarField,
    h: &ScalarField,
    k: f64,
    eps: SignEpsilon,
    s_samples: &[f64],
    t_samples: &[f64],
    scheme: &DerivativeScheme,
) -> Result<OdeResiduals> {
    for f in [c, h] {
        if f.dim() != 1 {
            return Err(GeometryError::DimensionMismatch {
                expected: 1,
                found: f.dim(),
            });
        }
    }
    let mut c_residual = 0.0f64;
    for &s in s_samples {
        let (v, d, dd) = jet1(c, s, scheme)?;
        if !(v > 0.0) {
            return Err(GeometryError::NonPositiveWarp { value: v });
        }
        c_residual = c_residual.max((dd * v - d * d - k).abs());
    }
    let mut h_residual = 0.0f64;
    for &t in t_samples {
        let (v, _, dd) = jet1(h, t, scheme)?;
        h_residual = h_residual.max((dd - eps.value() * k * v).abs());
    }
    Ok(OdeResiduals {
        c_residual,
        h_residual,
    })
}

/// A closed-form solution pair of the warp ODE.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub label: String,
    pub k: f64,
    pub eps: SignEpsilon,
    pub c: ScalarSpec,
    pub h: ScalarSpec,
}

impl OdeSolution {
    pub fn c_field(&self) -> ScalarField {
        self.c.to_field(1).expect("one-variable profile")
    }

    pub fn h_field(&self) -> ScalarField {
        self.h.to_field(1).expect("one-variable profile")
    }
}

/// Representative solution pairs for each sign of `k`. For `k > 0`,
/// `c = (√k/r) cosh(rs + b)` with `h = α sin(√k t + β)` (`ε = −1`) or
/// `h = α e^{√k t} + β e^{−√k t}` (`ε = +1`); for `k = 0`, `c = e^{rs + b}`
/// and `h` affine; `k < 0` has no positive solution on the whole line.
pub fn ode_solution_catalog(k: f64, eps: SignEpsilon) -> Vec<OdeSolution> {
    let mut out = Vec::new();
    if !k.is_finite() || k < 0.0 {
        return out;
    }
    let hs: Vec<(String, ScalarSpec)> = if k > 0.0 {
        let w = k.sqrt();
        match eps {
            SignEpsilon::Minus => [(1.0, 0.0), (-0.7, 0.3)]
                .iter()
                .map(|&(a, b)| {
                    (
                        format!("sin(α={a}, β={b})"),
                        ScalarSpec::Wave {
                            c0: 0.0,
                            amp: a,
                            k: vec![w],
                            phase: b,
                        },
                    )
                })
                .collect(),
            SignEpsilon::Plus => [(1.0, 0.0), (0.5, -0.4)]
                .iter()
                .map(|&(a, b)| {
                    (
                        format!("exp(α={a}, β={b})"),
                        ScalarSpec::ExpPair {
                            alpha: a,
                            beta: b,
                            rate: w,
                            axis: 0,
                        },
                    )
                })
                .collect(),
        }
    } else {
        [(1.0, 0.0), (-0.5, 2.0)]
            .iter()
            .map(|&(a, b)| {
                (
                    format!("affine(α={a}, β={b})"),
                    ScalarSpec::Quadratic {
                        c0: b,
                        lin: a,
                        quad: 0.0,
                        axis: 0,
                    },
                )
            })
            .collect()
    };
    let cs: Vec<(String, ScalarSpec)> = if k > 0.0 {
        [(1.0, 0.0), (2.0, 0.5)]
            .iter()
            .map(|&(r, b)| {
                (
                    format!("cosh(r={r}, b={b})"),
                    ScalarSpec::Cosh {
                        amp: k.sqrt() / r,
                        coef: r,
                        shift: b,
                        axis: 0,
                    },
                )
            })
            .collect()
    } else {
        [(0.0, 0.0), (1.0, 0.0), (2.0, -0.5)]
            .iter()
            .map(|&(r, b)| {
                (
                    format!("exp(r={r}, b={b})"),
                    ScalarSpec::Exp {
                        amp: b.exp(),
                        coef: r,
                        axis: 0,
                    },
                )
            })
            .collect()
    };
    for (cl, c) in &cs {
        for (hl, h) in &hs {
            out.push(OdeSolution {
                label: format!("c={cl}, h={hl}"),
                k,
                eps,
                c: c.clone(),
                h: h.clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::linspace;

    fn grid() -> Vec<f64> {
        linspace(-2.0, 2.0, 41)
    }

    #[test]
    fn catalog_pairs_solve_the_system() {
        let s = DerivativeScheme::default();
        let near = linspace(-1.0, 1.0, 21);
        for eps in [SignEpsilon::Plus, SignEpsilon::Minus] {
            for k in [0.0, 0.25, 1.0, 4.0] {
                let sols = ode_solution_catalog(k, eps);
                assert!(!sols.is_empty());
                for sol in sols {
                    let r = ode_residuals(&sol.c_field(), &sol.h_field(), k, eps, &grid(), &grid(), &s)
                        .unwrap();
                    assert!(r.c_residual <= 1e-10 && r.h_residual <= 1e-10, "{} {r:?}", sol.label);
                    let d = ode_residuals(
                        &sol.c_field().without_analytic_derivatives(),
                        &sol.h_field().without_analytic_derivatives(),
                        k,
                        eps,
                        &near,
                        &near,
                        &s,
                    )
                    .unwrap();
                    assert!(d.c_residual <= 1e-5 && d.h_residual <= 1e-5, "{} {d:?}", sol.label);
                }
            }
        }
    }

    #[test]
    fn negative_k_is_empty() {
        assert!(ode_solution_catalog(-1.0, SignEpsilon::Minus).is_empty());
    }

    #[test]
    fn constants_solve_flat_case() {
        let one = ScalarField::constant(1, 1.0);
        let r = ode_residuals(&one, &one, 0.0, SignEpsilon::Plus, &grid(), &grid(), &DerivativeScheme::default())
            .unwrap();
        assert_eq!((r.c_residual, r.h_residual), (0.0, 0.0));
    }

    #[test]
    fn nonpositive_c_rejected() {
        let c = ScalarField::new(1, |p| p[0]);
        let h = ScalarField::constant(1, 1.0);
        let err = ode_residuals(&c, &h, 0.0, SignEpsilon::Plus, &[-1.0], &[0.0], &DerivativeScheme::default());
        assert!(matches!(err, Err(GeometryError::NonPositiveWarp { .. })));
    }

    #[test]
    fn wrong_k_detected() {
        let c = ScalarSpec::cosh(1.0).to_field(1).unwrap();
        let h = ScalarField::constant(1, 0.0);
        let r = ode_residuals(&c, &h, 2.0, SignEpsilon::Plus, &grid(), &grid(), &DerivativeScheme::default())
            .unwrap();
        assert!((r.c_residual - 1.0).abs() < 1e-12);
    }
}
