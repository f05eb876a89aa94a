use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};

use super::{DomainBox, Interval};

/// Finite-difference configuration used whenever an analytic derivative hook
/// is missing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeScheme {
    /// Central-difference step for first derivatives.
    pub first_step: f64,
    /// Step for second derivatives (pure and mixed).
    pub second_step: f64,
    /// Combine steps `h` and `h/2` to cancel the `h²` error term.
    pub richardson: bool,
    /// Floor on `|det g|` and on sectional-curvature plane denominators.
    pub degeneracy_floor: f64,
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        DerivativeScheme {
            first_step: 1e-5,
            second_step: 1e-3,
            richardson: true,
            degeneracy_floor: 1e-12,
        }
    }
}

impl DerivativeScheme {
    /// Plain central differences with the given steps.
    pub fn plain(first_step: f64, second_step: f64) -> Self {
        DerivativeScheme {
            first_step,
            second_step,
            richardson: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.first_step) || !ok(self.second_step) || !ok(self.degeneracy_floor) {
            return Err(GeometryError::InvalidParameter(format!(
                "derivative scheme steps and floor must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Central,
    Forward,
    Backward,
}

type Stencil = Vec<(f64, f64)>;

/// Picks the stencil side and step for an axis: central if `±reach·h` fits,
/// one-sided if `reach_one·h` fits on one side, otherwise a shrunken step.
fn choose(x: f64, axis: Interval, h: f64, reach_one: f64) -> Result<(Side, f64)> {
    let minus = x - axis.lo;
    let plus = axis.hi - x;
    if minus >= h && plus >= h {
        return Ok((Side::Central, h));
    }
    if plus >= reach_one * h {
        return Ok((Side::Forward, h));
    }
    if minus >= reach_one * h {
        return Ok((Side::Backward, h));
    }
    let room = if plus > minus { plus } else { minus };
    if !(room > 0.0) {
        return Err(GeometryError::EmptyDomain(format!(
            "no room for a difference stencil at coordinate {x} in [{}, {}]",
            axis.lo, axis.hi
        )));
    }
    let h2 = room / reach_one;
    if plus >= minus {
        Ok((Side::Forward, h2))
    } else {
        Ok((Side::Backward, h2))
    }
}

fn first_stencil(side: Side, h: f64) -> Stencil {
    let c = 1.0 / (2.0 * h);
    match side {
        Side::Central => vec![(h, c), (-h, -c)],
        Side::Forward => vec![(0.0, -3.0 * c), (h, 4.0 * c), (2.0 * h, -c)],
        Side::Backward => vec![(0.0, 3.0 * c), (-h, -4.0 * c), (-2.0 * h, c)],
    }
}

fn second_stencil(side: Side, h: f64) -> Stencil {
    let c = 1.0 / (h * h);
    match side {
        Side::Central => vec![(h, c), (0.0, -2.0 * c), (-h, c)],
        Side::Forward => vec![
            (0.0, 2.0 * c),
            (h, -5.0 * c),
            (2.0 * h, 4.0 * c),
            (3.0 * h, -c),
        ],
        Side::Backward => vec![
            (0.0, 2.0 * c),
            (-h, -5.0 * c),
            (-2.0 * h, 4.0 * c),
            (-3.0 * h, -c),
        ],
    }
}

// Every base stencil above is second order, so one Richardson step uses the
// same (4·S(h/2) − S(h))/3 weights.
fn extrapolate(build: fn(Side, f64) -> Stencil, side: Side, h: f64, richardson: bool) -> Stencil {
    if !richardson {
        return build(side, h);
    }
    let mut out: Stencil = build(side, 0.5 * h)
        .into_iter()
        .map(|(o, w)| (o, 4.0 * w / 3.0))
        .collect();
    for (o, w) in build(side, h) {
        out.push((o, -w / 3.0));
    }
    out
}

fn axis_first(x: f64, axis: Interval, h: f64, richardson: bool) -> Result<Stencil> {
    let (side, h) = choose(x, axis, h, 2.0)?;
    Ok(extrapolate(first_stencil, side, h, richardson))
}

fn axis_second(x: f64, axis: Interval, h: f64, richardson: bool) -> Result<Stencil> {
    let (side, h) = choose(x, axis, h, 3.0)?;
    Ok(extrapolate(second_stencil, side, h, richardson))
}

fn accumulate(acc: &mut [f64], w: f64, vals: &[f64]) {
    for (a, v) in acc.iter_mut().zip(vals) {
        *a += w * v;
    }
}

/// `∂_k f(p)` for every axis `k`, for a vector-valued `f`; result indexed
/// `[k][component]`.
pub fn first_partials(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    domain: &DomainBox,
    h: f64,
    richardson: bool,
) -> Result<Vec<Vec<f64>>> {
    domain.check(p)?;
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    let mut q = p.to_vec();
    for k in 0..n {
        let st = axis_first(p[k], domain.axis(k), h, richardson)?;
        let mut acc: Option<Vec<f64>> = None;
        for (o, w) in st {
            q[k] = p[k] + o;
            let v = f(&q);
            let a = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            accumulate(a, w, &v);
        }
        q[k] = p[k];
        let a = acc.unwrap_or_default();
        out.push(a);
    }
    Ok(out)
}

/// `∂_k ∂_l f(p)` for a vector-valued `f`, indexed `[k * n + l][component]`.
/// Pure second derivatives use a three-point (or one-sided four-point)
/// stencil; mixed ones the tensor product of first-derivative stencils.
pub fn second_partials(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
    domain: &DomainBox,
    h: f64,
    richardson: bool,
) -> Result<Vec<Vec<f64>>> {
    domain.check(p)?;
    let n = p.len();
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); n * n];
    let mut q = p.to_vec();
    let firsts: Vec<Stencil> = (0..n)
        .map(|k| axis_first(p[k], domain.axis(k), h, richardson))
        .collect::<Result<_>>()?;
    for k in 0..n {
        let st = axis_second(p[k], domain.axis(k), h, richardson)?;
        let mut acc: Option<Vec<f64>> = None;
        for (o, w) in st {
            q[k] = p[k] + o;
            let v = f(&q);
            let a = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            accumulate(a, w, &v);
        }
        q[k] = p[k];
        out[k * n + k] = acc.unwrap_or_default();
        for l in (k + 1)..n {
            let mut acc: Option<Vec<f64>> = None;
            for &(ok, wk) in &firsts[k] {
                for &(ol, wl) in &firsts[l] {
                    q[k] = p[k] + ok;
                    q[l] = p[l] + ol;
                    let v = f(&q);
                    let a = acc.get_or_insert_with(|| vec![0.0; v.len()]);
                    accumulate(a, wk * wl, &v);
                }
            }
            q[k] = p[k];
            q[l] = p[l];
            let a = acc.unwrap_or_default();
            out[l * n + k] = a.clone();
            out[k * n + l] = a;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_cos(p: &[f64]) -> Vec<f64> {
        alloc::vec![p[0].sin() * p[1].cos(), p[0] * p[0] * p[1]]
    }

    #[test]
    fn central_first_and_second_partials() {
        let dom = DomainBox::cube(2, -3.0, 3.0);
        let p = [0.4, -0.7];
        let d1 = first_partials(&sin_cos, &p, &dom, 1e-5, true).unwrap();
        assert!((d1[0][0] - 0.4f64.cos() * (-0.7f64).cos()).abs() < 1e-10);
        assert!((d1[1][0] + 0.4f64.sin() * (-0.7f64).sin()).abs() < 1e-10);
        assert!((d1[0][1] - 2.0 * 0.4 * -0.7).abs() < 1e-10);
        let d2 = second_partials(&sin_cos, &p, &dom, 1e-3, true).unwrap();
        assert!((d2[0][0] + 0.4f64.sin() * (-0.7f64).cos()).abs() < 1e-8);
        assert!((d2[1][0] - d2[2][0]).abs() == 0.0);
        assert!((d2[1][0] + 0.4f64.cos() * (-0.7f64).sin()).abs() < 1e-8);
        assert!((d2[1][1] - 2.0 * 0.4).abs() < 1e-8);
    }

    #[test]
    fn one_sided_fallback_near_boundary() {
        let dom = DomainBox::cube(2, 0.0, 1.0);
        for p in [[0.0, 0.5], [1.0, 0.5], [1e-4, 1.0 - 2e-4]] {
            let d1 = first_partials(&sin_cos, &p, &dom, 1e-3, true).unwrap();
            assert!((d1[0][0] - p[0].cos() * p[1].cos()).abs() < 1e-8, "{p:?}");
            let d2 = second_partials(&sin_cos, &p, &dom, 1e-3, true).unwrap();
            assert!((d2[0][0] + p[0].sin() * p[1].cos()).abs() < 1e-5, "{p:?}");
            assert!((d2[1][0] + p[0].cos() * p[1].sin()).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn richardson_beats_plain_differences() {
        let dom = DomainBox::cube(2, -3.0, 3.0);
        let p = [0.4, -0.7];
        let exact = -0.4f64.sin() * (-0.7f64).cos();
        let plain = second_partials(&sin_cos, &p, &dom, 1e-2, false).unwrap()[0][0];
        let rich = second_partials(&sin_cos, &p, &dom, 1e-2, true).unwrap()[0][0];
        assert!((rich - exact).abs() < 0.01 * (plain - exact).abs());
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let dom = DomainBox::cube(2, 0.0, 1.0);
        assert!(matches!(
            first_partials(&sin_cos, &[1.5, 0.0], &dom, 1e-3, true),
            Err(GeometryError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn invalid_scheme_rejected() {
        assert!(DerivativeScheme::default().validate().is_ok());
        assert!(DerivativeScheme::plain(0.0, 1e-3).validate().is_err());
    }
}
