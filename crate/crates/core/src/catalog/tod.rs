use alloc::vec;

use crate::error::{GeometryError, Result};
use crate::manifold::{DomainBox, Interval, Mat, MetricField};
use crate::sampling::linspace;

/// Probes used to check `h > 0` across the declared `u` interval.
const POSITIVITY_PROBES: usize = 2001;

/// `(h, h', h'')` for `h(u) = k1 + k2/u + k3 u²`.
pub fn tod_profile(k1: f64, k2: f64, k3: f64, u: f64) -> (f64, f64, f64) {
    let (a, b, c) = if k2 == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        (k2 / u, -k2 / (u * u), 2.0 * k2 / (u * u * u))
    };
    (k1 + a + k3 * u * u, b + 2.0 * k3 * u, c + 2.0 * k3)
}

/// Gaussian curvature `−h''/2 = −(k2/u³ + k3)` of the Tod surface.
pub fn tod_curvature(k2: f64, k3: f64, u: f64) -> f64 {
    -(tod_profile(0.0, k2, k3, u).2 / 2.0)
}

/// The metric `(1/h) du² + h dv²` on `u_domain × v_domain`, coordinates
/// `(u, v)`. Rejects domains containing `u = 0` when `k2 ≠ 0` and domains
/// where `h` fails to be positive at any of a dense set of probes.
pub fn tod_surface_metric(
    k1: f64,
    k2: f64,
    k3: f64,
    u_domain: Interval,
    v_domain: Interval,
) -> Result<MetricField> {
    let domain = DomainBox::new(vec![u_domain, v_domain])?;
    if !(u_domain.lo.is_finite() && u_domain.hi.is_finite()) {
        return Err(GeometryError::EmptyDomain(
            "the u interval of a Tod surface must be bounded".into(),
        ));
    }
    if k2 != 0.0 && u_domain.lo <= 0.0 && u_domain.hi >= 0.0 {
        return Err(GeometryError::InvalidParameter(
            "u = 0 lies in the domain while k2 ≠ 0".into(),
        ));
    }
    for u in linspace(u_domain.lo, u_domain.hi, POSITIVITY_PROBES) {
        let h = tod_profile(k1, k2, k3, u).0;
        if !(h > 0.0) || !h.is_finite() {
            return Err(GeometryError::NonPositiveWarp { value: h });
        }
    }
    Ok(MetricField::new(domain, move |p| {
        let h = tod_profile(k1, k2, k3, p[0]).0;
        Mat::from_row_slice(2, 2, &[1.0 / h, 0.0, 0.0, h])
    })
    .with_first_derivatives(move |p| {
        let (h, d, _) = tod_profile(k1, k2, k3, p[0]);
        vec![
            Mat::from_row_slice(2, 2, &[-d / (h * h), 0.0, 0.0, d]),
            Mat::zeros(2, 2),
        ]
    })
    .with_second_derivatives(move |p| {
        let (h, d, dd) = tod_profile(k1, k2, k3, p[0]);
        let inv = -dd / (h * h) + 2.0 * d * d / (h * h * h);
        vec![
            Mat::from_row_slice(2, 2, &[inv, 0.0, 0.0, dd]),
            Mat::zeros(2, 2),
            Mat::zeros(2, 2),
            Mat::zeros(2, 2),
        ]
    }))
}
