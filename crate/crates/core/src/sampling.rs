//! Deterministic sample grids on domain boxes.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, Result};
use crate::manifold::{DomainBox, Interval, Point};

/// Number of points in the default sample grid.
pub const DEFAULT_SAMPLES: usize = 100;

/// Fraction of each axis width kept clear at both ends.
const INSET: f64 = 0.01;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

fn bounded(domain: &DomainBox) -> Result<()> {
    for (i, a) in domain.axes().iter().enumerate() {
        if !a.lo.is_finite() || !a.hi.is_finite() {
            return Err(GeometryError::EmptyDomain(format!(
                "axis {i} is unbounded; sampling needs a finite box"
            )));
        }
    }
    Ok(())
}

fn place(a: Interval, u: f64) -> f64 {
    let pad = INSET * a.width();
    a.lo + pad + u * (a.width() - 2.0 * pad)
}

/// Shifted Halton points in `domain`, kept slightly away from the faces.
///
/// The Cranley–Patterson shift is drawn from `seed`, so the same seed always
/// yields the same grid.
pub fn halton(domain: &DomainBox, n: usize, seed: u64) -> Result<Vec<Point>> {
    bounded(domain)?;
    let d = domain.dim();
    if d > PRIMES.len() {
        return Err(GeometryError::InvalidParameter(format!(
            "Halton sampling supports at most {} axes",
            PRIMES.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    Ok((0..n as u64)
        .map(|i| {
            Point(
                (0..d)
                    .map(|k| {
                        let u = radical_inverse(i + 1, PRIMES[k]) + shift[k];
                        place(domain.axis(k), u - num_traits::Float::floor(u))
                    })
                    .collect(),
            )
        })
        .collect())
}

/// The default 100-point grid.
pub fn default_samples(domain: &DomainBox, seed: u64) -> Result<Vec<Point>> {
    halton(domain, DEFAULT_SAMPLES, seed)
}

/// Independent uniform points in the inset box.
pub fn uniform(domain: &DomainBox, n: usize, seed: u64) -> Result<Vec<Point>> {
    bounded(domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            Point(
                domain
                    .axes()
                    .iter()
                    .map(|a| place(*a, rng.random::<f64>()))
                    .collect(),
            )
        })
        .collect())
}

/// `n` evenly spaced values from `lo` to `hi` inclusive (`lo` alone if `n = 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Tensor grid with `counts[k]` evenly spaced values on axis `k` of the inset
/// box, last axis varying fastest.
pub fn tensor_grid(domain: &DomainBox, counts: &[usize]) -> Result<Vec<Point>> {
    bounded(domain)?;
    if counts.len() != domain.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: domain.dim(),
            found: counts.len(),
        });
    }
    let axes: Vec<Vec<f64>> = domain
        .axes()
        .iter()
        .zip(counts)
        .map(|(a, &c)| {
            let pad = INSET * a.width();
            if c == 1 {
                alloc::vec![a.midpoint()]
            } else {
                linspace(a.lo + pad, a.hi - pad, c)
            }
        })
        .collect();
    let mut out = alloc::vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &x in axis {
                let mut q = prefix.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(Point).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_deterministic_and_inside() {
        let dom = DomainBox::new(alloc::vec![Interval::new(-3.0, 3.0), Interval::new(0.5, 2.0)]).unwrap();
        let a = halton(&dom, 100, 7).unwrap();
        let b = halton(&dom, 100, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, halton(&dom, 100, 8).unwrap());
        assert!(a.iter().all(|p| dom.contains(p)));
    }

    #[test]
    fn tensor_grid_counts() {
        let g = tensor_grid(&DomainBox::cube(3, 0.0, 1.0), &[2, 3, 4]).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g[0].as_slice(), &[0.01, 0.01, 0.01]);
    }

    #[test]
    fn unbounded_box_rejected() {
        assert!(halton(&DomainBox::unbounded(1), 5, 0).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), alloc::vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), alloc::vec![2.0]);
    }
}
