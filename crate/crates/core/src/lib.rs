//! Numerical verification toolkit for static and warped-product
//! semi-Riemannian manifolds.
//!
//! A static manifold is a product `L × ℝ` carrying the metric
//! `g_L + ε f² dt²` with `ε = ±1` and a positive warping function `f` on `L`.
//! Everything here is built on a single-chart tensor engine
//! ([`manifold`]) that evaluates a metric, differentiates it (analytically
//! when hooks are supplied, by Richardson-extrapolated central differences
//! otherwise) and produces the Levi-Civita connection, curvature tensors and
//! scalar calculus. The remaining modules express closed-form identities for
//! product metrics, Killing/static field checks, lightlike sectional
//! curvature and a catalog of explicit spaces as residuals against that
//! engine, collected into [`DefectReport`]s.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod error;
pub mod field;
pub mod manifold;
pub mod null;
pub mod product;
pub mod report;
pub mod sampling;

pub use error::{GeometryError, Result};
pub use manifold::{
    DerivativeScheme, DomainBox, Interval, MetricField, Point, ScalarField, SignEpsilon,
    TangentVector, VectorFieldSpec,
};
pub use report::DefectReport;
