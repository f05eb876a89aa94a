use alloc::string::String;
use alloc::vec::Vec;

use crate::manifold::Point;

/// Sup-norm residual of a named identity over a sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    pub identity: String,
    /// Maximum local defect; `+∞` if any sample produced a non-finite value.
    pub sup_defect: f64,
    pub samples: Vec<(Point, f64)>,
    pub tolerance: f64,
    pub passed: bool,
}

impl DefectReport {
    pub fn from_samples(
        identity: impl Into<String>,
        samples: Vec<(Point, f64)>,
        tolerance: f64,
    ) -> Self {
        let sup_defect = samples.iter().fold(0.0_f64, |acc, (_, d)| {
            if d.is_nan() || acc.is_infinite() {
                f64::INFINITY
            } else {
                acc.max(d.abs())
            }
        });
        DefectReport {
            identity: identity.into(),
            sup_defect,
            passed: sup_defect <= tolerance,
            samples,
            tolerance,
        }
    }

    /// A report without per-sample diagnostics, e.g. for a scalar comparison.
    pub fn single(identity: impl Into<String>, at: Point, defect: f64, tolerance: f64) -> Self {
        DefectReport::from_samples(identity, alloc::vec![(at, defect)], tolerance)
    }

    /// The sample attaining the sup defect (first one on ties).
    pub fn worst_point(&self) -> Option<&Point> {
        let mut best: Option<(&Point, f64)> = None;
        for (p, d) in &self.samples {
            let d = if d.is_nan() { f64::INFINITY } else { d.abs() };
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((p, d));
            }
        }
        best.map(|(p, _)| p)
    }

    /// Same samples judged against a different tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.passed = self.sup_defect <= tolerance;
        self
    }

    /// Same samples under a different name.
    pub fn renamed(mut self, identity: impl Into<String>) -> Self {
        self.identity = identity.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sup_and_worst_point() {
        let r = DefectReport::from_samples(
            "x",
            vec![
                (Point(vec![0.0]), 1e-6),
                (Point(vec![1.0]), -3e-6),
                (Point(vec![2.0]), 2e-6),
            ],
            1e-5,
        );
        assert_eq!(r.sup_defect, 3e-6);
        assert!(r.passed);
        assert_eq!(r.worst_point().unwrap().as_slice(), &[1.0]);
        assert!(!r.with_tolerance(1e-6).passed);
    }

    #[test]
    fn nan_fails() {
        let r = DefectReport::from_samples(
            "x",
            vec![(Point(vec![0.0]), f64::NAN), (Point(vec![1.0]), 0.0)],
            1.0,
        );
        assert!(!r.passed);
        assert!(r.sup_defect.is_infinite());
    }

    #[test]
    fn empty_report_is_vacuous() {
        let r = DefectReport::from_samples("x", Vec::new(), 0.0);
        assert_eq!(r.sup_defect, 0.0);
        assert!(r.passed);
        assert!(r.worst_point().is_none());
    }
}
