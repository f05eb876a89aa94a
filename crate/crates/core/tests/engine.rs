use staticdec_core::catalog::CatalogSpace;
use staticdec_core::manifold::{
    christoffel, covariant_derivative, curvature_tensors, lie_bracket, scalar_calculus,
    sectional_curvature, sectional_scan, Mat,
};
use staticdec_core::{
    DerivativeScheme, DomainBox, GeometryError, Interval, MetricField, ScalarField,
    VectorFieldSpec,
};

fn polar() -> MetricField {
    let dom = DomainBox(vec![Interval::new(0.5, 3.0), Interval::new(-3.0, 3.0)]);
    MetricField::new(dom, |p| Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, p[0] * p[0]]))
}

#[test]
fn sphere_of_radius_two_has_quarter_curvature() {
    let m = CatalogSpace::Sphere { radius: 2.0 }.metric().unwrap();
    let s = DerivativeScheme::default();
    for p in [[0.7, 0.0], [1.5, 1.0], [2.4, -2.0]] {
        let k = sectional_curvature(&m, &s, &p, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((k - 0.25).abs() < 1e-8, "{k}");
        let kd =
            sectional_curvature(&m.without_analytic_derivatives(), &s, &p, &[1.0, 0.3], &[0.2, 1.0])
                .unwrap();
        assert!((kd - 0.25).abs() < 1e-5, "{kd}");
    }
}

#[test]
fn polar_connection_and_geodesic_curvature() {
    let m = polar();
    let s = DerivativeScheme::default();
    let g = christoffel(&m, &s, &[1.0, 0.2]).unwrap();
    assert!((g.get(0, 1, 1) + 1.0).abs() < 1e-7);
    assert!((g.get(1, 0, 1) - 1.0).abs() < 1e-7);
    // ∇_{∂θ}∂θ = −r ∂r
    let d = covariant_derivative(&m, &s, &VectorFieldSpec::coordinate(2, 1), &[1.0, 0.2], &[0.0, 1.0])
        .unwrap();
    assert!((d[0] + 1.0).abs() < 1e-7 && d[1].abs() < 1e-7);
    let c = curvature_tensors(&m, &s, &[1.3, 0.0]).unwrap();
    assert!(c.scalar.abs() < 1e-5);
}

#[test]
fn lie_bracket_of_rotation_generators() {
    // [x∂y, y∂x] = x∂x − y∂y
    let a = VectorFieldSpec::new(2, |p| vec![0.0, p[0]]);
    let b = VectorFieldSpec::new(2, |p| vec![p[1], 0.0]);
    let dom = DomainBox::cube(2, -2.0, 2.0);
    let s = DerivativeScheme::default();
    for p in [[0.3, -0.7], [1.1, 0.4]] {
        let br = lie_bracket(&a, &b, &dom, &s, &p).unwrap();
        assert!((br[0] - p[0]).abs() < 1e-9 && (br[1] + p[1]).abs() < 1e-9);
    }
}

#[test]
fn hyperbolic_plane_scan_is_constant() {
    let m = CatalogSpace::H2eps { eps: staticdec_core::SignEpsilon::Plus, r: 1.0 }
        .metric()
        .unwrap();
    let (lo, hi) = sectional_scan(&m, &DerivativeScheme::default(), &[0.4, 0.1], 10, 7).unwrap();
    assert!((lo + 1.0).abs() < 1e-8 && (hi + 1.0).abs() < 1e-8);
}

#[test]
fn product_with_line_scans_between_bounds() {
    // H²(1) × ℝ: sectional curvatures fill [−1, 0]
    let m = CatalogSpace::DirectProductSurfaces {
        first: Box::new(CatalogSpace::H2eps { eps: staticdec_core::SignEpsilon::Plus, r: 1.0 }),
        second: Box::new(CatalogSpace::Euclidean { dim: 1 }),
    }
    .metric()
    .unwrap();
    let (lo, hi) = sectional_scan(&m, &DerivativeScheme::default(), &[0.2, 0.3, 0.0], 200, 3).unwrap();
    assert!(lo >= -1.0 - 1e-8 && hi <= 1e-8);
    assert!(lo < -0.5 && hi > -0.5, "{lo} {hi}");
}

#[test]
fn polar_laplacian_of_radius_squared() {
    let m = polar();
    let h = ScalarField::new(2, |p| p[0] * p[0]);
    let c = scalar_calculus(&m, &DerivativeScheme::default(), &h, &[1.7, 0.0]).unwrap();
    assert!((c.laplacian - 4.0).abs() < 1e-6);
    assert!((c.gradient_norm_sq() - 4.0 * 1.7 * 1.7).abs() < 1e-6);
}

#[test]
fn out_of_domain_and_degenerate_errors() {
    let m = polar();
    let s = DerivativeScheme::default();
    assert!(matches!(
        curvature_tensors(&m, &s, &[5.0, 0.0]),
        Err(GeometryError::OutOfDomain { .. })
    ));
    let d = MetricField::constant(DomainBox::cube(2, -1.0, 1.0), Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
    assert!(matches!(
        curvature_tensors(&d, &s, &[0.0, 0.0]),
        Err(GeometryError::DegenerateMetric { .. })
    ));
    let flat = MetricField::euclidean(DomainBox::cube(2, -1.0, 1.0));
    assert!(matches!(
        sectional_curvature(&flat, &s, &[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]),
        Err(GeometryError::DegeneratePlane { .. })
    ));
}
