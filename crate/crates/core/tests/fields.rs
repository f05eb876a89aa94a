use std::f64::consts::PI;

use staticdec_core::catalog::{catalog_field, CatalogSpace, FieldFamily, ScalarSpec, StaticFieldFamily};
use staticdec_core::field::{verify_flow_decomposition, FlowDecompositionOptions, Leaf};
use staticdec_core::field::{
    dichotomy_scan, frobenius_defect, killing_defect, projection_residuals, proportionality_check,
    ProjectionOptions, SliceVerdict,
};
use staticdec_core::sampling::{self, linspace};
use staticdec_core::{DerivativeScheme, GeometryError, Point, SignEpsilon, VectorFieldSpec};

fn cosh_plane() -> CatalogSpace {
    CatalogSpace::H2eps { eps: SignEpsilon::Minus, r: 1.0 }
}

fn sine_field(beta: f64) -> VectorFieldSpec {
    catalog_field(&cosh_plane(), &StaticFieldFamily::new(FieldFamily::CoshPlane, 1.0, beta, 0.0))
        .unwrap()
}

#[test]
fn cosh_plane_field_closed_form() {
    // cos(t) tanh(s) ∂t + sin(t) ∂s
    let v = sine_field(0.0);
    for (s, t) in [(0.3, 0.7), (-1.2, 2.0)] {
        let got = v.eval(&[s, t]);
        assert!((got[0] - f64::sin(t)).abs() < 1e-15);
        assert!((got[1] - f64::cos(t) * f64::tanh(s)).abs() < 1e-15);
    }
    let e = catalog_field(
        &CatalogSpace::H2hatEps { eps: SignEpsilon::Minus, r: 1.0 },
        &StaticFieldFamily::new(FieldFamily::ExpPlane, 1.0, 0.0, 0.0),
    )
    .unwrap();
    let got = e.eval(&[0.4, 1.5]);
    assert!((got[0] - 1.5).abs() < 1e-15);
    assert!((got[1] - (-0.5 * f64::exp(-0.8) - 0.5 * 1.5 * 1.5)).abs() < 1e-14);
}

#[test]
fn catalog_fields_project_consistently() {
    let s = DerivativeScheme::default();
    let cases = [
        (CatalogSpace::H2eps { eps: SignEpsilon::Minus, r: 1.0 }, FieldFamily::CoshPlane),
        (CatalogSpace::H2eps { eps: SignEpsilon::Plus, r: 0.5 }, FieldFamily::CoshPlane),
        (CatalogSpace::H2hatEps { eps: SignEpsilon::Minus, r: 1.0 }, FieldFamily::ExpPlane),
        (CatalogSpace::R2eps { eps: SignEpsilon::Minus }, FieldFamily::FlatPlane),
    ];
    for (space, fam) in cases {
        let spec = space.static_product().unwrap();
        let v = catalog_field(&space, &StaticFieldFamily::new(fam, 0.7, 0.4, -0.3)).unwrap();
        let m = space.metric().unwrap();
        let pts = sampling::halton(m.domain(), 40, 2).unwrap();
        assert!(killing_defect(&m, &s, &v, &pts, 1e-5).unwrap().passed);
        assert_eq!(frobenius_defect(&m, &s, &v, &pts, 0.0).unwrap().normalized.sup_defect, 0.0);
        let base = sampling::halton(spec.base.domain(), 10, 3).unwrap();
        let res = projection_residuals(&spec, &v, &s, &linspace(-2.0, 2.0, 5), &base, &ProjectionOptions::default())
            .unwrap();
        for r in res.reports() {
            assert!(r.passed, "{} {}: {}", space.name(), r.identity, r.sup_defect);
        }
    }
}

#[test]
fn dilation_perturbation_is_detected() {
    let s = DerivativeScheme::default();
    let space = cosh_plane();
    let spec = space.static_product().unwrap();
    let v = sine_field(0.0).sum(&VectorFieldSpec::new(2, |p| vec![0.1 * p[0], 0.0]));
    let m = space.metric().unwrap();
    let pts = sampling::halton(m.domain(), 40, 2).unwrap();
    // L_{s∂s} g contributes 2·0.1 to the ds² component
    assert!(killing_defect(&m, &s, &v, &pts, 1e-5).unwrap().sup_defect > 0.05);
    let base = sampling::halton(spec.base.domain(), 20, 3).unwrap();
    let res = projection_residuals(&spec, &v, &s, &linspace(-1.0, 1.0, 3), &base, &ProjectionOptions::default())
        .unwrap();
    assert!(res.r2.sup_defect > 0.05, "{}", res.r2.sup_defect);
}

#[test]
fn time_dependent_perturbation_moves_first_residual() {
    let s = DerivativeScheme::default();
    let spec = cosh_plane().static_product().unwrap();
    let v = sine_field(0.0).sum(&VectorFieldSpec::new(2, |p| vec![0.1 * p[1] * p[1], 0.0]));
    let base = sampling::halton(spec.base.domain(), 20, 3).unwrap();
    let res = projection_residuals(&spec, &v, &s, &linspace(-1.0, 1.0, 3), &base, &ProjectionOptions::default())
        .unwrap();
    assert!(res.r1.sup_defect > 0.05, "{}", res.r1.sup_defect);
}

#[test]
fn slices_are_zero_or_nowhere_zero() {
    let spec = cosh_plane().static_product().unwrap();
    let base: Vec<Point> = linspace(-3.0, 3.0, 50).into_iter().map(|s| Point(vec![s])).collect();
    let scan = dichotomy_scan(&spec, &sine_field(0.0), &[0.0, PI / 2.0, 1.0, -2.0], &base).unwrap();
    assert_eq!(scan.verdicts[0].1, SliceVerdict::IdenticallyZero);
    assert_eq!(scan.verdicts[1].1, SliceVerdict::NowhereZero);
    assert!(!scan.flagged);
}

#[test]
fn slices_are_proportional_to_sine() {
    let spec = cosh_plane().static_product().unwrap();
    let base: Vec<Point> = linspace(-3.0, 3.0, 25).into_iter().map(|s| Point(vec![s])).collect();
    let t0 = PI / 2.0;
    let ts = linspace(-2.0, 2.0, 9);
    let prop = proportionality_check(&spec, &sine_field(0.0), t0, &ts, &base).unwrap();
    assert!(prop.proportional);
    for (t, h) in prop.h {
        assert!((h - f64::sin(t)).abs() < 1e-6, "{t} {h}");
    }
    assert!(matches!(
        proportionality_check(&spec, &sine_field(0.0), 0.0, &ts, &base),
        Err(GeometryError::VanishingReference)
    ));
}

#[test]
fn flow_of_shifted_sine_field_splits_metric() {
    // with β = π/2 the field is ∂s along s = 0, and {s = 0} is orthogonal to it
    let m = cosh_plane().metric().unwrap();
    let v = sine_field(PI / 2.0);
    let leaf = Leaf::new(1, |y| vec![0.0, y[0]], vec![vec![-0.5], vec![0.0], vec![0.4]]);
    let out = verify_flow_decomposition(&m, &v, &leaf, &FlowDecompositionOptions::default()).unwrap();
    assert!(out.pullback.passed, "{}", out.pullback.sup_defect);
    assert!(out.warp_invariance.passed);
    assert!(out.halving_delta <= 1e-6);
}

#[test]
fn flow_of_fibre_translation_on_doubly_warped_space() {
    let space = CatalogSpace::DoublyWarped {
        base: Box::new(CatalogSpace::Euclidean { dim: 1 }),
        lambda: ScalarSpec::Cosh { amp: 1.0, coef: 0.5, shift: 0.0, axis: 0 },
        f: ScalarSpec::exp(0.3),
        eps: SignEpsilon::Minus,
    };
    let m = space.metric().unwrap();
    let v = VectorFieldSpec::coordinate(3, 1);
    let leaf = Leaf::new(
        2,
        |y| vec![y[0], 0.0, y[1]],
        vec![vec![0.0, 0.0], vec![0.7, -1.0], vec![-1.2, 0.5]],
    );
    let out = verify_flow_decomposition(&m, &v, &leaf, &FlowDecompositionOptions::default()).unwrap();
    assert!(out.pullback.passed && out.warp_invariance.passed);
    assert!(out.halving_delta <= 1e-6);
}
