use proptest::prelude::*;

use staticdec_core::manifold::{
    christoffel, curvature_tensors, first_partials, metric_jet, Mat,
};
use staticdec_core::{DerivativeScheme, DomainBox, MetricField};

/// A smooth metric on `[−1, 1]³` perturbing `diag(1, 1, sign)`.
fn wobbly(c: [f64; 6], sign: f64) -> MetricField {
    MetricField::new(DomainBox::cube(3, -1.0, 1.0), move |p| {
        let (x, y, z) = (p[0], p[1], p[2]);
        let a = 0.2 * (c[0] * x + c[1] * y).sin();
        let b = 0.2 * (c[2] * y - c[3] * z).cos();
        let d = 0.1 * (c[4] * x * z).sin();
        let e = 0.1 * (c[5] * (x + y + z)).cos();
        Mat::from_row_slice(3, 3, &[1.0 + a, d, e * 0.5, d, 1.0 + b, 0.1 * a, e * 0.5, 0.1 * a, sign * (1.0 + 0.3 * e)])
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-1.5f64..1.5)
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.8f64..0.8)
}

fn vector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sectional_curvature_depends_only_on_plane(c in coeffs(), p in point(), v in vector(), w in vector(),
                                                  m in prop::array::uniform4(-2.0f64..2.0)) {
        let metric = wobbly(c, 1.0);
        let curv = curvature_tensors(&metric, &DerivativeScheme::default(), &p).unwrap();
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.2);
        let Ok(k) = curv.sectional(&v, &w, 1e-3) else { return Ok(()) };
        let v2: Vec<f64> = (0..3).map(|i| m[0] * v[i] + m[1] * w[i]).collect();
        let w2: Vec<f64> = (0..3).map(|i| m[2] * v[i] + m[3] * w[i]).collect();
        let k2 = curv.sectional(&v2, &w2, 1e-6).unwrap();
        prop_assert!((k - k2).abs() <= 1e-8 * (1.0 + k.abs()));
    }

    #[test]
    fn curvature_tensor_symmetries(c in coeffs(), p in point(), sign in prop::sample::select(vec![1.0, -1.0])) {
        let metric = wobbly(c, sign);
        let s = DerivativeScheme::default();
        let curv = curvature_tensors(&metric, &s, &p).unwrap();
        let gamma = christoffel(&metric, &s, &p).unwrap();
        let n = 3;
        for l in 0..n { for i in 0..n { for j in 0..n { for k in 0..n {
            let bianchi = curv.riemann(l, i, j, k) + curv.riemann(l, j, k, i) + curv.riemann(l, k, i, j);
            prop_assert!(bianchi.abs() <= 1e-4);
            prop_assert!((curv.riemann(l, i, j, k) + curv.riemann(l, j, i, k)).abs() <= 1e-12);
        }}}}
        for k in 0..n { for i in 0..n { for j in 0..n {
            prop_assert_eq!(gamma.get(k, i, j), gamma.get(k, j, i));
        }}}
        prop_assert!((&curv.ricci - curv.ricci.transpose()).abs().max() <= 1e-6);
    }

    #[test]
    fn connection_is_metric_compatible(c in coeffs(), p in point()) {
        // ∂_k g_ij = g(Γ(∂_k, ∂_i), ∂_j) + g(∂_i, Γ(∂_k, ∂_j))
        let metric = wobbly(c, -1.0);
        let s = DerivativeScheme::default();
        let jet = metric_jet(&metric, &s, &p, false).unwrap();
        let gamma = christoffel(&metric, &s, &p).unwrap();
        for k in 0..3 { for i in 0..3 { for j in 0..3 {
            let mut rhs = 0.0;
            for m in 0..3 {
                rhs += gamma.get(m, k, i) * jet.g[(m, j)] + gamma.get(m, k, j) * jet.g[(i, m)];
            }
            prop_assert!((jet.dg[k][(i, j)] - rhs).abs() <= 1e-6);
        }}}
    }

    #[test]
    fn richardson_agrees_with_half_step(a in -2.0f64..2.0, b in -2.0f64..2.0, p in point()) {
        let f = move |q: &[f64]| vec![(a * q[0]).sin() * (b * q[1]).exp() + q[2] * q[2] * q[0]];
        let dom = DomainBox::cube(3, -1.0, 1.0);
        let full = first_partials(&f, &p, &dom, 1e-3, true).unwrap();
        let half = first_partials(&f, &p, &dom, 5e-4, true).unwrap();
        for (x, y) in full.iter().zip(&half) {
            prop_assert!((x[0] - y[0]).abs() <= 1e-6);
        }
    }
}
