use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use staticdec_core::catalog::{
    catalog_field, einstein_chain_residuals, einstein_defect, ode_residuals, ode_solution_catalog,
    tod_curvature, tod_surface_metric, CatalogSpace, EinsteinChainSpec, FieldFamily,
    StaticFieldFamily, CATALOG_LINE,
};
use staticdec_core::field::{
    dichotomy_scan, frobenius_defect, killing_defect, projection_residuals, proportionality_check,
    verify_flow_decomposition, FlowConfig, FlowDecompositionOptions, Leaf, ProjectionOptions,
    SliceVerdict, PROPORTIONALITY_TOL,
};
use staticdec_core::manifold::{curvature_tensors, metric_jet, orthonormal_frame};
use staticdec_core::null::{
    curluz_residual, lightlike_sectional, null_curvature_scan, warped_null_plane, DegeneratePlane,
};
use staticdec_core::product::{build_static, static_product_residuals, ProductIdentityOptions};
use staticdec_core::sampling::{self, linspace, tensor_grid};
use staticdec_core::{
    DefectReport, DerivativeScheme, DomainBox, GeometryError, Interval, MetricField, Point,
    SignEpsilon, VectorFieldSpec,
};

use crate::config::{Suite, SuiteConfig, TodCase};
use crate::error::CliError;
use crate::report::{Check, SuiteReport};

type Res<T> = Result<T, CliError>;

/// Sample points evaluated per parallel task.
const CHUNK: usize = 8;

/// Runs the configured suite. Work is spread over the rayon pool (capped by
/// `STATICDEC_THREADS`) and merged in a fixed order, so the report depends
/// only on the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Res<SuiteReport> {
    let suite = cfg.validate()?;
    let start = Instant::now();
    let checks = with_pool(|| dispatch(suite, cfg))?;
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(SuiteReport::new(
        suite.name(),
        checks,
        config,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("STATICDEC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn dispatch(suite: Suite, cfg: &SuiteConfig) -> Res<Vec<Check>> {
    match suite {
        Suite::ProductIdentities => product_identities(cfg),
        Suite::LightlikeFormula => lightlike_formula(cfg),
        Suite::KillingProjection => field_projection(cfg, false),
        Suite::StaticProjection => field_projection(cfg, true),
        Suite::Dichotomy => dichotomy(cfg),
        Suite::FieldCatalog => field_catalog(cfg),
        Suite::WarpOde => warp_ode(cfg),
        Suite::NullPlanes => null_planes(cfg),
        Suite::Einstein => einstein(cfg),
        Suite::TodFamily => tod_family(cfg),
        Suite::FlowDecomposition => flow_decomposition(cfg),
        Suite::BianchiSanity => bianchi(cfg),
    }
}

fn space(cfg: &SuiteConfig) -> Res<&CatalogSpace> {
    cfg.space
        .as_ref()
        .ok_or_else(|| CliError::Config("this suite needs a `space`".into()))
}

fn field(cfg: &SuiteConfig) -> Res<StaticFieldFamily> {
    cfg.field
        .ok_or_else(|| CliError::Config("this suite needs a `field`".into()))
}

fn scheme() -> DerivativeScheme {
    DerivativeScheme::default()
}

/// Evaluates `f` on chunks of `points` in parallel and concatenates the
/// per-identity samples in input order.
fn chunked<F>(points: &[Point], f: F) -> Res<Vec<DefectReport>>
where
    F: Fn(&[Point]) -> Result<Vec<DefectReport>, GeometryError> + Sync,
{
    let parts: Vec<Vec<DefectReport>> = points
        .par_chunks(CHUNK)
        .map(&f)
        .collect::<Result<_, _>>()?;
    Ok(merge(parts))
}

/// Merges lists of reports with the same identities position by position.
fn merge(parts: Vec<Vec<DefectReport>>) -> Vec<DefectReport> {
    let mut it = parts.into_iter();
    let Some(first) = it.next() else {
        return Vec::new();
    };
    let mut acc: Vec<(String, Vec<(Point, f64)>, f64)> = first
        .into_iter()
        .map(|r| (r.identity, r.samples, r.tolerance))
        .collect();
    for part in it {
        for (slot, r) in acc.iter_mut().zip(part) {
            slot.1.extend(r.samples);
        }
    }
    acc.into_iter()
        .map(|(name, samples, tol)| DefectReport::from_samples(name, samples, tol))
        .collect()
}

fn check(cfg: &SuiteConfig, r: &DefectReport, default_tol: f64) -> Check {
    let tol = cfg.tolerance(&r.identity, default_tol);
    Check::from_report(&r.clone().with_tolerance(tol))
}

fn inset(i: Interval) -> Vec<f64> {
    let d = 0.01 * i.width();
    vec![i.lo + d, i.hi - d]
}

fn t_grid(i: Interval, n: usize) -> Vec<f64> {
    let e = inset(i);
    if n == 1 {
        vec![i.midpoint()]
    } else {
        linspace(e[0], e[1], n)
    }
}

fn param_draws(cfg: &SuiteConfig, n: usize, salt: u64) -> Res<Vec<[f64; 3]>> {
    let cube = DomainBox::cube(3, -2.0, 2.0);
    Ok(sampling::uniform(&cube, n, cfg.seed ^ salt)?
        .into_iter()
        .map(|p| [p[0], p[1], p[2]])
        .collect())
}

fn product_identities(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let spec = space(cfg)?.static_product()?;
    let pts = sampling::halton(&spec.domain(), cfg.grid.samples, cfg.seed)?;
    let s = scheme();
    let opts = ProductIdentityOptions::default();
    let reps = chunked(&pts, |c| static_product_residuals(&spec, &s, c, &opts))?;
    Ok(reps.iter().map(|r| check(cfg, r, 1e-4)).collect())
}

fn lightlike_formula(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let spec = space(cfg)?.static_product()?;
    let m = build_static(&spec)?;
    let n = spec.base.dim();
    let draws = cfg.grid.samples;
    let pts = sampling::uniform(&spec.domain(), draws, cfg.seed)?;
    let angle_box = DomainBox(vec![Interval::new(0.0, 2.0 * PI)]);
    let angles = sampling::uniform(&angle_box, draws, cfg.seed.wrapping_add(1))?;
    let s = scheme();
    let rows: Vec<(Point, f64, f64)> = pts
        .par_iter()
        .zip(angles.par_iter())
        .map(|(q, a)| -> Result<_, GeometryError> {
            let gl = spec.base.eval(&q[..n])?;
            let (e, _) = orthonormal_frame(&gl, s.degeneracy_floor)?;
            let (c, sn) = (a[0].cos(), a[0].sin());
            let v: Vec<f64> = (0..n).map(|i| c * e[0][i] + sn * e[1][i]).collect();
            let w: Vec<f64> = (0..n).map(|i| -sn * e[0][i] + c * e[1][i]).collect();
            let r = curluz_residual(&spec, &s, q, &v, &w)?;

            let f = spec.warp.eval(&q[..n]);
            let mut u = w.clone();
            u.push(1.0 / f);
            let mut vt = v.clone();
            vt.push(0.0);
            let plane = DegeneratePlane::new(&m, q.clone(), u, vt)?;
            let k = lightlike_sectional(&m, &s, &plane)?;
            let mut scale = 0.0f64;
            for c in [0.5, 2.0, -3.0] {
                let kc = lightlike_sectional(&m, &s, &plane.rescaled(c))?;
                let want = c * c * k;
                scale = scale.max((kc - want).abs() / want.abs().max(1.0));
            }
            Ok((q.clone(), r.residual, scale))
        })
        .collect::<Result<_, _>>()?;
    let formula = DefectReport::from_samples(
        "lightlike_formula",
        rows.iter().map(|(p, r, _)| (p.clone(), *r)).collect(),
        1e-4,
    );
    let scale = DefectReport::from_samples(
        "scale_law",
        rows.iter().map(|(p, _, s)| (p.clone(), *s)).collect(),
        1e-6,
    );
    Ok(vec![check(cfg, &formula, 1e-4), check(cfg, &scale, 1e-6)])
}

/// The field under test, with optional seeded parameter draws and the
/// optional `s ∂s` perturbation (`s` the second-to-last coordinate).
fn fields_under_test(cfg: &SuiteConfig, space: &CatalogSpace) -> Res<Vec<VectorFieldSpec>> {
    let base = field(cfg)?;
    let fams = match cfg.params.field_draws {
        Some(n) if n > 0 => param_draws(cfg, n, 0x5eed)?
            .into_iter()
            .map(|[a, b, c]| StaticFieldFamily::new(base.family, a, b, c))
            .collect(),
        _ => vec![base],
    };
    let dim = space.dim();
    fams.iter()
        .map(|f| {
            let v = catalog_field(space, f)?;
            Ok(match cfg.params.perturbation {
                Some(eps) if eps != 0.0 => {
                    let axis = dim - 2;
                    v.sum(&VectorFieldSpec::new(dim, move |p| {
                        let mut out = vec![0.0; p.len()];
                        out[axis] = eps * p[axis];
                        out
                    }))
                }
                _ => v,
            })
        })
        .collect()
}

fn field_checks(
    cfg: &SuiteConfig,
    space: &CatalogSpace,
    v: &VectorFieldSpec,
    with_static: bool,
) -> Result<Vec<DefectReport>, GeometryError> {
    let s = scheme();
    let m = space.metric()?;
    let spec = space.static_product()?;
    let pts = sampling::halton(m.domain(), cfg.grid.samples, cfg.seed)?;
    let mut out = vec![killing_defect(&m, &s, v, &pts, 1e-5)?];
    if with_static {
        out.push(frobenius_defect(&m, &s, v, &pts, 1e-8)?.normalized);
    }
    let nt = cfg.grid.t_samples;
    let nb = cfg.grid.samples.div_ceil(nt).max(1);
    let base = sampling::halton(spec.base.domain(), nb, cfg.seed.wrapping_add(7))?;
    let ts = t_grid(spec.t_domain, nt);
    let pr = projection_residuals(&spec, v, &s, &ts, &base, &ProjectionOptions::default())?;
    out.push(pr.r1);
    out.push(pr.r2);
    if with_static {
        out.push(pr.r3);
    }
    Ok(out)
}

fn field_projection(cfg: &SuiteConfig, with_static: bool) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let fields = fields_under_test(cfg, space)?;
    let parts: Vec<Vec<DefectReport>> = fields
        .par_iter()
        .map(|v| field_checks(cfg, space, v, with_static))
        .collect::<Result<_, _>>()?;
    Ok(merge(parts)
        .iter()
        .map(|r| {
            let d = if r.identity == "killing" { 1e-5 } else if r.identity == "frobenius" { 1e-8 } else { 1e-4 };
            check(cfg, r, d)
        })
        .collect())
}

fn base_grid(domain: &DomainBox, n: usize) -> Res<Vec<Point>> {
    let d = domain.dim();
    let per = ((n as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
    let counts = if d == 1 { vec![n] } else { vec![per; d] };
    Ok(tensor_grid(domain, &counts)?)
}

fn verdict_name(v: SliceVerdict) -> &'static str {
    match v {
        SliceVerdict::IdenticallyZero => "identically_zero",
        SliceVerdict::NowhereZero => "nowhere_zero",
        SliceVerdict::Mixed => "mixed",
    }
}

fn dichotomy(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let spec = space.static_product()?;
    let v = catalog_field(space, &field(cfg)?)?;
    let ts = match &cfg.params.t_values {
        Some(t) if !t.is_empty() => t.clone(),
        _ => t_grid(spec.t_domain, cfg.grid.t_samples),
    };
    let grid = base_grid(spec.base.domain(), cfg.grid.samples)?;
    let scan = dichotomy_scan(&spec, &v, &ts, &grid)?;
    let mut out: Vec<Check> = scan
        .verdicts
        .iter()
        .map(|(t, verdict)| {
            let mixed = f64::from(u8::from(*verdict == SliceVerdict::Mixed));
            Check::scalar(
                format!("slice[t={t}]:{}", verdict_name(*verdict)),
                mixed,
                0.0,
                vec![*t],
            )
        })
        .collect();
    if let Some(t0) = cfg.params.t0 {
        let p = proportionality_check(&spec, &v, t0, &ts, &grid)?;
        out.push(Check::scalar(
            "proportionality",
            p.max_relative_residual,
            cfg.tolerance("proportionality", PROPORTIONALITY_TOL),
            vec![t0],
        ));
    }
    Ok(out)
}

fn field_catalog(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let r = cfg.params.r.unwrap_or(1.0);
    let mut planes = Vec::new();
    for eps in [SignEpsilon::Plus, SignEpsilon::Minus] {
        planes.push((CatalogSpace::H2eps { eps, r }, FieldFamily::CoshPlane));
        planes.push((CatalogSpace::H2hatEps { eps, r }, FieldFamily::ExpPlane));
        planes.push((CatalogSpace::R2eps { eps }, FieldFamily::FlatPlane));
    }
    let draws = param_draws(cfg, cfg.grid.draws, 0xca7a)?;
    let jobs: Vec<(usize, [f64; 3])> = (0..planes.len())
        .flat_map(|i| draws.iter().map(move |d| (i, *d)))
        .collect();
    let results: Vec<(usize, Vec<DefectReport>)> = jobs
        .par_iter()
        .map(|&(i, [a, b, c])| -> Res<_> {
            let (space, fam) = &planes[i];
            let v = catalog_field(space, &StaticFieldFamily::new(*fam, a, b, c))?;
            let mut reps = field_checks(cfg, space, &v, true)?;
            reps.push(transversality(space, &v, cfg)?);
            Ok((i, reps))
        })
        .collect::<Res<_>>()?;
    let mut out = Vec::new();
    for (i, (space, fam)) in planes.iter().enumerate() {
        let parts: Vec<Vec<DefectReport>> = results
            .iter()
            .filter(|(j, _)| *j == i)
            .map(|(_, r)| r.clone())
            .collect();
        for r in merge(parts) {
            let name = format!("{}:{}:{}", fam.label(), space.name(), r.identity);
            let d = match r.identity.as_str() {
                "killing" => 1e-5,
                "frobenius" => 1e-8,
                "transversal" => 0.0,
                _ => 1e-4,
            };
            out.push(check(cfg, &r.renamed(name), d));
        }
    }
    Ok(out)
}

/// `0` if `V ∧ ∂t ≠ 0` somewhere on the sample grid (so `V` is not a
/// multiple of `∂t`), `1` otherwise.
fn transversality(space: &CatalogSpace, v: &VectorFieldSpec, cfg: &SuiteConfig) -> Res<DefectReport> {
    let m = space.metric()?;
    let pts = sampling::halton(m.domain(), cfg.grid.samples, cfg.seed)?;
    let n = m.dim();
    let best = pts
        .iter()
        .map(|p| {
            let c = v.eval(p);
            c[..n - 1].iter().fold(0.0f64, |a, x| a.max(x.abs()))
        })
        .fold(0.0f64, f64::max);
    let at = pts.first().cloned().unwrap_or_else(|| Point(vec![]));
    Ok(DefectReport::single(
        "transversal",
        at,
        if best > 1e-8 { 0.0 } else { 1.0 },
        0.0,
    ))
}

fn warp_ode(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let k = cfg.params.k.unwrap_or(1.0);
    let eps = cfg.params.eps.unwrap_or(SignEpsilon::Minus);
    let sols = ode_solution_catalog(k, eps);
    if k < 0.0 {
        return Ok(vec![Check::scalar(
            "negative_k_rejected",
            sols.len() as f64,
            0.0,
            vec![k],
        )]);
    }
    let grid = linspace(-2.0, 2.0, cfg.grid.samples);
    let s = scheme();
    let mut out = Vec::new();
    for sol in &sols {
        let r = ode_residuals(&sol.c_field(), &sol.h_field(), k, eps, &grid, &grid, &s)?;
        let cn = format!("c_residual[{}]", sol.label);
        let hn = format!("h_residual[{}]", sol.label);
        out.push(Check::scalar(&cn, r.c_residual, cfg.tolerance(&cn, 1e-10), vec![]));
        out.push(Check::scalar(&hn, r.h_residual, cfg.tolerance(&hn, 1e-10), vec![]));
    }
    Ok(out)
}

fn points_or_samples(cfg: &SuiteConfig, domain: &DomainBox) -> Res<Vec<Point>> {
    match &cfg.params.points {
        Some(p) if !p.is_empty() => Ok(p.iter().map(|x| Point(x.clone())).collect()),
        _ => Ok(sampling::halton(domain, cfg.grid.samples, cfg.seed)?),
    }
}

fn null_planes(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let m = space.metric()?;
    let pts = points_or_samples(cfg, m.domain())?;
    let s = scheme();
    let planes = cfg.grid.planes;
    let seed = cfg.seed;
    let scans: Vec<(Point, f64)> = pts
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<_, GeometryError> {
            let scan = null_curvature_scan(&m, &s, p, planes, seed.wrapping_add(i as u64))?;
            Ok((p.clone(), scan.min_abs))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    match cfg.params.lower_bound {
        Some(bound) => {
            let r = DefectReport::from_samples(
                "lightlike_lower_bound",
                scans.iter().map(|(p, k)| (p.clone(), (bound - k).max(0.0))).collect(),
                0.0,
            );
            out.push(check(cfg, &r, 0.0));
        }
        None => {
            let r = DefectReport::from_samples("flat_degenerate_plane", scans, 1e-4);
            out.push(check(cfg, &r, 1e-4));
        }
    }
    if let CatalogSpace::WarpedProduct { base, fiber, .. } = space {
        if base.dim() >= 1 && fiber.plane_warp().is_some() && cfg.params.lower_bound.is_none() {
            let nb = base.dim();
            let vals: Vec<(Point, f64)> = pts
                .par_iter()
                .map(|p| -> Result<_, GeometryError> {
                    let plane = warped_null_plane(&m, p, 0, nb, nb + 1)?;
                    Ok((p.clone(), lightlike_sectional(&m, &s, &plane)?))
                })
                .collect::<Result<_, _>>()?;
            let r = DefectReport::from_samples("warped_null_plane", vals, 1e-4);
            out.push(check(cfg, &r, 1e-4));
        }
    }
    Ok(out)
}

fn einstein(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let m = space.metric()?;
    let pts = sampling::halton(m.domain(), cfg.grid.samples, cfg.seed)?;
    let s = scheme();
    let fit = einstein_defect(&m, &s, &pts, 1e-4)?;
    let mut out = vec![check(cfg, &fit.report, 1e-4)];
    if let Some(chain) = &cfg.params.einstein {
        let at = pts.first().map(|p| p.0.clone()).unwrap_or_default();
        out.push(Check::scalar(
            "einstein_delta",
            fit.delta - chain.delta,
            cfg.tolerance("einstein_delta", 1e-3),
            at,
        ));
        let base_is_surface = matches!(space, CatalogSpace::WarpedProduct { base, .. } if base.dim() == 2);
        if base_is_surface {
            let spec = EinsteinChainSpec::from_catalog(space, chain.b_shift)?;
            let reps = chunked(&pts, |c| einstein_chain_residuals(&spec, chain, &s, c, 1e-4))?;
            for r in reps {
                let name = format!("chain:{}", r.identity);
                out.push(check(cfg, &r.renamed(name), 1e-4));
            }
        }
    }
    Ok(out)
}

fn default_tod_cases() -> Vec<TodCase> {
    [(2.0, -1.0), (1.0, 0.0), (1.0, 1.0)]
        .into_iter()
        .map(|(k1, k3)| TodCase {
            k1,
            k2: 0.0,
            k3,
            u_domain: Interval::new(-1.0, 1.0),
        })
        .collect()
}

fn tod_family(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let cases = cfg.params.tod.clone().unwrap_or_else(default_tod_cases);
    let s = scheme();
    cases
        .par_iter()
        .map(|c| -> Res<Check> {
            let m = tod_surface_metric(c.k1, c.k2, c.k3, c.u_domain, CATALOG_LINE)?;
            let pts = sampling::halton(m.domain(), cfg.grid.samples, cfg.seed)?;
            let mut vals = Vec::with_capacity(pts.len());
            for p in pts {
                let k = curvature_tensors(&m, &s, &p)?.scalar / 2.0;
                vals.push((p.clone(), k - tod_curvature(c.k2, c.k3, p[0])));
            }
            let name = format!("tod[k1={},k2={},k3={}]", c.k1, c.k2, c.k3);
            Ok(check(cfg, &DefectReport::from_samples(name, vals, 1e-4), 1e-4))
        })
        .collect()
}

/// Curve through `origin` tangent to `V^⊥` on a surface, parametrized by
/// coordinate arc length.
fn orthogonal_curve(m: &MetricField, v: &VectorFieldSpec, origin: Vec<f64>) -> Leaf {
    let (m, v) = (m.clone(), v.clone());
    let dir = move |x: &[f64]| -> Vec<f64> {
        let g = m.eval_unchecked(x);
        let c = v.eval(x);
        let w = [g[(0, 0)] * c[0] + g[(0, 1)] * c[1], g[(1, 0)] * c[0] + g[(1, 1)] * c[1]];
        let norm = w[0].hypot(w[1]).max(1e-300);
        vec![-w[1] / norm, w[0] / norm]
    };
    let params = vec![vec![-0.4], vec![-0.1], vec![0.0], vec![0.3]];
    Leaf::new(
        1,
        move |y| {
            let steps = (y[0].abs() / 1e-3).ceil() as usize;
            let mut x = origin.clone();
            if steps == 0 {
                return x;
            }
            let h = y[0] / steps as f64;
            let add = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
                a.iter().zip(b).map(|(p, q)| p + s * q).collect()
            };
            for _ in 0..steps {
                let k1 = dir(&x);
                let k2 = dir(&add(&x, 0.5 * h, &k1));
                let k3 = dir(&add(&x, 0.5 * h, &k2));
                let k4 = dir(&add(&x, h, &k3));
                for j in 0..2 {
                    x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
            x
        },
        params,
    )
}

fn flow_decomposition(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let m = space.metric()?;
    let n = m.dim();
    let origin = cfg
        .params
        .leaf_origin
        .clone()
        .unwrap_or_else(|| m.domain().center().0);
    if origin.len() != n {
        return Err(CliError::Config(format!(
            "leaf_origin has {} coordinates, the space has {n}",
            origin.len()
        )));
    }
    let (v, leaf) = match cfg.field {
        Some(f) => {
            if n != 2 {
                return Err(CliError::Config(
                    "leaves orthogonal to a catalog field are built on surfaces only".into(),
                ));
            }
            let v = catalog_field(space, &f)?;
            let leaf = orthogonal_curve(&m, &v, origin);
            (v, leaf)
        }
        None => {
            let CatalogSpace::DoublyWarped { base, .. } = space else {
                return Err(CliError::Config(
                    "without a field the suite flows ∂s on a doubly warped space".into(),
                ));
            };
            let sa = base.dim();
            let v = VectorFieldSpec::coordinate(n, sa);
            let s0 = origin[sa];
            let rest: Vec<f64> = origin
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != sa)
                .map(|(_, x)| *x)
                .collect();
            let local = DomainBox::new(rest.iter().map(|c| Interval::new(c - 0.5, c + 0.5)).collect())?;
            let params = sampling::halton(&local, cfg.grid.samples.min(8), cfg.seed)?
                .into_iter()
                .map(|p| p.0)
                .collect();
            let leaf = Leaf::new(
                n - 1,
                move |y| {
                    let mut x = y.to_vec();
                    x.insert(sa, s0);
                    x
                },
                params,
            );
            (v, leaf)
        }
    };
    let opts = FlowDecompositionOptions {
        flow: FlowConfig {
            step: cfg.params.flow_step.unwrap_or(1e-3),
            ..FlowConfig::default()
        },
        ..FlowDecompositionOptions::default()
    };
    let out = verify_flow_decomposition(&m, &v, &leaf, &opts)?;
    let at = leaf.params.first().cloned().unwrap_or_default();
    Ok(vec![
        check(cfg, &out.pullback, 1e-4),
        check(cfg, &out.warp_invariance, 1e-4),
        Check::scalar(
            "step_halving",
            out.halving_delta,
            cfg.tolerance("step_halving", 1e-6),
            at,
        ),
    ])
}

fn bianchi(cfg: &SuiteConfig) -> Res<Vec<Check>> {
    let space = space(cfg)?;
    let m = space.metric()?;
    let pts = sampling::halton(m.domain(), cfg.grid.samples, cfg.seed)?;
    let s = scheme();
    let names = [
        "first_bianchi",
        "riemann_antisymmetry",
        "christoffel_symmetry",
        "metric_compatibility",
        "ricci_symmetry",
    ];
    let defaults = [1e-4, 1e-10, 1e-12, 1e-6, 1e-6];
    let reps = chunked(&pts, |chunk| {
        let mut local: Vec<Vec<(Point, f64)>> = vec![Vec::new(); names.len()];
        for p in chunk {
            let c = curvature_tensors(&m, &s, p)?;
            let jet = metric_jet(&m, &s, p, false)?;
            let n = c.dim();
            let g = &c.christoffel;
            let mut d = [0.0f64; 5];
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let b = c.riemann(l, i, j, k) + c.riemann(l, j, k, i) + c.riemann(l, k, i, j);
                            d[0] = d[0].max(b.abs());
                            d[1] = d[1].max((c.riemann(l, i, j, k) + c.riemann(l, j, i, k)).abs());
                        }
                        d[2] = d[2].max((g.get(l, i, j) - g.get(l, j, i)).abs());
                        let mut rhs = 0.0;
                        for q in 0..n {
                            rhs += g.get(q, l, i) * jet.g[(q, j)] + g.get(q, l, j) * jet.g[(i, q)];
                        }
                        d[3] = d[3].max((jet.dg[l][(i, j)] - rhs).abs());
                    }
                }
            }
            d[4] = (&c.ricci - c.ricci.transpose()).abs().max();
            for (bucket, v) in local.iter_mut().zip(d) {
                bucket.push((p.clone(), v));
            }
        }
        Ok(names
            .iter()
            .zip(local)
            .zip(defaults)
            .map(|((n, l), t)| DefectReport::from_samples(*n, l, t))
            .collect())
    })?;
    Ok(reps
        .iter()
        .zip(defaults)
        .map(|(r, d)| check(cfg, r, d))
        .collect())
}

