//! End-to-end acceptance run: one line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use staticdec::{run_suite, Suite, SuiteConfig, SuiteReport};
use staticdec_core::catalog::{CatalogSpace, FieldFamily};
use staticdec_core::manifold::curvature_tensors;
use staticdec_core::null::null_curvature_scan;
use staticdec_core::sampling::halton;
use staticdec_core::{DerivativeScheme, SignEpsilon};

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> SuiteConfig {
    SuiteConfig::load(&configs().join(name)).expect("shipped config parses")
}

fn from_value(v: Value) -> SuiteConfig {
    SuiteConfig::from_json(&v.to_string()).expect("inline config parses")
}

fn run(cfg: &SuiteConfig) -> Result<SuiteReport, String> {
    run_suite(cfg).map_err(|e| e.to_string())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn failing(r: &SuiteReport) -> String {
    r.checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}={:.3e}", c.name, c.sup_defect))
        .collect::<Vec<_>>()
        .join(", ")
}

fn require_pass(r: &SuiteReport, what: &str) -> Result<(), String> {
    require(r.pass, || format!("{what}: {}", failing(r)))
}

fn worst(r: &SuiteReport) -> f64 {
    r.checks.iter().map(|c| c.sup_defect).fold(0.0, f64::max)
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    require(e < limit, || format!("took {e:?}, limit {limit:?}"))
}

fn static_product_identities() -> Outcome {
    let start = Instant::now();
    let warps = [
        json!({"kind": "cosh", "coef": 1.0}),
        json!({"kind": "exp", "coef": 1.0}),
        json!({"kind": "constant", "value": 1.0}),
    ];
    let mut sup = 0.0f64;
    let mut runs = 0;
    for warp in &warps {
        for eps in [1, -1] {
            let cfg = from_value(json!({
                "suite": "lemma1",
                "space": {"kind": "static", "base": {"kind": "h2eps", "eps": -1, "r": 1.0},
                          "warp": warp, "eps": eps},
                "grid": {"samples": 100},
                "seed": 17
            }));
            let r = run(&cfg)?;
            require(r.checks.len() == 6, || format!("expected six identities, got {}", r.checks.len()))?;
            require(r.checks.iter().all(|c| c.tolerance == 1e-4), || "tolerance is not 1e-4".into())?;
            require_pass(&r, &format!("warp {warp}, eps {eps}"))?;
            sup = sup.max(worst(&r));
            runs += 1;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{runs} products, sup residual {sup:.2e}, {:?}", start.elapsed()))
}

fn model_plane_curvature() -> Outcome {
    let scheme = DerivativeScheme::default();
    let mut sup_curved = 0.0f64;
    let mut sup_flat = 0.0f64;
    for eps in [SignEpsilon::Plus, SignEpsilon::Minus] {
        for r in [0.5, 1.0, 2.0] {
            for space in [CatalogSpace::H2eps { eps, r }, CatalogSpace::H2hatEps { eps, r }] {
                let analytic = space.metric().map_err(|e| e.to_string())?;
                for m in [analytic.clone(), analytic.without_analytic_derivatives()] {
                    let pts = halton(m.domain(), 100, 3).map_err(|e| e.to_string())?;
                    for p in &pts {
                        let k = curvature_tensors(&m, &scheme, p).map_err(|e| e.to_string())?.scalar / 2.0;
                        let d = (k + r * r).abs();
                        require(d <= 1e-4, || format!("{} at {:?}: K = {k}", space.name(), p.0))?;
                        sup_curved = sup_curved.max(d);
                    }
                }
            }
        }
        let flat = CatalogSpace::R2eps { eps }.metric().map_err(|e| e.to_string())?;
        for m in [flat.clone(), flat.without_analytic_derivatives()] {
            for p in &halton(m.domain(), 100, 3).map_err(|e| e.to_string())? {
                let k = curvature_tensors(&m, &scheme, p).map_err(|e| e.to_string())?.scalar / 2.0;
                require(k.abs() <= 1e-6, || format!("flat plane K = {k}"))?;
                sup_flat = sup_flat.max(k.abs());
            }
        }
    }
    Ok(format!("|K + r²| ≤ {sup_curved:.2e}, flat |K| ≤ {sup_flat:.2e}"))
}

fn lightlike_formula() -> Outcome {
    let second = from_value(json!({
        "suite": "lemma2",
        "space": {"kind": "static", "base": {"kind": "h2eps", "eps": 1, "r": 0.5},
                  "warp": {"kind": "cosh", "coef": 0.7}, "eps": -1},
        "grid": {"samples": 50},
        "seed": 8
    }));
    let mut sup = 0.0f64;
    for cfg in [load("lemma2.json"), second] {
        require(cfg.grid.samples == 50, || "expected 50 draws".into())?;
        let r = run(&cfg)?;
        require_pass(&r, "lightlike formula")?;
        let scale = r.checks.iter().find(|c| c.name == "scale_law").ok_or("no scale_law")?;
        require(scale.tolerance == 1e-6, || "scale law tolerance".into())?;
        sup = sup.max(worst(&r));
    }
    Ok(format!("2 configurations × 50 draws, sup residual {sup:.2e}"))
}

fn killing_and_static_projections() -> Outcome {
    let start = Instant::now();
    let r = run(&load("prop45-catalog.json"))?;
    require(r.config["grid"]["draws"] == json!(5), || "expected 5 draws".into())?;
    require_pass(&r, "catalog fields")?;
    for fam in FieldFamily::ALL {
        for check in ["killing", "frobenius", "projection_r1", "projection_r2", "projection_r3"] {
            let n = r
                .checks
                .iter()
                .filter(|c| c.name.starts_with(fam.label()) && c.name.ends_with(check))
                .count();
            require(n == 2, || format!("{} {check}: {n} checks", fam.label()))?;
        }
    }
    let frob = r
        .checks
        .iter()
        .filter(|c| c.name.ends_with("frobenius"))
        .map(|c| c.sup_defect)
        .fold(0.0, f64::max);
    require(frob == 0.0, || format!("frobenius defect {frob}"))?;

    let p = run(&load("prop31-perturbed.json"))?;
    require(!p.pass, || "perturbation not detected".into())?;
    let detected = p.checks.iter().filter(|c| c.sup_defect > 0.05).count();
    require(detected > 0, || "no residual above 0.05".into())?;
    let r1 = p.checks.iter().find(|c| c.name == "projection_r1").ok_or("r1 not reported")?;
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "{} catalog checks pass (frobenius 0), perturbation flagged by {detected} residuals > 0.05 (r1 = {:.2e}), {:?}",
        r.checks.len(),
        r1.sup_defect,
        start.elapsed()
    ))
}

fn slice_dichotomy() -> Outcome {
    let r = run(&load("prop42-scan.json"))?;
    require_pass(&r, "dichotomy")?;
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    require(names[0] == "slice[t=0]:identically_zero", || format!("{names:?}"))?;
    require(
        names[1] == format!("slice[t={FRAC_PI_2}]:nowhere_zero"),
        || format!("{names:?}"),
    )?;
    let mut scanned = 0;
    for (space, fam) in [
        (json!({"kind": "h2eps", "eps": -1, "r": 1.0}), "cosh_plane"),
        (json!({"kind": "h2eps", "eps": 1, "r": 1.0}), "cosh_plane"),
        (json!({"kind": "h2hat_eps", "eps": -1, "r": 1.0}), "exp_plane"),
        (json!({"kind": "h2hat_eps", "eps": 1, "r": 1.0}), "exp_plane"),
        (json!({"kind": "r2eps", "eps": -1}), "flat_plane"),
    ] {
        for (a, b, c) in [(1.0, 0.3, -0.5), (-1.2, 1.1, 0.4), (0.6, -0.9, 1.7)] {
            let cfg = from_value(json!({
                "suite": "prop42-scan",
                "space": space,
                "field": {"family": fam, "alpha": a, "beta": b, "gamma": c},
                "grid": {"samples": 50, "t_samples": 9}
            }));
            let r = run(&cfg)?;
            require(
                r.checks.iter().all(|c| !c.name.ends_with("mixed")),
                || format!("mixed verdict for {fam} on {space}"),
            )?;
            scanned += 1;
        }
    }
    Ok(format!("t=0 zero, t=π/2 nowhere zero; {scanned} catalog fields scanned, no mixed slice"))
}

fn warp_ode() -> Outcome {
    let mut n = 0;
    let mut sup = 0.0f64;
    for eps in [1, -1] {
        for k in [0.0, 0.25, 1.0, 4.0] {
            let cfg = from_value(json!({"suite": "ode", "params": {"k": k, "eps": eps}}));
            let r = run(&cfg)?;
            require(!r.checks.is_empty(), || format!("no solutions for k={k}"))?;
            require_pass(&r, &format!("k={k}, eps={eps}"))?;
            sup = sup.max(worst(&r));
            n += r.checks.len() / 2;
        }
        let r = run(&from_value(json!({"suite": "ode", "params": {"k": -1.0, "eps": eps}})))?;
        require(
            r.pass && r.checks.len() == 1 && r.checks[0].sup_defect == 0.0,
            || "k < 0 produced solutions".into(),
        )?;
    }
    Ok(format!("{n} solution pairs, sup residual {sup:.2e}; k<0 empty"))
}

fn degenerate_planes() -> Outcome {
    let r = run(&load("cor34-null.json"))?;
    require_pass(&r, "warped product")?;
    let flat = r.checks.iter().map(|c| c.sup_defect).fold(0.0, f64::max);

    let b = run(&load("cor34-null-bound.json"))?;
    require_pass(&b, "cosh·cosh warp")?;
    let cfg = load("cor34-null-bound.json");
    let m = cfg.space.as_ref().unwrap().metric().map_err(|e| e.to_string())?;
    let scan = null_curvature_scan(&m, &DerivativeScheme::default(), &[0.0, 0.0, 0.0], cfg.grid.planes, cfg.seed)
        .map_err(|e| e.to_string())?;
    require(scan.min_abs >= 0.5, || format!("min |K_u| = {}", scan.min_abs))?;
    Ok(format!(
        "f = λc: min |K_u| ≤ {flat:.2e}; cosh·cosh origin: min |K_u| = {:.4} over {} planes",
        scan.min_abs, scan.planes
    ))
}

fn flow_decomposition() -> Outcome {
    let mut parts = Vec::new();
    for name in ["flow-decomp.json", "flow-decomp-field.json"] {
        let cfg = load(name);
        require(cfg.params.flow_step == Some(1e-3), || "RK4 step is not 1e-3".into())?;
        let r = run(&cfg)?;
        require_pass(&r, name)?;
        let halving = r.checks.iter().find(|c| c.name == "step_halving").ok_or("no step_halving")?;
        require(halving.tolerance == 1e-6, || "halving tolerance".into())?;
        parts.push(format!("{}: sup {:.2e}", cfg.space.as_ref().unwrap().name(), worst(&r)));
    }
    Ok(parts.join("; "))
}

fn einstein_products() -> Outcome {
    let start = Instant::now();
    let r = run(&load("thm52-einstein.json"))?;
    require_pass(&r, "H² × AdS²")?;
    let delta = r.checks.iter().find(|c| c.name == "einstein_delta").ok_or("no δ check")?;
    require(delta.tolerance == 1e-3, || "δ tolerance".into())?;
    for id in [
        "static_einstein",
        "base_einstein",
        "lambda_laplacian",
        "lambda_hessian",
        "lambda_trace",
        "lambda_curvature",
    ] {
        let name = format!("chain:{id}");
        require(r.checks.iter().any(|c| c.name == name), || format!("{name} missing"))?;
    }
    let t = run(&SuiteConfig::for_suite(Suite::TodFamily))?;
    require_pass(&t, "tod family")?;
    require(t.checks.len() == 3, || "expected k3 ∈ {−1, 0, 1}".into())?;
    let mixed = from_value(json!({
        "suite": "thm52-einstein",
        "space": {"kind": "direct_product_surfaces",
                  "first": {"kind": "h2eps", "eps": 1, "r": 1.0},
                  "second": {"kind": "r2eps", "eps": -1}}
    }));
    let m = run(&mixed)?;
    require(!m.pass, || "H² × flat plane reported Einstein".into())?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "einstein defect {:.2e}, |δ + 1| = {:.2e}, {} chain residuals pass, tod sup {:.2e}, {:?}",
        r.checks[0].sup_defect,
        delta.sup_defect,
        r.checks.len() - 2,
        worst(&t),
        start.elapsed()
    ))
}

fn strip_ms(json: &str) -> &str {
    &json[..json.rfind("\"ms\"").expect("ms key")]
}

fn determinism() -> Outcome {
    let mut files: Vec<PathBuf> = std::fs::read_dir(configs())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut suites = std::collections::BTreeSet::new();
    for f in &files {
        let out = |threads: &str| -> Result<String, String> {
            let o = Command::new(env!("CARGO_BIN_EXE_staticdec"))
                .args(["--config", f.to_str().unwrap()])
                .env("STATICDEC_THREADS", threads)
                .output()
                .map_err(|e| e.to_string())?;
            String::from_utf8(o.stdout).map_err(|e| e.to_string())
        };
        let (a, b) = (out("1")?, out("3")?);
        require(!a.is_empty() && strip_ms(&a) == strip_ms(&b), || format!("{} differs", f.display()))?;
        suites.insert(SuiteReport::from_json(a.trim()).map_err(|e| e.to_string())?.suite);
    }
    require(suites.len() == Suite::ALL.len(), || format!("only {} suites covered", suites.len()))?;
    Ok(format!("{} configs, all {} suites byte-identical across reruns", files.len(), suites.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("static product identities", static_product_identities),
        ("model plane curvature", model_plane_curvature),
        ("lightlike curvature formula", lightlike_formula),
        ("Killing and static projections", killing_and_static_projections),
        ("slice dichotomy", slice_dichotomy),
        ("warp ODE catalog", warp_ode),
        ("degenerate plane curvature", degenerate_planes),
        ("flow decomposition", flow_decomposition),
        ("Einstein products and Tod family", einstein_products),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
