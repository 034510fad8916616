//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any miss.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use selrisk_cli::repro::{self, ReproId, ReproOptions, Report};
use selrisk_core::bounds::{compute_bundle, inner_region, lower_bound_det_cone, marginalized_bound, BundleOptions};
use selrisk_core::geom2d::hausdorff_on_window;
use selrisk_core::markets::SegmentVertices;
use selrisk_core::riskstats::{es_empirical, es_normal, es_var_lognormal_mean_one};
use selrisk_core::selections::{audit, meetk_corner_points, GridSpec, Side};
use selrisk_core::{
    ExchangeCone2D, PortfolioKind, RiskProfile, RiskRegion2D, RiskSpec, ScenarioEnsemble, SetPortfolio,
    Strategy as Sel, Vec2, WeightedSample, Window,
};

const CASES: u32 = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(label: &str, o: &Outcome) {
    println!("{} {label}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn runner() -> TestRunner {
    let cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn es(alpha: f64) -> RiskProfile {
    RiskProfile::identical(RiskSpec::expected_shortfall(alpha).unwrap(), 2)
}

fn from_report(rep: &Report, limit_s: f64) -> Outcome {
    let misses: Vec<String> = rep
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {} (want {} ± {})", c.name, c.computed, c.expected, c.tol))
        .collect();
    let fast = rep.seconds < limit_s;
    let mut detail = format!("{} checks, {:.2} s (limit {limit_s} s)", rep.checks.len(), rep.seconds);
    if !misses.is_empty() {
        detail.push_str(&format!("; misses: {}", misses.join("; ")));
    }
    Outcome { pass: misses.is_empty() && fast, detail }
}

fn run_repro(id: ReproId, limit_s: f64) -> Outcome {
    match repro::run(id, &ReproOptions::default()) {
        Ok(rep) => from_report(&rep, limit_s),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn suite(cases: u32, result: Result<(), String>, t0: Instant) -> Outcome {
    let secs = t0.elapsed().as_secs_f64();
    match result {
        Ok(()) => Outcome { pass: true, detail: format!("{cases} cases, {secs:.2} s") },
        Err(e) => Outcome { pass: false, detail: format!("{e} ({secs:.2} s)") },
    }
}

fn run_suite<S: proptest::strategy::Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    let t0 = Instant::now();
    let res = runner().run(&strategy, test).map_err(|e| e.to_string());
    suite(CASES, res, t0)
}

fn points(max: usize) -> impl proptest::strategy::Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| Vec2::new(x, y)), 2..=max)
}

fn ensemble(max: usize) -> impl proptest::strategy::Strategy<Value = ScenarioEnsemble> {
    points(max).prop_flat_map(|pts| {
        let n = pts.len();
        prop::collection::vec(0.2f64..4.0, n)
            .prop_map(move |rates| ScenarioEnsemble::from_points(&pts, Some(rates), None).unwrap())
    })
}

fn kinds() -> impl proptest::strategy::Strategy<Value = PortfolioKind> {
    prop_oneof![
        (1.0f64..6.0, 1.0f64..6.0).prop_map(|(a, b)| PortfolioKind::ConeDet { pi12: a, pi21: b }),
        Just(PortfolioKind::ConeHalfplaneRandom),
        (0.2f64..2.0, 0.2f64..2.0).prop_map(|(a, b)| PortfolioKind::LiquidityCapped { cap: [a, b] }),
        (0.1f64..2.0).prop_map(|r| PortfolioKind::Ball { radius: r }),
        Just(PortfolioKind::SegmentHull { vertices: SegmentVertices::Swap }),
    ]
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// Strategies whose selections commute with cash shifts and positive scaling.
fn equivariant_strategies() -> Vec<Sel> {
    let t = GridSpec::Explicit { values: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0] };
    vec![
        Sel::Identity,
        Sel::QuantileShift { side: Side::Both, t_grid: t.clone() },
        Sel::TwoSided { t_grid: t },
        Sel::MeetkCorners,
    ]
}

fn same_region(a: &RiskRegion2D, b: &RiskRegion2D, tol: f64) -> bool {
    a.contains_region(b, tol) && b.contains_region(a, tol)
}

fn coherence() -> Outcome {
    let strat = (ensemble(12), ensemble(12), 1.0f64..6.0, 0.05f64..0.9, -3.0f64..3.0, -3.0f64..3.0, 0.1f64..10.0);
    run_suite(strat, |(e, f, pi, alpha, a1, a2, c)| {
        let k = ExchangeCone2D::symmetric(pi).unwrap();
        let kind = PortfolioKind::ConeDet { pi12: pi, pi21: pi };
        let p = es(alpha);
        let st = equivariant_strategies();
        let inner = |e: &ScenarioEnsemble| inner_region(&SetPortfolio::new(e, kind.clone()).unwrap(), &st, &p).unwrap();
        let r = inner(&e);

        // cash: R(X + a) = R(X) - a
        let shifted = inner(&e.shifted(&[a1, a2]));
        check(same_region(&shifted, &r.translate(Vec2::new(-a1, -a2)), 1e-9), || "cash invariance".into())?;
        // homogeneity: R(cX) = c R(X)
        let scaled = inner(&e.scaled(c));
        check(same_region(&scaled, &r.scale(c), 1e-9 * c.max(1.0)), || "positive homogeneity".into())?;

        // monotonicity: X ≤ X + D with D ≥ 0, so every inner point of X lies in the outer bound of X + D
        let bumped: Vec<f64> = e.gains().iter().zip(f.gains().iter().cycle()).map(|(x, d)| x + d.abs()).collect();
        let up = e.with_gains(bumped).unwrap();
        let outer_up = lower_bound_det_cone(&up, &k, &p).unwrap();
        for v in r.vertices() {
            check(outer_up.contains_tol(*v, 1e-9), || format!("monotonicity probe {v:?}"))?;
        }

        // subadditivity: inner(X) + inner(Y) ⊆ outer(X + Y) on a common scenario set
        let n = e.n().min(f.n());
        let ex = ScenarioEnsemble::from_points(&e.points()[..n], None, None).unwrap();
        let fy = ScenarioEnsemble::from_points(&f.points()[..n], None, None).unwrap();
        let sum: Vec<Vec2> = ex.points().iter().zip(fy.points()).map(|(x, y)| *x + y).collect();
        let sum = ScenarioEnsemble::from_points(&sum, None, None).unwrap();
        let outer_sum = lower_bound_det_cone(&sum, &k, &p).unwrap();
        let (rx, ry) = (inner(&ex), inner(&fy));
        for v in rx.vertices() {
            for w in ry.vertices() {
                check(outer_sum.contains_tol(*v + *w, 1e-9), || format!("subadditivity probe {v:?} + {w:?}"))?;
            }
        }
        Ok(())
    })
}

fn sandwich() -> Outcome {
    run_suite((ensemble(10), kinds(), 0.05f64..0.5), |(e, kind, alpha)| {
        let port = SetPortfolio::new(&e, kind.clone()).unwrap();
        let b = compute_bundle(&port, &es(alpha), &BundleOptions::default())
            .map_err(|err| TestCaseError::fail(format!("{kind:?}: {err}")))?;
        check(b.inner.contains_region(&b.marginal, 1e-9), || format!("{kind:?}: marginal not inside inner"))?;
        let outer = b.outer.region().expect("planar");
        check(outer.contains_region(&b.inner, 1e-9), || format!("{kind:?}: inner not inside outer"))
    })
}

fn comonotonic() -> Outcome {
    let strat = (prop::collection::vec(-5.0f64..5.0, 2..15), 0.1f64..3.0, -2.0f64..2.0, 1.0f64..6.0, 1.0f64..6.0, 0.05f64..0.9);
    run_suite(strat, |(xs, slope, icpt, p12, p21, alpha)| {
        // X₂ = g(X₁) with g increasing
        let pts: Vec<Vec2> = xs.iter().map(|x| Vec2::new(*x, slope * x + icpt + 0.1 * x.powi(3))).collect();
        let e = ScenarioEnsemble::from_points(&pts, None, None).unwrap();
        let k = ExchangeCone2D::new(p12, p21).unwrap();
        let p = es(alpha);
        let m = marginalized_bound(&e, &p, &k.solvency_cone()).unwrap();
        let o = lower_bound_det_cone(&e, &k, &p).unwrap();
        let d = hausdorff_on_window(&m, &o, &Window::centered(50.0)).unwrap();
        check(d <= 1e-9, || format!("Hausdorff {d:e}"))
    })
}

fn meetk() -> Outcome {
    run_suite((points(15), 1.0f64..6.0, 1.0f64..6.0, 0.05f64..0.9), |(pts, p12, p21, alpha)| {
        let e = ScenarioEnsemble::from_points(&pts, None, None).unwrap();
        let k = ExchangeCone2D::new(p12, p21).unwrap();
        let p = es(alpha);
        let port = SetPortfolio::new(&e, PortfolioKind::ConeDet { pi12: p12, pi21: p21 }).unwrap();
        let b = compute_bundle(&port, &p, &BundleOptions::default()).unwrap();
        let outer = b.outer.region().expect("planar");
        let [x1, x2] = meetk_corner_points(&e, &k, &p).unwrap();
        for (u, x) in [(k.a2().normalized(), x1), (k.a1().normalized(), x2)] {
            let (i, o) = (b.inner.scalarize(u), outer.scalarize(u));
            check((i - o).abs() <= 1e-9, || format!("inner {i} outer {o} at {u:?}"))?;
            check((x.dot(u) - o).abs() <= 1e-9, || format!("corner {x:?} off the boundary at {u:?}"))?;
        }
        Ok(())
    })
}

fn permutation() -> Outcome {
    let strat = (ensemble(10), kinds(), 0.05f64..0.5).prop_flat_map(|(e, kind, alpha)| {
        let n = e.n();
        (Just(e), Just(kind), Just(alpha), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    run_suite(strat, |(e, kind, alpha, perm)| {
        let opts = BundleOptions::default();
        let a = compute_bundle(&SetPortfolio::new(&e, kind.clone()).unwrap(), &es(alpha), &opts).unwrap();
        let b = compute_bundle(&SetPortfolio::new(&e.permuted(&perm), kind.clone()).unwrap(), &es(alpha), &opts).unwrap();
        let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        check(ja == jb, || format!("{kind:?}: bundles differ under {perm:?}"))
    })
}

/// Plug-in ES with its asymptotic standard error `sd((L - v)₊) / (α √n)`.
fn es_with_se(values: Vec<f64>, alpha: f64) -> (f64, f64) {
    let n = values.len() as f64;
    // the left α-quantile, located without a full sort
    let mut scratch = values.clone();
    let k = ((alpha * n).ceil() as usize).max(1) - 1;
    let q = *scratch.select_nth_unstable_by(k, f64::total_cmp).1;
    let est = es_empirical(&WeightedSample::uniform(values).unwrap(), alpha).unwrap();
    let (sum, sq) = scratch.iter().fold((0.0, 0.0), |(s, s2), x| {
        let t = (q - x).max(0.0);
        (s + t, s2 + t * t)
    });
    let mean = sum / n;
    let var = (sq / n - mean * mean) * n / (n - 1.0);
    (est, var.sqrt() / (alpha * n.sqrt()))
}

fn es_convergence() -> Outcome {
    const N: usize = 1_000_000;
    let strat = (any::<u64>(), -1.0f64..1.0, 0.3f64..3.0, 0.1f64..0.8, 0.01f64..0.25);
    let mut cfg = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    cfg.max_shrink_iters = 0;
    let t0 = Instant::now();
    let mut r = TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let res = r
        .run(&strat, |(seed, mu, sd, vol, alpha)| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let z: Vec<f64> = (0..N).map(|_| StandardNormal.sample(&mut rng)).collect();
            let normal = z.iter().map(|z| mu + sd * z).collect();
            let (got, se) = es_with_se(normal, alpha);
            let want = es_normal(mu, sd, alpha).unwrap();
            check((got - want).abs() <= 4.0 * se, || format!("normal ES {got} vs {want}, se {se:e}"))?;
            let rate = z.iter().map(|z| (vol * z - 0.5 * vol * vol).exp()).collect();
            let (got, se) = es_with_se(rate, alpha);
            let want = es_var_lognormal_mean_one(vol, alpha).unwrap().es_pi;
            check((got - want).abs() <= 4.0 * se, || format!("lognormal ES {got} vs {want}, se {se:e}"))
        })
        .map_err(|e| e.to_string());
    suite(CASES, res, t0)
}

fn audits() -> Outcome {
    run_suite((ensemble(10), kinds(), 0.05f64..0.5), |(e, kind, alpha)| {
        let port = SetPortfolio::new(&e, kind.clone()).unwrap();
        let p = es(alpha);
        for s in Sel::defaults_for(port.kind()) {
            for fam in s.families(&port, &p).unwrap() {
                for m in 0..fam.len() {
                    let sel = fam.member(m);
                    check(audit(&port, &sel).is_ok(), || format!("{kind:?}: {} member {m}", sel.label()))?;
                }
            }
        }
        Ok(())
    })
}

fn determinism(dir: &Path) -> Outcome {
    let t0 = Instant::now();
    let configs = [
        ("cone", r#"{"alpha":0.05,"portfolio":{"kind":"cone-det","pi12":1.5,"pi21":1.5},"data":{"generate":{"n":2000,"seed":7}}}"#),
        (
            "random",
            r#"{"alpha":0.05,"portfolio":{"kind":"cone-halfplane-random"},"data":{"generate":{"n":2000,"seed":7,"rate":{"mean":1.0,"volatility":0.4}}}}"#,
        ),
        ("ball", r#"{"alpha":0.1,"portfolio":{"kind":"ball","radius":1.0},"data":{"generate":{"n":2000,"seed":7}}}"#),
    ];
    let mut runs = 0;
    for (name, text) in configs {
        let cfg = dir.join(format!("{name}.json"));
        fs::write(&cfg, text).unwrap();
        let mut reference: Option<Vec<u8>> = None;
        for (rep, threads) in ["1", "2", "4", "1", "3"].into_iter().enumerate() {
            let out = dir.join(format!("{name}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_selrisk"))
                .args(["risk", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .env("SELRISK_THREADS", threads)
                .output()
                .unwrap();
            if !status.status.success() {
                let err = String::from_utf8_lossy(&status.stderr).into_owned();
                return Outcome { pass: false, detail: format!("{name} with {threads} threads failed: {err}") };
            }
            let bytes = fs::read(out.join("bundle.json")).unwrap();
            runs += 1;
            match &reference {
                None => reference = Some(bytes),
                Some(r) if *r != bytes => {
                    return Outcome { pass: false, detail: format!("{name}: bundle differs with {threads} threads") }
                }
                Some(_) => {}
            }
        }
    }
    Outcome { pass: true, detail: format!("{runs} runs byte-identical, {:.2} s", t0.elapsed().as_secs_f64()) }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |label: &str, o: Outcome| {
        line(label, &o);
        all &= o.pass;
    };

    report("[1] non-margin exact example", run_repro(ReproId::Nonmargin, 1.0));
    report("[2] intro reserves", run_repro(ReproId::Intro, 60.0));
    report("[3] lognormal cone sandwich", run_repro(ReproId::Frictionless, 30.0));
    report("[4] unit-ball example", run_repro(ReproId::Ball, f64::INFINITY));

    let t5 = Instant::now();
    report("[5a] coherence axioms on inner regions", coherence());
    report("[5b] sandwich marginal ⊆ inner ⊆ outer, all kinds", sandwich());
    report("[5c] comonotonic outer = marginal", comonotonic());
    report("[5d] meetk corners on both boundaries", meetk());
    report("[5e] permutation invariance", permutation());
    report("[5f] ES convergence at n = 10^6", es_convergence());
    report("[5g] selection audit, every strategy and kind", audits());
    let secs = t5.elapsed().as_secs_f64();
    report("[5] property suites total time", Outcome { pass: secs < 60.0, detail: format!("{secs:.2} s (limit 60 s)") });

    let tmp = tempfile::tempdir().unwrap();
    report("[6] determinism across thread counts", determinism(tmp.path()));

    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
