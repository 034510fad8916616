//! Pinned reproductions of the worked examples.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use selrisk_core::bounds::{cone_risk_bounds, RateModel};
use selrisk_core::riskstats::{es_normal, RiskSpec};
use selrisk_core::scenarios::{generate, GainModel, GenSpec, LognormalRate};
use selrisk_core::selections::{
    audit, axis_transfers, boost_worst_coordinate, frictionless_projection, liquidity_capped_projection,
    meetk_corner_points, meetk_selections,
};
use selrisk_core::{
    compute_bundle, BundleOptions, Error, ExchangeCone2D, PortfolioKind, Result, RiskBundle, RiskProfile,
    ScenarioEnsemble, SelectionMatrix, SetPortfolio, Strategy, Vec2, Window,
};

use crate::output::{boundary_csv, to_json, write_text};

pub const MC_N: usize = 1_000_000;
pub const SMALL_N: usize = 1000;
pub const INTRO_SEED: u64 = 20;
pub const TWO_CURRENCY_SEED: u64 = 21;
pub const NORMCONE_SEED: u64 = 22;
pub const LIQUIDITY_SEED: u64 = 23;
pub const BALL_SEED: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproId {
    Intro,
    Nonmargin,
    Normcone,
    Frictionless,
    Liquidity,
    Ball,
}

impl ReproId {
    pub const ALL: [ReproId; 6] =
        [ReproId::Intro, ReproId::Nonmargin, ReproId::Normcone, ReproId::Frictionless, ReproId::Liquidity, ReproId::Ball];

    pub fn name(self) -> &'static str {
        match self {
            ReproId::Intro => "intro",
            ReproId::Nonmargin => "nonmargin",
            ReproId::Normcone => "normcone",
            ReproId::Frictionless => "frictionless",
            ReproId::Liquidity => "liquidity",
            ReproId::Ball => "ball",
        }
    }
}

impl FromStr for ReproId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReproId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown example `{s}`")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub id: ReproId,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub seconds: f64,
}

impl Report {
    fn new(id: ReproId) -> Self {
        Self { id, checks: vec![], seconds: 0.0 }
    }

    fn check(&mut self, name: impl Into<String>, computed: f64, expected: f64, tol: f64) {
        let pass = (computed - expected).abs() <= tol;
        self.checks.push(Check { name: name.into(), computed, expected, tol, pass });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.check(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ({:.2} s)", self.id.name(), self.seconds)?;
        writeln!(f, "{:<34} {:>14} {:>14} {:>9} {:>10}  status", "check", "computed", "expected", "tol", "diff")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<34} {:>14.7} {:>14.7} {:>9.1e} {:>10.2e}  {}",
                c.name,
                c.computed,
                c.expected,
                c.tol,
                (c.computed - c.expected).abs(),
                if c.pass { "ok" } else { "MISS" }
            )?;
        }
        Ok(())
    }
}

/// Overrides of the pinned settings.
#[derive(Debug, Clone, Default)]
pub struct ReproOptions {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn run(id: ReproId, opts: &ReproOptions) -> Result<Report> {
    let t0 = Instant::now();
    let mut report = match id {
        ReproId::Intro => intro(opts)?,
        ReproId::Nonmargin => nonmargin(opts)?,
        ReproId::Normcone => normcone(opts)?,
        ReproId::Frictionless => frictionless(opts)?,
        ReproId::Liquidity => liquidity(opts)?,
        ReproId::Ball => ball(opts)?,
    };
    report.seconds = t0.elapsed().as_secs_f64();
    if let Some(dir) = &opts.out {
        write_text(&dir.join(id.name()).join("report.json"), &to_json(&report)?)?;
    }
    Ok(report)
}

fn es(alpha: f64) -> RiskProfile {
    RiskProfile::identical(RiskSpec::expected_shortfall(alpha).expect("pinned level"), 2)
}

fn normal_gains(mean: f64) -> GainModel {
    GainModel::BivariateNormal { mean: [mean, mean], variances: [1.0, 1.0], correlation: 0.0 }
}

fn write_bundle(opts: &ReproOptions, id: ReproId, b: &RiskBundle, window: Option<&Window>) -> Result<()> {
    let Some(out) = &opts.out else { return Ok(()) };
    let dir = out.join(id.name());
    write_text(&dir.join("bundle.json"), &to_json(b)?)?;
    write_text(&dir.join("inner_boundary.csv"), &boundary_csv(&b.inner, window))?;
    write_text(&dir.join("marginal_boundary.csv"), &boundary_csv(&b.marginal, window))?;
    if let Some(o) = b.outer.region() {
        write_text(&dir.join("outer_boundary.csv"), &boundary_csv(o, window))?;
    }
    Ok(())
}

/// `ES(ξ₁) + ES(ξ₂)/π̄` for a selection.
fn reserve(s: &SelectionMatrix, profile: &RiskProfile, w: &[f64], mean_rate: f64) -> Result<f64> {
    let r = s.risk(profile, w)?;
    Ok(r[0] + r[1] / mean_rate)
}

fn intro(opts: &ReproOptions) -> Result<Report> {
    const ALPHA: f64 = 0.05;
    const MEAN_RATE: f64 = 1.5;
    let mut rep = Report::new(ReproId::Intro);
    rep.check("no-compensation total", es_normal(0.5, 1.0, ALPHA)? * (1.0 + 1.0 / MEAN_RATE), 2.6045, 5e-3);

    let e = generate(&GenSpec {
        gains: normal_gains(0.5),
        rate: Some(LognormalRate { mean: MEAN_RATE, volatility: 0.4 }),
        n: opts.n.unwrap_or(MC_N),
        seed: opts.seed.unwrap_or(INTRO_SEED),
    })?;
    let p = es(ALPHA);
    let w = e.weights();
    let [to1, to2] = axis_transfers(&e)?;
    rep.check("transfer to asset 1", reserve(&to1, &p, w, MEAN_RATE)?, 1.801, 2e-2);
    rep.check("transfer to asset 2", reserve(&to2, &p, w, MEAN_RATE)?, 1.784, 2e-2);
    rep.check("origin projection", reserve(&frictionless_projection(&e)?, &p, w, MEAN_RATE)?, 1.661, 2e-2);
    rep.check(
        "liquidity-capped projection",
        reserve(&liquidity_capped_projection(&e, [1.0, 1.0])?, &p, w, MEAN_RATE)?,
        1.735,
        2e-2,
    );
    Ok(rep)
}

/// Two equally likely scenarios `(-2, 4)` and `(4, -2)`, symmetric rate 5,
/// expected shortfall at level 3/4.
pub fn nonmargin_ensemble() -> ScenarioEnsemble {
    ScenarioEnsemble::from_points(&[Vec2::new(-2.0, 4.0), Vec2::new(4.0, -2.0)], None, None).expect("fixed data")
}

fn nonmargin(opts: &ReproOptions) -> Result<Report> {
    let mut rep = Report::new(ReproId::Nonmargin);
    let e = nonmargin_ensemble();
    let k = ExchangeCone2D::symmetric(5.0)?;
    let p = es(0.75);
    let w = e.weights();
    let r0 = SelectionMatrix::identity(&e).risk(&p, w)?;
    rep.check("r(X) first", r0[0], 0.0, 1e-9);
    rep.check("r(X) second", r0[1], 0.0, 1e-9);

    // the selections with one deterministic coordinate are X + η₂ and X + η₁
    let [s2, s1] = meetk_selections(&e, &k)?;
    let eta1 = s1.point(0) - e.point(0);
    rep.check("eta1 first scenario, asset 1", eta1.x, 1.2, 1e-9);
    rep.check("eta1 first scenario, asset 2", eta1.y, -6.0, 1e-9);
    let r1 = s1.risk(&p, w)?;
    let r2 = s2.risk(&p, w)?;
    rep.check("r(X+eta1) first", r1[0], -0.8, 1e-9);
    rep.check("r(X+eta1) second", r1[1], 2.0, 1e-9);
    rep.check("r(X+eta2) first", r2[0], 2.0, 1e-9);
    rep.check("r(X+eta2) second", r2[1], -0.8, 1e-9);

    let port = SetPortfolio::new(&e, PortfolioKind::ConeDet { pi12: 5.0, pi21: 5.0 })?;
    let b = compute_bundle(&port, &p, &BundleOptions::default())?;
    let outer = b.outer.region().expect("planar");
    rep.check("outer vertex count", outer.vertices().len() as f64, 1.0, 0.0);
    rep.check("outer vertex first", outer.vertices()[0].x, -1.0 / 3.0, 1e-9);
    rep.check("outer vertex second", outer.vertices()[0].y, -1.0 / 3.0, 1e-9);
    for (name, target) in [("inner boundary through (-0.8,2)", Vec2::new(-0.8, 2.0)), ("inner boundary through (2,-0.8)", Vec2::new(2.0, -0.8))] {
        let gap = b.inner.vertices().iter().map(|v| v.dist(target)).fold(f64::INFINITY, f64::min);
        rep.check(name, gap, 0.0, 1e-9);
    }
    let [x1, x2] = meetk_corner_points(&e, &k, &p)?;
    rep.check("corner x1 first", x1.x, 2.0, 1e-9);
    rep.check("corner x1 second", x1.y, -0.8, 1e-9);
    rep.check("corner x2 first", x2.x, -0.8, 1e-9);
    rep.check("corner x2 second", x2.y, 2.0, 1e-9);
    sandwich_checks(&mut rep, &b);
    write_bundle(opts, ReproId::Nonmargin, &b, Some(&Window::centered(5.0)))?;
    Ok(rep)
}

fn sandwich_checks(rep: &mut Report, b: &RiskBundle) {
    rep.flag("marginal inside inner", b.inner.contains_region(&b.marginal, 1e-9));
    if let Some(o) = b.outer.region() {
        rep.flag("inner inside outer", o.contains_region(&b.inner, 1e-9));
    }
}

fn normcone(opts: &ReproOptions) -> Result<Report> {
    let mut rep = Report::new(ReproId::Normcone);
    let e = generate(&GenSpec {
        gains: normal_gains(0.0),
        rate: None,
        n: opts.n.unwrap_or(SMALL_N),
        seed: opts.seed.unwrap_or(NORMCONE_SEED),
    })?;
    let k = ExchangeCone2D::symmetric(1.5)?;
    let p = es(0.05);
    let port = SetPortfolio::new(&e, PortfolioKind::ConeDet { pi12: 1.5, pi21: 1.5 })?;
    let b = compute_bundle(&port, &p, &BundleOptions::default())?;
    sandwich_checks(&mut rep, &b);
    let outer = b.outer.region().expect("planar");
    for (name, a) in [("a1", k.a1()), ("a2", k.a2())] {
        let u = a.normalized();
        rep.check(format!("inner and outer agree at {name}"), b.inner.scalarize(u) - outer.scalarize(u), 0.0, 1e-9);
    }
    let [x1, x2] = meetk_corner_points(&e, &k, &p)?;
    rep.check("corner x1 on inner boundary", b.inner.scalarize(k.a2().normalized()) - x1.dot(k.a2().normalized()), 0.0, 1e-9);
    rep.check("corner x2 on inner boundary", b.inner.scalarize(k.a1().normalized()) - x2.dot(k.a1().normalized()), 0.0, 1e-9);
    write_bundle(opts, ReproId::Normcone, &b, Some(&Window::centered(6.0)))?;
    Ok(rep)
}

fn frictionless(opts: &ReproOptions) -> Result<Report> {
    let mut rep = Report::new(ReproId::Frictionless);
    let spec = RiskSpec::expected_shortfall(0.05)?;
    let closed = cone_risk_bounds(&RateModel::Lognormal { mean: 1.0, sigma: 0.4 }, &spec)?;
    let expected = [-0.4086929, -2.085047, -0.4780971, -1.782366];
    let names = ["C1 slope ES(pi)", "C1 slope 1/ES(1/pi)", "C2 slope VaR_a(pi)", "C2 slope VaR_1-a(pi)"];
    let got = [closed.c1_slopes[0], closed.c1_slopes[1], closed.c2_slopes[0], closed.c2_slopes[1]];
    for i in 0..4 {
        rep.check(format!("{} closed form", names[i]), got[i], expected[i], 1e-4);
    }
    let e = generate(&GenSpec {
        gains: GainModel::Zero,
        rate: Some(LognormalRate { mean: 1.0, volatility: 0.4 }),
        n: opts.n.unwrap_or(MC_N),
        seed: opts.seed.unwrap_or(TWO_CURRENCY_SEED),
    })?;
    let emp = cone_risk_bounds(&RateModel::Empirical { rates: e.require_rates()?, weights: e.weights() }, &spec)?;
    let got = [emp.c1_slopes[0], emp.c1_slopes[1], emp.c2_slopes[0], emp.c2_slopes[1]];
    for i in 0..4 {
        rep.check(format!("{} empirical", names[i]), got[i], expected[i], 5e-3);
    }
    if let Some(out) = &opts.out {
        #[derive(Serialize)]
        struct Cones<'a> {
            closed_form: &'a selrisk_core::bounds::ConeBounds,
            empirical: &'a selrisk_core::bounds::ConeBounds,
        }
        write_text(&out.join("frictionless").join("cones.json"), &to_json(&Cones { closed_form: &closed, empirical: &emp })?)?;
    }
    Ok(rep)
}

fn liquidity(opts: &ReproOptions) -> Result<Report> {
    let mut rep = Report::new(ReproId::Liquidity);
    let e = generate(&GenSpec {
        gains: normal_gains(0.0),
        rate: Some(LognormalRate { mean: 1.0, volatility: 0.4 }),
        n: opts.n.unwrap_or(SMALL_N),
        seed: opts.seed.unwrap_or(LIQUIDITY_SEED),
    })?;
    let p = es(0.05);
    let port = SetPortfolio::new(&e, PortfolioKind::LiquidityCapped { cap: [1.0, 1.0] })?;
    let b = compute_bundle(&port, &p, &BundleOptions::default())?;
    sandwich_checks(&mut rep, &b);
    rep.check("audit failures", audit_failures(&port, &p)? as f64, 0.0, 0.0);
    // the projection improves on doing nothing in the diagonal direction
    let u = Vec2::new(1.0, 1.0).normalized();
    let r0 = SelectionMatrix::identity(&e).risk(&p, e.weights())?;
    rep.flag("inner improves on r(X)", b.inner.scalarize(u) <= Vec2::new(r0[0], r0[1]).dot(u));
    write_bundle(opts, ReproId::Liquidity, &b, Some(&Window::centered(6.0)))?;
    Ok(rep)
}

/// Number of emitted selections that fail the membership audit.
pub fn audit_failures(port: &SetPortfolio, p: &RiskProfile) -> Result<usize> {
    let mut bad = 0;
    for s in Strategy::defaults_for(port.kind()) {
        for fam in s.families(port, p)? {
            for m in 0..fam.len() {
                if audit(port, &fam.member(m)).is_err() {
                    bad += 1;
                }
            }
        }
    }
    Ok(bad)
}

fn ball(opts: &ReproOptions) -> Result<Report> {
    let mut rep = Report::new(ReproId::Ball);
    rep.check("ES of standard normal", es_normal(0.0, 1.0, 0.05)?, 2.0627, 1e-3);
    let e = generate(&GenSpec {
        gains: normal_gains(0.0),
        rate: None,
        n: opts.n.unwrap_or(MC_N),
        seed: opts.seed.unwrap_or(BALL_SEED),
    })?;
    let p = es(0.05);
    let r = boost_worst_coordinate(&e, 1.0).risk(&p, e.weights())?;
    rep.check("boost-worst first", r[0], 1.22, 2e-2);
    rep.check("boost-worst second", r[1], 1.22, 2e-2);
    Ok(rep)
}
