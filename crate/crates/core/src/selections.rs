//! Catalogue of selection strategies.
//!
//! Every strategy is a deterministic map of the scenario data `(Xᵢ, πᵢ)`.
//! A strategy expands into [`SelectionFamily`] objects: affine families
//! `base + Σₖ cₖ·dirₖ` over a finite list of coefficient vectors, so large
//! sweeps are evaluated without materializing every selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::direction_grid;
use crate::error::{Error, Result};
use crate::geom2d::{Vec2, TOL};
use crate::markets::{ExchangeCone2D, PortfolioKind, ScenarioEnsemble, SegmentVertices, SetPortfolio};
use crate::riskstats::{quantile_left, RiskProfile, RiskSpec};

/// Per-scenario gains of one selection, `n × d` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrix {
    dim: usize,
    gains: Vec<f64>,
    label: String,
}

impl SelectionMatrix {
    pub fn new(dim: usize, gains: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 || !gains.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput("selection rows do not match the dimension".into()));
        }
        Ok(Self { dim, gains, label: label.into() })
    }

    pub fn from_points(points: &[Vec2], label: impl Into<String>) -> Self {
        Self { dim: 2, gains: points.iter().flat_map(|p| [p.x, p.y]).collect(), label: label.into() }
    }

    pub fn identity(e: &ScenarioEnsemble) -> Self {
        Self { dim: e.dim(), gains: e.gains().to_vec(), label: "identity".into() }
    }

    pub fn n(&self) -> usize {
        self.gains.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.gains[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> Vec2 {
        Vec2::new(self.gains[2 * i], self.gains[2 * i + 1])
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.gains[i * self.dim + j]).collect()
    }

    /// `r(ξ) = (r₁(ξ₁), …, r_d(ξ_d))`.
    pub fn risk(&self, profile: &RiskProfile, weights: &[f64]) -> Result<Vec<f64>> {
        if profile.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: profile.dim() });
        }
        if weights.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: weights.len() });
        }
        Ok((0..self.dim).map(|j| profile.components[j].eval(&self.column(j), weights)).collect())
    }
}

/// Finite scale and mixing grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyGrid {
    pub t_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
}

impl StrategyGrid {
    pub fn new(t_values: Vec<f64>, lambda_values: Vec<f64>) -> Result<Self> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]);
        if t_values.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || !sorted(&t_values) {
            return Err(Error::InvalidInput("t grid must be sorted, finite and nonnegative".into()));
        }
        if lambda_values.iter().any(|l| !(0.0..=1.0).contains(l)) || !sorted(&lambda_values) {
            return Err(Error::InvalidInput("lambda grid must be sorted inside [0, 1]".into()));
        }
        Ok(Self { t_values, lambda_values })
    }
}

/// How a strategy chooses its scale or mixing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GridSpec {
    /// Scale grid: `{0, 1}` plus 33 geometric points up to
    /// `4·max‖Y‖/max‖η‖`. Mixing grid: 21 uniform points.
    #[default]
    Auto,
    Explicit { values: Vec<f64> },
    Geometric { max: f64, count: usize },
    Uniform { count: usize },
}

pub const AUTO_T_POINTS: usize = 33;
pub const AUTO_LAMBDA_POINTS: usize = 21;

fn geometric(max: f64, count: usize) -> Vec<f64> {
    let min = max / 1000.0;
    if count < 2 {
        return vec![max];
    }
    let ratio = (max / min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| min * ratio.powi(k as i32)).collect()
}

fn uniform01(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5],
        c => (0..c).map(|k| k as f64 / (c - 1) as f64).collect(),
    }
}

fn tidy(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl GridSpec {
    /// Scale grid for a family whose natural size is `t_scale`.
    pub fn t_values(&self, t_scale: f64) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::Auto => {
                let mut v = vec![0.0, 1.0];
                v.extend(geometric(t_scale, AUTO_T_POINTS));
                v
            }
            GridSpec::Explicit { values } => values.clone(),
            GridSpec::Geometric { max, count } => {
                let mut v = vec![0.0];
                v.extend(geometric(*max, *count));
                v
            }
            GridSpec::Uniform { count } => uniform01(*count).into_iter().map(|x| x * t_scale).collect(),
        };
        let v = tidy(v);
        StrategyGrid::new(v.clone(), vec![])?;
        Ok(v)
    }

    pub fn lambda_values(&self) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::Auto => uniform01(AUTO_LAMBDA_POINTS),
            GridSpec::Explicit { values } => values.clone(),
            GridSpec::Uniform { count } => uniform01(*count),
            GridSpec::Geometric { .. } => {
                return Err(Error::InvalidInput("a geometric grid cannot serve as mixing weights".into()))
            }
        };
        let v = tidy(v);
        StrategyGrid::new(vec![], v.clone())?;
        Ok(v)
    }
}

/// Which boundary ray of `Ǩ` the quantile shift projects onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    #[default]
    Both,
    Ray1,
    Ray2,
}

/// Strategy configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum Strategy {
    Identity,
    QuantileShift {
        #[serde(default)]
        side: Side,
        #[serde(default)]
        t_grid: GridSpec,
    },
    TwoSided {
        #[serde(default)]
        t_grid: GridSpec,
    },
    MeetkCorners,
    Frictionless {
        #[serde(default)]
        t_grid: GridSpec,
    },
    AxisTransfer,
    LiquidityProjection,
    LiquidityCorners,
    LiquidityMix {
        #[serde(default)]
        lambda_grid: GridSpec,
    },
    BoostWorst,
    BallShift {
        #[serde(default = "default_ball_directions")]
        directions: usize,
    },
    VertexMix {
        #[serde(default)]
        lambda_grid: GridSpec,
    },
}

fn default_ball_directions() -> usize {
    17
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Identity => "identity",
            Strategy::QuantileShift { .. } => "quantile-shift",
            Strategy::TwoSided { .. } => "two-sided",
            Strategy::MeetkCorners => "meetk-corners",
            Strategy::Frictionless { .. } => "frictionless",
            Strategy::AxisTransfer => "axis-transfer",
            Strategy::LiquidityProjection => "liquidity-projection",
            Strategy::LiquidityCorners => "liquidity-corners",
            Strategy::LiquidityMix { .. } => "liquidity-mix",
            Strategy::BoostWorst => "boost-worst",
            Strategy::BallShift { .. } => "ball-shift",
            Strategy::VertexMix { .. } => "vertex-mix",
        }
    }

    /// The catalogue used when a run does not list strategies.
    pub fn defaults_for(kind: &PortfolioKind) -> Vec<Strategy> {
        let mut v = vec![Strategy::Identity];
        match kind {
            PortfolioKind::ConeDet { .. } => v.extend([
                Strategy::QuantileShift { side: Side::Both, t_grid: GridSpec::Auto },
                Strategy::QuantileShift { side: Side::Ray1, t_grid: GridSpec::Auto },
                Strategy::QuantileShift { side: Side::Ray2, t_grid: GridSpec::Auto },
                Strategy::TwoSided { t_grid: GridSpec::Auto },
                Strategy::MeetkCorners,
            ]),
            PortfolioKind::ConeHalfplaneRandom => {
                v.extend([Strategy::Frictionless { t_grid: GridSpec::Auto }, Strategy::AxisTransfer])
            }
            PortfolioKind::LiquidityCapped { .. } => v.extend([
                Strategy::LiquidityProjection,
                Strategy::LiquidityCorners,
                Strategy::LiquidityMix { lambda_grid: GridSpec::Auto },
            ]),
            PortfolioKind::Ball { .. } => v.extend([
                Strategy::BoostWorst,
                Strategy::BallShift { directions: default_ball_directions() },
            ]),
            PortfolioKind::SegmentHull { .. } => v.push(Strategy::VertexMix { lambda_grid: GridSpec::Auto }),
        }
        v
    }

    fn applies_to(&self, kind: &PortfolioKind) -> bool {
        use PortfolioKind as K;
        match self {
            Strategy::Identity => true,
            Strategy::QuantileShift { .. } | Strategy::TwoSided { .. } | Strategy::MeetkCorners => {
                matches!(kind, K::ConeDet { .. })
            }
            Strategy::Frictionless { .. } | Strategy::AxisTransfer => matches!(kind, K::ConeHalfplaneRandom),
            Strategy::LiquidityProjection | Strategy::LiquidityCorners | Strategy::LiquidityMix { .. } => {
                matches!(kind, K::LiquidityCapped { .. })
            }
            Strategy::BoostWorst | Strategy::BallShift { .. } => matches!(kind, K::Ball { .. }),
            Strategy::VertexMix { .. } => matches!(kind, K::SegmentHull { .. }),
        }
    }

    /// Expands the strategy on a portfolio.
    pub fn families(&self, p: &SetPortfolio, profile: &RiskProfile) -> Result<Vec<SelectionFamily>> {
        if !self.applies_to(p.kind()) {
            return Err(Error::KindMismatch { strategy: self.name().into(), kind: p.kind().name().into() });
        }
        let e = p.ensemble();
        let x = e.gains().to_vec();
        let d = e.dim();
        let single = |label: &str, gains: Vec<f64>| SelectionFamily::single(label, d, gains);
        Ok(match self {
            Strategy::Identity => vec![single("identity", x)],
            Strategy::QuantileShift { side, t_grid } => {
                let k = p.kind().exchange_cone().expect("checked kind");
                let shift = quantile_shift_projection(e, &k, profile.quantile_level(), *side)?;
                let t = t_grid.t_values(t_scale(&shift.y, &shift.eta))?;
                vec![SelectionFamily::scaled(format!("quantile-shift/{}", side_name(*side)), d, x, flatten(&shift.eta), t)]
            }
            Strategy::TwoSided { t_grid } => {
                let k = p.kind().exchange_cone().expect("checked kind");
                let shift = quantile_shift_projection(e, &k, profile.quantile_level(), Side::Both)?;
                let t = t_grid.t_values(t_scale(&shift.y, &shift.eta))?;
                vec![two_sided_family(d, x, &shift, &t)]
            }
            Strategy::MeetkCorners => {
                let k = p.kind().exchange_cone().expect("checked kind");
                let [s1, s2] = meetk_selections(e, &k)?;
                vec![single("meetk/x1", s1.gains), single("meetk/x2", s2.gains)]
            }
            Strategy::Frictionless { t_grid } => {
                let eta = frictionless_direction(e)?;
                let pts = e.points();
                let t = t_grid.t_values(t_scale(&pts, &eta))?;
                vec![SelectionFamily::scaled("frictionless", d, x, flatten(&eta), t)]
            }
            Strategy::AxisTransfer => {
                let [a, b] = axis_transfers(e)?;
                vec![single("axis/1", a.gains), single("axis/2", b.gains)]
            }
            Strategy::LiquidityProjection => {
                vec![single("liquidity/projection", liquidity_capped_projection(e, cap_of(p))?.gains)]
            }
            Strategy::LiquidityCorners => {
                let [a, b] = liquidity_corners(e, cap_of(p))?;
                vec![single("liquidity/corner1", a.gains), single("liquidity/corner2", b.gains)]
            }
            Strategy::LiquidityMix { lambda_grid } => {
                let proj = liquidity_capped_projection(e, cap_of(p))?;
                let [a, b] = liquidity_corners(e, cap_of(p))?;
                let l = lambda_grid.lambda_values()?;
                vec![
                    SelectionFamily::mix("liquidity/mix1", &proj, &a, &l)?,
                    SelectionFamily::mix("liquidity/mix2", &proj, &b, &l)?,
                ]
            }
            Strategy::BoostWorst => {
                let PortfolioKind::Ball { radius } = p.kind() else { unreachable!() };
                vec![single("boost-worst", boost_worst_coordinate(e, *radius).gains)]
            }
            Strategy::BallShift { directions } => {
                let PortfolioKind::Ball { radius } = p.kind() else { unreachable!() };
                direction_grid(d, (*directions).max(2))
                    .into_iter()
                    .enumerate()
                    .map(|(k, u)| {
                        let g = (0..e.n()).flat_map(|i| e.row(i).iter().zip(&u).map(|(a, b)| a + radius * b).collect::<Vec<_>>()).collect();
                        single(&format!("ball-shift/{k}"), g)
                    })
                    .collect()
            }
            Strategy::VertexMix { lambda_grid } => vertex_families(p, &lambda_grid.lambda_values()?)?,
        })
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Both => "both",
        Side::Ray1 => "ray1",
        Side::Ray2 => "ray2",
    }
}

fn cap_of(p: &SetPortfolio) -> [f64; 2] {
    match p.kind() {
        PortfolioKind::LiquidityCapped { cap } => *cap,
        _ => unreachable!("checked kind"),
    }
}

fn flatten(v: &[Vec2]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y]).collect()
}

/// `4·max‖Yᵢ‖ / max‖ηᵢ‖`, or one when `η ≡ 0`.
fn t_scale(y: &[Vec2], eta: &[Vec2]) -> f64 {
    let ymax = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let emax = eta.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if emax > 0.0 && ymax > 0.0 {
        4.0 * ymax / emax
    } else {
        1.0
    }
}

/// An affine family of selections `base + Σₖ cₖ·dirₖ`.
#[derive(Debug, Clone)]
pub struct SelectionFamily {
    label: String,
    dim: usize,
    base: Vec<f64>,
    dirs: Vec<Vec<f64>>,
    coeffs: Vec<Vec<f64>>,
}

impl SelectionFamily {
    pub fn single(label: &str, dim: usize, gains: Vec<f64>) -> Self {
        Self { label: label.into(), dim, base: gains, dirs: vec![], coeffs: vec![vec![]] }
    }

    /// `base + t·dir` for every `t` in the grid.
    pub fn scaled(label: impl Into<String>, dim: usize, base: Vec<f64>, dir: Vec<f64>, t: Vec<f64>) -> Self {
        Self { label: label.into(), dim, base, dirs: vec![dir], coeffs: t.into_iter().map(|t| vec![t]).collect() }
    }

    /// `λa + (1-λ)b` for every `λ` in the grid.
    pub fn mix(label: &str, a: &SelectionMatrix, b: &SelectionMatrix, lambdas: &[f64]) -> Result<Self> {
        if a.dim != b.dim || a.gains.len() != b.gains.len() {
            return Err(Error::InvalidInput("mixed selections live on different ensembles".into()));
        }
        let dir = a.gains.iter().zip(&b.gains).map(|(x, y)| x - y).collect();
        Ok(Self {
            label: label.into(),
            dim: a.dim,
            base: b.gains.clone(),
            dirs: vec![dir],
            coeffs: lambdas.iter().map(|l| vec![*l]).collect(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self, m: usize) -> &[f64] {
        &self.coeffs[m]
    }

    fn entry(&self, m: usize, k: usize) -> f64 {
        let mut v = self.base[k];
        for (c, dir) in self.coeffs[m].iter().zip(&self.dirs) {
            v += c * dir[k];
        }
        v
    }

    pub fn member(&self, m: usize) -> SelectionMatrix {
        let gains = (0..self.base.len()).map(|k| self.entry(m, k)).collect();
        let tag: Vec<String> = self.coeffs[m].iter().map(|c| format!("{c}")).collect();
        let label = if tag.is_empty() { self.label.clone() } else { format!("{}[{}]", self.label, tag.join(",")) };
        SelectionMatrix { dim: self.dim, gains, label }
    }

    /// `r(member)` for every member, in member order.
    pub fn risk_points(&self, profile: &RiskProfile, weights: &[f64]) -> Vec<Vec<f64>> {
        let n = weights.len();
        (0..self.len())
            .into_par_iter()
            .map(|m| {
                let mut col = vec![0.0; n];
                (0..self.dim)
                    .map(|j| {
                        for (i, c) in col.iter_mut().enumerate() {
                            *c = self.entry(m, i * self.dim + j);
                        }
                        profile.components[j].eval(&col, weights)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Quantile-shift data: `Y = X - q_α(X)` and the per-scenario direction
/// `η ∈ K`, plus which ray each scenario used (`None` when `η = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileShift {
    pub y: Vec<Vec2>,
    pub eta: Vec<Vec2>,
    pub ray: Vec<Option<Side>>,
}

/// Projects `Y = X - q` onto the boundary rays of `Ǩ` and returns
/// `η = -projection`. Ties between rays go to ray 1.
pub fn quantile_shift_projection(e: &ScenarioEnsemble, k: &ExchangeCone2D, alpha: f64, side: Side) -> Result<QuantileShift> {
    e.require_dim(2)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    let q = Vec2::new(
        quantile_left(&e.column(0), e.weights(), alpha),
        quantile_left(&e.column(1), e.weights(), alpha),
    );
    let d1 = (-k.b1()).normalized();
    let d2 = (-k.b2()).normalized();
    let dual = k.dual_cone();
    let mut out = QuantileShift { y: vec![], eta: vec![], ray: vec![] };
    for p in e.points() {
        let y = p - q;
        let (eta, ray) = if dual.contains(-y) {
            (Vec2::ZERO, None)
        } else {
            let proj = |d: Vec2| d * y.dot(d).max(0.0);
            let (p1, p2) = (proj(d1), proj(d2));
            let pick = match side {
                Side::Ray1 => Side::Ray1,
                Side::Ray2 => Side::Ray2,
                Side::Both => {
                    if (y - p1).norm() <= (y - p2).norm() {
                        Side::Ray1
                    } else {
                        Side::Ray2
                    }
                }
            };
            let pr = if pick == Side::Ray1 { p1 } else { p2 };
            if pr == Vec2::ZERO {
                (Vec2::ZERO, None)
            } else {
                (-pr, Some(pick))
            }
        };
        out.y.push(y);
        out.eta.push(eta + Vec2::ZERO);
        out.ray.push(ray);
    }
    Ok(out)
}

/// `X + t·η` for every `t` in the grid.
pub fn scaled_family(e: &ScenarioEnsemble, eta: &[Vec2], grid: &StrategyGrid) -> Result<Vec<SelectionMatrix>> {
    e.require_dim(2)?;
    if eta.len() != e.n() {
        return Err(Error::Dimension { expected: e.n(), got: eta.len() });
    }
    let fam = SelectionFamily::scaled("scaled", 2, e.gains().to_vec(), flatten(eta), grid.t_values.clone());
    Ok((0..fam.len()).map(|m| fam.member(m)).collect())
}

fn two_sided_family(d: usize, x: Vec<f64>, shift: &QuantileShift, t: &[f64]) -> SelectionFamily {
    let part = |want: Side| -> Vec<f64> {
        shift
            .eta
            .iter()
            .zip(&shift.ray)
            .flat_map(|(e, r)| if *r == Some(want) { [e.x, e.y] } else { [0.0, 0.0] })
            .collect()
    };
    let mut coeffs = Vec::with_capacity(t.len() * t.len());
    for &a in t {
        for &b in t {
            coeffs.push(vec![a, b]);
        }
    }
    SelectionFamily { label: "two-sided".into(), dim: d, base: x, dirs: vec![part(Side::Ray1), part(Side::Ray2)], coeffs }
}

/// Selections `X + ζ·b₂` with first coordinate `essinf X₁`, and
/// `X + ζ′·b₁` with second coordinate `essinf X₂`.
pub fn meetk_selections(e: &ScenarioEnsemble, k: &ExchangeCone2D) -> Result<[SelectionMatrix; 2]> {
    e.require_dim(2)?;
    if !(k.pi12.is_finite() && k.pi21.is_finite()) {
        return Err(Error::InvalidInput("corner selections need finite exchange rates".into()));
    }
    let (m1, m2) = (essinf(&e.column(0), e.weights()), essinf(&e.column(1), e.weights()));
    let (b1, b2) = (k.b1(), k.b2());
    let pts = e.points();
    let s1: Vec<Vec2> = pts.iter().map(|p| *p + b2 * ((p.x - m1) / -b2.x)).collect();
    let s2: Vec<Vec2> = pts.iter().map(|p| *p + b1 * ((p.y - m2) / -b1.y)).collect();
    Ok([SelectionMatrix::from_points(&s1, "meetk/x1"), SelectionMatrix::from_points(&s2, "meetk/x2")])
}

fn essinf(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).filter(|(_, w)| **w > 0.0).map(|(v, _)| *v).fold(f64::INFINITY, f64::min)
}

/// Closed-form risks of the two corner selections:
/// `x₁ = (-essinf X₁, (r₂(⟨X,a₂⟩) + essinf X₁)/π⁽¹²⁾)` and
/// `x₂ = ((r₁(⟨X,a₁⟩) + essinf X₂)/π⁽²¹⁾, -essinf X₂)`.
pub fn meetk_corner_points(e: &ScenarioEnsemble, k: &ExchangeCone2D, profile: &RiskProfile) -> Result<[Vec2; 2]> {
    e.require_dim(2)?;
    if profile.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: profile.dim() });
    }
    let (a1, a2) = (k.a1(), k.a2());
    let w = e.weights();
    let (m1, m2) = (essinf(&e.column(0), w), essinf(&e.column(1), w));
    let pts = e.points();
    let xa1: Vec<f64> = pts.iter().map(|p| p.dot(a1)).collect();
    let xa2: Vec<f64> = pts.iter().map(|p| p.dot(a2)).collect();
    let r1: &RiskSpec = &profile.components[0];
    let r2: &RiskSpec = &profile.components[1];
    Ok([
        Vec2::new(-m1, (r2.eval(&xa2, w) + a2.x * m1) / a2.y),
        Vec2::new((r1.eval(&xa1, w) + a1.y * m2) / a1.x, -m2),
    ])
}

/// Direction `η* = -((X₁-πX₂)/(1+π²))·(1, -π)` from `X` to the foot of the
/// origin on the boundary line of the random half-plane.
pub fn frictionless_direction(e: &ScenarioEnsemble) -> Result<Vec<Vec2>> {
    e.require_dim(2)?;
    let rates = e.require_rates()?;
    Ok(e.points()
        .iter()
        .zip(rates)
        .map(|(p, pi)| {
            let c1 = (p.x - pi * p.y) / (1.0 + pi * pi);
            Vec2::new(-c1, pi * c1)
        })
        .collect())
}

/// `ξ = (π(πX₁+X₂), πX₁+X₂) / (1+π²)`.
pub fn frictionless_projection(e: &ScenarioEnsemble) -> Result<SelectionMatrix> {
    let rates = e.require_rates()?;
    e.require_dim(2)?;
    let pts: Vec<Vec2> = e
        .points()
        .iter()
        .zip(rates)
        .map(|(p, pi)| {
            let s = (pi * p.x + p.y) / (1.0 + pi * pi);
            Vec2::new(pi * s, s)
        })
        .collect();
    Ok(SelectionMatrix::from_points(&pts, "frictionless"))
}

/// Everything moved to one asset: `(X₁+X₂/π, 0)` and `(0, πX₁+X₂)`.
pub fn axis_transfers(e: &ScenarioEnsemble) -> Result<[SelectionMatrix; 2]> {
    let rates = e.require_rates()?;
    e.require_dim(2)?;
    let pts = e.points();
    let a: Vec<Vec2> = pts.iter().zip(rates).map(|(p, pi)| Vec2::new(p.x + p.y / pi, 0.0)).collect();
    let b: Vec<Vec2> = pts.iter().zip(rates).map(|(p, pi)| Vec2::new(0.0, pi * p.x + p.y)).collect();
    Ok([SelectionMatrix::from_points(&a, "axis/1"), SelectionMatrix::from_points(&b, "axis/2")])
}

/// Frictionless projection truncated to the liquidity caps `a`.
pub fn liquidity_capped_projection(e: &ScenarioEnsemble, cap: [f64; 2]) -> Result<SelectionMatrix> {
    let rates = e.require_rates()?;
    e.require_dim(2)?;
    let pts: Vec<Vec2> = e
        .points()
        .iter()
        .zip(rates)
        .map(|(p, pi)| {
            let c1 = (p.x - pi * p.y) / (1.0 + pi * pi);
            if c1 <= -cap[0] {
                *p + Vec2::new(cap[0], -pi * cap[0])
            } else if -pi * c1 <= -cap[1] {
                *p + Vec2::new(-cap[1] / pi, cap[1])
            } else {
                *p + Vec2::new(-c1, pi * c1)
            }
        })
        .collect();
    Ok(SelectionMatrix::from_points(&pts, "liquidity/projection"))
}

/// The extreme trades `X + (a₁, -πa₁)` and `X + (-a₂/π, a₂)`.
pub fn liquidity_corners(e: &ScenarioEnsemble, cap: [f64; 2]) -> Result<[SelectionMatrix; 2]> {
    let rates = e.require_rates()?;
    e.require_dim(2)?;
    let pts = e.points();
    let a: Vec<Vec2> = pts.iter().zip(rates).map(|(p, pi)| *p + Vec2::new(cap[0], -pi * cap[0])).collect();
    let b: Vec<Vec2> = pts.iter().zip(rates).map(|(p, pi)| *p + Vec2::new(-cap[1] / pi, cap[1])).collect();
    Ok([SelectionMatrix::from_points(&a, "liquidity/corner1"), SelectionMatrix::from_points(&b, "liquidity/corner2")])
}

/// `X + R·e_j` with `j` the strictly smallest coordinate; ties add nothing.
pub fn boost_worst_coordinate(e: &ScenarioEnsemble, radius: f64) -> SelectionMatrix {
    let d = e.dim();
    let mut gains = e.gains().to_vec();
    for i in 0..e.n() {
        let row = &mut gains[i * d..(i + 1) * d];
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let at: Vec<usize> = (0..d).filter(|&j| row[j] == min).collect();
        if at.len() == 1 {
            row[at[0]] += radius;
        }
    }
    SelectionMatrix { dim: d, gains, label: "boost-worst".into() }
}

/// `λa + (1-λ)b` for every grid value.
pub fn convex_mix(a: &SelectionMatrix, b: &SelectionMatrix, lambdas: &[f64]) -> Result<Vec<SelectionMatrix>> {
    let fam = SelectionFamily::mix("mix", a, b, lambdas)?;
    Ok((0..fam.len()).map(|m| fam.member(m)).collect())
}

fn vertex_families(p: &SetPortfolio, lambdas: &[f64]) -> Result<Vec<SelectionFamily>> {
    let e = p.ensemble();
    let d = e.dim();
    let per: Vec<Vec<Vec<f64>>> = (0..e.n()).map(|i| p.segment_vertices(i)).collect();
    let m = per[0].len();
    let vertex = |j: usize| -> SelectionMatrix {
        SelectionMatrix { dim: d, gains: per.iter().flat_map(|v| v[j].clone()).collect(), label: format!("vertex/{j}") }
    };
    let mut out: Vec<SelectionFamily> = (0..m).map(|j| SelectionFamily::single(&format!("vertex/{j}"), d, vertex(j).gains)).collect();
    for a in 0..m {
        for b in a + 1..m {
            out.push(SelectionFamily::mix(&format!("vertex-mix/{a}-{b}"), &vertex(a), &vertex(b), lambdas)?);
        }
    }
    if matches!(p.kind(), PortfolioKind::SegmentHull { vertices: SegmentVertices::Swap }) || d == 2 {
        // per scenario, the vertex favouring one coordinate
        for j in 0..d.min(2) {
            let g = per
                .iter()
                .flat_map(|v| {
                    v.iter()
                        .max_by(|x, y| x[j].total_cmp(&y[j]).then(y[1 - j].total_cmp(&x[1 - j])))
                        .expect("nonempty")
                        .clone()
                })
                .collect();
            out.push(SelectionFamily::single(&format!("vertex-favour/{j}"), d, g));
        }
    }
    Ok(out)
}

/// Checks every row of `s` against the exact scenario set and against the
/// support function on a 64-direction probe grid.
pub fn audit(p: &SetPortfolio, s: &SelectionMatrix) -> Result<()> {
    let e = p.ensemble();
    if s.dim() != e.dim() || s.n() != e.n() {
        return Err(Error::Dimension { expected: e.n() * e.dim(), got: s.gains().len() });
    }
    let probes = direction_grid(e.dim(), 64);
    for i in 0..e.n() {
        let row = s.row(i);
        if !p.contains(i, row) {
            return Err(Error::InvalidInput(format!("{}: scenario {i} row {row:?} leaves the portfolio", s.label())));
        }
        for u in &probes {
            let h = p.support_unchecked(i, u);
            let xu: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            if xu > h + TOL * (1.0 + h.abs().min(1e12)) {
                return Err(Error::InvalidInput(format!(
                    "{}: scenario {i} violates the support bound in direction {u:?}",
                    s.label()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskstats::RiskSpec;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn with_rates(points: &[Vec2], rates: &[f64]) -> ScenarioEnsemble {
        ScenarioEnsemble::from_points(points, Some(rates.to_vec()), None).unwrap()
    }

    fn nonmargin() -> ScenarioEnsemble {
        ScenarioEnsemble::from_points(&[v(-2.0, 4.0), v(4.0, -2.0)], None, None).unwrap()
    }

    fn es(alpha: f64) -> RiskProfile {
        RiskProfile::identical(RiskSpec::expected_shortfall(alpha).unwrap(), 2)
    }

    #[test]
    fn frictionless_examples() {
        let e = with_rates(&[v(1.0, 1.0), v(2.0, 0.0), v(0.0, 3.0)], &[1.0, 1.0, 2.0]);
        let s = frictionless_projection(&e).unwrap();
        assert!(s.point(0).approx_eq(v(1.0, 1.0), 1e-15));
        assert!(s.point(1).approx_eq(v(1.0, 1.0), 1e-15));
        assert!(s.point(2).approx_eq(v(1.2, 0.6), 1e-15));
        let eta = frictionless_direction(&e).unwrap();
        for (i, p) in e.points().iter().enumerate() {
            assert!((*p + eta[i]).approx_eq(s.point(i), 1e-14));
        }
        let no_rates = nonmargin();
        assert_eq!(frictionless_projection(&no_rates).unwrap_err(), Error::MissingRates);
    }

    #[test]
    fn quantile_shift_ray_choice() {
        // single scenario with zero quantile shift: Y = X
        let e = ScenarioEnsemble::from_points(&[v(2.0, 1.0), v(0.0, 0.0)], None, Some(vec![0.0, 1.0])).unwrap();
        let k = ExchangeCone2D::symmetric(5.0).unwrap();
        let s = quantile_shift_projection(&e, &k, 0.5, Side::Both).unwrap();
        assert_eq!(s.y[0], v(2.0, 1.0));
        assert!(s.eta[0].approx_eq(v(-1.7308, 0.3462), 1e-4));
        assert_eq!(s.ray[0], Some(Side::Ray2));
        assert_eq!(s.eta[1], Vec2::ZERO);
    }

    #[test]
    fn quantile_shift_inside_polar_maps_to_zero() {
        let e = ScenarioEnsemble::from_points(&[v(-3.0, -3.0), v(0.0, 0.0)], None, Some(vec![0.0, 1.0])).unwrap();
        let k = ExchangeCone2D::symmetric(5.0).unwrap();
        let s = quantile_shift_projection(&e, &k, 0.5, Side::Both).unwrap();
        assert_eq!(s.eta[0], Vec2::ZERO);
        assert_eq!(s.ray[0], None);
    }

    #[test]
    fn quantile_shift_without_exchange_projects_onto_axes() {
        let e = ScenarioEnsemble::from_points(&[v(2.0, 1.0), v(-1.0, 3.0), v(0.0, 0.0)], None, Some(vec![0.0, 0.0, 1.0])).unwrap();
        let s = quantile_shift_projection(&e, &ExchangeCone2D::no_exchange(), 0.5, Side::Both).unwrap();
        assert_eq!(s.eta[0], v(-2.0, 0.0));
        assert_eq!(s.eta[1], v(0.0, -3.0));
    }

    #[test]
    fn nonmargin_ray1_direction_is_the_known_selection() {
        let e = nonmargin();
        let k = ExchangeCone2D::symmetric(5.0).unwrap();
        let s = quantile_shift_projection(&e, &k, 0.75, Side::Ray1).unwrap();
        // η₁ is (1.2, -6) on the first scenario and zero on the second
        let t = 1.2 / s.eta[0].x;
        assert!((t - 5.2).abs() < 1e-12);
        assert!((s.eta[0] * t).approx_eq(v(1.2, -6.0), 1e-12));
        assert_eq!(s.eta[1], Vec2::ZERO);
        let sel = SelectionMatrix::from_points(&[v(-2.0, 4.0) + s.eta[0] * t, v(4.0, -2.0)], "eta1");
        let r = sel.risk(&es(0.75), e.weights()).unwrap();
        assert!((r[0] + 0.8).abs() < 1e-9 && (r[1] - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn scaled_family_starts_at_identity() {
        let e = nonmargin();
        let grid = StrategyGrid::new(vec![0.0, 1.0], vec![]).unwrap();
        let fam = scaled_family(&e, &[v(1.0, -5.0), Vec2::ZERO], &grid).unwrap();
        assert_eq!(fam[0].gains(), e.gains());
        assert_eq!(fam[1].point(0), v(-1.0, -1.0));
        assert!(StrategyGrid::new(vec![-1.0], vec![]).is_err());
    }

    #[test]
    fn liquidity_examples() {
        let e = with_rates(&[v(-3.0, 3.0), v(0.0, 0.0), v(3.0, -3.0)], &[1.0, 2.0, 1.0]);
        let s = liquidity_capped_projection(&e, [1.0, 1.0]).unwrap();
        assert_eq!(s.point(0), v(-2.0, 2.0));
        assert_eq!(s.point(1), v(0.0, 0.0));
        assert_eq!(s.point(2), v(2.0, -2.0));
        let e = with_rates(&[v(0.0, 0.0)], &[2.0]);
        let [a, b] = liquidity_corners(&e, [1.0, 1.0]).unwrap();
        assert_eq!(a.point(0), v(1.0, -2.0));
        assert_eq!(b.point(0), v(-0.5, 1.0));
        let e = with_rates(&[v(1.0, 1.0)], &[1.0]);
        let [a, b] = liquidity_corners(&e, [1.0, 1.0]).unwrap();
        assert_eq!((a.point(0), b.point(0)), (v(2.0, 0.0), v(0.0, 2.0)));
    }

    #[test]
    fn convex_mix_examples() {
        let e = with_rates(&[v(0.0, 0.0)], &[1.0]);
        let [a, b] = liquidity_corners(&e, [1.0, 1.0]).unwrap();
        let mixes = convex_mix(&a, &b, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(mixes[0].gains(), b.gains());
        assert_eq!(mixes[1].point(0), Vec2::ZERO);
        assert_eq!(mixes[2].gains(), a.gains());
    }

    #[test]
    fn boost_worst_examples() {
        let e = ScenarioEnsemble::from_points(&[v(0.0, 5.0), v(2.0, 2.0), v(3.0, -1.0)], None, None).unwrap();
        let s = boost_worst_coordinate(&e, 1.0);
        assert_eq!(s.point(0), v(1.0, 5.0));
        assert_eq!(s.point(1), v(2.0, 2.0));
        assert_eq!(s.point(2), v(3.0, 0.0));
    }

    #[test]
    fn meetk_examples() {
        let e = nonmargin();
        let k = ExchangeCone2D::symmetric(5.0).unwrap();
        let [x1, x2] = meetk_corner_points(&e, &k, &es(0.75)).unwrap();
        assert!(x1.approx_eq(v(2.0, -0.8), 1e-12));
        assert!(x2.approx_eq(v(-0.8, 2.0), 1e-12));
        let [s1, s2] = meetk_selections(&e, &k).unwrap();
        let r1 = s1.risk(&es(0.75), e.weights()).unwrap();
        let r2 = s2.risk(&es(0.75), e.weights()).unwrap();
        assert!(v(r1[0], r1[1]).approx_eq(x1, 1e-12));
        assert!(v(r2[0], r2[1]).approx_eq(x2, 1e-12));

        let c = ScenarioEnsemble::from_points(&[v(1.5, -0.5)], None, None).unwrap();
        let [y1, y2] = meetk_corner_points(&c, &k, &es(0.3)).unwrap();
        assert!(y1.approx_eq(v(-1.5, 0.5), 1e-12) && y2.approx_eq(v(-1.5, 0.5), 1e-12));
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let e = nonmargin();
        let p = SetPortfolio::new(&e, PortfolioKind::Ball { radius: 1.0 }).unwrap();
        let err = Strategy::MeetkCorners.families(&p, &es(0.5)).unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
    }

    #[test]
    fn strategy_json_shape() {
        let s: Strategy = serde_json::from_str(r#"{"strategy":"quantile-shift","side":"ray2","t_grid":{"type":"explicit","values":[0,1]}}"#).unwrap();
        assert_eq!(
            s,
            Strategy::QuantileShift { side: Side::Ray2, t_grid: GridSpec::Explicit { values: vec![0.0, 1.0] } }
        );
        let d: Strategy = serde_json::from_str(r#"{"strategy":"two-sided"}"#).unwrap();
        assert_eq!(d, Strategy::TwoSided { t_grid: GridSpec::Auto });
    }

    #[test]
    fn auto_grids() {
        let t = GridSpec::Auto.t_values(8.0).unwrap();
        assert_eq!(t.len(), 35);
        assert_eq!(t[0], 0.0);
        assert!(t.contains(&1.0));
        assert!((t[t.len() - 1] - 8.0).abs() < 1e-12);
        assert_eq!(GridSpec::Auto.lambda_values().unwrap().len(), 21);
    }

    #[test]
    fn family_risk_points_match_members() {
        let e = nonmargin();
        let p = SetPortfolio::new(&e, PortfolioKind::ConeDet { pi12: 5.0, pi21: 5.0 }).unwrap();
        let prof = es(0.75);
        for strat in Strategy::defaults_for(p.kind()) {
            for fam in strat.families(&p, &prof).unwrap() {
                let pts = fam.risk_points(&prof, e.weights());
                for (m, pt) in pts.iter().enumerate().step_by(37) {
                    assert_eq!(*pt, fam.member(m).risk(&prof, e.weights()).unwrap());
                }
            }
        }
    }
}
