//! Inner and outer approximations of the selection risk measure.

mod bundle;
mod random_halfplane;

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom2d::{ConvexCone2D, HalfSpaceSet, RiskRegion2D, Vec2};
use crate::markets::{ExchangeCone2D, ScenarioEnsemble, SetPortfolio};
use crate::riskstats::{es_var_lognormal_mean_one, quantile_left, RiskProfile, RiskSpec};
use crate::selections::{SelectionMatrix, Strategy};

pub use bundle::{compute_bundle, scalarize_bundle, scalarize_pair, BundleMeta, BundleOptions, RiskBundle};
pub use random_halfplane::lower_bound_random_halfplane;

/// Default number of outer-bound directions.
pub const DEFAULT_DIRECTIONS: usize = 181;

/// Deterministic unit directions in `R₊ᵈ`.
///
/// For `d = 2`: `count` angles spread uniformly over `[0, π/2]`.
/// Otherwise: the normalized points of the smallest simplex lattice with at
/// least `count` points, in lexicographic order.
pub fn direction_grid(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        let c = count.max(2);
        return (0..c)
            .map(|k| {
                let th = FRAC_PI_2 * k as f64 / (c - 1) as f64;
                // exact axes at the ends
                match k {
                    0 => vec![1.0, 0.0],
                    _ if k == c - 1 => vec![0.0, 1.0],
                    _ => vec![th.cos(), th.sin()],
                }
            })
            .collect();
    }
    if d == 1 {
        return vec![vec![1.0]];
    }
    let mut m = 1;
    while lattice_size(d, m) < count {
        m += 1;
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    lattice(d, m, 0, &mut cur, &mut out);
    out
}

fn lattice_size(d: usize, m: usize) -> usize {
    // C(m + d - 1, d - 1)
    (1..d).fold(1usize, |acc, k| acc * (m + k) / k)
}

fn lattice(d: usize, left: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
    if j == d - 1 {
        cur[j] = left;
        let n = cur.iter().map(|c| (c * c) as f64).sum::<f64>().sqrt();
        out.push(cur.iter().map(|c| *c as f64 / n).collect());
        return;
    }
    for c in (0..=left).rev() {
        cur[j] = c;
        lattice(d, left - c, j + 1, cur, out);
    }
}

/// `𝐫(X) = (r₁(X₁), …, r_d(X_d))`.
pub fn regulator_point(e: &ScenarioEnsemble, profile: &RiskProfile) -> Result<Vec<f64>> {
    profile.validate()?;
    if profile.dim() != e.dim() {
        return Err(Error::Dimension { expected: e.dim(), got: profile.dim() });
    }
    Ok((0..e.dim()).map(|j| profile.components[j].eval(&e.column(j), e.weights())).collect())
}

/// `𝐫(X) + R₊²`.
pub fn regulator_region(e: &ScenarioEnsemble, profile: &RiskProfile) -> Result<RiskRegion2D> {
    e.require_dim(2)?;
    let r = regulator_point(e, profile)?;
    Ok(RiskRegion2D::orthant_at(Vec2::new(r[0], r[1])))
}

/// `𝐫(X) + rec`.
pub fn marginalized_bound(e: &ScenarioEnsemble, profile: &RiskProfile, rec: &ConvexCone2D) -> Result<RiskRegion2D> {
    e.require_dim(2)?;
    let r = regulator_point(e, profile)?;
    RiskRegion2D::from_points_plus_cone(&[Vec2::new(r[0], r[1])], rec)
}

/// The recession cone that provably lies in the risk of the trading
/// opportunities: `Ǩ` for a deterministic cone, the inner cone `C₁` for a
/// random half-plane, the quadrant otherwise.
pub fn proven_recession(p: &SetPortfolio, profile: &RiskProfile) -> Result<ConvexCone2D> {
    use crate::markets::PortfolioKind as K;
    Ok(match p.kind() {
        K::ConeDet { pi12, pi21 } => ExchangeCone2D::new(*pi12, *pi21)?.solvency_cone(),
        K::ConeHalfplaneRandom => {
            let spec = profile.common().ok_or(Error::NonIdenticalComponents)?;
            let e = p.ensemble();
            cone_risk_bounds(&RateModel::Empirical { rates: e.require_rates()?, weights: e.weights() }, &spec)?.c1
        }
        _ => ConvexCone2D::orthant(),
    })
}

/// Hull of the risk vectors of every selection emitted by `strategies`
/// (identity always included) plus [`proven_recession`].
pub fn inner_region(p: &SetPortfolio, strategies: &[Strategy], profile: &RiskProfile) -> Result<RiskRegion2D> {
    Ok(inner_points(p, strategies, profile)?.0)
}

/// Inner region together with the number of evaluated selections.
pub(crate) fn inner_points(
    p: &SetPortfolio,
    strategies: &[Strategy],
    profile: &RiskProfile,
) -> Result<(RiskRegion2D, usize)> {
    p.ensemble().require_dim(2)?;
    profile.validate()?;
    profile.require_coherent()?;
    if profile.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: profile.dim() });
    }
    let mut list = vec![Strategy::Identity];
    list.extend(strategies.iter().filter(|s| **s != Strategy::Identity).cloned());
    let mut points = Vec::new();
    for s in &list {
        for fam in s.families(p, profile)? {
            points.extend(fam.risk_points(profile, p.ensemble().weights()).into_iter().map(|r| Vec2::new(r[0], r[1])));
        }
    }
    let count = points.len();
    let rec = proven_recession(p, profile)?;
    Ok((RiskRegion2D::from_points_plus_cone(&points, &rec)?, count))
}

/// Hull of `𝐫(ξ)` over explicit selections plus `rec`.
pub fn inner_region_from_selections(
    selections: &[SelectionMatrix],
    profile: &RiskProfile,
    weights: &[f64],
    rec: &ConvexCone2D,
) -> Result<RiskRegion2D> {
    let pts = selections
        .iter()
        .map(|s| s.risk(profile, weights).map(|r| Vec2::new(r[0], r[1])))
        .collect::<Result<Vec<_>>>()?;
    RiskRegion2D::from_points_plus_cone(&pts, rec)
}

/// The two half-spaces `⟨x, aᵢ⟩ ≥ r(⟨X, aᵢ⟩)` at the extreme directions of
/// `K′`; recession `Ǩ`.
pub fn lower_bound_det_cone(e: &ScenarioEnsemble, k: &ExchangeCone2D, profile: &RiskProfile) -> Result<RiskRegion2D> {
    e.require_dim(2)?;
    let r = common_coherent(profile)?;
    let pts = e.points();
    let cons: Vec<(Vec2, f64)> = [k.a1(), k.a2()]
        .iter()
        .map(|a| {
            let v: Vec<f64> = pts.iter().map(|p| p.dot(*a)).collect();
            let n = a.norm();
            (*a * (1.0 / n), r.eval(&v, e.weights()) / n)
        })
        .collect();
    RiskRegion2D::from_halfspaces(&cons)
}

fn common_coherent(profile: &RiskProfile) -> Result<RiskSpec> {
    profile.validate()?;
    profile.require_coherent()?;
    profile.common().ok_or(Error::NonIdenticalComponents)
}

/// Outer bound: a planar region, or half-spaces when `d > 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum OuterBound {
    Region(RiskRegion2D),
    HalfSpaces(HalfSpaceSet),
}

impl OuterBound {
    pub fn region(&self) -> Option<&RiskRegion2D> {
        match self {
            OuterBound::Region(r) => Some(r),
            OuterBound::HalfSpaces(_) => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            OuterBound::Region(r) => r.contains(Vec2::new(x[0], x[1])),
            OuterBound::HalfSpaces(h) => h.contains(x),
        }
    }

    pub fn scalarize(&self, u: &[f64]) -> Result<f64> {
        match self {
            OuterBound::Region(r) => Ok(r.scalarize(Vec2::new(u[0], u[1]))),
            OuterBound::HalfSpaces(h) => h.scalarize(u),
        }
    }
}

impl Serialize for OuterBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OuterBound::Region(r) => r.serialize(s),
            OuterBound::HalfSpaces(h) => h.serialize(s),
        }
    }
}

/// `∩ᵤ {x : ⟨x, u⟩ ≥ r(h_𝐗(u))}` over the given directions; directions with
/// an infinite support in some charged scenario are skipped.
pub fn lower_bound_general(p: &SetPortfolio, profile: &RiskProfile, directions: &[Vec<f64>]) -> Result<OuterBound> {
    let r = common_coherent(profile)?;
    let e = p.ensemble();
    if profile.dim() != e.dim() {
        return Err(Error::Dimension { expected: e.dim(), got: profile.dim() });
    }
    for u in directions {
        p.support(0, u)?;
    }
    let w = e.weights();
    let cons: Vec<(Vec<f64>, f64)> = directions
        .par_iter()
        .map(|u| {
            let h = p.support_all(u).expect("checked direction");
            if h.iter().zip(w).any(|(h, w)| *w > 0.0 && !h.is_finite()) {
                return None;
            }
            // charge-zero scenarios do not enter the risk
            let h: Vec<f64> = h.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
            Some((u.clone(), r.eval(&h, w)))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    if cons.is_empty() {
        return Err(Error::WholePlane(
            "the support function is infinite in every grid direction, so the dual bound is the whole space".into(),
        ));
    }
    let set = HalfSpaceSet::new(e.dim(), cons)?;
    if e.dim() == 2 {
        Ok(OuterBound::Region(set.to_region()?))
    } else {
        Ok(OuterBound::HalfSpaces(set))
    }
}

/// Law of the exchange rate in a random half-plane model.
#[derive(Debug, Clone, Copy)]
pub enum RateModel<'a> {
    /// `π = m·exp(σZ - σ²/2)`.
    Lognormal { mean: f64, sigma: f64 },
    Empirical { rates: &'a [f64], weights: &'a [f64] },
}

/// Cones bracketing the risk of a random half-plane `{x : ⟨x, (π, 1)⟩ ≤ 0}`.
///
/// Slopes are those of the two boundary half-lines: the one in the fourth
/// quadrant first, then the one in the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBounds {
    pub c1_slopes: [f64; 2],
    pub c2_slopes: [f64; 2],
    #[serde(skip)]
    pub c1: ConvexCone2D,
    #[serde(skip)]
    pub c2: ConvexCone2D,
}

/// `C₁` (inner) has slopes `r(π)` and `1/r(1/π)`; `C₂` (outer) has slopes
/// `VaR_α(π)` and `VaR_{1-α}(π)`. Requires `α ≤ ½`.
pub fn cone_risk_bounds(model: &RateModel, spec: &RiskSpec) -> Result<ConeBounds> {
    spec.validate()?;
    if !spec.is_coherent() {
        return Err(Error::NotCoherent(spec.kind.name().into()));
    }
    let alpha = match spec.kind {
        crate::riskstats::RiskKind::ExpectedShortfall => spec.level,
        _ => 0.5_f64.min(spec.level),
    };
    if spec.kind == crate::riskstats::RiskKind::ExpectedShortfall && alpha > 0.5 {
        return Err(Error::InvalidLevel(alpha));
    }
    let (r_pi, r_inv, var_lo, var_hi) = match model {
        RateModel::Lognormal { mean, sigma } => {
            if !(*mean > 0.0 && mean.is_finite()) {
                return Err(Error::InvalidInput(format!("rate mean {mean} must be positive")));
            }
            if *sigma == 0.0 {
                (-mean, -1.0 / mean, -mean, -mean)
            } else {
                if spec.kind != crate::riskstats::RiskKind::ExpectedShortfall {
                    return Err(Error::InvalidInput("closed-form cone bounds exist for expected shortfall only".into()));
                }
                let t = es_var_lognormal_mean_one(*sigma, alpha)?.scaled(*mean);
                (t.es_pi, t.es_inv_pi, t.var_lo, t.var_hi)
            }
        }
        RateModel::Empirical { rates, weights } => {
            if rates.len() != weights.len() || rates.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
                return Err(Error::InvalidInput("rates must be positive and match the weights".into()));
            }
            let inv: Vec<f64> = rates.iter().map(|p| 1.0 / p).collect();
            (
                spec.eval(rates, weights),
                spec.eval(&inv, weights),
                -quantile_left(rates, weights, alpha),
                -quantile_left(rates, weights, 1.0 - alpha),
            )
        }
    };
    let c1_slopes = [r_pi, 1.0 / r_inv];
    let c2_slopes = [var_lo, var_hi];
    Ok(ConeBounds { c1_slopes, c2_slopes, c1: slope_cone(c1_slopes)?, c2: slope_cone(c2_slopes)? })
}

/// Cone spanned by `(1, s₀)`, `(-1, -s₁)` and the quadrant.
fn slope_cone(s: [f64; 2]) -> Result<ConvexCone2D> {
    let lo = Vec2::new(1.0, s[0]);
    let hi = Vec2::new(-1.0, -s[1]);
    if lo.cross(hi) < -1e-12 || !(s[0].is_finite() && s[1].is_finite()) {
        return Err(Error::WholePlane(format!("half-lines with slopes {s:?} span more than a half-plane")));
    }
    Ok(ConvexCone2D::from_boundary(lo.normalized(), hi.normalized()).hull(&ConvexCone2D::orthant()))
}
