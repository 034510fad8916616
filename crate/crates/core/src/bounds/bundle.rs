use serde::Serialize;

use super::{
    cone_risk_bounds, direction_grid, inner_points, lower_bound_det_cone, lower_bound_general,
    lower_bound_random_halfplane, marginalized_bound, proven_recession, ConeBounds, OuterBound, RateModel,
    DEFAULT_DIRECTIONS,
};
use crate::error::{Error, Result};
use crate::geom2d::{hausdorff_on_window, RiskRegion2D, Vec2, Window};
use crate::markets::{ExchangeCone2D, PortfolioKind, SetPortfolio};
use crate::riskstats::RiskProfile;
use crate::round_sig;
use crate::selections::Strategy;

/// Knobs of [`compute_bundle`].
#[derive(Debug, Clone)]
pub struct BundleOptions {
    /// Empty means the default catalogue of the portfolio kind.
    pub strategies: Vec<Strategy>,
    pub directions: usize,
    /// Only used for the windowed distances in the diagnostics.
    pub window: Option<Window>,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self { strategies: vec![], directions: DEFAULT_DIRECTIONS, window: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleMeta {
    pub kind: String,
    pub risk: RiskProfile,
    pub scenarios: usize,
    pub strategies: Vec<String>,
    pub selections: usize,
    pub outer_method: String,
    pub directions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone_bounds: Option<ConeBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hausdorff_inner_outer: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hausdorff_marginal_inner: Option<f64>,
}

/// Sandwich `marginal ⊆ inner ⊆ ρ_s ⊆ outer`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskBundle {
    pub inner: RiskRegion2D,
    pub outer: OuterBound,
    pub marginal: RiskRegion2D,
    pub meta: BundleMeta,
}

/// Runs every strategy, the outer bound matching the portfolio kind and the
/// marginalized bound.
pub fn compute_bundle(p: &SetPortfolio, profile: &RiskProfile, opts: &BundleOptions) -> Result<RiskBundle> {
    profile.validate()?;
    profile.require_coherent()?;
    p.ensemble().require_dim(2)?;
    let strategies = if opts.strategies.is_empty() { Strategy::defaults_for(p.kind()) } else { opts.strategies.clone() };
    let (inner, selections) = inner_points(p, &strategies, profile)?;
    let rec = proven_recession(p, profile)?;
    let marginal = marginalized_bound(p.ensemble(), profile, &rec)?;

    let spec = profile.common().ok_or(Error::NonIdenticalComponents)?;
    let mut cone_bounds = None;
    let (outer, outer_method, directions) = match p.kind() {
        PortfolioKind::ConeDet { pi12, pi21 } => {
            let k = ExchangeCone2D::new(*pi12, *pi21)?;
            (OuterBound::Region(lower_bound_det_cone(p.ensemble(), &k, profile)?), "extreme-dual-directions", 2)
        }
        PortfolioKind::ConeHalfplaneRandom => {
            let e = p.ensemble();
            cone_bounds =
                Some(cone_risk_bounds(&RateModel::Empirical { rates: e.require_rates()?, weights: e.weights() }, &spec)?);
            let r = lower_bound_random_halfplane(e, profile, opts.directions)?;
            (OuterBound::Region(r), "random-dual-knapsack", opts.directions)
        }
        _ => {
            let grid = direction_grid(2, opts.directions);
            (lower_bound_general(p, profile, &grid)?, "direction-grid", grid.len())
        }
    };

    let (mut h_io, mut h_mi) = (None, None);
    if let (Some(w), Some(o)) = (&opts.window, outer.region()) {
        h_io = hausdorff_on_window(&inner, o, w).ok().map(|v| round_sig(v, 12));
        h_mi = hausdorff_on_window(&marginal, &inner, w).ok().map(|v| round_sig(v, 12));
    }
    let cone_bounds = cone_bounds.map(|mut c| {
        c.c1_slopes = c.c1_slopes.map(|v| round_sig(v, 12));
        c.c2_slopes = c.c2_slopes.map(|v| round_sig(v, 12));
        c
    });
    Ok(RiskBundle {
        inner: inner.rounded(12),
        outer: match outer {
            OuterBound::Region(r) => OuterBound::Region(r.rounded(12)),
            h => h,
        },
        marginal: marginal.rounded(12),
        meta: BundleMeta {
            kind: p.kind().name().into(),
            risk: profile.clone(),
            scenarios: p.ensemble().n(),
            strategies: strategies.iter().map(|s| s.name().to_string()).collect(),
            selections,
            outer_method: outer_method.into(),
            directions,
            cone_bounds,
            window: opts.window,
            hausdorff_inner_outer: h_io,
            hausdorff_marginal_inner: h_mi,
        },
    })
}

/// `(inf over inner, inf over outer)` of `⟨u, x⟩`; the first is never below
/// the second.
pub fn scalarize_bundle(b: &RiskBundle, u: &[f64]) -> Result<(f64, f64)> {
    scalarize_pair(&b.inner, &b.outer, u)
}

pub fn scalarize_pair(inner: &RiskRegion2D, outer: &OuterBound, u: &[f64]) -> Result<(f64, f64)> {
    if u.len() != 2 {
        return Err(Error::Dimension { expected: 2, got: u.len() });
    }
    if u.iter().any(|c| !c.is_finite() || *c < 0.0) || u.iter().all(|c| *c == 0.0) {
        return Err(Error::DirectionOutsideOrthant(u.to_vec()));
    }
    Ok((inner.scalarize(Vec2::new(u[0], u[1])), outer.scalarize(u)?))
}
