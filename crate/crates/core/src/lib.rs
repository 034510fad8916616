//! Set-valued coherent risk measures of multivariate portfolios.
//!
//! A set-valued portfolio is a random closed convex lower set of attainable
//! post-trade gains. Its selection risk measure is the closure of the union of
//! `r(ξ) + R₊ᵈ` over all selections `ξ`, where `r` applies a univariate coherent
//! risk functional to each coordinate. The crate approximates that region
//!
//! * from inside, by evaluating catalogues of concrete trading strategies
//!   ([`selections`]) and taking the convex hull of their risk vectors plus
//!   a proven recession cone ([`bounds::inner_region`]);
//! * from outside, by intersecting the dual half-spaces
//!   `⟨x, u⟩ ≥ r(h_X(u))` over a direction grid ([`bounds::lower_bound_general`]).
//!
//! Planar regions are exact vertex-chain plus recession-cone objects
//! ([`geom2d::RiskRegion2D`]); only display and distances need a window.

pub mod bounds;
pub mod error;
pub mod geom2d;
pub mod markets;
pub mod riskstats;
pub mod scenarios;
pub mod selections;

pub use bounds::{compute_bundle, scalarize_bundle, BundleOptions, OuterBound, RiskBundle};
pub use error::{Error, Result};
pub use geom2d::{ConvexCone2D, HalfSpaceSet, RiskRegion2D, Vec2, Window};
pub use markets::{BidAskMatrix, ExchangeCone2D, PortfolioKind, ScenarioEnsemble, SetPortfolio};
pub use riskstats::{RiskKind, RiskProfile, RiskSpec, WeightedSample};
pub use selections::{SelectionFamily, SelectionMatrix, Strategy, StrategyGrid};

/// Round to `digits` significant decimal digits.
///
/// Used for every serialized number so that output files are stable across
/// platforms and re-reads are idempotent. Negative zero is mapped to zero.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    s.parse::<f64>().unwrap_or(v) + 0.0
}
