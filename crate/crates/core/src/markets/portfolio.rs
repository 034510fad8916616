use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::cone::ExchangeCone2D;
use super::ensemble::ScenarioEnsemble;
use crate::error::{Error, Result};
use crate::geom2d::{Vec2, TOL};

/// Vertices `X⁽ʲ⁾` of a segment-hull portfolio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentVertices {
    /// `(X₁, X₂)` and `(X₂, X₁)`: free reallocation of the gain between the
    /// two lines.
    Swap,
    /// `X + dⱼ` for deterministic offsets `dⱼ`.
    Offsets(Vec<Vec<f64>>),
}

/// The implemented set-valued portfolio shapes `𝐗ᵢ` per scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PortfolioKind {
    /// `X + K` for a deterministic exchange cone.
    ConeDet { pi12: f64, pi21: f64 },
    /// `X + Kᵢ`, `Kᵢ` the half-plane with normal `(πᵢ, 1)`.
    ConeHalfplaneRandom,
    /// `X + (Kᵢ ∩ (a + R₋²))` for the random half-plane `Kᵢ` and cap `a`.
    LiquidityCapped {
        #[serde(default = "unit_cap")]
        cap: [f64; 2],
    },
    /// `X + B_R + R₋ᵈ`.
    Ball { radius: f64 },
    /// `conv{X⁽ʲ⁾} + R₋ᵈ`.
    SegmentHull { vertices: SegmentVertices },
}

fn unit_cap() -> [f64; 2] {
    [1.0, 1.0]
}

impl PortfolioKind {
    pub fn name(&self) -> &'static str {
        match self {
            PortfolioKind::ConeDet { .. } => "cone-det",
            PortfolioKind::ConeHalfplaneRandom => "cone-halfplane-random",
            PortfolioKind::LiquidityCapped { .. } => "liquidity-capped",
            PortfolioKind::Ball { .. } => "ball",
            PortfolioKind::SegmentHull { .. } => "segment-hull",
        }
    }

    pub fn exchange_cone(&self) -> Option<ExchangeCone2D> {
        match *self {
            PortfolioKind::ConeDet { pi12, pi21 } => Some(ExchangeCone2D { pi12, pi21 }),
            _ => None,
        }
    }

    /// Whether every scenario set is a translate of a cone.
    pub fn is_conical(&self) -> bool {
        matches!(self, PortfolioKind::ConeDet { .. } | PortfolioKind::ConeHalfplaneRandom)
    }

    pub fn uses_rates(&self) -> bool {
        matches!(self, PortfolioKind::ConeHalfplaneRandom | PortfolioKind::LiquidityCapped { .. })
    }
}

/// A set-valued portfolio on a scenario ensemble.
#[derive(Debug, Clone)]
pub struct SetPortfolio<'a> {
    ensemble: &'a ScenarioEnsemble,
    kind: PortfolioKind,
}

impl<'a> SetPortfolio<'a> {
    pub fn new(ensemble: &'a ScenarioEnsemble, kind: PortfolioKind) -> Result<Self> {
        match &kind {
            PortfolioKind::ConeDet { pi12, pi21 } => {
                ensemble.require_dim(2)?;
                ExchangeCone2D::new(*pi12, *pi21)?;
            }
            PortfolioKind::ConeHalfplaneRandom => {
                ensemble.require_dim(2)?;
                ensemble.require_rates()?;
            }
            PortfolioKind::LiquidityCapped { cap } => {
                ensemble.require_dim(2)?;
                ensemble.require_rates()?;
                if !cap.iter().all(|a| a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidInput(format!("liquidity cap {cap:?} must be positive")));
                }
            }
            PortfolioKind::Ball { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidInput(format!("ball radius {radius} must be positive")));
                }
            }
            PortfolioKind::SegmentHull { vertices } => match vertices {
                SegmentVertices::Swap => ensemble.require_dim(2)?,
                SegmentVertices::Offsets(offsets) => {
                    if offsets.is_empty() {
                        return Err(Error::InvalidInput("segment hull needs at least one offset".into()));
                    }
                    for o in offsets {
                        if o.len() != ensemble.dim() {
                            return Err(Error::Dimension { expected: ensemble.dim(), got: o.len() });
                        }
                        if o.iter().any(|v| !v.is_finite()) {
                            return Err(Error::InvalidInput("non-finite segment offset".into()));
                        }
                    }
                    // X itself must be attainable
                    if !dominated_by_hull(&vec![0.0; ensemble.dim()], offsets) {
                        return Err(Error::InvalidInput("the offset hull must dominate the origin".into()));
                    }
                }
            },
        }
        Ok(Self { ensemble, kind })
    }

    pub fn ensemble(&self) -> &'a ScenarioEnsemble {
        self.ensemble
    }

    pub fn kind(&self) -> &PortfolioKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    /// Hull vertices of scenario `i` for the segment-hull kind.
    pub fn segment_vertices(&self, i: usize) -> Vec<Vec<f64>> {
        let x = self.ensemble.row(i);
        match &self.kind {
            PortfolioKind::SegmentHull { vertices: SegmentVertices::Swap } => {
                vec![vec![x[0], x[1]], vec![x[1], x[0]]]
            }
            PortfolioKind::SegmentHull { vertices: SegmentVertices::Offsets(offsets) } => offsets
                .iter()
                .map(|o| x.iter().zip(o).map(|(a, b)| a + b).collect())
                .collect(),
            _ => vec![x.to_vec()],
        }
    }

    /// `h_{𝐗ᵢ}(u) = sup {⟨x, u⟩ : x ∈ 𝐗ᵢ}`, possibly `+∞`.
    pub fn support(&self, i: usize, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: u.len() });
        }
        if u.iter().any(|c| !c.is_finite() || *c < -TOL) || u.iter().all(|c| *c == 0.0) {
            return Err(Error::DirectionOutsideOrthant(u.to_vec()));
        }
        Ok(self.support_unchecked(i, u))
    }

    pub(crate) fn support_unchecked(&self, i: usize, u: &[f64]) -> f64 {
        let x = self.ensemble.row(i);
        let xu: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
        match &self.kind {
            PortfolioKind::ConeDet { pi12, pi21 } => {
                let k = ExchangeCone2D { pi12: *pi12, pi21: *pi21 };
                if k.dual_contains(Vec2::new(u[0], u[1])) {
                    xu
                } else {
                    f64::INFINITY
                }
            }
            PortfolioKind::ConeHalfplaneRandom => {
                let pi = self.ensemble.rates().expect("validated")[i];
                let n = Vec2::new(pi, 1.0);
                let uu = Vec2::new(u[0], u[1]);
                if uu.cross(n).abs() <= TOL * uu.norm().max(1.0) * n.norm() && uu.dot(n) >= 0.0 {
                    xu
                } else {
                    f64::INFINITY
                }
            }
            PortfolioKind::LiquidityCapped { cap } => {
                let pi = self.ensemble.rates().expect("validated")[i];
                xu + (cap[0] * (u[0] - pi * u[1])).max(cap[1] * (u[1] - u[0] / pi))
            }
            PortfolioKind::Ball { radius } => xu + radius * u.iter().map(|c| c * c).sum::<f64>().sqrt(),
            PortfolioKind::SegmentHull { .. } => self
                .segment_vertices(i)
                .iter()
                .map(|v| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Supports of every scenario in direction `u`.
    pub fn support_all(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.support(0, u)?;
        Ok((0..self.ensemble.n()).map(|i| self.support_unchecked(i, u)).collect())
    }

    /// Exact membership `x ∈ 𝐗ᵢ` with tolerance `1e-9`.
    pub fn contains(&self, i: usize, x: &[f64]) -> bool {
        let xi = self.ensemble.row(i);
        let y: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a - b).collect();
        match &self.kind {
            PortfolioKind::ConeDet { pi12, pi21 } => {
                ExchangeCone2D { pi12: *pi12, pi21: *pi21 }.contains(Vec2::new(y[0], y[1]))
            }
            PortfolioKind::ConeHalfplaneRandom => {
                let pi = self.ensemble.rates().expect("validated")[i];
                Vec2::new(pi, 1.0).normalized().dot(Vec2::new(y[0], y[1])) <= TOL
            }
            PortfolioKind::LiquidityCapped { cap } => {
                let pi = self.ensemble.rates().expect("validated")[i];
                Vec2::new(pi, 1.0).normalized().dot(Vec2::new(y[0], y[1])) <= TOL
                    && y[0] <= cap[0] + TOL
                    && y[1] <= cap[1] + TOL
            }
            PortfolioKind::Ball { radius } => {
                y.iter().map(|c| c.max(0.0).powi(2)).sum::<f64>().sqrt() <= radius + TOL
            }
            PortfolioKind::SegmentHull { .. } => dominated_by_hull(x, &self.segment_vertices(i)),
        }
    }
}

/// Whether `x ≤ Σ λⱼ vⱼ` for some convex weights `λ`.
fn dominated_by_hull(x: &[f64], verts: &[Vec<f64>]) -> bool {
    if verts.iter().any(|v| v.iter().zip(x).all(|(a, b)| *b <= a + TOL)) {
        return true;
    }
    if verts.len() == 2 {
        // λ ∈ [0, 1] with x ≤ v₁ + λ(v₀ - v₁) coordinatewise
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for k in 0..x.len() {
            let slope = verts[0][k] - verts[1][k];
            let need = x[k] - verts[1][k] - TOL;
            if slope > 0.0 {
                lo = lo.max(need / slope);
            } else if slope < 0.0 {
                hi = hi.min(need / slope);
            } else if need > 0.0 {
                return false;
            }
        }
        return lo <= hi + TOL;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambdas: Vec<_> = verts.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let ones: Vec<_> = lambdas.iter().map(|l| (*l, 1.0)).collect();
    lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    for k in 0..x.len() {
        let row: Vec<_> = lambdas.iter().zip(verts).map(|(l, v)| (*l, v[k])).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, x[k] - TOL);
    }
    lp.solve().is_ok()
}
