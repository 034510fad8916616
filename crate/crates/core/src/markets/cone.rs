use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom2d::{ConvexCone2D, Vec2, TOL};

/// Exchange rates `π⁽ⁱʲ⁾`: units of asset `i` paid for one unit of asset `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidAskMatrix {
    entries: Vec<Vec<f64>>,
}

impl BidAskMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let d = entries.len();
        if d == 0 || entries.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("bid-ask matrix must be square and nonempty".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row[i] != 1.0 {
                return Err(Error::InvalidInput(format!("diagonal entry {i} must be 1")));
            }
            if let Some(p) = row.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::InvalidInput(format!("bid-ask entry {p} must be positive")));
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if entries[i][j] > entries[i][k] * entries[k][j] * (1.0 + TOL) {
                        return Err(Error::InvalidInput(format!(
                            "indirect exchange {i}->{k}->{j} is cheaper than the direct one"
                        )));
                    }
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// The planar exchange cone; requires `d = 2`.
    pub fn cone2d(&self) -> Result<ExchangeCone2D> {
        if self.dim() != 2 {
            return Err(Error::Dimension { expected: 2, got: self.dim() });
        }
        ExchangeCone2D::new(self.entries[0][1], self.entries[1][0])
    }
}

/// Planar exchange cone `K` generated by `b₁ = (1, -π⁽²¹⁾)`,
/// `b₂ = (-π⁽¹²⁾, 1)` and the nonpositive quadrant.
///
/// Infinite rates mean no exchange in that direction; both infinite gives
/// `K = R₋²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeCone2D {
    pub pi12: f64,
    pub pi21: f64,
}

impl ExchangeCone2D {
    pub fn new(pi12: f64, pi21: f64) -> Result<Self> {
        if !(pi12 > 0.0 && pi21 > 0.0) || pi12.is_nan() || pi21.is_nan() {
            return Err(Error::InvalidInput(format!("exchange rates ({pi12}, {pi21}) must be positive")));
        }
        if pi12 * pi21 < 1.0 - TOL {
            return Err(Error::InvalidInput(format!(
                "rates ({pi12}, {pi21}) admit an arbitrage: π12·π21 < 1"
            )));
        }
        Ok(Self { pi12, pi21 })
    }

    pub fn symmetric(pi: f64) -> Result<Self> {
        Self::new(pi, pi)
    }

    pub fn no_exchange() -> Self {
        Self { pi12: f64::INFINITY, pi21: f64::INFINITY }
    }

    /// One unit of asset 1 bought for `π⁽²¹⁾` units of asset 2.
    pub fn b1(&self) -> Vec2 {
        if self.pi21.is_finite() {
            Vec2::new(1.0, -self.pi21)
        } else {
            Vec2::new(0.0, -1.0)
        }
    }

    pub fn b2(&self) -> Vec2 {
        if self.pi12.is_finite() {
            Vec2::new(-self.pi12, 1.0)
        } else {
            Vec2::new(-1.0, 0.0)
        }
    }

    /// Extreme direction of `K′` orthogonal to `b₁`.
    pub fn a1(&self) -> Vec2 {
        if self.pi21.is_finite() {
            Vec2::new(self.pi21, 1.0)
        } else {
            Vec2::new(1.0, 0.0)
        }
    }

    /// Extreme direction of `K′` orthogonal to `b₂`.
    pub fn a2(&self) -> Vec2 {
        if self.pi12.is_finite() {
            Vec2::new(1.0, self.pi12)
        } else {
            Vec2::new(0.0, 1.0)
        }
    }

    /// Whether `K` degenerates to a half-plane (`π⁽¹²⁾π⁽²¹⁾ = 1`).
    pub fn is_half_plane(&self) -> bool {
        (self.pi12 * self.pi21 - 1.0).abs() <= TOL
    }

    /// `K` itself.
    pub fn cone(&self) -> ConvexCone2D {
        ConvexCone2D::from_generators(&[self.b1(), self.b2(), Vec2::new(-1.0, -1.0)])
    }

    /// `K′ = {u : ⟨u, x⟩ ≤ 0 on K}`, spanned by `a₁` and `a₂`.
    pub fn dual_cone(&self) -> ConvexCone2D {
        ConvexCone2D::from_generators(&[self.a1(), self.a2()])
    }

    /// `Ǩ = -K`.
    pub fn solvency_cone(&self) -> ConvexCone2D {
        self.cone().neg()
    }

    /// Sign test against the dual generators.
    pub fn contains(&self, x: Vec2) -> bool {
        self.a1().normalized().dot(x) <= TOL && self.a2().normalized().dot(x) <= TOL
    }

    pub fn solvency_contains(&self, x: Vec2) -> bool {
        self.contains(-x)
    }

    /// Whether `u` lies in `K′` (relative tolerance on the direction).
    pub fn dual_contains(&self, u: Vec2) -> bool {
        let tol = TOL * u.norm().max(1.0);
        self.b1().normalized().dot(u) <= tol && self.b2().normalized().dot(u) <= tol && u.x >= -tol && u.y >= -tol
    }
}
