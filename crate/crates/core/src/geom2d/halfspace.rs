use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::region::RiskRegion2D;
use super::vec2::{Vec2, TOL};
use crate::error::{Error, Result};

/// One constraint `⟨normal, x⟩ ≥ offset`; `normal` is a unit vector with
/// nonnegative coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Intersection of half-spaces in `d` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceSet {
    dim: usize,
    constraints: Vec<HalfSpace>,
}

impl HalfSpaceSet {
    /// Normalizes every direction; rejects directions leaving the
    /// nonnegative orthant.
    pub fn new(dim: usize, raw: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyConstraints);
        }
        let mut constraints = Vec::with_capacity(raw.len());
        for (u, c) in raw {
            if u.len() != dim {
                return Err(Error::Dimension { expected: dim, got: u.len() });
            }
            if u.iter().any(|x| !x.is_finite() || *x < -TOL) || !c.is_finite() {
                return Err(Error::DirectionOutsideOrthant(u));
            }
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(Error::InvalidInput("zero direction".into()));
            }
            constraints.push(HalfSpace {
                normal: u.iter().map(|x| x.max(0.0) / n).collect(),
                offset: c / n,
            });
        }
        Ok(Self { dim, constraints })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[HalfSpace] {
        &self.constraints
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|h| dot(&h.normal, x) >= h.offset - TOL)
    }

    /// `inf {⟨u, x⟩ : x in the set}`; `-∞` when unbounded.
    pub fn scalarize(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: u.len() });
        }
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = u
            .iter()
            .map(|c| lp.add_var(*c, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        for h in &self.constraints {
            let expr: Vec<_> = vars.iter().copied().zip(h.normal.iter().copied()).collect();
            lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, h.offset);
        }
        match lp.solve() {
            Ok(sol) => Ok(sol.objective()),
            Err(minilp::Error::Unbounded) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(Error::Lp(e.to_string())),
        }
    }

    /// Planar polygon form; only for `d = 2`.
    pub fn to_region(&self) -> Result<RiskRegion2D> {
        if self.dim != 2 {
            return Err(Error::Dimension { expected: 2, got: self.dim });
        }
        let cs: Vec<_> = self
            .constraints
            .iter()
            .map(|h| (Vec2::new(h.normal[0], h.normal[1]), h.offset))
            .collect();
        RiskRegion2D::from_halfspaces(&cs)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_in_three_dimensions() {
        let h = HalfSpaceSet::new(
            3,
            vec![(vec![1.0, 0.0, 0.0], 1.0), (vec![0.0, 2.0, 0.0], 2.0), (vec![0.0, 0.0, 1.0], -1.0)],
        )
        .unwrap();
        assert!(h.contains(&[1.0, 1.0, -1.0]));
        assert!(!h.contains(&[0.9, 1.0, -1.0]));
        assert!((h.scalarize(&[1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(h.scalarize(&[1.0, -1.0, 0.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn validation() {
        assert_eq!(HalfSpaceSet::new(2, vec![]), Err(Error::EmptyConstraints));
        assert!(HalfSpaceSet::new(2, vec![(vec![1.0, -1.0], 0.0)]).is_err());
        assert!(HalfSpaceSet::new(2, vec![(vec![1.0], 0.0)]).is_err());
    }

    #[test]
    fn planar_lp_matches_polygon() {
        let h = HalfSpaceSet::new(2, vec![(vec![5.0, 1.0], -2.0), (vec![1.0, 5.0], -2.0)]).unwrap();
        let r = h.to_region().unwrap();
        for u in [[1.0, 1.0], [5.0, 1.0], [2.0, 3.0]] {
            let lp = h.scalarize(&u).unwrap();
            assert!((lp - r.scalarize(Vec2::new(u[0], u[1]))).abs() < 1e-9);
        }
    }
}
