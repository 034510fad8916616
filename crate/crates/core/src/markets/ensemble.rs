use crate::error::{Error, Result};
use crate::geom2d::Vec2;
use crate::riskstats::validate_weights;

/// A weighted joint sample of gains and, optionally, exchange rates.
///
/// Gains are stored row-major, `n × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEnsemble {
    dim: usize,
    gains: Vec<f64>,
    rates: Option<Vec<f64>>,
    weights: Vec<f64>,
}

impl ScenarioEnsemble {
    /// `weights = None` means uniform.
    pub fn new(dim: usize, gains: Vec<f64>, rates: Option<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if gains.is_empty() || !gains.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} gain entries do not form rows of length {dim}",
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite gain {g}")));
        }
        let n = gains.len() / dim;
        if let Some(r) = &rates {
            if r.len() != n {
                return Err(Error::InvalidInput(format!("{} rates for {n} scenarios", r.len())));
            }
            if let Some(p) = r.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::InvalidInput(format!("exchange rate {p} must be positive")));
            }
        }
        let weights = validate_weights(weights.unwrap_or_else(|| vec![1.0 / n as f64; n]), n)?;
        Ok(Self { dim, gains, rates, weights })
    }

    /// Planar ensemble from points.
    pub fn from_points(points: &[Vec2], rates: Option<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let gains = points.iter().flat_map(|p| [p.x, p.y]).collect();
        Self::new(2, gains, rates, weights)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.gains[i * self.dim..(i + 1) * self.dim]
    }

    /// Planar gain of scenario `i`; requires `d = 2`.
    pub fn point(&self, i: usize) -> Vec2 {
        debug_assert_eq!(self.dim, 2);
        Vec2::new(self.gains[2 * i], self.gains[2 * i + 1])
    }

    pub fn points(&self) -> Vec<Vec2> {
        (0..self.n()).map(|i| self.point(i)).collect()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rates(&self) -> Option<&[f64]> {
        self.rates.as_deref()
    }

    pub fn require_rates(&self) -> Result<&[f64]> {
        self.rates.as_deref().ok_or(Error::MissingRates)
    }

    pub fn require_dim(&self, d: usize) -> Result<()> {
        if self.dim == d {
            Ok(())
        } else {
            Err(Error::Dimension { expected: d, got: self.dim })
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.gains[i * self.dim + j]).collect()
    }

    /// Weighted mean with terms summed in sorted order, so the result does
    /// not depend on scenario order.
    pub fn sorted_mean(values: &[f64], weights: &[f64]) -> f64 {
        let mut terms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        terms.iter().map(|(v, w)| v * w).sum()
    }

    pub fn column_mean(&self, j: usize) -> f64 {
        Self::sorted_mean(&self.column(j), &self.weights)
    }

    /// Single-scenario ensemble at the mean gain (and mean rate).
    pub fn mean(&self) -> Self {
        let gains = (0..self.dim).map(|j| self.column_mean(j)).collect();
        let rates = self.rates.as_ref().map(|r| vec![Self::sorted_mean(r, &self.weights)]);
        Self { dim: self.dim, gains, rates, weights: vec![1.0] }
    }

    /// Scenarios reordered so that new row `k` is old row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n(), "permutation length");
        let mut gains = Vec::with_capacity(self.gains.len());
        for &i in perm {
            gains.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            gains,
            rates: self.rates.as_ref().map(|r| perm.iter().map(|&i| r[i]).collect()),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Every gain shifted by the deterministic vector `a`.
    pub fn shifted(&self, a: &[f64]) -> Self {
        assert_eq!(a.len(), self.dim);
        let mut out = self.clone();
        for (k, g) in out.gains.iter_mut().enumerate() {
            *g += a[k % self.dim];
        }
        out
    }

    /// Every gain multiplied by `c`; rates unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.gains.iter_mut().for_each(|g| *g *= c);
        out
    }

    /// Same scenarios with gains replaced row by row.
    pub fn with_gains(&self, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != self.gains.len() {
            return Err(Error::Dimension { expected: self.gains.len(), got: gains.len() });
        }
        Self::new(self.dim, gains, self.rates.clone(), Some(self.weights.clone()))
    }
}
