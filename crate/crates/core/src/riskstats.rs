//! Univariate law-invariant risk functionals on weighted empirical samples.
//!
//! Conventions (loss-negative, gains-positive):
//!
//! * `ES_α(X) = -(1/α) ∫₀^α q_X(u) du` with `q_X` the left-continuous quantile.
//!   The atom straddling level `α` contributes the fraction of its weight that
//!   fits under `α`, so the value is exact for discrete laws.
//! * `VaR_α(X) = -inf{x : F_X(x) ≥ α}`.
//! * `neg-expectation` is `-E X`; `neg-essinf` is `-min{x : P(X = x) > 0}`.
//!
//! Atoms are sorted by `(value, weight)`, so every functional is a symmetric
//! function of the scenarios and bit-identical under any permutation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Weight sums within this distance of one are renormalized silently.
pub const WEIGHT_RENORM_TOL: f64 = 1e-9;

/// Mass comparisons against `α` use this slack.
const MASS_TOL: f64 = 1e-12;

/// A discrete law: values with nonnegative probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let weights = validate_weights(weights, values.len())?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample value {v}")));
        }
        Ok(Self { values, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidWeights("empty sample".into()));
        }
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `v ↦ a·v + b` applied to every value; weights unchanged.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| a * v + b).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Checks lengths, signs and the unit sum; renormalizes tiny drift.
pub fn validate_weights(weights: Vec<f64>, len: usize) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::InvalidWeights("empty sample".into()));
    }
    if weights.len() != len {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} values",
            weights.len(),
            len
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or non-finite")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_RENORM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    if total == 1.0 {
        Ok(weights)
    } else {
        Ok(weights.into_iter().map(|w| w / total).collect())
    }
}

/// The four supported univariate functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskKind {
    ExpectedShortfall,
    ValueAtRisk,
    NegExpectation,
    NegEssinf,
}

impl RiskKind {
    pub fn name(self) -> &'static str {
        match self {
            RiskKind::ExpectedShortfall => "expected-shortfall",
            RiskKind::ValueAtRisk => "value-at-risk",
            RiskKind::NegExpectation => "neg-expectation",
            RiskKind::NegEssinf => "neg-essinf",
        }
    }
}

/// A univariate risk functional with its level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub kind: RiskKind,
    /// Ignored by `neg-expectation` and `neg-essinf`.
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_level() -> f64 {
    0.5
}

impl RiskSpec {
    pub fn new(kind: RiskKind, level: f64) -> Result<Self> {
        check_level(level)?;
        Ok(Self { kind, level })
    }

    pub fn expected_shortfall(level: f64) -> Result<Self> {
        Self::new(RiskKind::ExpectedShortfall, level)
    }

    pub fn value_at_risk(level: f64) -> Result<Self> {
        Self::new(RiskKind::ValueAtRisk, level)
    }

    pub fn neg_expectation() -> Self {
        Self { kind: RiskKind::NegExpectation, level: 0.5 }
    }

    pub fn neg_essinf() -> Self {
        Self { kind: RiskKind::NegEssinf, level: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        check_level(self.level)
    }

    pub fn is_coherent(&self) -> bool {
        self.kind != RiskKind::ValueAtRisk
    }

    /// Upper bound `c` of the dual densities `{ζ : 0 ≤ ζ ≤ c, Eζ = 1}`
    /// representing the functional; `None` for value-at-risk.
    pub fn dual_density_cap(&self) -> Option<f64> {
        match self.kind {
            RiskKind::ExpectedShortfall => Some(1.0 / self.level),
            RiskKind::NegExpectation => Some(1.0),
            RiskKind::NegEssinf => Some(f64::INFINITY),
            RiskKind::ValueAtRisk => None,
        }
    }

    /// Evaluates on pre-validated data (weights sum to one, equal lengths).
    pub fn eval(&self, values: &[f64], weights: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), weights.len());
        match self.kind {
            RiskKind::ExpectedShortfall => es_sorted(&tail_atoms(values, weights, self.level), self.level),
            RiskKind::ValueAtRisk => var_sorted(&tail_atoms(values, weights, self.level), self.level),
            RiskKind::NegExpectation => -sorted_atoms(values, weights).iter().map(|(v, w)| v * w).sum::<f64>(),
            RiskKind::NegEssinf => -sorted_atoms(values, weights).first().map(|a| a.0).unwrap_or(f64::NAN),
        }
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}

/// One functional per coordinate, `r = (r₁, …, r_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub components: Vec<RiskSpec>,
}

impl RiskProfile {
    pub fn identical(spec: RiskSpec, dim: usize) -> Self {
        Self { components: vec![spec; dim] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// The shared component, if all coordinates use the same functional.
    pub fn common(&self) -> Option<RiskSpec> {
        let first = *self.components.first()?;
        self.components
            .iter()
            .all(|c| c.kind == first.kind && (c.level == first.level || !uses_level(c.kind)))
            .then_some(first)
    }

    pub fn is_coherent(&self) -> bool {
        self.components.iter().all(RiskSpec::is_coherent)
    }

    pub fn require_coherent(&self) -> Result<()> {
        match self.components.iter().find(|c| !c.is_coherent()) {
            Some(c) => Err(Error::NotCoherent(c.kind.name().into())),
            None => Ok(()),
        }
    }

    /// Level used for quantile-based strategies: the first level-carrying
    /// component, else one half.
    pub fn quantile_level(&self) -> f64 {
        self.components
            .iter()
            .find(|c| uses_level(c.kind))
            .map(|c| c.level)
            .unwrap_or(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidInput("risk profile has no components".into()));
        }
        self.components.iter().try_for_each(RiskSpec::validate)
    }
}

fn uses_level(kind: RiskKind) -> bool {
    matches!(kind, RiskKind::ExpectedShortfall | RiskKind::ValueAtRisk)
}

/// Positive-weight atoms sorted by `(value, weight)`.
fn sorted_atoms(values: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, w)| (*v, *w))
        .collect();
    atoms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    atoms
}

/// The smallest atoms, in sorted order, whose cumulative mass reaches `alpha`.
///
/// Same sequence as the prefix of [`sorted_atoms`], found by partial selection.
fn tail_atoms(values: &[f64], weights: &[f64], alpha: f64) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, w)| (*v, *w))
        .collect();
    let cmp = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
    let n = atoms.len();
    let mut k = ((2.0 * alpha * n as f64).ceil() as usize).saturating_add(32);
    while k < n {
        atoms.select_nth_unstable_by(k, cmp);
        let head = &mut atoms[..k];
        head.sort_unstable_by(cmp);
        let mut mass = 0.0;
        if head.iter().any(|a| {
            mass += a.1;
            mass >= alpha
        }) {
            atoms.truncate(k);
            return atoms;
        }
        k = k.saturating_mul(2);
    }
    atoms.sort_unstable_by(cmp);
    atoms
}

fn es_sorted(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let mut integral = 0.0;
    let mut mass = 0.0;
    for &(v, w) in atoms {
        let room = alpha - mass;
        if room <= MASS_TOL * alpha {
            break;
        }
        integral += v * w.min(room);
        mass += w;
    }
    -integral / alpha + 0.0
}

fn var_sorted(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let mut mass = 0.0;
    for &(v, w) in atoms {
        mass += w;
        if mass >= alpha - MASS_TOL {
            return -v + 0.0;
        }
    }
    -atoms.last().map(|a| a.0).unwrap_or(f64::NAN)
}

/// Empirical expected shortfall `-(1/α)∫₀^α q(u) du`.
pub fn es_empirical(s: &WeightedSample, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    Ok(es_sorted(&tail_atoms(&s.values, &s.weights, alpha), alpha))
}

/// Empirical value-at-risk, the negated left `α`-quantile.
pub fn var_empirical(s: &WeightedSample, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    Ok(var_sorted(&tail_atoms(&s.values, &s.weights, alpha), alpha))
}

/// Left-continuous empirical `α`-quantile, `inf{x : F(x) ≥ α}`.
pub fn quantile_left(values: &[f64], weights: &[f64], alpha: f64) -> f64 {
    -var_sorted(&tail_atoms(values, weights, alpha), alpha)
}

pub fn risk_eval(spec: &RiskSpec, s: &WeightedSample) -> Result<f64> {
    spec.validate()?;
    Ok(spec.eval(&s.values, &s.weights))
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Expected shortfall of `N(μ, σ²)`: `-μ + σ φ(z_α) / α`.
pub fn es_normal(mu: f64, sigma: f64, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("normal volatility {sigma} must be positive")));
    }
    let n = std_normal();
    let z = n.inverse_cdf(alpha);
    Ok(-mu + sigma * n.pdf(z) / alpha)
}

/// Tail functionals of a lognormal rate `π = exp(σZ - σ²/2)` with `E π = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalTail {
    /// `ES_α(π)`.
    pub es_pi: f64,
    /// `ES_α(1/π)`.
    pub es_inv_pi: f64,
    /// `VaR_α(π)`.
    pub var_lo: f64,
    /// `VaR_{1-α}(π)`.
    pub var_hi: f64,
}

impl LognormalTail {
    /// Same functionals for `m·π` (mean `m`); all four are homogeneous.
    pub fn scaled(&self, mean: f64) -> Self {
        Self {
            es_pi: mean * self.es_pi,
            es_inv_pi: self.es_inv_pi / mean,
            var_lo: mean * self.var_lo,
            var_hi: mean * self.var_hi,
        }
    }
}

pub fn es_var_lognormal_mean_one(sigma: f64, alpha: f64) -> Result<LognormalTail> {
    check_level(alpha)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("lognormal volatility {sigma} must be positive")));
    }
    let n = std_normal();
    let z_lo = n.inverse_cdf(alpha);
    let z_hi = n.inverse_cdf(1.0 - alpha);
    let s2 = sigma * sigma;
    Ok(LognormalTail {
        es_pi: -n.cdf(z_lo - sigma) / alpha,
        es_inv_pi: -s2.exp() * (1.0 - n.cdf(z_hi + sigma)) / alpha,
        var_lo: -(-s2 / 2.0 + sigma * z_lo).exp(),
        var_hi: -(-s2 / 2.0 + sigma * z_hi).exp(),
    })
}
