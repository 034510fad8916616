//! Dual bound for the frictionless random half-plane `{x : ⟨x, (π, 1)⟩ ≤ 0}`.
//!
//! The support function is finite only along the scenario normal, so the
//! deterministic-direction bound is vacuous. Instead the dual variable is a
//! random vector `W = z·(π, 1)` with `z ≥ 0`. Writing `c = (E[zπ], E[z])`,
//! both `zπ/c₁` and `z/c₂` must be dual densities of `r`, i.e. bounded by
//! `Γ = dual_density_cap`. Each admissible `z` yields
//! `⟨x, c⟩ ≥ -E[z·⟨X, (π, 1)⟩]`. For a target ratio `m = c₁/c₂` the best
//! `z` solves a two-constraint fractional knapsack, found by bisection on the
//! multiplier of `E[zπ] = m` and an exact mix of the two bracketing greedy
//! solutions.

use std::cmp::Ordering;

use super::direction_grid;
use crate::error::{Error, Result};
use crate::geom2d::{HalfSpaceSet, RiskRegion2D};
use crate::markets::ScenarioEnsemble;
use crate::riskstats::RiskProfile;

const BISECTION_STEPS: usize = 80;

struct Item {
    pi: f64,
    s: f64,
    w: f64,
}

/// Outer region from the random dual family, one constraint per grid
/// direction with a positive second coordinate, plus `(Eπ, 1)`.
pub fn lower_bound_random_halfplane(e: &ScenarioEnsemble, profile: &RiskProfile, directions: usize) -> Result<RiskRegion2D> {
    e.require_dim(2)?;
    profile.validate()?;
    profile.require_coherent()?;
    let spec = profile.common().ok_or(Error::NonIdenticalComponents)?;
    let cap = spec.dual_density_cap().expect("coherent");
    let rates = e.require_rates()?;
    let mut items: Vec<Item> = (0..e.n())
        .filter(|&i| e.weights()[i] > 0.0)
        .map(|i| {
            let p = e.point(i);
            Item { pi: rates[i], s: rates[i] * p.x + p.y, w: e.weights()[i] }
        })
        .collect();
    // canonical order makes every sum independent of the scenario order
    items.sort_by(|a, b| a.pi.total_cmp(&b.pi).then(a.s.total_cmp(&b.s)).then(a.w.total_cmp(&b.w)));

    let mut ratios: Vec<f64> = direction_grid(2, directions)
        .into_iter()
        .filter(|u| u[0] > 0.0 && u[1] > 0.0)
        .map(|u| u[0] / u[1])
        .collect();
    ratios.push(ScenarioEnsemble::sorted_mean(rates, e.weights()));

    let cons: Vec<(Vec<f64>, f64)> = ratios.iter().filter_map(|&m| constraint(&items, cap, m)).collect();
    if cons.is_empty() {
        return Err(Error::WholePlane(
            "no admissible dual variable: the risk of the random half-plane is the whole plane".into(),
        ));
    }
    HalfSpaceSet::new(2, cons)?.to_region()
}

fn constraint(items: &[Item], cap: f64, m: f64) -> Option<(Vec<f64>, f64)> {
    let kappa: Vec<f64> = items.iter().map(|it| cap.min(cap * m / it.pi)).collect();
    let capacity: f64 = items.iter().zip(&kappa).map(|(it, k)| if k.is_infinite() { f64::INFINITY } else { it.w * k }).sum();
    if capacity < 1.0 - 1e-12 {
        return None;
    }
    let f = |z: &[f64]| items.iter().zip(z).map(|(it, z)| it.w * z * it.pi).sum::<f64>();

    // μ → -∞ favours large π, μ → +∞ small π; ties by the worse outcome
    let mut z_lo = greedy(items, &kappa, |a, b| b.pi.total_cmp(&a.pi).then(a.s.total_cmp(&b.s)));
    let mut z_hi = greedy(items, &kappa, |a, b| a.pi.total_cmp(&b.pi).then(a.s.total_cmp(&b.s)));
    let (mut f_lo, mut f_hi) = (f(&z_lo), f(&z_hi));
    let tol = 1e-12 * m.max(1.0);
    if m > f_lo + tol || m < f_hi - tol {
        return None;
    }
    let smax = items.iter().map(|it| it.s.abs()).fold(0.0, f64::max);
    let pmin = items.iter().map(|it| it.pi).fold(f64::INFINITY, f64::min);
    let bound = 1e6 * (smax + 1.0) / pmin;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..BISECTION_STEPS {
        if f_lo - f_hi <= tol {
            break;
        }
        let mu = 0.5 * (lo + hi);
        let z = greedy(items, &kappa, |a, b| {
            (-b.s - mu * b.pi).total_cmp(&(-a.s - mu * a.pi)).then(a.pi.total_cmp(&b.pi)).then(a.s.total_cmp(&b.s))
        });
        let fz = f(&z);
        if fz >= m {
            (z_lo, f_lo, lo) = (z, fz, mu);
        } else {
            (z_hi, f_hi, hi) = (z, fz, mu);
        }
    }
    let theta = if f_lo - f_hi > 0.0 { ((m - f_hi) / (f_lo - f_hi)).clamp(0.0, 1.0) } else { 1.0 };
    let z: Vec<f64> = z_lo.iter().zip(&z_hi).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
    let c1 = f(&z);
    let c2: f64 = items.iter().zip(&z).map(|(it, z)| it.w * z).sum();
    let value: f64 = -items.iter().zip(&z).map(|(it, z)| it.w * z * it.s).sum::<f64>();
    (c1 > 0.0 && c2 > 0.0 && value.is_finite()).then(|| (vec![c1, c2], value))
}

/// Fills unit mass `Σ wᵢzᵢ = 1` in the given priority order with
/// `zᵢ ≤ κᵢ`; returns `z` in item order.
fn greedy(items: &[Item], kappa: &[f64], cmp: impl Fn(&Item, &Item) -> Ordering) -> Vec<f64> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| cmp(&items[a], &items[b]));
    let mut z = vec![0.0; items.len()];
    let mut left = 1.0;
    for i in order {
        if left <= 0.0 {
            break;
        }
        let take = (kappa[i] * items[i].w).min(left);
        z[i] = take / items[i].w;
        left -= take;
    }
    z
}
