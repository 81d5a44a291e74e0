//! The achievable region `R(D_c) <= C(D_s, B)` and the smallest total
//! distortion `D = D_s + D_c` it admits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::capacity::{constrained_capacity, BaOptions, CapacityResult};
use super::estimator::{estimate_costs, estimate_marginal};
use super::model::{FiniteCasModel, InputDistribution};
use super::rate_distortion::{distortion_rate, rate_distortion_discrete};
use crate::error::{CasError, Result};

/// A point `(D_s, D_c, D, R, C, B)` of the distortion region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub d_s: f64,
    pub d_c: f64,
    pub d_total: f64,
    /// Rate needed by the estimate at `d_c`, nats.
    pub rate: f64,
    /// Constrained capacity at `(d_s, budget)`, nats.
    pub capacity: f64,
    pub budget: f64,
}

impl TradeoffPoint {
    pub fn new(d_s: f64, d_c: f64, rate: f64, capacity: f64, budget: f64) -> Self {
        Self {
            d_s,
            d_c,
            d_total: d_s + d_c,
            rate,
            capacity,
            budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `C(d_s, B) - R(d_c)` in nats.
    pub margin: f64,
    pub capacity: f64,
    pub rate: f64,
    pub input: InputDistribution,
    /// Law of the estimate under the capacity-achieving input.
    pub estimate_law: Vec<f64>,
}

/// Checks `R(d_c) <= C(d_s, B)`.
///
/// The source seen by the rate-distortion stage is the estimate law induced
/// by the capacity-achieving input distribution.
pub fn theorem1_feasible(
    model: &FiniteCasModel,
    d_s: f64,
    d_c: f64,
    budget: f64,
    opts: &BaOptions,
) -> Result<FeasibilityReport> {
    let cap = constrained_capacity(model, d_s, budget, opts)?;
    let estimate_law = estimate_marginal(model, &cap.input.probs);
    let rd = rate_distortion_discrete(&estimate_law, model.link_distortion(), d_c, opts)?;
    let margin = cap.capacity - rd.rate;
    Ok(FeasibilityReport {
        feasible: margin >= 0.0,
        margin,
        capacity: cap.capacity,
        rate: rd.rate,
        input: cap.input,
        estimate_law,
    })
}

fn point_at(model: &FiniteCasModel, d_s: f64, budget: f64, opts: &BaOptions) -> Result<TradeoffPoint> {
    let CapacityResult { capacity, input, .. } = constrained_capacity(model, d_s, budget, opts)?;
    let law = estimate_marginal(model, &input.probs);
    let dr = distortion_rate(&law, model.link_distortion(), capacity, opts)?;
    Ok(TradeoffPoint::new(d_s, dr.distortion, dr.rate, capacity, budget))
}

/// Grid of estimation-distortion thresholds over `[min e, max e]` with
/// spacing at most `step`.
fn d_s_grid(e: &[f64], step: f64) -> Vec<f64> {
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![lo];
    }
    let n = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| if k == n { hi } else { lo + k as f64 * step })
        .collect()
}

/// Boundary of the region: for each `d_s` on the grid, the smallest `d_c`
/// with `R(d_c) <= C(d_s, B)`. Grid points where the constraints are jointly
/// infeasible are skipped.
pub fn tradeoff_curve(
    model: &FiniteCasModel,
    budget: f64,
    step: f64,
    opts: &BaOptions,
) -> Result<Vec<TradeoffPoint>> {
    model.validate()?;
    if step.is_nan() || step <= 0.0 {
        return Err(CasError::InvalidModel(format!("grid step must be positive, got {step}")));
    }
    let e = estimate_costs(model);
    let grid = d_s_grid(&e, step);
    let points: Vec<Result<TradeoffPoint>> = grid
        .par_iter()
        .map(|&d_s| point_at(model, d_s, budget, opts))
        .collect();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        match p {
            Ok(p) => out.push(p),
            Err(CasError::InfeasibleConstraint(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Smallest `D_s + D_c` over the region boundary, sweeping `d_s` with the
/// given spacing. Ties go to the smaller `d_s`.
pub fn min_total_distortion(
    model: &FiniteCasModel,
    budget: f64,
    step: f64,
    opts: &BaOptions,
) -> Result<TradeoffPoint> {
    let curve = tradeoff_curve(model, budget, step, opts)?;
    curve
        .into_iter()
        .reduce(|best, p| if p.d_total < best.d_total { p } else { best })
        .ok_or_else(|| {
            CasError::InfeasibleConstraint(format!("no estimation threshold is feasible under budget {budget}"))
        })
}
