//! Separated-waveform (SW) baseline: independent sensing and communication
//! waveforms that share the power budget, `tr Q_s + tr Q_c <= T P_T`.

use serde::{Deserialize, Serialize};

use super::objective::{evaluate, Evaluation};
use super::OptResult;
use crate::gaussian::linalg::{c, herm_eig, hermitize, CMat};
use crate::gaussian::model::{GramMatrix, TrmModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwOptions {
    /// Number of power splits on `[0, 1]`, endpoints included.
    pub split_grid: usize,
}

impl Default for SwOptions {
    fn default() -> Self {
        Self { split_grid: 201 }
    }
}

/// Water-filling over modes with the given floors: `p_i = (mu - floor_i)^+`
/// with `sum p_i = total`. Infinite floors receive nothing. The level `mu`
/// is found by bisection.
pub fn waterfill_power(floors: &[f64], total: f64) -> Vec<f64> {
    let finite: Vec<f64> = floors.iter().copied().filter(|f| f.is_finite()).collect();
    if total <= 0.0 || finite.is_empty() {
        return vec![0.0; floors.len()];
    }
    let used = |mu: f64| -> f64 { finite.iter().map(|f| (mu - f).max(0.0)).sum() };
    let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) + total;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) > total {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let alloc: Vec<f64> = floors.iter().map(|f| (lo - f).max(0.0)).collect();
    // bisection residual goes to the active modes
    let sum: f64 = alloc.iter().sum();
    if sum > 0.0 {
        alloc.iter().map(|p| p * total / sum).collect()
    } else {
        alloc
    }
}

fn gram_from_modes(vectors: &CMat, powers: &[f64]) -> CMat {
    let n = powers.len();
    let mut scaled = vectors.clone();
    for k in 0..n {
        for r in 0..n {
            scaled[(r, k)] *= c(powers[k]);
        }
    }
    hermitize(&(scaled * vectors.adjoint()))
}

/// Gram minimizing `D_s` under `tr Q <= power`: diagonal in the prior
/// eigenbasis with `q_i = (mu - noise_s / (T s_i))^+`.
pub fn sensing_gram(model: &TrmModel, power: f64) -> CMat {
    let (s, u) = herm_eig(&model.sigma_s);
    let floor = 1e-12 * s.first().copied().unwrap_or(0.0);
    let t = model.t as f64;
    let floors: Vec<f64> = s
        .iter()
        .map(|&si| if si > floor && si > 0.0 { model.noise_s / (t * si) } else { f64::INFINITY })
        .collect();
    gram_from_modes(&u, &waterfill_power(&floors, power))
}

/// Gram maximizing `MI` under `tr Q <= power`: diagonal in the eigenbasis of
/// `H_c^H H_c` with `q_i = (mu - noise_c / (T g_i))^+`.
pub fn comm_gram(model: &TrmModel, power: f64) -> CMat {
    let gram = model.h_c.adjoint() * &model.h_c;
    let (g, v) = herm_eig(&gram);
    let floor = 1e-12 * g.first().copied().unwrap_or(0.0);
    let t = model.t as f64;
    let floors: Vec<f64> = g
        .iter()
        .map(|&gi| if gi > floor && gi > 0.0 { model.noise_c / (t * gi) } else { f64::INFINITY })
        .collect();
    gram_from_modes(&v, &waterfill_power(&floors, power))
}

/// Evaluates the SW scheme at power split `rho` (fraction for sensing).
pub fn sw_at_split(model: &TrmModel, rho: f64) -> (CMat, CMat, Evaluation) {
    let budget = model.trace_budget();
    let q_s = sensing_gram(model, rho * budget);
    let q_c = comm_gram(model, (1.0 - rho) * budget);
    let eval = evaluate(model, &q_s, &q_c);
    (q_s, q_c, eval)
}

/// Best SW configuration over an even grid of power splits. Ties go to the
/// smaller sensing share.
pub fn optimize_sw(model: &TrmModel, opts: &SwOptions) -> crate::error::Result<OptResult> {
    if opts.split_grid < 2 {
        return Err(crate::error::CasError::InvalidModel("split grid needs at least 2 points".into()));
    }
    let last = (opts.split_grid - 1) as f64;
    let mut best: Option<(f64, CMat, CMat, Evaluation)> = None;
    for k in 0..opts.split_grid {
        let rho = k as f64 / last;
        let (q_s, q_c, eval) = sw_at_split(model, rho);
        if best.as_ref().is_none_or(|b| eval.total() < b.3.total()) {
            best = Some((rho, q_s, q_c, eval));
        }
    }
    let (rho, q_s, q_c, eval) = best.expect("grid is nonempty");
    let q_s = GramMatrix { q: q_s };
    let q_c = GramMatrix { q: q_c };
    Ok(OptResult {
        trace_used: q_s.trace() + q_c.trace(),
        point: eval.point(model.trace_budget()),
        q_star: q_s,
        q_comm: Some(q_c),
        split: Some(rho),
        iterations: opts.split_grid,
        converged: true,
    })
}
