//! Capacity constrained by estimation distortion and resource cost.
//!
//! `C(D_s, B) = max I(X;Y)` over input laws with `E[e(X)] <= D_s` and
//! `E[b(X)] <= B`. Each constraint gets a Lagrange multiplier; for fixed
//! multipliers the penalized problem is solved by Blahut-Arimoto, and the
//! multipliers are found by nested bisection on the constraint slacks. The
//! two bracketing solutions are finally mixed and an active constraint holds
//! with equality.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::estimator::estimate_costs;
use super::model::{FiniteCasModel, InputDistribution};
use crate::error::{CasError, Result};
use crate::info::{kl_to, mutual_information, output_distribution};

/// Stopping rules shared by the Blahut-Arimoto solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaOptions {
    /// Stop an inner Blahut-Arimoto run once the gap between its upper and
    /// lower bounds (nats) drops below this.
    pub gap_tol: f64,
    /// Hard cap on Blahut-Arimoto iterations per run.
    pub max_iters: usize,
    /// Accepted violation of an active constraint after multiplier search.
    pub slack_tol: f64,
    /// Relative width at which multiplier bisection stops.
    pub multiplier_rel_tol: f64,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            max_iters: 100_000,
            slack_tol: 1e-8,
            multiplier_rel_tol: 1e-12,
        }
    }
}

impl BaOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gap_tol > 0.0
            && self.slack_tol > 0.0
            && self.multiplier_rel_tol > 0.0
            && self.max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(CasError::InvalidModel("solver tolerances must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Achieved `I(X;Y)` in nats.
    pub capacity: f64,
    pub input: InputDistribution,
    /// `E[e(X)]` under `input`.
    pub estimate_cost: f64,
    /// `E[b(X)]` under `input`.
    pub resource_cost: f64,
    /// Final multipliers `(mu_estimate, mu_resource)`.
    pub multipliers: [f64; 2],
}

const MU_CAP: f64 = 1e15;

/// Largest exponent tried by the accelerated iteration.
const MAX_STEP: f64 = 1e15;

/// Iterations between projected Newton steps.
const NEWTON_EVERY: usize = 8;

/// Weight of the uniform law blended into warm starts.
const WARM_MIX: f64 = 1e-9;

/// Floor on log-probabilities; `exp(-700)` is still a normal double.
const LOG_FLOOR: f64 = -700.0;

/// Penalized Blahut-Arimoto state in the log domain.
struct Penalized<'a> {
    channel: &'a [Vec<f64>],
    costs: [&'a [f64]; 2],
    opts: BaOptions,
}

#[derive(Debug, Clone)]
struct Solution {
    p: Vec<f64>,
    log_p: Vec<f64>,
    costs: [f64; 2],
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl Penalized<'_> {
    /// Gains `D(W_x || q) - mu . c_x` and the penalized objective `sum p g`.
    fn gains(&self, mu: [f64; 2], p: &[f64], g: &mut [f64]) -> f64 {
        let q = output_distribution(p, self.channel);
        for (x, gx) in g.iter_mut().enumerate() {
            *gx = kl_to(&self.channel[x], &q) - mu[0] * self.costs[0][x] - mu[1] * self.costs[1][x];
        }
        dot(p, g)
    }

    /// Projected Newton step on the penalized objective
    /// `J(p) = I(p) - mu . c(p)`, whose Hessian is
    /// `-sum_y W_xy W_x'y / q_y`. Inputs with negligible mass and below
    /// average gain are held at zero. Returns the improved point, if any.
    fn newton(&self, mu: [f64; 2], p: &[f64], g: &[f64], lower: f64) -> Option<(Vec<f64>, f64)> {
        let nx = p.len();
        let p_max = p.iter().copied().fold(0.0, f64::max);
        let free: Vec<usize> = (0..nx).filter(|&x| p[x] > 1e-12 * p_max || g[x] > lower).collect();
        let k = free.len();
        if k < 2 {
            return None;
        }
        let q = output_distribution(p, self.channel);
        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for (i, &x) in free.iter().enumerate() {
            for (j, &x2) in free.iter().enumerate() {
                kkt[(i, j)] = self.channel[x]
                    .iter()
                    .zip(&self.channel[x2])
                    .zip(&q)
                    .filter(|(_, qy)| **qy > 0.0)
                    .map(|((a, b), qy)| a * b / qy)
                    .sum();
            }
            kkt[(i, k)] = 1.0;
            kkt[(k, i)] = 1.0;
            rhs[i] = g[x];
        }
        // regularize the flat directions of I(p) when |X| > |Y|
        let scale = (0..k).map(|i| kkt[(i, i)]).fold(0.0, f64::max).max(1e-300);
        for i in 0..k {
            kkt[(i, i)] += 1e-12 * scale;
        }
        let sol = kkt.lu().solve(&rhs)?;
        let d: Vec<f64> = (0..k).map(|i| sol[i]).collect();
        // first trial stops at the boundary of the significant coordinates
        let mut t = 1.0_f64;
        for (i, &x) in free.iter().enumerate() {
            if d[i] < 0.0 && p[x] > 1e-12 * p_max {
                t = t.min(-p[x] / d[i]);
            }
        }
        let mut cand = vec![0.0; nx];
        let mut cand_g = vec![0.0; nx];
        for _ in 0..60 {
            cand.iter_mut().for_each(|v| *v = 0.0);
            for (i, &x) in free.iter().enumerate() {
                cand[x] = (p[x] + t * d[i]).max(0.0);
            }
            let total: f64 = cand.iter().sum();
            if total > 0.0 {
                cand.iter_mut().for_each(|v| *v /= total);
                let val = self.gains(mu, &cand, &mut cand_g);
                if val > lower {
                    return Some((cand, val));
                }
            }
            t *= 0.5;
        }
        None
    }

    /// Blahut-Arimoto with an adaptive exponent: the update
    /// `log p += step * (g - max g)` is accepted when the penalized objective
    /// does not drop beyond rounding, and `step = 1` (the plain iteration,
    /// which is monotone) is always accepted. Every few iterations a
    /// projected Newton step polishes the iterate. Stops on the duality gap
    /// `max g - sum p g`.
    fn solve(&self, mu: [f64; 2], warm: &[f64]) -> Solution {
        let nx = self.channel.len();
        // blend the warm start with the uniform law
        let mut p: Vec<f64> = warm.iter().map(|l| (1.0 - WARM_MIX) * l.exp() + WARM_MIX / nx as f64).collect();
        let mut log_p: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let mut g = vec![0.0; nx];
        let mut lower = self.gains(mu, &p, &mut g);
        let mut cand_log = vec![0.0; nx];
        let mut cand_p = vec![0.0; nx];
        let mut cand_g = vec![0.0; nx];
        let mut step = 1.0_f64;
        for iter in 0..self.opts.max_iters {
            let upper = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if upper - lower < self.opts.gap_tol {
                break;
            }
            if iter % NEWTON_EVERY == NEWTON_EVERY - 1 {
                if let Some((next, val)) = self.newton(mu, &p, &g, lower) {
                    p = next;
                    log_p = p.iter().map(|v| v.ln().max(LOG_FLOOR)).collect();
                    lower = self.gains(mu, &p, &mut g);
                    debug_assert!((lower - val).abs() <= 1e-12 * val.abs().max(1.0));
                    continue;
                }
            }
            loop {
                for x in 0..nx {
                    cand_log[x] = log_p[x] + step * (g[x] - upper);
                }
                let norm = log_sum_exp(&cand_log);
                for (lp, px) in cand_log.iter_mut().zip(cand_p.iter_mut()) {
                    *lp = (*lp - norm).max(LOG_FLOOR);
                    *px = lp.exp();
                }
                let cand_lower = self.gains(mu, &cand_p, &mut cand_g);
                let noise = 4.0 * f64::EPSILON * (lower.abs() + 1.0);
                if cand_lower >= lower - noise || step == 1.0 {
                    std::mem::swap(&mut log_p, &mut cand_log);
                    std::mem::swap(&mut p, &mut cand_p);
                    std::mem::swap(&mut g, &mut cand_g);
                    lower = cand_lower;
                    step = (step * 2.0).min(MAX_STEP);
                    break;
                }
                step = (step / 4.0).max(1.0);
            }
        }
        let costs = [dot(&p, self.costs[0]), dot(&p, self.costs[1])];
        Solution { p, log_p, costs }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mix(lo: &Solution, hi: &Solution, theta: f64) -> Solution {
    let p: Vec<f64> = lo
        .p
        .iter()
        .zip(&hi.p)
        .map(|(a, b)| theta * a + (1.0 - theta) * b)
        .collect();
    let log_p = p.iter().map(|v| v.ln().max(LOG_FLOOR)).collect();
    let costs = [
        theta * lo.costs[0] + (1.0 - theta) * hi.costs[0],
        theta * lo.costs[1] + (1.0 - theta) * hi.costs[1],
    ];
    Solution { p, log_p, costs }
}

/// Finds the smallest multiplier on constraint `k` whose solution satisfies
/// `cost_k <= target`, given a solver for the remaining problem. Returns the
/// (possibly mixed) solution and the multiplier.
fn search_multiplier<F>(
    k: usize,
    target: f64,
    opts: &BaOptions,
    mut solve: F,
) -> Result<(Solution, f64)>
where
    F: FnMut(f64, &[f64]) -> Result<Solution>,
{
    let uniform_warm = |n: usize| vec![-(n as f64).ln(); n];
    let at_zero = solve(0.0, &[])?;
    if at_zero.costs[k] <= target + opts.slack_tol {
        return Ok((at_zero, 0.0));
    }
    let n = at_zero.p.len();
    let mut lo = (0.0, at_zero);
    let mut hi_mu = 1.0;
    let mut hi = loop {
        let sol = solve(hi_mu, &uniform_warm(n))?;
        if sol.costs[k] <= target {
            break sol;
        }
        lo = (hi_mu, sol);
        hi_mu *= 2.0;
        if hi_mu > MU_CAP {
            if lo.1.costs[k] <= target + opts.slack_tol {
                let (mu, sol) = lo;
                return Ok((sol, mu));
            }
            return Err(CasError::InfeasibleConstraint(format!(
                "constraint {k} cannot reach {target} (best {})",
                lo.1.costs[k]
            )));
        }
    };
    // stop once the mixing loss bound (hi_mu - lo_mu) (c_lo - c_hi) is below the gap tolerance
    while hi_mu - lo.0 > opts.multiplier_rel_tol * hi_mu.max(1.0)
        && (hi_mu - lo.0) * (lo.1.costs[k] - hi.costs[k]) > opts.gap_tol
    {
        let mid = 0.5 * (lo.0 + hi_mu);
        let sol = solve(mid, &hi.log_p)?;
        if sol.costs[k] <= target {
            hi_mu = mid;
            hi = sol;
        } else {
            lo = (mid, sol);
        }
    }
    // mix the two bracketing solutions; the constraint holds with equality
    let (c_lo, c_hi) = (lo.1.costs[k], hi.costs[k]);
    if c_lo > c_hi && target > c_hi {
        let theta = ((target - c_hi) / (c_lo - c_hi)).clamp(0.0, 1.0);
        return Ok((mix(&lo.1, &hi, theta), hi_mu));
    }
    Ok((hi, hi_mu))
}

/// Relative slack granted to the thresholds before the feasibility checks.
const ROUNDING_TOL: f64 = 1e-12;

fn magnitude(costs: &[f64]) -> f64 {
    costs.iter().fold(1.0_f64, |m, c| m.max(c.abs()))
}

/// A point of the simplex meeting both linear constraints, if any exists.
/// Two-point supports suffice: the constraint region is a quadrant and the
/// achievable cost pairs form the convex hull of the per-symbol pairs.
pub(crate) fn feasible_input(e: &[f64], b: &[f64], d_s: f64, budget: f64) -> Option<Vec<f64>> {
    let n = e.len();
    for x in 0..n {
        if e[x] <= d_s && b[x] <= budget {
            let mut p = vec![0.0; n];
            p[x] = 1.0;
            return Some(p);
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            // theta * (x) + (1 - theta) * (y)
            let mut lo = 0.0_f64;
            let mut hi = 1.0_f64;
            for (c, t) in [(e, d_s), (b, budget)] {
                let slope = c[x] - c[y];
                let rhs = t - c[y];
                if slope > 0.0 {
                    hi = hi.min(rhs / slope);
                } else if slope < 0.0 {
                    lo = lo.max(rhs / slope);
                } else if rhs < 0.0 {
                    hi = -1.0;
                }
            }
            if lo <= hi {
                let mut p = vec![0.0; n];
                p[x] = lo;
                p[y] = 1.0 - lo;
                return Some(p);
            }
        }
    }
    None
}

/// Constrained capacity for an explicit channel and pair of cost vectors.
pub fn capacity_with_costs(
    channel: &[Vec<f64>],
    estimate_cost: &[f64],
    resource_cost: &[f64],
    d_s: f64,
    budget: f64,
    opts: &BaOptions,
) -> Result<CapacityResult> {
    opts.validate()?;
    let min_e = estimate_cost.iter().copied().fold(f64::INFINITY, f64::min);
    let min_b = resource_cost.iter().copied().fold(f64::INFINITY, f64::min);
    // thresholds within rounding of a cost value count as meeting it
    let d_s = d_s + ROUNDING_TOL * magnitude(estimate_cost);
    let budget = budget + ROUNDING_TOL * magnitude(resource_cost);
    if d_s.is_nan() || d_s < min_e {
        return Err(CasError::InfeasibleConstraint(format!(
            "estimation distortion {d_s} below min_x e(x) = {min_e}"
        )));
    }
    if budget.is_nan() || budget < min_b {
        return Err(CasError::InfeasibleConstraint(format!(
            "budget {budget} below min_x b(x) = {min_b}"
        )));
    }
    if feasible_input(estimate_cost, resource_cost, d_s, budget).is_none() {
        return Err(CasError::InfeasibleConstraint(format!(
            "no input law meets E[e] <= {d_s} and E[b] <= {budget} jointly"
        )));
    }

    let nx = channel.len();
    let solver = Penalized {
        channel,
        costs: [estimate_cost, resource_cost],
        opts: *opts,
    };
    let uniform = vec![-(nx as f64).ln(); nx];

    let mut mu_e_final = 0.0;
    let (sol, mu_b) = search_multiplier(1, budget, opts, |mu_b, warm_b| {
        let warm_b = if warm_b.is_empty() { uniform.clone() } else { warm_b.to_vec() };
        let (inner, mu_e) = search_multiplier(0, d_s, opts, |mu_e, warm_e| {
            let warm = if warm_e.is_empty() { &warm_b } else { warm_e };
            Ok(solver.solve([mu_e, mu_b], warm))
        })?;
        mu_e_final = mu_e;
        Ok(inner)
    })?;

    let capacity = mutual_information(&sol.p, channel);
    Ok(CapacityResult {
        capacity,
        estimate_cost: sol.costs[0],
        resource_cost: sol.costs[1],
        input: InputDistribution { probs: sol.p },
        multipliers: [mu_e_final, mu_b],
    })
}

/// `C(D_s, B)` for a finite CAS model.
pub fn constrained_capacity(
    model: &FiniteCasModel,
    d_s: f64,
    budget: f64,
    opts: &BaOptions,
) -> Result<CapacityResult> {
    model.validate()?;
    let e = estimate_costs(model);
    capacity_with_costs(&model.comm_law, &e, &model.cost, d_s, budget, opts)
}

/// Unconstrained Blahut-Arimoto capacity of a channel `w[x][y]`.
pub fn channel_capacity(channel: &[Vec<f64>], opts: &BaOptions) -> (f64, Vec<f64>) {
    let zeros = vec![0.0; channel.len()];
    let solver = Penalized {
        channel,
        costs: [&zeros, &zeros],
        opts: *opts,
    };
    let uniform = vec![-(channel.len() as f64).ln(); channel.len()];
    let sol = solver.solve([0.0, 0.0], &uniform);
    (mutual_information(&sol.p, channel), sol.p)
}
