//! Projected-gradient solver for the joint Gram matrix.
//!
//! Minimizes `D_s(Q) + D_c(Q)` over `{Q psd, tr Q <= T P_T}`, where `D_c(Q)` is
//! the reverse water-filling distortion of the estimate spectrum at rate
//! `MI(Q)`. The water level is recomputed for every iterate, so it never
//! appears as an optimization variable. Gradients are central finite
//! differences over the real Hermitian parametrization; steps are Frobenius
//! projections onto the feasible set with Armijo backtracking along the
//! projection arc. The problem is non-convex: the result is a local optimum.

use serde::{Deserialize, Serialize};

use super::objective::{evaluate, isac_objective};
use super::OptResult;
use crate::error::{CasError, Result};
use crate::gaussian::linalg::{c, fro, project_psd_trace, CMat, C64};
use crate::gaussian::model::{GramMatrix, TrmModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsacOptions {
    pub max_iters: usize,
    /// Stop when the objective drops by less than this over `patience` iterations.
    pub tol: f64,
    pub patience: usize,
    /// Finite-difference step relative to `T P_T / N`.
    pub fd_rel_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for IsacOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-8,
            patience: 5,
            fd_rel_step: 1e-5,
            armijo: 1e-4,
        }
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CasError::NonFiniteObjective(what.to_string()))
    }
}

/// Central-difference gradient with respect to the Frobenius inner product.
pub fn numerical_gradient(f: impl Fn(&CMat) -> f64, q: &CMat, h: f64) -> Result<CMat> {
    let n = q.nrows();
    let mut g = CMat::zeros(n, n);
    let mut probe = q.clone();
    let diff = |probe: &mut CMat, dirs: &[((usize, usize), C64)]| -> Result<f64> {
        for &(ij, d) in dirs {
            probe[ij] += d * h;
        }
        let plus = f(probe);
        for &(ij, d) in dirs {
            probe[ij] -= d * (2.0 * h);
        }
        let minus = f(probe);
        for &(ij, d) in dirs {
            probe[ij] += d * h;
        }
        finite((plus - minus) / (2.0 * h), "finite-difference probe")
    };
    for i in 0..n {
        g[(i, i)] = c(diff(&mut probe, &[((i, i), c(1.0))])?);
        for j in (i + 1)..n {
            let re = diff(&mut probe, &[((i, j), c(1.0)), ((j, i), c(1.0))])?;
            let im = diff(
                &mut probe,
                &[((i, j), C64::new(0.0, 1.0)), ((j, i), C64::new(0.0, -1.0))],
            )?;
            g[(i, j)] = C64::new(0.5 * re, 0.5 * im);
            g[(j, i)] = C64::new(0.5 * re, -0.5 * im);
        }
    }
    Ok(g)
}

/// Runs the joint-waveform optimizer from `init` (default: full-power
/// isotropic Gram).
pub fn optimize_isac(model: &TrmModel, init: Option<&GramMatrix>, opts: &IsacOptions) -> Result<OptResult> {
    let cap = model.trace_budget();
    let scale = cap / model.n as f64;
    let h = opts.fd_rel_step * scale;
    let f = |q: &CMat| isac_objective(model, q);

    let mut q = match init {
        Some(g) => project_psd_trace(&g.q, cap),
        None => GramMatrix::isotropic(model).q,
    };
    let mut val = finite(f(&q), "initial point")?;
    let mut history = vec![val];
    let mut step = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let grad = numerical_gradient(f, &q, h)?;
        let gnorm = fro(&grad);
        if gnorm == 0.0 {
            converged = true;
            break;
        }
        if !step.is_finite() {
            step = 0.1 * scale / gnorm;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let cand = project_psd_trace(&(&q - &grad * c(step)), cap);
            let moved = fro(&(&cand - &q));
            if moved <= 1e-15 * scale {
                break;
            }
            let cv = f(&cand);
            if cv.is_nan() {
                return Err(CasError::NonFiniteObjective("trial point".into()));
            }
            if cv <= val - opts.armijo / step * moved * moved {
                accepted = Some((cand, cv));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cv)) = accepted else {
            // no descent along the projection arc: stationary to working precision
            converged = true;
            break;
        };
        q = cand;
        val = cv;
        history.push(val);
        step *= 2.0;
        if history.len() > opts.patience {
            let past = history[history.len() - 1 - opts.patience];
            if past - val < opts.tol {
                converged = true;
                break;
            }
        }
    }

    let eval = evaluate(model, &q, &q);
    let q_star = GramMatrix { q };
    Ok(OptResult {
        trace_used: q_star.trace(),
        point: eval.point(cap),
        q_star,
        q_comm: None,
        split: None,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::model::TrmGenerator;

    #[test]
    fn gradient_matches_a_linear_functional() {
        // f(Q) = Re tr(A Q) has gradient A^H
        let a = CMat::from_row_slice(2, 2, &[c(1.0), C64::new(2.0, 1.0), C64::new(-0.5, 0.3), c(3.0)]);
        let a_h = (&a + a.adjoint()) * c(0.5);
        let q = CMat::identity(2, 2);
        let g = numerical_gradient(|m| (&a * m).trace().re, &q, 1e-4).unwrap();
        assert!(fro(&(g - a_h.adjoint())) < 1e-9);
    }

    #[test]
    fn objective_never_increases_and_stays_feasible() {
        let m = TrmGenerator { n: 3, m_s: 2, m_c: 2, t: 6, noise_s: 1.0, noise_c: 1.0, power: 1.0 }
            .generate(11)
            .unwrap();
        let r = optimize_isac(&m, None, &IsacOptions::default()).unwrap();
        let start = isac_objective(&m, &GramMatrix::isotropic(&m).q);
        assert!(r.point.d_total <= start + 1e-12);
        assert!(r.trace_used <= m.trace_budget() + 1e-9);
        GramMatrix::new(r.q_star.q.clone(), &m).unwrap();
        assert!((r.point.d_total - r.point.d_s - r.point.d_c).abs() < 1e-9);
    }

    #[test]
    fn vanishing_power_leaves_prior_energy() {
        let m = TrmGenerator { n: 2, m_s: 2, m_c: 1, t: 4, noise_s: 1.0, noise_c: 1.0, power: 1e-12 }
            .generate(4)
            .unwrap();
        let r = optimize_isac(&m, None, &IsacOptions::default()).unwrap();
        assert!(r.trace_used < 1e-10);
        assert!((r.point.d_total - m.prior_energy()).abs() < 1e-9 * m.prior_energy());
    }
}
