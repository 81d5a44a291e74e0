//! The distortion-minimizing state estimator and the estimate-cost function.

use super::model::FiniteCasModel;
use crate::error::{CasError, Result};

fn check_indices(model: &FiniteCasModel, x: usize, z: Option<usize>) -> Result<()> {
    if x >= model.num_inputs() {
        return Err(CasError::IndexOutOfRange(format!(
            "input {x} (|X| = {})",
            model.num_inputs()
        )));
    }
    if let Some(z) = z {
        if z >= model.num_observations() {
            return Err(CasError::IndexOutOfRange(format!(
                "observation {z} (|Z| = {})",
                model.num_observations()
            )));
        }
    }
    Ok(())
}

/// Unnormalized posterior `P_S(s) Q(z|x,s)` and its normalizer.
fn joint_weights(model: &FiniteCasModel, x: usize, z: usize) -> (Vec<f64>, f64) {
    let w: Vec<f64> = model
        .state_prior
        .iter()
        .zip(&model.sensing_law[x])
        .map(|(p, row)| p * row[z])
        .collect();
    let norm = w.iter().sum();
    (w, norm)
}

/// Index minimizing `sum_s w(s) d(s, s~)`; the lowest index wins ties.
fn bayes_argmin(model: &FiniteCasModel, w: &[f64]) -> usize {
    let mut best = 0;
    let mut best_risk = f64::INFINITY;
    for est in 0..model.num_estimates() {
        let risk: f64 = w
            .iter()
            .zip(&model.distortion)
            .map(|(ws, row)| ws * row[est])
            .sum();
        if risk < best_risk {
            best_risk = risk;
            best = est;
        }
    }
    best
}

/// Bayes estimate `argmin_{s~} E[d(S, s~) | X=x, Z=z]`.
///
/// Fails with [`CasError::ZeroProbabilityObservation`] when `(x, z)` cannot
/// occur.
pub fn optimal_estimate(model: &FiniteCasModel, x: usize, z: usize) -> Result<usize> {
    check_indices(model, x, Some(z))?;
    let (w, norm) = joint_weights(model, x, z);
    if norm <= 0.0 {
        return Err(CasError::ZeroProbabilityObservation { x, z });
    }
    // unnormalized posterior weights
    Ok(bayes_argmin(model, &w))
}

/// Full estimator table `[x][z]`. Impossible pairs map to estimate 0.
pub fn estimator_table(model: &FiniteCasModel) -> Vec<Vec<usize>> {
    (0..model.num_inputs())
        .map(|x| {
            (0..model.num_observations())
                .map(|z| {
                    let (w, norm) = joint_weights(model, x, z);
                    if norm > 0.0 {
                        bayes_argmin(model, &w)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Expected distortion of an arbitrary estimator table under input `x`.
pub fn table_cost(model: &FiniteCasModel, table: &[Vec<usize>], x: usize) -> f64 {
    let mut total = 0.0;
    for (s, &ps) in model.state_prior.iter().enumerate() {
        for (z, &qz) in model.sensing_law[x][s].iter().enumerate() {
            total += ps * qz * model.distortion[s][table[x][z]];
        }
    }
    total
}

/// Estimate cost `e(x) = E[d(S, s~*(X, Z)) | X = x]`.
pub fn estimate_cost(model: &FiniteCasModel, x: usize) -> Result<f64> {
    check_indices(model, x, None)?;
    let table = estimator_table(model);
    Ok(table_cost(model, &table, x))
}

/// `e(x)` for every input.
pub fn estimate_costs(model: &FiniteCasModel) -> Vec<f64> {
    let table = estimator_table(model);
    (0..model.num_inputs())
        .map(|x| table_cost(model, &table, x))
        .collect()
}

/// Law of the estimate `S~ = s~*(X, Z)` when `X ~ p_x`.
pub fn estimate_marginal(model: &FiniteCasModel, p_x: &[f64]) -> Vec<f64> {
    let table = estimator_table(model);
    let mut out = vec![0.0; model.num_estimates()];
    for (x, &px) in p_x.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        for (s, &ps) in model.state_prior.iter().enumerate() {
            for (z, &qz) in model.sensing_law[x][s].iter().enumerate() {
                out[table[x][z]] += px * ps * qz;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect()
    }

    fn model_with_sensing(prior: Vec<f64>, sensing: Vec<Vec<Vec<f64>>>) -> FiniteCasModel {
        let nx = sensing.len();
        FiniteCasModel {
            distortion: hamming(prior.len()),
            state_prior: prior,
            sensing_law: sensing,
            comm_law: vec![vec![1.0]; nx],
            cost: vec![0.0; nx],
            reconstruction_distortion: None,
        }
    }

    fn noisy_model() -> FiniteCasModel {
        model_with_sensing(
            vec![0.5, 0.5],
            vec![
                vec![vec![0.9, 0.1], vec![0.1, 0.9]],
                vec![vec![0.6, 0.4], vec![0.4, 0.6]],
            ],
        )
    }

    #[test]
    fn noiseless_sensing_returns_observation() {
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = model_with_sensing(vec![0.5, 0.5], vec![eye.clone(), eye]);
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(optimal_estimate(&m, x, z).unwrap(), z);
            }
            assert_eq!(estimate_cost(&m, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn uninformative_sensing_returns_prior_mode() {
        let flat = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let m = model_with_sensing(vec![0.7, 0.3], vec![flat.clone(), flat]);
        for x in 0..2 {
            for z in 0..2 {
                assert_eq!(optimal_estimate(&m, x, z).unwrap(), 0);
            }
            assert!((estimate_cost(&m, x).unwrap() - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn noisy_sensing_table_and_costs() {
        let m = noisy_model();
        // posteriors: x=0 -> (0.9, 0.1) / (0.1, 0.9); x=1 -> (0.6, 0.4) / (0.4, 0.6)
        assert_eq!(estimator_table(&m), vec![vec![0, 1], vec![0, 1]]);
        assert!((estimate_cost(&m, 0).unwrap() - 0.1).abs() < 1e-15);
        assert!((estimate_cost(&m, 1).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let flat = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let m = model_with_sensing(vec![0.5, 0.5], vec![flat]);
        assert_eq!(optimal_estimate(&m, 0, 1).unwrap(), 0);
    }

    #[test]
    fn impossible_observation_is_an_error() {
        let m = model_with_sensing(
            vec![1.0, 0.0],
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        );
        assert_eq!(
            optimal_estimate(&m, 0, 1),
            Err(CasError::ZeroProbabilityObservation { x: 0, z: 1 })
        );
        assert_eq!(estimator_table(&m)[0][1], 0);
        assert_eq!(estimate_cost(&m, 0).unwrap(), 0.0);
        assert!(matches!(
            optimal_estimate(&m, 3, 0),
            Err(CasError::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn marginal_of_estimate_sums_to_one() {
        let m = noisy_model();
        let q = estimate_marginal(&m, &[0.3, 0.7]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((q[0] - 0.5).abs() < 1e-15);
    }
}
