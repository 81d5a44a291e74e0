//! Fixed problem instances shared by the benchmarks.

use cas_core::discrete::FiniteCasModel;
use cas_core::gaussian::{TrmGenerator, TrmModel};

/// `k`-ary symmetric channel with crossover mass `eps`.
pub fn symmetric(k: usize, eps: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 1.0 - eps } else { eps / (k - 1) as f64 })
                .collect()
        })
        .collect()
}

/// `k` states, `inputs` probing actions. Sharper probes cost more and use a
/// noisier link.
pub fn finite_model(k: usize, inputs: usize) -> FiniteCasModel {
    let sensing_law = (0..inputs)
        .map(|x| {
            let eps = 0.05 + 0.6 * x as f64 / inputs as f64;
            symmetric(k, eps)
        })
        .collect();
    let comm_law = (0..inputs)
        .map(|x| {
            let mut row = vec![0.02 / (inputs - 1) as f64; inputs];
            row[x] = 0.98;
            let shift = (x + 1) % inputs;
            row[shift] += 0.1 * (inputs - x) as f64 / inputs as f64;
            let total: f64 = row.iter().sum();
            row.iter().map(|v| v / total).collect()
        })
        .collect();
    let distortion = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    FiniteCasModel {
        state_prior: vec![1.0 / k as f64; k],
        sensing_law,
        comm_law,
        distortion,
        cost: (0..inputs).map(|x| (inputs - x) as f64 / inputs as f64).collect(),
        reconstruction_distortion: None,
    }
}

/// Random TRM instance with `n = m_s = m_c`.
pub fn trm_model(n: usize, t: usize, power: f64) -> TrmModel {
    TrmGenerator {
        n,
        m_s: n,
        m_c: n,
        t,
        noise_s: 1.0,
        noise_c: 1.0,
        power,
    }
    .generate(7)
    .expect("valid generator")
}
