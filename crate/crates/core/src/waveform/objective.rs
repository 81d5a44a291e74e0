//! Objective of the waveform problems: total distortion `D_s + D_c` where the
//! estimate is sent at the rate the channel supports.

use serde::{Deserialize, Serialize};

use crate::discrete::TradeoffPoint;
use crate::gaussian::linalg::{real_trace, CMat};
use crate::gaussian::mi::channel_mi_raw;
use crate::gaussian::model::TrmModel;
use crate::gaussian::sensing::estimate_block_from_gram;
use crate::gaussian::linalg::herm_eigenvalues;
use crate::gaussian::waterfill::{rate_at_level, reverse_waterfill};

/// Everything the objective computes for one (sensing, communication) Gram
/// pair. For the joint scheme both Grams are the same matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub d_s: f64,
    pub d_c: f64,
    /// Channel mutual information `MI(Q_c)`, nats.
    pub mi: f64,
    /// Rate spent by reverse water-filling, `R(D_c) <= mi`.
    pub rate: f64,
    /// Water level of the reverse water-filling.
    pub xi: f64,
    /// Eigenvalues of the estimate covariance, with multiplicity.
    pub spectrum: Vec<f64>,
}

impl Evaluation {
    pub fn total(&self) -> f64 {
        self.d_s + self.d_c
    }

    pub fn point(&self, budget: f64) -> TradeoffPoint {
        TradeoffPoint::new(self.d_s, self.d_c, self.rate, self.mi, budget)
    }
}

/// Evaluates the pair `(q_sense, q_comm)`. `D_s` uses the inverse-free form.
pub fn evaluate(model: &TrmModel, q_sense: &CMat, q_comm: &CMat) -> Evaluation {
    let block = estimate_block_from_gram(model, q_sense);
    let m_s = model.m_s as f64;
    let d_s = m_s * (real_trace(&model.sigma_s) - real_trace(&block));
    let block_eigs = herm_eigenvalues(&block);
    let spectrum: Vec<f64> = block_eigs
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v.max(0.0), model.m_s))
        .collect();
    let mi = channel_mi_raw(model, q_comm);
    let wf = reverse_waterfill(&spectrum, mi);
    let rate = if wf.xi > 0.0 { rate_at_level(&spectrum, wf.xi) } else { 0.0 };
    Evaluation {
        d_s,
        d_c: wf.d_c,
        mi,
        rate,
        xi: wf.xi,
        spectrum,
    }
}

/// Objective of the joint (ISAC) scheme.
pub fn isac_objective(model: &TrmModel, q: &CMat) -> f64 {
    evaluate(model, q, q).total()
}
