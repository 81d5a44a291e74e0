//! Waveform design for the Gaussian example: the joint (ISAC) Gram optimizer,
//! the separated-waveform baseline and SNR sweeps comparing the two.

pub mod isac;
pub mod objective;
pub mod sw;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::discrete::TradeoffPoint;
use crate::gaussian::GramMatrix;

pub use isac::{optimize_isac, IsacOptions};
pub use objective::{evaluate, isac_objective, Evaluation};
pub use sw::{comm_gram, optimize_sw, sensing_gram, sw_at_split, waterfill_power, SwOptions};
pub use sweep::{sweep_snr, Scheme, SweepCurve, SweepEntry, SweepOptions, SweepRow};

/// Outcome of a waveform optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    /// Joint Gram, or the sensing Gram for the SW scheme.
    pub q_star: GramMatrix,
    /// Communication Gram of the SW scheme.
    pub q_comm: Option<GramMatrix>,
    /// Sensing share of the power for the SW scheme.
    pub split: Option<f64>,
    /// `point.capacity` holds the channel mutual information and
    /// `point.budget` the trace budget `T P_T`.
    pub point: TradeoffPoint,
    pub trace_used: f64,
    pub iterations: usize,
    pub converged: bool,
}
