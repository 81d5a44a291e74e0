//! Numerical limits of communication-assisted sensing (CAS).
//!
//! A transmitter senses a target through one channel and forwards its
//! estimate to a user over another. The crate computes:
//!
//! * [`discrete`]: the optimal state estimator, the estimate-cost function,
//!   the capacity constrained by estimation distortion and resource cost, the
//!   rate-distortion function of the estimate, and the resulting achievable
//!   distortion region for finite alphabets.
//! * [`gaussian`]: closed forms for target-response-matrix estimation with a
//!   linear Gaussian model (sensing MSE, MMSE filter, estimate covariance,
//!   reverse water-filling, channel mutual information).
//! * [`waveform`]: the joint (ISAC) Gram-matrix optimizer and the
//!   separated-waveform baseline, plus SNR sweeps.
//! * [`simulator`]: Monte Carlo validation of the Gaussian chain.
//!
//! All information quantities are in nats.

pub mod discrete;
pub mod error;
pub mod gaussian;
pub mod info;
pub mod simulator;
pub mod waveform;

pub use discrete::{
    constrained_capacity, estimate_cost, min_total_distortion, optimal_estimate,
    rate_distortion_discrete, theorem1_feasible, BaOptions, CapacityResult, FeasibilityReport,
    FiniteCasModel, InputDistribution, RateDistortionResult, TradeoffPoint,
};
pub use error::{CasError, Result};
pub use gaussian::{
    channel_mi, estimate_covariance, mmse_filter, reverse_waterfill, sensing_mse, GramMatrix,
    Spectrum, TrmModel, Waterfill,
};
pub use simulator::{simulate_end_to_end, simulate_sensing, SimReport};
pub use waveform::{optimize_isac, optimize_sw, sweep_snr, OptResult, Scheme, SweepCurve};
