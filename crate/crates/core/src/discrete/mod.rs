//! Finite-alphabet limits: optimal estimator, estimate cost, constrained
//! capacity, rate-distortion and the achievable distortion region.

pub mod capacity;
pub mod estimator;
pub mod model;
pub mod rate_distortion;
pub mod region;

pub use capacity::{capacity_with_costs, channel_capacity, constrained_capacity, BaOptions, CapacityResult};
pub use estimator::{estimate_cost, estimate_costs, estimate_marginal, estimator_table, optimal_estimate};
pub use model::{FiniteCasModel, InputDistribution, ValidationIssue};
pub use rate_distortion::{distortion_range, distortion_rate, rate_distortion_discrete, RateDistortionResult};
pub use region::{min_total_distortion, theorem1_feasible, tradeoff_curve, FeasibilityReport, TradeoffPoint};
