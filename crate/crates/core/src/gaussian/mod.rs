//! Closed forms for target-response-matrix (TRM) estimation over a linear
//! Gaussian sensing channel, and the Gaussian link that carries the estimate.

pub mod linalg;
pub mod mi;
pub mod model;
pub mod sensing;
pub mod waterfill;

pub use mi::channel_mi;
pub use model::{GramMatrix, TrmGenerator, TrmModel};
pub use sensing::{
    estimate_block, estimate_block_from_gram, estimate_covariance, estimate_spectrum, mmse_filter, sensing_mse,
    sensing_mse_inverse_form, sensing_mse_inverse_free, Spectrum,
};
pub use waterfill::{rate_at_level, reverse_waterfill, Waterfill};
