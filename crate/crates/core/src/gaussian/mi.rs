use super::linalg::{c, hermitize, identity, log_det_hpd};
use super::model::{GramMatrix, TrmModel};

/// `log det(I_{M_c} + (T / noise_c) H_c Q H_c^H)` in nats.
pub fn channel_mi(model: &TrmModel, q: &GramMatrix) -> f64 {
    channel_mi_raw(model, &q.q)
}

pub(crate) fn channel_mi_raw(model: &TrmModel, q: &super::linalg::CMat) -> f64 {
    let g = &model.h_c * q * model.h_c.adjoint() * c(model.t as f64 / model.noise_c);
    log_det_hpd(&(hermitize(&g) + identity(model.m_c))).max(0.0)
}
