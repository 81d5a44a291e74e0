//! Sensing stage of the TRM example: MMSE filter, estimation MSE and the
//! covariance of the estimate.
//!
//! Observations are formed with the effective waveform `sqrt(T) X`, which
//! makes the MMSE of the linear model equal to
//! `M_s tr[((T / noise_s) X X^H + sigma_s^{-1})^{-1}]`.

use serde::{Deserialize, Serialize};

use super::linalg::{c, herm_eig, herm_eigenvalues, hermitize, identity, real_trace, CMat};
use super::model::{GramMatrix, TrmModel};
use crate::error::{CasError, Result};

/// Eigenvalues of the estimate covariance `R_s~ = I_{M_s} (x) B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Eigenvalues of `B`, descending, clipped at zero.
    pub block_eigenvalues: Vec<f64>,
    /// Block count `M_s`.
    pub multiplicity: usize,
}

impl Spectrum {
    pub fn new(mut block_eigenvalues: Vec<f64>, multiplicity: usize) -> Self {
        block_eigenvalues.iter_mut().for_each(|v| *v = v.max(0.0));
        block_eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self {
            block_eigenvalues,
            multiplicity,
        }
    }

    /// All `N M_s` eigenvalues of `R_s~`, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.block_eigenvalues
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, self.multiplicity))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.multiplicity as f64 * self.block_eigenvalues.iter().sum::<f64>()
    }
}

/// `sqrt(T) X`.
pub fn effective_waveform(model: &TrmModel, x: &CMat) -> CMat {
    x * c((model.t as f64).sqrt())
}

fn check_waveform(model: &TrmModel, x: &CMat) -> Result<()> {
    if x.nrows() != model.n {
        return Err(CasError::InvalidModel(format!(
            "waveform must have {} rows, got {}",
            model.n,
            x.nrows()
        )));
    }
    Ok(())
}

/// True when `sigma_s` has full numerical rank.
pub fn prior_invertible(model: &TrmModel) -> bool {
    let v = herm_eigenvalues(&model.sigma_s);
    let max = v.first().copied().unwrap_or(0.0);
    max > 0.0 && v.last().copied().unwrap_or(0.0) > 1e-12 * max
}

/// `M_s tr[((T / noise_s) Q + sigma_s^{-1})^{-1}]`; needs an invertible prior.
pub fn sensing_mse_inverse_form(model: &TrmModel, q: &GramMatrix) -> Result<f64> {
    if !prior_invertible(model) {
        return Err(CasError::SingularPrior);
    }
    let prior_inv = model
        .sigma_s
        .clone()
        .cholesky()
        .ok_or(CasError::SingularPrior)?
        .inverse();
    let info = &q.q * c(model.t as f64 / model.noise_s) + prior_inv;
    let post = hermitize(&info).cholesky().ok_or(CasError::SingularPrior)?.inverse();
    Ok(model.m_s as f64 * real_trace(&post))
}

/// Per-block covariance of the estimate from the Gram alone:
/// `sigma (T Q sigma + noise_s I)^{-1} T Q sigma`.
pub fn estimate_block_from_gram(model: &TrmModel, q: &CMat) -> CMat {
    let tq_sigma = q * &model.sigma_s * c(model.t as f64);
    let a = &tq_sigma + identity(model.n) * c(model.noise_s);
    let solved = a
        .lu()
        .solve(&tq_sigma)
        .expect("T Q sigma + noise I is invertible for noise > 0");
    hermitize(&(&model.sigma_s * solved))
}

/// `M_s tr[sigma - B]`: the inverse-free form of the sensing MSE, valid for
/// rank-deficient priors.
pub fn sensing_mse_inverse_free(model: &TrmModel, q: &GramMatrix) -> f64 {
    let block = estimate_block_from_gram(model, &q.q);
    model.m_s as f64 * (real_trace(&model.sigma_s) - real_trace(&block))
}

/// Sensing distortion `D_s(Q)`. Uses the printed inverse form when the prior
/// is invertible and the inverse-free form otherwise.
pub fn sensing_mse(model: &TrmModel, q: &GramMatrix) -> Result<f64> {
    if prior_invertible(model) {
        sensing_mse_inverse_form(model, q)
    } else {
        Ok(sensing_mse_inverse_free(model, q))
    }
}

/// Per-block MMSE filter `W = sigma X_e R_z^{-1}` with `X_e = sqrt(T) X` and
/// `R_z = X_e^H sigma X_e + noise_s I_T`; the estimate of block `j` is
/// `W z_j`.
pub fn mmse_filter(model: &TrmModel, x: &CMat) -> Result<CMat> {
    check_waveform(model, x)?;
    let xe = effective_waveform(model, x);
    let cols = xe.ncols();
    let r_z = hermitize(&(xe.adjoint() * &model.sigma_s * &xe)) + identity(cols) * c(model.noise_s);
    // W = sigma X_e R_z^{-1}  <=>  R_z W^H = X_e^H sigma
    let rhs = xe.adjoint() * &model.sigma_s;
    let w_h = r_z
        .cholesky()
        .expect("R_z is positive definite for noise > 0")
        .solve(&rhs);
    Ok(w_h.adjoint())
}

/// Per-block estimate covariance `sigma X_e R_z^{-1} X_e^H sigma`.
pub fn estimate_block(model: &TrmModel, x: &CMat) -> Result<CMat> {
    let w = mmse_filter(model, x)?;
    let xe = effective_waveform(model, x);
    Ok(hermitize(&(w * xe.adjoint() * &model.sigma_s)))
}

/// Spectrum of the estimate covariance for waveform `x`.
pub fn estimate_covariance(model: &TrmModel, x: &CMat) -> Result<Spectrum> {
    let block = estimate_block(model, x)?;
    Ok(Spectrum::new(herm_eigenvalues(&block), model.m_s))
}

/// Spectrum of the estimate covariance from a Gram matrix.
pub fn estimate_spectrum(model: &TrmModel, q: &GramMatrix) -> Spectrum {
    let block = estimate_block_from_gram(model, &q.q);
    Spectrum::new(herm_eigenvalues(&block), model.m_s)
}

/// Eigen-decomposition of the per-block estimate covariance.
pub fn estimate_modes(model: &TrmModel, x: &CMat) -> Result<(Vec<f64>, CMat)> {
    let block = estimate_block(model, x)?;
    let (mut v, u) = herm_eig(&block);
    v.iter_mut().for_each(|l| *l = l.max(0.0));
    Ok((v, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::linalg::{fro, C64};
    use crate::gaussian::model::TrmGenerator;

    fn scalar() -> TrmModel {
        TrmModel::new(CMat::identity(1, 1), CMat::identity(1, 1), 1.0, 1.0, 1, 1, 3.0).unwrap()
    }

    fn gram(m: &TrmModel, q: CMat) -> GramMatrix {
        GramMatrix::new(q, m).unwrap()
    }

    #[test]
    fn zero_illumination_leaves_prior_energy() {
        let m = TrmGenerator { n: 3, m_s: 2, m_c: 2, t: 4, noise_s: 1.0, noise_c: 1.0, power: 1.0 }
            .generate(5)
            .unwrap();
        let d = sensing_mse(&m, &GramMatrix::zeros(3)).unwrap();
        assert!((d - m.prior_energy()).abs() < 1e-10);
        assert!((sensing_mse_inverse_free(&m, &GramMatrix::zeros(3)) - m.prior_energy()).abs() < 1e-12);
    }

    #[test]
    fn scalar_values() {
        let m = scalar();
        let q = gram(&m, CMat::from_element(1, 1, c(3.0)));
        assert!((sensing_mse(&m, &q).unwrap() - 0.25).abs() < 1e-15);
        let x = CMat::from_element(1, 1, c(3.0_f64.sqrt()));
        let w = mmse_filter(&m, &x).unwrap();
        assert!((w[(0, 0)] - c(3.0_f64.sqrt() / 4.0)).norm() < 1e-15);
        let s = estimate_covariance(&m, &x).unwrap();
        assert!((s.block_eigenvalues[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_prior_gives_zero_filter() {
        let m = TrmModel::new(CMat::zeros(2, 2), CMat::identity(1, 2), 1.0, 1.0, 3, 1, 1.0).unwrap();
        let x = CMat::from_element(2, 3, C64::new(0.3, -0.2));
        assert_eq!(fro(&mmse_filter(&m, &x).unwrap()), 0.0);
        assert!(matches!(
            sensing_mse_inverse_form(&m, &GramMatrix::zeros(2)),
            Err(CasError::SingularPrior)
        ));
        assert_eq!(sensing_mse(&m, &GramMatrix::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_rows_give_per_mode_gains() {
        // sigma = I, X rows orthogonal with power p per row (before the sqrt(T) scaling)
        let (n, t, p) = (2, 4, 0.7_f64);
        let m = TrmModel::new(CMat::identity(n, n), CMat::identity(1, n), 0.5, 1.0, t, 1, 1.0).unwrap();
        let x = CMat::from_fn(n, t, |i, j| if i == j { c(p.sqrt()) } else { c(0.0) });
        let s = estimate_covariance(&m, &x).unwrap();
        let eff = p * t as f64;
        for v in &s.block_eigenvalues {
            assert!((v - eff / (eff + 0.5)).abs() < 1e-14);
        }
        let w = mmse_filter(&m, &x).unwrap();
        let gain = (t as f64).sqrt() / (eff + 0.5);
        let expected = &x * c(gain);
        assert!(fro(&(w - expected)) < 1e-14);
    }

    #[test]
    fn inverse_and_inverse_free_forms_agree() {
        let g = TrmGenerator { n: 4, m_s: 3, m_c: 2, t: 6, noise_s: 0.8, noise_c: 1.0, power: 2.0 };
        for seed in 0..5 {
            let m = g.generate(seed).unwrap();
            let x = crate::gaussian::model::complex_gaussian(
                &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed),
                4,
                6,
                1.0,
            );
            let q = GramMatrix::from_waveform(&x);
            let a = sensing_mse_inverse_form(&m, &q).unwrap();
            let b = sensing_mse_inverse_free(&m, &q);
            assert!((a - b).abs() < 1e-10 * a.max(1.0), "{a} vs {b}");
            // waveform route and Gram route give the same block covariance
            let bw = estimate_block(&m, &x).unwrap();
            let bg = estimate_block_from_gram(&m, &q.q);
            assert!(fro(&(bw - bg)) < 1e-10);
        }
    }
}
