//! Dense complex Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Largest entry of `|m - m^H|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn real_trace(m: &CMat) -> f64 {
    m.trace().re
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in descending
/// order; the columns of the returned matrix are the matching eigenvectors.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    herm_eig(m).0
}

/// `V diag(f(lambda)) V^H`.
pub fn spectral_map(values: &[f64], vectors: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = values.len();
    let mut scaled = vectors.clone();
    for k in 0..n {
        let s = c(f(values[k]));
        for r in 0..n {
            scaled[(r, k)] *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// Square root of the PSD part of a Hermitian matrix.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (v, u) = herm_eig(m);
    spectral_map(&v, &u, |l| l.max(0.0).sqrt())
}

/// Clips negative eigenvalues to zero.
pub fn psd_clip(m: &CMat) -> CMat {
    let (v, u) = herm_eig(m);
    hermitize(&spectral_map(&v, &u, |l| l.max(0.0)))
}

/// `log det` of a Hermitian positive-definite matrix.
pub fn log_det_hpd(m: &CMat) -> f64 {
    match m.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
        }
        None => herm_eigenvalues(m).iter().map(|l| l.ln()).sum(),
    }
}

/// Euclidean projection of the eigenvalues onto `{x >= 0, sum x <= cap}`.
pub fn project_capped_simplex(values: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    // find tau >= 0 with sum max(v - tau, 0) = cap
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        prefix += v;
        let t = (prefix - cap) / (k + 1) as f64;
        if k + 1 == sorted.len() || sorted[k + 1] <= t {
            tau = t;
            break;
        }
    }
    values.iter().map(|v| (v - tau).max(0.0)).collect()
}

/// Frobenius projection of a Hermitian matrix onto `{Q psd, tr Q <= cap}`.
pub fn project_psd_trace(m: &CMat, cap: f64) -> CMat {
    let (v, u) = herm_eig(m);
    let p = project_capped_simplex(&v, cap);
    let n = v.len();
    let mut scaled = u.clone();
    for k in 0..n {
        for r in 0..n {
            scaled[(r, k)] *= c(p[k]);
        }
    }
    hermitize(&(scaled * u.adjoint()))
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.5, -1.0), C64::new(0.5, 1.0), c(1.0)],
        )
    }

    #[test]
    fn eigen_pairs_reconstruct() {
        let m = sample();
        let (v, u) = herm_eig(&m);
        assert!(v[0] >= v[1]);
        let back = spectral_map(&v, &u, |l| l);
        assert!(fro(&(back - &m)) < 1e-12);
        assert!((v.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = sample();
        let s = psd_sqrt(&(&m * m.adjoint()));
        assert!(fro(&(&s * &s - &m * m.adjoint())) < 1e-10);
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        let m = sample();
        let via_eig: f64 = herm_eigenvalues(&m).iter().map(|l| l.ln()).sum();
        assert!((log_det_hpd(&m) - via_eig).abs() < 1e-12);
    }

    #[test]
    fn capped_simplex_projection() {
        assert_eq!(project_capped_simplex(&[1.0, -1.0], 5.0), vec![1.0, 0.0]);
        let p = project_capped_simplex(&[3.0, 1.0, -2.0], 2.0);
        assert!((p[0] - 2.0).abs() < 1e-15 && p[1] == 0.0 && p[2] == 0.0);
        let p = project_capped_simplex(&[2.0, 2.0], 2.0);
        assert_eq!(p, vec![1.0, 1.0]);
    }

    #[test]
    fn projection_is_feasible_and_idempotent() {
        let m = CMat::from_row_slice(2, 2, &[c(3.0), c(2.0), c(2.0), c(-1.0)]);
        let p = project_psd_trace(&m, 2.0);
        let v = herm_eigenvalues(&p);
        assert!(v.iter().all(|l| *l >= -1e-12));
        assert!(real_trace(&p) <= 2.0 + 1e-12);
        assert!(fro(&(project_psd_trace(&p, 2.0) - &p)) < 1e-12);
    }
}
