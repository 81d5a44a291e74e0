//! Test-only oracles and random instance builders. Nothing here calls into
//! the solvers it is used to check.
#![allow(dead_code)]

use cas_core::discrete::FiniteCasModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hamming(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect()
}

/// Random point of the open simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / s).collect();
    // last entry absorbs the rounding
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

pub fn random_model<R: Rng>(rng: &mut R, ns: usize, nx: usize, nz: usize, ny: usize) -> FiniteCasModel {
    FiniteCasModel {
        state_prior: random_simplex(rng, ns),
        sensing_law: (0..nx)
            .map(|_| (0..ns).map(|_| random_simplex(rng, nz)).collect())
            .collect(),
        comm_law: (0..nx).map(|_| random_simplex(rng, ny)).collect(),
        distortion: (0..ns)
            .map(|_| (0..ns).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect(),
        cost: (0..nx).map(|_| rng.random_range(0.0..1.0)).collect(),
        reconstruction_distortion: None,
    }
}

pub fn h2(p: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    f(p) + f(1.0 - p)
}

/// Inverse of the binary entropy on `[0, 1/2]` by bisection.
pub fn h2_inv(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed-form rate-distortion of Bernoulli(p) under Hamming distortion.
pub fn binary_rd(p: f64, d: f64) -> f64 {
    if d >= p.min(1.0 - p) {
        0.0
    } else {
        h2(p) - h2(d)
    }
}

/// Mutual information of a discrete channel, computed from scratch.
pub fn mi(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let q: Vec<f64> = (0..ny).map(|y| p.iter().zip(w).map(|(a, r)| a * r[y]).sum()).collect();
    let mut total = 0.0;
    for (px, row) in p.iter().zip(w) {
        for (y, &wy) in row.iter().enumerate() {
            if *px > 0.0 && wy > 0.0 {
                total += px * wy * (wy / q[y]).ln();
            }
        }
    }
    total
}

/// Reverse water-filling by bisection on the level, independent of the
/// exact active-set solver. Returns the total distortion.
pub fn rwf_bisection(lambda: &[f64], rate: f64) -> f64 {
    let pos: Vec<f64> = lambda.iter().copied().filter(|l| *l > 0.0).collect();
    if pos.is_empty() {
        return 0.0;
    }
    let spend = |xi: f64| -> f64 { pos.iter().filter(|&&l| l > xi).map(|l| (l / xi).ln()).sum() };
    let max = pos.iter().copied().fold(0.0, f64::max);
    // bisection on ln(xi)
    let (mut lo, mut hi) = (max.ln() - 700.0, max.ln());
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if spend(mid.exp()) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi = (0.5 * (lo + hi)).exp();
    pos.iter().map(|&l| l.min(xi)).sum()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // endpoints too
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

use cas_core::gaussian::linalg::{CMat, C64};
use rand_distr::{Distribution, StandardNormal};

/// `rows x cols` matrix with i.i.d. `CN(0, 1)` entries.
pub fn complex_normal<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = 0.5f64.sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    })
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    complex_normal(rng, n, n).qr().q()
}

/// Random PSD matrix with trace `trace`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, trace: f64) -> CMat {
    let a = complex_normal(rng, n, n);
    let g = &a * a.adjoint();
    let tr: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    let g = g * C64::new(trace / tr, 0.0);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn diag_in_basis(u: &CMat, d: &[f64]) -> CMat {
    let n = d.len();
    let dm = CMat::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) });
    let m = u * dm * u.adjoint();
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Total distortion when prior, channel Gram and waveform Gram share one
/// eigenbasis: prior variances `a`, channel gains `g`, powers `p`.
pub fn commuting_objective(a: &[f64], g: &[f64], p: &[f64], m_s: usize, t: f64, noise_s: f64, noise_c: f64) -> f64 {
    let post: Vec<f64> = a.iter().zip(p).map(|(&ai, &pi)| 1.0 / (t * pi / noise_s + 1.0 / ai)).collect();
    let d_s = m_s as f64 * post.iter().sum::<f64>();
    let spectrum: Vec<f64> = a
        .iter()
        .zip(&post)
        .flat_map(|(ai, e)| std::iter::repeat_n(ai - e, m_s))
        .collect();
    let mi: f64 = g.iter().zip(p).map(|(gi, pi)| (1.0 + t * gi * pi / noise_c).ln()).sum();
    d_s + rwf_bisection(&spectrum, mi)
}

/// A model whose prior and channel Gram are diagonal in the basis `u`.
pub fn commuting_model(u: &CMat, a: &[f64], g: &[f64], m_s: usize, t: usize, power: f64) -> cas_core::TrmModel {
    let sigma = diag_in_basis(u, a);
    let sqrt_g: Vec<f64> = g.iter().map(|v| v.sqrt()).collect();
    let n = a.len();
    let d = CMat::from_fn(n, n, |i, j| if i == j { C64::new(sqrt_g[i], 0.0) } else { C64::new(0.0, 0.0) });
    let h_c = d * u.adjoint();
    cas_core::TrmModel::new(sigma, h_c, 1.0, 1.0, t, m_s, power).unwrap()
}
