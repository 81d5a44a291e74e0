//! Monte Carlo validation of the Gaussian CAS chain:
//! state draw, sensing channel, MMSE estimate, rate-distortion test channel,
//! reconstruction.
//!
//! The link is simulated at the rate-distortion limit by the forward test
//! channel of reverse water-filling: in the eigenbasis of the estimate
//! covariance, mode `i` is reproduced as `(1 - D_i / l_i) m_i + w` with
//! `w ~ CN(0, D_i (1 - D_i / l_i))`.
//!
//! Trials are split into fixed-size chunks, each driven by its own ChaCha
//! stream derived from the seed; chunk sums are combined in order, so reports
//! are bit-identical for a given seed and chunk size regardless of the
//! thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CasError, Result};
use crate::gaussian::linalg::{psd_sqrt, CMat, C64};
use crate::gaussian::model::{GramMatrix, TrmModel};
use crate::gaussian::sensing::{effective_waveform, estimate_modes, mmse_filter, sensing_mse};
use crate::gaussian::waterfill::reverse_waterfill;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub chunk_size: usize,
    /// Keep per-trial records in the report.
    pub record_trials: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            chunk_size: 4096,
            record_trials: false,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// `|mean - target| <= k * std_err`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub d_s: f64,
    pub d_c: f64,
    pub d_total: f64,
    pub cross_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n_trials: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub d_s: Estimate,
    pub analytic_d_s: f64,
    pub d_c: Option<Estimate>,
    pub analytic_d_c: Option<f64>,
    pub d_total: Option<Estimate>,
    pub analytic_d_total: Option<f64>,
    /// `Re E[(s - s~)^H (s~ - s^)]`; zero for the MMSE estimate.
    pub cross_term: Option<Estimate>,
    /// Empirical `E|s^_i|^2` per estimate mode, averaged over blocks.
    pub mode_power: Option<Vec<Estimate>>,
    /// `l_i - D_i` per mode.
    pub analytic_mode_power: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<TrialRecord>>,
}

/// Running sums for one chunk.
#[derive(Debug, Clone)]
struct Sums {
    n: usize,
    first: [f64; 4],
    second: [f64; 4],
    mode_first: Vec<f64>,
    mode_second: Vec<f64>,
    records: Vec<TrialRecord>,
}

impl Sums {
    fn new(modes: usize) -> Self {
        Self {
            n: 0,
            first: [0.0; 4],
            second: [0.0; 4],
            mode_first: vec![0.0; modes],
            mode_second: vec![0.0; modes],
            records: Vec::new(),
        }
    }

    fn push(&mut self, v: [f64; 4], modes: &[f64]) {
        self.n += 1;
        for (k, x) in v.iter().enumerate() {
            self.first[k] += x;
            self.second[k] += x * x;
        }
        for (k, m) in modes.iter().enumerate() {
            self.mode_first[k] += m;
            self.mode_second[k] += m * m;
        }
    }

    fn merge(mut self, other: Sums) -> Sums {
        self.n += other.n;
        for k in 0..4 {
            self.first[k] += other.first[k];
            self.second[k] += other.second[k];
        }
        for k in 0..self.mode_first.len() {
            self.mode_first[k] += other.mode_first[k];
            self.mode_second[k] += other.mode_second[k];
        }
        self.records.extend(other.records);
        self
    }

    fn estimate(n: usize, first: f64, second: f64) -> Estimate {
        let nf = n as f64;
        let mean = first / nf;
        let var = if n > 1 {
            ((second - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / nf).sqrt(),
        }
    }

    fn get(&self, k: usize) -> Estimate {
        Self::estimate(self.n, self.first[k], self.second[k])
    }
}

fn cn_vector<R: Rng>(rng: &mut R, n: usize, var: f64) -> DVector<C64> {
    let s = (0.5 * var).sqrt();
    DVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    })
}

/// Link stage: per-mode test channel in the eigenbasis of the estimate.
struct Link {
    basis: CMat,
    gain: Vec<f64>,
    noise_var: Vec<f64>,
}

struct Chain {
    prior_root: CMat,
    xe_h: CMat,
    filter: CMat,
    noise_s: f64,
    m_s: usize,
    link: Option<Link>,
}

impl Chain {
    fn trial<R: Rng>(&self, rng: &mut R, mode_acc: &mut [f64]) -> [f64; 4] {
        let n = self.prior_root.nrows();
        let t = self.xe_h.nrows();
        let mut out = [0.0; 4];
        mode_acc.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.m_s {
            let s = &self.prior_root * cn_vector(rng, n, 1.0);
            let z = &self.xe_h * &s + cn_vector(rng, t, self.noise_s);
            let est = &self.filter * z;
            let err = &s - &est;
            out[0] += err.norm_squared();
            if let Some(link) = &self.link {
                let modes = link.basis.adjoint() * &est;
                let mut rec = DVector::<C64>::zeros(n);
                for i in 0..n {
                    if link.gain[i] > 0.0 {
                        let noise = cn_vector(rng, 1, link.noise_var[i])[0];
                        rec[i] = modes[i] * link.gain[i] + noise;
                    }
                    mode_acc[i] += rec[i].norm_sqr() / self.m_s as f64;
                }
                let s_hat = &link.basis * rec;
                let comm = &est - &s_hat;
                out[1] += comm.norm_squared();
                out[2] += (&s - &s_hat).norm_squared();
                out[3] += err.dotc(&comm).re;
            }
        }
        out
    }
}

fn run(chain: &Chain, n_trials: usize, seed: u64, opts: &SimOptions, modes: usize) -> Sums {
    let chunk = opts.chunk_size.max(1);
    let n_chunks = n_trials.div_ceil(chunk);
    let parts: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let start = c * chunk;
            let end = (start + chunk).min(n_trials);
            let mut sums = Sums::new(modes);
            let mut mode_acc = vec![0.0; modes];
            for trial in start..end {
                let v = chain.trial(&mut rng, &mut mode_acc);
                sums.push(v, &mode_acc);
                if opts.record_trials {
                    sums.records.push(TrialRecord {
                        trial,
                        d_s: v[0],
                        d_c: v[1],
                        d_total: v[2],
                        cross_term: v[3],
                    });
                }
            }
            sums
        })
        .collect();
    parts
        .into_iter()
        .fold(Sums::new(modes), Sums::merge)
}

fn base_chain(model: &TrmModel, x: &CMat) -> Result<Chain> {
    Ok(Chain {
        prior_root: psd_sqrt(&model.sigma_s),
        xe_h: effective_waveform(model, x).adjoint(),
        filter: mmse_filter(model, x)?,
        noise_s: model.noise_s,
        m_s: model.m_s,
        link: None,
    })
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials == 0 {
        return Err(CasError::InvalidModel("n_trials must be at least 1".into()));
    }
    Ok(())
}

/// Empirical sensing distortion of waveform `x` against `D_s(X X^H)`.
pub fn simulate_sensing(model: &TrmModel, x: &CMat, n_trials: usize, seed: u64, opts: &SimOptions) -> Result<SimReport> {
    check_trials(n_trials)?;
    let chain = base_chain(model, x)?;
    let sums = run(&chain, n_trials, seed, opts, 0);
    Ok(SimReport {
        n_trials,
        seed,
        chunk_size: opts.chunk_size,
        d_s: sums.get(0),
        analytic_d_s: sensing_mse(model, &GramMatrix::from_waveform(x))?,
        d_c: None,
        analytic_d_c: None,
        d_total: None,
        analytic_d_total: None,
        cross_term: None,
        mode_power: None,
        analytic_mode_power: None,
        trials: opts.record_trials.then_some(sums.records),
    })
}

/// Full chain with the link operating at `rate_budget` nats per block of
/// `N M_s` estimate coefficients.
pub fn simulate_end_to_end(
    model: &TrmModel,
    x: &CMat,
    rate_budget: f64,
    n_trials: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimReport> {
    check_trials(n_trials)?;
    if rate_budget.is_nan() || rate_budget < 0.0 {
        return Err(CasError::InvalidModel(format!("rate budget must be >= 0, got {rate_budget}")));
    }
    let (lambda, basis) = estimate_modes(model, x)?;
    let full: Vec<f64> = lambda
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, model.m_s))
        .collect();
    let wf = reverse_waterfill(&full, rate_budget);
    // allocations come in runs of M_s identical values
    let alloc: Vec<f64> = (0..lambda.len()).map(|i| wf.allocations[i * model.m_s]).collect();
    let mut gain = vec![0.0; lambda.len()];
    let mut noise_var = vec![0.0; lambda.len()];
    for i in 0..lambda.len() {
        if lambda[i] > 0.0 && alloc[i] < lambda[i] {
            gain[i] = 1.0 - alloc[i] / lambda[i];
            noise_var[i] = alloc[i] * gain[i];
        }
    }
    let analytic_mode_power: Vec<f64> = lambda.iter().zip(&alloc).map(|(l, d)| (l - d).max(0.0)).collect();

    let mut chain = base_chain(model, x)?;
    chain.link = Some(Link { basis, gain, noise_var });
    let sums = run(&chain, n_trials, seed, opts, lambda.len());
    let analytic_d_s = sensing_mse(model, &GramMatrix::from_waveform(x))?;
    let mode_power = (0..lambda.len())
        .map(|k| Sums::estimate(sums.n, sums.mode_first[k], sums.mode_second[k]))
        .collect();
    Ok(SimReport {
        n_trials,
        seed,
        chunk_size: opts.chunk_size,
        d_s: sums.get(0),
        analytic_d_s,
        d_c: Some(sums.get(1)),
        analytic_d_c: Some(wf.d_c),
        d_total: Some(sums.get(2)),
        analytic_d_total: Some(analytic_d_s + wf.d_c),
        cross_term: Some(sums.get(3)),
        mode_power: Some(mode_power),
        analytic_mode_power: Some(analytic_mode_power),
        trials: opts.record_trials.then_some(sums.records),
    })
}
