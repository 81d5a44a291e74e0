//! Rate-distortion function of a finite source, by Blahut-Arimoto with a
//! bisection on the slope parameter.

use serde::{Deserialize, Serialize};

use super::capacity::BaOptions;
use super::model::SIMPLEX_TOL;
use crate::error::{CasError, Result};
use crate::info::{kl_to, output_distribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionResult {
    /// `R(d_c)` in nats.
    pub rate: f64,
    /// Distortion attained by `test_channel`.
    pub distortion: f64,
    /// Achieving `P(s^ | s~)`, indexed `[s~][s^]`.
    pub test_channel: Vec<Vec<f64>>,
    /// Slope parameter of the final iterate (`inf` on the zero-distortion face).
    pub slope: f64,
}

/// Smallest and largest distortions on the `R(D)` curve: `D_min` is reached
/// by mapping every symbol to its cheapest reconstruction, `D_max` by the best
/// constant reconstruction.
pub fn distortion_range(source: &[f64], distortion: &[Vec<f64>]) -> (f64, f64, usize) {
    let d_min = source
        .iter()
        .zip(distortion)
        .map(|(p, row)| p * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum();
    let n_hat = distortion[0].len();
    let mut d_max = f64::INFINITY;
    let mut best = 0;
    for j in 0..n_hat {
        let v: f64 = source.iter().zip(distortion).map(|(p, row)| p * row[j]).sum();
        if v < d_max {
            d_max = v;
            best = j;
        }
    }
    (d_min, d_max, best)
}

fn validate(source: &[f64], distortion: &[Vec<f64>]) -> Result<()> {
    let bad = |m: &str| Err(CasError::InvalidModel(m.to_string()));
    if source.is_empty() || distortion.len() != source.len() {
        return bad("distortion rows must match the source alphabet");
    }
    if source.iter().any(|p| !p.is_finite() || *p < 0.0)
        || (source.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL
    {
        return bad("source is not a probability vector");
    }
    let cols = distortion[0].len();
    if cols == 0
        || distortion
            .iter()
            .any(|r| r.len() != cols || r.iter().any(|d| !d.is_finite() || *d < 0.0))
    {
        return bad("distortion must be a rectangular nonnegative matrix");
    }
    Ok(())
}

/// Kernel `exp(-slope (d - rowmin))`; an infinite slope keeps only the
/// cheapest reconstructions of each row.
fn kernel(distortion: &[Vec<f64>], slope: f64) -> Vec<Vec<f64>> {
    distortion
        .iter()
        .map(|row| {
            let m = row.iter().copied().fold(f64::INFINITY, f64::min);
            row.iter()
                .map(|&d| {
                    if slope.is_infinite() {
                        if d - m <= 1e-15 * m.abs().max(1.0) { 1.0 } else { 0.0 }
                    } else {
                        (-slope * (d - m)).exp()
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Point {
    channel: Vec<Vec<f64>>,
    q: Vec<f64>,
    distortion: f64,
    rate: f64,
}

fn expected_distortion(source: &[f64], channel: &[Vec<f64>], distortion: &[Vec<f64>]) -> f64 {
    source
        .iter()
        .zip(channel)
        .zip(distortion)
        .map(|((p, w), d)| p * w.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// `I(S~; S^)` for `source` and test channel `channel`.
pub fn test_channel_rate(source: &[f64], channel: &[Vec<f64>]) -> f64 {
    let q = output_distribution(source, channel);
    source
        .iter()
        .zip(channel)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, row)| p * kl_to(row, &q))
        .sum::<f64>()
        .max(0.0)
}

fn solve_slope(source: &[f64], distortion: &[Vec<f64>], slope: f64, warm: &[f64], opts: &BaOptions) -> Point {
    let k = kernel(distortion, slope);
    let n_hat = distortion[0].len();
    let mut q = warm.to_vec();
    let mut channel = vec![vec![0.0; n_hat]; source.len()];
    let mut c = vec![0.0; n_hat];
    for _ in 0..opts.max_iters {
        c.iter_mut().for_each(|v| *v = 0.0);
        for ((row, krow), &p) in channel.iter_mut().zip(&k).zip(source) {
            let z: f64 = q.iter().zip(krow).map(|(a, b)| a * b).sum();
            for ((w, &kk), (&qq, cc)) in row.iter_mut().zip(krow).zip(q.iter().zip(c.iter_mut())) {
                *w = qq * kk / z;
                *cc += p * kk / z;
            }
        }
        let gap = c
            .iter()
            .map(|v| v.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        if gap < opts.gap_tol {
            break;
        }
        for (qq, cc) in q.iter_mut().zip(&c) {
            *qq = (*qq * cc).max(1e-300);
        }
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
    }
    let d = expected_distortion(source, &channel, distortion);
    Point {
        rate: test_channel_rate(source, &channel),
        channel,
        q,
        distortion: d,
    }
}

fn mix_channels(a: &[Vec<f64>], b: &[Vec<f64>], theta: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| theta * u + (1.0 - theta) * v).collect())
        .collect()
}

/// `R(d_c) = min I(S~; S^)` subject to `E[d(S~, S^)] <= d_c`.
pub fn rate_distortion_discrete(
    source: &[f64],
    distortion: &[Vec<f64>],
    d_c: f64,
    opts: &BaOptions,
) -> Result<RateDistortionResult> {
    validate(source, distortion)?;
    opts.validate()?;
    let (d_min, d_max, best_const) = distortion_range(source, distortion);
    let scale = d_max.max(1.0);
    if d_c.is_nan() || d_c < d_min - 1e-12 * scale {
        return Err(CasError::UnreachableDistortion {
            requested: d_c,
            minimum: d_min,
        });
    }
    let n_hat = distortion[0].len();
    if d_c >= d_max {
        let mut row = vec![0.0; n_hat];
        row[best_const] = 1.0;
        return Ok(RateDistortionResult {
            rate: 0.0,
            distortion: d_max,
            test_channel: vec![row; source.len()],
            slope: 0.0,
        });
    }
    let uniform = vec![1.0 / n_hat as f64; n_hat];
    let finish = |pt: Point, slope: f64| RateDistortionResult {
        rate: test_channel_rate(source, &pt.channel),
        distortion: pt.distortion,
        test_channel: pt.channel,
        slope,
    };
    if d_c <= d_min + 1e-14 * scale {
        return Ok(finish(solve_slope(source, distortion, f64::INFINITY, &uniform, opts), f64::INFINITY));
    }

    let mut lo = (0.0, solve_slope(source, distortion, 0.0, &uniform, opts));
    let mut hi_slope = 1.0 / scale;
    let mut hi = loop {
        let pt = solve_slope(source, distortion, hi_slope, &uniform, opts);
        if pt.distortion <= d_c {
            break pt;
        }
        lo = (hi_slope, pt);
        hi_slope *= 2.0;
        if hi_slope > 1e12 / scale {
            hi_slope = f64::INFINITY;
            break solve_slope(source, distortion, f64::INFINITY, &uniform, opts);
        }
    };
    if hi_slope.is_finite() {
        while hi_slope - lo.0 > opts.multiplier_rel_tol * hi_slope {
            let mid = 0.5 * (lo.0 + hi_slope);
            let pt = solve_slope(source, distortion, mid, &hi.q, opts);
            if pt.distortion <= d_c {
                hi_slope = mid;
                hi = pt;
            } else {
                lo = (mid, pt);
            }
        }
    }
    // mixing test channels is linear in distortion and convex in rate
    let (d_lo, d_hi) = (lo.1.distortion, hi.distortion);
    if d_lo > d_hi && d_c > d_hi {
        let theta = ((d_c - d_hi) / (d_lo - d_hi)).clamp(0.0, 1.0);
        let channel = mix_channels(&lo.1.channel, &hi.channel, theta);
        let mixed = Point {
            distortion: expected_distortion(source, &channel, distortion),
            rate: test_channel_rate(source, &channel),
            channel,
            q: hi.q.clone(),
        };
        return Ok(finish(mixed, hi_slope));
    }
    Ok(finish(hi, hi_slope))
}

/// Distortion-rate function: the smallest `d_c` with `R(d_c) <= rate`.
///
/// Bisects the slope parameter on the rate of the Blahut-Arimoto iterate and
/// mixes the bracketing test channels so the rate budget is used exactly.
pub fn distortion_rate(
    source: &[f64],
    distortion: &[Vec<f64>],
    rate: f64,
    opts: &BaOptions,
) -> Result<RateDistortionResult> {
    validate(source, distortion)?;
    opts.validate()?;
    let (_, d_max, best_const) = distortion_range(source, distortion);
    let scale = d_max.max(1.0);
    let n_hat = distortion[0].len();
    let uniform = vec![1.0 / n_hat as f64; n_hat];
    let finish = |pt: Point, slope: f64| RateDistortionResult {
        rate: pt.rate,
        distortion: pt.distortion,
        test_channel: pt.channel,
        slope,
    };
    let constant = || {
        let mut row = vec![0.0; n_hat];
        row[best_const] = 1.0;
        RateDistortionResult {
            rate: 0.0,
            distortion: d_max,
            test_channel: vec![row; source.len()],
            slope: 0.0,
        }
    };
    if rate.is_nan() || rate <= 0.0 {
        return Ok(constant());
    }
    let top = solve_slope(source, distortion, f64::INFINITY, &uniform, opts);
    if top.rate <= rate {
        return Ok(finish(top, f64::INFINITY));
    }
    // lo: rate within budget, hi: rate above budget
    let mut lo = (0.0, solve_slope(source, distortion, 0.0, &uniform, opts));
    if lo.1.distortion > d_max {
        // the slope-zero iterate is an arbitrary constant-rate channel
        let c = constant();
        lo.1 = Point {
            channel: c.test_channel,
            q: uniform.clone(),
            distortion: c.distortion,
            rate: 0.0,
        };
    }
    let mut hi_slope = 1.0 / scale;
    let mut hi = loop {
        let pt = solve_slope(source, distortion, hi_slope, &uniform, opts);
        if pt.rate > rate {
            break pt;
        }
        lo = (hi_slope, pt);
        hi_slope *= 2.0;
        if hi_slope > 1e12 / scale {
            hi_slope = f64::INFINITY;
            break top;
        }
    };
    if hi_slope.is_finite() {
        while hi_slope - lo.0 > opts.multiplier_rel_tol * hi_slope {
            let mid = 0.5 * (lo.0 + hi_slope);
            let pt = solve_slope(source, distortion, mid, &lo.1.q, opts);
            if pt.rate > rate {
                hi_slope = mid;
                hi = pt;
            } else {
                lo = (mid, pt);
            }
        }
    }
    let (r_lo, r_hi) = (lo.1.rate, hi.rate);
    if r_hi > r_lo && rate > r_lo {
        let theta = ((r_hi - rate) / (r_hi - r_lo)).clamp(0.0, 1.0);
        let channel = mix_channels(&lo.1.channel, &hi.channel, theta);
        let mixed = Point {
            distortion: expected_distortion(source, &channel, distortion),
            rate: test_channel_rate(source, &channel),
            channel,
            q: lo.1.q.clone(),
        };
        return Ok(finish(mixed, lo.0));
    }
    Ok(finish(lo.1, lo.0))
}
