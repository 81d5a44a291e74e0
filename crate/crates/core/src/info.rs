//! Small information-theory helpers shared by the solvers.

pub const LN_2: f64 = std::f64::consts::LN_2;

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}

pub fn bits_to_nats(bits: f64) -> f64 {
    bits * LN_2
}

/// `x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&v| xlogx(v)).sum::<f64>()
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    -xlogx(p) - xlogx(1.0 - p)
}

/// Mutual information `I(X;Y)` in nats for input `p` and channel rows `w[x][y]`.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let q = output_distribution(p, w);
    p.iter()
        .zip(w)
        .filter(|(&px, _)| px > 0.0)
        .map(|(&px, row)| px * kl_to(row, &q))
        .sum::<f64>()
        .max(0.0)
}

/// Output law `q(y) = sum_x p(x) w(y|x)`.
pub fn output_distribution(p: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    let ny = w.first().map_or(0, Vec::len);
    let mut q = vec![0.0; ny];
    for (&px, row) in p.iter().zip(w) {
        if px > 0.0 {
            for (qy, &wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
    }
    q
}

/// `D(row || q)` in nats; terms with `row[y] = 0` vanish.
#[inline]
pub fn kl_to(row: &[f64], q: &[f64]) -> f64 {
    row.iter()
        .zip(q)
        .filter(|(&r, _)| r > 0.0)
        .map(|(&r, &qy)| r * (r / qy).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_at_half_is_ln2() {
        assert!((binary_entropy(0.5) - LN_2).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn bsc_mutual_information() {
        let w = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let i = mutual_information(&[0.5, 0.5], &w);
        assert!((i - (LN_2 - binary_entropy(0.1))).abs() < 1e-14);
        assert!((nats_to_bits(bits_to_nats(1.3)) - 1.3).abs() < 1e-15);
    }
}
