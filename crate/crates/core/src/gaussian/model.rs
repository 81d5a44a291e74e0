use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::{c, herm_eig, hermitian_defect, hermitize, real_trace, spectral_map, CMat, C64};
use crate::error::{CasError, Result};

/// Serde adapter: complex matrices as row-major nested arrays of `[re, im]`.
pub mod cmat_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> std::result::Result<CMat, String> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMat::from_fn(nr, nc, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-12;

/// Target-response-matrix estimation instance.
///
/// The state is `s = vec(H_s^H)`: `m_s` independent blocks of length `n`,
/// each `CN(0, sigma_s)`. The transmitter sends an `n x t` waveform `X` with
/// Gram `Q = X X^H` and power budget `tr Q <= t * power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrmModel {
    #[serde(with = "cmat_serde")]
    pub sigma_s: CMat,
    #[serde(with = "cmat_serde")]
    pub h_c: CMat,
    pub noise_s: f64,
    pub noise_c: f64,
    pub t: usize,
    pub n: usize,
    pub m_s: usize,
    pub m_c: usize,
    pub power: f64,
}

impl TrmModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma_s: CMat,
        h_c: CMat,
        noise_s: f64,
        noise_c: f64,
        t: usize,
        m_s: usize,
        power: f64,
    ) -> Result<Self> {
        let model = Self {
            n: sigma_s.nrows(),
            m_c: h_c.nrows(),
            sigma_s,
            h_c,
            noise_s,
            noise_c,
            t,
            m_s,
            power,
        };
        model.validated()
    }

    /// Checks invariants and clips slightly negative prior eigenvalues.
    pub fn validated(mut self) -> Result<Self> {
        let bad = |m: String| Err(CasError::InvalidModel(m));
        if self.n == 0 || self.m_s == 0 || self.m_c == 0 {
            return bad("dimensions must be positive".into());
        }
        if self.sigma_s.shape() != (self.n, self.n) {
            return bad(format!("sigma_s must be {0}x{0}, got {1:?}", self.n, self.sigma_s.shape()));
        }
        if self.h_c.shape() != (self.m_c, self.n) {
            return bad(format!("h_c must be {}x{}, got {:?}", self.m_c, self.n, self.h_c.shape()));
        }
        if self.t < self.n {
            return bad(format!("need t >= n (t = {}, n = {})", self.t, self.n));
        }
        for (name, v) in [("noise_s", self.noise_s), ("noise_c", self.noise_c), ("power", self.power)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.sigma_s.iter().chain(self.h_c.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return bad("matrix entries must be finite".into());
        }
        let defect = hermitian_defect(&self.sigma_s);
        if defect > HERMITIAN_TOL {
            return bad(format!("sigma_s is not Hermitian (defect {defect:e})"));
        }
        let (vals, vecs) = herm_eig(&self.sigma_s);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < EIGEN_FLOOR {
            return bad(format!("sigma_s has negative eigenvalue {min:e}"));
        }
        self.sigma_s = if min < 0.0 {
            hermitize(&spectral_map(&vals, &vecs, |l| l.max(0.0)))
        } else {
            hermitize(&self.sigma_s)
        };
        Ok(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| {
            CasError::InvalidModel(e.to_string())
        })?;
        m.validated()
    }

    /// Power budget on the Gram trace, `t * power`.
    pub fn trace_budget(&self) -> f64 {
        self.t as f64 * self.power
    }

    /// `M_s tr(sigma_s)`: the estimation error with no illumination.
    pub fn prior_energy(&self) -> f64 {
        self.m_s as f64 * real_trace(&self.sigma_s)
    }

    /// Same model at a different power budget.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        let mut m = self.clone();
        m.power = power;
        m.validated()
    }
}

/// Seeded generator for random TRM instances.
///
/// `sigma_s = A A^H / n` with `A` i.i.d. `CN(0, 1)`, and `h_c` i.i.d.
/// `CN(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrmGenerator {
    pub n: usize,
    pub m_s: usize,
    pub m_c: usize,
    pub t: usize,
    #[serde(default = "one")]
    pub noise_s: f64,
    #[serde(default = "one")]
    pub noise_c: f64,
    #[serde(default = "one")]
    pub power: f64,
}

fn one() -> f64 {
    1.0
}

pub(crate) fn complex_gaussian<R: rand::Rng>(rng: &mut R, rows: usize, cols: usize, var: f64) -> CMat {
    let s = (0.5 * var).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    })
}

impl TrmGenerator {
    pub fn generate(&self, seed: u64) -> Result<TrmModel> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_gaussian(&mut rng, self.n, self.n, 1.0);
        let sigma = hermitize(&(&a * a.adjoint() * c(1.0 / self.n as f64)));
        let h_c = complex_gaussian(&mut rng, self.m_c, self.n, 1.0);
        TrmModel::new(sigma, h_c, self.noise_s, self.noise_c, self.t, self.m_s, self.power)
    }
}

/// Transmit Gram matrix `Q = X X^H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    #[serde(with = "cmat_serde")]
    pub q: CMat,
}

impl GramMatrix {
    /// Validates Hermitian symmetry, PSD-ness after clipping and the trace
    /// budget of `model`.
    pub fn new(q: CMat, model: &TrmModel) -> Result<Self> {
        if q.shape() != (model.n, model.n) {
            return Err(CasError::InvalidModel(format!("Gram must be {0}x{0}", model.n)));
        }
        let defect = hermitian_defect(&q);
        if defect > HERMITIAN_TOL {
            return Err(CasError::InvalidModel(format!("Gram is not Hermitian (defect {defect:e})")));
        }
        let (vals, vecs) = herm_eig(&q);
        let scale = vals.first().copied().unwrap_or(0.0).abs().max(1.0);
        if vals.last().copied().unwrap_or(0.0) < EIGEN_FLOOR * scale {
            return Err(CasError::InvalidModel("Gram is not positive semidefinite".into()));
        }
        let q = hermitize(&spectral_map(&vals, &vecs, |l| l.max(0.0)));
        let g = Self { q };
        if g.trace() > model.trace_budget() + 1e-9 {
            return Err(CasError::InvalidModel(format!(
                "Gram trace {} exceeds budget {}",
                g.trace(),
                model.trace_budget()
            )));
        }
        Ok(g)
    }

    pub fn zeros(n: usize) -> Self {
        Self { q: CMat::zeros(n, n) }
    }

    /// `(t * power / n) I`, the full-power isotropic Gram.
    pub fn isotropic(model: &TrmModel) -> Self {
        Self {
            q: CMat::identity(model.n, model.n) * c(model.trace_budget() / model.n as f64),
        }
    }

    pub fn from_waveform(x: &CMat) -> Self {
        Self {
            q: hermitize(&(x * x.adjoint())),
        }
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.q)
    }

    /// An `n x t` waveform with this Gram: `X = [Q^{1/2} 0]`.
    pub fn waveform(&self, t: usize) -> CMat {
        let n = self.q.nrows();
        let root = super::linalg::psd_sqrt(&self.q);
        CMat::from_fn(n, t, |i, j| if j < n { root[(i, j)] } else { C64::new(0.0, 0.0) })
    }
}
