use serde::{Deserialize, Serialize};

use crate::error::{CasError, Result};

/// Tolerance on the unit sum of every probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Finite-alphabet CAS instance.
///
/// Alphabets are index ranges: states `0..|S|`, inputs `0..|X|`, sensing
/// observations `0..|Z|`, channel outputs `0..|Y|`, estimates `0..|S~|`.
/// The user's reconstruction alphabet equals the estimate alphabet unless
/// `reconstruction_distortion` supplies a separate `|S~| x |S^|` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteCasModel {
    /// `P_S(s)`.
    pub state_prior: Vec<f64>,
    /// `Q_{Z|SX}(z|x,s)` indexed `[x][s][z]`.
    pub sensing_law: Vec<Vec<Vec<f64>>>,
    /// `Q_{Y|X}(y|x)` indexed `[x][y]`.
    pub comm_law: Vec<Vec<f64>>,
    /// `d(s, s~)` indexed `[s][s~]`.
    pub distortion: Vec<Vec<f64>>,
    /// Resource cost `b(x)`.
    pub cost: Vec<f64>,
    /// `d(s~, s^)` used on the communication link. Defaults to `distortion`,
    /// which then has to be square.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_distortion: Option<Vec<Vec<f64>>>,
}

/// A validation failure tied to a top-level field of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl From<ValidationIssue> for CasError {
    fn from(v: ValidationIssue) -> Self {
        CasError::InvalidModel(v.to_string())
    }
}

fn issue(field: &'static str, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue {
        field,
        message: message.into(),
    }
}

fn check_simplex(field: &'static str, what: &str, p: &[f64]) -> std::result::Result<(), ValidationIssue> {
    if p.is_empty() {
        return Err(issue(field, format!("{what} is empty")));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(issue(field, format!("{what} has invalid entry {v}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(issue(field, format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn check_distortion(field: &'static str, d: &[Vec<f64>], rows: usize) -> std::result::Result<usize, ValidationIssue> {
    if d.len() != rows {
        return Err(issue(field, format!("expected {rows} rows, found {}", d.len())));
    }
    let cols = d[0].len();
    if cols == 0 {
        return Err(issue(field, "rows are empty"));
    }
    for (i, row) in d.iter().enumerate() {
        if row.len() != cols {
            return Err(issue(field, format!("row {i} has {} entries, expected {cols}", row.len())));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(issue(field, format!("row {i} has invalid entry {v}")));
        }
    }
    Ok(cols)
}

impl FiniteCasModel {
    pub fn num_states(&self) -> usize {
        self.state_prior.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.comm_law.len()
    }

    pub fn num_observations(&self) -> usize {
        self.sensing_law
            .first()
            .and_then(|x| x.first())
            .map_or(0, Vec::len)
    }

    pub fn num_outputs(&self) -> usize {
        self.comm_law.first().map_or(0, Vec::len)
    }

    pub fn num_estimates(&self) -> usize {
        self.distortion.first().map_or(0, Vec::len)
    }

    /// Distortion matrix of the communication stage, `d(s~, s^)`.
    pub fn link_distortion(&self) -> &[Vec<f64>] {
        self.reconstruction_distortion
            .as_deref()
            .unwrap_or(&self.distortion)
    }

    /// Largest entry of the state distortion matrix.
    pub fn d_max(&self) -> f64 {
        self.distortion
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| m.max(v))
    }

    pub fn check(&self) -> std::result::Result<(), ValidationIssue> {
        check_simplex("state_prior", "state prior", &self.state_prior)?;
        let ns = self.num_states();

        let nx = self.sensing_law.len();
        if nx == 0 {
            return Err(issue("sensing_law", "no inputs"));
        }
        let nz = self.num_observations();
        if nz == 0 {
            return Err(issue("sensing_law", "empty observation alphabet"));
        }
        for (x, per_state) in self.sensing_law.iter().enumerate() {
            if per_state.len() != ns {
                return Err(issue(
                    "sensing_law",
                    format!("input {x} has {} state rows, expected {ns}", per_state.len()),
                ));
            }
            for (s, row) in per_state.iter().enumerate() {
                if row.len() != nz {
                    return Err(issue(
                        "sensing_law",
                        format!("row [{x}][{s}] has {} entries, expected {nz}", row.len()),
                    ));
                }
                check_simplex("sensing_law", &format!("row [{x}][{s}]"), row)?;
            }
        }

        if self.comm_law.len() != nx {
            return Err(issue(
                "comm_law",
                format!("{} rows but sensing_law has {nx} inputs", self.comm_law.len()),
            ));
        }
        let ny = self.num_outputs();
        for (x, row) in self.comm_law.iter().enumerate() {
            if row.len() != ny {
                return Err(issue("comm_law", format!("row {x} has {} entries, expected {ny}", row.len())));
            }
            check_simplex("comm_law", &format!("row {x}"), row)?;
        }

        let n_est = check_distortion("distortion", &self.distortion, ns)?;

        if self.cost.len() != nx {
            return Err(issue("cost", format!("{} entries, expected {nx}", self.cost.len())));
        }
        if let Some(v) = self.cost.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(issue("cost", format!("invalid entry {v}")));
        }

        match &self.reconstruction_distortion {
            Some(d) => {
                check_distortion("reconstruction_distortion", d, n_est)?;
            }
            None if n_est != ns => {
                return Err(issue(
                    "distortion",
                    "non-square distortion requires an explicit reconstruction_distortion",
                ));
            }
            None => {}
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(Into::into)
    }

    /// Parses and validates a JSON model. Error messages carry the line
    /// number of the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| {
            CasError::InvalidModel(e.to_string())
        })?;
        model.check().map_err(|v| {
            let line = locate_key(text, v.field).unwrap_or(1);
            CasError::InvalidModel(format!("line {line}: {v}"))
        })?;
        Ok(model)
    }
}

/// 1-based line of the first occurrence of `"key"` followed by a colon.
pub(crate) fn locate_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().enumerate().find_map(|(i, line)| {
        let pos = line.find(&needle)?;
        line[pos + needle.len()..]
            .trim_start()
            .starts_with(':')
            .then_some(i + 1)
    })
}

/// An input distribution `P_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    pub probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_simplex("probs", "input distribution", &probs)?;
        Ok(Self { probs })
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[x] = 1.0;
        Self { probs }
    }

    /// `E[f(X)]`.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.probs.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FiniteCasModel {
        FiniteCasModel {
            state_prior: vec![0.5, 0.5],
            sensing_law: vec![
                vec![vec![0.9, 0.1], vec![0.1, 0.9]],
                vec![vec![0.6, 0.4], vec![0.4, 0.6]],
            ],
            comm_law: vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            cost: vec![0.0, 1.0],
            reconstruction_distortion: None,
        }
    }

    #[test]
    fn valid_model_passes() {
        sample().validate().unwrap();
        assert_eq!(sample().d_max(), 1.0);
    }

    #[test]
    fn rejects_bad_prior() {
        let mut m = sample();
        m.state_prior = vec![0.5, 0.6];
        let err = m.check().unwrap_err();
        assert_eq!(err.field, "state_prior");
    }

    #[test]
    fn rejects_inconsistent_alphabets() {
        let mut m = sample();
        m.cost.push(2.0);
        assert_eq!(m.check().unwrap_err().field, "cost");

        let mut m = sample();
        m.comm_law.pop();
        assert_eq!(m.check().unwrap_err().field, "comm_law");

        let mut m = sample();
        m.distortion[0].push(1.0);
        assert_eq!(m.check().unwrap_err().field, "distortion");
    }

    #[test]
    fn non_square_distortion_needs_link_matrix() {
        let mut m = sample();
        m.distortion = vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.5]];
        assert!(m.check().is_err());
        m.reconstruction_distortion = Some(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]);
        m.check().unwrap();
        assert_eq!(m.link_distortion().len(), 3);
    }

    #[test]
    fn json_errors_are_line_anchored() {
        let text = "{\n  \"state_prior\": [0.5, 0.5],\n  \"sensing_law\": [[[1.0, 0.0], [0.0, 1.0]]],\n  \"comm_law\": [[0.7, 0.2]],\n  \"distortion\": [[0, 1], [1, 0]],\n  \"cost\": [0]\n}";
        let err = FiniteCasModel::from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("comm_law"), "{err}");

        let syntax = "{\n  \"state_prior\": [0.5, 0.5],\n  \"bogus\": 1\n}";
        let err = FiniteCasModel::from_json_str(syntax).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let text = serde_json::to_string_pretty(&m).unwrap();
        assert_eq!(FiniteCasModel::from_json_str(&text).unwrap(), m);
    }
}
