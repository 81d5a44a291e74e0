use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::isac::{optimize_isac, IsacOptions};
use super::sw::{optimize_sw, SwOptions};
use super::OptResult;
use crate::error::{CasError, Result};
use crate::gaussian::TrmModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "ISAC")]
    Isac,
    #[serde(rename = "SW")]
    Sw,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Isac => "ISAC",
            Scheme::Sw => "SW",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub isac: IsacOptions,
    pub sw: SwOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub result: Option<OptResult>,
    /// Set when the optimizer failed at this point.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub snr_db: Vec<f64>,
    /// One entry per `(snr, scheme)`, SNR-major in input order.
    pub entries: Vec<SweepEntry>,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub d_s: f64,
    pub d_c: f64,
    pub d_total: f64,
    pub rate_nats: f64,
    pub mi_nats: f64,
    pub trace_used: f64,
    pub converged: bool,
}

impl SweepCurve {
    pub fn get(&self, snr_index: usize, scheme: Scheme) -> Option<&SweepEntry> {
        self.entries
            .iter()
            .filter(|e| e.scheme == scheme)
            .nth(snr_index)
    }

    /// CSV rows; failed points carry NaN values and `converged = false`.
    pub fn rows(&self) -> Vec<SweepRow> {
        self.entries
            .iter()
            .map(|e| match &e.result {
                Some(r) => SweepRow {
                    snr_db: e.snr_db,
                    scheme: e.scheme,
                    d_s: r.point.d_s,
                    d_c: r.point.d_c,
                    d_total: r.point.d_total,
                    rate_nats: r.point.rate,
                    mi_nats: r.point.capacity,
                    trace_used: r.trace_used,
                    converged: r.converged,
                },
                None => SweepRow {
                    snr_db: e.snr_db,
                    scheme: e.scheme,
                    d_s: f64::NAN,
                    d_c: f64::NAN,
                    d_total: f64::NAN,
                    rate_nats: f64::NAN,
                    mi_nats: f64::NAN,
                    trace_used: f64::NAN,
                    converged: false,
                },
            })
            .collect()
    }
}

/// Power budget for an SNR in dB: `P_T = 10^(snr/10) * noise_c`.
pub fn power_for_snr(template: &TrmModel, snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0) * template.noise_c
}

/// Runs each scheme at every SNR of `snr_db`, keeping the template's
/// matrices and noise powers fixed. Points run in parallel; a failing point
/// is recorded and does not abort the sweep.
pub fn sweep_snr(
    template: &TrmModel,
    snr_db: &[f64],
    schemes: &[Scheme],
    opts: &SweepOptions,
) -> Result<SweepCurve> {
    if snr_db.is_empty() {
        return Err(CasError::InvalidModel("SNR list is empty".into()));
    }
    if snr_db.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(CasError::InvalidModel("SNR list must be strictly increasing".into()));
    }
    let jobs: Vec<(f64, Scheme)> = snr_db
        .iter()
        .flat_map(|&s| schemes.iter().map(move |&k| (s, k)))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(snr, scheme)| {
            let run = || -> Result<OptResult> {
                let model = template.with_power(power_for_snr(template, snr))?;
                match scheme {
                    Scheme::Isac => optimize_isac(&model, None, &opts.isac),
                    Scheme::Sw => optimize_sw(&model, &opts.sw),
                }
            };
            match run() {
                Ok(r) => SweepEntry { snr_db: snr, scheme, result: Some(r), error: None },
                Err(e) => SweepEntry { snr_db: snr, scheme, result: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(SweepCurve {
        snr_db: snr_db.to_vec(),
        entries,
    })
}
