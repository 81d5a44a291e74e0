use std::path::PathBuf;

use cas_core::discrete::{
    constrained_capacity, estimate_costs, rate_distortion_discrete, tradeoff_curve, TradeoffPoint,
};
use cas_core::gaussian::{channel_mi, GramMatrix, TrmModel};
use cas_core::simulator::SimOptions;
use cas_core::waveform::{optimize_isac, optimize_sw, sweep_snr, OptResult, Scheme, SwOptions, SweepOptions};
use cas_core::simulate_end_to_end;

use crate::config::{ExperimentConfig, Mode, WaveformChoice};
use crate::error::{CliError, Result};
use crate::output::{write_csv, write_json, Summary, Unit};

pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_TRADEOFF_GRID: usize = 101;
pub const DEFAULT_SPLIT_GRID: usize = 201;

/// What a run produced.
pub struct Report {
    pub summary: Summary,
    /// Extra table printed after the summary.
    pub table: Option<String>,
    pub files: Vec<PathBuf>,
    /// Solver failures that did not stop the run.
    pub failures: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, bits: bool) -> Result<Report> {
    let mut summary = Summary::new(cfg.mode.name(), bits);
    let dir = cfg.out_dir();
    let mut files = Vec::new();
    let mut table = None;
    let mut failures = Vec::new();
    match cfg.mode {
        Mode::DiscreteCapacity => {
            let model = cfg.finite_model()?;
            let e = estimate_costs(&model);
            let d_s = cfg.d_s.unwrap_or_else(|| max(&e));
            let budget = cfg.budget.unwrap_or_else(|| max(&model.cost));
            let res = constrained_capacity(&model, d_s, budget, &cfg.ba)?;
            summary.push("capacity", res.capacity, Unit::Nats);
            summary.push("d_s", d_s, Unit::Distortion);
            summary.push("budget", budget, Unit::Power);
            summary.push("estimate_cost", res.estimate_cost, Unit::Distortion);
            summary.push("resource_cost", res.resource_cost, Unit::Power);
            files.push(write_json(&dir, "capacity.json", &res)?);
        }
        Mode::DiscreteRd => {
            let d_c = cfg.d_c.expect("validated");
            let (source, distortion) = match (&cfg.source, &cfg.distortion) {
                (Some(s), Some(d)) => (s.clone(), d.clone()),
                _ => {
                    let m = cfg.finite_model()?;
                    (m.state_prior.clone(), m.distortion.clone())
                }
            };
            let res = rate_distortion_discrete(&source, &distortion, d_c, &cfg.ba)?;
            summary.push("rate", res.rate, Unit::Nats);
            summary.push("d_c", d_c, Unit::Distortion);
            summary.push("achieved_distortion", res.distortion, Unit::Distortion);
            files.push(write_json(&dir, "rd.json", &res)?);
        }
        Mode::DiscreteTradeoff => {
            let model = cfg.finite_model()?;
            let e = estimate_costs(&model);
            let budget = cfg.budget.unwrap_or_else(|| max(&model.cost));
            let points = cfg.grid.unwrap_or(DEFAULT_TRADEOFF_GRID);
            let span = max(&e) - min(&e);
            let step = if span > 0.0 { span / (points - 1) as f64 } else { 1.0 };
            let curve = tradeoff_curve(&model, budget, step, &cfg.ba)?;
            let best = curve
                .iter()
                .fold(None::<&TradeoffPoint>, |b, p| match b {
                    Some(b) if b.d_total <= p.d_total => Some(b),
                    _ => Some(p),
                })
                .ok_or_else(|| CliError::Config(format!("no estimation threshold is feasible under budget {budget}")))?;
            summary.push("d_s", best.d_s, Unit::Distortion);
            summary.push("d_c", best.d_c, Unit::Distortion);
            summary.push("d_total", best.d_total, Unit::Distortion);
            summary.push("rate", best.rate, Unit::Nats);
            summary.push("capacity", best.capacity, Unit::Nats);
            summary.push("budget", budget, Unit::Power);
            summary.push("points", curve.len() as f64, Unit::Count);
            files.push(write_csv(&dir, "tradeoff.csv", &curve)?);
            files.push(write_json(&dir, "tradeoff.json", best)?);
        }
        Mode::TrmOptimize => {
            let model = cfg.trm_model()?;
            let res = optimize_isac(&model, None, &cfg.isac)?;
            push_opt(&mut summary, &res);
            files.push(write_json(&dir, "isac.json", &res)?);
        }
        Mode::TrmSw => {
            let model = cfg.trm_model()?;
            let res = optimize_sw(&model, &sw_options(cfg))?;
            push_opt(&mut summary, &res);
            summary.push("split", res.split.unwrap_or(f64::NAN), Unit::Distortion);
            files.push(write_json(&dir, "sw.json", &res)?);
        }
        Mode::SnrSweep => {
            let model = cfg.trm_model()?;
            let snr = cfg.snr_db.as_deref().expect("validated");
            let opts = SweepOptions {
                isac: cfg.isac,
                sw: sw_options(cfg),
            };
            let curve = sweep_snr(&model, snr, &[Scheme::Isac, Scheme::Sw], &opts)?;
            for e in &curve.entries {
                if let Some(err) = &e.error {
                    failures.push(format!("{} at {} dB: {err}", e.scheme, e.snr_db));
                }
            }
            let rows = curve.rows();
            summary.push("snr_points", snr.len() as f64, Unit::Count);
            summary.push("failed_points", failures.len() as f64, Unit::Count);
            table = Some(sweep_table(&rows, bits));
            files.push(write_csv(&dir, "sweep.csv", &rows)?);
            files.push(write_json(&dir, "sweep.json", &curve)?);
        }
        Mode::Simulate => {
            let model = cfg.trm_model()?;
            let gram = match cfg.waveform {
                WaveformChoice::Isac => optimize_isac(&model, None, &cfg.isac)?.q_star,
                WaveformChoice::Isotropic => GramMatrix::isotropic(&model),
            };
            let x = gram.waveform(model.t);
            let rate = cfg.rate_budget.unwrap_or_else(|| channel_mi(&model, &gram));
            let opts = SimOptions {
                chunk_size: cfg.chunk_size.unwrap_or(SimOptions::default().chunk_size),
                record_trials: cfg.per_trial_csv,
            };
            let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
            let mut rep = simulate_end_to_end(&model, &x, rate, trials, simulation_seed(cfg.seed), &opts)?;
            push_sim(&mut summary, &model, &rep, rate);
            if let Some(records) = rep.trials.take() {
                files.push(write_csv(&dir, "trials.csv", &records)?);
            }
            files.push(write_json(&dir, "simulation.json", &rep)?);
        }
    }
    files.push(write_json(&dir, "summary.json", &summary)?);
    Ok(Report {
        summary,
        table,
        files,
        failures,
    })
}

/// Seed of the Monte Carlo streams, kept apart from the model generator's.
fn simulation_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn sw_options(cfg: &ExperimentConfig) -> SwOptions {
    SwOptions {
        split_grid: cfg.grid.unwrap_or(DEFAULT_SPLIT_GRID),
    }
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn push_opt(summary: &mut Summary, res: &OptResult) {
    summary.push("d_s", res.point.d_s, Unit::Distortion);
    summary.push("d_c", res.point.d_c, Unit::Distortion);
    summary.push("d_total", res.point.d_total, Unit::Distortion);
    summary.push("rate", res.point.rate, Unit::Nats);
    summary.push("mi", res.point.capacity, Unit::Nats);
    summary.push("trace_used", res.trace_used, Unit::Power);
    summary.push("trace_budget", res.point.budget, Unit::Power);
    summary.push("iterations", res.iterations as f64, Unit::Count);
    summary.push("converged", if res.converged { 1.0 } else { 0.0 }, Unit::Flag);
}

fn push_sim(summary: &mut Summary, model: &TrmModel, rep: &cas_core::SimReport, rate: f64) {
    summary.push("trials", rep.n_trials as f64, Unit::Count);
    summary.push("rate_budget", rate, Unit::Nats);
    summary.push("d_s", rep.d_s.mean, Unit::Distortion);
    summary.push("d_s_std_err", rep.d_s.std_err, Unit::Distortion);
    summary.push("d_s_analytic", rep.analytic_d_s, Unit::Distortion);
    if let (Some(d), Some(a)) = (rep.d_c, rep.analytic_d_c) {
        summary.push("d_c", d.mean, Unit::Distortion);
        summary.push("d_c_std_err", d.std_err, Unit::Distortion);
        summary.push("d_c_analytic", a, Unit::Distortion);
    }
    if let (Some(d), Some(a)) = (rep.d_total, rep.analytic_d_total) {
        summary.push("d_total", d.mean, Unit::Distortion);
        summary.push("d_total_analytic", a, Unit::Distortion);
    }
    if let Some(c) = rep.cross_term {
        summary.push("cross_term", c.mean, Unit::Distortion);
        summary.push("cross_term_std_err", c.std_err, Unit::Distortion);
    }
    summary.push("prior_energy", model.prior_energy(), Unit::Distortion);
}

fn sweep_table(rows: &[cas_core::waveform::SweepRow], bits: bool) -> String {
    let info = |v: f64| if bits { cas_core::info::nats_to_bits(v) } else { v };
    let unit = if bits { "bits" } else { "nats" };
    let mut out = format!(
        "{:>8}  {:>6}  {:>12}  {:>12}  {:>12}  {:>12}  {:>9}\n",
        "snr_db",
        "scheme",
        "d_s",
        "d_c",
        "d_total",
        format!("rate_{unit}"),
        "converged"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>8.2}  {:>6}  {:>12.6}  {:>12.6}  {:>12.6}  {:>12.6}  {:>9}\n",
            r.snr_db,
            r.scheme.to_string(),
            r.d_s,
            r.d_c,
            r.d_total,
            info(r.rate_nats),
            r.converged
        ));
    }
    out
}
