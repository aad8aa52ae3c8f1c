//! Accuracy versus wall-clock budget.
//!
//! Each (budget, method) cell runs `runs_per_point` trajectories whose
//! length is a fixed number of steps: budget × throughput. Throughput is
//! steps per second, either pinned in `BenchmarkSpec::throughput`
//! (reproducible output) or measured with a short pilot run (output then
//! depends on the machine).
//!
//! Results use the sweep CSV schema with a different reading of three
//! columns: `wallclock_s` is the nominal budget, and `err_np`, `err_g2`,
//! `err_rin` hold the root-mean-square relative deviation of each quantity
//! from the truth over the runs. The relative error δ of a cell is the
//! largest of the three.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::io::{ResultRow, Sidecar};
use super::run::{run_single, RunOutcome, RunPlan, SimulationSettings};
use super::sweep::{analytic_statistics, row_from_summary};
use super::{run_seed, with_pool, Method, Variant};
use crate::error::{Error, Result};
use crate::model::{LaserParameters, Preset};
use crate::stats::{aggregate, per_run_relative_errors, Quantity, RunStatistics};
use crate::trajectory::NullObserver;

/// Fewest steps a cell may use before it is flagged.
const MIN_STEPS: u64 = 100;
/// Wall time a throughput pilot aims for.
const PILOT_SECONDS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthSource {
    Oracle,
    Smallsignal,
}

impl TruthSource {
    pub fn method(self) -> Method {
        match self {
            TruthSource::Oracle => Method::Oracle,
            TruthSource::Smallsignal => Method::Smallsignal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub preset: Option<Preset>,
    /// Includes the benchmark pump.
    pub params: LaserParameters,
    pub methods: Vec<Method>,
    /// Wall-clock seconds per run, increasing.
    pub budgets: Vec<f64>,
    pub truth: TruthSource,
    pub runs_per_point: usize,
    pub base_seed: u64,
    pub settings: SimulationSettings,
    /// Steps per second per method; missing methods are measured.
    pub throughput: BTreeMap<Method, f64>,
    /// Unused by the benchmark table, which always reports the nominal
    /// budget; kept so sweep and benchmark configurations share one shape.
    pub record_wallclock: bool,
}

/// One trajectory of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRun {
    pub method: Method,
    pub budget_index: usize,
    pub budget_s: f64,
    pub run: usize,
    pub steps: u64,
    pub wallclock_s: f64,
    /// Relative error of this run alone.
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub rows: Vec<ResultRow>,
    pub sidecar: Sidecar,
    pub truth: RunStatistics,
    pub runs: Vec<BenchRun>,
    pub throughput: BTreeMap<Method, f64>,
}

impl BenchmarkOutput {
    /// δ of the (budget, method) cell, or `None` if the cell failed.
    pub fn delta(&self, method: Method, budget_index: usize) -> Option<f64> {
        let budget = self.sidecar_budget(budget_index)?;
        self.rows
            .iter()
            .find(|r| r.method == method.name() && r.wallclock_s == Some(budget) && r.is_ok())
            .and_then(|r| Some(r.err_np?.max(r.err_g2?).max(r.err_rin?)))
    }

    /// Per-run δ values of one cell.
    pub fn run_deltas(&self, method: Method, budget_index: usize) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.method == method && r.budget_index == budget_index)
            .map(|r| r.delta)
            .collect()
    }

    fn sidecar_budget(&self, budget_index: usize) -> Option<f64> {
        self.runs
            .iter()
            .find(|r| r.budget_index == budget_index)
            .map(|r| r.budget_s)
    }

    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.is_ok())
    }
}

/// Measures steps per second of one method by doubling a pilot run until
/// it takes at least `PILOT_SECONDS`.
pub fn measure_throughput(
    method: Method,
    params: &LaserParameters,
    settings: &SimulationSettings,
    seed: u64,
) -> Result<f64> {
    let mut steps = 10_000u64;
    loop {
        let plan = RunPlan::for_steps(method, params, settings, steps)?;
        let start = Instant::now();
        let out = run_single(
            method,
            params,
            settings,
            &plan,
            Variant::Base,
            seed,
            &mut NullObserver,
        )?;
        let wall = start.elapsed().as_secs_f64();
        if wall >= PILOT_SECONDS || out.report.steps < steps || steps >= 1 << 40 {
            return Ok(out.report.steps.max(1) as f64 / wall.max(1e-9));
        }
        steps *= 2;
    }
}

struct Cell {
    method: Method,
    budget_index: usize,
    run: usize,
    steps: u64,
    seed: u64,
}

pub fn run_benchmark(
    spec: &BenchmarkSpec,
    threads: Option<usize>,
    log: bool,
) -> Result<BenchmarkOutput> {
    spec.settings.validate()?;
    let params = spec.params;
    let truth = analytic_statistics(spec.truth.method(), &params, &spec.settings)?;
    for q in Quantity::ALL {
        if !truth.get(q).is_some_and(|v| v != 0.0 && v.is_finite()) {
            return Err(Error::ZeroTruth(q.name()));
        }
    }

    let mut throughput = BTreeMap::new();
    let mut measured = Vec::new();
    for &m in &spec.methods {
        let rate = match spec.throughput.get(&m) {
            Some(&r) => r,
            None => {
                let r = measure_throughput(m, &params, &spec.settings, spec.base_seed ^ 0xA5A5)?;
                measured.push(m);
                r
            }
        };
        throughput.insert(m, rate);
    }

    let mut cells = Vec::new();
    for (bi, &budget) in spec.budgets.iter().enumerate() {
        for &method in &spec.methods {
            let steps = (budget * throughput[&method]).round() as u64;
            for run in 0..spec.runs_per_point {
                cells.push(Cell {
                    method,
                    budget_index: bi,
                    run,
                    steps,
                    seed: run_seed(spec.base_seed, method, Variant::Base, bi, run),
                });
            }
        }
    }

    let outcomes: Vec<Result<RunOutcome>> = with_pool(threads, || {
        cells
            .par_iter()
            .map(|c| {
                if c.steps < MIN_STEPS {
                    return Err(Error::config("budgets", "budget too small for this method"));
                }
                let plan = RunPlan::for_steps(c.method, &params, &spec.settings, c.steps)?;
                run_single(
                    c.method,
                    &params,
                    &spec.settings,
                    &plan,
                    Variant::Base,
                    c.seed,
                    &mut NullObserver,
                )
            })
            .collect()
    })?;

    let mut config = serde_json::to_value(spec).map_err(|e| Error::Format(e.to_string()))?;
    config["resolved_throughput"] = json!(throughput);
    config["measured_throughput"] = json!(measured);
    config["truth_statistics"] = json!(truth);
    let mut sidecar = Sidecar::new("bench", config);
    let mut runs = Vec::new();
    let mut rows = Vec::new();

    let mut i = 0;
    while i < cells.len() {
        let (method, bi) = (cells[i].method, cells[i].budget_index);
        let budget = spec.budgets[bi];
        let mut stats = Vec::new();
        let mut failure = None;
        let first = i;
        while i < cells.len() && cells[i].method == method && cells[i].budget_index == bi {
            let c = &cells[i];
            sidecar
                .seeds
                .push(json!({"method": method, "budget_s": budget, "run": c.run, "seed": c.seed}));
            match &outcomes[i] {
                Ok(o) => {
                    let delta = per_run_relative_errors(std::slice::from_ref(&o.stats), &truth)?[0];
                    sidecar.runs.push(json!({
                        "method": method, "budget_s": budget, "run": c.run, "steps": o.report.steps,
                        "t_reached": o.report.t_reached, "stop_reason": o.report.stop_reason,
                        "wallclock_s": o.wallclock_s, "delta": delta,
                    }));
                    runs.push(BenchRun {
                        method,
                        budget_index: bi,
                        budget_s: budget,
                        run: c.run,
                        steps: o.report.steps,
                        wallclock_s: o.wallclock_s,
                        delta,
                    });
                    stats.push(o.stats);
                }
                Err(e) => {
                    let code = match e {
                        Error::Config { .. } | Error::EmptyWindow => "budget_too_small",
                        other => other.code(),
                    };
                    sidecar.runs.push(json!({"method": method, "budget_s": budget, "run": c.run, "status": code, "error": e.to_string()}));
                    failure.get_or_insert(code);
                }
            }
            i += 1;
        }
        let seed = cells[first].seed;
        let steps = cells[first].steps;
        let row = match failure {
            Some(code) => {
                let mut s = crate::stats::SummaryStatistics::default();
                s.steps = steps;
                row_from_summary(
                    method,
                    params.n0,
                    params.gamma_p,
                    &s,
                    seed,
                    code.into(),
                    Some(budget),
                )
            }
            None => {
                let mut s = aggregate(&stats, None);
                let rms = |q: Quantity| -> Option<f64> {
                    let t = truth.get(q)?;
                    let ms = stats
                        .iter()
                        .map(|r| ((r.get(q).unwrap_or(0.0) - t) / t).powi(2))
                        .sum::<f64>()
                        / stats.len() as f64;
                    Some(ms.sqrt())
                };
                s.err_np = rms(Quantity::MeanNp);
                s.err_g2 = rms(Quantity::G2);
                s.err_rin = rms(Quantity::Rin);
                s.steps = steps;
                row_from_summary(
                    method,
                    params.n0,
                    params.gamma_p,
                    &s,
                    seed,
                    "ok".into(),
                    Some(budget),
                )
            }
        };
        if log {
            eprintln!(
                "[bench] budget={budget:<8} {:<9} steps={:<12} status={} delta={}",
                method.name(),
                steps,
                row.status,
                match (row.err_np, row.err_g2, row.err_rin) {
                    (Some(a), Some(b), Some(c)) => format!("{:.4e}", a.max(b).max(c)),
                    _ => "-".into(),
                }
            );
        }
        rows.push(row);
    }
    rows.sort_by(|a, b| {
        a.wallclock_s
            .unwrap_or(0.0)
            .total_cmp(&b.wallclock_s.unwrap_or(0.0))
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(BenchmarkOutput {
        rows,
        sidecar,
        truth,
        runs,
        throughput,
    })
}
