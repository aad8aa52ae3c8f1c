use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::io::{ResultRow, Sidecar};
use super::run::{run_single, RunOutcome, RunPlan, SimulationSettings};
use super::{run_seed, with_pool, Method, Variant};
use crate::error::{Error, Result};
use crate::model::{LaserParameters, Preset};
use crate::oracle::{oracle_statistics, steady_state};
use crate::smallsignal::small_signal_solution;
use crate::stats::{aggregate, RunStatistics, SummaryStatistics};
use crate::trajectory::NullObserver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: Option<Preset>,
    /// Rates shared by every point; the pump is taken from the grid.
    pub params: LaserParameters,
    pub pump_grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub runs_per_point: usize,
    pub base_seed: u64,
    pub settings: SimulationSettings,
    /// Fill the `wallclock_s` column. Off by default so that repeated sweeps
    /// produce identical files; wall times always go to the sidecar.
    pub record_wallclock: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub sidecar: Sidecar,
}

impl SweepOutput {
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.is_ok())
    }
}

/// Exact (oracle) or linearized (small-signal) statistics at one pump.
pub fn analytic_statistics(
    method: Method,
    params: &LaserParameters,
    settings: &SimulationSettings,
) -> Result<RunStatistics> {
    match method {
        Method::Oracle => Ok(oracle_statistics(&steady_state(
            params,
            &settings.oracle_config(),
        )?)),
        Method::Smallsignal => {
            let sol = small_signal_solution(params)?;
            let s = sol.analytic_statistics()?;
            Ok(RunStatistics {
                mean_np: sol.n_bar_a,
                mean_ne: sol.n_bar_e,
                g2_0: Some(s.g2_0),
                rin: Some(s.rin),
                corr_ratio: None,
            })
        }
        _ => Err(Error::config(
            "method",
            format!("{method} has no closed-form statistics"),
        )),
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    point: usize,
    method: Method,
    variant: Variant,
    run: usize,
    seed: u64,
}

enum JobResult {
    Simulated(Result<RunOutcome>),
    Analytic(Result<RunStatistics>, f64),
}

fn execute(spec: &SweepSpec, job: &Job) -> JobResult {
    let params = spec.params.with_pump(spec.pump_grid[job.point]);
    if job.method.is_stochastic() {
        let outcome = RunPlan::for_method(job.method, &params, &spec.settings).and_then(|plan| {
            run_single(
                job.method,
                &params,
                &spec.settings,
                &plan,
                job.variant,
                job.seed,
                &mut NullObserver,
            )
        });
        JobResult::Simulated(outcome)
    } else {
        let start = Instant::now();
        let stats = analytic_statistics(job.method, &params, &spec.settings);
        JobResult::Analytic(stats, start.elapsed().as_secs_f64())
    }
}

fn jobs(spec: &SweepSpec) -> Vec<Job> {
    let mut jobs = Vec::new();
    for point in 0..spec.pump_grid.len() {
        for &method in &spec.methods {
            if !method.is_stochastic() {
                jobs.push(Job {
                    point,
                    method,
                    variant: Variant::Base,
                    run: 0,
                    seed: 0,
                });
                continue;
            }
            let variants: &[Variant] = if method.has_step() {
                &[Variant::Base, Variant::Coarse]
            } else {
                &[Variant::Base]
            };
            for &variant in variants {
                for run in 0..spec.runs_per_point {
                    jobs.push(Job {
                        point,
                        method,
                        variant,
                        run,
                        seed: run_seed(spec.base_seed, method, variant, point, run),
                    });
                }
            }
        }
    }
    jobs
}

fn status_of(stats: &SummaryStatistics) -> String {
    match stats.mean_np {
        Some(m) if m > 0.0 => "ok".into(),
        _ => Error::ZeroPhotons.code().into(),
    }
}

pub(crate) fn row_from_summary(
    method: Method,
    n0: u32,
    gamma_p: f64,
    stats: &SummaryStatistics,
    seed: u64,
    status: String,
    wallclock: Option<f64>,
) -> ResultRow {
    ResultRow {
        method: method.name().into(),
        n0,
        gamma_p,
        mean_np: stats.mean_np,
        mean_ne: stats.mean_ne,
        g2_0: stats.g2_0,
        rin: stats.rin,
        corr_ratio: stats.corr_ratio,
        err_np: stats.err_np,
        err_g2: stats.err_g2,
        err_rin: stats.err_rin,
        steps: stats.steps,
        wallclock_s: wallclock,
        seed,
        status,
    }
}

/// Runs every (pump, method) point of the sweep. Failures are reported in
/// the row status and never abort the sweep. `threads = None` uses the
/// global worker pool.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>, log: bool) -> Result<SweepOutput> {
    spec.settings.validate()?;
    let jobs = jobs(spec);
    let results: Vec<JobResult> = with_pool(threads, || {
        jobs.par_iter().map(|j| execute(spec, j)).collect()
    })?;

    let mut sidecar = Sidecar::new(
        "sweep",
        serde_json::to_value(spec).map_err(|e| Error::Format(e.to_string()))?,
    );
    let mut rows = Vec::new();
    let mut cursor = 0;
    for (point, &pump) in spec.pump_grid.iter().enumerate() {
        for &method in &spec.methods {
            let start = cursor;
            while cursor < jobs.len()
                && jobs[cursor].point == point
                && jobs[cursor].method == method
            {
                cursor += 1;
            }
            let (group, outs) = (&jobs[start..cursor], &results[start..cursor]);
            let row = summarize_group(spec, method, pump, group, outs, &mut sidecar);
            if log {
                eprintln!(
                    "[sweep] gamma_P={pump:<12.6e} {:<11} status={} mean_np={} g2={}",
                    method.name(),
                    row.status,
                    row.mean_np.map_or("-".into(), |v| format!("{v:.6e}")),
                    row.g2_0.map_or("-".into(), |v| format!("{v:.5}")),
                );
            }
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| {
        a.gamma_p
            .total_cmp(&b.gamma_p)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(SweepOutput { rows, sidecar })
}

fn summarize_group(
    spec: &SweepSpec,
    method: Method,
    pump: f64,
    jobs: &[Job],
    outs: &[JobResult],
    sidecar: &mut Sidecar,
) -> ResultRow {
    let n0 = spec.params.n0;
    let mut wall = 0.0;
    if !method.is_stochastic() {
        let JobResult::Analytic(res, w) = &outs[0] else {
            unreachable!("analytic job")
        };
        sidecar.runs.push(json!({"method": method, "gamma_P": pump, "wallclock_s": w, "status": res.as_ref().map(|_| "ok").unwrap_or_else(|e| e.code())}));
        return match res {
            Ok(stats) => {
                let mut s = SummaryStatistics::exact(stats);
                s.wallclock_s = *w;
                row_from_summary(
                    method,
                    n0,
                    pump,
                    &s,
                    0,
                    status_of(&s),
                    spec.record_wallclock.then_some(*w),
                )
            }
            Err(Error::ZeroPhotons) => {
                let s = SummaryStatistics {
                    mean_np: Some(0.0),
                    ..SummaryStatistics::default()
                };
                row_from_summary(
                    method,
                    n0,
                    pump,
                    &s,
                    0,
                    Error::ZeroPhotons.code().into(),
                    spec.record_wallclock.then_some(*w),
                )
            }
            Err(e) => row_from_summary(
                method,
                n0,
                pump,
                &SummaryStatistics::default(),
                0,
                e.code().into(),
                spec.record_wallclock.then_some(*w),
            ),
        };
    }

    let mut base = Vec::new();
    let mut coarse = Vec::new();
    let mut steps = 0u64;
    let mut failure: Option<&'static str> = None;
    for (job, out) in jobs.iter().zip(outs) {
        let JobResult::Simulated(res) = out else {
            unreachable!("simulation job")
        };
        sidecar.seeds.push(json!({"method": method, "point": job.point, "gamma_P": pump, "variant": job.variant, "run": job.run, "seed": job.seed}));
        match res {
            Ok(o) => {
                wall += o.wallclock_s;
                sidecar.runs.push(json!({
                    "method": method, "gamma_P": pump, "variant": job.variant, "run": job.run,
                    "steps": o.report.steps, "t_reached": o.report.t_reached, "stop_reason": o.report.stop_reason,
                    "corrections": o.report.corrections, "wallclock_s": o.wallclock_s, "status": "ok",
                }));
                match job.variant {
                    Variant::Base => {
                        steps += o.report.steps;
                        base.push(o.stats);
                    }
                    Variant::Coarse => coarse.push(o.stats),
                }
            }
            Err(e) => {
                sidecar.runs.push(json!({"method": method, "gamma_P": pump, "variant": job.variant, "run": job.run, "status": e.code(), "error": e.to_string()}));
                failure.get_or_insert(e.code());
            }
        }
    }
    let seed = run_seed(spec.base_seed, method, Variant::Base, jobs[0].point, 0);
    let wallclock = spec.record_wallclock.then_some(wall);
    if let Some(code) = failure {
        let s = SummaryStatistics {
            steps,
            ..SummaryStatistics::default()
        };
        return row_from_summary(method, n0, pump, &s, seed, code.into(), wallclock);
    }
    let mut s = aggregate(&base, method.has_step().then_some(coarse.as_slice()));
    s.steps = steps;
    s.wallclock_s = wall;
    row_from_summary(method, n0, pump, &s, seed, status_of(&s), wallclock)
}
