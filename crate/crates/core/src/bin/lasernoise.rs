use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lasernoise::harness::{
    self, load_config_file, run_benchmark, run_single, run_sweep, write_distribution,
    write_results, write_sidecar, write_trajectory, Method, RawConfig, ResultRow, RunPlan, Sidecar,
    Variant,
};
use lasernoise::langevin::{DiffusionMode, NegativityPolicy};
use lasernoise::oracle::steady_state;
use lasernoise::trajectory::TrajectoryRecorder;
use lasernoise::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lasernoise",
    version,
    about = "Photon statistics of the laser Markov chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the pump rate and compare methods.
    Sweep(Common),
    /// Relative error versus wall-clock budget at one pump rate.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated budgets in seconds per run.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<f64>>,
        /// oracle or smallsignal.
        #[arg(long)]
        truth: Option<String>,
    },
    /// Exact master-equation statistics over the pump grid, or at one pump.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also write the full distribution (requires --pump).
        #[arg(long)]
        distribution: Option<PathBuf>,
    },
    /// Write one trajectory as t,n_p,n_e rows.
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// Record every k-th state.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated list of ssa, tauleap, langevin, smallsignal, oracle.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<String>>,
    #[arg(long)]
    pump_min: Option<f64>,
    #[arg(long)]
    pump_max: Option<f64>,
    #[arg(long)]
    pump_points: Option<usize>,
    /// Single pump rate (bench, trajectory, oracle).
    #[arg(long)]
    pump: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Accuracy parameter of tau-leaping and Langevin.
    #[arg(long)]
    epsilon: Option<f64>,
    /// clamp or reflect.
    #[arg(long)]
    negativity_policy: Option<String>,
    /// frozen_at_steady_state or state_dependent.
    #[arg(long)]
    diffusion_mode: Option<String>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// Simulated time (ps) of every stochastic run.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    gamma_c: Option<f64>,
    #[arg(long = "gamma-a")]
    gamma_a: Option<f64>,
    #[arg(long = "gamma-d")]
    gamma_d: Option<f64>,
    #[arg(long)]
    n0: Option<u32>,
    /// Fill the wallclock_s column of sweep output.
    #[arg(long)]
    record_wallclock: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

fn parse_enum<T: serde::de::DeserializeOwned>(key: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string())).map_err(|_| {
        Error::Config {
            key: key.to_string(),
            message: format!("invalid value `{value}`"),
        }
    })
}

impl Common {
    fn flags(&self) -> Result<RawConfig> {
        let mut raw = RawConfig {
            preset: self.preset.clone(),
            ..RawConfig::default()
        };
        raw.laser.g = self.g;
        raw.laser.gamma_c = self.gamma_c;
        raw.laser.gamma_a = self.gamma_a;
        raw.laser.gamma_d = self.gamma_d;
        raw.laser.gamma_p = self.pump;
        raw.laser.n0 = self.n0;
        if let Some(list) = &self.method {
            raw.sweep.methods = Some(
                list.iter()
                    .map(|m| m.trim().parse())
                    .collect::<Result<_>>()?,
            );
        }
        raw.sweep.pump_min = self.pump_min;
        raw.sweep.pump_max = self.pump_max;
        raw.sweep.pump_points = self.pump_points;
        raw.sweep.runs = self.runs;
        raw.sweep.seed = self.seed;
        raw.sweep.max_steps = self.max_steps;
        raw.sweep.t_end = self.t_end;
        raw.sweep.record_wallclock = self.record_wallclock.then_some(true);
        raw.tauleap.epsilon = self.epsilon;
        raw.langevin.epsilon = self.epsilon;
        if let Some(p) = &self.negativity_policy {
            raw.langevin.negativity_policy =
                Some(parse_enum::<NegativityPolicy>("negativity_policy", p)?);
        }
        if let Some(d) = &self.diffusion_mode {
            raw.langevin.diffusion_mode = Some(parse_enum::<DiffusionMode>("diffusion_mode", d)?);
        }
        Ok(raw)
    }

    /// Preset < file < flags.
    fn resolve(&self) -> Result<RawConfig> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RawConfig::default(),
        };
        Ok(file.overlay(self.flags()?))
    }
}

fn emit(out: Option<&Path>, rows: &[ResultRow], sidecar: &Sidecar, quiet: bool) -> Result<()> {
    match out {
        Some(path) => {
            write_results(path, rows)?;
            let meta = write_sidecar(path, sidecar)?;
            if !quiet {
                eprintln!("wrote {} and {}", path.display(), meta.display());
            }
        }
        None => {
            let bytes = harness::results_to_bytes(rows);
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

fn outcome(rows: &[ResultRow]) -> ExitCode {
    if !rows.is_empty() && rows.iter().all(|r| !r.is_ok()) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(c) => {
            let spec = c.resolve()?.sweep_spec()?;
            let out = run_sweep(&spec, c.threads, !c.quiet)?;
            emit(c.out.as_deref(), &out.rows, &out.sidecar, c.quiet)?;
            Ok(outcome(&out.rows))
        }
        Command::Bench {
            common: c,
            budgets,
            truth,
        } => {
            let mut raw = c.resolve()?;
            if budgets.is_some() {
                raw.bench.budgets = budgets;
            }
            if let Some(t) = truth {
                raw.bench.truth = Some(parse_enum("truth", &t)?);
            }
            let spec = raw.bench_spec()?;
            let out = run_benchmark(&spec, c.threads, !c.quiet)?;
            emit(c.out.as_deref(), &out.rows, &out.sidecar, c.quiet)?;
            Ok(outcome(&out.rows))
        }
        Command::Oracle {
            common: c,
            distribution,
        } => {
            let mut raw = c.resolve()?;
            raw.sweep.methods = Some(vec![Method::Oracle]);
            if let Some(p) = raw.laser.gamma_p {
                raw.sweep.pump_grid = Some(vec![p]);
            }
            let spec = raw.sweep_spec()?;
            if let Some(path) = distribution {
                if spec.pump_grid.len() != 1 {
                    return Err(Error::Config {
                        key: "distribution".into(),
                        message: "requires a single --pump".into(),
                    });
                }
                let dist = steady_state(
                    &spec.params.with_pump(spec.pump_grid[0]),
                    &spec.settings.oracle_config(),
                )?;
                write_distribution(&path, &dist)?;
            }
            let out = run_sweep(&spec, c.threads, !c.quiet)?;
            emit(c.out.as_deref(), &out.rows, &out.sidecar, c.quiet)?;
            Ok(outcome(&out.rows))
        }
        Command::Trajectory { common: c, stride } => {
            let raw = c.resolve()?;
            let params = raw.bench_spec()?.params;
            let settings = raw.settings()?;
            let method = match raw.sweep.methods.as_deref() {
                None => Method::Ssa,
                Some([m]) if m.is_stochastic() => *m,
                Some(_) => {
                    return Err(Error::Config {
                        key: "method".into(),
                        message: "trajectory takes exactly one of ssa, tauleap, langevin".into(),
                    })
                }
            };
            let mut plan = RunPlan::for_method(method, &params, &settings)?;
            if settings.t_end.is_none() {
                // A full-length run is rarely what one wants to look at.
                plan.t_end = harness::langevin_duration(&params, 50.0)?;
                plan.burn_in = 0.0;
            }
            let mut rec = TrajectoryRecorder::new(stride);
            let seed = raw.sweep.seed.unwrap_or(0);
            run_single(
                method,
                &params,
                &settings,
                &plan,
                Variant::Base,
                seed,
                &mut rec,
            )?;
            let points = rec.into_points();
            match &c.out {
                Some(path) => write_trajectory(path, &points)?,
                None => {
                    let mut s = String::from("t,n_p,n_e\n");
                    for p in &points {
                        s.push_str(&format!("{:?},{:?},{:?}\n", p.t, p.n_p, p.n_e));
                    }
                    print!("{s}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
