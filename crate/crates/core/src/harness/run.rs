use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Method, Variant};
use crate::error::{Error, Result};
use crate::langevin::{self, DiffusionMode, LangevinConfig, NegativityPolicy, NoiseConstruction};
use crate::model::{
    deterministic_steady_state, ContinuousState, EventTable, LaserParameters, PopulationState,
};
use crate::oracle::OracleConfig;
use crate::smallsignal::linearize;
use crate::ssa::{simulate_ssa, SsaConfig};
use crate::stats::{
    summarize, time_average, MomentAccumulator, RunStatistics, DEFAULT_BURN_IN_FRACTION,
};
use crate::tauleap::{select_tau, simulate_tau, TauLeapConfig};
use crate::trajectory::{Observer, RunReport};

/// Per-method knobs shared by sweeps and benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub max_steps: u64,
    pub burn_in_fraction: f64,
    /// Langevin duration in units of 1/ω_R.
    pub langevin_factor: f64,
    /// Markov-chain duration in units of the Langevin duration.
    pub markov_factor: f64,
    /// Fixed simulated time for every stochastic method, overriding the
    /// factors above.
    pub t_end: Option<f64>,
    pub tauleap_epsilon: f64,
    pub langevin_epsilon: f64,
    pub negativity_policy: NegativityPolicy,
    pub diffusion_mode: DiffusionMode,
    pub noise_construction: NoiseConstruction,
    pub oracle_tail_tolerance: f64,
    pub oracle_max_states: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            max_steps: super::DEFAULT_MAX_STEPS,
            burn_in_fraction: DEFAULT_BURN_IN_FRACTION,
            langevin_factor: langevin::DEFAULT_DURATION_OMEGA_R,
            markov_factor: 100.0,
            t_end: None,
            tauleap_epsilon: 0.01,
            langevin_epsilon: 0.01,
            negativity_policy: NegativityPolicy::Clamp,
            diffusion_mode: DiffusionMode::FrozenAtSteadyState,
            noise_construction: NoiseConstruction::PerEvent,
            oracle_tail_tolerance: 1e-8,
            oracle_max_states: 1 << 20,
        }
    }
}

impl SimulationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::config("max_steps", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::config(
                "burn_in_fraction",
                format!("must lie in [0, 1), got {}", self.burn_in_fraction),
            ));
        }
        for (key, v) in [
            ("langevin_factor", self.langevin_factor),
            ("markov_factor", self.markov_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be > 0, got {v}")));
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("t_end", format!("must be > 0, got {t}")));
            }
        }
        // The doubled-step runs use 2ε, which must remain a valid ε.
        for (key, eps) in [
            ("tauleap.epsilon", self.tauleap_epsilon),
            ("langevin.epsilon", self.langevin_epsilon),
        ] {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::config(
                    key,
                    format!("must lie in (0, 0.5), got {eps}"),
                ));
            }
        }
        if !(self.oracle_tail_tolerance > 0.0 && self.oracle_tail_tolerance < 1.0) {
            return Err(Error::config("oracle.tail_tolerance", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            tail_tolerance: self.oracle_tail_tolerance,
            max_states: self.oracle_max_states,
            ..OracleConfig::default()
        }
    }
}

/// Simulated time, burn-in and step cap of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub t_end: f64,
    pub burn_in: f64,
    pub max_steps: u64,
}

/// `factor`/ω_R, with Γ standing in when the linearization has no
/// oscillation frequency.
pub fn langevin_duration(params: &LaserParameters, factor: f64) -> Result<f64> {
    let sol = linearize(params)?;
    let rate = if sol.omega_r_sq > 0.0 && sol.omega_r_sq.is_finite() {
        sol.omega_r()
    } else {
        sol.gamma_total.max(params.gamma_c)
    };
    Ok(factor / rate)
}

fn initial_population(params: &LaserParameters) -> Result<PopulationState> {
    let (n_p, n_e) = deterministic_steady_state(params)?;
    Ok(PopulationState::rounded(n_p, n_e, params.n0))
}

/// Expected simulated time per step at the steady state. Infinite when the
/// steady state is absorbing.
pub fn estimated_step_time(
    method: Method,
    params: &LaserParameters,
    settings: &SimulationSettings,
    variant: Variant,
) -> Result<f64> {
    let scale = if variant == Variant::Coarse { 2.0 } else { 1.0 };
    match method {
        Method::Ssa => {
            let table = EventTable::new(params)?;
            let total: f64 = table
                .propensities(&initial_population(params)?)
                .iter()
                .sum();
            Ok(if total > 0.0 {
                1.0 / total
            } else {
                f64::INFINITY
            })
        }
        Method::Tauleap => {
            let table = EventTable::new(params)?;
            match select_tau(
                &initial_population(params)?,
                &table,
                settings.tauleap_epsilon * scale,
            ) {
                Ok(tau) => Ok(tau),
                Err(Error::AbsorbingState { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        }
        Method::Langevin => Ok(langevin::select_dt(params, settings.langevin_epsilon)?.dt * scale),
        Method::Oracle | Method::Smallsignal => Err(Error::config(
            "method",
            format!("{method} is not a simulation method"),
        )),
    }
}

impl RunPlan {
    /// Duration from the relaxation-frequency rule (or the explicit
    /// `t_end`), shortened so that `max_steps` steps of the expected size
    /// cover it.
    pub fn for_method(
        method: Method,
        params: &LaserParameters,
        settings: &SimulationSettings,
    ) -> Result<Self> {
        let nominal = match settings.t_end {
            Some(t) => t,
            None => {
                let t_l = langevin_duration(params, settings.langevin_factor)?;
                if method == Method::Langevin {
                    t_l
                } else {
                    settings.markov_factor * t_l
                }
            }
        };
        let cap = settings.max_steps as f64
            * estimated_step_time(method, params, settings, Variant::Base)?;
        let t_end = if cap.is_finite() {
            nominal.min(cap)
        } else {
            nominal
        };
        Ok(Self {
            t_end,
            burn_in: settings.burn_in_fraction * t_end,
            max_steps: settings.max_steps,
        })
    }

    /// A plan limited only by the step count; `t_end` is the time those
    /// steps are expected to cover.
    pub fn for_steps(
        method: Method,
        params: &LaserParameters,
        settings: &SimulationSettings,
        steps: u64,
    ) -> Result<Self> {
        let expected = steps as f64 * estimated_step_time(method, params, settings, Variant::Base)?;
        let expected = if expected.is_finite() {
            expected
        } else {
            1e300
        };
        Ok(Self {
            t_end: 1e300,
            burn_in: settings.burn_in_fraction * expected,
            max_steps: steps.max(1),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub stats: RunStatistics,
    pub report: RunReport,
    pub wallclock_s: f64,
}

/// Simulates one trajectory and reduces it to statistics. `extra` sees
/// every observation as well (pass `&mut NullObserver` when unused).
pub fn run_single<O: Observer + ?Sized>(
    method: Method,
    params: &LaserParameters,
    settings: &SimulationSettings,
    plan: &RunPlan,
    variant: Variant,
    seed: u64,
    extra: &mut O,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = MomentAccumulator::new(plan.burn_in);
    let mut observer = (&mut acc, extra);
    let coarse = variant == Variant::Coarse;
    let report = match method {
        Method::Ssa => {
            let config = SsaConfig {
                t_end: plan.t_end,
                max_steps: plan.max_steps,
                seed,
                initial_state: initial_population(params)?,
            };
            simulate_ssa(params, &config, &mut rng, &mut observer)?
        }
        Method::Tauleap => {
            let config = TauLeapConfig {
                epsilon: settings.tauleap_epsilon * if coarse { 2.0 } else { 1.0 },
                t_end: plan.t_end,
                seed,
                initial_state: initial_population(params)?,
                max_steps: plan.max_steps,
            };
            simulate_tau(params, &config, &mut rng, &mut observer)?
        }
        Method::Langevin => {
            let (n_p, n_e) = deterministic_steady_state(params)?;
            let config = LangevinConfig {
                epsilon: settings.langevin_epsilon,
                t_end: plan.t_end,
                seed,
                initial_state: ContinuousState::new(n_p, n_e),
                negativity_policy: settings.negativity_policy,
                diffusion_mode: settings.diffusion_mode,
                noise_construction: settings.noise_construction,
                dt_scale: if coarse { 2.0 } else { 1.0 },
                max_steps: plan.max_steps,
            };
            langevin::simulate_langevin(params, &config, &mut rng, &mut observer)?
        }
        Method::Oracle | Method::Smallsignal => {
            return Err(Error::config(
                "method",
                format!("{method} is not a simulation method"),
            ));
        }
    };
    let stats = summarize(&time_average(&acc)?);
    Ok(RunOutcome {
        stats,
        report,
        wallclock_s: start.elapsed().as_secs_f64(),
    })
}
