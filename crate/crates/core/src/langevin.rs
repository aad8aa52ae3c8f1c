//! Euler–Maruyama integration of the Langevin rate equations.
//!
//! Each step adds drift·dt plus a Gaussian force with covariance 2D·dt.
//! The force can be built per event (six independent normals weighted by
//! √a_j, summed with the event's population change) or from a 2×2
//! factorization of 2D. Diffusion is either frozen at the deterministic
//! steady state (additive noise) or re-evaluated at the current state with a
//! Heun-type predictor–corrector. After the full step a negativity policy
//! pulls the populations back into 0 ≤ n_p, 0 ≤ n_e ≤ n0.
//!
//! Clamping or reflecting skews the noise whenever populations are small, so
//! this integrator is only trustworthy far above threshold.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    deterministic_steady_state, ContinuousState, Diffusion, EventTable, LaserParameters, DELTAS,
    NUM_EVENTS,
};
use crate::smallsignal::linearize;
use crate::trajectory::{Observer, RunReport, StopReason};

/// Simulated time in units of 1/ω_R.
pub const DEFAULT_DURATION_OMEGA_R: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativityPolicy {
    /// n_p ← max(0, n_p), n_e ← min(n0, max(0, n_e)).
    #[default]
    Clamp,
    /// n_p ← |n_p|, n_e ← min(n0, |n_e|).
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionMode {
    #[default]
    FrozenAtSteadyState,
    StateDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConstruction {
    #[default]
    PerEvent,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinConfig {
    pub epsilon: f64,
    pub t_end: f64,
    pub seed: u64,
    pub initial_state: ContinuousState,
    pub negativity_policy: NegativityPolicy,
    pub diffusion_mode: DiffusionMode,
    pub noise_construction: NoiseConstruction,
    /// Multiplies the selected step; 2.0 gives the coarse runs used for the
    /// step-size error estimate.
    pub dt_scale: f64,
    pub max_steps: u64,
}

impl LangevinConfig {
    pub fn validate(&self, n0: u32) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(
                "epsilon",
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::config(
                "t_end",
                format!("must be > 0, got {}", self.t_end),
            ));
        }
        if !(self.dt_scale > 0.0) {
            return Err(Error::config("dt_scale", "must be > 0"));
        }
        let s = self.initial_state;
        if !(s.n_p >= 0.0 && s.n_e >= 0.0 && s.n_e <= n0 as f64) {
            return Err(Error::config(
                "initial_state",
                format!("{s:?} outside 0 <= n_p, 0 <= n_e <= {n0}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtSelection {
    pub dt: f64,
    /// The steady state had a vanishing population or diffusion constant and
    /// dt = ε/Γ was used instead.
    pub fallback: bool,
}

/// dt = min(ε²·n̄_p/(2D̄_aa), ε²·n̄_e/(2D̄_ee)) at the deterministic steady
/// state.
pub fn select_dt(params: &LaserParameters, epsilon: f64) -> Result<DtSelection> {
    let table = EventTable::new(params)?;
    let (n_p, n_e) = deterministic_steady_state(params)?;
    let d = table.diffusion(n_p, n_e);
    if n_p > 0.0 && n_e > 0.0 && d.aa > 0.0 && d.ee > 0.0 {
        let eps2 = epsilon * epsilon;
        let dt = (eps2 * n_p / (2.0 * d.aa)).min(eps2 * n_e / (2.0 * d.ee));
        return Ok(DtSelection {
            dt,
            fallback: false,
        });
    }
    let sol = linearize(params)?;
    let rate = if sol.gamma_total > 0.0 {
        sol.gamma_total
    } else {
        params.gamma_c + params.gamma_a + params.gamma_p + table.gamma_r
    };
    Ok(DtSelection {
        dt: epsilon / rate,
        fallback: true,
    })
}

/// 5000/ω_R, or 5000/Γ when the linearization has no oscillation frequency.
pub fn default_t_end(params: &LaserParameters) -> Result<f64> {
    let sol = linearize(params)?;
    let rate = if sol.omega_r_sq > 0.0 {
        sol.omega_r()
    } else {
        sol.gamma_total.max(params.gamma_c)
    };
    Ok(DEFAULT_DURATION_OMEGA_R / rate)
}

/// Lower-triangular L with L·Lᵀ = 2D.
pub fn covariance_factor(d: &Diffusion) -> [[f64; 2]; 2] {
    let (s_aa, s_ae, s_ee) = (2.0 * d.aa, 2.0 * d.ae, 2.0 * d.ee);
    if s_aa > 0.0 {
        let l00 = s_aa.sqrt();
        let l10 = s_ae / l00;
        let l11 = (s_ee - l10 * l10).max(0.0).sqrt();
        [[l00, 0.0], [l10, l11]]
    } else {
        // PSD with a zero diagonal entry forces the off-diagonal to vanish.
        [[0.0, 0.0], [0.0, s_ee.max(0.0).sqrt()]]
    }
}

/// How the stochastic force is produced at each step.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    mode: DiffusionMode,
    construction: NoiseConstruction,
    frozen_sqrt_rates: [f64; NUM_EVENTS],
    frozen_factor: [[f64; 2]; 2],
}

impl NoiseModel {
    pub fn new(
        params: &LaserParameters,
        mode: DiffusionMode,
        construction: NoiseConstruction,
    ) -> Result<Self> {
        let table = EventTable::new(params)?;
        let (n_p, n_e) = match mode {
            DiffusionMode::FrozenAtSteadyState => deterministic_steady_state(params)?,
            DiffusionMode::StateDependent => (0.0, 0.0),
        };
        Ok(Self {
            mode,
            construction,
            frozen_sqrt_rates: table.rates(n_p, n_e).map(|a| a.max(0.0).sqrt()),
            frozen_factor: covariance_factor(&table.diffusion(n_p, n_e)),
        })
    }

    /// Noise model with a fixed per-event intensity, bypassing the steady
    /// state. Zero rates give a noiseless integrator.
    pub fn frozen(rates: [f64; NUM_EVENTS], construction: NoiseConstruction) -> Self {
        let mut d = Diffusion {
            aa: 0.0,
            ae: 0.0,
            ee: 0.0,
        };
        for (a, (dp, de)) in rates.iter().zip(DELTAS) {
            d.aa += 0.5 * dp * dp * a;
            d.ae += 0.5 * dp * de * a;
            d.ee += 0.5 * de * de * a;
        }
        Self {
            mode: DiffusionMode::FrozenAtSteadyState,
            construction,
            frozen_sqrt_rates: rates.map(|a| a.max(0.0).sqrt()),
            frozen_factor: covariance_factor(&d),
        }
    }

    fn draws<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; NUM_EVENTS] {
        let mut g = [0.0; NUM_EVENTS];
        let n = match self.construction {
            NoiseConstruction::PerEvent => NUM_EVENTS,
            NoiseConstruction::Covariance => 2,
        };
        for x in g.iter_mut().take(n) {
            *x = rng.sample(StandardNormal);
        }
        g
    }

    /// Force with unit time scaling from normals `g` and the rates it is
    /// built from.
    fn force(&self, table: &EventTable, n_p: f64, n_e: f64, g: &[f64; NUM_EVENTS]) -> (f64, f64) {
        match (self.mode, self.construction) {
            (DiffusionMode::FrozenAtSteadyState, NoiseConstruction::PerEvent) => {
                per_event_force(&self.frozen_sqrt_rates, g)
            }
            (DiffusionMode::FrozenAtSteadyState, NoiseConstruction::Covariance) => {
                factor_force(&self.frozen_factor, g)
            }
            (DiffusionMode::StateDependent, NoiseConstruction::PerEvent) => {
                let sqrt_rates = table
                    .rates(n_p.max(0.0), n_e.clamp(0.0, table.n0))
                    .map(|a| a.max(0.0).sqrt());
                per_event_force(&sqrt_rates, g)
            }
            (DiffusionMode::StateDependent, NoiseConstruction::Covariance) => {
                let d = table.diffusion(n_p.max(0.0), n_e.clamp(0.0, table.n0));
                factor_force(&covariance_factor(&d), g)
            }
        }
    }
}

#[inline]
fn per_event_force(sqrt_rates: &[f64; NUM_EVENTS], g: &[f64; NUM_EVENTS]) -> (f64, f64) {
    let mut f = (0.0, 0.0);
    for ((s, gj), (dp, de)) in sqrt_rates.iter().zip(g).zip(DELTAS) {
        f.0 += dp * s * gj;
        f.1 += de * s * gj;
    }
    f
}

#[inline]
fn factor_force(l: &[[f64; 2]; 2], g: &[f64; NUM_EVENTS]) -> (f64, f64) {
    (l[0][0] * g[0], l[1][0] * g[0] + l[1][1] * g[1])
}

/// The unconstrained Euler–Maruyama (or Euler–Heun) increment.
pub fn raw_increment<R: Rng + ?Sized>(
    state: &ContinuousState,
    table: &EventTable,
    dt: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> (f64, f64) {
    let (fp, fe) = table.drift(state.n_p, state.n_e);
    let g = noise.draws(rng);
    let sqrt_dt = dt.sqrt();
    let (np0, ne0) = noise.force(table, state.n_p, state.n_e, &g);
    let (np, ne) = match noise.mode {
        DiffusionMode::FrozenAtSteadyState => (np0, ne0),
        DiffusionMode::StateDependent => {
            let pred_p = state.n_p + fp * dt + np0 * sqrt_dt;
            let pred_e = state.n_e + fe * dt + ne0 * sqrt_dt;
            let (np1, ne1) = noise.force(table, pred_p, pred_e, &g);
            (0.5 * (np0 + np1), 0.5 * (ne0 + ne1))
        }
    };
    (fp * dt + np * sqrt_dt, fe * dt + ne * sqrt_dt)
}

pub fn apply_policy(n_p: f64, n_e: f64, n0: f64, policy: NegativityPolicy) -> (f64, f64) {
    match policy {
        NegativityPolicy::Clamp => (n_p.max(0.0), n_e.clamp(0.0, n0)),
        NegativityPolicy::Reflect => (n_p.abs(), n_e.abs().min(n0)),
    }
}

/// One step followed by the negativity policy.
pub fn langevin_step<R: Rng + ?Sized>(
    state: &ContinuousState,
    table: &EventTable,
    dt: f64,
    noise: &NoiseModel,
    policy: NegativityPolicy,
    rng: &mut R,
) -> Result<ContinuousState> {
    let (dp, de) = raw_increment(state, table, dt, noise, rng);
    let (n_p, n_e) = (state.n_p + dp, state.n_e + de);
    if !(n_p.is_finite() && n_e.is_finite()) {
        return Err(Error::NonFiniteState {
            t: state.t,
            n_p,
            n_e,
        });
    }
    let (n_p, n_e) = apply_policy(n_p, n_e, table.n0, policy);
    Ok(ContinuousState {
        n_p,
        n_e,
        t: state.t + dt,
    })
}

pub fn simulate_langevin<R, O>(
    params: &LaserParameters,
    config: &LangevinConfig,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunReport>
where
    R: Rng + ?Sized,
    O: Observer + ?Sized,
{
    config.validate(params.n0)?;
    let noise = NoiseModel::new(params, config.diffusion_mode, config.noise_construction)?;
    let dt = select_dt(params, config.epsilon)?.dt * config.dt_scale;
    run_fixed_step(params, config, dt, &noise, rng, observer)
}

/// Fixed-step loop over [t0, t_end] with an explicit step and noise model.
pub fn run_fixed_step<R, O>(
    params: &LaserParameters,
    config: &LangevinConfig,
    dt: f64,
    noise: &NoiseModel,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunReport>
where
    R: Rng + ?Sized,
    O: Observer + ?Sized,
{
    let table = EventTable::new(params)?;
    let mut state = config.initial_state;
    let mut steps = 0u64;
    let mut corrections = 0u64;
    let stop_reason = loop {
        let remaining = config.t_end - state.t;
        if remaining <= 1e-12 * config.t_end {
            break StopReason::TimeReached;
        }
        if steps >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let h = dt.min(remaining);
        let (dp, de) = raw_increment(&state, &table, h, noise, rng);
        let (raw_p, raw_e) = (state.n_p + dp, state.n_e + de);
        if !(raw_p.is_finite() && raw_e.is_finite()) {
            return Err(Error::NonFiniteState {
                t: state.t,
                n_p: raw_p,
                n_e: raw_e,
            });
        }
        let (n_p, n_e) = apply_policy(raw_p, raw_e, table.n0, config.negativity_policy);
        if n_p != raw_p || n_e != raw_e {
            corrections += 1;
        }
        observer.observe(state.t, state.n_p, state.n_e, h);
        state = ContinuousState {
            n_p,
            n_e,
            t: state.t + h,
        };
        steps += 1;
    };
    Ok(RunReport {
        t_reached: state.t,
        steps,
        stop_reason,
        corrections,
    })
}
