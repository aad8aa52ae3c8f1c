//! Poisson tau-leaping with a bounded expected fractional population change.
//!
//! The leap length keeps both the mean and the standard deviation of every
//! event's contribution below ε·x_i for each population x_i:
//!
//! τ = min over (i, j) with v_ij ≠ 0, a_j > 0 of
//!     min(ε·x_i / (|v_ij|·a_j), ε²·x_i² / (v_ij²·a_j)),
//!
//! with x_i replaced by max(x_i, 1) so empty populations keep τ finite.
//! Leaps that would drive a population outside [0, n0] are rejected and
//! retried with half the step; after `MAX_RETRIES` rejections one exact FRM
//! event is taken instead.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{EventTable, LaserParameters, PopulationState, DELTAS, NUM_EVENTS};
use crate::poisson::sample_poisson;
use crate::ssa::frm_step;
use crate::trajectory::{Observer, RunReport, StopReason};

pub const MAX_RETRIES: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauLeapConfig {
    pub epsilon: f64,
    pub t_end: f64,
    pub seed: u64,
    pub initial_state: PopulationState,
    pub max_steps: u64,
}

impl TauLeapConfig {
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
        if self.max_steps == 0 {
            return Err(Error::config("max_steps", "must be >= 1"));
        }
        if !self.initial_state.is_valid(n0) {
            return Err(Error::config(
                "initial_state",
                format!("{:?} violates 0 <= n_e <= {n0}", self.initial_state),
            ));
        }
        Ok(())
    }
}

/// Leap-length rule on real-valued populations with precomputed rates.
pub fn leap_bound(populations: [f64; 2], a: &[f64; NUM_EVENTS], epsilon: f64) -> Option<f64> {
    let mut tau = f64::INFINITY;
    let mut active = false;
    for (rate, (dp, de)) in a.iter().zip(DELTAS) {
        if *rate <= 0.0 {
            continue;
        }
        active = true;
        for (x, v) in populations.into_iter().zip([dp, de]) {
            if v == 0.0 {
                continue;
            }
            let x = x.max(1.0);
            let mean_bound = epsilon * x / (v.abs() * rate);
            let sd_bound = epsilon * epsilon * x * x / (v * v * rate);
            tau = tau.min(mean_bound).min(sd_bound);
        }
    }
    active.then_some(tau)
}

pub fn select_tau(state: &PopulationState, table: &EventTable, epsilon: f64) -> Result<f64> {
    let a = table.propensities(state);
    leap_bound([state.n_p as f64, state.n_e as f64], &a, epsilon)
        .ok_or(Error::AbsorbingState { t: state.t })
}

/// Fires Poisson(a_j τ) copies of every event at once. Returns `None` if the
/// candidate state leaves the physical region; the draws are discarded.
pub fn leap_step<R: Rng + ?Sized>(
    state: &PopulationState,
    table: &EventTable,
    tau: f64,
    rng: &mut R,
) -> Option<PopulationState> {
    let a = table.propensities(state);
    let mut n_p = state.n_p as i64;
    let mut n_e = state.n_e as i64;
    for (rate, (dp, de)) in a.iter().zip(DELTAS) {
        let k = sample_poisson(rate * tau, rng) as i64;
        n_p += dp as i64 * k;
        n_e += de as i64 * k;
    }
    (n_p >= 0 && n_e >= 0 && n_e <= table.n0_int as i64).then(|| PopulationState {
        n_p: n_p as u64,
        n_e: n_e as u32,
        t: state.t + tau,
    })
}

/// The leap map with every Poisson draw replaced by its mean. Used to check
/// that tau-leaping is consistent with the noiseless rate equations.
pub fn mean_leap(n_p: f64, n_e: f64, table: &EventTable, tau: f64) -> (f64, f64) {
    let (dp, de) = table.drift(n_p, n_e);
    (n_p + dp * tau, n_e + de * tau)
}

pub fn simulate_tau<R, O>(
    params: &LaserParameters,
    config: &TauLeapConfig,
    rng: &mut R,
    observer: &mut O,
) -> Result<RunReport>
where
    R: Rng + ?Sized,
    O: Observer + ?Sized,
{
    config.validate(params.n0)?;
    let table = EventTable::new(params)?;
    let mut state = config.initial_state;
    let mut steps = 0u64;
    let mut fallbacks = 0u64;

    let stop_reason = 'run: loop {
        if state.t >= config.t_end {
            break StopReason::TimeReached;
        }
        if steps >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let mut tau = match select_tau(&state, &table, config.epsilon) {
            Ok(tau) => tau.min(config.t_end - state.t),
            Err(Error::AbsorbingState { .. }) => break StopReason::Absorbing,
            Err(e) => return Err(e),
        };
        let (n_p, n_e) = (state.n_p as f64, state.n_e as f64);

        for _ in 0..MAX_RETRIES {
            if let Some(mut next) = leap_step(&state, &table, tau, rng) {
                observer.observe(state.t, n_p, n_e, tau);
                if config.t_end - next.t < 1e-12 * config.t_end {
                    next.t = config.t_end;
                }
                state = next;
                steps += 1;
                continue 'run;
            }
            tau *= 0.5;
        }

        // Repeated rejection: take one exact event instead.
        fallbacks += 1;
        let (event, tau) = frm_step(&state, &table, rng)?;
        if state.t + tau >= config.t_end {
            observer.observe(state.t, n_p, n_e, config.t_end - state.t);
            state.t = config.t_end;
            break StopReason::TimeReached;
        }
        observer.observe(state.t, n_p, n_e, tau);
        let t = state.t + tau;
        state = state
            .apply(event, params.n0)
            .expect("exact event stays physical");
        state.t = t;
        steps += 1;
    };

    Ok(RunReport {
        t_reached: state.t,
        steps,
        stop_reason,
        corrections: fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::Preset;
    use crate::trajectory::NullObserver;

    #[test]
    fn single_event_hand_value() {
        let a = [0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
        let tau = leap_bound([0.0, 100.0], &a, 0.01).unwrap();
        assert!((tau - 0.1).abs() < 1e-15);
    }

    #[test]
    fn halving_epsilon_halves_mean_limited_tau() {
        // With x = 100, a = 10 and ε ≤ 0.01 the mean bound is the smaller one
        // only once ε·x > 1; use a larger population to sit on that branch.
        let a = [0.0, 0.0, 0.0, 0.0, 0.0, 10.0];
        let t1 = leap_bound([0.0, 1e4], &a, 0.02).unwrap();
        let t2 = leap_bound([0.0, 1e4], &a, 0.01).unwrap();
        assert_eq!(t1, 0.02 * 1e4 / 10.0);
        assert!((t1 / t2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_population_guard_keeps_tau_finite() {
        let params = Preset::N0_1.parameters().with_pump(0.1);
        let table = EventTable::new(&params).unwrap();
        let state = PopulationState::new(0, 1);
        let tau = select_tau(&state, &table, 0.01).unwrap();
        let a_sp = table.propensities(&state)[1];
        assert!(tau.is_finite() && tau > 0.0);
        assert!((tau - 1e-4 / a_sp).abs() < 1e-15);
    }

    #[test]
    fn absorbing_state_has_no_tau() {
        let table = EventTable::new(&Preset::N0_1.parameters()).unwrap();
        assert!(matches!(
            select_tau(&PopulationState::new(0, 0), &table, 0.01),
            Err(Error::AbsorbingState { .. })
        ));
    }

    #[test]
    fn zero_mean_leap_leaves_state_unchanged() {
        let table = EventTable::new(&Preset::N0_1.parameters()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = PopulationState::new(0, 0);
        let next = leap_step(&state, &table, 0.5, &mut rng).unwrap();
        assert_eq!((next.n_p, next.n_e, next.t), (0, 0, 0.5));
    }

    #[test]
    fn pure_cavity_decay_removes_poisson_count() {
        let params = LaserParameters::new(0.0, 0.04, 0.0, 0.0, 1.0, 1).unwrap();
        let table = EventTable::new(&params).unwrap();
        // γc·n_p·τ = 10 removed photons on average.
        let tau = 10.0 / (0.04 * 1000.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let removed: Vec<f64> = (0..n)
            .map(|_| {
                let next =
                    leap_step(&PopulationState::new(1000, 0), &table, tau, &mut rng).unwrap();
                (1000 - next.n_p) as f64
            })
            .collect();
        let m = removed.iter().sum::<f64>() / n as f64;
        let v = removed.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((m - 10.0).abs() < 3.0 * (10.0 / n as f64).sqrt(), "{m}");
        assert!(
            (v - 10.0).abs() < 3.0 * ((10.0 + 200.0) / n as f64).sqrt(),
            "{v}"
        );
    }

    #[test]
    fn pump_off_empty_start_is_absorbing() {
        let params = Preset::N0_1.parameters();
        let config = TauLeapConfig {
            epsilon: 0.01,
            t_end: 10.0,
            seed: 0,
            initial_state: PopulationState::new(0, 0),
            max_steps: 100,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = simulate_tau(&params, &config, &mut rng, &mut NullObserver).unwrap();
        assert_eq!(report.stop_reason, StopReason::Absorbing);
        assert_eq!(report.t_reached, 0.0);
    }

    #[test]
    fn runs_end_exactly_at_t_end_and_stay_physical() {
        let params = Preset::N0_10.parameters().with_pump(2.0);
        let config = TauLeapConfig {
            epsilon: 0.03,
            t_end: 200.0,
            seed: 0,
            initial_state: PopulationState::new(100, 5),
            max_steps: u64::MAX,
        };
        struct Check(f64);
        impl Observer for Check {
            fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
                assert!(n_p >= 0.0 && (0.0..=10.0).contains(&n_e));
                assert!(dt > 0.0 && t >= self.0);
                self.0 = t + dt;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut check = Check(0.0);
        let report = simulate_tau(&params, &config, &mut rng, &mut check).unwrap();
        assert_eq!(report.stop_reason, StopReason::TimeReached);
        assert_eq!(report.t_reached, 200.0);
        assert!((check.0 - 200.0).abs() < 1e-9);
    }

    fn rk4(table: &EventTable, mut x: (f64, f64), t_end: f64) -> (f64, f64) {
        let dt = 1e-3;
        let f = |x: (f64, f64)| table.drift(x.0, x.1);
        for _ in 0..(t_end / dt).round() as usize {
            let k1 = f(x);
            let k2 = f((x.0 + 0.5 * dt * k1.0, x.1 + 0.5 * dt * k1.1));
            let k3 = f((x.0 + 0.5 * dt * k2.0, x.1 + 0.5 * dt * k2.1));
            let k4 = f((x.0 + dt * k3.0, x.1 + dt * k3.1));
            x.0 += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            x.1 += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        x
    }

    #[test]
    fn mean_leap_map_converges_to_rate_equations() {
        let params = Preset::N0_10.parameters().with_pump(1.0);
        let table = EventTable::new(&params).unwrap();
        let t_end = 20.0;
        let exact = rk4(&table, (2.0, 3.0), t_end);
        let mut errors = Vec::new();
        for eps in [0.04, 0.02, 0.01, 0.005] {
            let (mut x, mut t) = ((2.0, 3.0), 0.0);
            while t < t_end {
                let a = table.rates(x.0, x.1);
                let tau = leap_bound([x.0, x.1], &a, eps).unwrap().min(t_end - t);
                x = mean_leap(x.0, x.1, &table, tau);
                t += tau;
            }
            errors.push((x.0 - exact.0).abs() / exact.0);
        }
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        assert!(errors[3] < 1e-3, "{errors:?}");
    }
}
