//! Exact sampling of the laser Markov chain with Gillespie's First Reaction
//! Method.
//!
//! Each step draws one uniform r_j ∈ (0, 1) per event with a_j > 0, in the
//! fixed event order, and converts it to a waiting time τ_j = ln(1/r_j)/a_j.
//! The event with the smallest τ_j fires; ties go to the lowest index.

use rand::Rng;
use rand_distr::Open01;

use crate::error::{Error, Result};
use crate::model::{Event, EventTable, LaserParameters, PopulationState, NUM_EVENTS};
use crate::trajectory::{Observer, RunReport, StopReason};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsaConfig {
    pub t_end: f64,
    pub max_steps: u64,
    pub seed: u64,
    pub initial_state: PopulationState,
}

impl SsaConfig {
    pub fn validate(&self, n0: u32) -> Result<()> {
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

/// Picks the first event given propensities and a source of open-interval
/// uniforms. Consumes exactly one uniform per active event.
pub fn first_reaction(
    a: &[f64; NUM_EVENTS],
    mut uniform: impl FnMut() -> f64,
) -> Option<(Event, f64)> {
    let mut best: Option<(Event, f64)> = None;
    for (event, &rate) in Event::ALL.iter().zip(a) {
        if rate <= 0.0 {
            continue;
        }
        let r: f64 = uniform();
        let tau = (1.0 / r).ln() / rate;
        if best.is_none_or(|(_, t)| tau < t) {
            best = Some((*event, tau));
        }
    }
    best
}

/// One First Reaction Method draw at `state`.
pub fn frm_step<R: Rng + ?Sized>(
    state: &PopulationState,
    table: &EventTable,
    rng: &mut R,
) -> Result<(Event, f64)> {
    let a = table.propensities(state);
    first_reaction(&a, || rng.sample(Open01)).ok_or(Error::AbsorbingState { t: state.t })
}

/// Runs one exact trajectory from `config.initial_state` until `t_end`,
/// `max_steps` events or an absorbing state.
pub fn simulate_ssa<R, O>(
    params: &LaserParameters,
    config: &SsaConfig,
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

    let stop_reason = loop {
        if state.t >= config.t_end {
            break StopReason::TimeReached;
        }
        if steps >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let (event, tau) = match frm_step(&state, &table, rng) {
            Ok(draw) => draw,
            Err(Error::AbsorbingState { .. }) => break StopReason::Absorbing,
            Err(e) => return Err(e),
        };
        let (n_p, n_e) = (state.n_p as f64, state.n_e as f64);
        if state.t + tau >= config.t_end {
            observer.observe(state.t, n_p, n_e, config.t_end - state.t);
            state.t = config.t_end;
            break StopReason::TimeReached;
        }
        observer.observe(state.t, n_p, n_e, tau);
        let t = state.t + tau;
        state = state
            .apply(event, params.n0)
            .expect("event with positive propensity keeps the state physical");
        state.t = t;
        steps += 1;
    };

    Ok(RunReport {
        t_reached: state.t,
        steps,
        stop_reason,
        corrections: 0,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::Preset;
    use crate::trajectory::{NullObserver, TrajectoryRecorder};

    #[test]
    fn single_rate_inverse_cdf() {
        let a = [0.0, 0.0, 0.0, 2.0, 0.0, 0.0];
        let (event, tau) = first_reaction(&a, || (-2.0f64).exp()).unwrap();
        assert_eq!(event, Event::CavityDecay);
        assert!((tau - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let a = [0.0, 1.0, 0.0, 1.0, 3.0, 0.0];
        let (event, tau) = first_reaction(&a, || 1.0).unwrap();
        assert_eq!(tau, 0.0);
        assert_eq!(event, Event::SpontaneousEmission);
    }

    #[test]
    fn one_uniform_per_active_event() {
        let a = [0.5, 0.0, 1.0, 0.0, 2.0, 0.0];
        let mut used = 0;
        first_reaction(&a, || {
            used += 1;
            0.5
        });
        assert_eq!(used, 3);
    }

    #[test]
    fn no_active_events_is_absorbing() {
        let params = Preset::N0_1.parameters();
        let table = EventTable::new(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = frm_step(&PopulationState::new(0, 0), &table, &mut rng).unwrap_err();
        assert!(matches!(err, Error::AbsorbingState { .. }));
    }

    #[test]
    fn event_frequencies_follow_propensities() {
        let a = [0.3, 0.1, 0.25, 0.05, 0.2, 0.1];
        let total: f64 = a.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mut counts = [0u64; NUM_EVENTS];
        for _ in 0..n {
            let (event, _) = first_reaction(&a, || rng.sample(Open01)).unwrap();
            counts[event.index()] += 1;
        }
        for j in 0..NUM_EVENTS {
            let p = a[j] / total;
            let se = (n as f64 * p * (1.0 - p)).sqrt();
            let dev = (counts[j] as f64 - n as f64 * p).abs();
            assert!(
                dev < 3.0 * se,
                "event {j}: {} vs {}",
                counts[j],
                n as f64 * p
            );
        }
    }

    #[test]
    fn pump_off_empty_start_is_absorbing() {
        let params = Preset::N0_1.parameters();
        let config = SsaConfig {
            t_end: 100.0,
            max_steps: 10,
            seed: 0,
            initial_state: PopulationState::new(0, 0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = simulate_ssa(&params, &config, &mut rng, &mut NullObserver).unwrap();
        assert_eq!(report.stop_reason, StopReason::Absorbing);
        assert_eq!(report.t_reached, 0.0);
        assert_eq!(report.steps, 0);
    }

    #[test]
    fn pure_cavity_decay_first_passage() {
        // With g = 0 only cavity decay is active: the chain is a pure death process
        // with rates γc·k, so the mean time to empty is Σ 1/(γc k).
        let params = LaserParameters::new(0.0, 0.04, 0.0, 0.0, 1.0, 1).unwrap();
        let expected: f64 = (1..=5).map(|k| 1.0 / (0.04 * k as f64)).sum();
        let var: f64 = (1..=5).map(|k| (1.0 / (0.04 * k as f64)).powi(2)).sum();
        let runs = 4000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut total = 0.0;
        for _ in 0..runs {
            let config = SsaConfig {
                t_end: 1e9,
                max_steps: 100,
                seed: 0,
                initial_state: PopulationState::new(5, 0),
            };
            let mut rec = TrajectoryRecorder::new(1);
            let report = simulate_ssa(&params, &config, &mut rng, &mut rec).unwrap();
            assert_eq!(report.stop_reason, StopReason::Absorbing);
            let pts = rec.into_points();
            assert!(pts.windows(2).all(|w| w[1].n_p <= w[0].n_p));
            total += report.t_reached;
        }
        let mean = total / runs as f64;
        let se = (var / runs as f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "{mean} vs {expected} ± {se}"
        );
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let params = Preset::N0_10.parameters().with_pump(1.0);
        let config = SsaConfig {
            t_end: 50.0,
            max_steps: u64::MAX,
            seed: 3,
            initial_state: PopulationState::new(10, 5),
        };
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut rec = TrajectoryRecorder::new(1);
            simulate_ssa(&params, &config, &mut rng, &mut rec).unwrap();
            rec.into_points()
        };
        let (a, b) = (run(), run());
        assert!(a.len() > 100);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.n_e <= 10.0 && p.n_p >= 0.0));
        assert!(a.windows(2).all(|w| w[1].t >= w[0].t));
    }

    #[test]
    fn max_steps_stops_the_run() {
        let params = Preset::N0_10.parameters().with_pump(1.0);
        let config = SsaConfig {
            t_end: 1e9,
            max_steps: 25,
            seed: 0,
            initial_state: PopulationState::new(0, 0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = simulate_ssa(&params, &config, &mut rng, &mut NullObserver).unwrap();
        assert_eq!(report.steps, 25);
        assert_eq!(report.stop_reason, StopReason::MaxSteps);
    }
}
