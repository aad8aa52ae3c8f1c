//! Observers that consume a simulation as a sequence of held states.

use serde::{Deserialize, Serialize};

/// Receives each state together with the time it was held.
///
/// `t` is the time at which the state was entered and `dt` how long it
/// persisted, so time averages are Σ X(t_i)·dt_i / Σ dt_i.
pub trait Observer {
    fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64);
}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
        (**self).observe(t, n_p, n_e, dt)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
        self.0.observe(t, n_p, n_e, dt);
        self.1.observe(t, n_p, n_e, dt);
    }
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullObserver;

impl Observer for NullObserver {
    fn observe(&mut self, _: f64, _: f64, _: f64, _: f64) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub n_p: f64,
    pub n_e: f64,
}

/// Records the state at the start of every `stride`-th observation, plus
/// the final state.
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    stride: usize,
    seen: usize,
    points: Vec<TrajectoryPoint>,
    last: Option<TrajectoryPoint>,
}

impl TrajectoryRecorder {
    pub fn new(stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            seen: 0,
            points: Vec::new(),
            last: None,
        }
    }

    pub fn into_points(mut self) -> Vec<TrajectoryPoint> {
        if let Some(last) = self.last.take() {
            if self.points.last() != Some(&last) {
                self.points.push(last);
            }
        }
        self.points
    }
}

impl Observer for TrajectoryRecorder {
    fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
        if self.seen % self.stride == 0 {
            self.points.push(TrajectoryPoint { t, n_p, n_e });
        }
        self.seen += 1;
        self.last = Some(TrajectoryPoint {
            t: t + dt,
            n_p,
            n_e,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TimeReached,
    MaxSteps,
    /// Every propensity vanished; the chain can never move again.
    Absorbing,
}

/// How a single trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub t_reached: f64,
    pub steps: u64,
    pub stop_reason: StopReason,
    /// Tau-leaping: leaps that fell back to an exact step after repeated
    /// rejection. Langevin: steps where the negativity policy changed the
    /// state.
    pub corrections: u64,
}
