//! Physical parameters of the nanolaser and the six-event laser Markov chain.
//!
//! Every solver in the crate shares the same event table: the discrete
//! samplers draw from it, the Langevin integrator builds its drift and noise
//! from it and the master-equation oracle assembles its generator from it.
//! Rates are in ps⁻¹ and times in ps throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates and emitter count of a nanolaser.
///
/// The radiative rate γr = 4g²/γ⊥ is never stored. It depends on the pump
/// through γ⊥ and is recomputed whenever it is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParameters {
    /// Light-matter coupling g.
    pub g: f64,
    /// Cavity decay rate γc.
    pub gamma_c: f64,
    /// Non-radiative (background) decay per emitter γA.
    pub gamma_a: f64,
    /// Pump rate per emitter γP.
    pub gamma_p: f64,
    /// Pure dephasing per emitter γD.
    pub gamma_d: f64,
    /// Number of emitters.
    pub n0: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub gamma_perp: f64,
    pub gamma_r: f64,
    pub beta: f64,
}

impl LaserParameters {
    pub fn new(
        g: f64,
        gamma_c: f64,
        gamma_a: f64,
        gamma_p: f64,
        gamma_d: f64,
        n0: u32,
    ) -> Result<Self> {
        let params = Self {
            g,
            gamma_c,
            gamma_a,
            gamma_p,
            gamma_d,
            n0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("gamma_c", self.gamma_c),
            ("gamma_A", self.gamma_a),
            ("gamma_P", self.gamma_p),
            ("gamma_D", self.gamma_d),
        ];
        for (key, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    key,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        if self.n0 == 0 {
            return Err(Error::InvalidParameter {
                key: "n0",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    pub fn with_pump(&self, gamma_p: f64) -> Self {
        Self { gamma_p, ..*self }
    }

    /// γ⊥ = γP + γA + γD + γc.
    pub fn gamma_perp(&self) -> f64 {
        self.gamma_p + self.gamma_a + self.gamma_d + self.gamma_c
    }

    pub fn gamma_r(&self) -> Result<f64> {
        let gamma_perp = self.gamma_perp();
        if gamma_perp <= 0.0 {
            return Err(Error::DegenerateParameters);
        }
        Ok(4.0 * self.g * self.g / gamma_perp)
    }

    /// γ⊥, γr and the β-factor γr(γP=0) / (γr(γP=0) + γA).
    pub fn derived_rates(&self) -> Result<DerivedRates> {
        let gamma_perp = self.gamma_perp();
        let gamma_r = self.gamma_r()?;
        let unpumped = self.with_pump(0.0);
        // β is undefined when both the unpumped radiative rate and γA vanish.
        let beta = match unpumped.gamma_r() {
            Ok(r0) if r0 + self.gamma_a > 0.0 => r0 / (r0 + self.gamma_a),
            _ => 0.0,
        };
        Ok(DerivedRates {
            gamma_perp,
            gamma_r,
            beta,
        })
    }
}

/// Named parameter sets: g = 0.1, γc = 0.04, γD = 1 (ps⁻¹) with γA chosen
/// per emitter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "n0_1")]
    N0_1,
    #[serde(rename = "n0_10")]
    N0_10,
    #[serde(rename = "n0_100")]
    N0_100,
    #[serde(rename = "n0_10000")]
    N0_10000,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::N0_1,
        Preset::N0_10,
        Preset::N0_100,
        Preset::N0_10000,
    ];

    pub fn n0(self) -> u32 {
        match self {
            Preset::N0_1 => 1,
            Preset::N0_10 => 10,
            Preset::N0_100 => 100,
            Preset::N0_10000 => 10000,
        }
    }

    /// Background decay γA, stored verbatim.
    pub fn gamma_a(self) -> f64 {
        match self {
            Preset::N0_1 => 0.0,
            Preset::N0_10 => 0.263941,
            Preset::N0_100 => 1.51458,
            Preset::N0_10000 => 19.4566,
        }
    }

    /// Parameters with the pump switched off.
    pub fn parameters(self) -> LaserParameters {
        LaserParameters {
            g: 0.1,
            gamma_c: 0.04,
            gamma_a: self.gamma_a(),
            gamma_p: 0.0,
            gamma_d: 1.0,
            n0: self.n0(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::N0_1 => "n0_1",
            Preset::N0_10 => "n0_10",
            Preset::N0_100 => "n0_100",
            Preset::N0_10000 => "n0_10000",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Integer populations of the Markov chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationState {
    pub n_p: u64,
    pub n_e: u32,
    pub t: f64,
}

impl PopulationState {
    pub fn new(n_p: u64, n_e: u32) -> Self {
        Self { n_p, n_e, t: 0.0 }
    }

    pub fn is_valid(&self, n0: u32) -> bool {
        self.n_e <= n0 && self.t >= 0.0
    }

    /// Nearest valid integer state to a real-valued point.
    pub fn rounded(n_p: f64, n_e: f64, n0: u32) -> Self {
        let n_p = n_p.max(0.0).round() as u64;
        let n_e = n_e.clamp(0.0, n0 as f64).round() as u32;
        Self::new(n_p, n_e)
    }

    /// Applies an event's population change. Returns `None` if the result
    /// would leave the physical region.
    pub fn apply(&self, event: Event, n0: u32) -> Option<PopulationState> {
        let (dp, de) = event.delta();
        let n_p = self.n_p.checked_add_signed(dp as i64)?;
        let n_e = self.n_e.checked_add_signed(de as i32)?;
        (n_e <= n0).then_some(PopulationState {
            n_p,
            n_e,
            t: self.t,
        })
    }
}

/// Real-valued populations used by the Langevin and small-signal methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousState {
    pub n_p: f64,
    pub n_e: f64,
    pub t: f64,
}

impl ContinuousState {
    pub fn new(n_p: f64, n_e: f64) -> Self {
        Self { n_p, n_e, t: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    StimulatedEmission,
    SpontaneousEmission,
    Absorption,
    CavityDecay,
    BackgroundDecay,
    Pumping,
}

pub const NUM_EVENTS: usize = 6;

impl Event {
    /// Fixed event order used for propensity arrays and random draws.
    pub const ALL: [Event; NUM_EVENTS] = [
        Event::StimulatedEmission,
        Event::SpontaneousEmission,
        Event::Absorption,
        Event::CavityDecay,
        Event::BackgroundDecay,
        Event::Pumping,
    ];

    /// Population change (Δn_p, Δn_e).
    pub const fn delta(self) -> (i8, i8) {
        match self {
            Event::StimulatedEmission | Event::SpontaneousEmission => (1, -1),
            Event::Absorption => (-1, 1),
            Event::CavityDecay => (-1, 0),
            Event::BackgroundDecay => (0, -1),
            Event::Pumping => (0, 1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Event::StimulatedEmission => "stimulated_emission",
            Event::SpontaneousEmission => "spontaneous_emission",
            Event::Absorption => "absorption",
            Event::CavityDecay => "cavity_decay",
            Event::BackgroundDecay => "background_decay",
            Event::Pumping => "pumping",
        }
    }
}

/// Population changes in event order, as floats.
pub const DELTAS: [(f64, f64); NUM_EVENTS] = [
    (1.0, -1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, 0.0),
    (0.0, -1.0),
    (0.0, 1.0),
];

/// Diffusion coefficients (D_aa, D_ae, D_ee); the noise covariance is 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion {
    pub aa: f64,
    pub ae: f64,
    pub ee: f64,
}

/// The six events with their rate constants resolved for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventTable {
    pub gamma_r: f64,
    pub gamma_c: f64,
    pub gamma_a: f64,
    pub gamma_p: f64,
    pub n0: f64,
    pub n0_int: u32,
}

impl EventTable {
    pub fn new(params: &LaserParameters) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            gamma_r: params.gamma_r()?,
            gamma_c: params.gamma_c,
            gamma_a: params.gamma_a,
            gamma_p: params.gamma_p,
            n0: params.n0 as f64,
            n0_int: params.n0,
        })
    }

    /// Propensities (a_st, a_sp, a_ab, a_c, a_bg, a_p) at real populations.
    #[inline]
    pub fn rates(&self, n_p: f64, n_e: f64) -> [f64; NUM_EVENTS] {
        let ground = self.n0 - n_e;
        [
            self.gamma_r * n_e * n_p,
            self.gamma_r * n_e,
            self.gamma_r * ground * n_p,
            self.gamma_c * n_p,
            self.gamma_a * n_e,
            self.gamma_p * ground,
        ]
    }

    #[inline]
    pub fn propensities(&self, state: &PopulationState) -> [f64; NUM_EVENTS] {
        self.rates(state.n_p as f64, state.n_e as f64)
    }

    /// Right-hand side of the noiseless rate equations.
    #[inline]
    pub fn drift(&self, n_p: f64, n_e: f64) -> (f64, f64) {
        let gain = self.gamma_r * (2.0 * n_e - self.n0) * n_p;
        let spont = self.gamma_r * n_e;
        (
            gain + spont - self.gamma_c * n_p,
            self.gamma_p * (self.n0 - n_e) - gain - spont - self.gamma_a * n_e,
        )
    }

    pub fn diffusion(&self, n_p: f64, n_e: f64) -> Diffusion {
        let Self {
            gamma_r,
            gamma_c,
            gamma_a,
            gamma_p,
            n0,
            ..
        } = *self;
        Diffusion {
            aa: 0.5 * (gamma_r * n0 * n_p + gamma_r * n_e + gamma_c * n_p),
            ae: -0.5 * gamma_r * (n_e + n0 * n_p),
            ee: 0.5 * (gamma_r * n0 * n_p + gamma_r * n_e + gamma_p * (n0 - n_e) + gamma_a * n_e),
        }
    }

    /// Jacobian of the drift, [[∂ṅp/∂np, ∂ṅp/∂ne], [∂ṅe/∂np, ∂ṅe/∂ne]].
    pub fn drift_jacobian(&self, n_p: f64, n_e: f64) -> [[f64; 2]; 2] {
        let gr = self.gamma_r;
        let inversion = gr * (2.0 * n_e - self.n0);
        [
            [inversion - self.gamma_c, 2.0 * gr * n_p + gr],
            [
                -inversion,
                -self.gamma_p - 2.0 * gr * n_p - gr - self.gamma_a,
            ],
        ]
    }
}

/// Physical fixed point (n̄_a, n̄_e) of the noiseless rate equations.
///
/// Adding the two rate equations gives γc·n_p = γP(n0 − n_e) − γA·n_e, which
/// puts the physical branch in n_e ∈ [0, γP·n0/(γP + γA)]. On that interval
/// the photon balance is a concave quadratic that is ≤ 0 at the left end and
/// ≥ 0 at the right end, so exactly one root is bracketed. It is located by
/// bisection and polished with Newton steps on the full 2-D system.
pub fn deterministic_steady_state(params: &LaserParameters) -> Result<(f64, f64)> {
    let table = EventTable::new(params)?;
    if params.gamma_p == 0.0 {
        return Ok((0.0, 0.0));
    }
    if params.gamma_c <= 0.0 {
        return Err(Error::NoPhysicalRoot(
            "gamma_c = 0: the photon population has no loss channel".into(),
        ));
    }
    let EventTable {
        gamma_r,
        gamma_c,
        gamma_a,
        gamma_p,
        n0,
        ..
    } = table;
    let photons = |n_e: f64| ((gamma_p * (n0 - n_e) - gamma_a * n_e) / gamma_c).max(0.0);
    let balance = |n_e: f64| (gamma_r * (2.0 * n_e - n0) - gamma_c) * photons(n_e) + gamma_r * n_e;

    let mut lo = 0.0;
    let mut hi = gamma_p * n0 / (gamma_p + gamma_a);
    if balance(lo) > 0.0 || balance(hi) < 0.0 {
        return Err(Error::NoPhysicalRoot(
            "photon balance is not bracketed".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if balance(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut n_e = 0.5 * (lo + hi);
    let mut n_p = photons(n_e);

    for _ in 0..4 {
        let (fp, fe) = table.drift(n_p, n_e);
        let [[a, b], [c, d]] = table.drift_jacobian(n_p, n_e);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step_p = (d * fp - b * fe) / det;
        let step_e = (a * fe - c * fp) / det;
        let (cand_p, cand_e) = (n_p - step_p, n_e - step_e);
        if cand_p < 0.0 || !(0.0..=n0).contains(&cand_e) {
            break;
        }
        let old = residual(&table, n_p, n_e);
        if residual(&table, cand_p, cand_e) > old {
            break;
        }
        n_p = cand_p;
        n_e = cand_e;
    }

    if !(n_p.is_finite() && n_e.is_finite()) || n_p < 0.0 || !(0.0..=n0).contains(&n_e) {
        return Err(Error::NoPhysicalRoot(format!(
            "solver left the physical region at ({n_p}, {n_e})"
        )));
    }
    Ok((n_p, n_e))
}

fn residual(table: &EventTable, n_p: f64, n_e: f64) -> f64 {
    let (fp, fe) = table.drift(n_p, n_e);
    fp.abs().max(fe.abs())
}
