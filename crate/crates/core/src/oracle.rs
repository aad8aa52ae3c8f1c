//! Exact steady state of the laser birth–death master equation.
//!
//! The chain lives on the grid n_p ∈ [0, N_max], n_e ∈ [0, n0] with state
//! index `n_p·(n0 + 1) + n_e`. Every transition moves the index by at most
//! n0 + 1, so the generator is banded and the stationary distribution is
//! found with a banded LU factorization. Emission out of n_p = N_max is
//! dropped; N_max grows until the probability parked on that row is
//! negligible.

use crate::error::{Error, Result};
use crate::model::{deterministic_steady_state, EventTable, LaserParameters};
use crate::stats::{RunStatistics, SummaryStatistics};

/// Outgoing transitions of one state: (target index, rate). Rates that are
/// structurally absent are stored as zero with target equal to the source.
type Outgoing = [(usize, f64); 5];

/// Sparse transition-rate structure Q with dp/dt = Q·p.
#[derive(Debug, Clone)]
pub struct Generator {
    pub n0: u32,
    pub n_max: u64,
    out: Vec<Outgoing>,
    exit: Vec<f64>,
    /// Total emission rate removed at the photon ceiling, summed over n_e.
    pub removed_rate: f64,
}

impl Generator {
    pub fn num_states(&self) -> usize {
        self.out.len()
    }

    pub fn index(&self, n_p: u64, n_e: u32) -> usize {
        n_p as usize * (self.n0 as usize + 1) + n_e as usize
    }

    pub fn coords(&self, index: usize) -> (u64, u32) {
        let w = self.n0 as usize + 1;
        ((index / w) as u64, (index % w) as u32)
    }

    /// Total exit rate of state `index` (minus the diagonal entry).
    pub fn exit_rate(&self, index: usize) -> f64 {
        self.exit[index]
    }

    pub fn transitions(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.out[index].iter().copied().filter(|&(_, r)| r > 0.0)
    }

    /// Q·p.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut dp: Vec<f64> = p.iter().zip(&self.exit).map(|(x, e)| -x * e).collect();
        for (j, outs) in self.out.iter().enumerate() {
            for &(i, r) in outs {
                dp[i] += r * p[j];
            }
        }
        dp
    }

    /// Dense column sums (Σ_i Q_ij), for checking conservation.
    pub fn column_sums(&self) -> Vec<f64> {
        self.out
            .iter()
            .zip(&self.exit)
            .map(|(outs, e)| outs.iter().map(|&(_, r)| r).sum::<f64>() - e)
            .collect()
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().copied().fold(0.0, f64::max)
    }
}

/// Builds the truncated generator.
pub fn build_generator(params: &LaserParameters, n_max: u64) -> Result<Generator> {
    if n_max < 1 {
        return Err(Error::config("n_max", "must be >= 1"));
    }
    let table = EventTable::new(params)?;
    let n0 = params.n0;
    let w = n0 as usize + 1;
    let states = (n_max as usize + 1) * w;
    let mut out = Vec::with_capacity(states);
    let mut exit = Vec::with_capacity(states);
    let mut removed_rate = 0.0;
    for p in 0..=n_max {
        for e in 0..=n0 {
            let src = p as usize * w + e as usize;
            let (pf, ef) = (p as f64, e as f64);
            let mut o: Outgoing = [(src, 0.0); 5];
            // Stimulated plus spontaneous emission.
            let emit = table.gamma_r * ef * (pf + 1.0);
            if e > 0 {
                if p < n_max {
                    o[0] = (src + w - 1, emit);
                } else {
                    removed_rate += emit;
                }
            }
            if p > 0 && e < n0 {
                o[1] = (src - w + 1, table.gamma_r * (table.n0 - ef) * pf);
            }
            if p > 0 {
                o[2] = (src - w, table.gamma_c * pf);
            }
            if e > 0 {
                o[3] = (src - 1, table.gamma_a * ef);
            }
            if e < n0 {
                o[4] = (src + 1, table.gamma_p * (table.n0 - ef));
            }
            exit.push(o.iter().map(|&(_, r)| r).sum());
            out.push(o);
        }
    }
    Ok(Generator {
        n0,
        n_max,
        out,
        exit,
        removed_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    BandedLu,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Largest admissible probability on the n_p = N_max row.
    pub tail_tolerance: f64,
    pub max_states: usize,
    /// Fixes N_max instead of auto-selecting it.
    pub n_max: Option<u64>,
    pub max_power_iterations: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-8,
            max_states: 1 << 20,
            n_max: None,
            max_power_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    pub mean_np: f64,
    pub mean_np2: f64,
    pub mean_ne: f64,
    pub mean_npne: f64,
}

#[derive(Debug, Clone)]
pub struct OracleDistribution {
    pub n0: u32,
    pub n_max: u64,
    pub p: Vec<f64>,
    pub tail_mass: f64,
    /// ‖Q·p‖∞ of the returned distribution.
    pub residual: f64,
    pub method: SolveMethod,
}

impl OracleDistribution {
    /// Wraps an arbitrary normalized distribution (useful for constructed
    /// inputs).
    pub fn from_probabilities(n0: u32, n_max: u64, p: Vec<f64>) -> Self {
        let w = n0 as usize + 1;
        let tail_mass = p[n_max as usize * w..].iter().sum();
        Self {
            n0,
            n_max,
            p,
            tail_mass,
            residual: 0.0,
            method: SolveMethod::BandedLu,
        }
    }

    pub fn prob(&self, n_p: u64, n_e: u32) -> f64 {
        self.p[n_p as usize * (self.n0 as usize + 1) + n_e as usize]
    }

    pub fn photon_marginal(&self) -> Vec<f64> {
        self.p
            .chunks(self.n0 as usize + 1)
            .map(|c| c.iter().sum())
            .collect()
    }

    pub fn emitter_marginal(&self) -> Vec<f64> {
        let w = self.n0 as usize + 1;
        let mut m = vec![0.0; w];
        for row in self.p.chunks(w) {
            for (acc, x) in m.iter_mut().zip(row) {
                *acc += x;
            }
        }
        m
    }

    pub fn moments(&self) -> OracleMoments {
        let w = self.n0 as usize + 1;
        let mut m = OracleMoments {
            mean_np: 0.0,
            mean_np2: 0.0,
            mean_ne: 0.0,
            mean_npne: 0.0,
        };
        for (np, row) in self.p.chunks(w).enumerate() {
            let np = np as f64;
            for (ne, &x) in row.iter().enumerate() {
                let ne = ne as f64;
                m.mean_np += np * x;
                m.mean_np2 += np * np * x;
                m.mean_ne += ne * x;
                m.mean_npne += np * ne * x;
            }
        }
        m
    }

    /// (n_p, n_e, probability) for every grid state.
    pub fn rows(&self) -> impl Iterator<Item = (u64, u32, f64)> + '_ {
        let w = self.n0 as usize + 1;
        self.p
            .iter()
            .enumerate()
            .map(move |(i, &x)| ((i / w) as u64, (i % w) as u32, x))
    }
}

/// Exact g²(0), RIN and correlation ratio of the distribution.
pub fn oracle_statistics(dist: &OracleDistribution) -> RunStatistics {
    let m = dist.moments();
    RunStatistics::from_raw(m.mean_np, m.mean_np2, m.mean_ne, m.mean_npne)
}

/// `oracle_statistics` with zero error bars.
pub fn oracle_summary(dist: &OracleDistribution) -> SummaryStatistics {
    SummaryStatistics::exact(&oracle_statistics(dist))
}

/// Band matrix with lower bandwidth `kl` and room for the `kl + ku` upper
/// diagonals produced by partial pivoting.
struct BandMatrix {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j + self.kl < i + self.width);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Solves A·x = b in place by Gaussian elimination with partial
    /// pivoting. Returns `None` on an exactly singular pivot.
    fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let (n, kl) = (self.n, self.kl);
        let reach = self.width - kl - 1;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            let last_col = (k + reach).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let (a, c) = (self.slot(k, j), self.slot(piv, j));
                    self.data.swap(a, c);
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let l = self.get(i, k) / pivot;
                if l == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        self.add(i, j, -l * v);
                    }
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.get(k, j) * b[j];
            }
            b[k] = s / self.get(k, k);
        }
        Some(b)
    }
}

/// Solves Q·p = 0 with the balance equation of state `pin` replaced by
/// p_pin = 1, then normalizes.
fn solve_banded(generator: &Generator, pin: usize) -> Option<Vec<f64>> {
    let n = generator.num_states();
    let band = generator.n0 as usize + 1;
    let mut a = BandMatrix::new(n, band, band);
    for (j, outs) in generator.out.iter().enumerate() {
        if j != pin {
            a.add(j, j, -generator.exit[j]);
        }
        for &(i, r) in outs {
            if r > 0.0 && i != pin {
                a.add(i, j, r);
            }
        }
    }
    a.set(pin, pin, 1.0);
    let mut rhs = vec![0.0; n];
    rhs[pin] = 1.0;
    let x = a.solve(rhs)?;
    normalize(x)
}

fn normalize(mut x: Vec<f64>) -> Option<Vec<f64>> {
    // Round-off can leave values of order −1e−17 on states with vanishing
    // probability; anything clearly negative signals a failed solve.
    let total: f64 = x.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return None;
    }
    for v in x.iter_mut() {
        *v /= total;
        if *v < 0.0 {
            if *v < -1e-10 {
                return None;
            }
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Some(x)
}

/// Power iteration on the uniformized chain P = I + Q/Λ.
fn solve_power(
    generator: &Generator,
    start: usize,
    tolerance: f64,
    max_iterations: u64,
) -> Option<Vec<f64>> {
    let n = generator.num_states();
    let lambda = generator.max_exit_rate() * 1.05;
    if lambda == 0.0 {
        let mut p = vec![0.0; n];
        p[start] = 1.0;
        return Some(p);
    }
    let mut p = vec![0.0; n];
    p[start] = 1.0;
    for it in 0..max_iterations {
        let dp = generator.apply(&p);
        if it % 64 == 0 {
            let res = dp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if res < tolerance {
                return normalize(p);
            }
        }
        for (x, d) in p.iter_mut().zip(&dp) {
            *x += d / lambda;
        }
    }
    None
}

fn residual_norm(generator: &Generator, p: &[f64]) -> f64 {
    generator.apply(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Stationary distribution on a fixed truncation.
pub fn steady_state_truncated(
    params: &LaserParameters,
    n_max: u64,
    config: &OracleConfig,
) -> Result<OracleDistribution> {
    let generator = build_generator(params, n_max)?;
    let states = generator.num_states();
    if states > config.max_states {
        return Err(Error::TruncationFailure {
            states,
            ceiling: config.max_states,
        });
    }
    let (np, ne) = deterministic_steady_state(params)?;
    let pin = generator.index(
        (np.round() as u64).min(n_max),
        (ne.round() as u32).min(params.n0),
    );
    let residual_target = 1e-10 * generator.max_exit_rate().max(1.0);
    let banded =
        solve_banded(&generator, pin).filter(|p| residual_norm(&generator, p) < residual_target);
    let (p, method) = match banded {
        Some(p) => (p, SolveMethod::BandedLu),
        None => {
            let p = solve_power(&generator, pin, 1e-12, config.max_power_iterations).ok_or_else(
                || Error::NoPhysicalRoot(format!("stationary solve failed on {states} states")),
            )?;
            (p, SolveMethod::PowerIteration)
        }
    };
    let residual = residual_norm(&generator, &p);
    Ok(OracleDistribution {
        tail_mass: p[generator.index(n_max, 0)..].iter().sum(),
        n0: params.n0,
        n_max,
        residual,
        p,
        method,
    })
}

/// Initial photon ceiling: max(32, ⌈8·n̄_a⌉).
pub fn initial_n_max(params: &LaserParameters) -> Result<u64> {
    let (np, _) = deterministic_steady_state(params)?;
    Ok(32u64.max((8.0 * np).ceil() as u64))
}

/// Stationary distribution with N_max doubled until the tail is below the
/// configured tolerance.
pub fn steady_state(params: &LaserParameters, config: &OracleConfig) -> Result<OracleDistribution> {
    if let Some(n_max) = config.n_max {
        return steady_state_truncated(params, n_max, config);
    }
    let mut n_max = initial_n_max(params)?;
    loop {
        let dist = steady_state_truncated(params, n_max, config)?;
        if dist.tail_mass < config.tail_tolerance {
            return Ok(dist);
        }
        n_max *= 2;
    }
}
