//! Time-weighted moments, derived photon statistics and error bars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Observer;

/// Fraction of the simulated time dropped from the start of every run.
pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.01;

/// Streaming accumulator of piecewise-constant samples.
///
/// Sums are kept relative to a shift (the first value seen) so long runs do
/// not lose precision to cancellation in the second moments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentAccumulator {
    pub burn_in: f64,
    pub total_time: f64,
    pub sample_count: u64,
    shift: Option<(f64, f64)>,
    s_p: f64,
    s_e: f64,
    s_pp: f64,
    s_ee: f64,
    s_pe: f64,
}

/// Time averages over the post-burn-in window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub total_time: f64,
    pub samples: u64,
    pub mean_np: f64,
    pub mean_ne: f64,
    pub var_np: f64,
    pub var_ne: f64,
    pub cov_pe: f64,
}

impl Moments {
    pub fn mean_np2(&self) -> f64 {
        self.var_np + self.mean_np * self.mean_np
    }

    pub fn mean_npne(&self) -> f64 {
        self.cov_pe + self.mean_np * self.mean_ne
    }
}

impl MomentAccumulator {
    pub fn new(burn_in: f64) -> Self {
        Self {
            burn_in: burn_in.max(0.0),
            ..Self::default()
        }
    }

    /// Records that the state (n_p, n_e) held on [t, t + dt). Only the part
    /// after the burn-in counts.
    pub fn push(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
        let end = t + dt;
        if end <= self.burn_in || dt <= 0.0 {
            return;
        }
        let w = end - t.max(self.burn_in);
        let (cp, ce) = *self.shift.get_or_insert((n_p, n_e));
        let (x, y) = (n_p - cp, n_e - ce);
        self.total_time += w;
        self.sample_count += 1;
        self.s_p += w * x;
        self.s_e += w * y;
        self.s_pp += w * x * x;
        self.s_ee += w * y * y;
        self.s_pe += w * x * y;
    }

    fn reshifted(&self, to: (f64, f64)) -> Self {
        let Some(from) = self.shift else {
            return Self {
                shift: Some(to),
                ..*self
            };
        };
        let (dp, de) = (from.0 - to.0, from.1 - to.1);
        let w = self.total_time;
        Self {
            shift: Some(to),
            s_p: self.s_p + dp * w,
            s_e: self.s_e + de * w,
            s_pp: self.s_pp + 2.0 * dp * self.s_p + dp * dp * w,
            s_ee: self.s_ee + 2.0 * de * self.s_e + de * de * w,
            s_pe: self.s_pe + dp * self.s_e + de * self.s_p + dp * de * w,
            ..*self
        }
    }

    /// Combines two accumulators as if their streams had been concatenated.
    pub fn merge(&self, other: &Self) -> Self {
        let Some(shift) = self.shift.or(other.shift) else {
            return *self;
        };
        let a = self.reshifted(shift);
        let b = other.reshifted(shift);
        Self {
            burn_in: self.burn_in,
            total_time: a.total_time + b.total_time,
            sample_count: a.sample_count + b.sample_count,
            shift: Some(shift),
            s_p: a.s_p + b.s_p,
            s_e: a.s_e + b.s_e,
            s_pp: a.s_pp + b.s_pp,
            s_ee: a.s_ee + b.s_ee,
            s_pe: a.s_pe + b.s_pe,
        }
    }
}

impl Observer for MomentAccumulator {
    #[inline]
    fn observe(&mut self, t: f64, n_p: f64, n_e: f64, dt: f64) {
        self.push(t, n_p, n_e, dt);
    }
}

/// ⟨X⟩ = Σ X_i Δt_i / Σ Δt_i for every tracked moment.
pub fn time_average(acc: &MomentAccumulator) -> Result<Moments> {
    let w = acc.total_time;
    let Some((cp, ce)) = acc.shift.filter(|_| w > 0.0) else {
        return Err(Error::EmptyWindow);
    };
    let (mp, me) = (acc.s_p / w, acc.s_e / w);
    Ok(Moments {
        total_time: w,
        samples: acc.sample_count,
        mean_np: cp + mp,
        mean_ne: ce + me,
        var_np: (acc.s_pp / w - mp * mp).max(0.0),
        var_ne: (acc.s_ee / w - me * me).max(0.0),
        cov_pe: acc.s_pe / w - mp * me,
    })
}

/// Statistics of one run (or of an exact distribution). `None` marks a
/// quantity that is undefined because a mean vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub mean_np: f64,
    pub mean_ne: f64,
    pub g2_0: Option<f64>,
    pub rin: Option<f64>,
    pub corr_ratio: Option<f64>,
}

impl RunStatistics {
    /// Builds the derived quantities from raw moments.
    pub fn from_raw(mean_np: f64, mean_np2: f64, mean_ne: f64, mean_npne: f64) -> Self {
        let defined = mean_np > 0.0;
        let g2_0 = defined.then(|| (mean_np2 - mean_np) / (mean_np * mean_np));
        Self {
            mean_np,
            mean_ne,
            g2_0,
            rin: g2_0.map(|g| g + (1.0 - mean_np) / mean_np),
            corr_ratio: (defined && mean_ne > 0.0).then(|| mean_npne / (mean_np * mean_ne)),
        }
    }

    pub fn get(&self, quantity: Quantity) -> Option<f64> {
        match quantity {
            Quantity::MeanNp => Some(self.mean_np),
            Quantity::G2 => self.g2_0,
            Quantity::Rin => self.rin,
        }
    }
}

/// Computes g²(0), RIN and the correlation ratio from trajectory moments.
/// Central moments are used directly so that near-Poissonian runs keep
/// their precision.
pub fn summarize(m: &Moments) -> RunStatistics {
    let (mp, me) = (m.mean_np, m.mean_ne);
    if !(mp > 0.0) {
        return RunStatistics::from_raw(mp, m.mean_np2(), me, m.mean_npne());
    }
    let rin = m.var_np / (mp * mp);
    RunStatistics {
        mean_np: mp,
        mean_ne: me,
        g2_0: Some(rin + 1.0 - 1.0 / mp),
        rin: Some(rin),
        corr_ratio: (me > 0.0).then(|| 1.0 + m.cov_pe / (mp * me)),
    }
}

/// The three quantities that carry error bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MeanNp,
    G2,
    Rin,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::MeanNp, Quantity::G2, Quantity::Rin];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::MeanNp => "mean_np",
            Quantity::G2 => "g2_0",
            Quantity::Rin => "rin",
        }
    }
}

/// Point statistics with combined error bars.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryStatistics {
    pub mean_np: Option<f64>,
    pub mean_ne: Option<f64>,
    pub g2_0: Option<f64>,
    pub rin: Option<f64>,
    pub corr_ratio: Option<f64>,
    pub err_np: Option<f64>,
    pub err_g2: Option<f64>,
    pub err_rin: Option<f64>,
    pub steps: u64,
    pub wallclock_s: f64,
}

impl SummaryStatistics {
    /// An exact result: zero statistical error.
    pub fn exact(stats: &RunStatistics) -> Self {
        Self {
            mean_np: Some(stats.mean_np),
            mean_ne: Some(stats.mean_ne),
            g2_0: stats.g2_0,
            rin: stats.rin,
            corr_ratio: stats.corr_ratio,
            err_np: Some(0.0),
            err_g2: stats.g2_0.map(|_| 0.0),
            err_rin: stats.rin.map(|_| 0.0),
            steps: 0,
            wallclock_s: 0.0,
        }
    }

    pub fn get(&self, quantity: Quantity) -> Option<f64> {
        match quantity {
            Quantity::MeanNp => self.mean_np,
            Quantity::G2 => self.g2_0,
            Quantity::Rin => self.rin,
        }
    }

    pub fn error(&self, quantity: Quantity) -> Option<f64> {
        match quantity {
            Quantity::MeanNp => self.err_np,
            Quantity::G2 => self.err_g2,
            Quantity::Rin => self.err_rin,
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 normalization); `None` for fewer than
/// two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// δ = sqrt(δ_Δt² + STD²) with δ_Δt = |mean(doubled) − mean(base)|. Without
/// doubled-step values the error is the spread alone.
pub fn error_estimate(base: &[f64], doubled: Option<&[f64]>) -> Option<f64> {
    let std = sample_std(base)?;
    let step = match doubled {
        Some(d) if !d.is_empty() => (mean(d) - mean(base)).abs(),
        _ => 0.0,
    };
    let delta = (step * step + std * std).sqrt();
    delta.is_finite().then_some(delta)
}

fn collect(runs: &[RunStatistics], q: Quantity) -> Option<Vec<f64>> {
    runs.iter().map(|r| r.get(q)).collect()
}

/// Averages R runs and attaches combined error bars. A quantity is
/// reported only if every run defines it.
pub fn aggregate(runs: &[RunStatistics], coarse: Option<&[RunStatistics]>) -> SummaryStatistics {
    if runs.is_empty() {
        return SummaryStatistics::default();
    }
    let field = |q: Quantity| -> (Option<f64>, Option<f64>) {
        let Some(base) = collect(runs, q) else {
            return (None, None);
        };
        let doubled = coarse.and_then(|c| collect(c, q));
        (Some(mean(&base)), error_estimate(&base, doubled.as_deref()))
    };
    let (mean_np, err_np) = field(Quantity::MeanNp);
    let (g2_0, err_g2) = field(Quantity::G2);
    let (rin, err_rin) = field(Quantity::Rin);
    let corr: Option<Vec<f64>> = runs.iter().map(|r| r.corr_ratio).collect();
    SummaryStatistics {
        mean_np,
        mean_ne: Some(mean(&runs.iter().map(|r| r.mean_ne).collect::<Vec<_>>())),
        g2_0,
        rin,
        corr_ratio: corr.map(|c| mean(&c)),
        err_np,
        err_g2,
        err_rin,
        steps: 0,
        wallclock_s: 0.0,
    }
}

fn truth_value(truth: &RunStatistics, q: Quantity) -> Result<f64> {
    match truth.get(q) {
        Some(v) if v != 0.0 && v.is_finite() => Ok(v),
        _ => Err(Error::ZeroTruth(q.name())),
    }
}

/// Squared relative deviation of one run. A run in which the quantity is
/// undefined counts as a deviation of −100%.
fn squared_deviation(run: &RunStatistics, truth: f64, q: Quantity) -> f64 {
    let x = run.get(q).unwrap_or(0.0);
    ((x - truth) / truth).powi(2)
}

/// δ² = max over {n_p, g², RIN} of the run-averaged squared relative
/// deviation from the truth.
pub fn relative_error(runs: &[RunStatistics], truth: &RunStatistics) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut worst: f64 = 0.0;
    for q in Quantity::ALL {
        let t = truth_value(truth, q)?;
        let ms = runs.iter().map(|r| squared_deviation(r, t, q)).sum::<f64>() / runs.len() as f64;
        worst = worst.max(ms);
    }
    Ok(worst.sqrt())
}

/// `relative_error` of each run on its own.
pub fn per_run_relative_errors(runs: &[RunStatistics], truth: &RunStatistics) -> Result<Vec<f64>> {
    runs.iter()
        .map(|r| relative_error(std::slice::from_ref(r), truth))
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
