//! Closed-form small-signal solution of the Langevin rate equations.
//!
//! Linearizing around the deterministic steady state (n̄_a, n̄_e) gives
//!
//! ```text
//! d/dt (Δn_p, Δn_e) = [[-Γ_aa, Γ_ae], [-Γ_ea, -Γ_ee]] (Δn_p, Δn_e) + (F_p, F_e)
//! ```
//!
//! with ⟨F_i(t) F_j(s)⟩ = 2 D_ij δ(t − s). The photon spectrum and variance
//! follow in closed form.
//!
//! The RIN reported here is the dimensionless zero-delay quantity
//! g²(0) + (1 − ⟨n_p⟩)/⟨n_p⟩ = ⟨Δn_p²⟩/⟨n_p⟩², not a spectral density in
//! dB/Hz.

use crate::error::{Error, Result};
use crate::model::{deterministic_steady_state, Diffusion, EventTable, LaserParameters};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSignalSolution {
    pub n_bar_a: f64,
    pub n_bar_e: f64,
    pub gamma_aa: f64,
    pub gamma_ae: f64,
    pub gamma_ea: f64,
    pub gamma_ee: f64,
    /// Γ_ae·Γ_ea + Γ_aa·Γ_ee, the squared relaxation-oscillation frequency.
    pub omega_r_sq: f64,
    /// Γ_aa + Γ_ee.
    pub gamma_total: f64,
    pub diffusion: Diffusion,
    /// Photon-number variance ⟨Δn_p²⟩; NaN when the solution is invalid.
    pub var_np: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticStatistics {
    pub g2_0: f64,
    pub rin: f64,
}

/// Linearization at the steady state, returned even when it is not a stable
/// focus/node (`valid == false`).
pub fn linearize(params: &LaserParameters) -> Result<SmallSignalSolution> {
    let table = EventTable::new(params)?;
    let (n_a, n_e) = deterministic_steady_state(params)?;
    let gr = table.gamma_r;
    let n0 = table.n0;
    let gamma_aa = params.gamma_c - gr * (2.0 * n_e - n0);
    let gamma_ae = 2.0 * gr * n_a + gr;
    let gamma_ea = gr * (2.0 * n_e - n0);
    let gamma_ee = params.gamma_p + 2.0 * gr * n_a + gr + params.gamma_a;
    let omega_r_sq = gamma_ae * gamma_ea + gamma_aa * gamma_ee;
    let gamma_total = gamma_aa + gamma_ee;
    let d = table.diffusion(n_a, n_e);
    let valid = omega_r_sq > 0.0 && gamma_total > 0.0;
    let var_np = if valid {
        let w2 = omega_r_sq;
        ((1.0 + gamma_ee * gamma_ee / w2) * d.aa
            + gamma_ae * gamma_ae / w2 * d.ee
            + 2.0 * gamma_ae * gamma_ee / w2 * d.ae)
            / gamma_total
    } else {
        f64::NAN
    };
    Ok(SmallSignalSolution {
        n_bar_a: n_a,
        n_bar_e: n_e,
        gamma_aa,
        gamma_ae,
        gamma_ea,
        gamma_ee,
        omega_r_sq,
        gamma_total,
        diffusion: d,
        var_np,
        valid,
    })
}

pub fn small_signal_solution(params: &LaserParameters) -> Result<SmallSignalSolution> {
    let solution = linearize(params)?;
    if !solution.valid {
        return Err(Error::SmallSignalInvalid {
            omega_r_sq: solution.omega_r_sq,
            gamma_total: solution.gamma_total,
        });
    }
    Ok(solution)
}

impl SmallSignalSolution {
    pub fn omega_r(&self) -> f64 {
        self.omega_r_sq.sqrt()
    }

    /// g²(0) and RIN from ⟨n_p²⟩ = n̄_a² + ⟨Δn_p²⟩.
    pub fn analytic_statistics(&self) -> Result<AnalyticStatistics> {
        if !self.valid {
            return Err(Error::SmallSignalInvalid {
                omega_r_sq: self.omega_r_sq,
                gamma_total: self.gamma_total,
            });
        }
        statistics_from_variance(self.n_bar_a, self.var_np)
    }

    /// Photon-number spectrum S(ω), normalized so that (1/2π)∫S dω equals
    /// `var_np`:
    ///
    /// S(ω) = |H(ω)|²/ω_R⁴ · [2Γ_ae²D_ee + 4Γ_eeΓ_aeD_ae + (Γ_ee² + ω²)·2D_aa]
    ///
    /// with |H(ω)|²/ω_R⁴ = 1/((ω_R² − ω²)² + ω²Γ²).
    pub fn intensity_spectrum(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let d = self.diffusion;
        let denom = (self.omega_r_sq - w2).powi(2) + w2 * self.gamma_total * self.gamma_total;
        let numer = 2.0 * self.gamma_ae * self.gamma_ae * d.ee
            + 4.0 * self.gamma_ee * self.gamma_ae * d.ae
            + (self.gamma_ee * self.gamma_ee + w2) * 2.0 * d.aa;
        numer / denom
    }
}

pub fn statistics_from_variance(mean: f64, variance: f64) -> Result<AnalyticStatistics> {
    if !(mean > 0.0) {
        return Err(Error::ZeroPhotons);
    }
    let second = mean * mean + variance;
    let g2_0 = (second - mean) / (mean * mean);
    Ok(AnalyticStatistics {
        g2_0,
        rin: g2_0 + (1.0 - mean) / mean,
    })
}
