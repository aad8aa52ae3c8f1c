//! TOML configuration with layered overrides.
//!
//! A configuration is a [`RawConfig`] in which every value is optional.
//! Command-line flags are parsed into a second `RawConfig` and laid over
//! the file with [`RawConfig::overlay`]; whatever is still unset comes from
//! the preset and then from built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bench::{BenchmarkSpec, TruthSource};
use super::run::SimulationSettings;
use super::sweep::SweepSpec;
use super::Method;
use crate::error::{Error, Result};
use crate::langevin::{DiffusionMode, NegativityPolicy, NoiseConstruction};
use crate::model::{LaserParameters, Preset};

pub const DEFAULT_MAX_STEPS: u64 = 20_000_000_000;
pub const DEFAULT_PUMP_POINTS: usize = 24;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLaser {
    pub g: Option<f64>,
    pub gamma_c: Option<f64>,
    #[serde(rename = "gamma_A")]
    pub gamma_a: Option<f64>,
    #[serde(rename = "gamma_D")]
    pub gamma_d: Option<f64>,
    #[serde(rename = "gamma_P")]
    pub gamma_p: Option<f64>,
    pub n0: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub methods: Option<Vec<Method>>,
    pub pump_min: Option<f64>,
    pub pump_max: Option<f64>,
    pub pump_points: Option<usize>,
    pub pump_grid: Option<Vec<f64>>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub record_wallclock: Option<bool>,
    pub burn_in_fraction: Option<f64>,
    pub langevin_factor: Option<f64>,
    pub markov_factor: Option<f64>,
    pub t_end: Option<f64>,
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTauleap {
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLangevin {
    pub epsilon: Option<f64>,
    pub negativity_policy: Option<NegativityPolicy>,
    pub diffusion_mode: Option<DiffusionMode>,
    pub noise_construction: Option<NoiseConstruction>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub tail_tolerance: Option<f64>,
    pub max_states: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBench {
    pub budgets: Option<Vec<f64>>,
    pub truth: Option<TruthSource>,
    /// Steps per wall-clock second for each method. Pinning these makes a
    /// benchmark reproducible; missing entries are measured.
    pub throughput: Option<BTreeMap<Method, f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub laser: RawLaser,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub tauleap: RawTauleap,
    #[serde(default)]
    pub langevin: RawLangevin,
    #[serde(default)]
    pub oracle: RawOracle,
    #[serde(default)]
    pub bench: RawBench,
}

/// Extracts the first `name` quoted in backticks from a parser message.
fn quoted_key(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Dotted key (`section.key`) of the assignment containing byte `pos`.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let line_start = text[..pos.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next()?;
    let key = line.split_once('=')?.0.trim();
    let section = text[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim());
    Some(match section {
        Some(sec) => format!("{sec}.{key}"),
        None => key.to_string(),
    })
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let key = quoted_key(&message)
            .or_else(|| e.span().and_then(|span| key_at(text, span.start)))
            .unwrap_or_else(|| "config".into());
        Error::Config { key, message }
    })
}

pub fn load_config_file(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, [$($f:ident),*]) => {{
        let base = $base;
        let top = $top;
        Self { $($f: top.$f.or(base.$f)),* }
    }};
}

impl RawLaser {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(self, top, [g, gamma_c, gamma_a, gamma_d, gamma_p, n0])
    }
}

impl RawSweep {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(
            self,
            top,
            [
                methods,
                pump_min,
                pump_max,
                pump_points,
                pump_grid,
                runs,
                seed,
                record_wallclock,
                burn_in_fraction,
                langevin_factor,
                markov_factor,
                t_end,
                max_steps
            ]
        )
    }
}

impl RawTauleap {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(self, top, [epsilon])
    }
}

impl RawLangevin {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(
            self,
            top,
            [
                epsilon,
                negativity_policy,
                diffusion_mode,
                noise_construction
            ]
        )
    }
}

impl RawOracle {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(self, top, [tail_tolerance, max_states])
    }
}

impl RawBench {
    fn overlay(self, top: Self) -> Self {
        overlay_fields!(self, top, [budgets, truth, throughput])
    }
}

/// Default pump range (ps⁻¹) per preset.
fn default_pump_range(preset: Option<Preset>) -> (f64, f64) {
    match preset {
        Some(Preset::N0_1) => (1e-3, 1e2),
        Some(Preset::N0_10) => (1e-2, 1e2),
        Some(Preset::N0_100) => (1e-1, 5e1),
        Some(Preset::N0_10000) => (1.0, 1e3),
        None => (1e-2, 1e2),
    }
}

/// Default benchmark pump (ps⁻¹) per preset.
fn default_bench_pump(preset: Option<Preset>) -> Option<f64> {
    match preset {
        Some(Preset::N0_1) => Some(0.5),
        Some(Preset::N0_10) => Some(2.0),
        Some(Preset::N0_100) => Some(5.0),
        Some(Preset::N0_10000) => Some(40.0),
        None => None,
    }
}

/// `points` log-spaced values from `min` to `max` inclusive.
pub fn pump_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && min.is_finite()) {
        return Err(Error::config("pump_min", format!("must be > 0, got {min}")));
    }
    if !(max.is_finite() && max >= min) {
        return Err(Error::config(
            "pump_max",
            format!("must be >= pump_min, got {max}"),
        ));
    }
    if points == 0 {
        return Err(Error::config("pump_points", "must be >= 1"));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    if max == min {
        return Err(Error::config(
            "pump_max",
            "must exceed pump_min when pump_points > 1",
        ));
    }
    let (a, b) = (min.ln(), max.ln());
    let grid = (0..points)
        .map(|i| match i {
            0 => min,
            i if i == points - 1 => max,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect();
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("pump_grid", "must not be empty"));
    }
    if let Some(bad) = grid.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::config(
            "pump_grid",
            format!("values must be positive, got {bad}"),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("pump_grid", "must be strictly increasing"));
    }
    Ok(())
}

impl RawConfig {
    /// Values set in `top` win over values set here.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        RawConfig {
            preset: top.preset.or(self.preset),
            laser: self.laser.overlay(top.laser),
            sweep: self.sweep.overlay(top.sweep),
            tauleap: self.tauleap.overlay(top.tauleap),
            langevin: self.langevin.overlay(top.langevin),
            oracle: self.oracle.overlay(top.oracle),
            bench: self.bench.overlay(top.bench),
        }
    }

    /// `None` for a custom parameter set.
    pub fn resolved_preset(&self) -> Result<Option<Preset>> {
        match self.preset.as_deref() {
            None | Some("custom") => Ok(None),
            Some(name) => Preset::from_name(name)
                .map(Some)
                .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}` (expected n0_1, n0_10, n0_100, n0_10000 or custom)"))),
        }
    }

    /// Laser parameters; the pump defaults to zero when unset.
    pub fn parameters(&self) -> Result<LaserParameters> {
        let preset = self.resolved_preset()?;
        let base = preset.map(Preset::parameters);
        let l = &self.laser;
        let pick = |key: &'static str, value: Option<f64>, fallback: Option<f64>| {
            value
                .or(fallback)
                .ok_or_else(|| Error::config(key, "required when no preset is given"))
        };
        let params = LaserParameters {
            g: pick("g", l.g, base.map(|b| b.g))?,
            gamma_c: pick("gamma_c", l.gamma_c, base.map(|b| b.gamma_c))?,
            gamma_a: pick("gamma_A", l.gamma_a, base.map(|b| b.gamma_a))?,
            gamma_d: pick("gamma_D", l.gamma_d, base.map(|b| b.gamma_d))?,
            gamma_p: l.gamma_p.unwrap_or(0.0),
            n0: match l.n0.or(base.map(|b| b.n0)) {
                Some(n0) => n0,
                None => return Err(Error::config("n0", "required when no preset is given")),
            },
        };
        params.validate()?;
        Ok(params)
    }

    pub fn settings(&self) -> Result<SimulationSettings> {
        let d = SimulationSettings::default();
        let s = &self.sweep;
        let settings = SimulationSettings {
            max_steps: s.max_steps.unwrap_or(d.max_steps),
            burn_in_fraction: s.burn_in_fraction.unwrap_or(d.burn_in_fraction),
            langevin_factor: s.langevin_factor.unwrap_or(d.langevin_factor),
            markov_factor: s.markov_factor.unwrap_or(d.markov_factor),
            t_end: s.t_end.or(d.t_end),
            tauleap_epsilon: self.tauleap.epsilon.unwrap_or(d.tauleap_epsilon),
            langevin_epsilon: self.langevin.epsilon.unwrap_or(d.langevin_epsilon),
            negativity_policy: self
                .langevin
                .negativity_policy
                .unwrap_or(d.negativity_policy),
            diffusion_mode: self.langevin.diffusion_mode.unwrap_or(d.diffusion_mode),
            noise_construction: self
                .langevin
                .noise_construction
                .unwrap_or(d.noise_construction),
            oracle_tail_tolerance: self
                .oracle
                .tail_tolerance
                .unwrap_or(d.oracle_tail_tolerance),
            oracle_max_states: self.oracle.max_states.unwrap_or(d.oracle_max_states),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn runs(&self) -> Result<usize> {
        let runs = self.sweep.runs.unwrap_or(5);
        if runs == 0 {
            return Err(Error::config("runs", "must be >= 1"));
        }
        Ok(runs)
    }

    fn methods(&self, default: &[Method]) -> Result<Vec<Method>> {
        let mut methods = self
            .sweep
            .methods
            .clone()
            .unwrap_or_else(|| default.to_vec());
        if methods.is_empty() {
            return Err(Error::config("methods", "must name at least one method"));
        }
        methods.sort();
        methods.dedup();
        Ok(methods)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let preset = self.resolved_preset()?;
        let params = self.parameters()?;
        let pump_grid = match &self.sweep.pump_grid {
            Some(grid) => grid.clone(),
            None => {
                let (lo, hi) = default_pump_range(preset);
                pump_grid(
                    self.sweep.pump_min.unwrap_or(lo),
                    self.sweep.pump_max.unwrap_or(hi),
                    self.sweep.pump_points.unwrap_or(DEFAULT_PUMP_POINTS),
                )?
            }
        };
        check_grid(&pump_grid)?;
        Ok(SweepSpec {
            preset,
            params,
            pump_grid,
            methods: self.methods(&[
                Method::Ssa,
                Method::Tauleap,
                Method::Langevin,
                Method::Smallsignal,
                Method::Oracle,
            ])?,
            runs_per_point: self.runs()?,
            base_seed: self.sweep.seed.unwrap_or(0),
            settings: self.settings()?,
            record_wallclock: self.sweep.record_wallclock.unwrap_or(false),
        })
    }

    pub fn bench_spec(&self) -> Result<BenchmarkSpec> {
        let preset = self.resolved_preset()?;
        let mut params = self.parameters()?;
        params.gamma_p = match self.laser.gamma_p.or(default_bench_pump(preset)) {
            Some(p) => p,
            None => {
                return Err(Error::config(
                    "gamma_P",
                    "benchmark pump is required for custom parameters",
                ))
            }
        };
        if !(params.gamma_p > 0.0) {
            return Err(Error::config("gamma_P", "benchmark pump must be > 0"));
        }
        let budgets = self
            .bench
            .budgets
            .clone()
            .unwrap_or_else(|| vec![1.0, 4.0, 15.0, 60.0]);
        if budgets.is_empty()
            || budgets.iter().any(|b| !(*b > 0.0 && b.is_finite()))
            || budgets.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::config(
                "budgets",
                "must be positive and strictly increasing",
            ));
        }
        let methods = self.methods(&[Method::Ssa, Method::Tauleap, Method::Langevin])?;
        if let Some(m) = methods.iter().find(|m| !m.is_stochastic()) {
            return Err(Error::config(
                "methods",
                format!("{m} cannot be benchmarked against a wall-clock budget"),
            ));
        }
        let throughput = self.bench.throughput.clone().unwrap_or_default();
        if let Some((m, v)) = throughput
            .iter()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::config(
                "throughput",
                format!("{m}: must be > 0, got {v}"),
            ));
        }
        Ok(BenchmarkSpec {
            preset,
            truth: self.bench.truth.unwrap_or(if params.n0 <= 10 {
                TruthSource::Oracle
            } else {
                TruthSource::Smallsignal
            }),
            params,
            methods,
            budgets,
            runs_per_point: self.runs()?,
            base_seed: self.sweep.seed.unwrap_or(0),
            settings: self.settings()?,
            throughput,
            record_wallclock: self.sweep.record_wallclock.unwrap_or(false),
        })
    }
}
