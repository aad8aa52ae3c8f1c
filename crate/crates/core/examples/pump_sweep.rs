//! A short pump sweep of the n0 = 10 preset with the master equation,
//! small-signal theory and SSA, written as CSV to standard output.
//!
//! cargo run --release --example pump_sweep > sweep.csv

use std::io::Write;

use lasernoise::harness::{
    pump_grid, results_to_bytes, run_sweep, Method, SimulationSettings, SweepSpec,
};
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    let spec = SweepSpec {
        preset: Some(Preset::N0_10),
        params: Preset::N0_10.parameters(),
        pump_grid: pump_grid(0.05, 20.0, 6)?,
        methods: vec![Method::Oracle, Method::Smallsignal, Method::Ssa],
        runs_per_point: 3,
        base_seed: 11,
        settings: SimulationSettings {
            t_end: Some(2000.0),
            ..SimulationSettings::default()
        },
        record_wallclock: false,
    };
    let out = run_sweep(&spec, None, true)?;
    std::io::stdout()
        .write_all(&results_to_bytes(&out.rows))
        .expect("stdout");
    Ok(())
}
