//! One exact trajectory of the n0 = 10 preset, its time-averaged photon
//! statistics, and the first few recorded states.
//!
//! cargo run --release --example ssa_trajectory

use lasernoise::model::{deterministic_steady_state, PopulationState};
use lasernoise::ssa::{simulate_ssa, SsaConfig};
use lasernoise::stats::{summarize, time_average, MomentAccumulator};
use lasernoise::trajectory::TrajectoryRecorder;
use lasernoise::Preset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lasernoise::Result<()> {
    let params = Preset::N0_10.parameters().with_pump(2.0);
    let (np, ne) = deterministic_steady_state(&params)?;
    let config = SsaConfig {
        t_end: 2000.0,
        max_steps: u64::MAX,
        seed: 7,
        initial_state: PopulationState::rounded(np, ne, params.n0),
    };

    let mut acc = MomentAccumulator::new(20.0);
    let mut rec = TrajectoryRecorder::new(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let report = simulate_ssa(&params, &config, &mut rng, &mut (&mut acc, &mut rec))?;

    let stats = summarize(&time_average(&acc)?);
    println!(
        "{} events, stopped by {:?} at t = {:.1} ps",
        report.steps, report.stop_reason, report.t_reached
    );
    println!("rate equations: n_p = {np:.3}, n_e = {ne:.3}");
    println!(
        "time averages:  n_p = {:.3}, n_e = {:.3}, g2(0) = {:.4}, RIN = {:.4}",
        stats.mean_np,
        stats.mean_ne,
        stats.g2_0.unwrap_or(f64::NAN),
        stats.rin.unwrap_or(f64::NAN)
    );
    println!("\n{:>10} {:>6} {:>4}", "t (ps)", "n_p", "n_e");
    for p in rec.into_points().iter().take(10) {
        println!("{:>10.3} {:>6} {:>4}", p.t, p.n_p, p.n_e);
    }
    Ok(())
}
