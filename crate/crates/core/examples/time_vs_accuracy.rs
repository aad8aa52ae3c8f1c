//! Relative error of each simulation method against the exact answer for a
//! few small wall-clock budgets.
//!
//! cargo run --release --example time_vs_accuracy

use lasernoise::harness::{run_benchmark, BenchmarkSpec, Method, SimulationSettings, TruthSource};
use lasernoise::stats::median;
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    let spec = BenchmarkSpec {
        preset: Some(Preset::N0_10),
        params: Preset::N0_10.parameters().with_pump(2.0),
        methods: vec![Method::Ssa, Method::Tauleap, Method::Langevin],
        budgets: vec![0.05, 0.2, 0.8],
        truth: TruthSource::Oracle,
        runs_per_point: 3,
        base_seed: 5,
        settings: SimulationSettings::default(),
        throughput: Default::default(),
        record_wallclock: false,
    };
    let out = run_benchmark(&spec, None, false)?;
    println!("measured throughput (steps/s): {:?}", out.throughput);
    print!("{:>10}", "budget");
    for m in &spec.methods {
        print!(" {:>12}", m.name());
    }
    println!();
    for (bi, b) in spec.budgets.iter().enumerate() {
        print!("{:>9}s", b);
        for &m in &spec.methods {
            let d = median(&out.run_deltas(m, bi)).unwrap_or(f64::NAN);
            print!(" {d:>12.3e}");
        }
        println!();
    }
    Ok(())
}
