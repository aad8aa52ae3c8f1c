//! Numerical Langevin integration below threshold for a single emitter.
//! With about one photon in the cavity the Gaussian noise model breaks down
//! and g2(0) comes out far from the exact value, under either negativity
//! policy.
//!
//! cargo run --release --example langevin_failure

use lasernoise::harness::{
    analytic_statistics, run_single, Method, RunPlan, SimulationSettings, Variant,
};
use lasernoise::langevin::NegativityPolicy;
use lasernoise::trajectory::NullObserver;
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    println!(
        "{:>9} {:>9} {:>11} {:>11} {:>12}",
        "gamma_P", "exact", "clamp", "reflect", "corrections"
    );
    for pump in [0.01, 0.05, 0.2, 1.0] {
        let params = Preset::N0_1.parameters().with_pump(pump);
        let exact = analytic_statistics(Method::Oracle, &params, &SimulationSettings::default())?;
        let mut cols = Vec::new();
        let mut corrections = 0;
        for policy in [NegativityPolicy::Clamp, NegativityPolicy::Reflect] {
            let settings = SimulationSettings {
                negativity_policy: policy,
                max_steps: 5_000_000,
                ..SimulationSettings::default()
            };
            let plan = RunPlan::for_method(Method::Langevin, &params, &settings)?;
            let out = run_single(
                Method::Langevin,
                &params,
                &settings,
                &plan,
                Variant::Base,
                3,
                &mut NullObserver,
            )?;
            cols.push(out.stats.g2_0.unwrap_or(f64::NAN));
            corrections = out.report.corrections;
        }
        println!(
            "{pump:>9} {:>9.4} {:>11.4} {:>11.4} {corrections:>12}",
            exact.g2_0.unwrap(),
            cols[0],
            cols[1]
        );
    }
    Ok(())
}
