//! Tau-leaping at two accuracy settings next to exact SSA and the master
//! equation, at one pump of the n0 = 10 preset.
//!
//! cargo run --release --example tau_leaping

use lasernoise::harness::{
    analytic_statistics, run_seed, run_single, Method, RunPlan, SimulationSettings, Variant,
};
use lasernoise::stats::{aggregate, RunStatistics};
use lasernoise::trajectory::NullObserver;
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    let params = Preset::N0_10.parameters().with_pump(2.0);
    let base = SimulationSettings {
        t_end: Some(3000.0),
        ..SimulationSettings::default()
    };
    let exact = analytic_statistics(Method::Oracle, &params, &base)?;
    println!(
        "{:<16} {:>10} {:>9} {:>9} {:>12}",
        "method", "<n_p>", "g2(0)", "RIN", "steps/run"
    );
    println!(
        "{:<16} {:>10.4} {:>9.4} {:>9.4} {:>12}",
        "master eq.",
        exact.mean_np,
        exact.g2_0.unwrap(),
        exact.rin.unwrap(),
        "-"
    );

    for (label, method, eps) in [
        ("ssa", Method::Ssa, 0.01),
        ("tau eps=0.03", Method::Tauleap, 0.03),
        ("tau eps=0.01", Method::Tauleap, 0.01),
    ] {
        let settings = SimulationSettings {
            tauleap_epsilon: eps,
            ..base.clone()
        };
        let plan = RunPlan::for_method(method, &params, &settings)?;
        let mut runs: Vec<RunStatistics> = Vec::new();
        let mut steps = 0;
        for r in 0..4 {
            let out = run_single(
                method,
                &params,
                &settings,
                &plan,
                Variant::Base,
                run_seed(1, method, Variant::Base, 0, r),
                &mut NullObserver,
            )?;
            steps += out.report.steps;
            runs.push(out.stats);
        }
        let s = aggregate(&runs, None);
        println!(
            "{:<16} {:>10.4} {:>9.4} {:>9.4} {:>12}",
            label,
            s.mean_np.unwrap(),
            s.g2_0.unwrap(),
            s.rin.unwrap(),
            steps / 4
        );
    }
    Ok(())
}
