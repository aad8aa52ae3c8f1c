//! How a TOML file overrides a preset and command-line style overrides win
//! over the file.
//!
//! cargo run --release --example config_layers

use lasernoise::harness::{parse_config, RawConfig};

const FILE: &str = r#"
preset = "n0_100"

[sweep]
methods = ["smallsignal", "tauleap"]
pump_min = 1.0
pump_max = 30.0
pump_points = 4
runs = 3

[tauleap]
epsilon = 0.02
"#;

fn main() -> lasernoise::Result<()> {
    let file = parse_config(FILE)?;
    let mut flags = RawConfig::default();
    flags.sweep.runs = Some(8);
    let spec = file.overlay(flags).sweep_spec()?;
    println!("preset       {:?}", spec.preset);
    println!("gamma_A      {}", spec.params.gamma_a);
    println!("methods      {:?}", spec.methods);
    println!("pump grid    {:?}", spec.pump_grid);
    println!("runs         {} (from the override)", spec.runs_per_point);
    println!("tau epsilon  {}", spec.settings.tauleap_epsilon);

    match parse_config("[sweep]\nrunz = 3\n") {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("\nrejected unknown key: {e}"),
    }
    Ok(())
}
