//! Closed-form small-signal statistics across the lasing threshold of the
//! n0 = 100 preset, and the photon-number spectrum at one pump.
//!
//! cargo run --release --example small_signal

use lasernoise::smallsignal::{linearize, small_signal_solution};
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    let params = Preset::N0_100.parameters();
    println!(
        "{:>8} {:>12} {:>10} {:>12} {:>10}",
        "gamma_P", "<n_p>", "g2(0)", "RIN", "omega_R"
    );
    for pump in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0] {
        let sol = linearize(&params.with_pump(pump))?;
        match sol.analytic_statistics() {
            Ok(s) => println!(
                "{pump:>8} {:>12.4e} {:>10.5} {:>12.4e} {:>10.4}",
                sol.n_bar_a,
                s.g2_0,
                s.rin,
                sol.omega_r()
            ),
            Err(e) => println!("{pump:>8} {e}"),
        }
    }

    let sol = small_signal_solution(&params.with_pump(5.0))?;
    println!("\nS(omega) at gamma_P = 5, variance {:.4e}", sol.var_np);
    let w_r = sol.omega_r();
    for f in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0] {
        println!(
            "  omega = {:>6.2} omega_R: {:.4e}",
            f,
            sol.intensity_spectrum(f * w_r)
        );
    }
    Ok(())
}
