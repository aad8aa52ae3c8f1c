//! Exact stationary distribution of the single-emitter chain and its
//! marginals. Pass a path to also write the full (n_p, n_e, probability)
//! table as CSV.
//!
//! cargo run --release --example oracle_distribution [-- out.csv]

use lasernoise::harness::write_distribution;
use lasernoise::oracle::{oracle_statistics, steady_state, OracleConfig};
use lasernoise::Preset;

fn main() -> lasernoise::Result<()> {
    let params = Preset::N0_1.parameters().with_pump(0.5);
    let dist = steady_state(&params, &OracleConfig::default())?;
    let stats = oracle_statistics(&dist);
    println!(
        "N_max = {}, tail mass {:.2e}, residual {:.2e}, solver {:?}",
        dist.n_max, dist.tail_mass, dist.residual, dist.method
    );
    println!(
        "<n_p> = {:.5}  <n_e> = {:.5}  g2(0) = {:.5}  corr = {:.5}",
        stats.mean_np,
        stats.mean_ne,
        stats.g2_0.unwrap(),
        stats.corr_ratio.unwrap()
    );
    println!("\nP(n_p):");
    for (n, p) in dist.photon_marginal().iter().enumerate().take(8) {
        println!(
            "  {n:>2} {p:.6e}  {}",
            "#".repeat((p * 60.0).round() as usize)
        );
    }
    println!("P(n_e = 1) = {:.5}", dist.emitter_marginal()[1]);
    println!(
        "P(n_p = 0, n_e = 1) = {:.5} vs product of marginals {:.5}",
        dist.prob(0, 1),
        dist.photon_marginal()[0] * dist.emitter_marginal()[1]
    );

    if let Some(path) = std::env::args().nth(1) {
        write_distribution(std::path::Path::new(&path), &dist)?;
        println!("wrote {path}");
    }
    Ok(())
}
