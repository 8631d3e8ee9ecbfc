//! Predictor x noise sweep on both synthetic scene types, written as CSV.
//!
//! cargo run --release --example snr_sweep [out.csv]

use pcbz::bench::{run_sweep, BenchConfig};
use pcbz::SynthParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = BenchConfig {
        noise_levels: vec![0.0, 10.0, 50.0, 200.0, 800.0],
        base: SynthParams { width: 300, height: 300, ..SynthParams::default() },
        ..BenchConfig::default()
    };
    let report = run_sweep(&config)?;
    for s in &report.samples {
        println!(
            "{:<15} noise {:>5}: selected {:<24} {:.3} bits/dim, identity {:.3}, best saves {:.3}",
            s.mode.name(),
            s.noise_sigma,
            s.selected.name(),
            s.selected_bits_per_dim,
            s.identity_bits_per_dim.unwrap_or(f64::NAN),
            s.best_improvement().unwrap_or(f64::NAN)
        );
    }
    if let Some(path) = std::env::args_os().nth(1) {
        report.write_csv(&mut std::fs::File::create(&path)?)?;
        println!("wrote {}", path.to_string_lossy());
    }
    Ok(())
}
