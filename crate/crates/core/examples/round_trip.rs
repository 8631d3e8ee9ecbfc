//! Compress a synthetic light-field stack and restore it bit-exactly.
//!
//! cargo run --release --example round_trip

use pcbz::{generate, measure, CompressOptions, SynthParams};

fn main() -> pcbz::Result<()> {
    let stack =
        generate(&SynthParams { width: 600, height: 600, frames: 4, noise_sigma: 10.0, ..SynthParams::default() })?;
    let (outcome, m) = measure(&stack, &CompressOptions::default())?;

    println!("{} frame(s) {}x{}, pitch {}", stack.len(), stack.width(), stack.height(), stack.geometry());
    println!("input      {:>10} bytes", m.uncompressed_bytes);
    println!("container  {:>10} bytes", m.container_bytes);
    println!("ratio      {:>10.3}", m.compression_ratio);
    println!("bits/dim   {:>10.3}", m.bits_per_dim);
    println!(
        "compress {:.1} ms (selection {:.1} ms), decompress {:.1} ms",
        m.compress_time.as_secs_f64() * 1e3,
        outcome.selection_time.as_secs_f64() * 1e3,
        m.decompress_time.as_secs_f64() * 1e3
    );
    for (i, f) in outcome.frames.iter().enumerate() {
        println!("frame {i}: {} ({} bytes)", f.predictor.name(), f.compressed_bytes);
    }
    Ok(())
}
