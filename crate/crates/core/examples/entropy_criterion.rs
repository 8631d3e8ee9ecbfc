//! The selection criterion step by step: approximate BWT, byte-pair
//! histogram, entropy, then the per-frame choice.
//!
//! cargo run --release --example entropy_criterion

use pcbz::criterion::default_candidates;
use pcbz::{approx_bwt, entropy2d, generate, pair_histogram, select_predictor, SynthMode, SynthParams};

fn main() -> pcbz::Result<()> {
    let text = b"banana";
    let bwt = approx_bwt(text);
    println!("approx_bwt(banana) = {}", String::from_utf8_lossy(&bwt));
    println!("pair entropy of banana = {:.4} bits", entropy2d(&pair_histogram(&bwt)));

    for (mode, noise) in [(SynthMode::SmoothLenslet, 5.0), (SynthMode::Beads, 400.0)] {
        let stack = generate(&SynthParams { mode, noise_sigma: noise, ..SynthParams::default() })?;
        let report = select_predictor(&stack.frames()[0], None, &default_candidates(false))?;
        println!("\n{mode}, read noise {noise}:");
        for e in &report.entries {
            let mark = if e.spec == report.selected { "*" } else { " " };
            println!("  {mark} 0x{:02X} {:<24} {:.4}", e.spec.encode(), e.spec.name(), e.entropy_bits);
        }
    }
    Ok(())
}
