//! Time-lapse stacks: the temporal delta competes with intra prediction
//! per frame.
//!
//! cargo run --release --example temporal

use pcbz::{compress_stack_detailed, generate, CompressOptions, FrameStack, SynthParams};

fn report(label: &str, stack: &FrameStack) -> pcbz::Result<()> {
    let off = compress_stack_detailed(stack, &CompressOptions::default())?;
    let on = compress_stack_detailed(stack, &CompressOptions::default().with_temporal(true))?;
    println!(
        "{label}: off {} bytes, on {} bytes ({:.3})",
        off.container.len(),
        on.container.len(),
        on.container.len() as f64 / off.container.len() as f64
    );
    let picks: Vec<String> = on.frames.iter().map(|f| f.predictor.name()).collect();
    println!("  predictors with temporal on: {}", picks.join(", "));
    Ok(())
}

fn main() -> pcbz::Result<()> {
    let still = generate(&SynthParams { noise_sigma: 20.0, ..SynthParams::default() })?.into_frames().remove(0);
    report("10 identical frames", &FrameStack::new(vec![still; 10])?)?;
    for drift in [0.0, 1.0, 4.0] {
        let stack = generate(&SynthParams { frames: 6, drift, noise_sigma: 5.0, seed: 2, ..SynthParams::default() })?;
        report(&format!("drift {drift} px/frame"), &stack)?;
    }
    Ok(())
}
