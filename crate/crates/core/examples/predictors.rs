//! Residuals of every intra predictor on one frame: criterion entropy
//! against the size bzip2 actually reaches.
//!
//! cargo run --release --example predictors

use pcbz::{candidate_entropy, compress_stack, generate, predict_frame, CompressOptions, PredictorSpec, SynthParams};

fn main() -> pcbz::Result<()> {
    let stack = generate(&SynthParams { noise_sigma: 5.0, seed: 11, ..SynthParams::default() })?;
    let frame = &stack.frames()[0];
    println!("{:>4}  {:<24} {:>10} {:>10} {:>9}", "id", "predictor", "entropy", "bytes", "bits/dim");
    for spec in PredictorSpec::all_intra() {
        let residual = predict_frame(frame, spec.intra_id())?;
        let bytes = compress_stack(&stack, &CompressOptions::forced(spec))?.len();
        println!(
            "{:>4}  {:<24} {:>10.4} {:>10} {:>9.3}",
            spec.intra_id(),
            spec.name(),
            candidate_entropy(&residual),
            bytes,
            8.0 * bytes as f64 / frame.pixel_count() as f64
        );
    }
    Ok(())
}
