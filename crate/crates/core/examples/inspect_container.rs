//! Walk the container layout: header, per-frame records, payload blocks.
//!
//! cargo run --release --example inspect_container [file.pcbz]

use pcbz::container::overhead_len;
use pcbz::{compress_stack, generate, read_container, CompressOptions, SynthParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = match std::env::args_os().nth(1) {
        Some(path) => std::fs::read(path)?,
        None => {
            let stack = generate(&SynthParams { frames: 3, drift: 1.0, ..SynthParams::default() })?;
            compress_stack(&stack, &CompressOptions::default().with_temporal(true).with_block_size(16 << 10))?
        }
    };
    let c = read_container(&data)?;
    let h = &c.header;
    println!("{}x{} x {} frame(s), pitch {}x{}", h.width, h.height, h.frame_count, h.pitch_x, h.pitch_y);
    println!("temporal {}, block size {}", h.uses_temporal(), h.block_size);
    println!("overhead {} of {} bytes", overhead_len(&c.records), data.len());
    for (i, (r, blocks)) in c.records.iter().zip(&c.payloads).enumerate() {
        println!(
            "frame {i}: predictor 0x{:02X} ({}), {} bytes",
            r.predictor.encode(),
            r.predictor.name(),
            r.payload_len()
        );
        for (b, payload) in blocks.iter().enumerate() {
            println!("  block {b}: {} bytes, starts {:02X?}", payload.len(), &payload[..4]);
        }
    }
    Ok(())
}
