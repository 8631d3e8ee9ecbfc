//! Blocked bzip2 on its own: split a byte stream, code blocks in parallel,
//! and check the output does not depend on the worker count.
//!
//! cargo run --release --example parallel_blocks

use std::time::Instant;

use pcbz::{available_workers, compress_blocks, decompress_blocks, generate, SynthParams};

fn main() -> pcbz::Result<()> {
    let stack = generate(&SynthParams { width: 1024, height: 1024, frames: 8, ..SynthParams::default() })?;
    let stream: Vec<u8> =
        stack.frames().iter().flat_map(|f| f.samples().iter().flat_map(|v| v.to_be_bytes())).collect();
    let block_size = 2 << 20;

    let mut reference = None;
    for workers in [1, 2, 4, available_workers()] {
        let start = Instant::now();
        let blocks = compress_blocks(&stream, block_size, workers)?;
        let elapsed = start.elapsed();
        println!(
            "{workers} worker(s): {} blocks, {} -> {} bytes in {:.0} ms",
            blocks.plan.block_count,
            stream.len(),
            blocks.compressed_len(),
            elapsed.as_secs_f64() * 1e3
        );
        match &reference {
            None => reference = Some(blocks),
            Some(r) => assert_eq!(r.payloads, blocks.payloads),
        }
    }
    let blocks = reference.expect("at least one run");
    assert_eq!(decompress_blocks(&blocks.payloads, available_workers())?, stream);
    println!("block sizes: {:?}", blocks.block_sizes());
    Ok(())
}
