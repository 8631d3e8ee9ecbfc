//! PGM and raw+sidecar files: write a stack both ways, read it back and
//! compress from disk.
//!
//! cargo run --release --example image_io [dir]

use std::path::PathBuf;

use pcbz::io::{read_image, read_raw_stack, sidecar_path, write_image, write_raw_stack};
use pcbz::{compress_stack, generate, CompressOptions, SynthMode, SynthParams};

fn main() -> pcbz::Result<()> {
    let dir = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let stack =
        generate(&SynthParams { mode: SynthMode::Beads, frames: 2, noise_sigma: 30.0, ..SynthParams::default() })?;

    let pgm = dir.join("beads.pgm");
    write_image(&pgm, &stack)?;
    // PGM has no room for the lenslet pitch; the caller supplies it.
    assert_eq!(read_image(&pgm, stack.geometry())?, stack);

    let raw = dir.join("beads.raw");
    write_raw_stack(&raw, &stack)?;
    assert_eq!(read_raw_stack(&raw)?, stack);
    print!("{}:\n{}", sidecar_path(&raw).display(), std::fs::read_to_string(sidecar_path(&raw))?);

    let packed = compress_stack(&read_raw_stack(&raw)?, &CompressOptions::default())?;
    let out = dir.join("beads.pcbz");
    std::fs::write(&out, &packed)?;
    println!("{} -> {} ({} bytes)", pgm.display(), out.display(), packed.len());
    Ok(())
}
