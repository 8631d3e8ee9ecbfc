//! Fixed-size block splitting with independent bzip2 streams per block.
//!
//! Splitting depends only on the configured block size, never on the
//! worker count, so output bytes are the same on every machine. Each
//! payload is a complete `BZh9` stream that any bzip2 decoder accepts.

use std::io::{Read, Write};

use bzip2::read::BzDecoder;
use bzip2::write::BzEncoder;
use bzip2::Compression;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::run_with_workers;

pub const DEFAULT_BLOCK_SIZE: usize = 4 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPlan {
    pub block_size: usize,
    pub block_count: usize,
}

impl BlockPlan {
    pub fn new(stream_len: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidOptions("block size must be at least 1 byte".into()));
        }
        Ok(Self { block_size, block_count: stream_len.div_ceil(block_size) })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlocks {
    pub plan: BlockPlan,
    pub payloads: Vec<Vec<u8>>,
}

impl CompressedBlocks {
    pub fn block_sizes(&self) -> Vec<u64> {
        self.payloads.iter().map(|p| p.len() as u64).collect()
    }

    pub fn compressed_len(&self) -> u64 {
        self.payloads.iter().map(|p| p.len() as u64).sum()
    }
}

pub fn compress_blocks(stream: &[u8], block_size: usize, workers: usize) -> Result<CompressedBlocks> {
    let plan = BlockPlan::new(stream.len(), block_size)?;
    let payloads = run_with_workers(workers, || compress_chunks(stream, block_size))?;
    Ok(CompressedBlocks { plan, payloads })
}

/// Compresses on the current rayon pool.
pub(crate) fn compress_chunks(stream: &[u8], block_size: usize) -> Result<Vec<Vec<u8>>> {
    stream.par_chunks(block_size).map(encode_block).collect()
}

fn encode_block(block: &[u8]) -> Result<Vec<u8>> {
    let mut enc = BzEncoder::new(Vec::with_capacity(block.len() / 2 + 64), Compression::best());
    enc.write_all(block)?;
    Ok(enc.finish()?)
}

/// Decodes every payload and concatenates the results in block order.
pub fn decompress_blocks<P: AsRef<[u8]> + Sync>(payloads: &[P], workers: usize) -> Result<Vec<u8>> {
    run_with_workers(workers, || decompress_chunks(payloads))
}

pub(crate) fn decompress_chunks<P: AsRef<[u8]> + Sync>(payloads: &[P]) -> Result<Vec<u8>> {
    let blocks = payloads
        .par_iter()
        .enumerate()
        .map(|(index, p)| decode_block(p.as_ref()).map_err(|source| Error::BlockDecode { index, source }))
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.concat())
}

/// Decodes exactly one bzip2 stream that must span the whole payload.
pub fn decode_block(payload: &[u8]) -> std::io::Result<Vec<u8>> {
    let mut dec = BzDecoder::new(payload);
    let mut out = Vec::new();
    dec.read_to_end(&mut out)?;
    let consumed = dec.total_in();
    if consumed != payload.len() as u64 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{} trailing bytes after bzip2 stream", payload.len() as u64 - consumed),
        ));
    }
    Ok(out)
}
