//! Lossless compression for 16-bit light-field microscopy frames.
//!
//! Each frame is decorrelated by one of thirteen causal predictors that
//! look at pixel-adjacent neighbors, at the same offset in neighboring
//! lenslets, or at both. A fast entropy criterion picks the predictor per
//! frame, optionally after a delta against the previous frame. The residual
//! is coded as independent bzip2 blocks in parallel and packed into a
//! self-describing `.pcbz` container.
//!
//! ```
//! use pcbz::{compress_stack, decompress_stack, CompressOptions, Frame, FrameStack, LensletGeometry};
//!
//! let geometry = LensletGeometry::new(5, 5)?;
//! let frame = Frame::from_fn(40, 30, geometry, |x, y| (x * 100 + y * 7) as u16)?;
//! let stack = FrameStack::single(frame);
//! let bytes = compress_stack(&stack, &CompressOptions::default())?;
//! assert_eq!(decompress_stack(&bytes, 1)?, stack);
//! # Ok::<(), pcbz::Error>(())
//! ```

pub mod bench;
pub mod block_codec;
pub mod cli;
pub mod container;
pub mod criterion;
pub mod error;
pub mod frame;
pub mod io;
mod parallel;
pub mod pipeline;
pub mod predictors;
pub mod synth;

pub use block_codec::{compress_blocks, decompress_blocks, BlockPlan, CompressedBlocks, DEFAULT_BLOCK_SIZE};
pub use container::{read_container, write_container, Container, ContainerHeader, FrameRecord};
pub use criterion::{
    approx_bwt, candidate_entropy, entropy2d, pair_histogram, select_predictor, EntropyReport, PairHistogram,
};
pub use error::{Error, Result};
pub use frame::{Frame, FrameStack, LensletGeometry, PredictorSpec, ResidualFrame};
pub use parallel::available_workers;
pub use pipeline::{compress_stack, compress_stack_detailed, decompress_stack, measure, CompressOptions, Metrics};
pub use predictors::{predict_frame, temporal_delta, temporal_undelta, unpredict_frame};
pub use synth::{generate, SynthMode, SynthParams};
