//! End-to-end compression of frame stacks.
//!
//! Per frame: pick a predictor (entropy criterion or forced), build the
//! residual (temporal delta first when flagged, then intra prediction),
//! serialize it big-endian, code it in fixed-size bzip2 blocks, and record
//! the predictor byte and block table in the container.

use std::time::{Duration, Instant};

use crate::block_codec::{compress_chunks, decompress_chunks, DEFAULT_BLOCK_SIZE};
use crate::container::{container_to_vec, read_container, ContainerHeader, FrameRecord, FLAG_TEMPORAL, HEADER_LEN};
use crate::criterion::{default_candidates, residual_for, select_predictor, EntropyReport};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameStack, PredictorSpec, ResidualFrame};
use crate::parallel::{available_workers, run_with_workers};
use crate::predictors::{temporal_undelta, unpredict_frame};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressOptions {
    /// Candidates for the criterion; `None` means all intra ids, plus their
    /// temporal variants when `temporal` is on.
    pub candidates: Option<Vec<PredictorSpec>>,
    /// Skips the criterion and codes every frame with this predictor. A
    /// temporal spec falls back to its intra part on frame 0.
    pub forced: Option<PredictorSpec>,
    pub block_size: usize,
    pub workers: usize,
    /// Lets frames after the first compete with temporal candidates too.
    pub temporal: bool,
}

impl Default for CompressOptions {
    fn default() -> Self {
        Self {
            candidates: None,
            forced: None,
            block_size: DEFAULT_BLOCK_SIZE,
            workers: available_workers(),
            temporal: false,
        }
    }
}

impl CompressOptions {
    pub fn forced(spec: PredictorSpec) -> Self {
        Self { forced: Some(spec), temporal: spec.temporal(), ..Self::default() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size;
        self
    }

    pub fn with_temporal(mut self, temporal: bool) -> Self {
        self.temporal = temporal;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidOptions("workers must be at least 1".into()));
        }
        if self.block_size == 0 || u32::try_from(self.block_size).is_err() {
            return Err(Error::InvalidOptions(format!(
                "block size {} must be between 1 and {}",
                self.block_size,
                u32::MAX
            )));
        }
        if let Some(forced) = self.forced {
            if forced.temporal() && !self.temporal {
                return Err(Error::InvalidOptions(format!("forced {forced} needs temporal mode")));
            }
        }
        if let Some(c) = &self.candidates {
            if c.is_empty() {
                return Err(Error::InvalidOptions("candidate set is empty".into()));
            }
            if !self.temporal && c.iter().any(PredictorSpec::temporal) {
                return Err(Error::InvalidOptions("temporal candidates need temporal mode".into()));
            }
        }
        Ok(())
    }

    /// Candidates usable for a frame with or without a predecessor.
    fn candidates_for(&self, has_prev: bool) -> Vec<PredictorSpec> {
        let all = self.candidates.clone().unwrap_or_else(|| default_candidates(self.temporal));
        if has_prev {
            return all;
        }
        let mut intra: Vec<_> = all.into_iter().map(|s| s.with_temporal(false)).collect();
        intra.sort_by_key(PredictorSpec::encode);
        intra.dedup();
        intra
    }
}

#[derive(Debug, Clone)]
pub struct FrameSummary {
    pub predictor: PredictorSpec,
    /// Present when the criterion ran.
    pub report: Option<EntropyReport>,
    pub compressed_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct CompressOutcome {
    pub container: Vec<u8>,
    pub frames: Vec<FrameSummary>,
    /// Time spent in the entropy criterion.
    pub selection_time: Duration,
    pub total_time: Duration,
}

pub fn compress_stack(stack: &FrameStack, opts: &CompressOptions) -> Result<Vec<u8>> {
    Ok(compress_stack_detailed(stack, opts)?.container)
}

pub fn compress_stack_detailed(stack: &FrameStack, opts: &CompressOptions) -> Result<CompressOutcome> {
    opts.validate()?;
    let start = Instant::now();
    let (width, height, frame_count) = dims_u32(stack)?;
    let geometry = stack.geometry();

    let (frames, payloads, selection_time) = run_with_workers(opts.workers, || {
        let mut selection_time = Duration::ZERO;
        let mut summaries = Vec::with_capacity(stack.len());
        let mut payloads = Vec::with_capacity(stack.len());
        let mut prev: Option<&Frame> = None;
        for frame in stack.frames() {
            let (predictor, report) = match opts.forced {
                Some(spec) => (spec.with_temporal(spec.temporal() && prev.is_some()), None),
                None => {
                    let t = Instant::now();
                    let report = select_predictor(frame, prev, &opts.candidates_for(prev.is_some()))?;
                    selection_time += t.elapsed();
                    (report.selected, Some(report))
                }
            };
            let bytes = residual_for(frame, prev, predictor)?.to_be_bytes();
            let blocks = compress_chunks(&bytes, opts.block_size)?;
            summaries.push(FrameSummary {
                predictor,
                report,
                compressed_bytes: blocks.iter().map(|b| b.len() as u64).sum(),
            });
            payloads.push(blocks);
            prev = Some(frame);
        }
        Ok((summaries, payloads, selection_time))
    })?;

    let records: Vec<FrameRecord> = frames
        .iter()
        .zip(&payloads)
        .map(|(s, blocks)| FrameRecord {
            predictor: s.predictor,
            block_sizes: blocks.iter().map(|b| b.len() as u64).collect(),
        })
        .collect();
    let header = ContainerHeader {
        flags: if records.iter().any(|r| r.predictor.temporal()) { FLAG_TEMPORAL } else { 0 },
        width,
        height,
        frame_count,
        pitch_x: geometry.pitch_x(),
        pitch_y: geometry.pitch_y(),
        block_size: opts.block_size as u32,
    };
    let container = container_to_vec(&header, &records, &payloads)?;
    Ok(CompressOutcome { container, frames, selection_time, total_time: start.elapsed() })
}

fn dims_u32(stack: &FrameStack) -> Result<(u32, u32, u32)> {
    let conv = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::InvalidFrame(format!("{what} {v} does not fit the container")))
    };
    Ok((conv(stack.width(), "width")?, conv(stack.height(), "height")?, conv(stack.len(), "frame count")?))
}

pub fn decompress_stack(data: &[u8], workers: usize) -> Result<FrameStack> {
    let container = read_container(data)?;
    let header = &container.header;
    let geometry = header.geometry()?;
    let (w, h) = (header.width as usize, header.height as usize);
    let expected = 2 * w as u64 * h as u64;

    let frames = run_with_workers(workers, || {
        let mut frames: Vec<Frame> = Vec::with_capacity(container.records.len());
        for (f, (record, blocks)) in container.records.iter().zip(&container.payloads).enumerate() {
            let bytes = decompress_chunks(blocks).map_err(|e| match e {
                Error::BlockDecode { index, source } => Error::CorruptContainer {
                    offset: (blocks[index].as_ptr() as usize - data.as_ptr() as usize) as u64,
                    frame: Some(f as u32),
                    block: Some(index as u32),
                    reason: format!("bzip2 block does not decode: {source}"),
                },
                other => other,
            })?;
            if bytes.len() as u64 != expected {
                return Err(Error::CorruptContainer {
                    offset: blocks
                        .first()
                        .map_or(HEADER_LEN as u64, |b| (b.as_ptr() as usize - data.as_ptr() as usize) as u64),
                    frame: Some(f as u32),
                    block: None,
                    reason: format!("frame decodes to {} bytes, expected {expected}", bytes.len()),
                });
            }
            let residual = ResidualFrame::from_be_bytes(w, h, &bytes, geometry)?;
            let mut frame = unpredict_frame(&residual, record.predictor.intra_id())?;
            if record.predictor.temporal() {
                let prev = frames.last().ok_or_else(|| Error::CorruptHeader("frame 0 is marked temporal".into()))?;
                frame = temporal_undelta(&frame, prev)?;
            }
            frames.push(frame);
        }
        Ok(frames)
    })?;
    FrameStack::new(frames)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub uncompressed_bytes: u64,
    pub container_bytes: u64,
    pub compression_ratio: f64,
    pub bits_per_dim: f64,
    pub compress_time: Duration,
    pub decompress_time: Duration,
}

impl Metrics {
    pub fn new(stack: &FrameStack, container_bytes: u64, compress_time: Duration, decompress_time: Duration) -> Self {
        let uncompressed_bytes = stack.uncompressed_bytes();
        let dims = stack.width() as f64 * stack.height() as f64 * stack.len() as f64;
        Self {
            uncompressed_bytes,
            container_bytes,
            compression_ratio: uncompressed_bytes as f64 / container_bytes as f64,
            bits_per_dim: 8.0 * container_bytes as f64 / dims,
            compress_time,
            decompress_time,
        }
    }
}

/// Compresses, decompresses and checks the round trip, returning the
/// container with its size and timing figures.
pub fn measure(stack: &FrameStack, opts: &CompressOptions) -> Result<(CompressOutcome, Metrics)> {
    let outcome = compress_stack_detailed(stack, opts)?;
    let t = Instant::now();
    let back = decompress_stack(&outcome.container, opts.workers)?;
    let decompress_time = t.elapsed();
    if &back != stack {
        return Err(Error::CorruptContainer {
            offset: 0,
            frame: None,
            block: None,
            reason: "round trip did not reproduce the input".into(),
        });
    }
    let metrics = Metrics::new(stack, outcome.container.len() as u64, outcome.total_time, decompress_time);
    Ok((outcome, metrics))
}
