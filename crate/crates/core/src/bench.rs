//! Predictor x noise sweeps over synthetic frames.
//!
//! Every sample is compressed once per candidate with the predictor forced,
//! and once in auto mode to learn which candidate the criterion picks.

use std::io::Write;

use crate::criterion::default_candidates;
use crate::error::Result;
use crate::frame::PredictorSpec;
use crate::pipeline::{compress_stack_detailed, measure, CompressOptions};
use crate::synth::{generate, SynthMode, SynthParams};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub modes: Vec<SynthMode>,
    pub noise_levels: Vec<f64>,
    /// One sample per (mode, noise, seed).
    pub seeds: Vec<u64>,
    /// Template for every sample; mode, noise and seed are overwritten.
    pub base: SynthParams,
    pub candidates: Vec<PredictorSpec>,
    pub options: CompressOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            modes: vec![SynthMode::SmoothLenslet, SynthMode::Beads],
            noise_levels: vec![0.0, 50.0, 200.0, 800.0],
            seeds: vec![0],
            base: SynthParams::default(),
            candidates: default_candidates(false),
            options: CompressOptions::default(),
        }
    }
}

pub const CSV_HEADER: &str = "sample_id,mode,noise_sigma,predictor_byte,entropy_bits,container_bytes,bits_per_dim,ratio,compress_ms,decompress_ms,selected_flag";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub sample_id: usize,
    pub mode: SynthMode,
    pub noise_sigma: f64,
    pub predictor: PredictorSpec,
    pub entropy_bits: f64,
    pub container_bytes: u64,
    pub bits_per_dim: f64,
    pub ratio: f64,
    pub compress_ms: f64,
    pub decompress_ms: f64,
    pub selected: bool,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{},{:.6},{:.6},{:.3},{:.3},{}",
            self.sample_id,
            self.mode,
            self.noise_sigma,
            self.predictor.encode(),
            self.entropy_bits,
            self.container_bytes,
            self.bits_per_dim,
            self.ratio,
            self.compress_ms,
            self.decompress_ms,
            u8::from(self.selected)
        )
    }
}

/// Per-sample digest of the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub sample_id: usize,
    pub mode: SynthMode,
    pub noise_sigma: f64,
    pub seed: u64,
    pub selected: PredictorSpec,
    pub selected_bits_per_dim: f64,
    pub identity_bits_per_dim: Option<f64>,
    pub best: PredictorSpec,
    pub best_bits_per_dim: f64,
}

impl SampleSummary {
    /// Bits per pixel saved by the best candidate relative to identity.
    pub fn best_improvement(&self) -> Option<f64> {
        self.identity_bits_per_dim.map(|id| id - self.best_bits_per_dim)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub samples: Vec<SampleSummary>,
}

impl BenchReport {
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{}", r.to_csv())?;
        }
        Ok(())
    }
}

pub fn run_sweep(config: &BenchConfig) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    let mut sample_id = 0;
    for &mode in &config.modes {
        for &noise_sigma in &config.noise_levels {
            for &seed in &config.seeds {
                let params = SynthParams { mode, noise_sigma, seed, ..config.base.clone() };
                let stack = generate(&params)?;
                let auto_opts = CompressOptions {
                    candidates: Some(config.candidates.clone()),
                    forced: None,
                    ..config.options.clone()
                };
                let auto = compress_stack_detailed(&stack, &auto_opts)?;
                let selected = auto.frames[0].predictor;
                let entropy = auto.frames[0].report.clone().expect("auto mode runs the criterion");

                let first_row = report.rows.len();
                for &spec in &config.candidates {
                    let opts = CompressOptions { forced: Some(spec), candidates: None, ..config.options.clone() };
                    let (_, m) = measure(&stack, &opts)?;
                    report.rows.push(BenchRow {
                        sample_id,
                        mode,
                        noise_sigma,
                        predictor: spec,
                        entropy_bits: entropy.entropy_of(spec).unwrap_or(f64::NAN),
                        container_bytes: m.container_bytes,
                        bits_per_dim: m.bits_per_dim,
                        ratio: m.compression_ratio,
                        compress_ms: m.compress_time.as_secs_f64() * 1e3,
                        decompress_ms: m.decompress_time.as_secs_f64() * 1e3,
                        selected: spec == selected,
                    });
                }
                let rows = &report.rows[first_row..];
                let best = rows
                    .iter()
                    .min_by(|a, b| a.container_bytes.cmp(&b.container_bytes))
                    .expect("candidate set is non-empty");
                let bpd_of = |spec: PredictorSpec| rows.iter().find(|r| r.predictor == spec).map(|r| r.bits_per_dim);
                report.samples.push(SampleSummary {
                    sample_id,
                    mode,
                    noise_sigma,
                    seed,
                    selected,
                    selected_bits_per_dim: bpd_of(selected).expect("selected is a candidate"),
                    identity_bits_per_dim: bpd_of(PredictorSpec::IDENTITY),
                    best: best.predictor,
                    best_bits_per_dim: best.bits_per_dim,
                });
                sample_id += 1;
            }
        }
    }
    Ok(report)
}
