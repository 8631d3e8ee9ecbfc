//! Predictor selection by two-dimensional entropy.
//!
//! A candidate residual is serialized to bytes (high byte first), passed
//! through a cheap approximation of the Burrows-Wheeler transform that
//! orders rotations by their first byte only, and scored by the Shannon
//! entropy of the overlapping adjacent-byte pairs of the result. The
//! candidate with the lowest score wins.
//!
//! The first-byte-only sort is a single stable counting sort, so the whole
//! score is linear in the frame size. [`candidate_entropy`] fuses the three
//! stages and never materializes the transformed string.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, PredictorSpec, ResidualFrame};
use crate::predictors::{predict_frame, temporal_delta, ResidualRows};

const PAIR_BINS: usize = 1 << 16;

/// Stably sorts the cyclic rotations of `s` by their first byte and returns
/// the last byte of each rotation in sorted order.
///
/// This is not the canonical BWT: rotations sharing a first byte keep their
/// generation order instead of being compared further.
pub fn approx_bwt(s: &[u8]) -> Vec<u8> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut next = [0usize; 256];
    for &b in s {
        next[usize::from(b)] += 1;
    }
    let mut acc = 0;
    for slot in next.iter_mut() {
        let count = *slot;
        *slot = acc;
        acc += count;
    }
    let mut out = vec![0u8; n];
    for (i, &b) in s.iter().enumerate() {
        let prev = if i == 0 { s[n - 1] } else { s[i - 1] };
        let slot = &mut next[usize::from(b)];
        out[*slot] = prev;
        *slot += 1;
    }
    out
}

/// Counts of overlapping byte pairs, indexed by `first << 8 | second`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl PairHistogram {
    pub fn empty() -> Self {
        Self { counts: vec![0; PAIR_BINS], total: 0 }
    }

    /// Builds a histogram from explicit bin counts. `counts` must have
    /// 65536 entries.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() != PAIR_BINS {
            return Err(Error::InvalidFrame(format!("pair histogram needs {PAIR_BINS} bins, got {}", counts.len())));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, pair: u16) -> u64 {
        self.counts[usize::from(pair)]
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

pub fn pair_histogram(s: &[u8]) -> PairHistogram {
    let mut h = PairHistogram::empty();
    for w in s.windows(2) {
        h.counts[usize::from(w[0]) << 8 | usize::from(w[1])] += 1;
    }
    h.total = s.len().saturating_sub(1) as u64;
    h
}

/// Shannon entropy of the pair distribution in bits; 0 for an empty
/// histogram.
pub fn entropy2d(h: &PairHistogram) -> f64 {
    entropy_of_counts(h.counts.iter().copied(), h.total)
}

fn entropy_of_counts(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let e: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum();
    // A single populated bin sums to -0.0.
    (-e).max(0.0)
}

/// Entropy of `s` after [`approx_bwt`], composed stage by stage.
pub fn byte_string_entropy(s: &[u8]) -> f64 {
    entropy2d(&pair_histogram(&approx_bwt(s)))
}

/// Scores a residual frame: big-endian bytes, approximate BWT, pair
/// entropy.
pub fn candidate_entropy(residual: &ResidualFrame) -> f64 {
    let mut acc = SampleEntropy::new();
    acc.push(residual.samples());
    acc.finish()
}

/// Residual of `frame` under `intra_id`, scored without materializing it.
fn score_intra(frame: &Frame, intra_id: u8) -> Result<f64> {
    let rows = ResidualRows::new(frame, intra_id)?;
    let mut acc = SampleEntropy::new();
    let mut buf = vec![0u16; frame.width()];
    for y in 0..frame.height() {
        rows.row(y, &mut buf);
        acc.push(&buf);
    }
    Ok(acc.finish())
}

/// Streaming form of `byte_string_entropy(be_bytes(samples))`.
///
/// The transformed string lists, for each byte value `v` in ascending
/// order, the predecessors of every occurrence of `v` in position order.
/// Pairs inside one bucket are consecutive predecessors of the same value;
/// the remaining pairs join the last entry of a bucket with the first entry
/// of the next non-empty one.
///
/// The cyclic predecessor of byte 0 is the final byte, which is unknown
/// until the end, so byte 0 is folded in by [`SampleEntropy::finish`].
struct SampleEntropy {
    // One row per bucket-predecessor byte plus a discard row for the first
    // entry of each bucket, which has no in-bucket pair.
    counts: Box<[u32; PAIR_BINS + 256]>,
    // Predecessor most recently emitted into each bucket, or `EMPTY`.
    last: [u16; 256],
    first: [u8; 256],
    head: Option<u8>,
    prev_lo: u8,
    bytes: u64,
}

const EMPTY: u16 = 256;

impl SampleEntropy {
    fn new() -> Self {
        Self {
            counts: vec![0; PAIR_BINS + 256].into_boxed_slice().try_into().expect("fixed length"),
            last: [EMPTY; 256],
            first: [0; 256],
            head: None,
            prev_lo: 0,
            bytes: 0,
        }
    }

    #[inline(always)]
    fn emit(&mut self, v: u8, pred: u8) {
        let v = usize::from(v);
        let slot = self.last[v];
        self.counts[usize::from(slot) << 8 | usize::from(pred)] += 1;
        if slot == EMPTY {
            self.first[v] = pred;
        }
        self.last[v] = u16::from(pred);
    }

    fn push(&mut self, samples: &[u16]) {
        let Some((&s0, rest)) = samples.split_first() else { return };
        let [hi, lo] = s0.to_be_bytes();
        match self.head {
            None => self.head = Some(hi),
            Some(_) => self.emit(hi, self.prev_lo),
        }
        self.emit(lo, hi);
        let mut prev_lo = lo;
        for &s in rest {
            let [hi, lo] = s.to_be_bytes();
            self.emit(hi, prev_lo);
            self.emit(lo, hi);
            prev_lo = lo;
        }
        self.prev_lo = prev_lo;
        self.bytes += 2 * samples.len() as u64;
    }

    /// Inserts `pred` as the earliest entry of bucket `v`.
    fn prepend(&mut self, v: u8, pred: u8) {
        let v = usize::from(v);
        if self.last[v] != EMPTY {
            self.counts[usize::from(pred) << 8 | usize::from(self.first[v])] += 1;
        } else {
            self.last[v] = u16::from(pred);
        }
        self.first[v] = pred;
    }

    fn finish(mut self) -> f64 {
        let Some(head) = self.head else { return 0.0 };
        // Byte 0 is the earliest occurrence in its bucket.
        self.prepend(head, self.prev_lo);

        let mut tail: Option<u8> = None;
        for v in 0..256 {
            if self.last[v] == EMPTY {
                continue;
            }
            if let Some(t) = tail {
                self.counts[usize::from(t) << 8 | usize::from(self.first[v])] += 1;
            }
            tail = Some(self.last[v] as u8);
        }
        entropy_of_counts(self.counts[..PAIR_BINS].iter().map(|&c| u64::from(c)), self.bytes - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub spec: PredictorSpec,
    pub entropy_bits: f64,
}

/// Scores for every evaluated candidate, ordered by encoded spec byte.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub entries: Vec<CandidateScore>,
    pub selected: PredictorSpec,
}

impl EntropyReport {
    pub fn entropy_of(&self, spec: PredictorSpec) -> Option<f64> {
        self.entries.iter().find(|e| e.spec == spec).map(|e| e.entropy_bits)
    }

    pub fn selected_entropy(&self) -> f64 {
        self.entropy_of(self.selected).expect("selected spec is always scored")
    }
}

/// The residual a frame is coded as under `spec`: temporal delta against
/// `prev` first when flagged, then intra prediction.
pub fn residual_for(frame: &Frame, prev: Option<&Frame>, spec: PredictorSpec) -> Result<ResidualFrame> {
    if spec.temporal() {
        let prev = prev.ok_or_else(|| Error::InvalidCandidate(format!("{spec} needs a previous frame")))?;
        predict_frame(&temporal_delta(frame, prev)?, spec.intra_id())
    } else {
        predict_frame(frame, spec.intra_id())
    }
}

/// Scores every candidate and picks the lowest entropy, ties going to the
/// smaller encoded byte.
///
/// Candidates are scored in parallel on the current rayon pool; the result
/// does not depend on scheduling or on the order of `candidates`.
pub fn select_predictor(frame: &Frame, prev: Option<&Frame>, candidates: &[PredictorSpec]) -> Result<EntropyReport> {
    let mut specs = candidates.to_vec();
    specs.sort_by_key(PredictorSpec::encode);
    specs.dedup();
    if specs.is_empty() {
        return Err(Error::InvalidCandidate("candidate set is empty".into()));
    }
    if let Some(prev) = prev {
        if !prev.same_shape(frame) {
            return Err(Error::ShapeMismatch("previous frame differs in shape".into()));
        }
    }
    let delta = match (specs.iter().any(PredictorSpec::temporal), prev) {
        (true, Some(prev)) => Some(temporal_delta(frame, prev)?),
        (true, None) => return Err(Error::InvalidCandidate("temporal candidates need a previous frame".into())),
        (false, _) => None,
    };
    let entries = specs
        .par_iter()
        .map(|&spec| {
            let source = if spec.temporal() { delta.as_ref().unwrap() } else { frame };
            Ok(CandidateScore { spec, entropy_bits: score_intra(source, spec.intra_id())? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = entries[0];
    for e in &entries[1..] {
        if e.entropy_bits < best.entropy_bits {
            best = *e;
        }
    }
    Ok(EntropyReport { entries, selected: best.spec })
}

/// All intra candidates, plus their temporal variants when `temporal`.
pub fn default_candidates(temporal: bool) -> Vec<PredictorSpec> {
    if temporal {
        PredictorSpec::all_with_temporal().collect()
    } else {
        PredictorSpec::all_intra().collect()
    }
}
