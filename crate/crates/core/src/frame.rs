//! Domain types shared by every stage: lenslet geometry, frames, stacks,
//! residual ("symbol") images and the one-byte predictor identifier.

use std::fmt;

use crate::error::{Error, Result};

/// Pixel pitch of the microlens array on the sensor.
///
/// A pitch of `1x1` makes lenslet-stride neighbors coincide with the
/// pixel-adjacent ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LensletGeometry {
    pitch_x: u16,
    pitch_y: u16,
}

impl LensletGeometry {
    pub fn new(pitch_x: u16, pitch_y: u16) -> Result<Self> {
        if pitch_x == 0 || pitch_y == 0 {
            return Err(Error::InvalidFrame(format!("lenslet pitch must be at least 1x1, got {pitch_x}x{pitch_y}")));
        }
        Ok(Self { pitch_x, pitch_y })
    }

    /// Geometry with no lenslet structure.
    pub const fn unit() -> Self {
        Self { pitch_x: 1, pitch_y: 1 }
    }

    pub fn pitch_x(&self) -> u16 {
        self.pitch_x
    }

    pub fn pitch_y(&self) -> u16 {
        self.pitch_y
    }
}

impl Default for LensletGeometry {
    fn default() -> Self {
        Self::unit()
    }
}

impl fmt::Display for LensletGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.pitch_x, self.pitch_y)
    }
}

fn check_shape(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidFrame(format!("dimensions must be positive, got {width}x{height}")));
    }
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::InvalidFrame(format!(
            "{width}x{height} frame needs {} samples, got {len}",
            width as u128 * height as u128
        ))),
    }
}

/// A single 16-bit sensor frame, samples stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    samples: Vec<u16>,
    geometry: LensletGeometry,
}

impl Frame {
    pub fn new(width: usize, height: usize, samples: Vec<u16>, geometry: LensletGeometry) -> Result<Self> {
        check_shape(width, height, samples.len())?;
        Ok(Self { width, height, samples, geometry })
    }

    /// Promotes 8-bit samples to the 16-bit range by scaling with 257, so
    /// that 255 maps to 65535.
    pub fn from_u8(width: usize, height: usize, samples: &[u8], geometry: LensletGeometry) -> Result<Self> {
        let wide = samples.iter().map(|&v| u16::from(v) * 257).collect();
        Self::new(width, height, wide, geometry)
    }

    pub fn filled(width: usize, height: usize, value: u16, geometry: LensletGeometry) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)], geometry)
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        geometry: LensletGeometry,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples, geometry)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn geometry(&self) -> LensletGeometry {
        self.geometry
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u16> {
        self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }

    pub fn pixel_count(&self) -> usize {
        self.samples.len()
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.geometry == other.geometry
    }

    pub fn with_geometry(mut self, geometry: LensletGeometry) -> Self {
        self.geometry = geometry;
        self
    }
}

/// Prediction residuals already mapped into `0..=65535`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualFrame {
    width: usize,
    height: usize,
    samples: Vec<u16>,
    geometry: LensletGeometry,
}

impl ResidualFrame {
    pub fn new(width: usize, height: usize, samples: Vec<u16>, geometry: LensletGeometry) -> Result<Self> {
        check_shape(width, height, samples.len())?;
        Ok(Self { width, height, samples, geometry })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn geometry(&self) -> LensletGeometry {
        self.geometry
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }

    /// Row-major, each sample as high byte then low byte.
    ///
    /// This is the byte stream both the entropy criterion and the block
    /// coder see.
    pub fn to_be_bytes(&self) -> Vec<u8> {
        samples_to_be_bytes(&self.samples)
    }

    pub fn from_be_bytes(width: usize, height: usize, bytes: &[u8], geometry: LensletGeometry) -> Result<Self> {
        let expected = 2 * width as u64 * height as u64;
        if bytes.len() as u64 != expected {
            return Err(Error::SizeMismatch { expected, actual: bytes.len() as u64 });
        }
        let samples = bytes.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])).collect();
        Self::new(width, height, samples, geometry)
    }
}

pub(crate) fn samples_to_be_bytes(samples: &[u16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 2);
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

/// Non-empty sequence of frames sharing dimensions and geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameStack {
    frames: Vec<Frame>,
}

impl FrameStack {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::InvalidFrame("a stack needs at least one frame".into()))?;
        if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| !f.same_shape(first)) {
            return Err(Error::ShapeMismatch(format!(
                "frame {i} is {}x{} pitch {}, frame 0 is {}x{} pitch {}",
                f.width, f.height, f.geometry, first.width, first.height, first.geometry
            )));
        }
        Ok(Self { frames })
    }

    pub fn single(frame: Frame) -> Self {
        Self { frames: vec![frame] }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn geometry(&self) -> LensletGeometry {
        self.frames[0].geometry
    }

    /// Size of the stack as raw 16-bit samples.
    pub fn uncompressed_bytes(&self) -> u64 {
        2 * self.width() as u64 * self.height() as u64 * self.len() as u64
    }
}

/// Highest valid intra predictor id.
pub const MAX_INTRA_ID: u8 = 12;

const TEMPORAL_BIT: u8 = 0x80;

/// Which predictor a frame was coded with, stored as one header byte:
/// bit 7 is the temporal flag, bits 0..=6 the intra id.
///
/// Intra ids: 0 is identity; 1..=4 apply the base functions to
/// pixel-adjacent neighbors, 5..=8 to lenslet-stride neighbors and 9..=12
/// to both (phase-space).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredictorSpec {
    temporal: bool,
    intra_id: u8,
}

impl PredictorSpec {
    pub const IDENTITY: PredictorSpec = PredictorSpec { temporal: false, intra_id: 0 };

    pub fn new(intra_id: u8, temporal: bool) -> Result<Self> {
        if intra_id > MAX_INTRA_ID {
            return Err(Error::InvalidSpec(intra_id));
        }
        Ok(Self { temporal, intra_id })
    }

    pub fn intra(intra_id: u8) -> Result<Self> {
        Self::new(intra_id, false)
    }

    pub fn temporal(&self) -> bool {
        self.temporal
    }

    pub fn intra_id(&self) -> u8 {
        self.intra_id
    }

    pub fn with_temporal(self, temporal: bool) -> Self {
        Self { temporal, ..self }
    }

    pub fn encode(&self) -> u8 {
        (if self.temporal { TEMPORAL_BIT } else { 0 }) | self.intra_id
    }

    pub fn decode(byte: u8) -> Result<Self> {
        let intra_id = byte & !TEMPORAL_BIT;
        if intra_id > MAX_INTRA_ID {
            return Err(Error::CorruptHeader(format!(
                "predictor byte 0x{byte:02X} has intra id {intra_id} > {MAX_INTRA_ID}"
            )));
        }
        Ok(Self { temporal: byte & TEMPORAL_BIT != 0, intra_id })
    }

    /// All thirteen intra-only specs in id order.
    pub fn all_intra() -> impl Iterator<Item = PredictorSpec> {
        (0..=MAX_INTRA_ID).map(|intra_id| PredictorSpec { temporal: false, intra_id })
    }

    /// Intra specs followed by their temporal counterparts.
    pub fn all_with_temporal() -> impl Iterator<Item = PredictorSpec> {
        Self::all_intra().chain(Self::all_intra().map(|s| s.with_temporal(true)))
    }

    /// Human readable name, e.g. `phase:(a+b)/2` or `temporal+identity`.
    pub fn name(&self) -> String {
        const FUNCS: [&str; 4] = ["a+b-c", "a+(b-c)/2", "b+(a-c)/2", "(a+b)/2"];
        let intra = match self.intra_id {
            0 => "identity".to_string(),
            id => {
                let family = match (id - 1) / 4 {
                    0 => "pixel",
                    1 => "lenslet",
                    _ => "phase",
                };
                format!("{family}:{}", FUNCS[usize::from((id - 1) % 4)])
            }
        };
        if self.temporal {
            format!("temporal+{intra}")
        } else {
            intra
        }
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
