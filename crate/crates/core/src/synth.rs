//! Synthetic light-field frames for tests and benchmarks.
//!
//! `SmoothLenslet` renders a band-limited random field over lenslet
//! position and intra-lenslet offset, modulated by a circular lenslet
//! aperture, so both pixel-adjacent and lenslet-stride neighbors are
//! correlated. `Beads` scatters sparse bright disks on a dark background.
//! Shot noise (photon gain `photon_scale`) and Gaussian read noise are
//! added per frame from a stream derived from `(seed, frame_index)`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameStack, LensletGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthMode {
    SmoothLenslet,
    Beads,
}

impl SynthMode {
    pub fn name(&self) -> &'static str {
        match self {
            SynthMode::SmoothLenslet => "smooth_lenslet",
            SynthMode::Beads => "beads",
        }
    }
}

impl fmt::Display for SynthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth_lenslet" => Ok(SynthMode::SmoothLenslet),
            "beads" => Ok(SynthMode::Beads),
            other => Err(Error::InvalidOptions(format!("unknown synthetic mode {other:?} (smooth_lenslet, beads)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub pitch_x: u16,
    pub pitch_y: u16,
    pub mode: SynthMode,
    /// Dark level in counts.
    pub background: f64,
    /// Peak signal above background in counts.
    pub signal_amplitude: f64,
    /// Gaussian read noise standard deviation in counts.
    pub noise_sigma: f64,
    /// Counts per detected photon; 0 disables shot noise.
    pub photon_scale: f64,
    pub frames: usize,
    /// Scene translation in pixels per frame along x.
    pub drift: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            width: 150,
            height: 150,
            pitch_x: 15,
            pitch_y: 15,
            mode: SynthMode::SmoothLenslet,
            background: 200.0,
            signal_amplitude: 20_000.0,
            noise_sigma: 10.0,
            photon_scale: 0.0,
            frames: 1,
            drift: 0.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<LensletGeometry> {
        let geometry = LensletGeometry::new(self.pitch_x, self.pitch_y)?;
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(Error::InvalidOptions("width, height and frames must be positive".into()));
        }
        let finite = [self.background, self.signal_amplitude, self.noise_sigma, self.photon_scale, self.drift];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOptions("synthetic parameters must be finite".into()));
        }
        if self.background < 0.0 || self.signal_amplitude < 0.0 || self.noise_sigma < 0.0 || self.photon_scale < 0.0 {
            return Err(Error::InvalidOptions("levels and noise must be non-negative".into()));
        }
        let peak = self.background + self.signal_amplitude;
        let shot = (self.photon_scale * peak).sqrt();
        if peak + 4.0 * (self.noise_sigma + shot) > 65535.0 {
            return Err(Error::InvalidOptions(format!(
                "background + amplitude + 4 sigma noise = {:.0} exceeds 16 bits",
                peak + 4.0 * (self.noise_sigma + shot)
            )));
        }
        Ok(geometry)
    }
}

struct Wave {
    amp: f64,
    // Cycles per pixel of scene position, cycles per lenslet of offset.
    fx: f64,
    fy: f64,
    fu: f64,
    fv: f64,
    phase: f64,
}

struct Bead {
    x: f64,
    y: f64,
    radius: f64,
    brightness: f64,
}

enum Scene {
    Field { waves: Vec<Wave>, norm: f64 },
    Beads(Vec<Bead>),
}

const WAVES: usize = 12;

impl Scene {
    fn new(p: &SynthParams, rng: &mut ChaCha8Rng) -> Self {
        match p.mode {
            SynthMode::SmoothLenslet => {
                // Spatial periods of at least three lenslets keep the field
                // smooth across lenslet-stride neighbors.
                let max_spatial = 1.0 / (3.0 * f64::from(p.pitch_x.max(p.pitch_y)).max(4.0));
                let waves: Vec<Wave> = (0..WAVES)
                    .map(|_| Wave {
                        amp: rng.random_range(0.2..1.0),
                        fx: rng.random_range(-max_spatial..max_spatial),
                        fy: rng.random_range(-max_spatial..max_spatial),
                        fu: rng.random_range(-0.8..0.8),
                        fv: rng.random_range(-0.8..0.8),
                        phase: rng.random_range(0.0..TAU),
                    })
                    .collect();
                let norm = waves.iter().map(|w| w.amp).sum();
                Scene::Field { waves, norm }
            }
            SynthMode::Beads => {
                let area = (p.width * p.height) as f64;
                let count = (area / 1500.0).ceil() as usize;
                let beads = (0..count)
                    .map(|_| Bead {
                        x: rng.random_range(0.0..p.width as f64),
                        y: rng.random_range(0.0..p.height as f64),
                        radius: rng.random_range(1.5..4.0),
                        brightness: rng.random_range(0.5..1.0),
                    })
                    .collect();
                Scene::Beads(beads)
            }
        }
    }

    /// Noise-free signal in `[0, 1]` at sensor pixel `(x, y)` of frame `k`.
    fn render(&self, p: &SynthParams, k: usize) -> Vec<f64> {
        let (px, py) = (f64::from(p.pitch_x), f64::from(p.pitch_y));
        let shift = p.drift * k as f64;
        let mut out = vec![0.0; p.width * p.height];
        match self {
            Scene::Field { waves, norm } => {
                for y in 0..p.height {
                    let (ly, oy) = (y / usize::from(p.pitch_y), y % usize::from(p.pitch_y));
                    let sy = (ly as f64 + 0.5) * py;
                    let v = (oy as f64 + 0.5) / py - 0.5;
                    for x in 0..p.width {
                        let (lx, ox) = (x / usize::from(p.pitch_x), x % usize::from(p.pitch_x));
                        let sx = (lx as f64 + 0.5) * px - shift;
                        let u = (ox as f64 + 0.5) / px - 0.5;
                        let field: f64 = waves
                            .iter()
                            .map(|w| w.amp * (TAU * (w.fx * sx + w.fy * sy + w.fu * u + w.fv * v) + w.phase).cos())
                            .sum();
                        out[y * p.width + x] = aperture(u, v, p) * (0.5 + 0.5 * field / norm);
                    }
                }
            }
            Scene::Beads(beads) => {
                for b in beads {
                    let cx = b.x + shift;
                    let reach = b.radius + 1.0;
                    let x0 = (cx - reach).floor().max(0.0) as usize;
                    let y0 = (b.y - reach).floor().max(0.0) as usize;
                    let x1 = ((cx + reach).ceil().max(0.0) as usize).min(p.width);
                    let y1 = ((b.y + reach).ceil().max(0.0) as usize).min(p.height);
                    for y in y0..y1 {
                        for x in x0..x1 {
                            let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - b.y).powi(2)).sqrt();
                            // Soft one-pixel edge.
                            let cover = (b.radius + 0.5 - d).clamp(0.0, 1.0);
                            let px = &mut out[y * p.width + x];
                            *px = (*px + cover * b.brightness).min(1.0);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Circular lenslet aperture with a soft falloff; 1 with unit pitch.
fn aperture(u: f64, v: f64, p: &SynthParams) -> f64 {
    if p.pitch_x == 1 && p.pitch_y == 1 {
        return 1.0;
    }
    let r2 = (u * u + v * v) / 0.3;
    (1.0 - r2).clamp(0.05, 1.0)
}

fn add_noise(signal: &[f64], p: &SynthParams, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let read = Normal::new(0.0, p.noise_sigma).expect("sigma validated");
    signal
        .iter()
        .map(|&s| {
            let mean = p.background + p.signal_amplitude * s;
            let mut v = if p.photon_scale > 0.0 {
                let photons = mean / p.photon_scale;
                let n = if photons > 1000.0 {
                    Normal::new(photons, photons.sqrt()).expect("positive").sample(rng)
                } else if photons > 0.0 {
                    Poisson::new(photons).expect("positive").sample(rng)
                } else {
                    0.0
                };
                n * p.photon_scale
            } else {
                mean
            };
            if p.noise_sigma > 0.0 {
                v += read.sample(rng);
            }
            v.round().clamp(0.0, 65535.0) as u16
        })
        .collect()
}

pub fn generate(params: &SynthParams) -> Result<FrameStack> {
    let geometry = params.validate()?;
    let mut scene_rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scene = Scene::new(params, &mut scene_rng);
    let frames = (0..params.frames)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(k as u64 + 1);
            let samples = add_noise(&scene.render(params, k), params, &mut rng);
            Frame::new(params.width, params.height, samples, geometry)
        })
        .collect::<Result<Vec<_>>>()?;
    FrameStack::new(frames)
}
