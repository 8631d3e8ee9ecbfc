//! 16-bit binary PGM and headerless raw stacks with a key=value sidecar.
//!
//! PGM files may hold several concatenated `P5` images, one per frame.
//! Samples are big-endian and `maxval` must be 65535. PGM carries no
//! lenslet geometry, so callers supply it.
//!
//! Raw stacks are little-endian u16 samples, frame-major then row-major,
//! described by a sidecar next to them (`stack.raw` -> `stack.meta`):
//!
//! ```text
//! width=600
//! height=450
//! frames=3
//! pitch_x=15
//! pitch_y=15
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameStack, LensletGeometry};

fn unsupported(msg: impl Into<String>) -> Error {
    Error::UnsupportedFormat(msg.into())
}

/// Parses one or more concatenated P5 images.
pub fn parse_pgm(data: &[u8], geometry: LensletGeometry) -> Result<Vec<Frame>> {
    let mut frames = Vec::new();
    let mut pos = 0;
    loop {
        let (frame, next) = parse_one(data, pos, geometry)?;
        frames.push(frame);
        pos = next;
        // Trailing whitespace after the last image is tolerated.
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos == data.len() {
            return Ok(frames);
        }
    }
}

fn parse_one(data: &[u8], start: usize, geometry: LensletGeometry) -> Result<(Frame, usize)> {
    if data.get(start..start + 2) != Some(b"P5") {
        return Err(unsupported(format!("expected binary PGM magic P5 at byte {start}")));
    }
    let mut pos = start + 2;
    let mut fields = [0u64; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // Whitespace and comments before every field.
        loop {
            match data.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let digits_start = pos;
        while pos < data.len() && data[pos].is_ascii_digit() {
            pos += 1;
        }
        let digits = &data[digits_start..pos];
        if digits.is_empty() || digits.len() > 10 {
            return Err(unsupported(format!("malformed PGM header field {i} at byte {digits_start}")));
        }
        *field = std::str::from_utf8(digits).unwrap().parse().unwrap();
    }
    match data.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(unsupported("PGM header must end with one whitespace byte")),
    }
    let [width, height, maxval] = fields;
    if maxval != 65535 {
        return Err(unsupported(format!("PGM maxval {maxval}, only 65535 is supported")));
    }
    if width == 0 || height == 0 {
        return Err(unsupported("PGM dimensions must be positive"));
    }
    let len = (width * height * 2) as usize;
    let body = data
        .get(pos..pos + len)
        .ok_or(Error::SizeMismatch { expected: len as u64, actual: (data.len() - pos) as u64 })?;
    let samples = body.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])).collect();
    let frame = Frame::new(width as usize, height as usize, samples, geometry)?;
    Ok((frame, pos + len))
}

pub fn encode_pgm(frames: &[Frame]) -> Vec<u8> {
    let mut out = Vec::new();
    for f in frames {
        out.extend_from_slice(format!("P5\n{} {}\n65535\n", f.width(), f.height()).as_bytes());
        for s in f.samples() {
            out.extend_from_slice(&s.to_be_bytes());
        }
    }
    out
}

pub fn read_image(path: &Path, geometry: LensletGeometry) -> Result<FrameStack> {
    FrameStack::new(parse_pgm(&fs::read(path)?, geometry)?)
}

pub fn write_image(path: &Path, stack: &FrameStack) -> Result<()> {
    Ok(fs::write(path, encode_pgm(stack.frames()))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SidecarMeta {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub pitch_x: u16,
    pub pitch_y: u16,
}

const SIDECAR_KEYS: [&str; 5] = ["width", "height", "frames", "pitch_x", "pitch_y"];

impl SidecarMeta {
    pub fn of(stack: &FrameStack) -> Self {
        let g = stack.geometry();
        Self {
            width: stack.width(),
            height: stack.height(),
            frames: stack.len(),
            pitch_x: g.pitch_x(),
            pitch_y: g.pitch_y(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: [Option<u64>; 5] = [None; 5];
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| unsupported(format!("sidecar line {}: expected key=value", n + 1)))?;
            let idx = SIDECAR_KEYS
                .iter()
                .position(|k| *k == key.trim())
                .ok_or_else(|| unsupported(format!("sidecar line {}: unknown key {key:?}", n + 1)))?;
            if values[idx].is_some() {
                return Err(unsupported(format!("sidecar key {key} given twice")));
            }
            let v: u64 = value
                .trim()
                .parse()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| unsupported(format!("sidecar {key}: {value:?} is not a positive integer")))?;
            values[idx] = Some(v);
        }
        let get = |i: usize| values[i].ok_or_else(|| unsupported(format!("sidecar is missing {}", SIDECAR_KEYS[i])));
        let pitch = |i: usize| {
            get(i).and_then(|v| u16::try_from(v).map_err(|_| unsupported(format!("{} too large", SIDECAR_KEYS[i]))))
        };
        Ok(Self {
            width: get(0)? as usize,
            height: get(1)? as usize,
            frames: get(2)? as usize,
            pitch_x: pitch(3)?,
            pitch_y: pitch(4)?,
        })
    }

    pub fn render(&self) -> String {
        format!(
            "width={}\nheight={}\nframes={}\npitch_x={}\npitch_y={}\n",
            self.width, self.height, self.frames, self.pitch_x, self.pitch_y
        )
    }

    pub fn geometry(&self) -> Result<LensletGeometry> {
        LensletGeometry::new(self.pitch_x, self.pitch_y)
    }

    pub fn raw_len(&self) -> u64 {
        2 * self.width as u64 * self.height as u64 * self.frames as u64
    }
}

pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("meta")
}

pub fn decode_raw_stack(raw: &[u8], meta: &SidecarMeta) -> Result<FrameStack> {
    if raw.len() as u64 != meta.raw_len() {
        return Err(Error::SizeMismatch { expected: meta.raw_len(), actual: raw.len() as u64 });
    }
    let geometry = meta.geometry()?;
    let per_frame = 2 * meta.width * meta.height;
    let frames = raw
        .chunks_exact(per_frame)
        .map(|chunk| {
            let samples = chunk.chunks_exact(2).map(|p| u16::from_le_bytes([p[0], p[1]])).collect();
            Frame::new(meta.width, meta.height, samples, geometry)
        })
        .collect::<Result<Vec<_>>>()?;
    FrameStack::new(frames)
}

pub fn encode_raw_stack(stack: &FrameStack) -> Vec<u8> {
    let mut out = Vec::with_capacity(stack.uncompressed_bytes() as usize);
    for f in stack.frames() {
        for s in f.samples() {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

pub fn read_raw_stack(raw: &Path) -> Result<FrameStack> {
    let meta = SidecarMeta::parse(&fs::read_to_string(sidecar_path(raw))?)?;
    decode_raw_stack(&fs::read(raw)?, &meta)
}

pub fn write_raw_stack(raw: &Path, stack: &FrameStack) -> Result<()> {
    fs::write(raw, encode_raw_stack(stack))?;
    fs::write(sidecar_path(raw), SidecarMeta::of(stack).render())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(w: usize, h: usize, seed: u64, g: LensletGeometry) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(w, h, g, |_, _| rng.random()).unwrap()
    }

    #[test]
    fn pgm_round_trip() {
        let g = LensletGeometry::new(4, 4).unwrap();
        let frames = vec![random_frame(13, 7, 1, g), random_frame(13, 7, 2, g)];
        let bytes = encode_pgm(&frames);
        assert!(bytes.starts_with(b"P5\n13 7\n65535\n"));
        assert_eq!(parse_pgm(&bytes, g).unwrap(), frames);
    }

    #[test]
    fn pgm_comments_and_whitespace() {
        let mut bytes = b"P5 # comment\n2\t1\n# another\n65535 ".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xFF, 0xFE]);
        bytes.push(b'\n');
        let f = parse_pgm(&bytes, LensletGeometry::unit()).unwrap();
        assert_eq!(f[0].samples(), &[0x0102, 0xFFFE]);
    }

    #[test]
    fn pgm_rejections() {
        let g = LensletGeometry::unit();
        let mut eight = b"P5\n2 1\n255\n".to_vec();
        eight.extend_from_slice(&[1, 2]);
        assert!(matches!(parse_pgm(&eight, g), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P2\n1 1\n65535\n0", g), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P5\n1 x\n65535\n", g), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P5\n2 2\n65535\n\0\0", g), Err(Error::SizeMismatch { .. })));
        assert!(matches!(parse_pgm(b"P5\n0 2\n65535\n", g), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn sidecar_grammar() {
        let m = SidecarMeta { width: 600, height: 450, frames: 3, pitch_x: 15, pitch_y: 13 };
        let text = m.render();
        assert_eq!(text, "width=600\nheight=450\nframes=3\npitch_x=15\npitch_y=13\n");
        assert_eq!(SidecarMeta::parse(&text).unwrap(), m);
        assert_eq!(SidecarMeta::parse("pitch_y=13\npitch_x=15\nframes=3\nheight=450\nwidth=600\n").unwrap(), m);
        for bad in [
            "width=1\nheight=1\nframes=1\npitch_x=1\n",
            "width=1\nheight=1\nframes=1\npitch_x=1\npitch_y=1\ndepth=16\n",
            "width=1\nwidth=1\nheight=1\nframes=1\npitch_x=1\npitch_y=1\n",
            "width=0\nheight=1\nframes=1\npitch_x=1\npitch_y=1\n",
            "width=1\nheight=1\nframes=1\npitch_x=70000\npitch_y=1\n",
            "width 1\n",
        ] {
            assert!(matches!(SidecarMeta::parse(bad), Err(Error::UnsupportedFormat(_))), "{bad:?}");
        }
    }

    #[test]
    fn raw_stack_round_trip_on_disk() {
        let dir = std::env::temp_dir().join(format!("pcbz-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = LensletGeometry::new(3, 5).unwrap();
        let stack = FrameStack::new(vec![random_frame(9, 10, 3, g), random_frame(9, 10, 4, g)]).unwrap();
        let raw = dir.join("stack.raw");
        write_raw_stack(&raw, &stack).unwrap();
        assert!(dir.join("stack.meta").exists());
        assert_eq!(read_raw_stack(&raw).unwrap(), stack);
        // Little-endian on disk.
        let bytes = fs::read(&raw).unwrap();
        assert_eq!(u16::from_le_bytes([bytes[0], bytes[1]]), stack.frames()[0].samples()[0]);

        let pgm = dir.join("stack.pgm");
        write_image(&pgm, &stack).unwrap();
        assert_eq!(read_image(&pgm, g).unwrap(), stack);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sidecar_frame_count_must_match_raw_size() {
        let g = LensletGeometry::unit();
        let stack = FrameStack::new(vec![random_frame(4, 4, 1, g), random_frame(4, 4, 2, g)]).unwrap();
        let raw = encode_raw_stack(&stack);
        let meta = SidecarMeta { frames: 3, ..SidecarMeta::of(&stack) };
        assert!(matches!(decode_raw_stack(&raw, &meta), Err(Error::SizeMismatch { expected: 96, actual: 64 })));
    }
}
