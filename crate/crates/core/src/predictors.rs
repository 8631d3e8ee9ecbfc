//! Causal intra-frame predictors over three neighbor systems and the
//! temporal delta.
//!
//! Each intra predictor combines a JPEG-style base function with a set of
//! neighbors:
//!
//! | ids     | neighbors                                          |
//! |---------|----------------------------------------------------|
//! | 0       | none (identity)                                    |
//! | 1..=4   | pixel-adjacent: left, top, top-left pixel          |
//! | 5..=8   | lenslet-stride: same offset in left/top/top-left lenslet |
//! | 9..=12  | phase-space: floor-average of the two predictions  |
//!
//! Pixel-adjacent neighbors are sometimes called "spatial" and
//! lenslet-stride neighbors "angular"; the literature is not consistent
//! about which is which, so the code uses the geometric names.
//!
//! Neighbors outside the frame read as 0. Residuals are `(x - pred) mod 2^16`
//! and reconstruction adds the same prediction back, so every predictor is
//! exactly invertible.

use crate::error::{Error, Result};
use crate::frame::{Frame, ResidualFrame, MAX_INTRA_ID};

/// The left-, top- and top-left-type neighbors of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NeighborTriple {
    pub a: i32,
    pub b: i32,
    pub c: i32,
}

impl NeighborTriple {
    pub fn new(a: i32, b: i32, c: i32) -> Self {
        Self { a, b, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    PixelAdjacent,
    LensletStride,
}

/// Evaluates base function `f_id` (1..=4). Division floors toward negative
/// infinity.
pub fn predict_value(f_id: u8, t: NeighborTriple) -> Result<i32> {
    match f_id {
        1..=4 => Ok(base(f_id, t)),
        _ => Err(Error::InvalidPredictor(f_id)),
    }
}

// Arithmetic right shift on i32 is floor division by 2.
#[inline(always)]
fn base(f_id: u8, NeighborTriple { a, b, c }: NeighborTriple) -> i32 {
    match f_id {
        1 => a + b - c,
        2 => a + ((b - c) >> 1),
        3 => b + ((a - c) >> 1),
        _ => (a + b) >> 1,
    }
}

pub fn gather_neighbors(frame: &Frame, x: usize, y: usize, mode: NeighborMode) -> Result<NeighborTriple> {
    if x >= frame.width() || y >= frame.height() {
        return Err(Error::OutOfBounds { x, y, width: frame.width(), height: frame.height() });
    }
    let (dx, dy) = offsets(frame, mode);
    Ok(triple(frame.samples(), frame.width(), x, y, dx, dy))
}

fn offsets(frame: &Frame, mode: NeighborMode) -> (usize, usize) {
    match mode {
        NeighborMode::PixelAdjacent => (1, 1),
        NeighborMode::LensletStride => {
            let g = frame.geometry();
            (usize::from(g.pitch_x()), usize::from(g.pitch_y()))
        }
    }
}

#[inline(always)]
fn triple(buf: &[u16], width: usize, x: usize, y: usize, dx: usize, dy: usize) -> NeighborTriple {
    let has_left = x >= dx;
    let has_top = y >= dy;
    let row = y * width;
    let a = if has_left { buf[row + x - dx] } else { 0 };
    let (b, c) = if has_top {
        let up = row - dy * width;
        (buf[up + x], if has_left { buf[up + x - dx] } else { 0 })
    } else {
        (0, 0)
    };
    NeighborTriple { a: a.into(), b: b.into(), c: c.into() }
}

#[derive(Clone, Copy)]
enum Family {
    Pixel,
    Lenslet,
    Phase,
}

fn split_id(intra_id: u8) -> Result<Option<(Family, u8)>> {
    match intra_id {
        0 => Ok(None),
        1..=MAX_INTRA_ID => {
            let family = match (intra_id - 1) / 4 {
                0 => Family::Pixel,
                1 => Family::Lenslet,
                _ => Family::Phase,
            };
            Ok(Some((family, (intra_id - 1) % 4 + 1)))
        }
        _ => Err(Error::InvalidSpec(intra_id)),
    }
}

/// Prediction at `(x, y)` using only samples before it in raster order.
#[inline(always)]
fn prediction(buf: &[u16], width: usize, x: usize, y: usize, stride: (usize, usize), family: Family, f_id: u8) -> i32 {
    match family {
        Family::Pixel => base(f_id, triple(buf, width, x, y, 1, 1)),
        Family::Lenslet => base(f_id, triple(buf, width, x, y, stride.0, stride.1)),
        Family::Phase => {
            let p = base(f_id, triple(buf, width, x, y, 1, 1));
            let l = base(f_id, triple(buf, width, x, y, stride.0, stride.1));
            (p + l) >> 1
        }
    }
}

/// Maps a frame to its symbol image under `intra_id`.
pub fn predict_frame(frame: &Frame, intra_id: u8) -> Result<ResidualFrame> {
    let rows = ResidualRows::new(frame, intra_id)?;
    let w = frame.width();
    let mut samples = vec![0u16; frame.pixel_count()];
    if w > 0 {
        for (y, out) in samples.chunks_exact_mut(w).enumerate() {
            rows.row(y, out);
        }
    }
    ResidualFrame::new(w, frame.height(), samples, frame.geometry())
}

/// Residual rows of one frame under one predictor, computed on demand.
///
/// Every row depends only on the source frame, so rows can be produced in
/// any order.
pub(crate) struct ResidualRows<'a> {
    src: &'a [u16],
    w: usize,
    stride: (usize, usize),
    split: Option<(Family, u8)>,
}

impl<'a> ResidualRows<'a> {
    pub(crate) fn new(frame: &'a Frame, intra_id: u8) -> Result<Self> {
        Ok(Self {
            src: frame.samples(),
            w: frame.width(),
            stride: offsets(frame, NeighborMode::LensletStride),
            split: split_id(intra_id)?,
        })
    }

    /// Writes the residual of row `y` into `out`, which must be one row long.
    pub(crate) fn row(&self, y: usize, out: &mut [u16]) {
        match self.split {
            None => out.copy_from_slice(&self.src[y * self.w..(y + 1) * self.w]),
            Some((family, f_id)) => predict_row(self.src, self.w, y, self.stride, family, f_id, out),
        }
    }
}

fn predict_row(src: &[u16], w: usize, y: usize, stride: (usize, usize), family: Family, f_id: u8, out: &mut [u16]) {
    let (reach_x, reach_y) = match family {
        Family::Pixel => (1, 1),
        Family::Lenslet | Family::Phase => stride,
    };
    // Columns whose neighbors may fall outside the frame take the checked path.
    let fast_from = if y >= reach_y { reach_x.min(w) } else { w };
    for x in 0..fast_from {
        let pred = prediction(src, w, x, y, stride, family, f_id);
        out[x] = (i32::from(src[y * w + x]) - pred) as u16;
    }
    if fast_from < w {
        let span = FastSpan { src, w, y, stride, from: fast_from };
        match (family, f_id) {
            (Family::Pixel, 1) => span.run::<0, 1>(out),
            (Family::Pixel, 2) => span.run::<0, 2>(out),
            (Family::Pixel, 3) => span.run::<0, 3>(out),
            (Family::Pixel, _) => span.run::<0, 4>(out),
            (Family::Lenslet, 1) => span.run::<1, 1>(out),
            (Family::Lenslet, 2) => span.run::<1, 2>(out),
            (Family::Lenslet, 3) => span.run::<1, 3>(out),
            (Family::Lenslet, _) => span.run::<1, 4>(out),
            (Family::Phase, 1) => span.run::<2, 1>(out),
            (Family::Phase, 2) => span.run::<2, 2>(out),
            (Family::Phase, 3) => span.run::<2, 3>(out),
            (Family::Phase, _) => span.run::<2, 4>(out),
        }
    }
}

/// The part of a row where every neighbor is in bounds.
struct FastSpan<'a> {
    src: &'a [u16],
    w: usize,
    y: usize,
    stride: (usize, usize),
    from: usize,
}

impl FastSpan<'_> {
    #[inline(always)]
    fn run<const FAMILY: u8, const F: u8>(&self, out: &mut [u16]) {
        let (w, y) = (self.w, self.y);
        let (sx, sy) = self.stride;
        let row = &self.src[y * w..(y + 1) * w];
        let up = if FAMILY != 1 { &self.src[(y - 1) * w..y * w] } else { row };
        let up_l = if FAMILY != 0 { &self.src[(y - sy) * w..(y - sy + 1) * w] } else { row };
        for x in self.from..w {
            let pixel = || {
                let t = NeighborTriple { a: i32::from(row[x - 1]), b: i32::from(up[x]), c: i32::from(up[x - 1]) };
                base(F, t)
            };
            let lenslet = || {
                let t = NeighborTriple { a: i32::from(row[x - sx]), b: i32::from(up_l[x]), c: i32::from(up_l[x - sx]) };
                base(F, t)
            };
            let pred = match FAMILY {
                0 => pixel(),
                1 => lenslet(),
                _ => (pixel() + lenslet()) >> 1,
            };
            out[x] = (i32::from(row[x]) - pred) as u16;
        }
    }
}

/// Inverts [`predict_frame`], rebuilding samples in raster order.
pub fn unpredict_frame(residual: &ResidualFrame, intra_id: u8) -> Result<Frame> {
    let split = split_id(intra_id)?;
    let (w, h) = (residual.width(), residual.height());
    let res = residual.samples();
    let samples = match split {
        None => res.to_vec(),
        Some((family, f_id)) => {
            let g = residual.geometry();
            let stride = (usize::from(g.pitch_x()), usize::from(g.pitch_y()));
            let mut out = vec![0u16; res.len()];
            for y in 0..h {
                for x in 0..w {
                    let pred = prediction(&out, w, x, y, stride, family, f_id);
                    let i = y * w + x;
                    out[i] = (i32::from(res[i]) + pred) as u16;
                }
            }
            out
        }
    };
    Frame::new(w, h, samples, residual.geometry())
}

/// `(curr - prev) mod 2^16` per pixel.
pub fn temporal_delta(curr: &Frame, prev: &Frame) -> Result<Frame> {
    zip_frames(curr, prev, u16::wrapping_sub)
}

/// Inverse of [`temporal_delta`].
pub fn temporal_undelta(delta: &Frame, prev: &Frame) -> Result<Frame> {
    zip_frames(delta, prev, u16::wrapping_add)
}

fn zip_frames(lhs: &Frame, rhs: &Frame, op: fn(u16, u16) -> u16) -> Result<Frame> {
    if !lhs.same_shape(rhs) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} pitch {} vs {}x{} pitch {}",
            lhs.width(),
            lhs.height(),
            lhs.geometry(),
            rhs.width(),
            rhs.height(),
            rhs.geometry()
        )));
    }
    let samples = lhs.samples().iter().zip(rhs.samples()).map(|(&a, &b)| op(a, b)).collect();
    Frame::new(lhs.width(), lhs.height(), samples, lhs.geometry())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::LensletGeometry;
    use proptest::prelude::*;

    fn geom(px: u16, py: u16) -> LensletGeometry {
        LensletGeometry::new(px, py).unwrap()
    }

    // Independent of the shift-based implementation.
    fn floor_half(v: i32) -> i32 {
        (f64::from(v) / 2.0).floor() as i32
    }

    fn oracle_value(f_id: u8, t: NeighborTriple) -> i32 {
        let (a, b, c) = (t.a, t.b, t.c);
        match f_id {
            1 => a + b - c,
            2 => a + floor_half(b - c),
            3 => b + floor_half(a - c),
            4 => floor_half(a + b),
            _ => unreachable!(),
        }
    }

    fn oracle_lookup(frame: &Frame, x: isize, y: isize) -> i32 {
        if x < 0 || y < 0 {
            0
        } else {
            i32::from(frame.get(x as usize, y as usize))
        }
    }

    /// Per-pixel brute force straight from the neighbor definitions.
    fn oracle_predict(frame: &Frame, id: u8) -> Vec<u16> {
        let g = frame.geometry();
        let (px, py) = (g.pitch_x() as isize, g.pitch_y() as isize);
        let mut out = Vec::new();
        for y in 0..frame.height() as isize {
            for x in 0..frame.width() as isize {
                let tri = |dx: isize, dy: isize| NeighborTriple {
                    a: oracle_lookup(frame, x - dx, y),
                    b: oracle_lookup(frame, x, y - dy),
                    c: oracle_lookup(frame, x - dx, y - dy),
                };
                let pred = if id == 0 {
                    0
                } else {
                    let f = (id - 1) % 4 + 1;
                    let p = oracle_value(f, tri(1, 1));
                    let l = oracle_value(f, tri(px, py));
                    match (id - 1) / 4 {
                        0 => p,
                        1 => l,
                        _ => floor_half(p + l),
                    }
                };
                let v = oracle_lookup(frame, x, y) - pred;
                out.push(v.rem_euclid(65536) as u16);
            }
        }
        out
    }

    #[test]
    fn predict_value_examples() {
        assert_eq!(predict_value(1, NeighborTriple::new(7, 7, 7)).unwrap(), 7);
        assert_eq!(predict_value(3, NeighborTriple::new(10, 20, 30)).unwrap(), 10);
        assert_eq!(predict_value(4, NeighborTriple::new(7, 0, 0)).unwrap(), 3);
        assert!(matches!(predict_value(0, NeighborTriple::default()), Err(Error::InvalidPredictor(0))));
        assert!(matches!(predict_value(5, NeighborTriple::default()), Err(Error::InvalidPredictor(5))));
    }

    #[test]
    fn predict_value_floors_negative_halves() {
        // (b - c) = -3 -> floor(-1.5) = -2
        assert_eq!(predict_value(2, NeighborTriple::new(10, 0, 3)).unwrap(), 8);
        assert_eq!(predict_value(3, NeighborTriple::new(0, 10, 3)).unwrap(), 8);
    }

    #[test]
    fn gather_examples() {
        let ramp = Frame::from_fn(10, 10, geom(5, 5), |x, _| x as u16).unwrap();
        for mode in [NeighborMode::PixelAdjacent, NeighborMode::LensletStride] {
            assert_eq!(gather_neighbors(&ramp, 0, 0, mode).unwrap(), NeighborTriple::new(0, 0, 0));
        }
        assert_eq!(gather_neighbors(&ramp, 3, 2, NeighborMode::PixelAdjacent).unwrap(), NeighborTriple::new(2, 3, 2));
        assert_eq!(gather_neighbors(&ramp, 7, 7, NeighborMode::LensletStride).unwrap(), NeighborTriple::new(2, 7, 2));
        assert!(matches!(gather_neighbors(&ramp, 10, 0, NeighborMode::PixelAdjacent), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn constant_frame_under_f1() {
        let f = Frame::filled(4, 4, 7, LensletGeometry::unit()).unwrap();
        let r = predict_frame(&f, 1).unwrap();
        // Border pixels still cancel under f1: A + 0 - 0 on row 0, 0 + B - 0 on column 0.
        let mut expected = vec![0u16; 16];
        expected[0] = 7;
        assert_eq!(r.samples(), expected.as_slice());
        assert_eq!(r.samples(), oracle_predict(&f, 1).as_slice());
        assert_eq!(unpredict_frame(&r, 1).unwrap(), f);
    }

    #[test]
    fn identity_passes_samples_through() {
        let f = Frame::from_fn(5, 3, LensletGeometry::unit(), |x, y| (x * 100 + y) as u16).unwrap();
        let r = predict_frame(&f, 0).unwrap();
        assert_eq!(r.samples(), f.samples());
        assert_eq!(unpredict_frame(&r, 0).unwrap(), f);
    }

    #[test]
    fn negative_residual_wraps() {
        // x = 5 after a left neighbor of 10 on row 0: pred = 10 + 0 - 0.
        let f = Frame::new(2, 1, vec![10, 5], LensletGeometry::unit()).unwrap();
        assert_eq!(predict_frame(&f, 1).unwrap().samples(), &[10, 65531]);
    }

    #[test]
    fn invalid_ids_are_rejected() {
        let f = Frame::filled(2, 2, 0, LensletGeometry::unit()).unwrap();
        assert!(matches!(predict_frame(&f, 13), Err(Error::InvalidSpec(13))));
        let r = predict_frame(&f, 0).unwrap();
        assert!(matches!(unpredict_frame(&r, 200), Err(Error::InvalidSpec(200))));
    }

    #[test]
    fn extremes_round_trip_for_every_id() {
        let g = geom(3, 2);
        let frames = [
            Frame::filled(7, 5, 0, g).unwrap(),
            Frame::filled(7, 5, u16::MAX, g).unwrap(),
            Frame::from_fn(7, 5, g, |x, y| if (x + y) % 2 == 0 { 0 } else { u16::MAX }).unwrap(),
        ];
        for f in &frames {
            for id in 0..=MAX_INTRA_ID {
                let r = predict_frame(f, id).unwrap();
                assert_eq!(r.samples(), oracle_predict(f, id).as_slice(), "id {id}");
                assert_eq!(&unpredict_frame(&r, id).unwrap(), f, "id {id}");
            }
        }
    }

    #[test]
    fn ramp_is_absorbed_by_f1() {
        let f = Frame::from_fn(9, 6, geom(4, 3), |x, y| (3 * x + 5 * y) as u16).unwrap();
        let r = predict_frame(&f, 1).unwrap();
        for y in 1..6 {
            for x in 1..9 {
                assert_eq!(r.get(x, y), 0, "({x},{y})");
            }
        }
        // Lenslet-stride f1 also absorbs the ramp once all strided neighbors exist.
        let r = predict_frame(&f, 5).unwrap();
        for y in 3..6 {
            for x in 4..9 {
                assert_eq!(r.get(x, y), 0, "({x},{y})");
            }
        }
    }

    #[test]
    fn constant_frame_under_lenslet_f1_is_zero_away_from_borders() {
        let f = Frame::filled(11, 8, 1234, geom(3, 4)).unwrap();
        let r = predict_frame(&f, 5).unwrap();
        for y in 4..8 {
            for x in 3..11 {
                assert_eq!(r.get(x, y), 0);
            }
        }
        assert_eq!(r.get(0, 0), 1234);
    }

    #[test]
    fn temporal_examples() {
        let g = LensletGeometry::unit();
        let prev = Frame::filled(3, 3, 10, g).unwrap();
        let curr = Frame::filled(3, 3, 5, g).unwrap();
        assert!(temporal_delta(&prev, &prev).unwrap().samples().iter().all(|&v| v == 0));
        let d = temporal_delta(&curr, &prev).unwrap();
        assert!(d.samples().iter().all(|&v| v == 65531));
        assert_eq!(temporal_undelta(&d, &prev).unwrap(), curr);
        let other = Frame::filled(3, 2, 5, g).unwrap();
        assert!(matches!(temporal_delta(&curr, &other), Err(Error::ShapeMismatch(_))));
    }

    fn frame_strategy() -> impl Strategy<Value = Frame> {
        (1usize..24, 1usize..24, 1u16..7, 1u16..7).prop_flat_map(|(w, h, px, py)| {
            prop::collection::vec(any::<u16>(), w * h).prop_map(move |s| Frame::new(w, h, s, geom(px, py)).unwrap())
        })
    }

    proptest! {
        #[test]
        fn predict_matches_oracle_and_inverts(f in frame_strategy(), id in 0u8..=12) {
            let r = predict_frame(&f, id).unwrap();
            let expected = oracle_predict(&f, id);
            prop_assert_eq!(r.samples(), expected.as_slice());
            prop_assert_eq!(unpredict_frame(&r, id).unwrap(), f);
        }

        #[test]
        fn unit_pitch_degenerates_to_pixel_adjacent(
            f in frame_strategy().prop_map(|f| f.with_geometry(LensletGeometry::unit())),
            base in 1u8..=4,
        ) {
            let pixel = predict_frame(&f, base).unwrap();
            prop_assert_eq!(&predict_frame(&f, base + 4).unwrap(), &pixel);
            prop_assert_eq!(&predict_frame(&f, base + 8).unwrap(), &pixel);
        }

        #[test]
        fn temporal_delta_inverts(
            (a, b) in frame_strategy().prop_flat_map(|a| {
                let (w, h, g) = (a.width(), a.height(), a.geometry());
                (Just(a), prop::collection::vec(any::<u16>(), w * h)
                    .prop_map(move |s| Frame::new(w, h, s, g).unwrap()))
            })
        ) {
            let d = temporal_delta(&a, &b).unwrap();
            prop_assert_eq!(temporal_undelta(&d, &b).unwrap(), a);
        }
    }
}
