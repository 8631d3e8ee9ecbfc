//! The `.pcbz` archive layout.
//!
//! All integers are little-endian.
//!
//! ```text
//! header (28 bytes)
//!   0  magic        "PCBZ"
//!   4  version      u8 = 1
//!   5  flags        u8, bit 0 = some frame uses the temporal delta
//!   6  bit_depth    u8 = 16
//!   7  reserved     u8 = 0
//!   8  width        u32
//!  12  height       u32
//!  16  frame_count  u32
//!  20  pitch_x      u16
//!  22  pitch_y      u16
//!  24  block_size   u32
//! frame record, once per frame (8 + 8 * block_count bytes)
//!   0  predictor    u8
//!   1  reserved     3 x u8 = 0
//!   4  block_count  u32
//!   8  block_sizes  u64 x block_count, compressed bytes per block
//! payload
//!   every block of frame 0, then every block of frame 1, ...
//! ```

use std::io::Write;

use crate::error::{Error, Result};
use crate::frame::{LensletGeometry, PredictorSpec};

pub const MAGIC: [u8; 4] = *b"PCBZ";
pub const VERSION: u8 = 1;
pub const BIT_DEPTH: u8 = 16;
pub const HEADER_LEN: usize = 28;
pub const FLAG_TEMPORAL: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerHeader {
    pub flags: u8,
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub pitch_x: u16,
    pub pitch_y: u16,
    pub block_size: u32,
}

impl ContainerHeader {
    pub fn geometry(&self) -> Result<LensletGeometry> {
        LensletGeometry::new(self.pitch_x, self.pitch_y)
    }

    pub fn uses_temporal(&self) -> bool {
        self.flags & FLAG_TEMPORAL != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub predictor: PredictorSpec,
    pub block_sizes: Vec<u64>,
}

impl FrameRecord {
    pub fn encoded_len(&self) -> usize {
        8 + 8 * self.block_sizes.len()
    }

    pub fn payload_len(&self) -> u64 {
        self.block_sizes.iter().sum()
    }
}

/// A parsed container borrowing its payload from the input buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container<'a> {
    pub header: ContainerHeader,
    pub records: Vec<FrameRecord>,
    /// Per frame, per block compressed payload.
    pub payloads: Vec<Vec<&'a [u8]>>,
}

/// Exact size of header plus frame records.
pub fn overhead_len(records: &[FrameRecord]) -> usize {
    HEADER_LEN + records.iter().map(FrameRecord::encoded_len).sum::<usize>()
}

/// Writes header, records and payloads. `payloads[f][b]` must be
/// `records[f].block_sizes[b]` bytes long.
pub fn write_container<W: Write>(
    out: &mut W,
    header: &ContainerHeader,
    records: &[FrameRecord],
    payloads: &[Vec<Vec<u8>>],
) -> Result<()> {
    validate(header, records, payloads)?;
    let mut head = Vec::with_capacity(overhead_len(records));
    head.extend_from_slice(&MAGIC);
    head.extend_from_slice(&[VERSION, header.flags, BIT_DEPTH, 0]);
    head.extend_from_slice(&header.width.to_le_bytes());
    head.extend_from_slice(&header.height.to_le_bytes());
    head.extend_from_slice(&header.frame_count.to_le_bytes());
    head.extend_from_slice(&header.pitch_x.to_le_bytes());
    head.extend_from_slice(&header.pitch_y.to_le_bytes());
    head.extend_from_slice(&header.block_size.to_le_bytes());
    for r in records {
        head.extend_from_slice(&[r.predictor.encode(), 0, 0, 0]);
        head.extend_from_slice(&(r.block_sizes.len() as u32).to_le_bytes());
        for s in &r.block_sizes {
            head.extend_from_slice(&s.to_le_bytes());
        }
    }
    out.write_all(&head)?;
    for block in payloads.iter().flatten() {
        out.write_all(block)?;
    }
    Ok(())
}

pub fn container_to_vec(
    header: &ContainerHeader,
    records: &[FrameRecord],
    payloads: &[Vec<Vec<u8>>],
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_container(&mut out, header, records, payloads)?;
    Ok(out)
}

fn validate(header: &ContainerHeader, records: &[FrameRecord], payloads: &[Vec<Vec<u8>>]) -> Result<()> {
    if header.frame_count as usize != records.len() || records.len() != payloads.len() {
        return Err(Error::InvalidRecord(format!(
            "header says {} frames, got {} records and {} payload groups",
            header.frame_count,
            records.len(),
            payloads.len()
        )));
    }
    if header.width == 0 || header.height == 0 || header.block_size == 0 {
        return Err(Error::InvalidRecord("width, height and block size must be positive".into()));
    }
    header.geometry()?;
    if let Some(first) = records.first() {
        if first.predictor.temporal() {
            return Err(Error::InvalidRecord("frame 0 cannot use the temporal predictor".into()));
        }
    }
    let any_temporal = records.iter().any(|r| r.predictor.temporal());
    if any_temporal && !header.uses_temporal() {
        return Err(Error::InvalidRecord("temporal records require the temporal header flag".into()));
    }
    for (f, (r, p)) in records.iter().zip(payloads).enumerate() {
        let lens: Vec<u64> = p.iter().map(|b| b.len() as u64).collect();
        if lens != r.block_sizes {
            return Err(Error::InvalidRecord(format!(
                "frame {f}: block table {:?} does not match payload lengths {lens:?}",
                r.block_sizes
            )));
        }
    }
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str, frame: Option<u32>) -> Result<&'a [u8]> {
        let remaining = self.data.len() - self.pos;
        if remaining < n {
            return Err(Error::CorruptContainer {
                offset: self.pos as u64,
                frame,
                block: None,
                reason: format!("truncated {what}: need {n} bytes, {remaining} left"),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str, frame: Option<u32>) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what, frame)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str, frame: Option<u32>) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what, frame)?.try_into().unwrap()))
    }
}

pub fn read_container(data: &[u8]) -> Result<Container<'_>> {
    let mut cur = Cursor { data, pos: 0 };
    if data.len() < 4 || data[..4] != MAGIC {
        let mut magic = [0u8; 4];
        let n = data.len().min(4);
        magic[..n].copy_from_slice(&data[..n]);
        return Err(Error::NotAContainer(magic));
    }
    let fixed = cur.take(HEADER_LEN, "header", None)?;
    if fixed[4] != VERSION {
        return Err(Error::UnsupportedVersion(fixed[4]));
    }
    if fixed[6] != BIT_DEPTH {
        return Err(Error::CorruptHeader(format!("bit depth {} (only 16 is supported)", fixed[6])));
    }
    let le32 = |at: usize| u32::from_le_bytes(fixed[at..at + 4].try_into().unwrap());
    let le16 = |at: usize| u16::from_le_bytes(fixed[at..at + 2].try_into().unwrap());
    let header = ContainerHeader {
        flags: fixed[5],
        width: le32(8),
        height: le32(12),
        frame_count: le32(16),
        pitch_x: le16(20),
        pitch_y: le16(22),
        block_size: le32(24),
    };
    if header.width == 0 || header.height == 0 || header.frame_count == 0 {
        return Err(Error::CorruptHeader(format!(
            "empty geometry {}x{} with {} frames",
            header.width, header.height, header.frame_count
        )));
    }
    if header.pitch_x == 0 || header.pitch_y == 0 || header.block_size == 0 {
        return Err(Error::CorruptHeader("zero lenslet pitch or block size".into()));
    }

    let frame_count = header.frame_count as usize;
    let mut records = Vec::with_capacity(frame_count.min(1 << 16));
    for f in 0..header.frame_count {
        let at = cur.pos;
        let head = cur.take(4, "frame record", Some(f))?;
        let predictor = PredictorSpec::decode(head[0])
            .map_err(|e| Error::CorruptHeader(format!("frame {f} at offset {at}: {e}")))?;
        if f == 0 && predictor.temporal() {
            return Err(Error::CorruptHeader("frame 0 is marked temporal".into()));
        }
        if predictor.temporal() && !header.uses_temporal() {
            return Err(Error::CorruptHeader(format!("frame {f} is temporal but the header flag is clear")));
        }
        let block_count = cur.u32("block count", Some(f))? as usize;
        let table_len = block_count.saturating_mul(8);
        if table_len > data.len() - cur.pos {
            return Err(Error::CorruptContainer {
                offset: cur.pos as u64,
                frame: Some(f),
                block: None,
                reason: format!("block table of {block_count} entries runs past end of file"),
            });
        }
        let block_sizes = (0..block_count).map(|_| cur.u64("block size", Some(f))).collect::<Result<Vec<_>>>()?;
        records.push(FrameRecord { predictor, block_sizes });
    }

    let mut payloads = Vec::with_capacity(records.len());
    for (f, r) in records.iter().enumerate() {
        let mut blocks = Vec::with_capacity(r.block_sizes.len());
        for (b, &size) in r.block_sizes.iter().enumerate() {
            let remaining = (data.len() - cur.pos) as u64;
            if size > remaining {
                return Err(Error::CorruptContainer {
                    offset: cur.pos as u64,
                    frame: Some(f as u32),
                    block: Some(b as u32),
                    reason: format!("payload truncated: block needs {size} bytes, {remaining} left"),
                });
            }
            blocks.push(&data[cur.pos..cur.pos + size as usize]);
            cur.pos += size as usize;
        }
        payloads.push(blocks);
    }
    if cur.pos != data.len() {
        return Err(Error::CorruptContainer {
            offset: cur.pos as u64,
            frame: None,
            block: None,
            reason: format!("{} unexpected trailing bytes", data.len() - cur.pos),
        });
    }
    Ok(Container { header, records, payloads })
}
