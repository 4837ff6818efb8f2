//! The `.ajpg` byte layout.
//!
//! ```text
//! "AJPG" | version u8 = 1 | padded h u32 | padded w u32 | orig h u32 | orig w u32 | norm u8
//! then for Y, Cb, Cr: record count u32, records
//! record: level u8 | coefficient count varint | run-length pairs
//! ```
//!
//! All fixed-width integers are big-endian. Chroma channels have half the
//! padded dimensions. A record's level `l` gives its size as the channel size
//! shifted right by `l`; positions are not stored, they follow from the order
//! of the records. Coefficients are listed in the diagonal order of
//! [`ZIGZAG`] up to the last nonzero one. Run-length pairs are
//! `(zero run: unsigned varint, value: zigzag-coded signed varint)`.

use alloc::vec::Vec;

use crate::estimator::NormKind;
use crate::transform::{CoeffBlock, BLOCK};

pub const MAGIC: [u8; 4] = *b"AJPG";
pub const VERSION: u8 = 1;
pub const CHANNELS: usize = 3;
/// Bytes before the first channel.
pub const HEADER_LEN: usize = 4 + 1 + 16 + 1;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("not an ajpg stream (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("stream ends inside the header")]
    TruncatedHeader,
    #[error("stream ends inside record {record} of channel {channel}")]
    Truncated { channel: usize, record: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(&'static str),
    #[error("unknown norm selector {0}")]
    InvalidNorm(u8),
    #[error("record {record} of channel {channel} has invalid level {level}")]
    InvalidLevel { channel: usize, record: usize, level: u8 },
    #[error("record {record} of channel {channel} ends in a zero coefficient")]
    TrailingZero { channel: usize, record: usize },
    #[error("record {record} of channel {channel} has more than 64 coefficients")]
    TooManyCoefficients { channel: usize, record: usize },
    #[error("record {record} of channel {channel} holds a value outside the 32-bit range")]
    ValueOutOfRange { channel: usize, record: usize },
    #[error("malformed varint in record {record} of channel {channel}")]
    VarintOverflow { channel: usize, record: usize },
    #[error("{0} bytes after the last record")]
    TrailingBytes(usize),
    #[error("channel {channel}: {reason}")]
    Placement { channel: usize, reason: &'static str },
}

/// Zero-based `(row, col)` of the `n`-th stored coefficient. Diagonals are
/// taken by increasing `row + col`, each from bottom-left to top-right.
pub const ZIGZAG: [(u8, u8); 64] = build_zigzag();

const fn build_zigzag() -> [(u8, u8); 64] {
    let mut out = [(0u8, 0u8); 64];
    let mut n = 0;
    let mut d = 0;
    while d < 2 * BLOCK - 1 {
        let mut row = if d < BLOCK { d } else { BLOCK - 1 };
        loop {
            let col = d - row;
            if col >= BLOCK {
                break;
            }
            out[n] = (row as u8, col as u8);
            n += 1;
            if row == 0 {
                break;
            }
            row -= 1;
        }
        d += 1;
    }
    out
}

const ZIGZAG_INDEX: [[u8; BLOCK]; BLOCK] = build_index();

const fn build_index() -> [[u8; BLOCK]; BLOCK] {
    let mut out = [[0u8; BLOCK]; BLOCK];
    let mut n = 0;
    while n < 64 {
        let (r, c) = ZIGZAG[n];
        out[r as usize][c as usize] = n as u8;
        n += 1;
    }
    out
}

/// Storage position (zero-based) of the coefficient at zero-based `(row, col)`.
pub fn zigzag_index(row: usize, col: usize) -> Option<usize> {
    (row < BLOCK && col < BLOCK).then(|| ZIGZAG_INDEX[row][col] as usize)
}

/// Inverse of [`zigzag_index`].
pub fn zigzag_position(n: usize) -> Option<(usize, usize)> {
    ZIGZAG.get(n).map(|&(r, c)| (r as usize, c as usize))
}

/// Coefficients in storage order up to the last nonzero one.
pub fn truncate_coeffs(block: &CoeffBlock) -> Vec<i32> {
    let mut out: Vec<i32> = ZIGZAG.iter().map(|&(r, c)| block.0[r as usize][c as usize]).collect();
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Inverse of [`truncate_coeffs`]; missing entries are zero.
pub fn untruncate_coeffs(coeffs: &[i32]) -> Option<CoeffBlock> {
    if coeffs.len() > 64 {
        return None;
    }
    let mut block = CoeffBlock::default();
    for (&v, &(r, c)) in coeffs.iter().zip(ZIGZAG.iter()) {
        block.0[r as usize][c as usize] = v;
    }
    Some(block)
}

pub fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Reads an unsigned LEB128 varint; `None` on truncation, `Some(Err)` on overflow.
pub fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<Result<u64, ()>> {
    let mut v: u64 = 0;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        if shift == 63 && b > 1 {
            return Some(Err(()));
        }
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Some(Ok(v));
        }
        shift += 7;
        if shift > 63 {
            return Some(Err(()));
        }
    }
}

pub fn zigzag_encode(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn zigzag_decode(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

/// `(zero run, value)` pairs; a trailing zero run becomes `(run, 0)`.
pub fn rle_pairs(values: &[i32]) -> Vec<(u64, i32)> {
    let mut out = Vec::new();
    let mut run = 0u64;
    for &v in values {
        if v == 0 {
            run += 1;
        } else {
            out.push((run, v));
            run = 0;
        }
    }
    if run > 0 {
        out.push((run, 0));
    }
    out
}

pub fn rle_encode(values: &[i32], out: &mut Vec<u8>) {
    for (run, v) in rle_pairs(values) {
        write_varint(out, run);
        write_varint(out, zigzag_encode(i64::from(v)));
    }
}

/// Decodes a complete run-length stream of at most `max_len` values.
pub fn rle_decode(bytes: &[u8], max_len: usize) -> Result<Vec<i32>, FormatError> {
    let mut out = Vec::new();
    let mut pos = 0;
    let err = FormatError::Truncated { channel: 0, record: 0 };
    while pos < bytes.len() {
        let (run, v) = read_pair(bytes, &mut pos, 0, 0)?.ok_or(err.clone())?;
        push_zeros(&mut out, run, max_len).ok_or(err.clone())?;
        if v != 0 && out.len() == max_len {
            return Err(err);
        }
        if v == 0 {
            if pos != bytes.len() {
                return Err(FormatError::TrailingBytes(bytes.len() - pos));
            }
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

fn push_zeros(out: &mut Vec<i32>, run: u64, limit: usize) -> Option<()> {
    let run = usize::try_from(run).ok()?;
    if out.len().checked_add(run)? > limit {
        return None;
    }
    out.resize(out.len() + run, 0);
    Some(())
}

fn read_pair(bytes: &[u8], pos: &mut usize, channel: usize, record: usize) -> Result<Option<(u64, i32)>, FormatError> {
    let overflow = FormatError::VarintOverflow { channel, record };
    let Some(run) = read_varint(bytes, pos) else {
        return Ok(None);
    };
    let run = run.map_err(|_| overflow.clone())?;
    let Some(v) = read_varint(bytes, pos) else {
        return Ok(None);
    };
    let v = zigzag_decode(v.map_err(|_| overflow)?);
    let v = i32::try_from(v).map_err(|_| FormatError::ValueOutOfRange { channel, record })?;
    Ok(Some((run, v)))
}

/// One element: its refinement level and truncated coefficient list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementRecord {
    pub level: u8,
    pub coeffs: Vec<i32>,
}

impl ElementRecord {
    pub fn from_block(level: u8, block: &CoeffBlock) -> Self {
        Self {
            level,
            coeffs: truncate_coeffs(block),
        }
    }

    pub fn block(&self) -> Option<CoeffBlock> {
        untruncate_coeffs(&self.coeffs)
    }
}

/// Parsed `.ajpg` stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedImage {
    /// Padded luma height.
    pub height: u32,
    /// Padded luma width.
    pub width: u32,
    pub orig_height: u32,
    pub orig_width: u32,
    pub norm: NormKind,
    /// Records of Y, Cb, Cr in lexicographic element order.
    pub channels: [Vec<ElementRecord>; CHANNELS],
}

impl CompressedImage {
    /// Padded dimensions of channel `c` (chroma is half size).
    pub fn channel_dims(&self, c: usize) -> (usize, usize) {
        let (h, w) = (self.height as usize, self.width as usize);
        if c == 0 {
            (h, w)
        } else {
            (h / 2, w / 2)
        }
    }

    /// Whether `level` describes an element of at least 8 pixels per side in channel `c`.
    pub fn level_is_valid(&self, c: usize, level: u8) -> bool {
        let (h, w) = self.channel_dims(c);
        level < 32 && (h.min(w) >> level) >= BLOCK
    }

    /// Largest possible record count of channel `c`; every element covers at least one 8x8 block.
    pub fn capacity(&self, c: usize) -> usize {
        let (h, w) = self.channel_dims(c);
        (h / BLOCK) * (w / BLOCK)
    }

    pub fn element_count(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    fn validate_header(&self) -> Result<(), FormatError> {
        let (h, w) = (self.height, self.width);
        if !h.is_power_of_two() || !w.is_power_of_two() {
            return Err(FormatError::InvalidHeader("padded dimensions must be powers of two"));
        }
        if h < 2 * BLOCK as u32 || w < 2 * BLOCK as u32 {
            return Err(FormatError::InvalidHeader("padded dimensions must be at least 16"));
        }
        if self.orig_height == 0 || self.orig_width == 0 {
            return Err(FormatError::InvalidHeader("empty image"));
        }
        if self.orig_height > h || self.orig_width > w {
            return Err(FormatError::InvalidHeader("original dimensions exceed padded ones"));
        }
        Ok(())
    }

    fn validate_record(&self, channel: usize, record: usize, r: &ElementRecord) -> Result<(), FormatError> {
        if !self.level_is_valid(channel, r.level) {
            return Err(FormatError::InvalidLevel {
                channel,
                record,
                level: r.level,
            });
        }
        if r.coeffs.len() > 64 {
            return Err(FormatError::TooManyCoefficients { channel, record });
        }
        if r.coeffs.last() == Some(&0) {
            return Err(FormatError::TrailingZero { channel, record });
        }
        Ok(())
    }

    pub fn serialize(&self) -> Result<Vec<u8>, FormatError> {
        self.validate_header()?;
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.element_count());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        for v in [self.height, self.width, self.orig_height, self.orig_width] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.push(self.norm.to_byte());
        for (c, records) in self.channels.iter().enumerate() {
            if records.len() > self.capacity(c) {
                return Err(FormatError::InvalidHeader("record count exceeds channel capacity"));
            }
            let count = records.len() as u32;
            out.extend_from_slice(&count.to_be_bytes());
            for (i, r) in records.iter().enumerate() {
                self.validate_record(c, i, r)?;
                out.push(r.level);
                write_varint(&mut out, r.coeffs.len() as u64);
                rle_encode(&r.coeffs, &mut out);
            }
        }
        Ok(out)
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(FormatError::TruncatedHeader);
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]));
        }
        let u32_at = |p: usize| u32::from_be_bytes([bytes[p], bytes[p + 1], bytes[p + 2], bytes[p + 3]]);
        let norm = NormKind::from_byte(bytes[21]).ok_or(FormatError::InvalidNorm(bytes[21]))?;
        let mut img = CompressedImage {
            height: u32_at(5),
            width: u32_at(9),
            orig_height: u32_at(13),
            orig_width: u32_at(17),
            norm,
            channels: Default::default(),
        };
        img.validate_header()?;
        let mut pos = HEADER_LEN;
        for c in 0..CHANNELS {
            if bytes.len() < pos + 4 {
                return Err(FormatError::Truncated { channel: c, record: 0 });
            }
            let count = u32_at(pos) as usize;
            pos += 4;
            if count > img.capacity(c) {
                return Err(FormatError::InvalidHeader("record count exceeds channel capacity"));
            }
            let mut records = Vec::with_capacity(count);
            for i in 0..count {
                let r = read_record(bytes, &mut pos, c, i)?;
                img.validate_record(c, i, &r)?;
                records.push(r);
            }
            img.channels[c] = records;
        }
        if pos != bytes.len() {
            return Err(FormatError::TrailingBytes(bytes.len() - pos));
        }
        Ok(img)
    }
}

fn read_record(bytes: &[u8], pos: &mut usize, channel: usize, record: usize) -> Result<ElementRecord, FormatError> {
    let truncated = FormatError::Truncated { channel, record };
    let level = *bytes.get(*pos).ok_or(truncated.clone())?;
    *pos += 1;
    let count = read_varint(bytes, pos)
        .ok_or(truncated.clone())?
        .map_err(|_| FormatError::VarintOverflow { channel, record })?;
    if count > 64 {
        return Err(FormatError::TooManyCoefficients { channel, record });
    }
    let count = count as usize;
    let mut coeffs = Vec::with_capacity(count);
    while coeffs.len() < count {
        let (run, v) = read_pair(bytes, pos, channel, record)?.ok_or(truncated.clone())?;
        push_zeros(&mut coeffs, run, count).ok_or(FormatError::TooManyCoefficients { channel, record })?;
        if v == 0 || coeffs.len() == count {
            // a complete record never needs the trailing-run sentinel
            return Err(FormatError::TrailingZero { channel, record });
        }
        coeffs.push(v);
    }
    Ok(ElementRecord { level, coeffs })
}
