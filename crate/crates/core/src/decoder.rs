//! Reconstruction from ordered element records.
//!
//! Positions are not stored. Each record is placed at the lexicographically
//! smallest empty pixel, which is always one of the pixels directly right of
//! a placed element's top-right corner or directly below its bottom-left
//! corner. Those pixels are kept in an ordered candidate set; occupancy is
//! tracked with one interval map per row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::bitstream::{CompressedImage, ElementRecord, FormatError, CHANNELS};
use crate::image::{upsample_chroma, ycbcr_to_rgb, Plane, RasterImage};
use crate::refiner::Element;
use crate::transform::{TlTransform, QUANT_MATRIX};
use crate::Result;

/// Occupancy and candidate pixels of a channel being filled.
#[derive(Clone, Debug)]
pub struct PlacementState {
    height: usize,
    width: usize,
    // per row: start column -> end column (exclusive) of occupied runs
    rows: Vec<BTreeMap<usize, usize>>,
    candidates: BTreeSet<(usize, usize)>,
    filled: usize,
}

impl PlacementState {
    pub fn new(height: usize, width: usize) -> Self {
        let mut candidates = BTreeSet::new();
        if height > 0 && width > 0 {
            candidates.insert((0, 0));
        }
        Self {
            height,
            width,
            rows: alloc::vec![BTreeMap::new(); height],
            candidates,
            filled: 0,
        }
    }

    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.rows[row]
            .range(..=col)
            .next_back()
            .is_some_and(|(_, &end)| end > col)
    }

    fn row_overlaps(&self, row: usize, col: usize, width: usize) -> bool {
        self.rows[row]
            .range(..col + width)
            .next_back()
            .is_some_and(|(_, &end)| end > col)
    }

    pub fn is_full(&self) -> bool {
        self.filled == self.height * self.width
    }

    pub fn candidates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.candidates.iter().copied()
    }

    /// The smallest empty pixel, dropping stale candidates on the way.
    pub fn next_empty(&mut self) -> Option<(usize, usize)> {
        while let Some(&(r, c)) = self.candidates.first() {
            if self.is_occupied(r, c) {
                self.candidates.pop_first();
            } else {
                return Some((r, c));
            }
        }
        None
    }

    /// Places an element at the smallest empty pixel.
    pub fn place(&mut self, height: usize, width: usize) -> core::result::Result<(usize, usize), &'static str> {
        let (r, c) = self.next_empty().ok_or("more records than the channel can hold")?;
        if r + height > self.height || c + width > self.width {
            return Err("element exceeds the channel bounds");
        }
        if (r..r + height).any(|i| self.row_overlaps(i, c, width)) {
            return Err("element overlaps an occupied region");
        }
        for row in &mut self.rows[r..r + height] {
            insert_run(row, c, c + width);
        }
        self.filled += height * width;
        self.candidates.pop_first();
        if c + width < self.width {
            self.candidates.insert((r, c + width));
        }
        if r + height < self.height {
            self.candidates.insert((r + height, c));
        }
        Ok((r, c))
    }
}

// Inserts [start, end) into a disjoint run map, merging with touching neighbours.
fn insert_run(row: &mut BTreeMap<usize, usize>, mut start: usize, mut end: usize) {
    if let Some((&s, &e)) = row.range(..start).next_back() {
        if e == start {
            row.remove(&s);
            start = s;
        }
    }
    if let Some(e) = row.remove(&end) {
        end = e;
    }
    row.insert(start, end);
}

/// Positions of all records of one channel.
pub fn place_records(records: &[ElementRecord], height: usize, width: usize, channel: usize) -> Result<Vec<Element>> {
    let mut state = PlacementState::new(height, width);
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let (eh, ew) = (height >> r.level, width >> r.level);
        let (row, col) = state
            .place(eh, ew)
            .map_err(|reason| FormatError::Placement { channel, reason })?;
        out.push(Element {
            row,
            col,
            height: eh,
            width: ew,
            level: r.level,
        });
    }
    if !state.is_full() {
        return Err(FormatError::Placement {
            channel,
            reason: "records exhausted before the channel was filled",
        }
        .into());
    }
    Ok(out)
}

/// Fills a channel from its records.
pub fn reconstruct_channel(records: &[ElementRecord], height: usize, width: usize, channel: usize) -> Result<Plane> {
    let elements = place_records(records, height, width, channel)?;
    let mut plane = Plane::zeros(height, width);
    let mut transforms: BTreeMap<(usize, usize), TlTransform> = BTreeMap::new();
    for (i, (e, r)) in elements.iter().zip(records).enumerate() {
        let block = r
            .block()
            .ok_or(FormatError::TooManyCoefficients { channel, record: i })?;
        let t = match transforms.entry((e.height, e.width)) {
            alloc::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
            alloc::collections::btree_map::Entry::Vacant(v) => v.insert(TlTransform::new(e.height, e.width)?),
        };
        plane.write_block(e.row, e.col, &t.decode(&block, &QUANT_MATRIX));
    }
    Ok(plane)
}

/// Padded Y, Cb, Cr planes of a parsed stream (chroma at half size).
pub fn reconstruct_channels(img: &CompressedImage) -> Result<[Plane; CHANNELS]> {
    let [y, cb, cr] = [0, 1, 2].map(|c| {
        let (h, w) = img.channel_dims(c);
        reconstruct_channel(&img.channels[c], h, w, c)
    });
    Ok([y?, cb?, cr?])
}

/// Decodes a parsed stream into an RGB image of the original size.
pub fn decode_image(img: &CompressedImage) -> Result<RasterImage> {
    let [y, cb, cr] = reconstruct_channels(img)?;
    let (h, w) = img.channel_dims(0);
    let (oh, ow) = (img.orig_height as usize, img.orig_width as usize);
    let cb = upsample_chroma(&cb, h, w)?;
    let cr = upsample_chroma(&cr, h, w)?;
    ycbcr_to_rgb(&y.crop(oh, ow), &cb.crop(oh, ow), &cr.crop(oh, ow))
}

/// Decodes an `.ajpg` byte stream.
pub fn decode(bytes: &[u8]) -> Result<RasterImage> {
    decode_image(&CompressedImage::deserialize(bytes)?)
}
