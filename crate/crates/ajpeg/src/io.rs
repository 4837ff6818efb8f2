//! Binary PPM (P6, 8-bit) and PNG raster IO.

use std::fs;
use std::io::Write;
use std::path::Path;

use ajpeg_core::RasterImage;

use crate::error::{AppError, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Parses a binary PPM. Comments are allowed between header fields.
pub fn parse_ppm(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err("not a binary PPM (P6)".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for f in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *f = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed header field")?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after header".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    let n = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or("image too large")?;
    let data = bytes.get(pos..pos + n).ok_or("truncated pixel data")?;
    let samples = data.iter().map(|&b| (b as f64 / maxval as f64).min(1.0)).collect();
    RasterImage::new(height, width, samples).map_err(|e| e.to_string())
}

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(&img.to_rgb8());
    out
}

fn parse_png(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| e.to_string())?;
    let rgb = decoded.to_rgb8();
    RasterImage::from_rgb8(rgb.height() as usize, rgb.width() as usize, rgb.as_raw()).map_err(|e| e.to_string())
}

/// Reads a PPM or PNG file, chosen by content.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    let parsed = if bytes.starts_with(PNG_SIGNATURE) {
        parse_png(&bytes)
    } else {
        parse_ppm(&bytes)
    };
    parsed.map_err(|reason| AppError::bad_image(path, reason))
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Writes PNG for a `.png` extension, PPM otherwise.
pub fn write_image(path: &Path, img: &RasterImage) -> Result<()> {
    let bytes = if is_png(path) {
        let mut buf = std::io::Cursor::new(Vec::new());
        image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_rgb8())
            .expect("buffer sized from the image")
            .write_to(&mut buf, image::ImageFormat::Png)
            .map_err(|e| AppError::bad_image(path, e.to_string()))?;
        buf.into_inner()
    } else {
        encode_ppm(img)
    };
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| AppError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}
