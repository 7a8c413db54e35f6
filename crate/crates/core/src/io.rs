//! File I/O: PNG / PPM / PGM frames, 8-bit mask images and Middlebury `.flo`
//! flow files.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::field::FlowField;
use crate::frame::Frame;
use crate::mask::{HoleMask, MaskMap};

/// Magic tag opening every `.flo` file (the float 202021.25 in little endian).
pub const FLO_MAGIC: &[u8; 4] = b"PIEH";

const FLO_HEADER_LEN: usize = 12;

/// Loads an 8/16-bit gray or RGB image (PNG, PPM, PGM). Alpha is dropped and
/// samples are divided by the format's maximum value.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, data): (usize, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, scale8(b.as_raw())),
        DynamicImage::ImageLumaA8(b) => (1, scale8(&strip_alpha(b.as_raw(), 1))),
        DynamicImage::ImageRgb8(b) => (3, scale8(b.as_raw())),
        DynamicImage::ImageRgba8(b) => (3, scale8(&strip_alpha(b.as_raw(), 3))),
        DynamicImage::ImageLuma16(b) => (1, scale16(b.as_raw())),
        DynamicImage::ImageLumaA16(b) => (1, scale16(&strip_alpha(b.as_raw(), 1))),
        DynamicImage::ImageRgb16(b) => (3, scale16(b.as_raw())),
        DynamicImage::ImageRgba16(b) => (3, scale16(&strip_alpha(b.as_raw(), 3))),
        other => {
            return Err(Error::format(
                path,
                format!("unsupported color type {:?}", other.color()),
            ))
        }
    };
    Frame::new(w, h, channels, data).map_err(|e| Error::format(path, e.to_string()))
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format().is_none() {
        return Err(Error::format(path, "unrecognized image format"));
    }
    // The file opened, so any failure from here on is a malformed image.
    reader
        .decode()
        .map_err(|e| Error::format(path, format!("cannot decode: {e}")))
}

fn strip_alpha<T: Copy>(raw: &[T], color: usize) -> Vec<T> {
    raw.chunks_exact(color + 1)
        .flat_map(|p| p[..color].iter().copied())
        .collect()
}

fn scale8(raw: &[u8]) -> Vec<f64> {
    raw.iter().map(|&b| b as f64 / 255.0).collect()
}

fn scale16(raw: &[u16]) -> Vec<f64> {
    raw.iter().map(|&b| b as f64 / 65535.0).collect()
}

/// Encodes a sample as a byte: clamp to `[0, 1]`, scale, round half up.
#[inline]
pub fn quantize8(s: f64) -> u8 {
    (s.clamp(0.0, 1.0) * 255.0 + 0.5).floor().min(255.0) as u8
}

/// Writes an 8-bit PNG (gray or RGB, following the frame's channel count).
pub fn save_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let bytes: Vec<u8> = frame.data().iter().map(|&s| quantize8(s)).collect();
    let img = if frame.channels() == 1 {
        DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer size"))
    } else {
        DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer size"))
    };
    write_png(&img, path)
}

fn write_png(img: &DynamicImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::format(path, other.to_string()),
        })
}

/// Writes a mask as 8-bit grayscale, byte = round(w * 255).
pub fn save_mask(mask: &MaskMap, path: impl AsRef<Path>) -> Result<()> {
    let bytes = mask.weights().iter().map(|&w| quantize8(w)).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes).expect("buffer size");
    write_png(&DynamicImage::ImageLuma8(img), path.as_ref())
}

/// Reads a grayscale (or color, reduced to luma) image as a mask, w = value / max.
pub fn load_mask(path: impl AsRef<Path>) -> Result<MaskMap> {
    let frame = load_frame(path)?;
    Ok(MaskMap::from_raw(frame.width(), frame.height(), frame.luma()))
}

/// Writes holes as an 8-bit grayscale PNG with 255 marking a hole.
pub fn save_holes(holes: &HoleMask, path: impl AsRef<Path>) -> Result<()> {
    let bytes = holes.holes().iter().map(|&h| if h { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(holes.width() as u32, holes.height() as u32, bytes).expect("buffer size");
    write_png(&DynamicImage::ImageLuma8(img), path.as_ref())
}

/// Serializes a flow field in the Middlebury `.flo` layout.
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(FLO_HEADER_LEN + flow.u().len() * 8);
    out.extend_from_slice(FLO_MAGIC);
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<FlowField> {
    if bytes.len() < FLO_HEADER_LEN {
        return Err(Error::format(path, "truncated .flo header"));
    }
    if &bytes[..4] != FLO_MAGIC {
        return Err(Error::format(
            path,
            format!("bad .flo magic {:?}", String::from_utf8_lossy(&bytes[..4])),
        ));
    }
    let read_i32 = |at: usize| i32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let (w, h) = (read_i32(4), read_i32(8));
    if w <= 0 || h <= 0 {
        return Err(Error::format(path, format!("invalid .flo size {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(FLO_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::format(
            path,
            format!(
                "header says {w}x{h} but payload holds {} bytes",
                bytes.len() - FLO_HEADER_LEN
            ),
        ));
    }
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for pair in bytes[FLO_HEADER_LEN..].chunks_exact(8) {
        u.push(f32::from_le_bytes(pair[..4].try_into().unwrap()));
        v.push(f32::from_le_bytes(pair[4..].try_into().unwrap()));
    }
    FlowField::new(w, h, u, v).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_flo(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_flo(flow)).map_err(|e| Error::io(path, e))
}

pub fn load_flo(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_flo(&bytes, path)
}
