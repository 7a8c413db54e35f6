//! Image container shared by every stage of the pipeline.
//!
//! Samples are `f64` in `[0, 1]`, stored row-major with channels interleaved.
//! The pixel grid follows the usual raster convention: `x` grows to the right,
//! `y` grows downward and integer coordinates address pixel centers.

use crate::error::{Error, Result};

/// Rec. 601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Frame {
    /// Validating constructor: rejects mismatched lengths, unsupported channel
    /// counts, and samples outside `[0, 1]`.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "frames have 1 or 3 channels, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{channels} frame needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some((i, s)) = data.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidArgument(format!(
                "sample {i} = {s} lies outside [0, 1]"
            )));
        }
        Ok(Frame {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds a frame whose samples are already known to be in range.
    /// Values are clamped so that rounding noise never breaks the invariant.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        for s in &mut data {
            *s = s.clamp(0.0, 1.0);
        }
        Frame {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds a frame by evaluating `f(x, y, c)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Bilinear sample at a sub-pixel position with clamp-to-edge padding.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.channels];
        self.sample_bilinear_into(x, y, &mut out);
        out
    }

    pub fn sample_bilinear_into(&self, x: f64, y: f64, out: &mut [f64]) {
        let (x0, x1, fx) = bilinear_taps(x, self.width);
        let (y0, y1, fy) = bilinear_taps(y, self.height);
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            let top = lerp(self.get(x0, y0, c), self.get(x1, y0, c), fx);
            let bottom = lerp(self.get(x0, y1, c), self.get(x1, y1, c), fx);
            *o = lerp(top, bottom, fy);
        }
    }

    /// Rec. 601 luma, still on the `[0, 1]` scale. Single-channel frames are
    /// returned as-is.
    pub fn luma(&self) -> Vec<f64> {
        if self.channels == 1 {
            return self.data.clone();
        }
        self.data
            .chunks_exact(3)
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            .collect()
    }

    pub(crate) fn ensure_same_shape(&self, other: &Frame, what: &str) -> Result<()> {
        if self.dims() != other.dims() || self.channels != other.channels {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )));
        }
        Ok(())
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

/// Clamps `coord` into `[0, len - 1]` and returns the two taps plus the
/// fractional weight of the second one.
#[inline]
pub(crate) fn bilinear_taps(coord: f64, len: usize) -> (usize, usize, f64) {
    let max = (len - 1) as f64;
    let c = if coord.is_nan() {
        0.0
    } else {
        coord.clamp(0.0, max)
    };
    let i0 = c.floor();
    let frac = c - i0;
    let i0 = i0 as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, frac)
}
