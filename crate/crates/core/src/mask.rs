use crate::error::{Error, Result};

/// Every weight is snapped to a multiple of this step, which makes `1 - w`
/// exact in `f64` and keeps complemented masks on the same grid.
const WEIGHT_STEP: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
fn snap(w: f64) -> f64 {
    (w / WEIGHT_STEP).round() * WEIGHT_STEP
}

/// Per-pixel weight map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskMap {
    width: usize,
    height: usize,
    w: Vec<f64>,
}

impl MaskMap {
    pub fn new(width: usize, height: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} mask needs {} weights, got {}",
                width * height,
                w.len()
            )));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!(
                "mask weight {i} = {x} lies outside [0, 1]"
            )));
        }
        Ok(MaskMap {
            width,
            height,
            w: w.into_iter().map(snap).collect(),
        })
    }

    /// Clamps into `[0, 1]` instead of rejecting; NaN becomes 0.
    pub(crate) fn from_raw(width: usize, height: usize, w: Vec<f64>) -> Self {
        debug_assert_eq!(w.len(), width * height);
        MaskMap {
            width,
            height,
            w: w.into_iter()
                .map(|x| if x.is_nan() { 0.0 } else { snap(x.clamp(0.0, 1.0)) })
                .collect(),
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.w[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Per-pixel `1 - w`. Exact, so `m.complement().complement() == m`.
    pub fn complement(&self) -> MaskMap {
        MaskMap {
            width: self.width,
            height: self.height,
            w: self.w.iter().map(|x| 1.0 - x).collect(),
        }
    }

    /// Hard mask: 1 where `w >= threshold`, else 0.
    pub fn binarized(&self, threshold: f64) -> MaskMap {
        MaskMap {
            width: self.width,
            height: self.height,
            w: self
                .w
                .iter()
                .map(|&x| if x >= threshold { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Binary coverage map produced by forward warping; `true` marks a hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleMask {
    width: usize,
    height: usize,
    h: Vec<bool>,
}

impl HoleMask {
    pub fn new(width: usize, height: usize, h: Vec<bool>) -> Result<Self> {
        if h.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} hole mask needs {} entries, got {}",
                width * height,
                h.len()
            )));
        }
        Ok(HoleMask { width, height, h })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        HoleMask {
            width,
            height,
            h: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn holes(&self) -> &[bool] {
        &self.h
    }

    #[inline]
    pub fn is_hole(&self, x: usize, y: usize) -> bool {
        self.h[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.h.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.h.iter().any(|&b| b)
    }

    /// Pixels that are holes in both masks.
    pub fn intersection(&self, other: &HoleMask) -> Result<HoleMask> {
        if self.dims() != other.dims() {
            return Err(Error::dims("hole mask intersection", self.dims(), other.dims()));
        }
        Ok(HoleMask {
            width: self.width,
            height: self.height,
            h: self.h.iter().zip(&other.h).map(|(&a, &b)| a && b).collect(),
        })
    }

    /// Left-right mirror image.
    pub fn mirrored_horizontally(&self) -> HoleMask {
        let mut h = Vec::with_capacity(self.h.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                h.push(self.is_hole(x, y));
            }
        }
        HoleMask {
            width: self.width,
            height: self.height,
            h,
        }
    }
}
