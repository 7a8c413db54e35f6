use crate::error::{Error, Result};

/// Dense displacement field in pixels. A vector `(u, v)` stored at `p` means
/// the content at `p` in the source frame appears at `p + (u, v)` in the
/// target frame.
///
/// Components are stored as `f32`, matching the `.flo` interchange format.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f32>, v: Vec<f32>) -> Result<Self> {
        let n = width * height;
        if u.len() != n || v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} flow needs {n} vectors, got u={} v={}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "flow contains non-finite displacements".into(),
            ));
        }
        Ok(FlowField { width, height, u, v })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    pub fn uniform(width: usize, height: usize, u: f32, v: f32) -> Result<Self> {
        Self::new(width, height, vec![u; width * height], vec![v; width * height])
    }

    /// Converts `f64` components (as produced by the estimator) to storage
    /// precision. Non-finite values are rejected.
    pub(crate) fn from_f64(width: usize, height: usize, u: &[f64], v: &[f64]) -> Result<Self> {
        Self::new(
            width,
            height,
            u.iter().map(|&x| x as f32).collect(),
            v.iter().map(|&x| x as f32).collect(),
        )
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

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    /// Multiplies every vector by `t`, which must lie in `[0, 1]`.
    ///
    /// Under a linear-motion model, `scaled(t)` of the full inter-frame flow
    /// is the flow to intermediate time `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("flow scale {t} outside [0, 1]")));
        }
        let t = t as f32;
        Ok(FlowField {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|x| x * t).collect(),
            v: self.v.iter().map(|x| x * t).collect(),
        })
    }

    pub fn negated(&self) -> Self {
        FlowField {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|x| -x).collect(),
            v: self.v.iter().map(|x| -x).collect(),
        }
    }

    pub fn mean_magnitude(&self) -> f64 {
        let n = self.u.len().max(1) as f64;
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| (u as f64).hypot(v as f64))
            .sum::<f64>()
            / n
    }

    pub fn max_magnitude(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| (u as f64).hypot(v as f64))
            .fold(0.0, f64::max)
    }

    /// Mean endpoint error against a constant ground-truth vector, restricted
    /// to the centered window covering `fraction` of each dimension.
    pub fn mean_epe_uniform(&self, gt_u: f64, gt_v: f64, fraction: f64) -> f64 {
        let (x0, x1) = central_span(self.width, fraction);
        let (y0, y1) = central_span(self.height, fraction);
        let mut sum = 0.0;
        let mut count = 0usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let (u, v) = self.at(x, y);
                sum += (u as f64 - gt_u).hypot(v as f64 - gt_v);
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }
}

/// Half-open index range of the centered span covering `fraction` of `len`.
pub fn central_span(len: usize, fraction: f64) -> (usize, usize) {
    let keep = ((len as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let keep = keep.clamp(1, len);
    let start = (len - keep) / 2;
    (start, start + keep)
}
