//! Single-channel `f64` scratch image used by the estimator, saliency and
//! SSIM. Every neighborhood operation uses clamp-to-edge padding.

use crate::frame::bilinear_taps;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Plane { width, height, data }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![0.0; width * height])
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.at(xc, yc)
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, x1, fx) = bilinear_taps(x, self.width);
        let (y0, y1, fy) = bilinear_taps(y, self.height);
        let top = self.at(x0, y0) + (self.at(x1, y0) - self.at(x0, y0)) * fx;
        let bottom = self.at(x0, y1) + (self.at(x1, y1) - self.at(x0, y1)) * fx;
        top + (bottom - top) * fy
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane::new(self.width, self.height, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Separable 1-D convolution along rows then columns with clamped borders.
    pub fn convolve_separable(&self, kernel: &[f64]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let mut tmp = Plane::zeros(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = 0.0;
                for (k, &wk) in kernel.iter().enumerate() {
                    acc += wk * self.at_clamped(x as isize + k as isize - r, y as isize);
                }
                tmp.data[y * self.width + x] = acc;
            }
        }
        let mut out = Plane::zeros(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = 0.0;
                for (k, &wk) in kernel.iter().enumerate() {
                    acc += wk * tmp.at_clamped(x as isize, y as isize + k as isize - r);
                }
                out.data[y * self.width + x] = acc;
            }
        }
        out
    }

    pub fn gaussian_blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil() as usize;
        self.convolve_separable(&gaussian_kernel(sigma, radius))
    }

    /// Mean over a `size x size` window (odd size).
    pub fn box_filter(&self, size: usize) -> Plane {
        let k = vec![1.0 / size as f64; size];
        self.convolve_separable(&k)
    }

    /// Bilinear resampling with pixel-center alignment.
    pub fn resize(&self, width: usize, height: usize) -> Plane {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = Plane::zeros(width, height);
        for y in 0..height {
            let fy = (y as f64 + 0.5) * sy - 0.5;
            for x in 0..width {
                let fx = (x as f64 + 0.5) * sx - 0.5;
                out.data[y * width + x] = self.sample(fx, fy);
            }
        }
        out
    }

    /// Central-difference gradients (one-sided at clamped borders).
    pub fn gradients(&self) -> (Plane, Plane) {
        let mut gx = Plane::zeros(self.width, self.height);
        let mut gy = Plane::zeros(self.width, self.height);
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let i = y as usize * self.width + x as usize;
                gx.data[i] = 0.5 * (self.at_clamped(x + 1, y) - self.at_clamped(x - 1, y));
                gy.data[i] = 0.5 * (self.at_clamped(x, y + 1) - self.at_clamped(x, y - 1));
            }
        }
        (gx, gy)
    }
}

/// Normalized Gaussian taps `exp(-k^2 / 2 sigma^2)` for `k` in `-radius..=radius`.
pub(crate) fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}
