//! Foreground masks for region-weighted evaluation: externally computed maps
//! or a built-in spectral-residual detector.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::frame::Frame;
use crate::io::load_mask;
use crate::mask::MaskMap;
use crate::plane::Plane;

/// Working resolution of the spectral-residual detector.
pub const SPECTRAL_SIZE: usize = 64;
pub const SPECTRAL_SMOOTHING_SIGMA: f64 = 2.5;
const RESIDUAL_FILTER: usize = 3;
/// Amplitudes below this fraction of the spectral peak are clamped before the log.
const LOG_AMPLITUDE_FLOOR: f64 = 1e-5;

/// Loads a grayscale saliency map, rescaled bilinearly to `width x height`
/// when its size differs.
pub fn load_saliency(path: impl AsRef<Path>, width: usize, height: usize) -> Result<MaskMap> {
    let m = load_mask(path)?;
    if m.dims() == (width, height) {
        return Ok(m);
    }
    let p = Plane::new(m.width(), m.height(), m.weights().to_vec()).resize(width, height);
    Ok(MaskMap::from_raw(width, height, p.data))
}

/// Spectral-residual saliency.
///
/// Luma is resampled to 64x64 and transformed; the log-amplitude spectrum
/// minus its 3x3 local mean is recombined with the original phase and
/// inverted. Squared magnitudes are Gaussian-smoothed, resized back to the
/// frame and normalized by their maximum. A frame without intensity
/// variation yields an all-zero map.
pub fn spectral_saliency(frame: &Frame) -> MaskMap {
    let (w, h) = frame.dims();
    let luma = Plane::new(w, h, frame.luma());
    let small = luma.resize(SPECTRAL_SIZE, SPECTRAL_SIZE);
    if small.max() - small.min() <= 1e-12 * small.max().abs().max(1.0) {
        return MaskMap::from_raw(w, h, vec![0.0; w * h]);
    }

    let n = SPECTRAL_SIZE;
    let mut spectrum: Vec<Complex<f64>> = small.data.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    fft2(&mut spectrum, n, planner.plan_fft_forward(n).as_ref());

    let amplitude: Vec<f64> = spectrum.iter().map(|c| c.norm()).collect();
    // Exact spectral zeros (common in synthetic images) would give -inf and
    // swamp the local mean; the floor is relative to the peak so the result
    // stays invariant to intensity gain.
    let floor = amplitude.iter().copied().fold(0.0, f64::max) * LOG_AMPLITUDE_FLOOR;
    let log_amp = Plane::new(n, n, amplitude.iter().map(|&a| a.max(floor).ln()).collect());
    let residual = log_amp.box_filter(RESIDUAL_FILTER);
    for (i, c) in spectrum.iter_mut().enumerate() {
        let phase = if amplitude[i] > 0.0 {
            *c / amplitude[i]
        } else {
            Complex::new(1.0, 0.0)
        };
        *c = phase * (log_amp.data[i] - residual.data[i]).exp();
    }
    fft2(&mut spectrum, n, planner.plan_fft_inverse(n).as_ref());

    let energy = Plane::new(n, n, spectrum.iter().map(|c| c.norm_sqr()).collect());
    let map = energy.gaussian_blur(SPECTRAL_SMOOTHING_SIGMA).resize(w, h);
    let peak = map.max();
    if peak.is_nan() || peak <= 0.0 {
        return MaskMap::from_raw(w, h, vec![0.0; w * h]);
    }
    MaskMap::from_raw(w, h, map.data.iter().map(|&x| x / peak).collect())
}

/// Background mask `1 - m`.
pub fn complement(mask: &MaskMap) -> MaskMap {
    mask.complement()
}

fn fft2(data: &mut [Complex<f64>], n: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); n];
    for x in 0..n {
        for y in 0..n {
            column[y] = data[y * n + x];
        }
        fft.process(&mut column);
        for y in 0..n {
            data[y * n + x] = column[y];
        }
    }
}
