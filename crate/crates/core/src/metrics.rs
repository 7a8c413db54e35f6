//! Whole-frame and saliency-weighted quality metrics.
//!
//! Error metrics work on the 0–255 scale: the per-pixel difference is the
//! channel mean of `|gen - gt| · 255` (or its square for MSE), then averaged
//! with the mask weights:
//!
//! ```text
//! IE_M = Σ_p M(p) · d(p) / Σ_p M(p)
//! ```
//!
//! PSNR uses a peak of 255 and reports `f64::INFINITY` for identical frames.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::mask::MaskMap;
use crate::plane::{gaussian_kernel, Plane};

pub const PEAK: f64 = 255.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Charbonnier constant used for training losses.
pub const CHARBONNIER_EPS: f64 = 1e-6;

/// Column names, in report order.
pub const COLUMNS: [&str; 7] = ["PSNR", "F-PSNR", "B-PSNR", "IE", "F-IE", "B-IE", "SSIM"];

fn check_pair(gen: &Frame, gt: &Frame) -> Result<()> {
    gen.ensure_same_shape(gt, "metric inputs")
}

fn check_mask(gen: &Frame, mask: &MaskMap) -> Result<()> {
    if mask.dims() != gen.dims() {
        return Err(Error::dims("metric mask", mask.dims(), gen.dims()));
    }
    Ok(())
}

/// Channel-mean per-pixel difference, mapped through `f` after scaling to 0–255.
fn pixel_errors(gen: &Frame, gt: &Frame, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let ch = gen.channels();
    gen.data()
        .chunks_exact(ch)
        .zip(gt.data().chunks_exact(ch))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f((x - y) * PEAK)).sum::<f64>() / ch as f64)
        .collect()
}

fn weighted_mean(values: &[f64], mask: &MaskMap) -> Result<f64> {
    let total = mask.sum();
    if total <= 0.0 {
        return Err(Error::EmptyMask);
    }
    let acc: f64 = values.iter().zip(mask.weights()).map(|(v, m)| v * m).sum();
    Ok(acc / total)
}

/// Mask-weighted mean absolute error on the 0–255 scale.
pub fn masked_ie(gen: &Frame, gt: &Frame, mask: &MaskMap) -> Result<f64> {
    check_pair(gen, gt)?;
    check_mask(gen, mask)?;
    weighted_mean(&pixel_errors(gen, gt, f64::abs), mask)
}

pub fn masked_mse(gen: &Frame, gt: &Frame, mask: &MaskMap) -> Result<f64> {
    check_pair(gen, gt)?;
    check_mask(gen, mask)?;
    weighted_mean(&pixel_errors(gen, gt, |d| d * d), mask)
}

pub fn masked_psnr(gen: &Frame, gt: &Frame, mask: &MaskMap) -> Result<f64> {
    masked_mse(gen, gt, mask).map(psnr_from_mse)
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

fn full_mask(frame: &Frame) -> MaskMap {
    MaskMap::from_raw(
        frame.width(),
        frame.height(),
        vec![1.0; frame.width() * frame.height()],
    )
}

pub fn ie(gen: &Frame, gt: &Frame) -> Result<f64> {
    masked_ie(gen, gt, &full_mask(gen))
}

pub fn mse(gen: &Frame, gt: &Frame) -> Result<f64> {
    masked_mse(gen, gt, &full_mask(gen))
}

pub fn psnr(gen: &Frame, gt: &Frame) -> Result<f64> {
    masked_psnr(gen, gt, &full_mask(gen))
}

/// Mean SSIM over every position where the 11x11 Gaussian window (σ = 1.5)
/// fits inside the image, computed on 0–255 luma.
pub fn ssim(gen: &Frame, gt: &Frame) -> Result<f64> {
    check_pair(gen, gt)?;
    let (w, h) = gen.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            window: SSIM_WINDOW,
        });
    }
    let to_plane = |f: &Frame| Plane::new(w, h, f.luma().into_iter().map(|l| l * PEAK).collect());
    let a = to_plane(gen);
    let b = to_plane(gt);
    let kernel = gaussian_kernel(SSIM_SIGMA, SSIM_WINDOW / 2);
    let product =
        |p: &Plane, q: &Plane| Plane::new(w, h, p.data.iter().zip(&q.data).map(|(x, y)| x * y).collect());
    let mu_a = valid_filter(&a, &kernel);
    let mu_b = valid_filter(&b, &kernel);
    let e_aa = valid_filter(&product(&a, &a), &kernel);
    let e_bb = valid_filter(&product(&b, &b), &kernel);
    let e_ab = valid_filter(&product(&a, &b), &kernel);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let n = mu_a.data.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ma, mb) = (mu_a.data[i], mu_b.data[i]);
        let var_a = e_aa.data[i] - ma * ma;
        let var_b = e_bb.data[i] - mb * mb;
        let cov = e_ab.data[i] - ma * mb;
        let num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        total += num / den;
    }
    Ok(total / n as f64)
}

/// Separable correlation without padding; output shrinks by `len - 1`.
fn valid_filter(p: &Plane, kernel: &[f64]) -> Plane {
    let k = kernel.len();
    let ow = p.width - k + 1;
    let oh = p.height - k + 1;
    let mut rows = Plane::zeros(ow, p.height);
    for y in 0..p.height {
        for x in 0..ow {
            rows.data[y * ow + x] = kernel.iter().enumerate().map(|(j, w)| w * p.at(x + j, y)).sum();
        }
    }
    let mut out = Plane::zeros(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            out.data[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, w)| w * rows.at(x, y + j))
                .sum();
        }
    }
    out
}

/// Mean of `sqrt(d² + c)` over all samples, with `d` on the `[0, 1]` scale.
pub fn charbonnier(gen: &Frame, gt: &Frame, c: f64) -> Result<f64> {
    check_pair(gen, gt)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "charbonnier constant {c} must be > 0"
        )));
    }
    let n = gen.data().len() as f64;
    Ok(gen
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| ((a - b) * (a - b) + c).sqrt())
        .sum::<f64>()
        / n)
}

/// Mask-weighted Charbonnier penalty (per-pixel channel mean, then weighted).
pub fn masked_charbonnier(gen: &Frame, gt: &Frame, mask: &MaskMap, c: f64) -> Result<f64> {
    check_pair(gen, gt)?;
    check_mask(gen, mask)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "charbonnier constant {c} must be > 0"
        )));
    }
    let ch = gen.channels();
    let per_pixel: Vec<f64> = gen
        .data()
        .chunks_exact(ch)
        .zip(gt.data().chunks_exact(ch))
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| ((x - y) * (x - y) + c).sqrt())
                .sum::<f64>()
                / ch as f64
        })
        .collect();
    weighted_mean(&per_pixel, mask)
}

/// One row of an evaluation report. Foreground/background entries are
/// `None` when their mask has no weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub sample_id: String,
    pub psnr: f64,
    pub f_psnr: Option<f64>,
    pub b_psnr: Option<f64>,
    pub ie: f64,
    pub f_ie: Option<f64>,
    pub b_ie: Option<f64>,
    pub ssim: f64,
}

impl EvalRecord {
    /// Values in [`COLUMNS`] order.
    pub fn values(&self) -> [Option<f64>; 7] {
        [
            Some(self.psnr),
            self.f_psnr,
            self.b_psnr,
            Some(self.ie),
            self.f_ie,
            self.b_ie,
            Some(self.ssim),
        ]
    }

    /// JSON object keyed by column name. Infinite values become the string
    /// `"inf"`, missing ones `null`.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (name, value) in COLUMNS.iter().zip(self.values()) {
            map.insert(name.to_string(), metric_json(value));
        }
        Value::Object(map)
    }
}

pub(crate) fn metric_json(value: Option<f64>) -> Value {
    match value {
        None => Value::Null,
        Some(v) if v.is_infinite() => Value::String(if v > 0.0 { "inf" } else { "-inf" }.into()),
        Some(v) => serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null),
    }
}

fn optional(result: Result<f64>) -> Result<Option<f64>> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptyMask) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Whole-frame PSNR / IE / SSIM plus foreground (`saliency`) and background
/// (`1 - saliency`) PSNR and IE. Without a saliency map only the whole-frame
/// columns are filled.
pub fn evaluate_sample(gen: &Frame, gt: &Frame, saliency: Option<&MaskMap>) -> Result<EvalRecord> {
    check_pair(gen, gt)?;
    let mut record = EvalRecord {
        sample_id: String::new(),
        psnr: psnr(gen, gt)?,
        f_psnr: None,
        b_psnr: None,
        ie: ie(gen, gt)?,
        f_ie: None,
        b_ie: None,
        ssim: ssim(gen, gt)?,
    };
    if let Some(fg) = saliency {
        check_mask(gen, fg)?;
        let bg = fg.complement();
        record.f_psnr = optional(masked_psnr(gen, gt, fg))?;
        record.f_ie = optional(masked_ie(gen, gt, fg))?;
        record.b_psnr = optional(masked_psnr(gen, gt, &bg))?;
        record.b_ie = optional(masked_ie(gen, gt, &bg))?;
    }
    Ok(record)
}
