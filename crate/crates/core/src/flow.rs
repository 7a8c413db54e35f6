//! Coarse-to-fine Horn–Schunck optical flow.
//!
//! At each pyramid level the second image is warped toward the first by the
//! flow carried over from the coarser level, brightness constancy is
//! linearized around that flow, and block-Jacobi sweeps minimize
//!
//! ```text
//! E(u, v) = Σ_p (Ix·(u - u0) + Iy·(v - v0) + It)²
//!         + (α² / 4) · Σ_{p~q} [(u_p - u_q)² + (v_p - v_q)²]
//! ```
//!
//! over 4-connected neighbor pairs `p~q`. Each sweep solves every pixel's
//! 2x2 subproblem exactly with its neighbors held fixed; that update never
//! increases `E`, which [`estimate_flow_traced`] exposes for inspection.
//! Intensities are Rec. 601 luma on the 0–255 scale, so `α` is in those units.

use crate::error::{Error, Result};
use crate::field::FlowField;
use crate::frame::Frame;
use crate::plane::Plane;

/// Levels smaller than this (in either dimension) are not built.
const MIN_LEVEL_SIZE: usize = 8;

/// Pre-smoothing applied to each level before differentiation.
const PRESMOOTH_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub pyramid_levels: usize,
    /// Regularization weight on the 0–255 intensity scale.
    pub smoothness_alpha: f64,
    pub iterations_per_level: usize,
    /// Size ratio between consecutive levels.
    pub downscale_factor: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            pyramid_levels: 4,
            smoothness_alpha: 15.0,
            iterations_per_level: 100,
            downscale_factor: 0.5,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if self.pyramid_levels < 1 {
            return Err(Error::InvalidArgument("pyramid_levels must be >= 1".into()));
        }
        if self.iterations_per_level < 1 {
            return Err(Error::InvalidArgument("iterations_per_level must be >= 1".into()));
        }
        if !(self.downscale_factor > 0.0 && self.downscale_factor < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "downscale_factor {} must lie in (0, 1)",
                self.downscale_factor
            )));
        }
        if !(self.smoothness_alpha > 0.0 && self.smoothness_alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smoothness_alpha {} must be positive",
                self.smoothness_alpha
            )));
        }
        Ok(())
    }
}

/// Energy after each sweep at one pyramid level (index 0 is the energy of
/// the initial flow, before any sweep).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrace {
    pub width: usize,
    pub height: usize,
    pub energies: Vec<f64>,
}

/// Dense flow from `a` to `b`.
pub fn estimate_flow(a: &Frame, b: &Frame, params: &FlowParams) -> Result<FlowField> {
    run(a, b, params, false).map(|(flow, _)| flow)
}

/// Same as [`estimate_flow`] but also returns the per-sweep energy trace of
/// every level, coarsest first.
pub fn estimate_flow_traced(
    a: &Frame,
    b: &Frame,
    params: &FlowParams,
) -> Result<(FlowField, Vec<LevelTrace>)> {
    run(a, b, params, true)
}

/// Returns `(F_{1→3}, F_{3→1})`.
pub fn estimate_bidirectional(f1: &Frame, f3: &Frame, params: &FlowParams) -> Result<(FlowField, FlowField)> {
    let (fwd, bwd) = rayon::join(|| estimate_flow(f1, f3, params), || estimate_flow(f3, f1, params));
    Ok((fwd?, bwd?))
}

/// Flow to an intermediate time under linear motion: every vector times `t`.
pub fn scale_flow(flow: &FlowField, t: f64) -> Result<FlowField> {
    flow.scaled(t)
}

fn luma255(frame: &Frame) -> Plane {
    Plane::new(
        frame.width(),
        frame.height(),
        frame.luma().into_iter().map(|l| l * 255.0).collect(),
    )
}

fn level_sizes(width: usize, height: usize, params: &FlowParams) -> Vec<(usize, usize)> {
    let mut sizes = vec![(width, height)];
    let mut scale = 1.0;
    for _ in 1..params.pyramid_levels {
        scale *= params.downscale_factor;
        let w = (width as f64 * scale).round() as usize;
        let h = (height as f64 * scale).round() as usize;
        if w < MIN_LEVEL_SIZE || h < MIN_LEVEL_SIZE {
            break;
        }
        sizes.push((w, h));
    }
    sizes
}

fn build_pyramid(base: Plane, sizes: &[(usize, usize)]) -> Vec<Plane> {
    let mut levels = vec![base];
    for &(w, h) in &sizes[1..] {
        let prev = levels.last().unwrap();
        levels.push(prev.gaussian_blur(PRESMOOTH_SIGMA).resize(w, h));
    }
    levels
}

fn run(a: &Frame, b: &Frame, params: &FlowParams, trace: bool) -> Result<(FlowField, Vec<LevelTrace>)> {
    params.validate()?;
    if a.dims() != b.dims() {
        return Err(Error::dims("estimate_flow", a.dims(), b.dims()));
    }
    let (w, h) = a.dims();
    let sizes = level_sizes(w, h, params);
    let pa = build_pyramid(luma255(a), &sizes);
    let pb = build_pyramid(luma255(b), &sizes);

    let mut traces = Vec::new();
    let mut u = Plane::zeros(sizes[sizes.len() - 1].0, sizes[sizes.len() - 1].1);
    let mut v = u.clone();
    for level in (0..sizes.len()).rev() {
        let (lw, lh) = sizes[level];
        if u.width != lw || u.height != lh {
            let s = 1.0 / params.downscale_factor;
            u = u.resize(lw, lh).map(|x| x * s);
            v = v.resize(lw, lh).map(|x| x * s);
        }
        let energies = refine_level(&pa[level], &pb[level], &mut u, &mut v, params, trace);
        if trace {
            traces.push(LevelTrace {
                width: lw,
                height: lh,
                energies,
            });
        }
    }
    let flow = FlowField::from_f64(w, h, &u.data, &v.data)?;
    Ok((flow, traces))
}

/// Linearized brightness-constancy terms around the current flow.
struct Linearization {
    ix: Vec<f64>,
    iy: Vec<f64>,
    /// Residual at zero increment, re-expressed against the total flow:
    /// `It - Ix·u0 - Iy·v0`.
    c: Vec<f64>,
}

fn linearize(a: &Plane, b: &Plane, u0: &Plane, v0: &Plane) -> Linearization {
    let (w, h) = (a.width, a.height);
    let a = a.gaussian_blur(PRESMOOTH_SIGMA);
    let b = b.gaussian_blur(PRESMOOTH_SIGMA);
    let mut warped = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            warped.data[i] = b.sample(x as f64 + u0.data[i], y as f64 + v0.data[i]);
        }
    }
    let (ax, ay) = a.gradients();
    let (bx, by) = warped.gradients();
    let n = w * h;
    let mut lin = Linearization {
        ix: Vec::with_capacity(n),
        iy: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    for i in 0..n {
        let ix = 0.5 * (ax.data[i] + bx.data[i]);
        let iy = 0.5 * (ay.data[i] + by.data[i]);
        let it = warped.data[i] - a.data[i];
        lin.ix.push(ix);
        lin.iy.push(iy);
        lin.c.push(it - ix * u0.data[i] - iy * v0.data[i]);
    }
    lin
}

fn energy(lin: &Linearization, u: &Plane, v: &Plane, lambda: f64) -> f64 {
    let (w, h) = (u.width, u.height);
    let mut data = 0.0;
    let mut smooth = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let r = lin.ix[i] * u.data[i] + lin.iy[i] * v.data[i] + lin.c[i];
            data += r * r;
            if x + 1 < w {
                smooth += (u.data[i] - u.data[i + 1]).powi(2) + (v.data[i] - v.data[i + 1]).powi(2);
            }
            if y + 1 < h {
                smooth += (u.data[i] - u.data[i + w]).powi(2) + (v.data[i] - v.data[i + w]).powi(2);
            }
        }
    }
    data + lambda * smooth
}

fn refine_level(
    a: &Plane,
    b: &Plane,
    u: &mut Plane,
    v: &mut Plane,
    params: &FlowParams,
    trace: bool,
) -> Vec<f64> {
    let (w, h) = (a.width, a.height);
    let lin = linearize(a, b, u, v);
    let lambda = params.smoothness_alpha * params.smoothness_alpha / 4.0;
    let mut energies = Vec::new();
    if trace {
        energies.push(energy(&lin, u, v, lambda));
    }
    let mut next_u = u.clone();
    let mut next_v = v.clone();
    for _ in 0..params.iterations_per_level {
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let mut n = 0usize;
                let mut su = 0.0;
                let mut sv = 0.0;
                let mut add = |j: usize| {
                    n += 1;
                    su += u.data[j];
                    sv += v.data[j];
                };
                if x > 0 {
                    add(i - 1);
                }
                if x + 1 < w {
                    add(i + 1);
                }
                if y > 0 {
                    add(i - w);
                }
                if y + 1 < h {
                    add(i + w);
                }
                if n == 0 {
                    continue;
                }
                let ubar = su / n as f64;
                let vbar = sv / n as f64;
                let (ix, iy) = (lin.ix[i], lin.iy[i]);
                let denom = lambda * n as f64 + ix * ix + iy * iy;
                let r = (ix * ubar + iy * vbar + lin.c[i]) / denom;
                next_u.data[i] = ubar - ix * r;
                next_v.data[i] = vbar - iy * r;
            }
        }
        std::mem::swap(u, &mut next_u);
        std::mem::swap(v, &mut next_v);
        if trace {
            energies.push(energy(&lin, u, v, lambda));
        }
    }
    energies
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn params_validation() {
        assert!(FlowParams::default().validate().is_ok());
        for bad in [
            FlowParams {
                pyramid_levels: 0,
                ..Default::default()
            },
            FlowParams {
                iterations_per_level: 0,
                ..Default::default()
            },
            FlowParams {
                downscale_factor: 1.0,
                ..Default::default()
            },
            FlowParams {
                downscale_factor: 0.0,
                ..Default::default()
            },
            FlowParams {
                smoothness_alpha: 0.0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn level_sizes_stop_at_minimum() {
        let p = FlowParams::default();
        assert_eq!(
            level_sizes(64, 64, &p),
            vec![(64, 64), (32, 32), (16, 16), (8, 8)]
        );
        assert_eq!(level_sizes(20, 12, &p), vec![(20, 12)]);
        assert_eq!(level_sizes(448, 256, &p).len(), 4);
    }

    #[test]
    fn identical_frames_give_near_zero_flow() {
        let a = synth::smooth_texture(48, 40, 3, 11);
        let f = estimate_flow(&a, &a, &FlowParams::default()).unwrap();
        assert!(f.mean_magnitude() < 0.05, "{}", f.mean_magnitude());
    }

    #[test]
    fn flat_frames_give_zero_flow() {
        let a = Frame::filled(32, 32, 1, 0.3).unwrap();
        let b = Frame::filled(32, 32, 1, 0.7).unwrap();
        let f = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        assert!(f.max_magnitude() < 1e-3);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = Frame::filled(8, 8, 1, 0.0).unwrap();
        let b = Frame::filled(9, 8, 1, 0.0).unwrap();
        assert!(matches!(
            estimate_flow(&a, &b, &FlowParams::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn recovers_circular_translation() {
        let a = synth::periodic_texture(64, 64, 1, 5);
        let b = synth::circular_shift(&a, 2, 0);
        let f = estimate_flow(&a, &b, &FlowParams::default()).unwrap();
        let epe = f.mean_epe_uniform(2.0, 0.0, 0.75);
        assert!(epe < 0.5, "epe {epe}");
    }

    #[test]
    fn bidirectional_flows_point_opposite_ways() {
        let a = synth::periodic_texture(64, 64, 1, 9);
        let b = synth::circular_shift(&a, 2, 0);
        let (fwd, bwd) = estimate_bidirectional(&a, &b, &FlowParams::default()).unwrap();
        assert_eq!(fwd.dims(), (64, 64));
        assert_eq!(bwd.dims(), (64, 64));
        assert!(fwd.mean_epe_uniform(2.0, 0.0, 0.75) < 0.5);
        assert!(bwd.mean_epe_uniform(-2.0, 0.0, 0.75) < 0.5);
    }

    #[test]
    fn energy_never_increases_within_a_level() {
        let big = synth::smooth_texture(48, 40, 3, 2);
        let a = synth::translate_crop(&big, 2, 1, 40, 32);
        let b = synth::translate_crop(&big, 0, 0, 40, 32);
        let params = FlowParams {
            iterations_per_level: 40,
            ..Default::default()
        };
        let (_, traces) = estimate_flow_traced(&a, &b, &params).unwrap();
        assert!(!traces.is_empty());
        for t in &traces {
            assert_eq!(t.energies.len(), 41);
            for pair in t.energies.windows(2) {
                assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-9, "{pair:?}");
            }
        }
    }
}
