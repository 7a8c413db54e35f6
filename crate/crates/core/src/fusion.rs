//! Mask-weighted fusion of candidate frames and the full interpolation
//! pipeline built on it.

use crate::error::{Error, Result};
use crate::field::FlowField;
use crate::flow::{estimate_bidirectional, FlowParams};
use crate::frame::Frame;
use crate::mask::{HoleMask, MaskMap};
use crate::plane::Plane;
use crate::warp::{synthesize_candidates, Candidates};

/// Window of the box filter applied to the contribution mask.
pub const CONTRIBUTION_SMOOTHING: usize = 5;

/// Sweep cap for [`fill_joint_holes`].
pub const MAX_FILL_SWEEPS: usize = 100;

/// `out = w · in1 + (1 - w) · in2`, per pixel and channel.
pub fn attention_fuse(in1: &Frame, in2: &Frame, w: &MaskMap) -> Result<Frame> {
    in1.ensure_same_shape(in2, "attention_fuse inputs")?;
    if w.dims() != in1.dims() {
        return Err(Error::dims("attention_fuse mask", w.dims(), in1.dims()));
    }
    let ch = in1.channels();
    let data = in1
        .data()
        .iter()
        .zip(in2.data())
        .enumerate()
        .map(|(k, (&a, &b))| {
            let wk = w.weights()[k / ch];
            let fused = wk * a + (1.0 - wk) * b;
            fused.clamp(a.min(b), a.max(b))
        })
        .collect();
    let (width, height) = in1.dims();
    Ok(Frame::from_raw(width, height, ch, data))
}

/// Rule-based source-contribution mask, the weight given to the candidate
/// warped from the first frame.
///
/// Starts from `1 - t` everywhere, forces 0 where only the first candidate
/// has a hole and 1 where only the last one does, box-smooths the result and
/// then re-applies those forced values. Pixels that are holes in both
/// candidates keep the smoothed weight; [`fill_joint_holes`] repairs them.
///
/// The candidate frames and flows are accepted so that a learned rule can
/// slot in behind the same signature; this rule reads only holes and `t`.
#[allow(clippy::too_many_arguments)]
pub fn contribution_mask(
    i1t: &Frame,
    i3t: &Frame,
    f13: &FlowField,
    f31: &FlowField,
    h1t: &HoleMask,
    h3t: &HoleMask,
    t: f64,
) -> Result<MaskMap> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    i1t.ensure_same_shape(i3t, "contribution_mask candidates")?;
    let dims = i1t.dims();
    for (name, d) in [
        ("F13", f13.dims()),
        ("F31", f31.dims()),
        ("H1t", h1t.dims()),
        ("H3t", h3t.dims()),
    ] {
        if d != dims {
            return Err(Error::dims(&format!("contribution_mask {name}"), d, dims));
        }
    }
    let (w, h) = dims;
    let forced: Vec<Option<f64>> = h1t
        .holes()
        .iter()
        .zip(h3t.holes())
        .map(|(&a, &b)| match (a, b) {
            (true, false) => Some(0.0),
            (false, true) => Some(1.0),
            _ => None,
        })
        .collect();
    let base = Plane::new(w, h, forced.iter().map(|f| f.unwrap_or(1.0 - t)).collect());
    let smoothed = base.box_filter(CONTRIBUTION_SMOOTHING);
    let weights = smoothed
        .data
        .iter()
        .zip(&forced)
        .map(|(&s, f)| f.unwrap_or(s.clamp(0.0, 1.0)))
        .collect();
    Ok(MaskMap::from_raw(w, h, weights))
}

/// Fills pixels marked in `joint` by repeatedly replacing each one with the
/// mean of its already-valid 8-neighbors. Each sweep reads the previous
/// sweep's state, so the result does not depend on scan order. Stops when no
/// hole is left or after [`MAX_FILL_SWEEPS`] sweeps.
pub fn fill_joint_holes(frame: &Frame, joint: &HoleMask) -> Result<Frame> {
    if frame.dims() != joint.dims() {
        return Err(Error::dims("fill_joint_holes", frame.dims(), joint.dims()));
    }
    if joint.is_empty() {
        return Ok(frame.clone());
    }
    if joint.count() == joint.holes().len() {
        return Err(Error::AllHoles);
    }
    let (w, h) = frame.dims();
    let ch = frame.channels();
    let mut data = frame.data().to_vec();
    let mut hole = joint.holes().to_vec();
    let mut sum = vec![0.0; ch];
    for _ in 0..MAX_FILL_SWEEPS {
        let mut filled = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if !hole[y * w + x] {
                    continue;
                }
                sum.iter_mut().for_each(|s| *s = 0.0);
                let mut n = 0usize;
                for ny in y.saturating_sub(1)..(y + 2).min(h) {
                    for nx in x.saturating_sub(1)..(x + 2).min(w) {
                        let j = ny * w + nx;
                        if hole[j] {
                            continue;
                        }
                        n += 1;
                        for c in 0..ch {
                            sum[c] += data[j * ch + c];
                        }
                    }
                }
                if n > 0 {
                    let values: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
                    filled.push((y * w + x, values));
                }
            }
        }
        if filled.is_empty() {
            break;
        }
        for (i, values) in filled {
            data[i * ch..(i + 1) * ch].copy_from_slice(&values);
            hole[i] = false;
        }
        if !hole.iter().any(|&b| b) {
            break;
        }
    }
    Ok(Frame::from_raw(w, h, ch, data))
}

/// Per-pixel least-squares blending weight toward `in1`:
/// `clamp(Σ_c (gt - in2)(in1 - in2) / Σ_c (in1 - in2)², 0, 1)`, or 0.5 where
/// the candidates coincide.
pub fn oracle_mask(in1: &Frame, in2: &Frame, gt: &Frame) -> Result<MaskMap> {
    in1.ensure_same_shape(in2, "oracle_mask candidates")?;
    in1.ensure_same_shape(gt, "oracle_mask ground truth")?;
    let ch = in1.channels();
    let weights = in1
        .data()
        .chunks_exact(ch)
        .zip(in2.data().chunks_exact(ch))
        .zip(gt.data().chunks_exact(ch))
        .map(|((a, b), g)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for c in 0..ch {
                let d = a[c] - b[c];
                num += (g[c] - b[c]) * d;
                den += d * d;
            }
            if den == 0.0 {
                0.5
            } else {
                (num / den).clamp(0.0, 1.0)
            }
        })
        .collect();
    Ok(MaskMap::from_raw(in1.width(), in1.height(), weights))
}

/// Every intermediate product of [`interpolate_detailed`].
#[derive(Debug, Clone)]
pub struct Interpolation {
    pub flow_forward: FlowField,
    pub flow_backward: FlowField,
    pub candidates: Candidates,
    pub contribution: MaskMap,
    pub joint_holes: HoleMask,
    /// Output of the weighted fusion before joint holes are filled.
    pub fused: Frame,
    pub output: Frame,
}

/// Synthesizes the frame at time `t` between `f1` and `f3`. When `flows` is
/// `None` both directions are estimated with `params`.
pub fn interpolate(
    f1: &Frame,
    f3: &Frame,
    t: f64,
    params: &FlowParams,
    flows: Option<(&FlowField, &FlowField)>,
) -> Result<Frame> {
    interpolate_detailed(f1, f3, t, params, flows).map(|r| r.output)
}

pub fn interpolate_detailed(
    f1: &Frame,
    f3: &Frame,
    t: f64,
    params: &FlowParams,
    flows: Option<(&FlowField, &FlowField)>,
) -> Result<Interpolation> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} outside (0, 1)")));
    }
    f1.ensure_same_shape(f3, "interpolate")?;
    let (flow_forward, flow_backward) = match flows {
        Some((fwd, bwd)) => (fwd.clone(), bwd.clone()),
        None => estimate_bidirectional(f1, f3, params)?,
    };
    let candidates = synthesize_candidates(f1, f3, &flow_forward, &flow_backward, t)?;
    let contribution = contribution_mask(
        &candidates.from_first,
        &candidates.from_last,
        &flow_forward,
        &flow_backward,
        &candidates.holes_first,
        &candidates.holes_last,
        t,
    )?;
    let fused = attention_fuse(&candidates.from_first, &candidates.from_last, &contribution)?;
    let joint_holes = candidates.holes_first.intersection(&candidates.holes_last)?;
    let output = fill_joint_holes(&fused, &joint_holes)?;
    Ok(Interpolation {
        flow_forward,
        flow_backward,
        candidates,
        contribution,
        joint_holes,
        fused,
        output,
    })
}
