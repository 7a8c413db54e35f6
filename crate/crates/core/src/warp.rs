//! Forward (splatting) and backward warping.

use crate::error::{Error, Result};
use crate::field::FlowField;
use crate::frame::Frame;
use crate::mask::HoleMask;

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.25;

/// Splats every source pixel onto the four grid neighbors of `p + flow(p)`
/// with bilinear weights and normalizes by the accumulated weight.
///
/// Targets whose accumulated weight is below `coverage_threshold` become
/// holes with value 0. Contributions falling outside the frame are dropped.
/// Each output sample is a convex combination of the samples splatted onto
/// it, and is clamped to their range to absorb rounding.
pub fn forward_warp(
    src: &Frame,
    flow_to_t: &FlowField,
    coverage_threshold: f64,
) -> Result<(Frame, HoleMask)> {
    if src.dims() != flow_to_t.dims() {
        return Err(Error::dims("forward_warp", src.dims(), flow_to_t.dims()));
    }
    if !(coverage_threshold > 0.0 && coverage_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage threshold {coverage_threshold} outside (0, 1]"
        )));
    }
    let (w, h) = src.dims();
    let ch = src.channels();
    let mut acc = vec![0.0f64; w * h * ch];
    let mut lo = vec![f64::INFINITY; w * h * ch];
    let mut hi = vec![f64::NEG_INFINITY; w * h * ch];
    let mut weight = vec![0.0f64; w * h];

    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow_to_t.at(x, y);
            let tx = x as f64 + u as f64;
            let ty = y as f64 + v as f64;
            let x0 = tx.floor();
            let y0 = ty.floor();
            let fx = tx - x0;
            let fy = ty - y0;
            let value = src.pixel(x, y);
            let taps = [
                (x0, y0, (1.0 - fx) * (1.0 - fy)),
                (x0 + 1.0, y0, fx * (1.0 - fy)),
                (x0, y0 + 1.0, (1.0 - fx) * fy),
                (x0 + 1.0, y0 + 1.0, fx * fy),
            ];
            for (gx, gy, wt) in taps {
                if wt <= 0.0 || gx < 0.0 || gy < 0.0 || gx >= w as f64 || gy >= h as f64 {
                    continue;
                }
                let i = gy as usize * w + gx as usize;
                weight[i] += wt;
                for (c, &s) in value.iter().enumerate() {
                    let k = i * ch + c;
                    acc[k] += wt * s;
                    lo[k] = lo[k].min(s);
                    hi[k] = hi[k].max(s);
                }
            }
        }
    }

    let mut holes = vec![false; w * h];
    for i in 0..w * h {
        let total = weight[i];
        for c in 0..ch {
            let k = i * ch + c;
            acc[k] = if total >= coverage_threshold {
                (acc[k] / total).clamp(lo[k], hi[k])
            } else {
                0.0
            };
        }
        holes[i] = total < coverage_threshold;
    }
    Ok((Frame::from_raw(w, h, ch, acc), HoleMask::new(w, h, holes)?))
}

/// `out(p) = src(p + flow(p))`, sampled bilinearly with clamped borders.
pub fn backward_warp(src: &Frame, flow: &FlowField) -> Result<Frame> {
    if src.dims() != flow.dims() {
        return Err(Error::dims("backward_warp", src.dims(), flow.dims()));
    }
    let (w, h) = src.dims();
    let ch = src.channels();
    let mut data = vec![0.0; w * h * ch];
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            let i = (y * w + x) * ch;
            src.sample_bilinear_into(x as f64 + u as f64, y as f64 + v as f64, &mut data[i..i + ch]);
        }
    }
    Ok(Frame::from_raw(w, h, ch, data))
}

/// The two forward-warped views of the intermediate frame at time `t` and
/// their hole masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    /// First frame warped forward by `t · F13`.
    pub from_first: Frame,
    pub holes_first: HoleMask,
    /// Last frame warped by `(1 - t) · F31`.
    pub from_last: Frame,
    pub holes_last: HoleMask,
}

pub fn synthesize_candidates(
    f1: &Frame,
    f3: &Frame,
    f13: &FlowField,
    f31: &FlowField,
    t: f64,
) -> Result<Candidates> {
    synthesize_candidates_with(f1, f3, f13, f31, t, DEFAULT_COVERAGE_THRESHOLD)
}

pub fn synthesize_candidates_with(
    f1: &Frame,
    f3: &Frame,
    f13: &FlowField,
    f31: &FlowField,
    t: f64,
    coverage_threshold: f64,
) -> Result<Candidates> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} outside (0, 1)")));
    }
    f1.ensure_same_shape(f3, "synthesize_candidates frames")?;
    if f13.dims() != f1.dims() || f31.dims() != f1.dims() {
        return Err(Error::DimensionMismatch(format!(
            "synthesize_candidates: frames {:?}, flows {:?} / {:?}",
            f1.dims(),
            f13.dims(),
            f31.dims()
        )));
    }
    let (from_first, holes_first) = forward_warp(f1, &f13.scaled(t)?, coverage_threshold)?;
    let (from_last, holes_last) = forward_warp(f3, &f31.scaled(1.0 - t)?, coverage_threshold)?;
    Ok(Candidates {
        from_first,
        holes_first,
        from_last,
        holes_last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn random_frame(w: usize, h: usize, ch: usize, seed: u64) -> Frame {
        synth::add_noise(&Frame::filled(w, h, ch, 0.5).unwrap(), 0.3, seed)
    }

    #[test]
    fn zero_flow_is_identity() {
        let src = random_frame(9, 7, 3, 1);
        let (out, holes) = forward_warp(&src, &FlowField::zeros(9, 7), 0.25).unwrap();
        assert_eq!(out, src);
        assert!(holes.is_empty());
    }

    #[test]
    fn integer_shift_moves_columns() {
        let src = random_frame(6, 4, 1, 2);
        let flow = FlowField::uniform(6, 4, 1.0, 0.0).unwrap();
        let (out, holes) = forward_warp(&src, &flow, 0.25).unwrap();
        for y in 0..4 {
            assert!(holes.is_hole(0, y));
            assert_eq!(out.get(0, y, 0), 0.0);
            for x in 1..6 {
                assert!(!holes.is_hole(x, y));
                assert_eq!(out.get(x, y, 0), src.get(x - 1, y, 0));
            }
        }
    }

    #[test]
    fn half_pixel_shift_averages_neighbors() {
        let src = Frame::from_fn(8, 8, 1, |x, _, _| x as f64 / 7.0).unwrap();
        let flow = FlowField::uniform(8, 8, 0.5, 0.0).unwrap();
        let (out, holes) = forward_warp(&src, &flow, 0.25).unwrap();
        for x in 1..8 {
            assert!(!holes.is_hole(x, 3));
            let expect = (src.get(x - 1, 3, 0) + src.get(x, 3, 0)) / 2.0;
            assert!((out.get(x, 3, 0) - expect).abs() < 1e-12);
        }
        // column 0 only receives half a splat
        assert!(!holes.is_hole(0, 3));
        assert_eq!(out.get(0, 3, 0), src.get(0, 3, 0));
    }

    #[test]
    fn threshold_controls_holes() {
        let src = random_frame(4, 4, 1, 3);
        let flow = FlowField::uniform(4, 4, 0.75, 0.0).unwrap();
        let (_, strict) = forward_warp(&src, &flow, 1.0).unwrap();
        let (_, loose) = forward_warp(&src, &flow, 0.25).unwrap();
        assert!(strict.count() >= loose.count());
        assert!(!loose.is_hole(0, 0));
        assert!(strict.is_hole(0, 0));
        assert!(forward_warp(&src, &flow, 0.0).is_err());
        assert!(forward_warp(&src, &flow, 1.5).is_err());
    }

    #[test]
    fn splats_outside_are_discarded() {
        let src = random_frame(5, 5, 1, 4);
        let flow = FlowField::uniform(5, 5, 100.0, 0.0).unwrap();
        let (out, holes) = forward_warp(&src, &flow, 0.25).unwrap();
        assert_eq!(holes.count(), 25);
        assert!(out.data().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn backward_warp_examples() {
        let src = random_frame(5, 4, 3, 5);
        assert_eq!(backward_warp(&src, &FlowField::zeros(5, 4)).unwrap(), src);

        let w = 8;
        let ramp = Frame::from_fn(w, 2, 1, |x, _, _| x as f64 / w as f64).unwrap();
        let out = backward_warp(&ramp, &FlowField::uniform(w, 2, 1.0, 0.0).unwrap()).unwrap();
        for x in 0..w {
            let expect = (x + 1).min(w - 1) as f64 / w as f64;
            assert_eq!(out.get(x, 1, 0), expect);
        }

        let flat = Frame::filled(6, 6, 3, 0.3).unwrap();
        let wild = FlowField::new(
            6,
            6,
            (0..36).map(|i| (i as f32 * 0.37).sin() * 4.0).collect(),
            (0..36).map(|i| (i as f32 * 0.91).cos() * 4.0).collect(),
        )
        .unwrap();
        let out = backward_warp(&flat, &wild).unwrap();
        assert!(out.data().iter().all(|&s| (s - 0.3).abs() < 1e-15));
    }

    #[test]
    fn candidates_from_identical_frames() {
        let f = random_frame(6, 6, 3, 6);
        let z = FlowField::zeros(6, 6);
        let c = synthesize_candidates(&f, &f, &z, &z, 0.5).unwrap();
        assert_eq!(c.from_first, f);
        assert_eq!(c.from_last, f);
        assert!(c.holes_first.is_empty() && c.holes_last.is_empty());
        assert!(synthesize_candidates(&f, &f, &z, &z, 0.0).is_err());
        assert!(synthesize_candidates(&f, &f, &z, &z, 1.0).is_err());
    }

    #[test]
    fn candidates_agree_on_translation() {
        let base = synth::smooth_texture(40, 20, 3, 7);
        let (f1, f2, f3) = synth::translating_triple(&base, 30, 12, 1, 0);
        let f13 = FlowField::uniform(30, 12, 2.0, 0.0).unwrap();
        let c = synthesize_candidates(&f1, &f3, &f13, &f13.negated(), 0.5).unwrap();
        for y in 0..12 {
            for x in 1..29 {
                for ch in 0..3 {
                    let a = c.from_first.get(x, y, ch);
                    let b = c.from_last.get(x, y, ch);
                    assert!((a - b).abs() < 1e-6);
                    assert!((a - f2.get(x, y, ch)).abs() < 1e-6);
                }
            }
        }
        assert_eq!(c.holes_first, c.holes_last.mirrored_horizontally());
        assert_eq!(c.holes_first.count(), 12);
    }
}
