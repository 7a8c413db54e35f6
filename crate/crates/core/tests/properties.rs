use std::path::{Path, PathBuf};

use proptest::prelude::*;

use vfilab::dataset::{subsample, DatasetManifest, Layout, TripletSample};
use vfilab::io::{decode_flo, encode_flo};
use vfilab::metrics::{self, charbonnier, masked_ie, masked_psnr, CHARBONNIER_EPS};
use vfilab::warp::forward_warp;
use vfilab::{
    attention_fuse, fill_joint_holes, oracle_mask, scale_flow, FlowField, Frame, HoleMask, MaskMap,
};

fn frame(w: usize, h: usize, ch: usize) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0.0f64..=1.0, w * h * ch).prop_map(move |d| Frame::new(w, h, ch, d).unwrap())
}

fn mask(w: usize, h: usize) -> impl Strategy<Value = MaskMap> {
    prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |d| MaskMap::new(w, h, d).unwrap())
}

fn flow(w: usize, h: usize, reach: f32) -> impl Strategy<Value = FlowField> {
    (
        prop::collection::vec(-reach..reach, w * h),
        prop::collection::vec(-reach..reach, w * h),
    )
        .prop_map(move |(u, v)| FlowField::new(w, h, u, v).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..10, 1usize..10, prop::sample::select(vec![1usize, 3]))
}

/// Two frames and a mask sharing a random shape.
fn fuse_case() -> impl Strategy<Value = (Frame, Frame, MaskMap)> {
    dims().prop_flat_map(|(w, h, ch)| (frame(w, h, ch), frame(w, h, ch), mask(w, h)))
}

fn triple() -> impl Strategy<Value = (Frame, Frame, Frame)> {
    dims().prop_flat_map(|(w, h, ch)| (frame(w, h, ch), frame(w, h, ch), frame(w, h, ch)))
}

fn sq_error(f: &Frame, gt: &Frame) -> f64 {
    f.data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

proptest! {
    #[test]
    fn fusion_stays_between_inputs((a, b, m) in fuse_case()) {
        let out = attention_fuse(&a, &b, &m).unwrap();
        for ((o, p), q) in out.data().iter().zip(a.data()).zip(b.data()) {
            prop_assert!(*o >= p.min(*q) && *o <= p.max(*q));
        }
    }

    #[test]
    fn fusion_swap_symmetry((a, b, m) in fuse_case()) {
        prop_assert_eq!(
            attention_fuse(&a, &b, &m).unwrap(),
            attention_fuse(&b, &a, &m.complement()).unwrap()
        );
    }

    #[test]
    fn fusion_of_equal_inputs_is_identity((a, _b, m) in fuse_case()) {
        prop_assert_eq!(attention_fuse(&a, &a, &m).unwrap(), a);
    }

    #[test]
    fn complement_is_an_involution(m in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| mask(w, h))) {
        prop_assert_eq!(m.complement().complement(), m.clone());
        for (a, b) in m.weights().iter().zip(m.complement().weights()) {
            prop_assert_eq!(a + b, 1.0);
        }
    }

    #[test]
    fn oracle_beats_either_candidate_per_pixel((a, b, gt) in triple()) {
        let w = oracle_mask(&a, &b, &gt).unwrap();
        let fused = attention_fuse(&a, &b, &w).unwrap();
        let ch = a.channels();
        for i in 0..a.width() * a.height() {
            let err = |f: &Frame| -> f64 {
                (0..ch).map(|c| (f.data()[i * ch + c] - gt.data()[i * ch + c]).powi(2)).sum()
            };
            let best = err(&fused);
            prop_assert!(best <= err(&a) + 1e-12 && best <= err(&b) + 1e-12);
        }
    }

    #[test]
    fn oracle_not_worse_than_constant_masks((a, b, gt) in triple(), k in 0u32..=100) {
        let (w, h) = a.dims();
        let best = sq_error(&attention_fuse(&a, &b, &oracle_mask(&a, &b, &gt).unwrap()).unwrap(), &gt);
        let constant = MaskMap::constant(w, h, k as f64 / 100.0).unwrap();
        let other = sq_error(&attention_fuse(&a, &b, &constant).unwrap(), &gt);
        prop_assert!(best <= other + 1e-12, "oracle {best} vs constant {other}");
    }

    #[test]
    fn oracle_recovers_ground_truth_weight((a, b, _gt) in triple()) {
        let w = oracle_mask(&a, &b, &a).unwrap();
        for (i, &x) in w.weights().iter().enumerate() {
            let ch = a.channels();
            let same = a.data()[i * ch..(i + 1) * ch] == b.data()[i * ch..(i + 1) * ch];
            prop_assert_eq!(x, if same { 0.5 } else { 1.0 });
        }
    }

    #[test]
    fn warp_output_inside_source_range(
        (src, fl) in (2usize..9, 2usize..9).prop_flat_map(|(w, h)| (frame(w, h, 3), flow(w, h, 3.0)))
    ) {
        let (out, holes) = forward_warp(&src, &fl, 0.25).unwrap();
        let lo = src.data().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = src.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for y in 0..src.height() {
            for x in 0..src.width() {
                for &s in out.pixel(x, y) {
                    if holes.is_hole(x, y) {
                        prop_assert_eq!(s, 0.0);
                    } else {
                        prop_assert!(s >= lo && s <= hi);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_flow_warp_is_identity(src in dims().prop_flat_map(|(w, h, ch)| frame(w, h, ch))) {
        let (out, holes) = forward_warp(&src, &FlowField::zeros(src.width(), src.height()), 0.25).unwrap();
        prop_assert_eq!(out, src);
        prop_assert!(holes.is_empty());
    }

    #[test]
    fn hole_filling_leaves_covered_pixels(
        (f, holes) in (2usize..10, 2usize..10).prop_flat_map(|(w, h)| {
            (frame(w, h, 3), prop::collection::vec(any::<bool>(), w * h)
                .prop_map(move |v| HoleMask::new(w, h, v).unwrap()))
        })
    ) {
        match fill_joint_holes(&f, &holes) {
            Ok(out) => {
                for i in 0..f.width() * f.height() {
                    if !holes.holes()[i] {
                        prop_assert_eq!(&out.data()[i * 3..i * 3 + 3], &f.data()[i * 3..i * 3 + 3]);
                    }
                }
            }
            Err(_) => prop_assert_eq!(holes.count(), f.width() * f.height()),
        }
    }

    #[test]
    fn ie_and_psnr_are_symmetric((a, b, m) in fuse_case()) {
        prop_assume!(m.sum() > 0.0);
        prop_assert_eq!(masked_ie(&a, &b, &m).unwrap(), masked_ie(&b, &a, &m).unwrap());
        prop_assert_eq!(masked_psnr(&a, &b, &m).unwrap(), masked_psnr(&b, &a, &m).unwrap());
    }

    #[test]
    fn psnr_orders_opposite_to_mse((a, b, c) in triple()) {
        let (mab, mac) = (metrics::mse(&a, &b).unwrap(), metrics::mse(&a, &c).unwrap());
        let (pab, pac) = (metrics::psnr(&a, &b).unwrap(), metrics::psnr(&a, &c).unwrap());
        if mab < mac {
            prop_assert!(pab > pac);
        } else if mab > mac {
            prop_assert!(pab < pac);
        }
    }

    #[test]
    fn charbonnier_bounds_the_absolute_error((a, b, _c) in triple()) {
        let n = a.data().len() as f64;
        let l1 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / n;
        let loss = charbonnier(&a, &b, CHARBONNIER_EPS).unwrap();
        prop_assert!(loss >= l1 - 1e-12);
        prop_assert!(loss <= l1 + CHARBONNIER_EPS.sqrt() + 1e-12);
    }

    #[test]
    fn flo_round_trip(f in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| flow(w, h, 1e4))) {
        let back = decode_flo(&encode_flo(&f), Path::new("mem.flo")).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn scaling_composes(f in flow(6, 5, 50.0), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let twice = scale_flow(&scale_flow(&f, a).unwrap(), b).unwrap();
        let once = scale_flow(&f, a * b).unwrap();
        for (x, y) in twice.u().iter().chain(twice.v()).zip(once.u().iter().chain(once.v())) {
            // Each scaling rounds once in f32.
            prop_assert!((x - y).abs() <= 4.0 * f32::EPSILON * x.abs().max(y.abs()) + f32::MIN_POSITIVE);
        }
    }

    #[test]
    fn subsample_is_a_sorted_subset(len in 1usize..40, pick in 1usize..40, seed in any::<u64>()) {
        prop_assume!(pick <= len);
        let manifest = DatasetManifest {
            root: PathBuf::from("root"),
            layout: Layout::Flat,
            samples: (0..len)
                .map(|i| TripletSample {
                    id: format!("s{i:03}"),
                    first: PathBuf::from(format!("s{i:03}/im1.png")),
                    middle: PathBuf::from(format!("s{i:03}/im2.png")),
                    last: PathBuf::from(format!("s{i:03}/im3.png")),
                    saliency: None,
                })
                .collect(),
        };
        let sub = subsample(&manifest, pick, seed).unwrap();
        prop_assert_eq!(sub.len(), pick);
        prop_assert!(sub.samples.windows(2).all(|p| p[0].id < p[1].id));
        prop_assert!(sub.samples.iter().all(|s| manifest.samples.contains(s)));
        prop_assert_eq!(sub, subsample(&manifest, pick, seed).unwrap());
    }
}
