//! Splats a frame along a uniform flow and reports where holes open up,
//! then compares against backward sampling of the same motion.

use vfilab::synth;
use vfilab::warp::DEFAULT_COVERAGE_THRESHOLD;
use vfilab::{backward_warp, forward_warp, metrics, FlowField};

fn main() -> vfilab::Result<()> {
    let src = synth::natural_scene(64, 48, 5);
    for (u, v) in [(1.0, 0.0), (2.5, 0.0), (1.5, -2.0)] {
        let flow = FlowField::uniform(64, 48, u, v)?;
        let (warped, holes) = forward_warp(&src, &flow, DEFAULT_COVERAGE_THRESHOLD)?;
        let columns: Vec<usize> = (0..64)
            .filter(|&x| (0..48).all(|y| holes.is_hole(x, y)))
            .collect();
        println!(
            "flow ({u}, {v}): {} hole pixels, fully vacated columns {columns:?}",
            holes.count()
        );

        // Backward warping by the negated flow approximates the same motion.
        let back = backward_warp(&src, &flow.negated())?;
        println!(
            "  psnr(forward, backward) = {:.2} dB",
            metrics::psnr(&warped, &back)?
        );
    }
    Ok(())
}
