//! Splits evaluation into salient foreground and background. The prediction
//! is wrong only inside a bright square, so the F-metrics come out much worse
//! than the B-metrics.

use vfilab::saliency::spectral_saliency;
use vfilab::{evaluate_sample, Frame};

fn main() -> vfilab::Result<()> {
    let gt = Frame::from_fn(96, 96, 3, |x, y, _| {
        if (40..56).contains(&x) && (36..52).contains(&y) {
            0.9
        } else {
            0.2
        }
    })?;
    let pred = Frame::from_fn(96, 96, 3, |x, y, c| {
        let v = gt.get(x, y, c);
        if v > 0.5 {
            v - 0.1
        } else {
            v
        }
    })?;

    let soft = spectral_saliency(&gt);
    let hard = soft.binarized(0.3);
    for (name, mask) in [("soft", &soft), ("hard", &hard)] {
        let r = evaluate_sample(&pred, &gt, Some(mask))?;
        println!("{name} mask, foreground weight {:.1}", mask.sum());
        println!("  {}", r.to_json());
    }
    Ok(())
}
