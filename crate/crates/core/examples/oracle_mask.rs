//! How much does the blending weight matter? Compares the per-pixel
//! least-squares weight against the best constant weight for two noisy
//! estimates of the same frame.

use vfilab::{attention_fuse, metrics, oracle_mask, synth, MaskMap};

fn main() -> vfilab::Result<()> {
    let gt = synth::smooth_texture(64, 64, 3, 1);
    let good = synth::add_noise(&gt, 0.02, 2);
    let bad = synth::add_noise(&gt, 0.08, 3);

    let mut best = (0.0, f64::INFINITY);
    for k in 0..=20 {
        let w = k as f64 / 20.0;
        let mse = metrics::mse(&attention_fuse(&good, &bad, &MaskMap::constant(64, 64, w)?)?, &gt)?;
        if mse < best.1 {
            best = (w, mse);
        }
    }
    let oracle = oracle_mask(&good, &bad, &gt)?;
    let fused = attention_fuse(&good, &bad, &oracle)?;
    println!(
        "candidate PSNR: {:.2} / {:.2} dB",
        metrics::psnr(&good, &gt)?,
        metrics::psnr(&bad, &gt)?
    );
    println!(
        "best constant w = {:.2}: {:.2} dB",
        best.0,
        metrics::psnr_from_mse(best.1)
    );
    println!(
        "oracle mask (mean w {:.3}): {:.2} dB",
        oracle.sum() / 4096.0,
        metrics::psnr(&fused, &gt)?
    );
    Ok(())
}
