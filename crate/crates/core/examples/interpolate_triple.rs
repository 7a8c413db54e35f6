//! Builds a triple by translating a synthetic scene, interpolates the middle
//! frame from the outer two and writes everything to a directory.
//!
//! cargo run --release --example interpolate_triple [-- out_dir]

use std::path::PathBuf;

use vfilab::fusion::interpolate_detailed;
use vfilab::io::{save_holes, save_mask};
use vfilab::{metrics, save_frame, synth, FlowParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
        .join("vfilab-triple");
    std::fs::create_dir_all(&out)?;

    let scene = synth::natural_scene(132, 100, 21);
    let (first, middle, last) = synth::translating_triple(&scene, 128, 96, 2, 1);
    let r = interpolate_detailed(&first, &last, 0.5, &FlowParams::default(), None)?;

    let (u, v) = r.flow_forward.at(64, 48);
    println!("estimated F13 at centre: ({u:.2}, {v:.2}), true (4, 2)");
    println!(
        "holes: first {} last {} joint {}",
        r.candidates.holes_first.count(),
        r.candidates.holes_last.count(),
        r.joint_holes.count()
    );
    println!(
        "PSNR vs true middle: {:.2} dB",
        metrics::psnr(&r.output, &middle)?
    );
    println!("naive average:       {:.2} dB", {
        let avg = vfilab::attention_fuse(&first, &last, &vfilab::MaskMap::constant(128, 96, 0.5)?)?;
        metrics::psnr(&avg, &middle)?
    });

    save_frame(&first, out.join("first.png"))?;
    save_frame(&last, out.join("last.png"))?;
    save_frame(&r.output, out.join("interpolated.png"))?;
    save_mask(&r.contribution, out.join("contribution.png"))?;
    save_holes(&r.candidates.holes_first, out.join("holes_first.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
