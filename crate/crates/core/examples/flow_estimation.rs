//! Estimates flow between a texture and a shifted copy, then prints the
//! per-level energy trace and the endpoint error against the known motion.
//!
//! cargo run --release --example flow_estimation [-- dx dy]

use vfilab::flow::estimate_flow_traced;
use vfilab::synth;
use vfilab::FlowParams;

fn main() -> vfilab::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<isize>().expect("integer shift"));
    let dx = args.next().unwrap_or(3);
    let dy = args.next().unwrap_or(-1);

    let a = synth::periodic_texture(96, 96, 3, 11);
    let b = synth::circular_shift(&a, dx, dy);
    let params = FlowParams::default();
    let (flow, trace) = estimate_flow_traced(&a, &b, &params)?;

    for level in &trace {
        let first = level.energies.first().copied().unwrap_or(0.0);
        let last = level.energies.last().copied().unwrap_or(0.0);
        println!(
            "{:>3}x{:<3} energy {first:>12.1} -> {last:>12.1}",
            level.width, level.height
        );
    }
    let (u, v) = flow.at(48, 48);
    println!("flow at centre ({u:.3}, {v:.3}), true ({dx}, {dy})");
    println!(
        "mean EPE over central 75%: {:.4} px",
        flow.mean_epe_uniform(dx as f64, dy as f64, 0.75)
    );
    Ok(())
}
