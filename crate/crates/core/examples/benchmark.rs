//! Writes a small flat-layout dataset to a temp directory, benchmarks it and
//! prints the markdown report.

use std::fs;

use vfilab::bench::{run_benchmark, BenchConfig, ReportFormat};
use vfilab::dataset::Layout;
use vfilab::{save_frame, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let root = tmp.path().join("data");
    for i in 0..6u64 {
        let dir = root.join(format!("clip{i}"));
        fs::create_dir_all(&dir)?;
        let shift = 1 + i as usize % 3;
        let (a, b, c) = synth::translating_triple(&synth::natural_scene(72, 72, i), 64, 64, shift, 0);
        save_frame(&a, dir.join("frame1.png"))?;
        save_frame(&b, dir.join("frame2.png"))?;
        save_frame(&c, dir.join("frame3.png"))?;
    }

    let mut config = BenchConfig::new(&root, Layout::Flat, tmp.path().join("out"));
    config.report = ReportFormat::Markdown;
    config.limit = Some(4);
    config.seed = 7;
    let report = run_benchmark(&config)?;
    print!("{}", report.to_markdown());
    let path = report.write(&config)?;
    println!(
        "\n{} samples evaluated, report at {}",
        report.records.len(),
        path.display()
    );
    Ok(())
}
