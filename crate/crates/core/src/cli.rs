//! Command-line front end. Exit codes: 0 success, 1 internal error, 2 usage
//! or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_benchmark, table_value, BenchConfig, ReportFormat};
use crate::config::ConfigFile;
use crate::dataset::Layout;
use crate::error::{Error, Result};
use crate::flow::{estimate_bidirectional, estimate_flow, FlowParams};
use crate::fusion::{attention_fuse, interpolate_detailed, oracle_mask};
use crate::io::{load_flo, load_frame, load_mask, save_flo, save_frame, save_holes, save_mask};
use crate::mask::MaskMap;
use crate::metrics::{evaluate_sample, COLUMNS};
use crate::saliency::{load_saliency, spectral_saliency};
use crate::warp::{backward_warp, forward_warp, DEFAULT_COVERAGE_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vfilab",
    version,
    about = "Flow-based frame interpolation and saliency-weighted evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate optical flow from frame A to frame B.
    Flow(FlowCmd),
    /// Warp a frame along a flow field.
    Warp(WarpCmd),
    /// Synthesize the frame between two inputs.
    Interpolate(InterpolateCmd),
    /// Blend two frames with a per-pixel weight.
    Fuse(FuseCmd),
    /// Compute a spectral-residual saliency map.
    Saliency(SaliencyCmd),
    /// Score a predicted frame against ground truth.
    Eval(EvalCmd),
    /// Benchmark interpolation over a triplet dataset.
    Bench(BenchCmd),
}

/// Flow estimator settings; unset flags fall back to `--config`, then defaults.
#[derive(Debug, Args, Default)]
pub struct FlowArgs {
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pyramid levels [default: 4]
    #[arg(long)]
    pub levels: Option<usize>,
    /// Smoothness weight on the 0-255 scale [default: 15]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Jacobi sweeps per level [default: 100]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Size ratio between pyramid levels [default: 0.5]
    #[arg(long)]
    pub downscale: Option<f64>,
}

impl FlowArgs {
    fn config_file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    fn resolve(&self, file: &ConfigFile) -> Result<FlowParams> {
        let d = FlowParams::default();
        let params = FlowParams {
            pyramid_levels: pick(self.levels, file.get("levels")?, d.pyramid_levels),
            smoothness_alpha: pick(self.alpha, file.get("alpha")?, d.smoothness_alpha),
            iterations_per_level: pick(self.iterations, file.get("iterations")?, d.iterations_per_level),
            downscale_factor: pick(self.downscale, file.get("downscale")?, d.downscale_factor),
        };
        params.validate()?;
        Ok(params)
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[derive(Debug, Args)]
pub struct FlowCmd {
    pub frame_a: PathBuf,
    pub frame_b: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also estimate B to A; writes `<out>.fwd.flo` and `<out>.bwd.flo`.
    #[arg(long)]
    pub bidirectional: bool,
    #[command(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Args)]
pub struct WarpCmd {
    pub source: PathBuf,
    /// Flow field (.flo) from the source frame.
    #[arg(long)]
    pub flow: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Fraction of the flow to apply.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Minimum splat weight for a covered pixel.
    #[arg(long, default_value_t = DEFAULT_COVERAGE_THRESHOLD)]
    pub threshold: f64,
    /// Hole mask output (255 = hole).
    #[arg(long)]
    pub holes: Option<PathBuf>,
    /// Sample the source at `p + flow(p)` instead of splatting.
    #[arg(long)]
    pub backward: bool,
}

#[derive(Debug, Args)]
pub struct InterpolateCmd {
    pub first: PathBuf,
    pub last: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Precomputed flow from the first to the last frame.
    #[arg(long, requires = "flow_bwd")]
    pub flow_fwd: Option<PathBuf>,
    /// Precomputed flow from the last to the first frame.
    #[arg(long, requires = "flow_fwd")]
    pub flow_bwd: Option<PathBuf>,
    /// Write both candidates, their hole masks, the contribution mask and
    /// the joint hole mask next to the output.
    #[arg(long)]
    pub dump_candidates: bool,
    #[command(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Args)]
pub struct FuseCmd {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Weight map for the first input (8-bit gray, w = byte / 255).
    #[arg(long, conflicts_with_all = ["weight", "oracle"])]
    pub mask: Option<PathBuf>,
    /// Constant weight for the first input.
    #[arg(long, conflicts_with = "oracle")]
    pub weight: Option<f64>,
    /// Ground truth frame; fuses with the per-pixel least-squares weight.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Where to write the weight map that was used.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SaliencyCmd {
    pub frame: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write a hard mask thresholded at this value.
    #[arg(long)]
    pub binarize: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    pub prediction: PathBuf,
    pub ground_truth: PathBuf,
    /// Foreground saliency map; defaults to spectral saliency of the ground truth.
    #[arg(long, conflicts_with = "no_saliency")]
    pub saliency: Option<PathBuf>,
    /// Whole-frame metrics only.
    #[arg(long)]
    pub no_saliency: bool,
    /// Threshold the saliency map into a hard mask.
    #[arg(long)]
    pub binarize: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    pub root: PathBuf,
    /// vimeo, middlebury or flat
    #[arg(long)]
    pub layout: Option<String>,
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory of `<id>.png` saliency maps.
    #[arg(long)]
    pub saliency_dir: Option<PathBuf>,
    /// Vimeo-style clip list restricting the scan.
    #[arg(long)]
    pub list_file: Option<PathBuf>,
    /// csv or md [default: csv]
    #[arg(long)]
    pub report: Option<String>,
    /// Output directory [default: bench-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub binarize: Option<f64>,
    #[command(flatten)]
    pub flow: FlowArgs,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_USAGE
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Flow(c) => cmd_flow(c),
        Command::Warp(c) => cmd_warp(c),
        Command::Interpolate(c) => cmd_interpolate(c),
        Command::Fuse(c) => cmd_fuse(c),
        Command::Saliency(c) => cmd_saliency(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Bench(c) => cmd_bench(c),
    }
}

/// `dir/name.png` + `fwd`, `flo` -> `dir/name.fwd.flo`
fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn cmd_flow(c: FlowCmd) -> Result<()> {
    let params = c.flow.resolve(&c.flow.config_file()?)?;
    let a = load_frame(&c.frame_a)?;
    let b = load_frame(&c.frame_b)?;
    if c.bidirectional {
        let (fwd, bwd) = estimate_bidirectional(&a, &b, &params)?;
        save_flo(&fwd, sibling(&c.output, "fwd", "flo"))?;
        save_flo(&bwd, sibling(&c.output, "bwd", "flo"))?;
    } else {
        save_flo(&estimate_flow(&a, &b, &params)?, &c.output)?;
    }
    Ok(())
}

fn cmd_warp(c: WarpCmd) -> Result<()> {
    let src = load_frame(&c.source)?;
    let flow = load_flo(&c.flow)?.scaled(c.t)?;
    if c.backward {
        save_frame(&backward_warp(&src, &flow)?, &c.output)?;
        return Ok(());
    }
    let (out, holes) = forward_warp(&src, &flow, c.threshold)?;
    save_frame(&out, &c.output)?;
    if let Some(p) = c.holes {
        save_holes(&holes, p)?;
    }
    Ok(())
}

fn cmd_interpolate(c: InterpolateCmd) -> Result<()> {
    let params = c.flow.resolve(&c.flow.config_file()?)?;
    let f1 = load_frame(&c.first)?;
    let f3 = load_frame(&c.last)?;
    let flows = match (&c.flow_fwd, &c.flow_bwd) {
        (Some(a), Some(b)) => Some((load_flo(a)?, load_flo(b)?)),
        _ => None,
    };
    let result = interpolate_detailed(&f1, &f3, c.t, &params, flows.as_ref().map(|(a, b)| (a, b)))?;
    save_frame(&result.output, &c.output)?;
    if c.dump_candidates {
        let o = &c.output;
        save_frame(&result.candidates.from_first, sibling(o, "cand1", "png"))?;
        save_frame(&result.candidates.from_last, sibling(o, "cand3", "png"))?;
        save_holes(&result.candidates.holes_first, sibling(o, "holes1", "png"))?;
        save_holes(&result.candidates.holes_last, sibling(o, "holes3", "png"))?;
        save_mask(&result.contribution, sibling(o, "contribution", "png"))?;
        save_holes(&result.joint_holes, sibling(o, "joint_holes", "png"))?;
    }
    Ok(())
}

fn cmd_fuse(c: FuseCmd) -> Result<()> {
    let a = load_frame(&c.first)?;
    let b = load_frame(&c.second)?;
    let (w, h) = a.dims();
    let mask = match (&c.mask, c.weight, &c.oracle) {
        (Some(p), _, _) => load_mask(p)?,
        (None, Some(v), _) => MaskMap::constant(w, h, v)?,
        (None, None, Some(gt)) => oracle_mask(&a, &b, &load_frame(gt)?)?,
        (None, None, None) => {
            return Err(Error::InvalidArgument(
                "fuse needs one of --mask, --weight or --oracle".into(),
            ))
        }
    };
    save_frame(&attention_fuse(&a, &b, &mask)?, &c.output)?;
    if let Some(p) = c.mask_out {
        save_mask(&mask, p)?;
    }
    Ok(())
}

fn cmd_saliency(c: SaliencyCmd) -> Result<()> {
    let frame = load_frame(&c.frame)?;
    let mut m = spectral_saliency(&frame);
    if let Some(th) = c.binarize {
        m = m.binarized(th);
    }
    save_mask(&m, &c.output)
}

fn cmd_eval(c: EvalCmd) -> Result<()> {
    let pred = load_frame(&c.prediction)?;
    let gt = load_frame(&c.ground_truth)?;
    pred.ensure_same_shape(&gt, "eval")?;
    let (w, h) = gt.dims();
    let saliency = if c.no_saliency {
        None
    } else {
        let m = match &c.saliency {
            Some(p) => load_saliency(p, w, h)?,
            None => spectral_saliency(&gt),
        };
        Some(match c.binarize {
            Some(th) => m.binarized(th),
            None => m,
        })
    };
    let record = evaluate_sample(&pred, &gt, saliency.as_ref())?;
    if c.json {
        println!("{}", record.to_json());
    } else {
        for (i, (name, v)) in COLUMNS.iter().zip(record.values()).enumerate() {
            println!("{name}: {}", table_value(i, v));
        }
    }
    Ok(())
}

fn cmd_bench(c: BenchCmd) -> Result<()> {
    let file = c.flow.config_file()?;
    let flow = c.flow.resolve(&file)?;
    let layout: Layout = match c.layout.or_else(|| file.get_str("layout").map(String::from)) {
        Some(s) => s.parse()?,
        None => return Err(Error::InvalidArgument("bench needs --layout".into())),
    };
    let report: ReportFormat = c
        .report
        .or_else(|| file.get_str("report").map(String::from))
        .unwrap_or_else(|| "csv".into())
        .parse()?;
    let path_from_file = |key: &str| file.get_str(key).filter(|s| !s.is_empty()).map(PathBuf::from);
    let mut config = BenchConfig::new(
        c.root,
        layout,
        c.out
            .or_else(|| path_from_file("out"))
            .unwrap_or_else(|| PathBuf::from("bench-out")),
    );
    config.flow = flow;
    config.report = report;
    config.limit = c.limit.or(nonempty(&file, "limit")?);
    config.seed = c.seed.or(file.get("seed")?).unwrap_or(0);
    config.saliency_dir = c.saliency_dir.or_else(|| path_from_file("saliency-dir"));
    config.list_file = c.list_file.or_else(|| path_from_file("list-file"));
    config.binarize = c.binarize.or(nonempty(&file, "binarize")?);

    let result = run_benchmark(&config)?;
    let path = result.write(&config)?;
    println!(
        "evaluated {}/{} samples ({} failed); report written to {}",
        result.records.len(),
        result.manifest.len(),
        result.failures.len(),
        path.display()
    );
    Ok(())
}

fn nonempty<T: std::str::FromStr>(file: &ConfigFile, key: &str) -> Result<Option<T>> {
    match file.get_str(key) {
        None | Some("") => Ok(None),
        Some(_) => file.get(key),
    }
}
