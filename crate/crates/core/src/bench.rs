//! Dataset benchmark: interpolate the middle frame of every triplet, score it
//! against ground truth and write a report with one row per sample plus a
//! mean row.
//!
//! Output directory contents:
//!
//! * `report.csv` or `report.md`: per-sample metrics and the mean row
//! * `summary.json`: aggregate values, counts of infinite PSNRs and failures
//! * `manifest.json`: the exact sample list evaluated
//! * `config.txt`: every setting of the run, loadable with `--config`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::ConfigFile;
use crate::dataset::{scan_dataset, subsample, DatasetManifest, Layout, TripletSample};
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::fusion::interpolate;
use crate::metrics::{evaluate_sample, metric_json, EvalRecord, COLUMNS};
use crate::saliency::{load_saliency, spectral_saliency};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format {other:?} (expected csv or md)"
            ))),
        }
    }
}

impl ReportFormat {
    fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub root: PathBuf,
    pub layout: Layout,
    pub list_file: Option<PathBuf>,
    pub limit: Option<usize>,
    pub seed: u64,
    pub saliency_dir: Option<PathBuf>,
    /// Threshold for hard saliency masks; `None` keeps soft masks.
    pub binarize: Option<f64>,
    pub report: ReportFormat,
    pub out: PathBuf,
    pub flow: FlowParams,
    pub t: f64,
}

impl BenchConfig {
    pub fn new(root: impl Into<PathBuf>, layout: Layout, out: impl Into<PathBuf>) -> Self {
        BenchConfig {
            root: root.into(),
            layout,
            list_file: None,
            limit: None,
            seed: 0,
            saliency_dir: None,
            binarize: None,
            report: ReportFormat::Csv,
            out: out.into(),
            flow: FlowParams::default(),
            t: 0.5,
        }
    }

    /// Every setting, keyed like the CLI flags.
    pub fn to_config_file(&self) -> ConfigFile {
        let mut c = ConfigFile::default();
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        c.set("root", self.root.display());
        c.set("layout", self.layout);
        c.set("list-file", opt_path(&self.list_file));
        c.set("limit", self.limit.map(|n| n.to_string()).unwrap_or_default());
        c.set("seed", self.seed);
        c.set("saliency-dir", opt_path(&self.saliency_dir));
        c.set(
            "binarize",
            self.binarize.map(|b| b.to_string()).unwrap_or_default(),
        );
        c.set("report", self.report.as_str());
        c.set("out", self.out.display());
        c.set("levels", self.flow.pyramid_levels);
        c.set("alpha", self.flow.smoothness_alpha);
        c.set("iterations", self.flow.iterations_per_level);
        c.set("downscale", self.flow.downscale_factor);
        c.set("t", self.t);
        c
    }
}

/// Mean of one column over samples with a finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSummary {
    pub mean: Option<f64>,
    pub finite: usize,
    pub infinite: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub manifest: DatasetManifest,
    pub records: Vec<EvalRecord>,
    /// `(sample id, error message)` for samples that could not be evaluated.
    pub failures: Vec<(String, String)>,
    pub columns: [ColumnSummary; 7],
}

pub fn summarize(records: &[EvalRecord]) -> [ColumnSummary; 7] {
    std::array::from_fn(|col| {
        let mut s = ColumnSummary {
            mean: None,
            finite: 0,
            infinite: 0,
            missing: 0,
        };
        let mut sum = 0.0;
        for r in records {
            match r.values()[col] {
                None => s.missing += 1,
                Some(v) if v.is_infinite() => s.infinite += 1,
                Some(v) => {
                    sum += v;
                    s.finite += 1;
                }
            }
        }
        if s.finite > 0 {
            s.mean = Some(sum / s.finite as f64);
        }
        s
    })
}

fn evaluate_one(config: &BenchConfig, root: &Path, sample: &TripletSample) -> Result<EvalRecord> {
    let (first, middle, last) = sample.load(root)?;
    let generated = interpolate(&first, &last, config.t, &config.flow, None)?;
    let (w, h) = middle.dims();
    let mut saliency = match &sample.saliency {
        Some(p) => load_saliency(root.join(p), w, h)?,
        None => spectral_saliency(&middle),
    };
    if let Some(th) = config.binarize {
        saliency = saliency.binarized(th);
    }
    let mut record = evaluate_sample(&generated, &middle, Some(&saliency))?;
    record.sample_id = sample.id.clone();
    Ok(record)
}

/// Scans, optionally subsamples, and evaluates every sample. Work runs in
/// parallel but results keep manifest order.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.flow.validate()?;
    let mut manifest = scan_dataset(&config.root, config.layout, config.list_file.as_deref())?;
    if let Some(n) = config.limit {
        if n < manifest.len() {
            manifest = subsample(&manifest, n, config.seed)?;
        }
    }
    if let Some(dir) = &config.saliency_dir {
        manifest.attach_saliency_dir(dir);
    }
    let outcomes: Vec<Result<EvalRecord>> = manifest
        .samples
        .par_iter()
        .map(|s| evaluate_one(config, &manifest.root, s))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (sample, outcome) in manifest.samples.iter().zip(outcomes) {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                warn!("sample {} skipped: {e}", sample.id);
                failures.push((sample.id.clone(), e.to_string()));
            }
        }
    }
    let columns = summarize(&records);
    Ok(BenchReport {
        manifest,
        records,
        failures,
        columns,
    })
}

fn csv_value(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x}"),
    }
}

/// Two decimals for PSNR/IE columns, four for SSIM.
pub fn table_value(column: usize, v: Option<f64>) -> String {
    match v {
        None => "n/a".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) if column == 6 => format!("{x:.4}"),
        Some(x) => format!("{x:.2}"),
    }
}

impl BenchReport {
    /// Full-precision CSV: header, one row per evaluated sample, then `mean`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["sample_id"];
        header.extend(COLUMNS);
        w.write_record(&header).expect("in-memory write");
        for r in &self.records {
            let mut row = vec![r.sample_id.clone()];
            row.extend(r.values().into_iter().map(csv_value));
            w.write_record(&row).expect("in-memory write");
        }
        let mut row = vec!["mean".to_string()];
        row.extend(self.columns.iter().map(|c| csv_value(c.mean)));
        w.write_record(&row).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "| Sample | {} |", COLUMNS.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(COLUMNS.len()));
        for r in &self.records {
            let cells: Vec<String> = r
                .values()
                .into_iter()
                .enumerate()
                .map(|(i, v)| table_value(i, v))
                .collect();
            let _ = writeln!(s, "| {} | {} |", r.sample_id, cells.join(" | "));
        }
        let means: Vec<String> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| table_value(i, c.mean))
            .collect();
        let _ = writeln!(s, "| **mean** | {} |", means.join(" | "));
        let _ = writeln!(s);
        for (name, c) in COLUMNS.iter().zip(&self.columns) {
            if c.infinite > 0 || c.missing > 0 {
                let _ = writeln!(
                    s,
                    "- {name}: {} infinite and {} undefined values excluded from the mean",
                    c.infinite, c.missing
                );
            }
        }
        let _ = writeln!(
            s,
            "- evaluated {} of {} samples ({} failed)",
            self.records.len(),
            self.manifest.len(),
            self.failures.len()
        );
        s
    }

    pub fn summary_json(&self, config: &BenchConfig) -> Value {
        let mut columns = Map::new();
        for (name, c) in COLUMNS.iter().zip(&self.columns) {
            columns.insert(
                name.to_string(),
                json!({
                    "mean": metric_json(c.mean),
                    "finite": c.finite,
                    "infinite": c.infinite,
                    "undefined": c.missing,
                }),
            );
        }
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|(id, e)| json!({ "id": id, "error": e }))
            .collect();
        json!({
            "layout": config.layout.to_string(),
            "seed": config.seed,
            "samples": self.manifest.len(),
            "evaluated": self.records.len(),
            "failed": self.failures.len(),
            "failures": failures,
            "columns": Value::Object(columns),
        })
    }

    /// Writes the report, summary, manifest and configuration into
    /// `config.out`. Returns the report path.
    pub fn write(&self, config: &BenchConfig) -> Result<PathBuf> {
        let out = &config.out;
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let write = |name: &str, text: String| -> Result<PathBuf> {
            let p = out.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
            Ok(p)
        };
        let report = match config.report {
            ReportFormat::Csv => write("report.csv", self.to_csv())?,
            ReportFormat::Markdown => write("report.md", self.to_markdown())?,
        };
        write(
            "summary.json",
            serde_json::to_string_pretty(&self.summary_json(config)).expect("json") + "\n",
        )?;
        self.manifest.save(out.join("manifest.json"))?;
        write("config.txt", config.to_config_file().render())?;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, psnr: f64, ie: f64) -> EvalRecord {
        EvalRecord {
            sample_id: id.into(),
            psnr,
            f_psnr: Some(psnr - 1.0),
            b_psnr: None,
            ie,
            f_ie: Some(ie * 2.0),
            b_ie: None,
            ssim: 0.9,
        }
    }

    #[test]
    fn summary_excludes_infinities() {
        let rs = [
            record("a", 30.0, 2.0),
            record("b", f64::INFINITY, 0.0),
            record("c", 34.0, 4.0),
        ];
        let s = summarize(&rs);
        assert_eq!(s[0].mean, Some(32.0));
        assert_eq!(s[0].infinite, 1);
        assert_eq!(s[3].mean, Some(2.0));
        assert_eq!(s[2].missing, 3);
        assert_eq!(s[2].mean, None);
    }

    #[test]
    fn csv_and_markdown_layout() {
        let records = vec![record("a", 30.0, 2.0), record("b", f64::INFINITY, 1.0)];
        let report = BenchReport {
            manifest: DatasetManifest {
                root: PathBuf::from("."),
                layout: Layout::Flat,
                samples: vec![],
            },
            columns: summarize(&records),
            records,
            failures: vec![],
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "sample_id,PSNR,F-PSNR,B-PSNR,IE,F-IE,B-IE,SSIM");
        assert_eq!(lines[2], "b,inf,inf,,1,2,,0.9");
        assert_eq!(lines[3], "mean,30,29,,1.5,3,,0.9");
        let md = report.to_markdown();
        assert!(md.contains("| **mean** | 30.00 | 29.00 | n/a | 1.50 | 3.00 | n/a | 0.9000 |"));
        assert!(md.contains("PSNR: 1 infinite"));
    }

    #[test]
    fn config_file_lists_every_setting() {
        let c = BenchConfig::new("/data", Layout::Middlebury, "/tmp/out");
        let text = c.to_config_file().render();
        for key in [
            "layout",
            "seed",
            "limit",
            "levels",
            "alpha",
            "iterations",
            "downscale",
            "report",
            "t",
        ] {
            assert!(text.contains(&format!("{key} = ")), "{key}");
        }
    }
}
