//! Triplet benchmarks on disk: layout scanning, seeded subsets and the JSON
//! manifest that pins a run to an exact list of samples.
//!
//! Supported layouts:
//!
//! * `vimeo`: `sequences/<seq>/<clip>/im{1,2,3}.png`, id `<seq>/<clip>`,
//!   optionally restricted by a list file of `<seq>/<clip>` lines.
//! * `middlebury`: one directory per scene holding `frame10.png`,
//!   `frame10i11.png` (ground truth) and `frame11.png`, id = scene path.
//! * `flat`: any directory whose image files are exactly `im1/im2/im3` or
//!   `frame1/frame2/frame3` (png, ppm or pgm), id = directory path.
//!
//! Ids use `/` separators and samples are sorted by id, so manifests do not
//! depend on filesystem iteration order.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::io::load_frame;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "ppm", "pgm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Vimeo,
    Middlebury,
    Flat,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vimeo" => Ok(Layout::Vimeo),
            "middlebury" => Ok(Layout::Middlebury),
            "flat" | "flat-triplet" => Ok(Layout::Flat),
            other => Err(Error::InvalidArgument(format!(
                "unknown layout {other:?} (expected vimeo, middlebury or flat)"
            ))),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Vimeo => "vimeo",
            Layout::Middlebury => "middlebury",
            Layout::Flat => "flat",
        })
    }
}

/// Paths are relative to the manifest root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletSample {
    pub id: String,
    pub first: PathBuf,
    pub middle: PathBuf,
    pub last: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saliency: Option<PathBuf>,
}

impl TripletSample {
    /// Loads `(first, middle, last)` and checks that they share a shape.
    pub fn load(&self, root: &Path) -> Result<(Frame, Frame, Frame)> {
        let first = load_frame(root.join(&self.first))?;
        let middle = load_frame(root.join(&self.middle))?;
        let last = load_frame(root.join(&self.last))?;
        first.ensure_same_shape(&middle, &format!("sample {} first/middle", self.id))?;
        first.ensure_same_shape(&last, &format!("sample {} first/last", self.id))?;
        Ok((first, middle, last))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub layout: Layout,
    pub samples: Vec<TripletSample>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad manifest JSON: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Attaches `<dir>/<id>.png` as the saliency map of every sample for
    /// which that file exists. Stored relative to the root when possible.
    pub fn attach_saliency_dir(&mut self, dir: &Path) {
        for s in &mut self.samples {
            let candidate = dir.join(format!("{}.png", s.id));
            if candidate.is_file() {
                let rel = candidate
                    .strip_prefix(&self.root)
                    .map(Path::to_path_buf)
                    .unwrap_or(candidate);
                s.saliency = Some(rel);
            }
        }
    }
}

/// Collects every triplet under `root` for the given layout.
pub fn scan_dataset(
    root: impl AsRef<Path>,
    layout: Layout,
    list_file: Option<&Path>,
) -> Result<DatasetManifest> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root is not a directory"),
        ));
    }
    let mut samples = match layout {
        Layout::Vimeo => scan_vimeo(root, list_file)?,
        Layout::Middlebury => scan_middlebury(root)?,
        Layout::Flat => scan_flat(root)?,
    };
    if samples.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no {layout} triplets under {}",
            root.display()
        )));
    }
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(DatasetManifest {
        root: root.to_path_buf(),
        layout,
        samples,
    })
}

fn id_of(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn read_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().trim_matches('/').to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn scan_vimeo(root: &Path, list_file: Option<&Path>) -> Result<Vec<TripletSample>> {
    let allowed = list_file.map(read_list).transpose()?;
    let seq_root = root.join("sequences");
    let mut samples = Vec::new();
    if !seq_root.is_dir() {
        return Ok(samples);
    }
    for entry in WalkDir::new(&seq_root)
        .min_depth(2)
        .max_depth(2)
        .sort_by_file_name()
    {
        let entry = entry.map_err(|e| Error::io(&seq_root, e.into()))?;
        if !entry.file_type().is_dir() {
            continue;
        }
        let dir = entry.path();
        let names = ["im1.png", "im2.png", "im3.png"];
        if !names.iter().all(|n| dir.join(n).is_file()) {
            continue;
        }
        let id = id_of(dir.strip_prefix(&seq_root).expect("under root"));
        if let Some(allowed) = &allowed {
            if !allowed.contains(&id) {
                continue;
            }
        }
        let rel = dir.strip_prefix(root).expect("under root");
        samples.push(TripletSample {
            id,
            first: rel.join(names[0]),
            middle: rel.join(names[1]),
            last: rel.join(names[2]),
            saliency: None,
        });
    }
    Ok(samples)
}

fn scan_middlebury(root: &Path) -> Result<Vec<TripletSample>> {
    let names = ["frame10.png", "frame10i11.png", "frame11.png"];
    let mut samples = Vec::new();
    for entry in WalkDir::new(root).min_depth(1).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if !entry.file_type().is_dir() {
            continue;
        }
        let dir = entry.path();
        if !names.iter().all(|n| dir.join(n).is_file()) {
            continue;
        }
        let rel = dir.strip_prefix(root).expect("under root");
        samples.push(TripletSample {
            id: id_of(rel),
            first: rel.join(names[0]),
            middle: rel.join(names[1]),
            last: rel.join(names[2]),
            saliency: None,
        });
    }
    Ok(samples)
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false);
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn scan_flat(root: &Path) -> Result<Vec<TripletSample>> {
    let stem_sets = [["im1", "im2", "im3"], ["frame1", "frame2", "frame3"]];
    let mut samples = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::io(root, e.into()))?;
        if !entry.file_type().is_dir() {
            continue;
        }
        let dir = entry.path();
        let files = image_files(dir)?;
        if files.len() != 3 {
            continue;
        }
        let stem = |p: &PathBuf| p.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
        for set in &stem_sets {
            let ordered: Option<Vec<&PathBuf>> =
                set.iter().map(|s| files.iter().find(|f| stem(f) == *s)).collect();
            if let Some(ordered) = ordered {
                let rel = |p: &PathBuf| p.strip_prefix(root).expect("under root").to_path_buf();
                let rel_dir = dir.strip_prefix(root).expect("under root");
                let id = if rel_dir.as_os_str().is_empty() {
                    ".".to_string()
                } else {
                    id_of(rel_dir)
                };
                samples.push(TripletSample {
                    id,
                    first: rel(ordered[0]),
                    middle: rel(ordered[1]),
                    last: rel(ordered[2]),
                    saliency: None,
                });
                break;
            }
        }
    }
    Ok(samples)
}

/// Uniform sample of `n` triplets without replacement, returned in id order.
///
/// Selection is a partial Fisher–Yates shuffle driven by ChaCha8 seeded with
/// `seed` (`rand_chacha::ChaCha8Rng::seed_from_u64`), so a given
/// `(manifest, n, seed)` always picks the same subset.
pub fn subsample(manifest: &DatasetManifest, n: usize, seed: u64) -> Result<DatasetManifest> {
    let len = manifest.samples.len();
    if n == 0 || n > len {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {n} of {len} samples"
        )));
    }
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let j = rng.gen_range(i..len);
        order.swap(i, j);
    }
    let mut picked: Vec<usize> = order[..n].to_vec();
    picked.sort_unstable();
    let mut samples: Vec<TripletSample> = picked.into_iter().map(|i| manifest.samples[i].clone()).collect();
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(DatasetManifest {
        root: manifest.root.clone(),
        layout: manifest.layout,
        samples,
    })
}
