use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use vfilab::synth;
use vfilab::{load_flo, load_frame, save_flo, save_frame, FlowField, Frame};

fn vfilab(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vfilab"));
    for a in args {
        cmd.arg(a);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, f: &Frame) -> PathBuf {
    let p = dir.join(name);
    save_frame(f, &p).unwrap();
    p
}

fn pair(dir: &TempDir) -> (PathBuf, PathBuf) {
    let base = synth::natural_scene(36, 30, 3);
    let (a, _, c) = synth::translating_triple(&base, 32, 26, 1, 1);
    (write(dir.path(), "a.png", &a), write(dir.path(), "c.png", &c))
}

#[test]
fn missing_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.flo");
    let o = vfilab(&[&"flow", &"nope1.png", &"nope2.png", &"-o", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope1.png"));
}

#[test]
fn bad_flag_exits_with_usage_code() {
    let o = vfilab(&[&"interpolate", &"--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_then_warp() {
    let dir = tempfile::tempdir().unwrap();
    let (a, c) = pair(&dir);
    let flo = dir.path().join("f.flo");
    let o = vfilab(&[
        &"flow",
        &a,
        &c,
        &"-o",
        &flo,
        &"--bidirectional",
        &"--iterations",
        &"40",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fwd = load_flo(dir.path().join("f.fwd.flo")).unwrap();
    assert!(dir.path().join("f.bwd.flo").is_file());
    assert_eq!(fwd.dims(), (32, 26));

    let warped = dir.path().join("w.png");
    let holes = dir.path().join("h.png");
    let o = vfilab(&[
        &"warp",
        &a,
        &"--flow",
        &dir.path().join("f.fwd.flo"),
        &"-o",
        &warped,
        &"--t",
        &"0.5",
        &"--holes",
        &holes,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(load_frame(&warped).unwrap().dims(), (32, 26));
    assert_eq!(load_frame(&holes).unwrap().channels(), 1);
}

#[test]
fn config_file_supplies_flow_settings() {
    let dir = tempfile::tempdir().unwrap();
    let (a, c) = pair(&dir);
    let cfg = dir.path().join("flow.cfg");
    fs::write(&cfg, "levels = 0\n").unwrap();
    let o = vfilab(&[
        &"flow",
        &a,
        &c,
        &"-o",
        &dir.path().join("f.flo"),
        &"--config",
        &cfg,
    ]);
    assert_eq!(o.status.code(), Some(2), "levels = 0 must be rejected");
    // The flag wins over the file.
    let o = vfilab(&[
        &"flow",
        &a,
        &c,
        &"-o",
        &dir.path().join("f.flo"),
        &"--config",
        &cfg,
        &"--levels",
        &"2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_flow_interpolation_averages_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let (w, h) = (20, 16);
    let a = Frame::filled(w, h, 3, 0.2).unwrap();
    let c = Frame::filled(w, h, 3, 0.6).unwrap();
    let (pa, pc) = (write(dir.path(), "a.png", &a), write(dir.path(), "c.png", &c));
    let zero = dir.path().join("zero.flo");
    save_flo(&FlowField::zeros(w, h), &zero).unwrap();
    let out = dir.path().join("mid.png");
    let o = vfilab(&[
        &"interpolate",
        &pa,
        &pc,
        &"-o",
        &out,
        &"--flow-fwd",
        &zero,
        &"--flow-bwd",
        &zero,
        &"--dump-candidates",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mid = load_frame(&out).unwrap();
    // 0.2 and 0.6 come back from 8 bits as 51 and 153; their mean is 102.
    assert!(mid.data().iter().all(|&s| (s * 255.0 - 102.0).abs() < 0.5));
    for tag in [
        "cand1",
        "cand3",
        "holes1",
        "holes3",
        "contribution",
        "joint_holes",
    ] {
        assert!(
            dir.path().join(format!("mid.{tag}.png")).is_file(),
            "{tag} missing"
        );
    }
}

#[test]
fn fuse_with_weight_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.png", &Frame::filled(8, 8, 3, 0.0).unwrap());
    let b = write(dir.path(), "b.png", &Frame::filled(8, 8, 3, 1.0).unwrap());
    let out = dir.path().join("o.png");
    let o = vfilab(&[&"fuse", &a, &b, &"-o", &out, &"--weight", &"0.25"]);
    assert!(o.status.success());
    assert!(load_frame(&out)
        .unwrap()
        .data()
        .iter()
        .all(|&s| (s * 255.0 - 191.0).abs() < 1.0));

    let o = vfilab(&[
        &"fuse",
        &a,
        &b,
        &"-o",
        &out,
        &"--oracle",
        &a,
        &"--mask-out",
        &dir.path().join("m.png"),
    ]);
    assert!(o.status.success());
    assert!(load_frame(&out).unwrap().data().iter().all(|&s| s == 0.0));

    let o = vfilab(&[&"fuse", &a, &b, &"-o", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_prints_every_metric() {
    let dir = tempfile::tempdir().unwrap();
    let (a, c) = pair(&dir);
    let o = vfilab(&[&"eval", &a, &c]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["PSNR", "F-PSNR", "B-PSNR", "IE", "F-IE", "B-IE", "SSIM"] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{name}: "))),
            "{name} in {text}"
        );
    }

    let o = vfilab(&[&"eval", &a, &c, &"--json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let obj = json.as_object().unwrap();
    assert_eq!(obj.len(), 7);
    assert!(obj["PSNR"].as_f64().unwrap() > 0.0);
}

#[test]
fn identical_frames_report_infinite_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = pair(&dir);
    let o = vfilab(&[&"eval", &a, &a, &"--json", &"--no-saliency"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["PSNR"], "inf");
    assert_eq!(json["IE"], 0.0);
    assert!(json["F-PSNR"].is_null());
}

#[test]
fn all_foreground_saliency_leaves_background_empty() {
    let dir = tempfile::tempdir().unwrap();
    let (a, c) = pair(&dir);
    let white = write(dir.path(), "white.png", &Frame::filled(32, 26, 1, 1.0).unwrap());
    let o = vfilab(&[&"eval", &a, &c, &"--json", &"--saliency", &white]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(json["B-PSNR"].is_null() && json["B-IE"].is_null());
    assert_eq!(json["F-PSNR"], json["PSNR"]);
}

#[test]
fn saliency_command_writes_a_mask() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = pair(&dir);
    let out = dir.path().join("s.png");
    let o = vfilab(&[&"saliency", &a, &"-o", &out, &"--binarize", &"0.5"]);
    assert!(o.status.success());
    let m = load_frame(&out).unwrap();
    assert_eq!((m.dims(), m.channels()), ((32, 26), 1));
    assert!(m.data().iter().all(|&s| s == 0.0 || s == 1.0));
}

#[test]
fn bench_over_middlebury_layout() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("other-data");
    for i in 0..12 {
        let scene = root.join(format!("Scene{i:02}"));
        fs::create_dir_all(&scene).unwrap();
        let (a, b, c) = synth::translating_triple(&synth::natural_scene(28, 26, i), 24, 24, 1, 1);
        write(&scene, "frame10.png", &a);
        write(&scene, "frame10i11.png", &b);
        write(&scene, "frame11.png", &c);
    }
    let out = dir.path().join("out");
    let o = vfilab(&[
        &"bench",
        &root,
        &"--layout",
        &"middlebury",
        &"--out",
        &out,
        &"--iterations",
        &"30",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 14);
    assert!(lines[0].starts_with("sample"));
    assert!(lines[13].starts_with("mean"));
    for f in ["summary.json", "manifest.json", "config.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    // The saved config replays the run.
    let again = dir.path().join("again");
    let cfg = out.join("config.txt");
    let o = vfilab(&[&"bench", &root, &"--config", &cfg, &"--out", &again]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(again.join("report.csv")).unwrap(), csv);

    let o = vfilab(&[&"bench", &root, &"--layout", &"vimeo", &"--out", &out]);
    assert_eq!(o.status.code(), Some(2), "empty vimeo scan");
}
