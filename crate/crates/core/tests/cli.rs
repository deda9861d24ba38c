use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rim_core::cvnn::{ArchitectureSpec, CvFcnModel};
use rim_core::io::render::read_pgm;
use rim_core::io::{read_checkpoint, read_dataset};

fn rim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rim")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = rim(args);
    assert!(out.status.success(), "rim {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Lab {
    dir: tempfile::TempDir,
}

impl Lab {
    fn new() -> Self {
        Lab { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn synth(&self, name: &str, count: usize, seed: u64) -> PathBuf {
        let out = self.path(name);
        ok(&["synth", "--count", &count.to_string(), "--seed", &seed.to_string(), "--out", p(&out)]);
        out
    }

    fn train(&self, data: &Path, name: &str, epochs: usize) -> PathBuf {
        let out = self.path(name);
        ok(&[
            "train", "--data", p(data), "--arch", "complex:3x4", "--epochs", &epochs.to_string(), "--batch", "8",
            "--lr", "0.003", "--seed", "9", "--out", p(&out),
        ]);
        out
    }
}

#[test]
fn synth_is_deterministic_and_allows_empty() {
    let lab = Lab::new();
    let a = lab.synth("a.rimd", 12, 5);
    let b = lab.synth("b.rimd", 12, 5);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_dataset(&a).unwrap().len(), 12);
    let c = lab.synth("c.rimd", 12, 6);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    let empty = lab.synth("empty.rimd", 0, 5);
    assert!(read_dataset(&empty).unwrap().is_empty());
}

#[test]
fn zero_epochs_write_the_initialization() {
    let lab = Lab::new();
    let data = lab.synth("d.rimd", 4, 1);
    let ckpt = read_checkpoint(&lab.train(&data, "m.rimm", 0)).unwrap();
    let arch: ArchitectureSpec = "complex:3x4".parse().unwrap();
    let init = CvFcnModel::init(&arch, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(ckpt.model, init);
    let csv = std::fs::read_to_string(lab.path("m.loss.csv")).unwrap();
    assert_eq!(csv, "epoch,loss,squared_error,l21\n");
}

#[test]
fn training_run_end_to_end() {
    let lab = Lab::new();
    let data = lab.synth("train.rimd", 24, 2);
    let epochs = 15;
    let model = lab.train(&data, "m.rimm", epochs);
    let csv = std::fs::read_to_string(lab.path("m.loss.csv")).unwrap();
    let losses: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(losses.len(), epochs);
    // 5-epoch moving average does not go up over the run
    let avg = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
    let windows: Vec<f64> = losses.windows(5).map(avg).collect();
    assert!(windows.last().unwrap() <= windows.first().unwrap(), "{losses:?}");

    let test = lab.synth("test.rimd", 10, 3);
    let recovered = lab.path("rec.rimd");
    ok(&["infer", "--model", p(&model), "--in", p(&test), "--out", p(&recovered)]);
    let before = read_dataset(&test).unwrap();
    let after = read_dataset(&recovered).unwrap();
    assert_eq!(before.len(), after.len());
    for (b, a) in before.iter().zip(&after) {
        assert_eq!(b.sweep.samples, a.sweep.samples);
        assert_eq!(a.sweep.clean.len(), b.sweep.samples.len());
    }

    let report = lab.path("report.csv");
    let stdout = ok(&[
        "eval", "--model", p(&model), "--data", p(&test), "--methods", "model,identity,zero,oracle-zero,cfar-zero",
        "--report", p(&report),
    ]);
    assert!(stdout.contains("oracle-zero"));
    let text = std::fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scene_id,method,input_sinr_db,output_sinr_db"));
    let scored = before.iter().filter(|r| r.sweep.realized_sinr_db.is_some()).count();
    assert_eq!(lines.count(), 5 * scored);

    let again = lab.path("report2.csv");
    ok(&[
        "eval", "--model", p(&model), "--data", p(&test), "--methods", "model,identity,zero,oracle-zero,cfar-zero",
        "--report", p(&again),
    ]);
    assert_eq!(std::fs::read(&report).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn render_outputs() {
    let lab = Lab::new();
    let data = lab.synth("d.rimd", 2, 4);
    let pgm = lab.path("y.pgm");
    ok(&["render", "--in", p(&data), "--index", "1", "--out", p(&pgm)]);
    let (w, h, pixels) = read_pgm(&std::fs::read(&pgm).unwrap()).unwrap();
    assert_eq!((w, h), (49, 64));
    assert_eq!(pixels.len(), w * h);

    let csv = lab.path("profile.csv");
    ok(&["render", "--in", p(&data), "--what", "range-profile", "--signal", "s", "--out", p(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("frequency_hz,level_db\n"));
    assert_eq!(text.lines().count(), 1 + 256);
}

#[test]
fn exit_codes() {
    let lab = Lab::new();
    assert_eq!(rim(&["synth"]).status.code(), Some(2));
    assert_eq!(rim(&["frobnicate"]).status.code(), Some(2));
    let out = lab.path("x.rimd");
    assert_eq!(rim(&["synth", "--config", "no-such-preset", "--count", "1", "--out", p(&out)]).status.code(), Some(2));
    let missing = lab.path("missing.rimd");
    assert_eq!(rim(&["eval", "--data", p(&missing), "--report", p(&lab.path("r.csv"))]).status.code(), Some(3));
    let junk = lab.path("junk.rimd");
    std::fs::write(&junk, b"RIMDxxxx").unwrap();
    assert_eq!(rim(&["eval", "--data", p(&junk), "--report", p(&lab.path("r.csv"))]).status.code(), Some(3));
    let data = lab.synth("d.rimd", 1, 0);
    let bad = rim(&["render", "--in", p(&data), "--index", "7", "--out", p(&lab.path("o.pgm"))]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
    assert_eq!(rim(&["--version"]).status.code(), Some(0));
}
