use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rim_core::cvnn::{ArchitectureSpec, CvFcnModel};
use rim_core::io::{write_checkpoint, Checkpoint, LabConfig, TrainingEcho};
use rim_core::train::TrainConfig;
use rim_core::{eval, pipeline, synth};
use rim_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { rim_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn to_c(x: &[Complex64]) -> Vec<RimComplex> {
    x.iter().map(|c| RimComplex { re: c.re, im: c.im }).collect()
}

fn synth_scene(config: &str, seed: u64, index: u64) -> (RimStatus, *mut RimScene) {
    let name = CString::new(config).unwrap();
    let mut scene = ptr::null_mut();
    let st = unsafe { rim_scene_synthesize(name.as_ptr(), seed, index, &mut scene) };
    (st, scene)
}

fn component(scene: *const RimScene, which: RimComponent) -> Vec<Complex64> {
    let n = unsafe { rim_scene_len(scene) };
    let mut out = vec![RimComplex::default(); n];
    assert_eq!(unsafe { rim_scene_copy(scene, which as i32, out.as_mut_ptr(), n) }, RimStatus::Ok);
    out.iter().map(|c| Complex64::new(c.re, c.im)).collect()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(rim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scene_matches_core_dataset() {
    let lab = LabConfig::preset("desk-64").unwrap();
    let dataset = synth::generate_dataset(&lab.radar, &lab.ranges, 5, 11).unwrap();
    let (st, scene) = synth_scene("desk-64", 11, 4);
    assert_eq!(st, RimStatus::Ok);
    let want = &dataset[4];
    assert_eq!(component(scene, RimComponent::Mixture), want.samples);
    assert_eq!(component(scene, RimComponent::Clean), want.clean);
    assert_eq!(component(scene, RimComponent::Interference), want.interference);
    assert_eq!(component(scene, RimComponent::Noise), want.noise);
    let mut sinr = 0.0;
    assert_eq!(unsafe { rim_scene_sinr_db(scene, &mut sinr) }, RimStatus::Ok);
    assert_eq!(Some(sinr), want.realized_sinr_db);
    unsafe { rim_scene_free(scene) };
}

#[test]
fn sinr_matches_core() {
    let rec: Vec<Complex64> = (0..64).map(|i| Complex64::new((i as f64).sin(), 0.3)).collect();
    let refr: Vec<Complex64> = (0..64).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
    let mut out = f64::NAN;
    let st = unsafe { rim_sinr_db(to_c(&rec).as_ptr(), to_c(&refr).as_ptr(), 64, &mut out) };
    assert_eq!(st, RimStatus::Ok);
    assert_eq!(out, eval::sinr_db(&rec, &refr).unwrap());

    let zero = vec![RimComplex::default(); 64];
    let st = unsafe { rim_sinr_db(to_c(&rec).as_ptr(), zero.as_ptr(), 64, &mut out) };
    assert_eq!(st, RimStatus::Data);
    assert!(!last_error().is_empty());
}

#[test]
fn error_codes() {
    let (st, scene) = synth_scene("no-such-preset", 0, 0);
    assert_eq!(st, RimStatus::InvalidArgument);
    assert!(scene.is_null());
    assert!(last_error().contains("no-such-preset"), "{}", last_error());

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rim_scene_synthesize(ptr::null(), 0, 0, &mut out) }, RimStatus::NullArgument);
    assert_eq!(unsafe { rim_sinr_db(ptr::null(), ptr::null(), 4, &mut 0.0) }, RimStatus::NullArgument);

    let missing = CString::new("/nonexistent/model.rimm").unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { rim_model_load(missing.as_ptr(), &mut model) }, RimStatus::Io);
    assert!(model.is_null());

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.rimm");
    std::fs::write(&junk, b"not a checkpoint").unwrap();
    let junk = CString::new(junk.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rim_model_load(junk.as_ptr(), &mut model) }, RimStatus::Data);

    let (_, scene) = synth_scene("desk-64", 1, 0);
    let mut small = vec![RimComplex::default(); 3];
    assert_eq!(unsafe { rim_scene_copy(scene, 1, small.as_mut_ptr(), 3) }, RimStatus::InvalidArgument);
    assert_eq!(unsafe { rim_scene_copy(scene, 9, small.as_mut_ptr(), 3) }, RimStatus::InvalidArgument);
    unsafe { rim_scene_free(scene) };

    assert_eq!(unsafe { rim_scene_len(ptr::null()) }, 0);
    assert_eq!(unsafe { rim_model_parameter_count(ptr::null()) }, 0);
    unsafe {
        rim_scene_free(ptr::null_mut());
        rim_model_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates_and_reports_length() {
    let _ = synth_scene("no-such-preset", 0, 0);
    let full = last_error();
    let mut buf = [0x7fu8; 5];
    let n = unsafe { rim_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert_eq!(n, full.len());
    assert_eq!(&buf[..4], &full.as_bytes()[..4]);
    assert_eq!(buf[4], 0);
    assert_eq!(unsafe { rim_last_error_message(ptr::null_mut(), 0) }, full.len());
}

#[test]
fn model_inference_matches_core() {
    let lab = LabConfig::preset("desk-64").unwrap();
    let arch: ArchitectureSpec = "complex:2x4".parse().unwrap();
    let model = CvFcnModel::init(&arch, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let training = TrainingEcho { train: TrainConfig::default(), stft: lab.stft.clone(), split: lab.split };
    let ckpt = Checkpoint { model, training };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.rimm");
    write_checkpoint(&path, &ckpt).unwrap();

    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { rim_model_load(c_path.as_ptr(), &mut handle) }, RimStatus::Ok);
    assert_eq!(unsafe { rim_model_parameter_count(handle) }, ckpt.model.count_parameters());

    let sweep = &synth::generate_dataset(&lab.radar, &lab.ranges, 1, 3).unwrap()[0];
    let want = pipeline::run_inference(&ckpt.model, &sweep.samples, &lab.stft, &lab.split).unwrap().signal;
    let mut buf = to_c(&sweep.samples);
    let n = buf.len();
    // in place: input and output alias
    let st = unsafe { rim_model_infer(handle, buf.as_ptr(), n, buf.as_mut_ptr()) };
    assert_eq!(st, RimStatus::Ok);
    assert_eq!(buf, to_c(&want));

    assert_eq!(unsafe { rim_model_infer(handle, buf.as_ptr(), 0, buf.as_mut_ptr()) }, RimStatus::InvalidArgument);
    unsafe { rim_model_free(handle) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rim.h")).unwrap();
    for name in [
        "rim_version",
        "rim_last_error_message",
        "rim_sinr_db",
        "rim_scene_synthesize",
        "rim_scene_len",
        "rim_scene_copy",
        "rim_scene_sinr_db",
        "rim_scene_free",
        "rim_model_load",
        "rim_model_parameter_count",
        "rim_model_infer",
        "rim_model_free",
        "typedef struct RimModel RimModel;",
        "typedef struct RimScene RimScene;",
        "RIM_STATUS_NUMERIC = 4",
        "RIM_COMPONENT_NOISE = 3",
    ] {
        assert!(header.contains(name), "rim.h lacks {name}");
    }
}

/// Links the C smoke program against the static library when a C compiler
/// is on PATH and the archive sits next to this test binary.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let archive = profile_dir.join("librim_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !archive.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", archive.display());
        return;
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("rim_smoke");
    let status = Command::new(&cc)
        .arg("-Wall")
        .arg("-Werror")
        .arg("-o")
        .arg(&out)
        .arg(root.join("c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success());
    let stdout = String::from_utf8(run.stdout).unwrap();
    let (_, scene) = synth_scene("desk-64", 7, 3);
    let mut sinr = 0.0;
    unsafe {
        rim_scene_sinr_db(scene, &mut sinr);
        rim_scene_free(scene);
    }
    assert!(stdout.contains(&format!("realized={sinr:.6}")), "{stdout}");
    assert!(stdout.contains("bad preset status=2"), "{stdout}");
}
