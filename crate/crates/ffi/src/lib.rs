//! C ABI over `rim-core`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`RimStatus`]; on failure a message is kept per thread and can be fetched
//! with [`rim_last_error_message`]. Successful calls leave it untouched.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use rim_core::eval;
use rim_core::io::{read_checkpoint, Checkpoint, LabConfig};
use rim_core::pipeline;
use rim_core::synth::{self, SweepSignal};

/// Result of every fallible call. Values 2-4 match the `rim` CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Bad configuration, preset name, UTF-8 or buffer length.
    InvalidArgument = 2,
    /// Malformed input data or a degenerate signal.
    Data = 3,
    /// Non-finite values.
    Numeric = 4,
    /// File system error.
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Selects one component of a synthesized scene.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RimComponent {
    /// The received mixture `y`.
    Mixture = 0,
    Clean = 1,
    Interference = 2,
    Noise = 3,
}

/// Layout-compatible with `double[2]` as `{re, im}`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RimComplex {
    pub re: f64,
    pub im: f64,
}

/// A loaded checkpoint together with its pipeline settings.
pub struct RimModel {
    checkpoint: Checkpoint,
}

/// One synthesized sweep.
pub struct RimScene {
    sweep: SweepSignal,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(rim_core::Error),
}

impl From<rim_core::Error> for Failure {
    fn from(e: rim_core::Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &rim_core::Error) -> RimStatus {
    use rim_core::Error as E;
    match e {
        E::InvalidConfig(_) | E::Json(_) => RimStatus::InvalidArgument,
        E::Numeric(_) => RimStatus::Numeric,
        E::Io(_) => RimStatus::Io,
        _ => RimStatus::Data,
    }
}

fn set_error(msg: String) {
    LAST_ERROR.with(|m| *m.borrow_mut() = msg);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RimStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            RimStatus::NullArgument
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            RimStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RimStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn complex_arg(p: *const RimComplex, len: usize, what: &'static str) -> Result<Vec<Complex64>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len).iter().map(|c| Complex64::new(c.re, c.im)).collect())
}

unsafe fn write_complex(dst: *mut RimComplex, len: usize, src: &[Complex64]) -> Result<(), Failure> {
    if src.len() != len {
        return Err(Failure::Invalid(format!("output buffer holds {len} values, need {}", src.len())));
    }
    if len == 0 {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Failure::Null("output buffer"));
    }
    let out = std::slice::from_raw_parts_mut(dst, len);
    for (o, s) in out.iter_mut().zip(src) {
        *o = RimComplex { re: s.re, im: s.im };
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `cap > 0`). Returns the full message length in
/// bytes, excluding the terminator; 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rim_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|m| {
        let msg = m.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// SINR in dB of `recovered` against `reference`, both of length `len`.
///
/// # Safety
/// Both arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rim_sinr_db(
    recovered: *const RimComplex,
    reference: *const RimComplex,
    len: usize,
    out: *mut f64,
) -> RimStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let rec = complex_arg(recovered, len, "recovered")?;
        let refr = complex_arg(reference, len, "reference")?;
        *out = eval::sinr_db(&rec, &refr)?;
        Ok(())
    })
}

/// Synthesizes scene `index` of the dataset with seed `dataset_seed`, the
/// same scene `rim synth --seed <dataset_seed>` writes at that position.
/// `config` is a preset name (`desk-64`, `paper-table1`) or a JSON file path.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rim_scene_synthesize(
    config: *const c_char,
    dataset_seed: u64,
    index: u64,
    out: *mut *mut RimScene,
) -> RimStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let lab = LabConfig::load(str_arg(config, "config")?)?;
        lab.radar.validate()?;
        lab.ranges.validate()?;
        let mut rng = synth::scene_rng(dataset_seed, index);
        let spec = synth::sample_scene_with(&mut rng, &lab.radar, &lab.ranges);
        let sweep = synth::synthesize_scene(&lab.radar, &spec)?;
        *out = Box::into_raw(Box::new(RimScene { sweep }));
        Ok(())
    })
}

/// Number of samples in the scene; 0 for a null handle.
///
/// # Safety
/// `scene` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rim_scene_len(scene: *const RimScene) -> usize {
    scene.as_ref().map_or(0, |s| s.sweep.len())
}

/// Copies one component (a `RimComponent` value) into `out`, which must
/// hold exactly `rim_scene_len(scene)` values.
///
/// # Safety
/// `scene` must be a live handle; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn rim_scene_copy(
    scene: *const RimScene,
    component: i32,
    out: *mut RimComplex,
    len: usize,
) -> RimStatus {
    guard(|| {
        let s = &scene.as_ref().ok_or(Failure::Null("scene"))?.sweep;
        let src = match component {
            c if c == RimComponent::Mixture as i32 => &s.samples,
            c if c == RimComponent::Clean as i32 => &s.clean,
            c if c == RimComponent::Interference as i32 => &s.interference,
            c if c == RimComponent::Noise as i32 => &s.noise,
            c => return Err(Failure::Invalid(format!("unknown component {c}"))),
        };
        write_complex(out, len, src)
    })
}

/// Realized input SINR of the scene in dB. Fails with `RIM_STATUS_DATA`
/// for scenes without targets.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rim_scene_sinr_db(scene: *const RimScene, out: *mut f64) -> RimStatus {
    guard(|| {
        let s = scene.as_ref().ok_or(Failure::Null("scene"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = s.sweep.realized_sinr_db.ok_or(Failure::Core(rim_core::Error::ZeroReference))?;
        Ok(())
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rim_scene_free(scene: *mut RimScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Loads a checkpoint written by `rim train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rim_model_load(path: *const c_char, out: *mut *mut RimModel) -> RimStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = ptr::null_mut();
        let checkpoint = read_checkpoint(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(RimModel { checkpoint }));
        Ok(())
    })
}

/// Trainable real parameter count; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rim_model_parameter_count(model: *const RimModel) -> usize {
    model.as_ref().map_or(0, |m| m.checkpoint.model.count_parameters())
}

/// Runs the full mitigation pipeline (STFT, chunking, network, integration,
/// inverse STFT) on one sweep. `output` receives `len` samples.
///
/// # Safety
/// `model` must be a live handle; `input` and `output` must hold `len`
/// elements each and may alias.
#[no_mangle]
pub unsafe extern "C" fn rim_model_infer(
    model: *const RimModel,
    input: *const RimComplex,
    len: usize,
    output: *mut RimComplex,
) -> RimStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        let sweep = complex_arg(input, len, "input")?;
        if sweep.is_empty() {
            return Err(Failure::Invalid("input is empty".into()));
        }
        let echo = &m.checkpoint.training;
        let result = pipeline::run_inference(&m.checkpoint.model, &sweep, &echo.stft, &echo.split)?;
        write_complex(output, len, &result.signal)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rim_model_free(model: *mut RimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
