//! The `rim` command line tool.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::cvnn::ArchitectureSpec;
use crate::error::{Error, Result};
use crate::eval::{self, CfarConfig, EvalReport, SinrBins};
use crate::io::{self, render, Checkpoint, LabConfig, Record, TrainingEcho};
use crate::pipeline;
use crate::synth;
use crate::tf;
use crate::train::{self, TrainConfig};

#[derive(Parser, Debug)]
#[command(name = "rim", version, about = "FMCW radar interference mitigation lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample scenes and write a dataset.
    Synth {
        /// Preset name (desk-64, paper-table1) or JSON config path.
        #[arg(long, default_value = "desk-64")]
        config: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; the per-epoch loss goes to `<out>.loss.csv`.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "desk-64")]
        config: String,
        #[arg(long, default_value_t = 400.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        /// MODE:DEPTHxFILTERS[:kK][:residual], e.g. complex:10x16.
        #[arg(long, default_value = "complex:10x16")]
        arch: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a model over a dataset; the clean slot of the output holds the
    /// recovered signal.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score methods by SINR and write a CSV report.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "identity")]
        methods: Vec<Method>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 16)]
        cfar_training: usize,
        #[arg(long, default_value_t = 2)]
        cfar_guard: usize,
        #[arg(long, default_value_t = 3.0)]
        cfar_scale: f64,
    },
    /// Draw one record as a PGM spectrogram or a range-profile CSV.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value = "spectrogram")]
        what: RenderKind,
        #[arg(long, value_enum, default_value = "y")]
        signal: SignalSlot,
        /// STFT settings for spectrograms.
        #[arg(long, default_value = "desk-64")]
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Model,
    Identity,
    Zero,
    OracleZero,
    CfarZero,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Model => "model",
            Method::Identity => "identity",
            Method::Zero => "zero",
            Method::OracleZero => "oracle-zero",
            Method::CfarZero => "cfar-zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RenderKind {
    Spectrogram,
    RangeProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignalSlot {
    /// Interfered samples.
    Y,
    /// Clean reference.
    S,
    /// Interference.
    F,
    /// Noise.
    N,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `model.rimm` -> `model.loss.csv`.
pub fn loss_csv_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("loss.csv")
}

fn synth_cmd(config: &str, count: usize, seed: u64, out: &Path) -> Result<()> {
    let cfg = LabConfig::load(config)?;
    let sweeps = synth::generate_dataset(&cfg.radar, &cfg.ranges, count, seed)?;
    let bins = SinrBins::default();
    let mut sinr_hist = vec![0usize; bins.count()];
    let (mut no_target, mut snr_sum) = (0usize, 0.0);
    for s in &sweeps {
        match (s.realized_sinr_db, s.realized_snr_db) {
            (Some(sinr), Some(snr)) => {
                sinr_hist[bins.index(sinr)] += 1;
                snr_sum += snr;
            }
            _ => no_target += 1,
        }
    }
    let records: Vec<Record> = sweeps.into_iter().map(|sweep| Record { radar: cfg.radar.clone(), sweep }).collect();
    io::write_dataset(out, &records)?;
    let scored = count - no_target;
    println!("wrote {} scenes to {}", count, out.display());
    println!("scenes without targets: {no_target}");
    if scored > 0 {
        println!("mean realized SNR: {:.2} dB", snr_sum / scored as f64);
    }
    println!("realized SINR histogram:");
    for (i, n) in sinr_hist.iter().enumerate() {
        let (lo, hi) = bins.edges(i);
        println!("  [{lo:>5.0}, {hi:>5.0}) dB: {n}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn train_cmd(
    data: &Path,
    config: &str,
    lambda: f64,
    epochs: usize,
    lr: f64,
    batch: usize,
    arch: &str,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let lab = LabConfig::load(config)?;
    let arch: ArchitectureSpec = arch.parse()?;
    arch.validate()?;
    let sweeps: Vec<_> = io::read_dataset(data)?.into_iter().map(|r| r.sweep).collect();
    if sweeps.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cfg = TrainConfig { lambda, epochs, learning_rate: lr, batch_size: batch, seed, lambda_scale: None };
    let mut csv = create(&loss_csv_path(out))?;
    writeln!(csv, "epoch,loss,squared_error,l21")?;
    let mut write_err = None;
    let (model, _) = train::fit(&sweeps, &arch, &cfg, &lab.stft, &lab.split, |s| {
        if let Err(e) = writeln!(csv, "{},{},{},{}", s.epoch, s.loss, s.squared_error, s.l21) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    csv.flush()?;
    let ckpt = Checkpoint { model, training: TrainingEcho { train: cfg, stft: lab.stft, split: lab.split } };
    io::write_checkpoint(out, &ckpt)?;
    println!("wrote {} ({} parameters)", out.display(), ckpt.model.count_parameters());
    Ok(())
}

fn recover(ckpt: &Checkpoint, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let t = &ckpt.training;
    Ok(pipeline::run_inference(&ckpt.model, samples, &t.stft, &t.split)?.signal)
}

fn infer_cmd(model: &Path, input: &Path, out: &Path) -> Result<()> {
    let ckpt = io::read_checkpoint(model)?;
    let mut records = io::read_dataset(input)?;
    for r in &mut records {
        r.sweep.clean = recover(&ckpt, &r.sweep.samples)?;
    }
    io::write_dataset(out, &records)?;
    println!("wrote {} recovered records to {}", records.len(), out.display());
    Ok(())
}

/// Scores `methods` over `records`; rows are grouped by method in the given order.
pub fn evaluate(records: &[Record], methods: &[Method], model: Option<&Checkpoint>, cfar: &CfarConfig) -> Result<EvalReport> {
    let sweeps: Vec<_> = records.iter().map(|r| r.sweep.clone()).collect();
    let bins = SinrBins::default();
    let mut report = EvalReport::default();
    for &m in methods {
        let part = match m {
            Method::Model => {
                let ckpt = model.ok_or_else(|| Error::InvalidConfig("method `model` needs --model".into()))?;
                eval::evaluate_method(m.name(), &sweeps, &bins, |_, s| recover(ckpt, &s.samples))?
            }
            Method::Identity => eval::evaluate_method(m.name(), &sweeps, &bins, |_, s| Ok(s.samples.clone()))?,
            Method::Zero => {
                eval::evaluate_method(m.name(), &sweeps, &bins, |_, s| Ok(vec![Complex64::new(0.0, 0.0); s.len()]))?
            }
            Method::OracleZero => eval::evaluate_method(m.name(), &sweeps, &bins, |i, s| {
                Ok(eval::zero_and_score(s, &eval::oracle_mask(&records[i].radar, s))?.0)
            })?,
            Method::CfarZero => eval::evaluate_method(m.name(), &sweeps, &bins, |_, s| {
                Ok(eval::zero_and_score(s, &eval::cfar_detect(&s.samples, cfar)?)?.0)
            })?,
        };
        report.extend(part);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn eval_cmd(
    model: Option<&Path>,
    data: &Path,
    methods: &[Method],
    report_path: &Path,
    cfar: CfarConfig,
) -> Result<()> {
    cfar.validate()?;
    let ckpt = model.map(io::read_checkpoint).transpose()?;
    let records = io::read_dataset(data)?;
    let report = evaluate(&records, methods, ckpt.as_ref(), &cfar)?;
    let mut w = create(report_path)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    for b in &report.bins {
        println!(
            "{:<12} [{:>5.0}, {:>5.0}) n={:<4} input {:>8.2} dB  output {:>8.2} dB",
            b.method, b.lo_db, b.hi_db, b.count, b.mean_input_db, b.mean_output_db
        );
    }
    Ok(())
}

fn render_cmd(input: &Path, index: usize, what: RenderKind, slot: SignalSlot, config: &str, out: &Path) -> Result<()> {
    let records = io::read_dataset(input)?;
    let len = records.len();
    let r = records.get(index).ok_or(Error::IndexOutOfRange { index, len })?;
    let s = &r.sweep;
    let signal = match slot {
        SignalSlot::Y => &s.samples,
        SignalSlot::S => &s.clean,
        SignalSlot::F => &s.interference,
        SignalSlot::N => &s.noise,
    };
    let mut w = create(out)?;
    match what {
        RenderKind::Spectrogram => {
            let lab = LabConfig::load(config)?;
            render::render_spectrogram(&mut w, &tf::stft(signal, &lab.stft)?)?;
        }
        RenderKind::RangeProfile => {
            render::write_range_profile_csv(&mut w, &tf::range_profile(signal), r.radar.sampling_frequency_hz)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { config, count, seed, out } => synth_cmd(&config, count, seed, &out),
        Command::Train { data, config, lambda, epochs, lr, batch, arch, seed, out } => {
            train_cmd(&data, &config, lambda, epochs, lr, batch, &arch, seed, &out)
        }
        Command::Infer { model, input, out } => infer_cmd(&model, &input, &out),
        Command::Eval { model, data, methods, report, cfar_training, cfar_guard, cfar_scale } => eval_cmd(
            model.as_deref(),
            &data,
            &methods,
            &report,
            CfarConfig { training_cells: cfar_training, guard_cells: cfar_guard, scale_factor: cfar_scale },
        ),
        Command::Render { input, index, what, signal, config, out } => {
            render_cmd(&input, index, what, signal, &config, &out)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success, 2 usage or config error, 3 data error, 4 numeric failure.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
