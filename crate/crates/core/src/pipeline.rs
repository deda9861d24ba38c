//! Chunked inference on spectrograms of any width: split into overlapping
//! `M x M` chunks, normalize each, predict, scale back, and stitch the chunk
//! interiors together so every output frame comes from exactly one chunk.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cvnn::{ComplexTensor4, Model, Real};
use crate::error::{Error, Result};
use crate::synth::SweepSignal;
use crate::tf::{self, Spectrogram, StftConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Side `M` of the square chunk; equals the STFT's fft_points.
    pub chunk_size: usize,
    /// `N_p`: frames trimmed from each inner chunk edge.
    pub overlap_points: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self::paper_table1()
    }
}

impl SplitConfig {
    pub fn paper_table1() -> Self {
        SplitConfig { chunk_size: 256, overlap_points: 4 }
    }

    pub fn desk_64() -> Self {
        SplitConfig { chunk_size: 64, overlap_points: 4 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size <= 2 * self.overlap_points {
            return Err(Error::InvalidConfig(format!(
                "chunk_size {} must exceed 2 * overlap_points {}",
                self.chunk_size, self.overlap_points
            )));
        }
        Ok(())
    }

    pub fn validate_with(&self, stft: &StftConfig) -> Result<()> {
        self.validate()?;
        if self.chunk_size != stft.fft_points {
            return Err(Error::InvalidConfig(format!(
                "chunk_size {} differs from fft_points {}",
                self.chunk_size, stft.fft_points
            )));
        }
        Ok(())
    }

    /// Distance between consecutive chunk starts, `M - 2 N_p`.
    pub fn stride(&self) -> usize {
        self.chunk_size - 2 * self.overlap_points
    }

    /// `p = floor(N / (M - 2 N_p)) + 1`, after padding `N` up to `M`.
    pub fn num_chunks(&self, frames: usize) -> usize {
        frames.max(self.chunk_size) / self.stride() + 1
    }
}

/// Where the chunks of a split came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkLayout {
    pub config: SplitConfig,
    pub maps: usize,
    /// Frequency rows (equals the chunk side).
    pub rows: usize,
    /// Frames of the original maps.
    pub frames: usize,
    /// Frames after zero padding short maps to the chunk size.
    pub padded_frames: usize,
    pub per_map: usize,
}

impl ChunkLayout {
    pub fn new(config: SplitConfig, maps: usize, rows: usize, frames: usize) -> Result<Self> {
        config.validate()?;
        if rows != config.chunk_size {
            return Err(Error::ShapeMismatch(format!("{} frequency rows for chunk size {}", rows, config.chunk_size)));
        }
        if frames == 0 {
            return Err(Error::ShapeMismatch("spectrogram has no frames".into()));
        }
        let padded_frames = frames.max(config.chunk_size);
        Ok(ChunkLayout { config, maps, rows, frames, padded_frames, per_map: config.num_chunks(frames) })
    }

    pub fn len(&self) -> usize {
        self.maps * self.per_map
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self, i: usize) -> usize {
        i * self.config.stride()
    }

    /// Frames `[lo, hi)` of the original map that chunk `i` of a map writes
    /// during integration. Empty ranges come back as `lo == hi`.
    pub fn write_range(&self, i: usize) -> (usize, usize) {
        let (m, np, n) = (self.config.chunk_size, self.config.overlap_points, self.padded_frames);
        let a = self.start(i);
        let lo = if i == 0 { 0 } else { a + np };
        let hi = if i + 1 == self.per_map { n } else { (a + m - np).min(n) };
        let lo = lo.min(self.frames);
        let hi = hi.min(self.frames).max(lo);
        (lo, hi)
    }

    /// Number of writes each original frame receives.
    pub fn write_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.frames];
        for i in 0..self.per_map {
            let (lo, hi) = self.write_range(i);
            for c in &mut counts[lo..hi] {
                *c += 1;
            }
        }
        counts
    }
}

/// Chunks `[p*L, 1, M, M]` (frequency rows by frames), stored unnormalized,
/// plus the per-chunk normalization divisors.
#[derive(Clone, Debug, PartialEq)]
pub struct ChunkBatch {
    pub chunks: ComplexTensor4<f64>,
    pub scales: Vec<f64>,
    pub layout: ChunkLayout,
    /// Metadata of the source maps, reused when integrating.
    templates: Vec<(StftConfig, usize)>,
}

pub fn split(maps: &[Spectrogram], cfg: &SplitConfig) -> Result<ChunkBatch> {
    let first = maps.first().ok_or(Error::EmptyDataset)?;
    let (rows, frames) = (first.rows(), first.cols());
    if maps.iter().any(|s| s.rows() != rows || s.cols() != frames) {
        return Err(Error::ShapeMismatch("stacked maps differ in shape".into()));
    }
    let layout = ChunkLayout::new(*cfg, maps.len(), rows, frames)?;
    let m = cfg.chunk_size;
    let mm = m * m;
    let mut chunks = ComplexTensor4::zeros([layout.len(), 1, m, m]);
    let mut scales = Vec::with_capacity(layout.len());
    for (l, map) in maps.iter().enumerate() {
        let s = map.scale;
        for i in 0..layout.per_map {
            let idx = l * layout.per_map + i;
            let a = layout.start(i);
            let valid = frames.saturating_sub(a).min(m);
            let mut max = 0.0f64;
            for r in 0..rows {
                for c in 0..valid {
                    let v = map.get(r, a + c) * s;
                    chunks.re[idx * mm + r * m + c] = v.re;
                    chunks.im[idx * mm + r * m + c] = v.im;
                    max = max.max(v.norm());
                }
            }
            scales.push(if max > 0.0 { max } else { 1.0 });
        }
    }
    let templates = maps.iter().map(|s| (s.config.clone(), s.signal_len)).collect();
    Ok(ChunkBatch { chunks, scales, layout, templates })
}

impl ChunkBatch {
    /// Chunks divided by their scales, as the network sees them.
    pub fn normalized<T: Real>(&self) -> ComplexTensor4<T> {
        let mm = self.chunk_len();
        let mut out = ComplexTensor4::zeros(self.chunks.shape());
        for (idx, s) in self.scales.iter().enumerate() {
            for j in idx * mm..(idx + 1) * mm {
                out.re[j] = T::of(self.chunks.re[j] / s);
                out.im[j] = T::of(self.chunks.im[j] / s);
            }
        }
        out
    }

    /// Same layout, chunks replaced by `pred * scale` (network output on
    /// the normalized chunks mapped back to the input scale).
    pub fn denormalized<T: Real>(&self, pred: &ComplexTensor4<T>) -> Result<ChunkBatch> {
        if pred.shape() != self.chunks.shape() {
            return Err(Error::Bookkeeping(format!(
                "prediction shape {:?} for chunks {:?}",
                pred.shape(),
                self.chunks.shape()
            )));
        }
        let mm = self.chunk_len();
        let mut chunks = ComplexTensor4::zeros(self.chunks.shape());
        for (idx, s) in self.scales.iter().enumerate() {
            for j in idx * mm..(idx + 1) * mm {
                chunks.re[j] = pred.re[j].f64() * s;
                chunks.im[j] = pred.im[j].f64() * s;
            }
        }
        Ok(ChunkBatch { chunks, scales: self.scales.clone(), layout: self.layout.clone(), templates: self.templates.clone() })
    }

    fn chunk_len(&self) -> usize {
        self.layout.rows * self.layout.config.chunk_size
    }

    /// Whether chunk `idx` writes any frame of the original map.
    pub fn contributes(&self, idx: usize) -> bool {
        let (lo, hi) = self.layout.write_range(idx % self.layout.per_map);
        hi > lo
    }
}

/// Stitches chunk interiors back into `L` maps of the original width.
pub fn integrate(batch: &ChunkBatch) -> Result<Vec<Spectrogram>> {
    let layout = &batch.layout;
    let m = layout.config.chunk_size;
    let mm = m * layout.rows;
    if batch.chunks.shape() != [layout.len(), 1, layout.rows, m]
        || batch.scales.len() != layout.len()
        || batch.templates.len() != layout.maps
    {
        return Err(Error::Bookkeeping("chunk batch does not match its layout".into()));
    }
    let mut out = Vec::with_capacity(layout.maps);
    for (l, (config, signal_len)) in batch.templates.iter().enumerate() {
        let mut data = vec![Complex64::new(0.0, 0.0); layout.rows * layout.frames];
        for i in 0..layout.per_map {
            let idx = l * layout.per_map + i;
            let a = layout.start(i);
            let (lo, hi) = layout.write_range(i);
            for r in 0..layout.rows {
                for f in lo..hi {
                    let j = idx * mm + r * m + (f - a);
                    data[r * layout.frames + f] = Complex64::new(batch.chunks.re[j], batch.chunks.im[j]);
                }
            }
        }
        out.push(Spectrogram::from_data(layout.rows, layout.frames, data, config.clone(), *signal_len)?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Inference {
    pub spectrogram: Spectrogram,
    pub signal: Vec<Complex64>,
}

/// stft -> split -> normalize -> predict -> denormalize -> integrate -> istft.
/// `predict` maps a batch of normalized chunks to network outputs; chunks
/// that write no output frame are not passed to it.
pub fn run_with<T, F>(sweep: &[Complex64], stft_cfg: &StftConfig, split_cfg: &SplitConfig, mut predict: F) -> Result<Inference>
where
    T: Real,
    F: FnMut(&ComplexTensor4<T>) -> Result<ComplexTensor4<T>>,
{
    split_cfg.validate_with(stft_cfg)?;
    let spec = tf::stft(sweep, stft_cfg)?;
    let batch = split(std::slice::from_ref(&spec), split_cfg)?;
    let normalized = batch.normalized::<T>();
    let used: Vec<usize> = (0..batch.layout.len()).filter(|&i| batch.contributes(i)).collect();
    let [_, c, h, w] = normalized.shape();
    let n = c * h * w;
    let mut sub = ComplexTensor4::zeros([used.len(), c, h, w]);
    for (k, &i) in used.iter().enumerate() {
        sub.re[k * n..(k + 1) * n].copy_from_slice(&normalized.re[i * n..(i + 1) * n]);
        sub.im[k * n..(k + 1) * n].copy_from_slice(&normalized.im[i * n..(i + 1) * n]);
    }
    let pred = predict(&sub)?;
    if pred.shape() != sub.shape() {
        return Err(Error::ShapeMismatch(format!("predictor returned {:?} for {:?}", pred.shape(), sub.shape())));
    }
    let mut full = ComplexTensor4::zeros(normalized.shape());
    for (k, &i) in used.iter().enumerate() {
        full.re[i * n..(i + 1) * n].copy_from_slice(&pred.re[k * n..(k + 1) * n]);
        full.im[i * n..(i + 1) * n].copy_from_slice(&pred.im[k * n..(k + 1) * n]);
    }
    let recovered = integrate(&batch.denormalized(&full)?)?.remove(0);
    let signal = tf::istft(&recovered)?;
    Ok(Inference { spectrogram: recovered, signal })
}

pub fn run_inference<T: Real>(
    model: &Model<T>,
    sweep: &[Complex64],
    stft_cfg: &StftConfig,
    split_cfg: &SplitConfig,
) -> Result<Inference> {
    run_with(sweep, stft_cfg, split_cfg, |x| model.forward(x))
}

/// One normalized `(input, label)` chunk pair, both `[1, 1, M, M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    pub scene: usize,
    pub chunk: usize,
    pub input: ComplexTensor4<f32>,
    pub label: ComplexTensor4<f32>,
    /// Input chunk's normalization divisor, shared by the label.
    pub scale: f64,
}

impl TrainingPair {
    pub fn input_is_zero(&self) -> bool {
        self.input.re.iter().chain(&self.input.im).all(|v| *v == 0.0)
    }
}

/// Input chunks from STFT(y), label chunks from STFT(s) with the same
/// geometry, both divided by the input chunk's scale; shuffled by `rng`.
pub fn make_training_pairs<R: Rng + ?Sized>(
    dataset: &[SweepSignal],
    stft_cfg: &StftConfig,
    split_cfg: &SplitConfig,
    rng: &mut R,
) -> Result<Vec<TrainingPair>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    split_cfg.validate_with(stft_cfg)?;
    let mut pairs = Vec::new();
    for (scene, sweep) in dataset.iter().enumerate() {
        let input = split(&[tf::stft(&sweep.samples, stft_cfg)?], split_cfg)?;
        let label = split(&[tf::stft(&sweep.clean, stft_cfg)?], split_cfg)?;
        let mm = input.chunk_len();
        let [_, c, h, w] = input.chunks.shape();
        for (chunk, &s) in input.scales.iter().enumerate() {
            let part = |t: &ComplexTensor4<f64>| {
                let re = t.re[chunk * mm..(chunk + 1) * mm].iter().map(|v| (v / s) as f32).collect();
                let im = t.im[chunk * mm..(chunk + 1) * mm].iter().map(|v| (v / s) as f32).collect();
                ComplexTensor4::from_parts([1, c, h, w], re, im)
            };
            pairs.push(TrainingPair { scene, chunk, input: part(&input.chunks)?, label: part(&label.chunks)?, scale: s });
        }
    }
    pairs.shuffle(rng);
    Ok(pairs)
}
