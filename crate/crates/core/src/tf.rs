//! Short-time Fourier transform, its least-squares inverse, and the
//! max-magnitude normalization applied to network inputs.
//!
//! Spectrograms are stored frequency-major: `rows = fft_points` bins in
//! fft-shifted order (row 0 is the most negative frequency, DC sits at row
//! `fft_points / 2`) and one column per time frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hamming,
    Hann,
    Rect,
}

impl WindowKind {
    /// Symmetric window of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        if len == 1 {
            return vec![1.0];
        }
        let denom = (len - 1) as f64;
        (0..len)
            .map(|n| {
                let c = (2.0 * PI * n as f64 / denom).cos();
                match self {
                    WindowKind::Hamming => 0.54 - 0.46 * c,
                    WindowKind::Hann => 0.5 - 0.5 * c,
                    WindowKind::Rect => 1.0,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub window: WindowKind,
    pub window_length: usize,
    pub hop: usize,
    pub fft_points: usize,
}

impl StftConfig {
    /// 256-point Hamming window, hop 1, 256-point FFT.
    pub fn paper_table1() -> Self {
        StftConfig { window: WindowKind::Hamming, window_length: 256, hop: 1, fft_points: 256 }
    }

    /// 64-point Hamming window, hop 4, 64-point FFT.
    pub fn desk_64() -> Self {
        StftConfig { window: WindowKind::Hamming, window_length: 64, hop: 4, fft_points: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 || self.hop == 0 || self.fft_points == 0 {
            return Err(Error::InvalidConfig("STFT sizes must be positive".into()));
        }
        if self.window_length > self.fft_points {
            return Err(Error::InvalidConfig(format!(
                "window length {} exceeds fft points {}",
                self.window_length, self.fft_points
            )));
        }
        if self.hop > self.window_length {
            return Err(Error::InvalidConfig(format!(
                "hop {} exceeds window length {}",
                self.hop, self.window_length
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> Vec<f64> {
        self.window.coefficients(self.window_length)
    }

    /// Frame count for a signal of `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.window_length {
            0
        } else {
            (len - self.window_length) / self.hop + 1
        }
    }
}

/// Complex time-frequency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    rows: usize,
    cols: usize,
    /// Row-major, `rows x cols`.
    data: Vec<Complex64>,
    pub config: StftConfig,
    /// Divisor applied by [`normalize`]; 1.0 when unnormalized.
    pub scale: f64,
    /// Rows are fft-shifted (negative frequencies on top).
    pub shifted: bool,
    /// Length of the time signal the frames were taken from.
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn from_data(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
        config: StftConfig,
        signal_len: usize,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} values for {}x{}", data.len(), rows, cols)));
        }
        if rows != config.fft_points {
            return Err(Error::ShapeMismatch(format!("{rows} rows for {} fft points", config.fft_points)));
        }
        Ok(Spectrogram { rows, cols, data, config, scale: 1.0, shifted: true, signal_len })
    }

    pub fn zeros(config: StftConfig, cols: usize, signal_len: usize) -> Self {
        let rows = config.fft_points;
        Spectrogram {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
            config,
            scale: 1.0,
            shifted: true,
            signal_len,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.cols + col] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Shifted row index holding frequency `f` (nearest bin) at sampling rate `fs`.
    pub fn row_of_frequency(&self, f: f64, fs: f64) -> usize {
        let n = self.rows as f64;
        let k = (f * n / fs).round() as isize;
        let bin = k.rem_euclid(self.rows as isize) as usize;
        fft::shifted_index(bin, self.rows)
    }
}

/// Windowed DFT of every frame; column `n` starts at sample `n * hop`.
pub fn stft(signal: &[Complex64], config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    if signal.len() < config.window_length {
        return Err(Error::SignalTooShort { len: signal.len(), window: config.window_length });
    }
    let window = config.window();
    let rows = config.fft_points;
    let cols = config.num_frames(signal.len());
    let plan = fft::plan_forward(rows);
    let mut spec = Spectrogram::zeros(config.clone(), cols, signal.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); rows];
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for col in 0..cols {
        let start = col * config.hop;
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (i, w) in window.iter().enumerate() {
            buf[i] = signal[start + i] * *w;
        }
        plan.process_with_scratch(&mut buf, &mut scratch);
        for (bin, v) in buf.iter().enumerate() {
            spec.data[fft::shifted_index(bin, rows) * cols + col] = *v;
        }
    }
    Ok(spec)
}

/// Overlap-add denominator `sum_m w^2[n - m*hop]` over the covered samples.
fn ola_denominator(config: &StftConfig, cols: usize, len: usize) -> Vec<f64> {
    let window = config.window();
    let mut den = vec![0.0; len];
    for col in 0..cols {
        let start = col * config.hop;
        for (i, w) in window.iter().enumerate() {
            if start + i < len {
                den[start + i] += w * w;
            }
        }
    }
    den
}

/// Least-squares weighted overlap-add inverse of [`stft`].
///
/// Each frame's inverse DFT is weighted by the analysis window and the sum is
/// divided by `sum w^2`. Samples whose denominator vanishes (window zeros at
/// the outer edges, or the uncovered tail) come back as zero; a vanishing
/// denominator further than one window from either edge is an error.
pub fn istft(spec: &Spectrogram) -> Result<Vec<Complex64>> {
    let config = &spec.config;
    config.validate()?;
    let rows = spec.rows;
    let cols = spec.cols;
    let len = spec.signal_len.max(if cols == 0 { 0 } else { (cols - 1) * config.hop + config.window_length });
    let den = ola_denominator(config, cols, len);
    let covered = if cols == 0 { 0 } else { (cols - 1) * config.hop + config.window_length };
    let wl = config.window_length;
    for (n, d) in den.iter().enumerate().take(covered.saturating_sub(wl)).skip(wl) {
        if *d <= 1e-12 {
            return Err(Error::ColaViolated(n));
        }
    }

    let window = config.window();
    let plan = fft::plan_inverse(rows);
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); rows];
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let inv_n = 1.0 / rows as f64;
    for col in 0..cols {
        for (row, v) in buf.iter_mut().enumerate() {
            let stored = if spec.shifted { fft::shifted_index(row, rows) } else { row };
            *v = spec.data[stored * cols + col] * spec.scale;
        }
        plan.process_with_scratch(&mut buf, &mut scratch);
        let start = col * config.hop;
        for (i, w) in window.iter().enumerate() {
            out[start + i] += buf[i] * (w * inv_n);
        }
    }
    for (o, d) in out.iter_mut().zip(&den) {
        if *d > 1e-12 {
            *o /= *d;
        } else {
            *o = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

/// Divides by the largest entry magnitude and records it in `scale`.
pub fn normalize(spec: &Spectrogram) -> Result<Spectrogram> {
    let max = spec.max_abs();
    if max <= 0.0 {
        return Err(Error::AllZeroSpectrogram);
    }
    let mut out = spec.clone();
    for v in out.data.iter_mut() {
        *v /= max;
    }
    out.scale = spec.scale * max;
    Ok(out)
}

/// Multiplies back by `scale` and resets it to 1.
pub fn denormalize(spec: &Spectrogram) -> Spectrogram {
    let mut out = spec.clone();
    let s = spec.scale;
    for v in out.data.iter_mut() {
        *v *= s;
    }
    out.scale = 1.0;
    out
}

pub const RANGE_PROFILE_FLOOR_DB: f64 = -200.0;

/// Hamming-windowed, fft-shifted magnitude spectrum in dB, floored at -200 dB.
pub fn range_profile(signal: &[Complex64]) -> Vec<f64> {
    let window = WindowKind::Hamming.coefficients(signal.len().max(1));
    let mut buf: Vec<Complex64> = signal.iter().zip(&window).map(|(x, w)| x * *w).collect();
    fft::forward(&mut buf);
    fft::fftshift(&buf)
        .iter()
        .map(|v| {
            let mag = v.norm();
            if mag > 0.0 {
                (20.0 * mag.log10()).max(RANGE_PROFILE_FLOOR_DB)
            } else {
                RANGE_PROFILE_FLOOR_DB
            }
        })
        .collect()
}
