//! Synthetic dechirped FMCW beat signals.
//!
//! A sweep is modelled as `y = s + f + n`: the useful beat tones of point
//! targets, the low-pass filtered product of the dechirp reference with each
//! interfering chirp, and complex white Gaussian noise. Interference and noise
//! are scaled so that the sweep hits a requested SNR and SINR.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

fn default_noise_floor() -> f64 {
    1.0
}

/// Victim radar parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub center_frequency_hz: f64,
    pub sweep_duration_s: f64,
    pub bandwidth_hz: f64,
    pub chirp_rate_hz_per_s: f64,
    pub sampling_frequency_hz: f64,
    /// Dechirp low-pass cutoff. `None` means half the sampling rate.
    #[serde(default)]
    pub lpf_cutoff_hz: Option<f64>,
    /// Largest sampled target range. `None` derives it from the cutoff.
    #[serde(default)]
    pub max_distance_m: Option<f64>,
    /// Absolute noise power used for scenes without targets.
    #[serde(default = "default_noise_floor")]
    pub noise_floor_power: f64,
}

impl RadarConfig {
    /// 3 GHz, 400 us, 40 MHz sweep sampled at 12 MHz (4800 samples per sweep).
    pub fn paper_table1() -> Self {
        RadarConfig {
            center_frequency_hz: 3.0e9,
            sweep_duration_s: 400e-6,
            bandwidth_hz: 40e6,
            chirp_rate_hz_per_s: 1e11,
            sampling_frequency_hz: 12e6,
            lpf_cutoff_hz: None,
            max_distance_m: Some(8000.0),
            noise_floor_power: default_noise_floor(),
        }
    }

    /// Desk-scale profile: 64 us sweep at 4 MHz (256 samples), same chirp rate.
    pub fn desk_64() -> Self {
        RadarConfig {
            center_frequency_hz: 3.0e9,
            sweep_duration_s: 64e-6,
            bandwidth_hz: 6.4e6,
            chirp_rate_hz_per_s: 1e11,
            sampling_frequency_hz: 4e6,
            lpf_cutoff_hz: None,
            max_distance_m: None,
            noise_floor_power: default_noise_floor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("center_frequency_hz", self.center_frequency_hz),
            ("sweep_duration_s", self.sweep_duration_s),
            ("bandwidth_hz", self.bandwidth_hz),
            ("chirp_rate_hz_per_s", self.chirp_rate_hz_per_s),
            ("sampling_frequency_hz", self.sampling_frequency_hz),
            ("noise_floor_power", self.noise_floor_power),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        let k = self.bandwidth_hz / self.sweep_duration_s;
        if ((self.chirp_rate_hz_per_s - k) / k).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "chirp rate {} inconsistent with bandwidth/sweep duration {}",
                self.chirp_rate_hz_per_s, k
            )));
        }
        if let Some(fc) = self.lpf_cutoff_hz {
            if !(fc.is_finite() && fc > 0.0) {
                return Err(Error::InvalidConfig(format!("lpf_cutoff_hz must be positive, got {fc}")));
            }
        }
        if let Some(d) = self.max_distance_m {
            if !(d.is_finite() && d > 8.0) {
                return Err(Error::InvalidConfig(format!("max_distance_m must exceed 8 m, got {d}")));
            }
        }
        if self.num_samples() == 0 {
            return Err(Error::InvalidConfig("sweep has no samples".into()));
        }
        Ok(())
    }

    /// Samples per sweep, `round(T_sw * f_s)`.
    pub fn num_samples(&self) -> usize {
        (self.sweep_duration_s * self.sampling_frequency_hz).round() as usize
    }

    pub fn lpf_cutoff(&self) -> f64 {
        self.lpf_cutoff_hz.unwrap_or(self.sampling_frequency_hz / 2.0)
    }

    /// Range whose beat frequency sits at the low-pass cutoff, unless set explicitly.
    pub fn max_distance(&self) -> f64 {
        self.max_distance_m
            .unwrap_or(SPEED_OF_LIGHT * self.lpf_cutoff() / (2.0 * self.chirp_rate_hz_per_s))
    }

    fn sample_time(&self, n: usize) -> f64 {
        n as f64 / self.sampling_frequency_hz
    }
}

/// A point scatterer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetParams {
    pub distance_m: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub velocity_m_per_s: f64,
}

impl TargetParams {
    fn validate(&self) -> Result<()> {
        if !(self.distance_m.is_finite() && self.distance_m > 0.0) {
            return Err(Error::InvalidConfig(format!("target distance must be positive, got {}", self.distance_m)));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidConfig(format!("target amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !self.phase_rad.is_finite() || !self.velocity_m_per_s.is_finite() {
            return Err(Error::InvalidConfig("target phase/velocity must be finite".into()));
        }
        Ok(())
    }

    /// Round-trip delay at the start of the sweep.
    pub fn delay_s(&self) -> f64 {
        2.0 * self.distance_m / SPEED_OF_LIGHT
    }
}

/// An aggressor chirp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceParams {
    pub amplitude: f64,
    pub chirp_rate_hz_per_s: f64,
    pub duration_s: f64,
    /// Start time relative to the victim sweep; may be negative.
    pub delay_s: f64,
    pub center_frequency_hz: f64,
}

impl InterferenceParams {
    fn validate(&self, config: &RadarConfig) -> Result<()> {
        let k = config.chirp_rate_hz_per_s;
        if !(self.duration_s > 0.0 && self.duration_s <= config.sweep_duration_s * (1.0 + 1e-12)) {
            return Err(Error::InvalidConfig(format!(
                "interference duration must lie in (0, T_sw], got {}",
                self.duration_s
            )));
        }
        if !(self.chirp_rate_hz_per_s > -2.0 * k && self.chirp_rate_hz_per_s < 2.0 * k) {
            return Err(Error::InvalidConfig(format!(
                "interference chirp rate {} outside (-2K, 2K)",
                self.chirp_rate_hz_per_s
            )));
        }
        if self.chirp_rate_hz_per_s == k {
            return Err(Error::InvalidConfig("same-slope interference is not modelled".into()));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0)
            || !self.delay_s.is_finite()
            || !self.center_frequency_hz.is_finite()
        {
            return Err(Error::InvalidConfig("interference parameters must be finite".into()));
        }
        Ok(())
    }

    /// Dechirped phase (cycles) and instantaneous frequency (Hz) at time `t`.
    fn dechirped(&self, config: &RadarConfig, t: f64) -> (f64, f64) {
        let u = t - self.delay_s;
        let df = self.center_frequency_hz - config.center_frequency_hz;
        let k = config.chirp_rate_hz_per_s;
        let km = self.chirp_rate_hz_per_s;
        // The f_c * t terms of victim and aggressor cancel up to -f_c * t_delay.
        let phase = df * u - config.center_frequency_hz * self.delay_s + 0.5 * km * u * u - 0.5 * k * t * t;
        let freq = df + km * u - k * t;
        (phase, freq)
    }

    fn active(&self, t: f64) -> bool {
        t >= self.delay_s && t < self.delay_s + self.duration_s
    }
}

/// Bounds of the random scene generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneRanges {
    pub max_targets: usize,
    pub min_interferers: usize,
    pub max_interferers: usize,
    pub max_target_amplitude: f64,
    pub max_velocity_km_per_h: f64,
    pub max_interference_amplitude: f64,
    pub snr_db_min: i32,
    pub snr_db_max: i32,
    pub snr_db_step: i32,
    pub sinr_db_min: f64,
    pub sinr_db_max: f64,
}

impl Default for SceneRanges {
    fn default() -> Self {
        SceneRanges {
            max_targets: 20,
            min_interferers: 1,
            max_interferers: 20,
            max_target_amplitude: 3.0,
            max_velocity_km_per_h: 80.0,
            max_interference_amplitude: 3.0,
            snr_db_min: -20,
            snr_db_max: 20,
            snr_db_step: 5,
            sinr_db_min: -40.0,
            sinr_db_max: 20.0,
        }
    }
}

impl SceneRanges {
    pub fn validate(&self) -> Result<()> {
        if self.min_interferers > self.max_interferers
            || self.snr_db_step <= 0
            || self.snr_db_min > self.snr_db_max
            || self.sinr_db_min > self.sinr_db_max
            || !(self.max_target_amplitude > 0.0 && self.max_interference_amplitude > 0.0)
            || self.max_velocity_km_per_h < 0.0
        {
            return Err(Error::InvalidConfig("inconsistent scene ranges".into()));
        }
        Ok(())
    }
}

/// Everything needed to rebuild one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub targets: Vec<TargetParams>,
    pub interferers: Vec<InterferenceParams>,
    pub snr_db: f64,
    pub sinr_db: f64,
    pub seed: u64,
}

/// Output of [`calibrate_and_mix`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    pub samples: Vec<Complex64>,
    pub clean: Vec<Complex64>,
    pub interference: Vec<Complex64>,
    pub noise: Vec<Complex64>,
    pub realized_snr_db: Option<f64>,
    pub realized_sinr_db: Option<f64>,
}

impl Mixture {
    pub fn into_sweep(self, spec: SceneSpec) -> SweepSignal {
        SweepSignal {
            samples: self.samples,
            clean: self.clean,
            interference: self.interference,
            noise: self.noise,
            spec,
            realized_snr_db: self.realized_snr_db,
            realized_sinr_db: self.realized_sinr_db,
        }
    }
}

/// One sweep with its components kept apart; `samples == clean + interference + noise`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSignal {
    pub samples: Vec<Complex64>,
    pub clean: Vec<Complex64>,
    pub interference: Vec<Complex64>,
    pub noise: Vec<Complex64>,
    pub spec: SceneSpec,
    /// `None` for scenes without targets.
    pub realized_snr_db: Option<f64>,
    pub realized_sinr_db: Option<f64>,
}

impl SweepSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn cis(cycles: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * cycles.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}

/// Sum of target beat tones on the sample grid, with range drifting at the target velocity.
pub fn synthesize_clean(config: &RadarConfig, targets: &[TargetParams]) -> Result<Vec<Complex64>> {
    config.validate()?;
    for t in targets {
        t.validate()?;
    }
    let n = config.num_samples();
    let fc = config.center_frequency_hz;
    let k = config.chirp_rate_hz_per_s;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for target in targets {
        let a = Complex64::from_polar(target.amplitude, target.phase_rad);
        for (i, o) in out.iter_mut().enumerate() {
            let t = config.sample_time(i);
            let tau = 2.0 * (target.distance_m + target.velocity_m_per_s * t) / SPEED_OF_LIGHT;
            let phase = -fc * tau - k * tau * t + 0.5 * k * tau * tau;
            *o += a * cis(phase);
        }
    }
    Ok(out)
}

/// Samples where the dechirped aggressor is on and inside the low-pass band.
pub fn interference_support(config: &RadarConfig, interferer: &InterferenceParams) -> Vec<bool> {
    let cutoff = config.lpf_cutoff();
    (0..config.num_samples())
        .map(|i| {
            let t = config.sample_time(i);
            interferer.active(t) && interferer.dechirped(config, t).1.abs() <= cutoff
        })
        .collect()
}

/// Union of the supports of every interferer in the scene.
pub fn scene_interference_support(config: &RadarConfig, scene: &SceneSpec) -> Vec<bool> {
    let mut mask = vec![false; config.num_samples()];
    for intf in &scene.interferers {
        for (m, s) in mask.iter_mut().zip(interference_support(config, intf)) {
            *m |= s;
        }
    }
    mask
}

/// Dechirped and low-pass filtered aggressor chirp.
///
/// The aggressor is gated to the samples whose dechirped instantaneous
/// frequency lies within the cutoff (this is where the analog filter passes
/// it and prevents aliasing), then every DFT bin above the cutoff is zeroed.
/// With the default cutoff of `f_s / 2` the mask is a no-op.
pub fn synthesize_interference(config: &RadarConfig, interferer: &InterferenceParams) -> Result<Vec<Complex64>> {
    config.validate()?;
    interferer.validate(config)?;
    let cutoff = config.lpf_cutoff();
    let n = config.num_samples();
    let mut out: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = config.sample_time(i);
            if !interferer.active(t) {
                return Complex64::new(0.0, 0.0);
            }
            let (phase, freq) = interferer.dechirped(config, t);
            if freq.abs() <= cutoff {
                interferer.amplitude * cis(phase)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    if cutoff < config.sampling_frequency_hz / 2.0 {
        fft::forward(&mut out);
        let fs = config.sampling_frequency_hz;
        for (bin, v) in out.iter_mut().enumerate() {
            if fft::bin_frequency(bin, n, fs).abs() > cutoff {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        fft::inverse(&mut out);
    }
    Ok(out)
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

fn ratio_db(num: f64, den: f64) -> f64 {
    10.0 * (num / den).log10()
}

fn white_noise<R: RngCore + ?Sized>(rng: &mut R, len: usize, power: f64) -> Vec<Complex64> {
    let sd = (power / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sd * re, sd * im)
        })
        .collect()
}

fn sum_interference(len: usize, interferences: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let mut total = vec![Complex64::new(0.0, 0.0); len];
    for f in interferences {
        if f.len() != len {
            return Err(Error::ShapeMismatch(format!("interference length {} vs clean {}", f.len(), len)));
        }
        for (t, v) in total.iter_mut().zip(f) {
            *t += v;
        }
    }
    Ok(total)
}

fn assemble(clean: Vec<Complex64>, interference: Vec<Complex64>, noise: Vec<Complex64>) -> Mixture {
    let samples = clean
        .iter()
        .zip(&interference)
        .zip(&noise)
        .map(|((s, f), n)| s + f + n)
        .collect();
    Mixture { samples, clean, interference, noise, realized_snr_db: None, realized_sinr_db: None }
}

/// Adds noise at the requested SNR and rescales the summed interference so the
/// sweep reaches the requested SINR.
///
/// Noise power is `P_s / 10^(snr/10)`. The interference gets one real gain so
/// that `P_s / (P_i + P_n) = 10^(sinr/10)`; when the noise alone already exceeds
/// that budget the gain is zero and the realized SINR is whatever remains.
pub fn calibrate_and_mix<R: RngCore + ?Sized>(
    clean: &[Complex64],
    interferences: &[Vec<Complex64>],
    snr_db: f64,
    sinr_db: f64,
    rng: &mut R,
) -> Result<Mixture> {
    let ps = mean_power(clean);
    if ps <= 0.0 {
        return Err(Error::DegenerateScene("clean signal is all zero; SNR/SINR scaling undefined".into()));
    }
    if !snr_db.is_finite() || !sinr_db.is_finite() {
        return Err(Error::InvalidConfig("snr/sinr must be finite".into()));
    }
    let len = clean.len();
    let pn = ps / 10f64.powf(snr_db / 10.0);
    let noise = white_noise(rng, len, pn);

    let mut interference = sum_interference(len, interferences)?;
    let pi_raw = mean_power(&interference);
    let budget = ps / 10f64.powf(sinr_db / 10.0) - pn;
    let gain = if pi_raw > 0.0 && budget > 0.0 { (budget / pi_raw).sqrt() } else { 0.0 };
    for v in interference.iter_mut() {
        *v *= gain;
    }

    let mut mix = assemble(clean.to_vec(), interference, noise);
    let err: Vec<Complex64> = mix.interference.iter().zip(&mix.noise).map(|(f, n)| f + n).collect();
    mix.realized_snr_db = Some(ratio_db(ps, mean_power(&mix.noise)));
    mix.realized_sinr_db = Some(ratio_db(ps, mean_power(&err)));
    Ok(mix)
}

/// Mixing for scenes without a useful signal: interference is left at its
/// sampled amplitude and noise sits at an absolute floor.
pub fn mix_with_noise_floor<R: RngCore + ?Sized>(
    clean: &[Complex64],
    interferences: &[Vec<Complex64>],
    noise_power: f64,
    rng: &mut R,
) -> Result<Mixture> {
    let len = clean.len();
    let noise = white_noise(rng, len, noise_power);
    let interference = sum_interference(len, interferences)?;
    Ok(assemble(clean.to_vec(), interference, noise))
}

/// Generator used for the noise of a scene. Stream 1 keeps it apart from the
/// stream that sampled the scene parameters.
pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Generator for scene `index` of a dataset.
pub fn scene_rng(dataset_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(dataset_seed ^ index)
}

/// Builds the sweep described by `scene`. Pure in `(config, scene)`.
pub fn synthesize_scene(config: &RadarConfig, scene: &SceneSpec) -> Result<SweepSignal> {
    let clean = synthesize_clean(config, &scene.targets)?;
    let interferences = scene
        .interferers
        .iter()
        .map(|i| synthesize_interference(config, i))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = noise_rng(scene.seed);
    let mix = if mean_power(&clean) > 0.0 {
        calibrate_and_mix(&clean, &interferences, scene.snr_db, scene.sinr_db, &mut rng)?
    } else {
        mix_with_noise_floor(&clean, &interferences, config.noise_floor_power, &mut rng)?
    };
    Ok(mix.into_sweep(scene.clone()))
}

/// Draws a scene with the default generator bounds.
pub fn sample_scene<R: RngCore + ?Sized>(rng: &mut R, config: &RadarConfig) -> SceneSpec {
    sample_scene_with(rng, config, &SceneRanges::default())
}

fn open_uniform<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

pub fn sample_scene_with<R: RngCore + ?Sized>(rng: &mut R, config: &RadarConfig, ranges: &SceneRanges) -> SceneSpec {
    let k = config.chirp_rate_hz_per_s;
    let tsw = config.sweep_duration_s;
    let d_max = config.max_distance();

    let n_targets = rng.random_range(0..=ranges.max_targets);
    let targets = (0..n_targets)
        .map(|_| TargetParams {
            distance_m: open_uniform(rng, 8.0, d_max),
            amplitude: open_uniform(rng, 0.0, ranges.max_target_amplitude),
            phase_rad: open_uniform(rng, 0.0, 2.0 * PI),
            velocity_m_per_s: if ranges.max_velocity_km_per_h > 0.0 {
                open_uniform(rng, 0.0, ranges.max_velocity_km_per_h) / 3.6
            } else {
                0.0
            },
        })
        .collect();

    let snr_steps = (ranges.snr_db_max - ranges.snr_db_min) / ranges.snr_db_step;
    let snr_db = (ranges.snr_db_min + ranges.snr_db_step * rng.random_range(0..=snr_steps)) as f64;
    let sinr_db = rng.random_range(ranges.sinr_db_min..=ranges.sinr_db_max);

    let n_interferers = rng.random_range(ranges.min_interferers..=ranges.max_interferers);
    let interferers = (0..n_interferers)
        .map(|_| {
            let chirp_rate = loop {
                let v = open_uniform(rng, -2.0 * k, 2.0 * k);
                if v != k {
                    break v;
                }
            };
            InterferenceParams {
                amplitude: open_uniform(rng, 0.0, ranges.max_interference_amplitude),
                chirp_rate_hz_per_s: chirp_rate,
                duration_s: open_uniform(rng, 0.0, tsw),
                delay_s: open_uniform(rng, -tsw / 2.0, tsw / 2.0),
                center_frequency_hz: config.center_frequency_hz,
            }
        })
        .collect();

    SceneSpec { targets, interferers, snr_db, sinr_db, seed: rng.next_u64() }
}

/// Samples and synthesizes `count` scenes; scene `i` uses seed `dataset_seed ^ i`.
pub fn generate_dataset(
    config: &RadarConfig,
    ranges: &SceneRanges,
    count: usize,
    dataset_seed: u64,
) -> Result<Vec<SweepSignal>> {
    config.validate()?;
    ranges.validate()?;
    (0..count)
        .map(|i| {
            let mut rng = scene_rng(dataset_seed, i as u64);
            let scene = sample_scene_with(&mut rng, config, ranges);
            synthesize_scene(config, &scene)
        })
        .collect()
}
