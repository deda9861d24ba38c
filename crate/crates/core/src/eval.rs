//! SINR scoring, zeroing baselines and SINR-binned reports.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::{self, RadarConfig, SweepSignal};

/// Value reported when the recovery error vanishes.
pub const SINR_CAP_DB: f64 = 150.0;

/// `10 log10(||s||^2 / ||s~ - s||^2)`, capped at [`SINR_CAP_DB`].
pub fn sinr_db(recovered: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if recovered.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!("{} recovered vs {} reference samples", recovered.len(), reference.len())));
    }
    let ps: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
    if ps <= 0.0 {
        return Err(Error::ZeroReference);
    }
    let err: f64 = recovered.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    if err <= 0.0 {
        return Ok(SINR_CAP_DB);
    }
    Ok((10.0 * (ps / err).log10()).min(SINR_CAP_DB))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarConfig {
    /// Cells averaged on each side of the cell under test.
    pub training_cells: usize,
    /// Cells skipped on each side between the cell under test and the
    /// training cells.
    pub guard_cells: usize,
    pub scale_factor: f64,
}

impl Default for CfarConfig {
    fn default() -> Self {
        CfarConfig { training_cells: 16, guard_cells: 2, scale_factor: 3.0 }
    }
}

impl CfarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.training_cells == 0 || self.guard_cells == 0 {
            return Err(Error::InvalidConfig("CFAR training and guard cells must be positive".into()));
        }
        if !(self.scale_factor.is_finite() && self.scale_factor > 0.0) {
            return Err(Error::InvalidConfig(format!("CFAR scale factor must be > 0, got {}", self.scale_factor)));
        }
        Ok(())
    }

    fn window(&self) -> usize {
        2 * (self.training_cells + self.guard_cells) + 1
    }
}

/// Cell-averaging CFAR on `|y|^2` along time with wrap-around edges.
pub fn cfar_detect(signal: &[Complex64], cfg: &CfarConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    let n = signal.len();
    if cfg.window() > n {
        return Err(Error::InvalidConfig(format!("CFAR window of {} cells exceeds {} samples", cfg.window(), n)));
    }
    let power: Vec<f64> = signal.iter().map(|v| v.norm_sqr()).collect();
    // prefix[i] = sum of power[0..i] over the doubled sequence
    let mut prefix = Vec::with_capacity(2 * n + 1);
    prefix.push(0.0);
    for i in 0..2 * n {
        prefix.push(prefix[i] + power[i % n]);
    }
    let sum = |from: usize, len: usize| prefix[from + len] - prefix[from];
    let (t, g) = (cfg.training_cells, cfg.guard_cells);
    let mut mask = Vec::with_capacity(n);
    for (i, p) in power.iter().enumerate() {
        let right = sum((i + g + 1) % n, t);
        let left = sum((i + 2 * n - g - t) % n, t);
        let mean = (left + right) / (2 * t) as f64;
        mask.push(*p > cfg.scale_factor * mean);
    }
    Ok(mask)
}

/// Sets masked samples of the interfered signal to zero and scores the
/// result against the clean reference.
pub fn zero_and_score(sweep: &SweepSignal, mask: &[bool]) -> Result<(Vec<Complex64>, f64)> {
    if mask.len() != sweep.samples.len() {
        return Err(Error::ShapeMismatch(format!("mask of {} for {} samples", mask.len(), sweep.samples.len())));
    }
    let out: Vec<Complex64> =
        sweep.samples.iter().zip(mask).map(|(v, m)| if *m { Complex64::new(0.0, 0.0) } else { *v }).collect();
    let sinr = sinr_db(&out, &sweep.clean)?;
    Ok((out, sinr))
}

/// True interference support recorded by the synthesis.
pub fn oracle_mask(config: &RadarConfig, sweep: &SweepSignal) -> Vec<bool> {
    synth::scene_interference_support(config, &sweep.spec)
}

/// Fraction of `support` samples flagged by `mask`; `None` without support.
pub fn detection_rate(mask: &[bool], support: &[bool]) -> Option<f64> {
    let total = support.iter().filter(|s| **s).count();
    if total == 0 {
        return None;
    }
    let hit = mask.iter().zip(support).filter(|(m, s)| **m && **s).count();
    Some(hit as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinrBins {
    pub lo_db: f64,
    pub hi_db: f64,
    pub width_db: f64,
}

impl Default for SinrBins {
    fn default() -> Self {
        SinrBins { lo_db: -40.0, hi_db: 20.0, width_db: 5.0 }
    }
}

impl SinrBins {
    pub fn count(&self) -> usize {
        (((self.hi_db - self.lo_db) / self.width_db).ceil() as usize).max(1)
    }

    /// Bin of `x`; values outside the range land in the edge bins.
    pub fn index(&self, x: f64) -> usize {
        let i = ((x - self.lo_db) / self.width_db).floor();
        (i.max(0.0) as usize).min(self.count() - 1)
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let lo = self.lo_db + i as f64 * self.width_db;
        (lo, (lo + self.width_db).min(self.hi_db))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub scene_id: usize,
    pub method: String,
    pub input_sinr_db: f64,
    pub output_sinr_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub method: String,
    pub lo_db: f64,
    pub hi_db: f64,
    pub count: usize,
    pub mean_input_db: f64,
    pub mean_output_db: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub bins: Vec<BinSummary>,
}

impl EvalReport {
    /// Rows of `method` whose input SINR lies in `[lo, hi]`.
    pub fn rows_in(&self, method: &str, lo: f64, hi: f64) -> Vec<&EvalRow> {
        self.rows.iter().filter(|r| r.method == method && r.input_sinr_db >= lo && r.input_sinr_db <= hi).collect()
    }

    /// `(mean input, mean output, count)` of `method` over input SINR in `[lo, hi]`.
    pub fn mean_in_range(&self, method: &str, lo: f64, hi: f64) -> Option<(f64, f64, usize)> {
        let rows = self.rows_in(method, lo, hi);
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let mi = rows.iter().map(|r| r.input_sinr_db).sum::<f64>() / n;
        let mo = rows.iter().map(|r| r.output_sinr_db).sum::<f64>() / n;
        Some((mi, mo, rows.len()))
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
        self.bins.extend(other.bins);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "scene_id,method,input_sinr_db,output_sinr_db")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.scene_id, r.method, r.input_sinr_db, r.output_sinr_db)?;
        }
        Ok(())
    }
}

/// Applies `method` to every scene that has a clean reference, scores the
/// output against it and aggregates by input SINR.
pub fn evaluate_method<F>(name: &str, dataset: &[SweepSignal], bins: &SinrBins, mut method: F) -> Result<EvalReport>
where
    F: FnMut(usize, &SweepSignal) -> Result<Vec<Complex64>>,
{
    let mut rows = Vec::new();
    for (id, sweep) in dataset.iter().enumerate() {
        if sweep.clean.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        let input = sinr_db(&sweep.samples, &sweep.clean)?;
        let out = method(id, sweep)?;
        let output = sinr_db(&out, &sweep.clean)?;
        rows.push(EvalRow { scene_id: id, method: name.to_string(), input_sinr_db: input, output_sinr_db: output });
    }
    let mut sums = vec![(0usize, 0.0, 0.0); bins.count()];
    for r in &rows {
        let s = &mut sums[bins.index(r.input_sinr_db)];
        s.0 += 1;
        s.1 += r.input_sinr_db;
        s.2 += r.output_sinr_db;
    }
    let summaries = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0 > 0)
        .map(|(i, s)| {
            let (lo, hi) = bins.edges(i);
            BinSummary {
                method: name.to_string(),
                lo_db: lo,
                hi_db: hi,
                count: s.0,
                mean_input_db: s.1 / s.0 as f64,
                mean_output_db: s.2 / s.0 as f64,
            }
        })
        .collect();
    Ok(EvalReport { rows, bins: summaries })
}

/// Largest `scale_factor` from `grid` whose mean detection rate over the
/// interfered scenes of `dataset` reaches `min_rate`; the smallest grid
/// value when none does.
pub fn tune_cfar_scale(
    config: &RadarConfig,
    dataset: &[SweepSignal],
    training_cells: usize,
    guard_cells: usize,
    grid: &[f64],
    min_rate: f64,
) -> Result<CfarConfig> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let supports: Vec<Vec<bool>> = dataset.iter().map(|s| oracle_mask(config, s)).collect();
    let mut best = None;
    for &scale in &sorted {
        let cfg = CfarConfig { training_cells, guard_cells, scale_factor: scale };
        let (mut hit, mut total) = (0usize, 0usize);
        for (s, sup) in dataset.iter().zip(&supports) {
            let mask = cfar_detect(&s.samples, &cfg)?;
            total += sup.iter().filter(|v| **v).count();
            hit += mask.iter().zip(sup).filter(|(m, v)| **m && **v).count();
        }
        best = Some(cfg);
        if total > 0 && hit as f64 / total as f64 >= min_rate {
            break;
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("empty CFAR scale grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sinr_anchors() {
        let s = vec![c(6.0, 8.0)];
        // ||s||^2 = 100, error 1
        assert_eq!(sinr_db(&[c(7.0, 8.0)], &s).unwrap(), 20.0);
        assert_eq!(sinr_db(&[c(0.0, 0.0)], &s).unwrap(), 0.0);
        assert_eq!(sinr_db(&s, &s).unwrap(), SINR_CAP_DB);
        assert!(matches!(sinr_db(&[c(1.0, 0.0)], &[c(0.0, 0.0)]), Err(Error::ZeroReference)));
        assert!(sinr_db(&s, &[s[0], s[0]]).is_err());
    }

    #[test]
    fn constant_envelope_is_not_flagged() {
        let sig: Vec<Complex64> = (0..100).map(|i| Complex64::from_polar(2.0, i as f64 * 0.3)).collect();
        let mask = cfar_detect(&sig, &CfarConfig { training_cells: 8, guard_cells: 2, scale_factor: 3.0 }).unwrap();
        assert!(mask.iter().all(|m| !m));
    }

    #[test]
    fn cfar_window_must_fit() {
        let sig = vec![c(1.0, 0.0); 10];
        assert!(cfar_detect(&sig, &CfarConfig { training_cells: 4, guard_cells: 1, scale_factor: 3.0 }).is_err());
        assert!(cfar_detect(&sig, &CfarConfig { training_cells: 0, guard_cells: 1, scale_factor: 3.0 }).is_err());
    }

    #[test]
    fn bins_cover_everything() {
        let b = SinrBins::default();
        assert_eq!(b.count(), 12);
        assert_eq!(b.index(-40.0), 0);
        assert_eq!(b.index(-35.1), 0);
        assert_eq!(b.index(-35.0), 1);
        assert_eq!(b.index(-90.0), 0);
        assert_eq!(b.index(20.0), 11);
        assert_eq!(b.edges(11), (15.0, 20.0));
    }

    #[test]
    fn csv_layout() {
        let r = EvalReport {
            rows: vec![EvalRow { scene_id: 3, method: "identity".into(), input_sinr_db: -12.5, output_sinr_db: 0.25 }],
            bins: vec![],
        };
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "scene_id,method,input_sinr_db,output_sinr_db\n3,identity,-12.5,0.25\n");
    }
}
