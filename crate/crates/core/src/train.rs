//! Mini-batch Adam training on normalized chunk pairs.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cvnn::{ArchitectureSpec, ComplexTensor4, CvFcnModel};
use crate::error::{Error, Result};
use crate::loss::{self, LossConfig, MatrixView};
use crate::pipeline::{self, SplitConfig, TrainingPair};
use crate::synth::SweepSignal;
use crate::tf::StftConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Multiplier turning `lambda` into the weight of the L2,1 term in the
    /// per-chunk objective. `None` means `1 / (M * N)` for `M x N` chunks.
    #[serde(default)]
    pub lambda_scale: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { lambda: 400.0, epochs: 100, learning_rate: 1e-3, batch_size: 32, seed: 0, lambda_scale: None }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        LossConfig::new(self.lambda).validate()?;
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if let Some(s) = self.lambda_scale {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidConfig(format!("lambda_scale must be >= 0, got {s}")));
            }
        }
        Ok(())
    }

    /// Weight of `||S~||_{2,1}` next to the summed squared error for an
    /// `rows x cols` chunk.
    pub fn effective_lambda(&self, rows: usize, cols: usize) -> f64 {
        self.lambda * self.lambda_scale.unwrap_or(1.0 / (rows * cols) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-chunk objective over the epoch.
    pub loss: f64,
    pub squared_error: f64,
    pub l21: f64,
}

fn to_complex(t: &ComplexTensor4<f32>) -> Vec<Complex64> {
    t.re.iter().zip(&t.im).map(|(r, i)| Complex64::new(*r as f64, *i as f64)).collect()
}

/// Trains `model` in place. Pairs with an all-zero input chunk carry no
/// signal and are left out. `on_epoch` sees each epoch's statistics as they
/// are produced.
pub fn train<F>(model: &mut CvFcnModel, pairs: &[TrainingPair], cfg: &TrainConfig, mut on_epoch: F) -> Result<Vec<EpochStats>>
where
    F: FnMut(&EpochStats),
{
    cfg.validate()?;
    let mut order: Vec<usize> = (0..pairs.len()).filter(|&i| !pairs[i].input_is_zero()).collect();
    if order.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let [_, _, h, w] = pairs[order[0]].input.shape();
    let loss_cfg = LossConfig::new(cfg.effective_lambda(h, w));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let mut history = Vec::with_capacity(cfg.epochs);
    let n = h * w;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut total_se, mut total_l21) = (0.0, 0.0, 0.0);
        for batch in order.chunks(cfg.batch_size) {
            let mut input = ComplexTensor4::zeros([batch.len(), 1, h, w]);
            for (k, &i) in batch.iter().enumerate() {
                let p = &pairs[i];
                if p.input.shape() != [1, 1, h, w] || p.label.shape() != [1, 1, h, w] {
                    return Err(Error::ShapeMismatch("training pairs differ in shape".into()));
                }
                input.re[k * n..(k + 1) * n].copy_from_slice(&p.input.re);
                input.im[k * n..(k + 1) * n].copy_from_slice(&p.input.im);
            }
            let inv_b = 1.0 / batch.len() as f64;
            let mut grad = vec![Complex64::new(0.0, 0.0); n];
            let grads = model.backprop_with(&input, |k, out| {
                let pred = to_complex(out);
                let label = to_complex(&pairs[batch[k]].label);
                let pv = MatrixView::new(&pred, h, w)?;
                let lv = MatrixView::new(&label, h, w)?;
                let se = loss::squared_error(pv, lv)?;
                let l21 = loss::l21_norm(pv);
                total_se += se;
                total_l21 += l21;
                total += se + loss_cfg.lambda * l21;
                loss::loss_gradient_into(pv, lv, &loss_cfg, &mut grad)?;
                let re = grad.iter().map(|g| (g.re * inv_b) as f32).collect();
                let im = grad.iter().map(|g| (g.im * inv_b) as f32).collect();
                ComplexTensor4::from_parts([1, 1, h, w], re, im)
            })?;
            if !total.is_finite() || !grads.all_finite() {
                return Err(Error::Numeric(format!("non-finite loss or gradient in epoch {}", epoch + 1)));
            }
            model.adam_step(&grads, cfg.learning_rate)?;
        }
        let count = order.len() as f64;
        let stats = EpochStats { epoch: epoch + 1, loss: total / count, squared_error: total_se / count, l21: total_l21 / count };
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(history)
}

/// Builds training pairs from `dataset`, initializes a model for `arch` and
/// trains it. Every random choice derives from `cfg.seed`.
pub fn fit<F>(
    dataset: &[SweepSignal],
    arch: &ArchitectureSpec,
    cfg: &TrainConfig,
    stft: &StftConfig,
    split: &SplitConfig,
    on_epoch: F,
) -> Result<(CvFcnModel, Vec<EpochStats>)>
where
    F: FnMut(&EpochStats),
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(3);
    let pairs = pipeline::make_training_pairs(dataset, stft, split, &mut rng)?;
    let mut model = CvFcnModel::init(arch, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let history = train(&mut model, &pairs, cfg, on_epoch)?;
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvnn::ArchitectureSpec;

    fn pair(seed: f32) -> TrainingPair {
        let re: Vec<f32> = (0..64).map(|i| (i as f32 * 0.37 + seed).sin()).collect();
        let im: Vec<f32> = (0..64).map(|i| (i as f32 * 0.11 - seed).cos()).collect();
        let x = ComplexTensor4::from_parts([1, 1, 8, 8], re, im).unwrap();
        TrainingPair { scene: 0, chunk: 0, label: x.scaled(0.5), input: x, scale: 1.0 }
    }

    fn tiny() -> CvFcnModel {
        let arch: ArchitectureSpec = "complex:2x2".parse().unwrap();
        CvFcnModel::init(&arch, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn loss_goes_down_and_is_deterministic() {
        let pairs: Vec<_> = (0..6).map(|i| pair(i as f32)).collect();
        let cfg = TrainConfig { lambda: 0.0, epochs: 30, learning_rate: 1e-2, batch_size: 4, seed: 5, lambda_scale: None };
        let mut a = tiny();
        let hist = train(&mut a, &pairs, &cfg, |_| {}).unwrap();
        assert_eq!(hist.len(), 30);
        assert!(hist[29].loss < hist[0].loss);
        let mut b = tiny();
        train(&mut b, &pairs, &cfg, |_| {}).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_epochs_keep_init() {
        let mut m = tiny();
        let before = m.clone();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        assert!(train(&mut m, &[pair(0.0)], &cfg, |_| {}).unwrap().is_empty());
        assert_eq!(m, before);
    }

    #[test]
    fn zero_pairs_are_skipped() {
        let mut z = pair(0.0);
        z.input = ComplexTensor4::zeros([1, 1, 8, 8]);
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        assert!(matches!(train(&mut tiny(), &[z], &cfg, |_| {}), Err(Error::EmptyDataset)));
    }

    #[test]
    fn diverging_run_reports_numeric_error() {
        let mut p = pair(0.0);
        p.label.re[0] = f32::INFINITY;
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        assert!(matches!(train(&mut tiny(), &[p], &cfg, |_| {}), Err(Error::Numeric(_))));
    }

    #[test]
    fn effective_lambda_convention() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.effective_lambda(64, 64), 400.0 / 4096.0);
        let literal = TrainConfig { lambda_scale: Some(1.0), ..cfg };
        assert_eq!(literal.effective_lambda(64, 64), 400.0);
    }
}
