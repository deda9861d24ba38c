//! Prior-guided loss: squared Frobenius error plus `lambda` times the L2,1
//! norm of the prediction, where the L2,1 norm sums the Euclidean norms of
//! the time columns (each column is one frame's spectrum).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf::Spectrogram;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub lambda: f64,
    /// Smoothing inside the column norm of the gradient.
    #[serde(default = "default_epsilon")]
    pub l21_epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-12
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { lambda: 400.0, l21_epsilon: default_epsilon() }
    }
}

impl LossConfig {
    pub fn new(lambda: f64) -> Self {
        LossConfig { lambda, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.l21_epsilon.is_finite() && self.l21_epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("l21_epsilon must be > 0, got {}", self.l21_epsilon)));
        }
        Ok(())
    }
}

/// Row-major `rows x cols` complex matrix view.
#[derive(Clone, Copy, Debug)]
pub struct MatrixView<'a> {
    pub data: &'a [Complex64],
    pub rows: usize,
    pub cols: usize,
}

impl<'a> MatrixView<'a> {
    pub fn new(data: &'a [Complex64], rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} values for {}x{}", data.len(), rows, cols)));
        }
        Ok(MatrixView { data, rows, cols })
    }

    pub fn of(spec: &'a Spectrogram) -> Self {
        MatrixView { data: spec.data(), rows: spec.rows(), cols: spec.cols() }
    }

    fn column_energy(&self, col: usize) -> f64 {
        (0..self.rows).map(|r| self.data[r * self.cols + col].norm_sqr()).sum()
    }
}

fn same_shape(a: &MatrixView, b: &MatrixView) -> Result<()> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::ShapeMismatch(format!("{}x{} vs {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    Ok(())
}

/// `sum_j sqrt(sum_i |x_ij|^2)`.
pub fn l21_norm(x: MatrixView) -> f64 {
    (0..x.cols).map(|c| x.column_energy(c).sqrt()).sum()
}

pub fn squared_error(pred: MatrixView, label: MatrixView) -> Result<f64> {
    same_shape(&pred, &label)?;
    Ok(pred.data.iter().zip(label.data).map(|(p, l)| (p - l).norm_sqr()).sum())
}

/// `||S - S~||_F^2 + lambda ||S~||_{2,1}` on raw matrices.
pub fn loss_value_raw(pred: MatrixView, label: MatrixView, cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    let mse = squared_error(pred, label)?;
    Ok(mse + cfg.lambda * l21_norm(pred))
}

/// Gradient w.r.t. the prediction written as `d/d re + j d/d im`.
pub fn loss_gradient_into(pred: MatrixView, label: MatrixView, cfg: &LossConfig, out: &mut [Complex64]) -> Result<()> {
    cfg.validate()?;
    same_shape(&pred, &label)?;
    if out.len() != pred.data.len() {
        return Err(Error::ShapeMismatch("gradient buffer length".into()));
    }
    for ((o, p), l) in out.iter_mut().zip(pred.data).zip(label.data) {
        *o = 2.0 * (p - l);
    }
    if cfg.lambda > 0.0 {
        for c in 0..pred.cols {
            let norm = (pred.column_energy(c) + cfg.l21_epsilon).sqrt();
            let k = cfg.lambda / norm;
            for r in 0..pred.rows {
                let i = r * pred.cols + c;
                out[i] += pred.data[i] * k;
            }
        }
    }
    Ok(())
}

pub fn loss_value(pred: &Spectrogram, label: &Spectrogram, cfg: &LossConfig) -> Result<f64> {
    loss_value_raw(MatrixView::of(pred), MatrixView::of(label), cfg)
}

pub fn loss_gradient(pred: &Spectrogram, label: &Spectrogram, cfg: &LossConfig) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); pred.data().len()];
    loss_gradient_into(MatrixView::of(pred), MatrixView::of(label), cfg, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hand_example() {
        // S~ = [[3, 0], [4, 0]], S = 0, lambda = 1 -> 25 + 5
        let pred = [c(3.0), c(0.0), c(4.0), c(0.0)];
        let label = [c(0.0); 4];
        let p = MatrixView::new(&pred, 2, 2).unwrap();
        let l = MatrixView::new(&label, 2, 2).unwrap();
        assert_eq!(squared_error(p, l).unwrap(), 25.0);
        assert_eq!(l21_norm(p), 5.0);
        assert_eq!(loss_value_raw(p, l, &LossConfig::new(1.0)).unwrap(), 30.0);
    }

    #[test]
    fn perfect_prediction_leaves_penalty() {
        let s = [Complex64::new(1.0, 2.0), c(-0.5), Complex64::new(0.0, 3.0), c(2.0), c(0.0), c(1.0)];
        let v = MatrixView::new(&s, 3, 2).unwrap();
        let loss = loss_value_raw(v, v, &LossConfig::new(400.0)).unwrap();
        assert_eq!(loss, 400.0 * l21_norm(v));
        assert_eq!(loss_value_raw(v, v, &LossConfig::new(0.0)).unwrap(), 0.0);
        let mut g = vec![c(1.0); 6];
        loss_gradient_into(v, v, &LossConfig::new(0.0), &mut g).unwrap();
        assert!(g.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn zero_column_has_zero_gradient() {
        let pred = [c(1.0), c(0.0), c(2.0), c(0.0)];
        let label = [c(1.0), c(0.0), c(2.0), c(0.0)];
        let p = MatrixView::new(&pred, 2, 2).unwrap();
        let l = MatrixView::new(&label, 2, 2).unwrap();
        let mut g = vec![c(0.0); 4];
        loss_gradient_into(p, l, &LossConfig::new(3.0), &mut g).unwrap();
        assert_eq!(g[1], c(0.0));
        assert_eq!(g[3], c(0.0));
        assert!((g[0].re - 3.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_hot_column_costs_its_magnitude() {
        let mut m = vec![c(0.0); 12];
        m[5] = Complex64::new(-3.0, 4.0);
        assert_eq!(l21_norm(MatrixView::new(&m, 4, 3).unwrap()), 5.0);
    }

    #[test]
    fn shape_and_config_errors() {
        let a = [c(1.0); 4];
        let b = [c(1.0); 6];
        let p = MatrixView::new(&a, 2, 2).unwrap();
        let l = MatrixView::new(&b, 2, 3).unwrap();
        assert!(matches!(loss_value_raw(p, l, &LossConfig::new(1.0)), Err(Error::ShapeMismatch(_))));
        assert!(MatrixView::new(&a, 3, 2).is_err());
        assert!(loss_value_raw(p, p, &LossConfig::new(-1.0)).is_err());
    }
}
