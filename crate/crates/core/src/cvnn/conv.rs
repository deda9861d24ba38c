//! Stride-1 "same" convolution (cross-correlation, no kernel flip) via
//! im2col + GEMM, and the complex layer built on it.

use super::model::ConvLayer;
use super::{matmul, ComplexTensor4, Real};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Geometry {
    pub cin: usize,
    pub cout: usize,
    pub k: usize,
    pub h: usize,
    pub w: usize,
}

impl Geometry {
    fn pad(&self) -> isize {
        (self.k / 2) as isize
    }

    pub fn hw(&self) -> usize {
        self.h * self.w
    }

    pub fn col_rows(&self) -> usize {
        self.cin * self.k * self.k
    }
}

/// `[cin, h, w]` -> `[cin*k*k, h*w]` patch matrix with zero padding.
pub(crate) fn im2col<T: Real>(input: &[T], g: &Geometry, cols: &mut [T]) {
    let (h, w, k, hw) = (g.h, g.w, g.k, g.hw());
    let p = g.pad();
    for c in 0..g.cin {
        let plane = &input[c * hw..(c + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let r = (c * k + ky) * k + kx;
                let dx = kx as isize - p;
                let lo = (-dx).clamp(0, w as isize) as usize;
                let hi = (w as isize - dx).clamp(0, w as isize) as usize;
                for y in 0..h {
                    let dst = &mut cols[r * hw + y * w..r * hw + (y + 1) * w];
                    let sy = y as isize + ky as isize - p;
                    if sy < 0 || sy >= h as isize || lo >= hi {
                        dst.fill(T::zero());
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    dst[..lo].fill(T::zero());
                    dst[lo..hi].copy_from_slice(&src[(lo as isize + dx) as usize..(hi as isize + dx) as usize]);
                    dst[hi..].fill(T::zero());
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters patch gradients back onto `[cin, h, w]`.
pub(crate) fn col2im_add<T: Real>(cols: &[T], g: &Geometry, out: &mut [T]) {
    let (h, w, k, hw) = (g.h, g.w, g.k, g.hw());
    let p = g.pad();
    for c in 0..g.cin {
        for ky in 0..k {
            for kx in 0..k {
                let r = (c * k + ky) * k + kx;
                let dx = kx as isize - p;
                let lo = (-dx).clamp(0, w as isize) as usize;
                let hi = (w as isize - dx).clamp(0, w as isize) as usize;
                if lo >= hi {
                    continue;
                }
                for y in 0..h {
                    let sy = y as isize + ky as isize - p;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    let src = &cols[r * hw + y * w + lo..r * hw + y * w + hi];
                    let base = c * hw + sy as usize * w;
                    let dst = &mut out[(base as isize + lo as isize + dx) as usize..(base as isize + hi as isize + dx) as usize];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = *d + *s;
                    }
                }
            }
        }
    }
}

/// `out[cout, h, w] = kernel * input + bias`; `kernel` is `[cout, cin, k, k]`.
pub(crate) fn forward<T: Real>(input: &[T], kernel: &[T], bias: &[T], g: &Geometry, cols: &mut Vec<T>, out: &mut [T]) {
    let hw = g.hw();
    cols.resize(g.col_rows() * hw, T::zero());
    im2col(input, g, cols);
    matmul(g.cout, g.col_rows(), hw, kernel, false, cols, false, out, false);
    for (o, b) in bias.iter().enumerate() {
        for v in &mut out[o * hw..(o + 1) * hw] {
            *v = *v + *b;
        }
    }
}

/// Accumulates kernel and bias gradients and, when requested, overwrites
/// `dinput` with the gradient flowing to the layer input.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward<T: Real>(
    input: &[T],
    kernel: &[T],
    dout: &[T],
    g: &Geometry,
    cols: &mut Vec<T>,
    dkernel: &mut [T],
    dbias: &mut [T],
    dinput: Option<&mut [T]>,
) {
    let hw = g.hw();
    let ckk = g.col_rows();
    cols.resize(ckk * hw, T::zero());
    im2col(input, g, cols);
    matmul(g.cout, hw, ckk, dout, false, cols, true, dkernel, true);
    for (o, db) in dbias.iter_mut().enumerate() {
        let s = dout[o * hw..(o + 1) * hw].iter().fold(T::zero(), |a, b| a + *b);
        *db = *db + s;
    }
    if let Some(dinput) = dinput {
        matmul(ckk, g.cout, hw, kernel, true, dout, false, cols, false);
        dinput.fill(T::zero());
        col2im_add(cols, g, dinput);
    }
}

/// Complex convolution of every batch item with a complex layer, zero
/// padded so the spatial shape is kept. Bias is added; no activation.
pub fn complex_conv2d<T: Real>(input: &ComplexTensor4<T>, layer: &ConvLayer<T>) -> Result<ComplexTensor4<T>> {
    if !layer.is_complex() {
        return Err(Error::ShapeMismatch("complex_conv2d needs a complex layer".into()));
    }
    if input.channels() != layer.in_channels {
        return Err(Error::ShapeMismatch(format!(
            "input has {} channels, layer expects {}",
            input.channels(),
            layer.in_channels
        )));
    }
    let [b, _, h, w] = input.shape();
    let g = layer.geometry(h, w);
    let (kernel, bias) = layer.real_kernel();
    let mut out = ComplexTensor4::zeros([b, layer.out_channels, h, w]);
    let mut cols = Vec::new();
    let mut buf = vec![T::zero(); g.cout * g.hw()];
    for item in 0..b {
        forward(&input.packed_item(item), &kernel, &bias, &g, &mut cols, &mut buf);
        out.set_packed_item(item, &buf);
    }
    Ok(out)
}

/// ReLU applied to real and imaginary parts independently.
pub fn crelu<T: Real>(input: &ComplexTensor4<T>) -> ComplexTensor4<T> {
    let relu = |v: &T| if *v > T::zero() { *v } else { T::zero() };
    ComplexTensor4::from_parts(input.shape(), input.re.iter().map(relu).collect(), input.im.iter().map(relu).collect())
        .expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvnn::model::Activation;

    fn layer_1x1(re: f64, im: f64) -> ConvLayer<f64> {
        ConvLayer {
            in_channels: 1,
            out_channels: 1,
            kernel_size: 1,
            activation: Activation::None,
            kernel_re: vec![re],
            kernel_im: vec![im],
            bias_re: vec![0.0],
            bias_im: vec![0.0],
        }
    }

    fn sample() -> ComplexTensor4<f64> {
        let re: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        let im: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        ComplexTensor4::from_parts([1, 1, 3, 4], re, im).unwrap()
    }

    #[test]
    fn unit_kernel_is_identity() {
        let x = sample();
        assert_eq!(complex_conv2d(&x, &layer_1x1(1.0, 0.0)).unwrap(), x);
    }

    #[test]
    fn imaginary_unit_kernel_rotates() {
        let x = sample();
        let y = complex_conv2d(&x, &layer_1x1(0.0, 1.0)).unwrap();
        for i in 0..x.len() {
            assert_eq!(y.re[i], -x.im[i]);
            assert_eq!(y.im[i], x.re[i]);
        }
    }

    #[test]
    fn channel_mismatch() {
        let x = ComplexTensor4::<f64>::zeros([1, 2, 3, 3]);
        assert!(matches!(complex_conv2d(&x, &layer_1x1(1.0, 0.0)), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn crelu_examples() {
        let x = ComplexTensor4::from_parts([1, 1, 1, 3], vec![1.5, -1.0, 2.0], vec![-2.0, -1.0, 3.0]).unwrap();
        let y = crelu(&x);
        assert_eq!(y.re, vec![1.5, 0.0, 2.0]);
        assert_eq!(y.im, vec![0.0, 0.0, 3.0]);
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), c> == <x, col2im(c)>
        let g = Geometry { cin: 2, cout: 1, k: 3, h: 4, w: 5 };
        let x: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let c: Vec<f64> = (0..g.col_rows() * g.hw()).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let mut cols = vec![0.0; c.len()];
        im2col(&x, &g, &mut cols);
        let lhs: f64 = cols.iter().zip(&c).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; x.len()];
        col2im_add(&c, &g, &mut back);
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, rhs);
    }
}
