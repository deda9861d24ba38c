#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rim_core::cvnn::{Activation, ComplexTensor4, ConvLayer, Mode, Model};

pub fn random_tensor<R: Rng>(rng: &mut R, shape: [usize; 4]) -> ComplexTensor4<f64> {
    let n: usize = shape.iter().product();
    let re = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let im = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    ComplexTensor4::from_parts(shape, re, im).unwrap()
}

pub fn random_layer<R: Rng>(rng: &mut R, cin: usize, cout: usize, k: usize) -> ConvLayer<f64> {
    let mut layer = ConvLayer::zeros(Mode::Complex, cin, cout, k, Activation::None);
    for v in layer.kernel_re.iter_mut().chain(layer.kernel_im.iter_mut()) {
        *v = rng.random_range(-1.0..1.0);
    }
    for v in layer.bias_re.iter_mut().chain(layer.bias_im.iter_mut()) {
        *v = rng.random_range(-1.0..1.0);
    }
    layer
}

fn at(t: &ComplexTensor4<f64>, b: usize, c: usize, y: usize, x: usize) -> Complex64 {
    let [_, cs, h, w] = t.shape();
    let i = ((b * cs + c) * h + y) * w + x;
    Complex64::new(t.re[i], t.im[i])
}

/// Zero-padded "same" correlation written directly in complex arithmetic:
/// `out[o](y, x) = bias[o] + sum_i sum_(dy,dx) W[o,i](dy,dx) * h[i](y+dy-p, x+dx-p)`.
pub fn direct_conv(input: &ComplexTensor4<f64>, layer: &ConvLayer<f64>) -> ComplexTensor4<f64> {
    let [b, cin, h, w] = input.shape();
    let (cout, k) = (layer.out_channels, layer.kernel_size);
    let p = (k / 2) as isize;
    let mut out = ComplexTensor4::zeros([b, cout, h, w]);
    for bi in 0..b {
        for o in 0..cout {
            for y in 0..h {
                for x in 0..w {
                    let mut acc = Complex64::new(layer.bias_re[o], layer.bias_im[o]);
                    for i in 0..cin {
                        for dy in 0..k {
                            for dx in 0..k {
                                let yy = y as isize + dy as isize - p;
                                let xx = x as isize + dx as isize - p;
                                if yy < 0 || xx < 0 || yy >= h as isize || xx >= w as isize {
                                    continue;
                                }
                                let widx = ((o * cin + i) * k + dy) * k + dx;
                                let wgt = Complex64::new(layer.kernel_re[widx], layer.kernel_im[widx]);
                                acc += wgt * at(input, bi, i, yy as usize, xx as usize);
                            }
                        }
                    }
                    let idx = ((bi * cout + o) * h + y) * w + x;
                    out.re[idx] = acc.re;
                    out.im[idx] = acc.im;
                }
            }
        }
    }
    out
}

/// Largest elementwise relative error, normalized by the reference's peak magnitude.
pub fn max_rel_err(got: &ComplexTensor4<f64>, want: &ComplexTensor4<f64>) -> f64 {
    assert_eq!(got.shape(), want.shape());
    let peak = want.re.iter().chain(&want.im).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    got.re
        .iter()
        .zip(&want.re)
        .chain(got.im.iter().zip(&want.im))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / peak))
}

/// Compares every analytic gradient entry with a central difference of
/// `objective`, perturbing the matching parameter by `h`. Returns the number
/// of parameters checked.
pub fn check_model_gradient<F>(model: &Model<f64>, analytic: &[f64], h: f64, rel: f64, abs: f64, objective: F) -> usize
where
    F: Fn(&Model<f64>) -> f64,
{
    let mut probe = model.clone();
    let mut flat = 0;
    let slots: Vec<usize> = model.param_slices().iter().map(|s| s.len()).collect();
    for (slot, len) in slots.into_iter().enumerate() {
        for j in 0..len {
            let orig = probe.param_slices()[slot][j];
            probe.param_slices_mut()[slot][j] = orig + h;
            let up = objective(&probe);
            probe.param_slices_mut()[slot][j] = orig - h;
            let down = objective(&probe);
            probe.param_slices_mut()[slot][j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[flat];
            let tol = abs.max(rel * numeric.abs().max(a.abs()));
            assert!(
                (a - numeric).abs() <= tol,
                "parameter slot {slot} index {j}: analytic {a}, central difference {numeric}"
            );
            flat += 1;
        }
    }
    flat
}
