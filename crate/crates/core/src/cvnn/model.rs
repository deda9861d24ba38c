use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::adam::{AdamConfig, AdamState};
use super::conv::{self, Geometry};
use super::{ComplexTensor4, Real};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Complex,
    Real,
}

/// `Crelu` is ReLU on each real channel; in complex mode that is CReLU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Crelu,
    None,
}

/// Fixed-width stack of `depth` convolutions with `filters` channels; the last
/// layer maps back to one complex channel (two real channels in real mode).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub depth: usize,
    pub filters: usize,
    pub kernel_size: usize,
    pub mode: Mode,
    pub residual: bool,
}

impl Default for ArchitectureSpec {
    /// Ten complex 3x3 layers of 16 filters.
    fn default() -> Self {
        ArchitectureSpec { depth: 10, filters: 16, kernel_size: 3, mode: Mode::Complex, residual: false }
    }
}

impl ArchitectureSpec {
    pub fn new(mode: Mode, depth: usize, filters: usize) -> Self {
        ArchitectureSpec { depth, filters, kernel_size: 3, mode, residual: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            return Err(Error::InvalidConfig(format!("depth must be >= 2, got {}", self.depth)));
        }
        if self.filters == 0 {
            return Err(Error::InvalidConfig("filters must be >= 1".into()));
        }
        if self.kernel_size % 2 == 0 {
            return Err(Error::InvalidConfig(format!("kernel size must be odd, got {}", self.kernel_size)));
        }
        Ok(())
    }

    /// Channels entering and leaving the network (complex channels in complex
    /// mode, real channels in real mode).
    fn io_channels(&self) -> usize {
        match self.mode {
            Mode::Complex => 1,
            Mode::Real => 2,
        }
    }

    pub fn layer_channels(&self, layer: usize) -> (usize, usize) {
        let io = self.io_channels();
        let cin = if layer == 0 { io } else { self.filters };
        let cout = if layer + 1 == self.depth { io } else { self.filters };
        (cin, cout)
    }
}

/// `MODE:DEPTHxFILTERS[:kK][:residual]`, e.g. `complex:10x16` or `real:11x32:k3`.
impl FromStr for ArchitectureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse architecture {s:?}"));
        let mut parts = s.split(':');
        let mode = match parts.next().ok_or_else(bad)? {
            "complex" => Mode::Complex,
            "real" => Mode::Real,
            _ => return Err(bad()),
        };
        let (d, f) = parts.next().ok_or_else(bad)?.split_once('x').ok_or_else(bad)?;
        let mut arch = ArchitectureSpec::new(mode, d.parse().map_err(|_| bad())?, f.parse().map_err(|_| bad())?);
        for extra in parts {
            if extra == "residual" {
                arch.residual = true;
            } else if let Some(k) = extra.strip_prefix('k') {
                arch.kernel_size = k.parse().map_err(|_| bad())?;
            } else {
                return Err(bad());
            }
        }
        arch.validate()?;
        Ok(arch)
    }
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Complex => "complex",
            Mode::Real => "real",
        };
        write!(f, "{mode}:{}x{}:k{}", self.depth, self.filters, self.kernel_size)?;
        if self.residual {
            write!(f, ":residual")?;
        }
        Ok(())
    }
}

/// One convolution layer. Kernels are `[out, in, k, k]`, row-major. Real-mode
/// layers leave `kernel_im` and `bias_im` empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub activation: Activation,
    pub kernel_re: Vec<T>,
    pub kernel_im: Vec<T>,
    pub bias_re: Vec<T>,
    pub bias_im: Vec<T>,
}

impl<T: Real> ConvLayer<T> {
    pub fn zeros(mode: Mode, cin: usize, cout: usize, k: usize, activation: Activation) -> Self {
        let n = cout * cin * k * k;
        let (nim, bim) = match mode {
            Mode::Complex => (n, cout),
            Mode::Real => (0, 0),
        };
        ConvLayer {
            in_channels: cin,
            out_channels: cout,
            kernel_size: k,
            activation,
            kernel_re: vec![T::zero(); n],
            kernel_im: vec![T::zero(); nim],
            bias_re: vec![T::zero(); cout],
            bias_im: vec![T::zero(); bim],
        }
    }

    pub fn is_complex(&self) -> bool {
        !self.kernel_im.is_empty() || !self.bias_im.is_empty()
    }

    pub fn mode(&self) -> Mode {
        if self.is_complex() {
            Mode::Complex
        } else {
            Mode::Real
        }
    }

    fn kernel_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_size * self.kernel_size
    }

    /// Real-valued parameters: `2(out*in*k*k + out)` for complex layers.
    pub fn num_parameters(&self) -> usize {
        self.kernel_re.len() + self.kernel_im.len() + self.bias_re.len() + self.bias_im.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.kernel_len();
        let ok = self.kernel_re.len() == n
            && self.bias_re.len() == self.out_channels
            && if self.is_complex() {
                self.kernel_im.len() == n && self.bias_im.len() == self.out_channels
            } else {
                self.kernel_im.is_empty() && self.bias_im.is_empty()
            };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("layer parameter lengths disagree with channel counts".into()))
        }
    }

    pub(crate) fn geometry(&self, h: usize, w: usize) -> Geometry {
        let m = if self.is_complex() { 2 } else { 1 };
        Geometry { cin: m * self.in_channels, cout: m * self.out_channels, k: self.kernel_size, h, w }
    }

    /// Kernel and bias of the equivalent real convolution. For complex layers
    /// the kernel is the block matrix `[[A, -B], [B, A]]`.
    pub(crate) fn real_kernel(&self) -> (Vec<T>, Vec<T>) {
        if !self.is_complex() {
            return (self.kernel_re.clone(), self.bias_re.clone());
        }
        let (cin, cout) = (self.in_channels, self.out_channels);
        let kk = self.kernel_size * self.kernel_size;
        let row = 2 * cin * kk;
        let mut k = vec![T::zero(); 2 * cout * row];
        for o in 0..cout {
            for i in 0..cin {
                for q in 0..kk {
                    let src = (o * cin + i) * kk + q;
                    let a = self.kernel_re[src];
                    let b = self.kernel_im[src];
                    k[o * row + i * kk + q] = a;
                    k[o * row + (cin + i) * kk + q] = -b;
                    k[(cout + o) * row + i * kk + q] = b;
                    k[(cout + o) * row + (cin + i) * kk + q] = a;
                }
            }
        }
        let mut bias = self.bias_re.clone();
        bias.extend_from_slice(&self.bias_im);
        (k, bias)
    }

    /// Folds gradients of the real block kernel back onto `A`, `B` and the biases.
    fn fold_gradient(&self, dk: &[T], db: &[T], into: &mut LayerGrad<T>) {
        if !self.is_complex() {
            add_into(&mut into.kernel_re, dk);
            add_into(&mut into.bias_re, db);
            return;
        }
        let (cin, cout) = (self.in_channels, self.out_channels);
        let kk = self.kernel_size * self.kernel_size;
        let row = 2 * cin * kk;
        for o in 0..cout {
            for i in 0..cin {
                for q in 0..kk {
                    let dst = (o * cin + i) * kk + q;
                    let rr = dk[o * row + i * kk + q];
                    let ri = dk[o * row + (cin + i) * kk + q];
                    let ir = dk[(cout + o) * row + i * kk + q];
                    let ii = dk[(cout + o) * row + (cin + i) * kk + q];
                    into.kernel_re[dst] = into.kernel_re[dst] + rr + ii;
                    into.kernel_im[dst] = into.kernel_im[dst] + ir - ri;
                }
            }
            into.bias_re[o] = into.bias_re[o] + db[o];
            into.bias_im[o] = into.bias_im[o] + db[cout + o];
        }
    }

    fn cast<U: Real>(&self) -> ConvLayer<U> {
        ConvLayer {
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            kernel_size: self.kernel_size,
            activation: self.activation,
            kernel_re: cast_vec(&self.kernel_re),
            kernel_im: cast_vec(&self.kernel_im),
            bias_re: cast_vec(&self.bias_re),
            bias_im: cast_vec(&self.bias_im),
        }
    }
}

pub(crate) fn cast_vec<T: Real, U: Real>(v: &[T]) -> Vec<U> {
    v.iter().map(|x| U::of(x.f64())).collect()
}

fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = *d + *s;
    }
}

/// Gradient of one layer, shaped like its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad<T> {
    pub kernel_re: Vec<T>,
    pub kernel_im: Vec<T>,
    pub bias_re: Vec<T>,
    pub bias_im: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(model: &Model<T>) -> Self {
        let layers = model
            .layers
            .iter()
            .map(|l| LayerGrad {
                kernel_re: vec![T::zero(); l.kernel_re.len()],
                kernel_im: vec![T::zero(); l.kernel_im.len()],
                bias_re: vec![T::zero(); l.bias_re.len()],
                bias_im: vec![T::zero(); l.bias_im.len()],
            })
            .collect();
        Gradients { layers }
    }

    /// Flat views in the fixed order kernel_re, kernel_im, bias_re, bias_im per layer.
    pub fn slices(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| [&l.kernel_re[..], &l.kernel_im[..], &l.bias_re[..], &l.bias_im[..]])
            .collect()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.kernel_re[..], &mut l.kernel_im[..], &mut l.bias_re[..], &mut l.bias_im[..]])
            .collect()
    }

    pub fn scale(&mut self, c: T) {
        for s in self.slices_mut() {
            for v in s.iter_mut() {
                *v = *v * c;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    pub fn flatten(&self) -> Vec<T> {
        self.slices().concat()
    }
}

/// Complex-valued fully convolutional network with its optimizer state.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub arch: ArchitectureSpec,
    pub layers: Vec<ConvLayer<T>>,
    pub adam: AdamState<T>,
}

/// Training precision.
pub type CvFcnModel = Model<f32>;

impl<T: Real> Model<T> {
    /// All-zero parameters and optimizer state.
    pub fn zeros(arch: &ArchitectureSpec) -> Result<Self> {
        arch.validate()?;
        let layers = (0..arch.depth)
            .map(|l| {
                let (cin, cout) = arch.layer_channels(l);
                let act = if l + 1 == arch.depth { Activation::None } else { Activation::Crelu };
                ConvLayer::zeros(arch.mode, cin, cout, arch.kernel_size, act)
            })
            .collect::<Vec<_>>();
        let mut model = Model { arch: arch.clone(), layers, adam: AdamState::default() };
        model.adam = AdamState::zeros(&model.param_lens());
        Ok(model)
    }

    /// Random initialization. Complex kernels get Rayleigh magnitudes with
    /// `sigma = 1/sqrt(fan_in + fan_out)` and uniform phases; real kernels are
    /// Glorot-uniform. Biases start at zero.
    pub fn init<R: RngCore + ?Sized>(arch: &ArchitectureSpec, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        let kk = arch.kernel_size * arch.kernel_size;
        for layer in model.layers.iter_mut() {
            let fan = ((layer.in_channels + layer.out_channels) * kk) as f64;
            match arch.mode {
                Mode::Complex => {
                    let sigma = 1.0 / fan.sqrt();
                    for (a, b) in layer.kernel_re.iter_mut().zip(layer.kernel_im.iter_mut()) {
                        let u: f64 = rng.random();
                        let mag = sigma * (-2.0 * (1.0 - u).ln()).sqrt();
                        let phase = rng.random_range(0.0..2.0 * PI);
                        *a = T::of(mag * phase.cos());
                        *b = T::of(mag * phase.sin());
                    }
                }
                Mode::Real => {
                    let limit = (6.0 / fan).sqrt();
                    for w in layer.kernel_re.iter_mut() {
                        *w = T::of(rng.random_range(-limit..limit));
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn count_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.num_parameters()).sum()
    }

    fn param_lens(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.kernel_re.len(), l.kernel_im.len(), l.bias_re.len(), l.bias_im.len()])
            .collect()
    }

    pub fn param_slices(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| [&l.kernel_re[..], &l.kernel_im[..], &l.bias_re[..], &l.bias_im[..]])
            .collect()
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.kernel_re[..], &mut l.kernel_im[..], &mut l.bias_re[..], &mut l.bias_im[..]])
            .collect()
    }

    /// Checks layer chaining and parameter lengths against the architecture.
    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        if self.layers.len() != self.arch.depth {
            return Err(Error::ShapeMismatch(format!("{} layers for depth {}", self.layers.len(), self.arch.depth)));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            layer.check()?;
            if (layer.in_channels, layer.out_channels) != self.arch.layer_channels(l)
                || layer.kernel_size != self.arch.kernel_size
                || layer.mode() != self.arch.mode
            {
                return Err(Error::ShapeMismatch(format!("layer {l} does not match the architecture")));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> Model<U> {
        Model {
            arch: self.arch.clone(),
            layers: self.layers.iter().map(|l| l.cast()).collect(),
            adam: self.adam.cast(),
        }
    }

    fn check_input(&self, input: &ComplexTensor4<T>) -> Result<()> {
        if input.channels() != 1 {
            return Err(Error::ShapeMismatch(format!("network input needs 1 complex channel, got {}", input.channels())));
        }
        if input.height() == 0 || input.width() == 0 {
            return Err(Error::ShapeMismatch("empty spatial dimensions".into()));
        }
        Ok(())
    }

    /// conv -> CReLU for every layer but the last, plus the input when residual.
    pub fn forward(&self, input: &ComplexTensor4<T>) -> Result<ComplexTensor4<T>> {
        self.check_input(input)?;
        let [b, _, h, w] = input.shape();
        let mut ws = Workspace::new(self, h, w);
        let mut out = ComplexTensor4::zeros([b, 1, h, w]);
        for item in 0..b {
            let acts = ws.forward_item(input.packed_item(item));
            out.set_packed_item(item, &ws.output(&acts));
        }
        Ok(out)
    }

    /// Gradient of a scalar loss w.r.t. every parameter, given the gradient
    /// of that loss w.r.t. the forward output.
    pub fn backward(&self, input: &ComplexTensor4<T>, loss_grad: &ComplexTensor4<T>) -> Result<Gradients<T>> {
        let expected = [input.batch(), 1, input.height(), input.width()];
        if loss_grad.shape() != expected {
            return Err(Error::ShapeMismatch(format!("loss gradient {:?}, output {:?}", loss_grad.shape(), expected)));
        }
        self.backprop_with(input, |b, _| Ok(loss_grad.item(b)))
    }

    /// Runs forward on every item, asks `output_grad(item, output)` for the
    /// loss gradient at that output, and accumulates parameter gradients in
    /// item order.
    pub fn backprop_with<F>(&self, input: &ComplexTensor4<T>, mut output_grad: F) -> Result<Gradients<T>>
    where
        F: FnMut(usize, &ComplexTensor4<T>) -> Result<ComplexTensor4<T>>,
    {
        self.check_input(input)?;
        let [b, _, h, w] = input.shape();
        let mut ws = Workspace::new(self, h, w);
        for item in 0..b {
            let acts = ws.forward_item(input.packed_item(item));
            let mut out = ComplexTensor4::zeros([1, 1, h, w]);
            out.set_packed_item(0, &ws.output(&acts));
            let grad = output_grad(item, &out)?;
            if grad.shape() != [1, 1, h, w] {
                return Err(Error::ShapeMismatch(format!("output gradient shape {:?}", grad.shape())));
            }
            ws.backward_item(&acts, grad.packed_item(0));
        }
        Ok(ws.finish())
    }

    pub fn adam_step(&mut self, grads: &Gradients<T>, lr: f64) -> Result<()> {
        self.adam_step_with(grads, lr, &AdamConfig::default())
    }

    pub fn adam_step_with(&mut self, grads: &Gradients<T>, lr: f64, cfg: &AdamConfig) -> Result<()> {
        let lens = self.param_lens();
        let glens: Vec<usize> = grads.slices().iter().map(|s| s.len()).collect();
        if lens != glens {
            return Err(Error::ShapeMismatch("gradient shapes do not match the model".into()));
        }
        if self.adam.m.len() != lens.len() {
            self.adam = AdamState::zeros(&lens);
        }
        let mut adam = std::mem::take(&mut self.adam);
        adam.step(self.param_slices_mut(), &grads.slices(), lr, cfg);
        self.adam = adam;
        Ok(())
    }
}

/// Per-call buffers: block kernels, gradient accumulators, im2col scratch.
struct Workspace<'a, T> {
    model: &'a Model<T>,
    geoms: Vec<Geometry>,
    kernels: Vec<(Vec<T>, Vec<T>)>,
    dk: Vec<Vec<T>>,
    db: Vec<Vec<T>>,
    cols: Vec<T>,
}

impl<'a, T: Real> Workspace<'a, T> {
    fn new(model: &'a Model<T>, h: usize, w: usize) -> Self {
        let kernels: Vec<_> = model.layers.iter().map(|l| l.real_kernel()).collect();
        Workspace {
            model,
            geoms: model.layers.iter().map(|l| l.geometry(h, w)).collect(),
            dk: kernels.iter().map(|(k, _)| vec![T::zero(); k.len()]).collect(),
            db: kernels.iter().map(|(_, b)| vec![T::zero(); b.len()]).collect(),
            kernels,
            cols: Vec::new(),
        }
    }

    /// Activations `[input, after layer 0, .., after last layer]`.
    fn forward_item(&mut self, input: Vec<T>) -> Vec<Vec<T>> {
        let mut acts = Vec::with_capacity(self.geoms.len() + 1);
        acts.push(input);
        for (l, layer) in self.model.layers.iter().enumerate() {
            let g = self.geoms[l];
            let mut out = vec![T::zero(); g.cout * g.hw()];
            let (k, b) = &self.kernels[l];
            conv::forward(&acts[l], k, b, &g, &mut self.cols, &mut out);
            if layer.activation == Activation::Crelu {
                for v in out.iter_mut() {
                    if !(*v > T::zero()) {
                        *v = T::zero();
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    fn output(&self, acts: &[Vec<T>]) -> Vec<T> {
        let mut out = acts[acts.len() - 1].clone();
        if self.model.arch.residual {
            for (o, x) in out.iter_mut().zip(&acts[0]) {
                *o = *o + *x;
            }
        }
        out
    }

    fn backward_item(&mut self, acts: &[Vec<T>], grad_out: Vec<T>) {
        let mut g = grad_out;
        for l in (0..self.model.layers.len()).rev() {
            if self.model.layers[l].activation == Activation::Crelu {
                for (gv, a) in g.iter_mut().zip(&acts[l + 1]) {
                    if !(*a > T::zero()) {
                        *gv = T::zero();
                    }
                }
            }
            let geo = self.geoms[l];
            let mut dinput = if l > 0 { Some(vec![T::zero(); geo.cin * geo.hw()]) } else { None };
            conv::backward(
                &acts[l],
                &self.kernels[l].0,
                &g,
                &geo,
                &mut self.cols,
                &mut self.dk[l],
                &mut self.db[l],
                dinput.as_deref_mut(),
            );
            if let Some(d) = dinput {
                g = d;
            }
        }
    }

    fn finish(self) -> Gradients<T> {
        let mut grads = Gradients::zeros_like(self.model);
        for (l, layer) in self.model.layers.iter().enumerate() {
            layer.fold_gradient(&self.dk[l], &self.db[l], &mut grads.layers[l]);
        }
        grads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_counts() {
        let cv = Model::<f32>::zeros(&ArchitectureSpec::new(Mode::Complex, 10, 16)).unwrap();
        assert_eq!(cv.count_parameters(), 37730);
        let rv = Model::<f32>::zeros(&ArchitectureSpec::new(Mode::Real, 11, 32)).unwrap();
        assert_eq!(rv.count_parameters(), 84418);
        let rv10 = Model::<f32>::zeros(&ArchitectureSpec::new(Mode::Real, 10, 32)).unwrap();
        assert_eq!(rv10.count_parameters(), 75170);
        // every Table III pair: real with doubled filters is just under twice the complex count
        for (depth, c, r) in [(6, 19170, 38178), (8, 28450, 56674), (12, 47010, 93666)] {
            let cvd = Model::<f32>::zeros(&ArchitectureSpec::new(Mode::Complex, depth, 16)).unwrap();
            let rvd = Model::<f32>::zeros(&ArchitectureSpec::new(Mode::Real, depth, 32)).unwrap();
            assert_eq!((cvd.count_parameters(), rvd.count_parameters()), (c, r));
        }
        let ratio = rv10.count_parameters() as f64 / cv.count_parameters() as f64;
        assert!((ratio - 2.0).abs() < 0.01);
        let mut tiny = ArchitectureSpec::new(Mode::Complex, 2, 1);
        tiny.kernel_size = 1;
        assert_eq!(Model::<f64>::zeros(&tiny).unwrap().count_parameters(), 8);
    }

    #[test]
    fn arch_strings() {
        let a: ArchitectureSpec = "complex:10x16".parse().unwrap();
        assert_eq!(a, ArchitectureSpec::default());
        let b: ArchitectureSpec = "real:11x32:k5:residual".parse().unwrap();
        assert_eq!((b.mode, b.depth, b.filters, b.kernel_size, b.residual), (Mode::Real, 11, 32, 5, true));
        assert_eq!(b.to_string().parse::<ArchitectureSpec>().unwrap(), b);
        assert!("complex:1x16".parse::<ArchitectureSpec>().is_err());
        assert!("complex:4x4:k2".parse::<ArchitectureSpec>().is_err());
        assert!("quaternion:4x4".parse::<ArchitectureSpec>().is_err());
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        let arch = ArchitectureSpec::new(Mode::Complex, 4, 6);
        let a = Model::<f32>::init(&arch, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = Model::<f32>::init(&arch, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        assert!(a.layers.iter().all(|l| l.bias_re.iter().chain(&l.bias_im).all(|v| *v == 0.0)));
        assert_eq!(a.adam.step, 0);
        let real = Model::<f32>::init(&ArchitectureSpec::new(Mode::Real, 3, 4), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        real.validate().unwrap();
        assert!(real.layers.iter().all(|l| l.kernel_im.is_empty()));
    }

    #[test]
    fn shape_preserved_and_zero_in_zero_out() {
        for arch in ["complex:3x4", "real:3x4", "complex:2x2:k5:residual"] {
            let arch: ArchitectureSpec = arch.parse().unwrap();
            let model = Model::<f64>::zeros(&arch).unwrap();
            let x = ComplexTensor4::zeros([2, 1, 5, 7]);
            let y = model.forward(&x).unwrap();
            assert_eq!(y.shape(), [2, 1, 5, 7]);
            assert!(y.re.iter().chain(&y.im).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn rejects_multichannel_input() {
        let model = Model::<f64>::zeros(&"complex:2x2".parse().unwrap()).unwrap();
        let x = ComplexTensor4::zeros([1, 2, 4, 4]);
        assert!(matches!(model.forward(&x), Err(Error::ShapeMismatch(_))));
    }
}
