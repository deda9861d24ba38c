use super::Real;
use crate::error::{Error, Result};

/// Rank-4 complex array `[batch, channels, height, width]` with separate
/// real and imaginary planes.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor4<T> {
    shape: [usize; 4],
    pub re: Vec<T>,
    pub im: Vec<T>,
}

impl<T: Real> ComplexTensor4<T> {
    pub fn zeros(shape: [usize; 4]) -> Self {
        let n = shape.iter().product();
        ComplexTensor4 { shape, re: vec![T::zero(); n], im: vec![T::zero(); n] }
    }

    pub fn from_parts(shape: [usize; 4], re: Vec<T>, im: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if re.len() != n || im.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{:?} needs {} values, got re {} / im {}",
                shape,
                n,
                re.len(),
                im.len()
            )));
        }
        Ok(ComplexTensor4 { shape, re, im })
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn height(&self) -> usize {
        self.shape[2]
    }

    pub fn width(&self) -> usize {
        self.shape[3]
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    fn item_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }

    pub fn all_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }

    /// Batch item `b` packed as real channels `[re.., im..]`.
    pub(crate) fn packed_item(&self, b: usize) -> Vec<T> {
        let n = self.item_len();
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(&self.re[b * n..(b + 1) * n]);
        out.extend_from_slice(&self.im[b * n..(b + 1) * n]);
        out
    }

    pub(crate) fn set_packed_item(&mut self, b: usize, packed: &[T]) {
        let n = self.item_len();
        assert_eq!(packed.len(), 2 * n);
        self.re[b * n..(b + 1) * n].copy_from_slice(&packed[..n]);
        self.im[b * n..(b + 1) * n].copy_from_slice(&packed[n..]);
    }

    /// Copy of batch item `b` as a one-item tensor.
    pub fn item(&self, b: usize) -> Self {
        let n = self.item_len();
        ComplexTensor4 {
            shape: [1, self.shape[1], self.shape[2], self.shape[3]],
            re: self.re[b * n..(b + 1) * n].to_vec(),
            im: self.im[b * n..(b + 1) * n].to_vec(),
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        ComplexTensor4 {
            shape: self.shape,
            re: self.re.iter().map(|v| *v * c).collect(),
            im: self.im.iter().map(|v| *v * c).collect(),
        }
    }
}
