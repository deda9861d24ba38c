use super::model::cast_vec;
use super::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moments per parameter tensor plus the step counter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn zeros(lens: &[usize]) -> Self {
        AdamState {
            step: 0,
            m: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> AdamState<U> {
        AdamState {
            step: self.step,
            m: self.m.iter().map(|x| cast_vec(x)).collect(),
            v: self.v.iter().map(|x| cast_vec(x)).collect(),
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: Vec<&mut [T]>, grads: &[&[T]], lr: f64, cfg: &AdamConfig) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
            for i in 0..p.len() {
                let gi = g[i].f64();
                let mi = cfg.beta1 * m[i].f64() + (1.0 - cfg.beta1) * gi;
                let vi = cfg.beta2 * v[i].f64() + (1.0 - cfg.beta2) * gi * gi;
                m[i] = T::of(mi);
                v[i] = T::of(vi);
                let update = lr * (mi / c1) / ((vi / c2).sqrt() + cfg.epsilon);
                p[i] = T::of(p[i].f64() - update);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight transcription of the textbook update for a scalar.
    fn reference_trace(g: &[f64], lr: f64) -> Vec<f64> {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut p, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        let mut out = Vec::new();
        for (t, gi) in g.iter().enumerate() {
            m = b1 * m + (1.0 - b1) * gi;
            v = b2 * v + (1.0 - b2) * gi * gi;
            let mh = m / (1.0 - b1.powi(t as i32 + 1));
            let vh = v / (1.0 - b2.powi(t as i32 + 1));
            p -= lr * mh / (vh.sqrt() + eps);
            out.push(p);
        }
        out
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut st = AdamState::<f64>::zeros(&[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![1e-3, -50.0, 0.0];
        st.step(vec![&mut p], &[&g], 1e-3, &AdamConfig::default());
        assert!((p[0] - (1.0 - 1e-3)).abs() < 1e-8);
        assert!((p[1] - (-2.0 + 1e-3)).abs() < 1e-10);
        assert_eq!(p[2], 0.5);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn matches_reference_trace() {
        let gs = [[0.3, -1.2, 2.0], [0.1, 0.4, -0.5], [-0.7, 0.0, 1.5]];
        let mut st = AdamState::<f64>::zeros(&[3]);
        let mut p = vec![0.0; 3];
        for g in &gs {
            st.step(vec![&mut p], &[&g[..]], 0.01, &AdamConfig::default());
        }
        for j in 0..3 {
            let col: Vec<f64> = gs.iter().map(|g| g[j]).collect();
            let expected = *reference_trace(&col, 0.01).last().unwrap();
            assert!((p[j] - expected).abs() < 1e-15, "{} vs {}", p[j], expected);
        }
    }
}
