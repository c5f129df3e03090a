//! Uniform access to a network's learnable tensors.
//!
//! Every parameter container enumerates its tensors in a fixed construction
//! order, which defines the flat layout used by SGD steps, soft updates,
//! checkpoints, and finite-difference checks.

use ndarray::{Array1, Array2};

pub enum TensorRef<'a> {
    M(&'a Array2<f64>),
    V(&'a Array1<f64>),
}

pub enum TensorMut<'a> {
    M(&'a mut Array2<f64>),
    V(&'a mut Array1<f64>),
}

impl TensorRef<'_> {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            TensorRef::M(m) => m.as_slice().expect("standard layout"),
            TensorRef::V(v) => v.as_slice().expect("standard layout"),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            TensorRef::M(m) => m.shape().to_vec(),
            TensorRef::V(v) => v.shape().to_vec(),
        }
    }
}

impl TensorMut<'_> {
    pub fn as_slice_mut(&mut self) -> &mut [f64] {
        match self {
            TensorMut::M(m) => m.as_slice_mut().expect("standard layout"),
            TensorMut::V(v) => v.as_slice_mut().expect("standard layout"),
        }
    }
}

/// Fixed-order tensor enumeration plus the flat-vector operations built on it.
pub trait ParamBlock {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef));
    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut));

    fn flat_len(&self) -> usize {
        let mut n = 0;
        self.for_each(&mut |_, t| n += t.as_slice().len());
        n
    }

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.for_each(&mut |_, t| out.extend_from_slice(t.as_slice()));
        out
    }

    fn copy_from_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        self.for_each_mut(&mut |_, mut t| {
            let s = t.as_slice_mut();
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        });
        assert_eq!(offset, flat.len(), "flat length mismatch");
    }

    /// `self[i] = f(self[i], other_flat[i])` over the flat layout.
    fn zip_apply(&mut self, other_flat: &[f64], f: &mut dyn FnMut(f64, f64) -> f64) {
        let mut offset = 0;
        self.for_each_mut(&mut |_, mut t| {
            let s = t.as_slice_mut();
            for v in s.iter_mut() {
                *v = f(*v, other_flat[offset]);
                offset += 1;
            }
        });
        assert_eq!(offset, other_flat.len(), "flat length mismatch");
    }

    fn fill_zero(&mut self) {
        self.for_each_mut(&mut |_, mut t| t.as_slice_mut().fill(0.0));
    }

    fn scale(&mut self, s: f64) {
        self.for_each_mut(&mut |_, mut t| {
            for v in t.as_slice_mut() {
                *v *= s;
            }
        });
    }

    fn norm(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each(&mut |_, t| {
            for v in t.as_slice() {
                acc += v * v;
            }
        });
        acc.sqrt()
    }

    /// Tensor names and shapes in flat order.
    fn schema(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        self.for_each(&mut |name, t| out.push((name.to_string(), t.shape())));
        out
    }
}

/// Gradient-descent step `params -= lr * grads`, returning the grad norm.
pub fn sgd_step<P: ParamBlock>(params: &mut P, grads: &P, lr: f64, max_norm: f64) -> f64 {
    let mut flat = grads.to_flat();
    let norm = flat.iter().map(|g| g * g).sum::<f64>().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let s = max_norm / norm;
        for g in &mut flat {
            *g *= s;
        }
    }
    params.zip_apply(&flat, &mut |p, g| p - lr * g);
    norm
}

/// Soft update `target = tau*source + (1-tau)*target`, elementwise.
pub fn soft_update<P: ParamBlock>(target: &mut P, source: &P, tau: f64) {
    let src = source.to_flat();
    target.zip_apply(&src, &mut |t, s| tau * s + (1.0 - tau) * t);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Dense;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Dense::init(4, 3, &mut rng);
        let flat = d.to_flat();
        assert_eq!(flat.len(), 4 * 3 + 4);
        let mut e = Dense::init(4, 3, &mut rng);
        e.copy_from_flat(&flat);
        assert_eq!(e.to_flat(), flat);
    }

    #[test]
    fn soft_update_blend() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let source = Dense::init(3, 3, &mut rng);
        let mut target = Dense::init(3, 3, &mut rng);
        let before = target.to_flat();
        soft_update(&mut target, &source, 0.25);
        let after = target.to_flat();
        let src = source.to_flat();
        for i in 0..after.len() {
            assert!((after[i] - (0.25 * src[i] + 0.75 * before[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn sgd_clips_gradient_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = Dense::init(2, 2, &mut rng);
        let mut g = Dense::init(2, 2, &mut rng);
        g.fill_zero();
        g.b[0] = 30.0;
        let before = p.to_flat();
        let norm = sgd_step(&mut p, &g, 1.0, 3.0);
        assert!((norm - 30.0).abs() < 1e-12);
        let after = p.to_flat();
        // Clipped step has magnitude 3 on the single nonzero coordinate.
        let moved: f64 = before
            .iter()
            .zip(&after)
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!((moved - 3.0).abs() < 1e-12);
    }
}
