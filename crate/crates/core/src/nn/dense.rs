//! Dense layers and the small ReLU MLP heads.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::params::{ParamBlock, TensorMut, TensorRef};

/// Fully connected layer `y = W x + b` with uniform fan-in initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn init(out_dim: usize, in_dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let w = Array2::from_shape_fn((out_dim, in_dim), |_| rng.gen_range(-bound..=bound));
        Self {
            w,
            b: Array1::zeros(out_dim),
        }
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        self.w.dot(x) + &self.b
    }

    /// Accumulate parameter gradients for adjoint `gy` and return the input
    /// gradient.
    pub fn backward(&self, x: &Array1<f64>, gy: &Array1<f64>, grads: &mut Dense) -> Array1<f64> {
        for (i, gi) in gy.iter().enumerate() {
            grads.w.row_mut(i).scaled_add(*gi, &x.view());
        }
        grads.b += gy;
        self.w.t().dot(gy)
    }
}

impl ParamBlock for Dense {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        f("w", TensorRef::M(&self.w));
        f("b", TensorRef::V(&self.b));
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        f("w", TensorMut::M(&mut self.w));
        f("b", TensorMut::V(&mut self.b));
    }
}

/// Stack of dense layers with ReLU between them and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Retained inputs and pre-activations from one MLP forward pass.
pub struct MlpTape {
    inputs: Vec<Array1<f64>>,
    pres: Vec<Array1<f64>>,
}

impl Mlp {
    /// `dims` lists input, hidden..., output sizes.
    pub fn init(dims: &[usize], rng: &mut impl Rng) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| Dense::init(w[1], w[0], rng))
            .collect();
        Self { layers }
    }

    pub fn forward(&self, x: &Array1<f64>) -> (Array1<f64>, MlpTape) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(cur.clone());
            let pre = layer.forward(&cur);
            pres.push(pre.clone());
            cur = if i + 1 < self.layers.len() {
                pre.mapv(|v| v.max(0.0))
            } else {
                pre
            };
        }
        (cur, MlpTape { inputs, pres })
    }

    pub fn backward(&self, tape: &MlpTape, gy: &Array1<f64>, grads: &mut Mlp) -> Array1<f64> {
        let mut g = gy.clone();
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                // ReLU mask from the retained pre-activation.
                g = ndarray::Zip::from(&g)
                    .and(&tape.pres[i])
                    .map_collect(|gv, pre| if *pre > 0.0 { *gv } else { 0.0 });
            }
            g = self.layers[i].backward(&tape.inputs[i], &g, &mut grads.layers[i]);
        }
        g
    }
}

impl ParamBlock for Mlp {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        for (i, layer) in self.layers.iter().enumerate() {
            f(&format!("{i}.w"), TensorRef::M(&layer.w));
            f(&format!("{i}.b"), TensorRef::V(&layer.b));
        }
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        for (i, layer) in self.layers.iter_mut().enumerate() {
            f(&format!("{i}.w"), TensorMut::M(&mut layer.w));
            f(&format!("{i}.b"), TensorMut::V(&mut layer.b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_layer_gradient_is_outer_product() {
        // For loss = 0.5*||y||^2 the weight gradient of a pure linear layer
        // is y x^T, derived by hand.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let layer = Dense::init(2, 3, &mut rng);
        let x = array![1.0, -2.0, 0.5];
        let y = layer.forward(&x);
        let mut grads = Dense {
            w: Array2::zeros((2, 3)),
            b: Array1::zeros(2),
        };
        let gx = layer.backward(&x, &y, &mut grads);
        for i in 0..2 {
            for j in 0..3 {
                assert!((grads.w[[i, j]] - y[i] * x[j]).abs() < 1e-14);
            }
        }
        assert!((gx - layer.w.t().dot(&y)).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn zero_adjoint_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mlp = Mlp::init(&[3, 4, 2], &mut rng);
        let (_, tape) = mlp.forward(&array![0.3, -0.4, 0.9]);
        let mut grads = mlp.clone();
        grads.fill_zero();
        mlp.backward(&tape, &array![0.0, 0.0], &mut grads);
        assert!(grads.to_flat().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn zero_params_give_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mlp = Mlp::init(&[3, 4, 2], &mut rng);
        mlp.fill_zero();
        let (y, _) = mlp.forward(&array![1.0, 2.0, 3.0]);
        assert!(y.iter().all(|v| *v == 0.0));
    }
}
