//! Shared observation-window encoder: input embedding, stacked SST layers,
//! final-position pooling.

use ndarray::Array1;
use rand::Rng;

use super::dense::Dense;
use super::params::{ParamBlock, TensorMut, TensorRef};
use super::sst::{SstLayer, SstTape};
use super::{HistoryWindow, NetConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SeqEncoder {
    pub emb: Dense,
    pub layers: Vec<SstLayer>,
}

pub struct EncoderTape {
    raw: Vec<Array1<f64>>,
    layer_tapes: Vec<SstTape>,
}

impl EncoderTape {
    pub fn recurrence_ops(&self) -> usize {
        self.layer_tapes.iter().map(|t| t.recurrence_ops).sum()
    }

    pub fn layer_tapes(&self) -> &[SstTape] {
        &self.layer_tapes
    }
}

impl SeqEncoder {
    pub fn init(cfg: &NetConfig, rng: &mut impl Rng) -> Self {
        Self {
            emb: Dense::init(cfg.hidden_dim, cfg.input_dim, rng),
            layers: (0..cfg.sst_layers).map(|_| SstLayer::init(cfg, rng)).collect(),
        }
    }

    /// Encode a window; the pooled feature is the final-position output of
    /// the last layer.
    pub fn forward(&self, cfg: &NetConfig, window: &HistoryWindow) -> (Array1<f64>, EncoderTape) {
        let raw: Vec<Array1<f64>> = window
            .frames()
            .iter()
            .map(|f| Array1::from_iter(f.iter().cloned()))
            .collect();
        let mut xs: Vec<Array1<f64>> = raw.iter().map(|x| self.emb.forward(x)).collect();
        let mut layer_tapes = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let tape = layer.forward(cfg, &xs);
            xs = tape.outs.clone();
            layer_tapes.push(tape);
        }
        let pooled = xs.last().expect("non-empty window").clone();
        (pooled, EncoderTape { raw, layer_tapes })
    }

    pub fn backward(
        &self,
        cfg: &NetConfig,
        tape: &EncoderTape,
        g_pooled: &Array1<f64>,
        grads: &mut SeqEncoder,
    ) {
        let t_len = tape.raw.len();
        let mut g_outs: Vec<Array1<f64>> = vec![Array1::zeros(cfg.hidden_dim); t_len];
        g_outs[t_len - 1] = g_pooled.clone();
        for (layer, layer_tape, layer_grads) in itertools_rev(&self.layers, &tape.layer_tapes, &mut grads.layers)
        {
            g_outs = layer.backward(cfg, layer_tape, &g_outs, layer_grads);
        }
        for (raw, g) in tape.raw.iter().zip(&g_outs) {
            self.emb.backward(raw, g, &mut grads.emb);
        }
    }
}

/// Reverse zip over layers, their tapes, and their gradient slots.
fn itertools_rev<'a>(
    layers: &'a [SstLayer],
    tapes: &'a [SstTape],
    grads: &'a mut [SstLayer],
) -> impl Iterator<Item = (&'a SstLayer, &'a SstTape, &'a mut SstLayer)> {
    layers
        .iter()
        .zip(tapes.iter())
        .zip(grads.iter_mut())
        .map(|((l, t), g)| (l, t, g))
        .rev()
}

impl ParamBlock for SeqEncoder {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        self.emb.for_each(&mut |name, t| f(&format!("emb.{name}"), t));
        for (i, layer) in self.layers.iter().enumerate() {
            layer.for_each(&mut |name, t| f(&format!("sst{i}.{name}"), t));
        }
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        self.emb
            .for_each_mut(&mut |name, t| f(&format!("emb.{name}"), t));
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.for_each_mut(&mut |name, t| f(&format!("sst{i}.{name}"), t));
        }
    }
}
