//! Linear state-transition layer with causal selective attention.
//!
//! The hidden state follows `h_t = A h_{t-1} + B x_t` with outputs
//! `y_t = C h_t + D x_t`; the recurrence costs a fixed number of operations
//! per position, so the whole pass is linear in sequence length. A causal
//! multi-head attention then reweights the outputs: queries and keys are
//! projections of the hidden states, values are per-head chunks of `y`, and
//! the concatenated heads are projected back to the hidden width.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::params::{ParamBlock, TensorMut, TensorRef};
use super::NetConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SstLayer {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub d: Array2<f64>,
    /// Stacked per-head query/key projections, `(heads*key_dim, hidden)`.
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wo: Array2<f64>,
}

/// Retained intermediates from one layer forward pass.
pub struct SstTape {
    pub xs: Vec<Array1<f64>>,
    pub hs: Vec<Array1<f64>>,
    pub ys: Vec<Array1<f64>>,
    pub qs: Vec<Array1<f64>>,
    pub ks: Vec<Array1<f64>>,
    /// `alphas[t][head][s]` for `s <= t`; rows are softmax distributions.
    pub alphas: Vec<Vec<Vec<f64>>>,
    /// Concatenated head outputs before the output projection.
    pub concats: Vec<Array1<f64>>,
    pub outs: Vec<Array1<f64>>,
    /// Multiply-accumulate count of the recurrence path.
    pub recurrence_ops: usize,
}

fn uniform(shape: (usize, usize), rng: &mut impl Rng) -> Array2<f64> {
    let bound = 1.0 / (shape.1 as f64).sqrt();
    Array2::from_shape_fn(shape, |_| rng.gen_range(-bound..=bound))
}

fn acc_outer(m: &mut Array2<f64>, u: &Array1<f64>, v: &Array1<f64>) {
    for (i, ui) in u.iter().enumerate() {
        if *ui != 0.0 {
            m.row_mut(i).scaled_add(*ui, &v.view());
        }
    }
}

impl SstLayer {
    pub fn init(cfg: &NetConfig, rng: &mut impl Rng) -> Self {
        let h = cfg.hidden_dim;
        let kq = cfg.heads * cfg.key_dim;
        Self {
            a: uniform((h, h), rng),
            b: uniform((h, h), rng),
            c: uniform((h, h), rng),
            d: uniform((h, h), rng),
            wq: uniform((kq, h), rng),
            wk: uniform((kq, h), rng),
            wo: uniform((h, h), rng),
        }
    }

    pub fn forward(&self, cfg: &NetConfig, xs: &[Array1<f64>]) -> SstTape {
        let t_len = xs.len();
        let h_dim = cfg.hidden_dim;
        let dk = cfg.key_dim;
        let vc = cfg.value_chunk();
        let scale = 1.0 / (dk as f64).sqrt();

        let mut hs = Vec::with_capacity(t_len);
        let mut ys = Vec::with_capacity(t_len);
        let mut recurrence_ops = 0usize;
        let mut prev = Array1::zeros(h_dim);
        for x in xs {
            let h = self.a.dot(&prev) + self.b.dot(x);
            let y = self.c.dot(&h) + self.d.dot(x);
            recurrence_ops += 4 * h_dim * h_dim;
            hs.push(h.clone());
            ys.push(y);
            prev = h;
        }

        let qs: Vec<Array1<f64>> = hs.iter().map(|h| self.wq.dot(h)).collect();
        let ks: Vec<Array1<f64>> = hs.iter().map(|h| self.wk.dot(h)).collect();

        let mut alphas = Vec::with_capacity(t_len);
        let mut concats = Vec::with_capacity(t_len);
        let mut outs = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut per_head = Vec::with_capacity(cfg.heads);
            let mut concat = Array1::zeros(h_dim);
            for head in 0..cfg.heads {
                let q = qs[t].slice(ndarray::s![head * dk..(head + 1) * dk]);
                let mut logits = Vec::with_capacity(t + 1);
                for s in 0..=t {
                    let k = ks[s].slice(ndarray::s![head * dk..(head + 1) * dk]);
                    logits.push(q.dot(&k) * scale);
                }
                let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut alpha: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
                let sum: f64 = alpha.iter().sum();
                for a in &mut alpha {
                    *a /= sum;
                }
                for s in 0..=t {
                    let value = ys[s].slice(ndarray::s![head * vc..(head + 1) * vc]);
                    concat
                        .slice_mut(ndarray::s![head * vc..(head + 1) * vc])
                        .scaled_add(alpha[s], &value);
                }
                per_head.push(alpha);
            }
            outs.push(self.wo.dot(&concat));
            alphas.push(per_head);
            concats.push(concat);
        }

        SstTape {
            xs: xs.to_vec(),
            hs,
            ys,
            qs,
            ks,
            alphas,
            concats,
            outs,
            recurrence_ops,
        }
    }

    /// Reverse pass: adjoints on every output position produce input
    /// adjoints and accumulate parameter gradients.
    pub fn backward(
        &self,
        cfg: &NetConfig,
        tape: &SstTape,
        g_outs: &[Array1<f64>],
        grads: &mut SstLayer,
    ) -> Vec<Array1<f64>> {
        let t_len = tape.xs.len();
        let h_dim = cfg.hidden_dim;
        let dk = cfg.key_dim;
        let vc = cfg.value_chunk();
        let scale = 1.0 / (dk as f64).sqrt();

        let mut g_hs: Vec<Array1<f64>> = vec![Array1::zeros(h_dim); t_len];
        let mut g_ys: Vec<Array1<f64>> = vec![Array1::zeros(h_dim); t_len];
        let mut g_xs: Vec<Array1<f64>> = vec![Array1::zeros(h_dim); t_len];
        let mut g_qs: Vec<Array1<f64>> = vec![Array1::zeros(cfg.heads * dk); t_len];
        let mut g_ks: Vec<Array1<f64>> = vec![Array1::zeros(cfg.heads * dk); t_len];

        // Output projection and attention.
        for t in 0..t_len {
            acc_outer(&mut grads.wo, &g_outs[t], &tape.concats[t]);
            let g_concat = self.wo.t().dot(&g_outs[t]);
            for head in 0..cfg.heads {
                let g_head = g_concat.slice(ndarray::s![head * vc..(head + 1) * vc]);
                let alpha = &tape.alphas[t][head];
                let mut g_alpha = vec![0.0; t + 1];
                for s in 0..=t {
                    let value = tape.ys[s].slice(ndarray::s![head * vc..(head + 1) * vc]);
                    g_alpha[s] = g_head.dot(&value);
                    g_ys[s]
                        .slice_mut(ndarray::s![head * vc..(head + 1) * vc])
                        .scaled_add(alpha[s], &g_head);
                }
                // Softmax backward.
                let dot: f64 = g_alpha.iter().zip(alpha).map(|(g, a)| g * a).sum();
                for s in 0..=t {
                    let g_logit = alpha[s] * (g_alpha[s] - dot);
                    if g_logit == 0.0 {
                        continue;
                    }
                    let coeff = g_logit * scale;
                    let k = tape.ks[s].slice(ndarray::s![head * dk..(head + 1) * dk]);
                    let q = tape.qs[t].slice(ndarray::s![head * dk..(head + 1) * dk]);
                    g_qs[t]
                        .slice_mut(ndarray::s![head * dk..(head + 1) * dk])
                        .scaled_add(coeff, &k);
                    g_ks[s]
                        .slice_mut(ndarray::s![head * dk..(head + 1) * dk])
                        .scaled_add(coeff, &q);
                }
            }
        }

        // Query/key projections feed the hidden-state adjoints.
        for t in 0..t_len {
            acc_outer(&mut grads.wq, &g_qs[t], &tape.hs[t]);
            g_hs[t] += &self.wq.t().dot(&g_qs[t]);
            acc_outer(&mut grads.wk, &g_ks[t], &tape.hs[t]);
            g_hs[t] += &self.wk.t().dot(&g_ks[t]);
        }

        // Output equation y = C h + D x.
        for t in 0..t_len {
            g_hs[t] += &self.c.t().dot(&g_ys[t]);
            acc_outer(&mut grads.c, &g_ys[t], &tape.hs[t]);
            acc_outer(&mut grads.d, &g_ys[t], &tape.xs[t]);
            g_xs[t] += &self.d.t().dot(&g_ys[t]);
        }

        // Recurrence h_t = A h_{t-1} + B x_t, backward in time.
        let mut carry: Array1<f64> = Array1::zeros(h_dim);
        for t in (0..t_len).rev() {
            let total = &g_hs[t] + &carry;
            if t > 0 {
                acc_outer(&mut grads.a, &total, &tape.hs[t - 1]);
            }
            acc_outer(&mut grads.b, &total, &tape.xs[t]);
            g_xs[t] += &self.b.t().dot(&total);
            carry = self.a.t().dot(&total);
        }

        g_xs
    }
}

impl ParamBlock for SstLayer {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        f("a", TensorRef::M(&self.a));
        f("b", TensorRef::M(&self.b));
        f("c", TensorRef::M(&self.c));
        f("d", TensorRef::M(&self.d));
        f("wq", TensorRef::M(&self.wq));
        f("wk", TensorRef::M(&self.wk));
        f("wo", TensorRef::M(&self.wo));
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        f("a", TensorMut::M(&mut self.a));
        f("b", TensorMut::M(&mut self.b));
        f("c", TensorMut::M(&mut self.c));
        f("d", TensorMut::M(&mut self.d));
        f("wq", TensorMut::M(&mut self.wq));
        f("wk", TensorMut::M(&mut self.wk));
        f("wo", TensorMut::M(&mut self.wo));
    }
}
