//! The actor and critic networks.
//!
//! The actor maps an observation window to a two-component acceleration
//! (longitudinal, lateral), unbounded at the output; the world clamps it.
//! The critic is centralized: it consumes the window plus both agents'
//! actions and returns a scalar value.

use ndarray::Array1;
use rand::Rng;

use super::dense::{Dense, Mlp, MlpTape};
use super::encoder::{EncoderTape, SeqEncoder};
use super::params::{ParamBlock, TensorMut, TensorRef};
use super::{HistoryWindow, NetConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ActorNet {
    pub cfg: NetConfig,
    pub enc: SeqEncoder,
    pub head: Mlp,
}

pub struct ActorTape {
    enc: EncoderTape,
    head: MlpTape,
}

impl ActorTape {
    pub fn recurrence_ops(&self) -> usize {
        self.enc.recurrence_ops()
    }
}

impl ActorNet {
    pub fn init(cfg: &NetConfig, rng: &mut impl Rng) -> Self {
        let mut dims = vec![cfg.hidden_dim];
        dims.extend_from_slice(&cfg.actor_hidden);
        dims.push(cfg.action_dim);
        Self {
            cfg: cfg.clone(),
            enc: SeqEncoder::init(cfg, rng),
            head: Mlp::init(&dims, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut copy = self.clone();
        copy.fill_zero();
        copy
    }

    pub fn forward(&self, window: &HistoryWindow) -> ([f64; 2], ActorTape) {
        let (pooled, enc) = self.enc.forward(&self.cfg, window);
        let (out, head) = self.head.forward(&pooled);
        ([out[0], out[1]], ActorTape { enc, head })
    }

    /// Accumulate parameter gradients for an adjoint on the action output.
    pub fn backward(&self, tape: &ActorTape, g_out: [f64; 2], grads: &mut ActorNet) {
        let g = Array1::from_vec(vec![g_out[0], g_out[1]]);
        let g_pooled = self.head.backward(&tape.head, &g, &mut grads.head);
        self.enc.backward(&self.cfg, &tape.enc, &g_pooled, &mut grads.enc);
    }
}

impl ParamBlock for ActorNet {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        self.enc.for_each(&mut |name, t| f(&format!("enc.{name}"), t));
        self.head.for_each(&mut |name, t| f(&format!("head.{name}"), t));
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        self.enc
            .for_each_mut(&mut |name, t| f(&format!("enc.{name}"), t));
        self.head
            .for_each_mut(&mut |name, t| f(&format!("head.{name}"), t));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticNet {
    pub cfg: NetConfig,
    pub enc: SeqEncoder,
    pub state_enc: Dense,
    pub act_enc: Dense,
    pub head: Mlp,
}

pub struct CriticTape {
    enc: EncoderTape,
    pooled: Array1<f64>,
    actions: Array1<f64>,
    state_pre: Array1<f64>,
    act_pre: Array1<f64>,
    head: MlpTape,
}

impl CriticNet {
    pub fn init(cfg: &NetConfig, rng: &mut impl Rng) -> Self {
        let mut dims = vec![cfg.critic_state_units + cfg.critic_action_units];
        dims.extend_from_slice(&cfg.critic_hidden);
        dims.push(1);
        Self {
            cfg: cfg.clone(),
            enc: SeqEncoder::init(cfg, rng),
            state_enc: Dense::init(cfg.critic_state_units, cfg.hidden_dim, rng),
            act_enc: Dense::init(cfg.critic_action_units, 2 * cfg.action_dim, rng),
            head: Mlp::init(&dims, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut copy = self.clone();
        copy.fill_zero();
        copy
    }

    pub fn forward(
        &self,
        window: &HistoryWindow,
        a_self: [f64; 2],
        a_other: [f64; 2],
    ) -> (f64, CriticTape) {
        let (pooled, enc) = self.enc.forward(&self.cfg, window);
        let actions = Array1::from_vec(vec![a_self[0], a_self[1], a_other[0], a_other[1]]);
        let state_pre = self.state_enc.forward(&pooled);
        let act_pre = self.act_enc.forward(&actions);
        let state_feat = state_pre.mapv(|v| v.max(0.0));
        let act_feat = act_pre.mapv(|v| v.max(0.0));
        let joint = ndarray::concatenate![ndarray::Axis(0), state_feat, act_feat];
        let (out, head) = self.head.forward(&joint);
        (
            out[0],
            CriticTape {
                enc,
                pooled,
                actions,
                state_pre,
                act_pre,
                head,
            },
        )
    }

    /// Full reverse pass; returns gradients with respect to the two action
    /// inputs and accumulates parameter gradients when a slot is given.
    pub fn backward(
        &self,
        tape: &CriticTape,
        g_q: f64,
        mut grads: Option<&mut CriticNet>,
    ) -> ([f64; 2], [f64; 2]) {
        let g_out = Array1::from_vec(vec![g_q]);
        let g_joint = match grads.as_deref_mut() {
            Some(g) => self.head.backward(&tape.head, &g_out, &mut g.head),
            None => {
                // Parameter accumulation skipped: run backward into a scratch
                // gradient to obtain the input adjoint.
                let mut scratch = self.head.clone();
                scratch.fill_zero();
                self.head.backward(&tape.head, &g_out, &mut scratch)
            }
        };
        let su = self.cfg.critic_state_units;
        let g_state_feat = g_joint.slice(ndarray::s![..su]).to_owned();
        let g_act_feat = g_joint.slice(ndarray::s![su..]).to_owned();
        let g_state_pre = ndarray::Zip::from(&g_state_feat)
            .and(&tape.state_pre)
            .map_collect(|g, pre| if *pre > 0.0 { *g } else { 0.0 });
        let g_act_pre = ndarray::Zip::from(&g_act_feat)
            .and(&tape.act_pre)
            .map_collect(|g, pre| if *pre > 0.0 { *g } else { 0.0 });

        let g_actions = match grads.as_deref_mut() {
            Some(g) => {
                let g_pooled = self.state_enc.backward(&tape.pooled, &g_state_pre, &mut g.state_enc);
                self.enc.backward(&self.cfg, &tape.enc, &g_pooled, &mut g.enc);
                self.act_enc.backward(&tape.actions, &g_act_pre, &mut g.act_enc)
            }
            None => self.act_enc.w.t().dot(&g_act_pre),
        };
        (
            [g_actions[0], g_actions[1]],
            [g_actions[2], g_actions[3]],
        )
    }

    /// Gradient of the value with respect to both action inputs only.
    pub fn action_gradients(&self, tape: &CriticTape) -> ([f64; 2], [f64; 2]) {
        self.backward(tape, 1.0, None)
    }
}

impl ParamBlock for CriticNet {
    fn for_each(&self, f: &mut dyn FnMut(&str, TensorRef)) {
        self.enc.for_each(&mut |name, t| f(&format!("enc.{name}"), t));
        self.state_enc
            .for_each(&mut |name, t| f(&format!("state_enc.{name}"), t));
        self.act_enc
            .for_each(&mut |name, t| f(&format!("act_enc.{name}"), t));
        self.head.for_each(&mut |name, t| f(&format!("head.{name}"), t));
    }

    fn for_each_mut(&mut self, f: &mut dyn FnMut(&str, TensorMut)) {
        self.enc
            .for_each_mut(&mut |name, t| f(&format!("enc.{name}"), t));
        self.state_enc
            .for_each_mut(&mut |name, t| f(&format!("state_enc.{name}"), t));
        self.act_enc
            .for_each_mut(&mut |name, t| f(&format!("act_enc.{name}"), t));
        self.head
            .for_each_mut(&mut |name, t| f(&format!("head.{name}"), t));
    }
}
