//! Differentiable building blocks: attention, GRU cells, the region
//! encoder, the sentence-level decoder step, the retrieval head, and the
//! word generator step.
//!
//! A [`Forward`] owns one tape and the node ids of every registered
//! parameter, so a whole episode (or a teacher-forced pass) is recorded
//! as a single graph and differentiated with one backward call.

use std::collections::BTreeMap;

use crate::error::NumericsError;
use crate::numerics::{Array, NodeId, Tape};

use super::params::{Dims, ModelParameters};

pub struct Forward {
    pub tape: Tape,
    pub dims: Dims,
    nodes: BTreeMap<String, NodeId>,
}

/// Region features after encoding, plus the per-head attention
/// projections which depend only on the regions and are shared by every
/// step on the tape.
pub struct EncodedRegions {
    /// Projected region grid, shape `[regions, d_hidden]`.
    pub regions: NodeId,
    /// Mean-pooled visual summary, shape `[d_hidden]`.
    pub pooled: NodeId,
    proj_sent: NodeId,
    proj_gen: NodeId,
}

/// Recurrent state of the two-layer sentence decoder.
pub struct TopicHidden {
    pub h0: NodeId,
    pub h1: NodeId,
}

/// One sentence-decoder step: the topic vector and the stop gate.
pub struct TopicStep {
    /// Topic vector `q`, shape `[d_embed]`.
    pub q: NodeId,
    /// Stop probability in (0, 1), shape `[1]`.
    pub z: NodeId,
}

impl Forward {
    /// Start a fresh tape with every model parameter registered as a leaf.
    pub fn new(params: &ModelParameters) -> Self {
        let mut tape = Tape::new();
        let mut nodes = BTreeMap::new();
        for (name, value) in &params.params {
            nodes.insert(name.clone(), tape.param(name, value));
        }
        Forward { tape, dims: params.dims, nodes }
    }

    /// Node id of a registered parameter.
    pub fn node(&self, name: &str) -> NodeId {
        *self
            .nodes
            .get(name)
            .unwrap_or_else(|| panic!("parameter {name} not registered on tape"))
    }

    pub fn zeros(&mut self, dim: usize) -> NodeId {
        self.tape.input(Array::zeros(&[dim]))
    }

    /// `W x + b` for a vector `x`.
    pub fn linear(&mut self, w: &str, b: &str, x: NodeId) -> Result<NodeId, NumericsError> {
        let wx = self.tape.matmul(self.node(w), x)?;
        self.tape.add(wx, self.node(b))
    }

    /// Log-probability of entry `index` of a probability vector.
    pub fn logprob(&mut self, probs: NodeId, index: usize) -> Result<NodeId, NumericsError> {
        let p = self.tape.pick(probs, index)?;
        Ok(self.tape.log(p))
    }

    /// Log-probability of the complementary event `1 - p` for a `[1]` node.
    pub fn log_one_minus(&mut self, p: NodeId) -> NodeId {
        let q = self.tape.affine(p, -1.0, 1.0);
        self.tape.log(q)
    }

    /// Gated recurrent cell (reset/update/candidate convention:
    /// `h' = (1 - z) * n + z * h`). Parameters live under `prefix`.
    pub fn gru_step(
        &mut self,
        prefix: &str,
        x: NodeId,
        h: NodeId,
    ) -> Result<NodeId, NumericsError> {
        let gate = |fw: &mut Self, g: &str, inp: NodeId, hid: NodeId| {
            let ix = fw.linear(&format!("{prefix}.w_i{g}"), &format!("{prefix}.b_i{g}"), inp)?;
            let hx = fw.linear(&format!("{prefix}.w_h{g}"), &format!("{prefix}.b_h{g}"), hid)?;
            fw.tape.add(ix, hx)
        };
        let r_pre = gate(self, "r", x, h)?;
        let r = self.tape.sigmoid(r_pre);
        let z_pre = gate(self, "z", x, h)?;
        let z = self.tape.sigmoid(z_pre);

        let n_in = self.linear(&format!("{prefix}.w_in"), &format!("{prefix}.b_in"), x)?;
        let n_hid = self.linear(&format!("{prefix}.w_hn"), &format!("{prefix}.b_hn"), h)?;
        let gated = self.tape.mul(r, n_hid)?;
        let n_pre = self.tape.add(n_in, gated)?;
        let n = self.tape.tanh(n_pre);

        let keep = self.tape.mul(z, h)?;
        let one_minus_z = self.tape.affine(z, -1.0, 1.0);
        let fresh = self.tape.mul(one_minus_z, n)?;
        self.tape.add(fresh, keep)
    }

    /// Project raw region features (`[regions, d_feat]`) into the hidden
    /// space and pre-compute the attention projections for both heads.
    pub fn encode(&mut self, features: &Array) -> Result<EncodedRegions, NumericsError> {
        if features.shape() != [self.dims.regions, self.dims.d_feat] {
            return Err(NumericsError::ShapeMismatch {
                op: "encode",
                details: format!(
                    "feature grid {:?} does not match model regions×feat [{}, {}]",
                    features.shape(),
                    self.dims.regions,
                    self.dims.d_feat
                ),
            });
        }
        let raw = self.tape.input(features.clone());
        let projected = self.tape.matmul(raw, self.node("enc.w"))?;
        let shifted = self.tape.add_row_broadcast(projected, self.node("enc.b"))?;
        let regions = self.tape.tanh(shifted);
        let pooled = self.tape.mean_rows(regions)?;
        let proj_sent = self.tape.matmul(regions, self.node("sent.att.w_v"))?;
        let proj_gen = self.tape.matmul(regions, self.node("gen.att.w_v"))?;
        Ok(EncodedRegions { regions, pooled, proj_sent, proj_gen })
    }

    /// Additive attention over the encoded regions. `proj` is the cached
    /// `regions @ w_v` for the head identified by `prefix`.
    fn attend(
        &mut self,
        prefix: &str,
        enc_regions: NodeId,
        proj: NodeId,
        query: NodeId,
    ) -> Result<NodeId, NumericsError> {
        let wq = self.tape.matmul(self.node(&format!("{prefix}.w_h")), query)?;
        let pre = self.tape.add_row_broadcast(proj, wq)?;
        let act = self.tape.tanh(pre);
        let scores = self.tape.matmul(act, self.node(&format!("{prefix}.v")))?;
        let weights = self.tape.softmax_lastdim(scores)?;
        self.tape.matmul(weights, enc_regions)
    }

    /// Fresh all-zero sentence-decoder state.
    pub fn topic_hidden(&mut self) -> TopicHidden {
        TopicHidden { h0: self.zeros(self.dims.d_hidden), h1: self.zeros(self.dims.d_hidden) }
    }

    /// Advance the sentence decoder one step: attend with the previous
    /// top-layer hidden state, run both GRU layers, and emit the topic
    /// vector and stop probability.
    pub fn topic_step(
        &mut self,
        enc: &EncodedRegions,
        state: &mut TopicHidden,
    ) -> Result<TopicStep, NumericsError> {
        let context = self.attend("sent.att", enc.regions, enc.proj_sent, state.h1)?;
        let h0 = self.gru_step("sent.gru0", context, state.h0)?;
        let h1 = self.gru_step("sent.gru1", h0, state.h1)?;
        state.h0 = h0;
        state.h1 = h1;
        let q_pre = self.linear("sent.w_q", "sent.b_q", h1)?;
        let q = self.tape.tanh(q_pre);
        let z_pre = self.linear("sent.w_z", "sent.b_z", h1)?;
        let z = self.tape.sigmoid(z_pre);
        Ok(TopicStep { q, z })
    }

    /// Distribution over retrieval actions (index 0 = generate, index
    /// `k >= 1` = template group `k`).
    pub fn action_probs(&mut self, q: NodeId) -> Result<NodeId, NumericsError> {
        let logits = self.linear("pol.w_u", "pol.b_u", q)?;
        self.tape.softmax_lastdim(logits)
    }

    /// One word-generator step. Returns the next-token distribution
    /// (shape `[vocab]`) and the new generator hidden state.
    pub fn gen_step(
        &mut self,
        enc: &EncodedRegions,
        topic: NodeId,
        prev_token: u32,
        h: NodeId,
    ) -> Result<(NodeId, NodeId), NumericsError> {
        let e_prev = self.tape.embedding_lookup(self.node("gen.w_e"), prev_token as usize)?;
        let query = self.tape.concat(&[e_prev, topic, h])?;
        let context = self.attend("gen.att", enc.regions, enc.proj_gen, query)?;
        let x = self.tape.concat(&[context, e_prev, topic])?;
        let h_next = self.gru_step("gen.gru0", x, h)?;
        let logits = self.linear("gen.w_y", "gen.b_y", h_next)?;
        let probs = self.tape.softmax_lastdim(logits)?;
        Ok((probs, h_next))
    }
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
