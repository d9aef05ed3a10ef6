//! Model dimensions, named parameters, and initialization.
//!
//! All learnable tensors live in one `BTreeMap<String, Array>` keyed by
//! dotted names (`enc.*`, `sent.*`, `pol.*`, `gen.*`), which keeps
//! iteration order, checkpoints, and optimizer state deterministic.
//!
//! Orientation convention: matrices applied to a single vector are stored
//! `[out, in]` and left-multiply (`W x`); the two matrices applied to a
//! whole grid of region row-vectors (`enc.w`, `*.att.w_v`) are stored
//! `[in, out]` and right-multiply (`R W`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numerics::{Array, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    /// Hidden width of recurrent cells, attention, and region projections.
    pub d_hidden: usize,
    /// Width of word embeddings and the topic vector.
    pub d_embed: usize,
    /// Number of feature regions per sample.
    pub regions: usize,
    /// Raw feature channels per region.
    pub d_feat: usize,
    pub vocab_size: usize,
    /// Number of template groups (retrieval actions are 0..=n_templates).
    pub n_templates: usize,
}

impl Dims {
    /// Desk-scale defaults; larger widths are config-selectable.
    pub fn desk(vocab_size: usize, n_templates: usize) -> Self {
        Dims {
            d_hidden: 64,
            d_embed: 64,
            regions: 16,
            d_feat: 32,
            vocab_size,
            n_templates,
        }
    }

    /// Miniature dimensions for gradient checks.
    pub fn tiny(vocab_size: usize, n_templates: usize) -> Self {
        Dims {
            d_hidden: 8,
            d_embed: 8,
            regions: 4,
            d_feat: 5,
            vocab_size,
            n_templates,
        }
    }

    pub fn n_actions(&self) -> usize {
        1 + self.n_templates
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hidden={} embed={} regions={} feat={} vocab={} templates={}",
            self.d_hidden, self.d_embed, self.regions, self.d_feat, self.vocab_size,
            self.n_templates
        )
    }
}

/// GRU gate names; each cell owns input and hidden weights plus biases
/// for the reset, update, and candidate gates.
pub const GRU_GATES: [&str; 3] = ["r", "z", "n"];

#[derive(Debug, Clone)]
pub struct ModelParameters {
    pub dims: Dims,
    pub params: BTreeMap<String, Array>,
}

impl ModelParameters {
    /// Random initialization: weights uniform in ±1/sqrt(fan_in), word
    /// embeddings uniform in ±0.1, biases zero.
    pub fn init(dims: Dims, rng: &mut Rng) -> Self {
        let mut params = BTreeMap::new();
        for (name, shape, fan_in) in Self::schema_entries(&dims) {
            let n: usize = shape.iter().product();
            let arr = if name == "gen.w_e" {
                Array::new(shape, (0..n).map(|_| rng.uniform(-0.1, 0.1)).collect()).unwrap()
            } else if name.contains(".b_") {
                Array::zeros(&shape)
            } else {
                let s = 1.0 / (fan_in as f64).sqrt();
                Array::new(shape, (0..n).map(|_| rng.uniform(-s, s)).collect()).unwrap()
            };
            params.insert(name, arr);
        }
        ModelParameters { dims, params }
    }

    /// Full parameter schema: (name, shape, fan_in).
    pub fn schema_entries(dims: &Dims) -> Vec<(String, Vec<usize>, usize)> {
        let h = dims.d_hidden;
        let e = dims.d_embed;
        let f = dims.d_feat;
        let v = dims.vocab_size;
        let a = dims.n_actions();
        let mut out: Vec<(String, Vec<usize>, usize)> = Vec::new();

        // Encoder: right-multiplies the region grid.
        out.push(("enc.w".into(), vec![f, h], f));
        out.push(("enc.b".into(), vec![h], h));

        // Additive attention for the sentence decoder (query: top hidden).
        push_attention(&mut out, "sent.att", h, h, h);
        // Two stacked GRU layers; layer 0 consumes the context vector.
        push_gru(&mut out, "sent.gru0", h, h);
        push_gru(&mut out, "sent.gru1", h, h);
        out.push(("sent.w_q".into(), vec![e, h], h));
        out.push(("sent.b_q".into(), vec![e], e));
        out.push(("sent.w_z".into(), vec![1, h], h));
        out.push(("sent.b_z".into(), vec![1], 1));

        // Retrieval policy over 1 + n_templates actions.
        out.push(("pol.w_u".into(), vec![a, e], e));
        out.push(("pol.b_u".into(), vec![a], a));

        // Word generator: attention query is [e_prev; q; h_g].
        push_attention(&mut out, "gen.att", h, 2 * e + h, h);
        // GRU input is [c_g; e_prev; q].
        push_gru(&mut out, "gen.gru0", h + 2 * e, h);
        out.push(("gen.w_y".into(), vec![v, h], h));
        out.push(("gen.b_y".into(), vec![v], v));
        out.push(("gen.w_e".into(), vec![v, e], e));
        out
    }

    /// Names of the retrieval-policy parameter subset.
    pub fn policy_param_names() -> &'static [&'static str] {
        &["pol.w_u", "pol.b_u"]
    }

    pub fn is_generation_param(name: &str) -> bool {
        name.starts_with("gen.")
    }

    pub fn is_policy_param(name: &str) -> bool {
        name.starts_with("pol.")
    }

    pub fn is_stop_param(name: &str) -> bool {
        name == "sent.w_z" || name == "sent.b_z"
    }

    pub fn get(&self, name: &str) -> &Array {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
    }
}

fn push_attention(
    out: &mut Vec<(String, Vec<usize>, usize)>,
    prefix: &str,
    region_dim: usize,
    query_dim: usize,
    att_dim: usize,
) {
    // w_v right-multiplies the region grid; w_h left-multiplies the query.
    out.push((format!("{prefix}.w_v"), vec![region_dim, att_dim], region_dim));
    out.push((format!("{prefix}.w_h"), vec![att_dim, query_dim], query_dim));
    out.push((format!("{prefix}.v"), vec![att_dim], att_dim));
}

fn push_gru(out: &mut Vec<(String, Vec<usize>, usize)>, prefix: &str, in_dim: usize, h: usize) {
    for gate in GRU_GATES {
        out.push((format!("{prefix}.w_i{gate}"), vec![h, in_dim], in_dim));
        out.push((format!("{prefix}.w_h{gate}"), vec![h, h], h));
        out.push((format!("{prefix}.b_i{gate}"), vec![h], h));
        out.push((format!("{prefix}.b_h{gate}"), vec![h], h));
    }
}
