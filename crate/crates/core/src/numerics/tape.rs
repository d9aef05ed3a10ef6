//! Reverse-mode automatic differentiation over dense arrays.
//!
//! A [`Tape`] records every operation of a forward pass into a flat arena;
//! [`Tape::backward`] replays the records in reverse and accumulates
//! gradients for every registered parameter. One tape serves one forward
//! pass; separate samples use separate tapes.

use std::collections::BTreeMap;

use crate::error::NumericsError;
use crate::numerics::Array;

/// Index of a node in the tape arena.
pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Concat(Vec<NodeId>),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    SoftmaxLastDim(NodeId),
    EmbeddingLookup { table: NodeId, row: usize },
    MeanRows(NodeId),
    AddRowBroadcast { matrix: NodeId, row: NodeId },
    Log(NodeId),
    Pick { input: NodeId, index: usize },
    Sum(NodeId),
    // The shift constant never appears in the derivative, so only the
    // scale is retained for the backward pass.
    Affine { input: NodeId, scale: f64 },
}

struct Node {
    op: Op,
    value: Array,
}

/// Operation kinds accepted by [`Tape::forward_op`]. Kinds that need extra
/// structure (an embedding row, a pick index, affine coefficients) carry it
/// inline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Matmul,
    Add,
    ElementwiseMul,
    Concat,
    Sigmoid,
    Tanh,
    Relu,
    SoftmaxLastDim,
    EmbeddingLookup { row: usize },
    MeanRows,
    AddRowBroadcast,
    Log,
    Pick { index: usize },
    Sum,
    Affine { scale: f64, shift: f64 },
}

/// Named gradients produced by a backward pass. Every parameter registered
/// on the tape has an entry; parameters unreachable from the loss hold
/// zeros.
#[derive(Debug, Clone, Default)]
pub struct Gradients {
    map: BTreeMap<String, Array>,
}

impl Gradients {
    pub fn get(&self, name: &str) -> Option<&Array> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Array)> {
        self.map.iter()
    }

    pub fn insert(&mut self, name: String, grad: Array) {
        self.map.insert(name, grad);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Accumulate `scale * other` into self. Missing entries are adopted.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (name, grad) in &other.map {
            match self.map.get_mut(name) {
                Some(acc) => {
                    for (a, g) in acc.data_mut().iter_mut().zip(grad.data()) {
                        *a += scale * g;
                    }
                }
                None => {
                    let mut g = grad.clone();
                    for v in g.data_mut() {
                        *v *= scale;
                    }
                    self.map.insert(name.clone(), g);
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for grad in self.map.values_mut() {
            for v in grad.data_mut() {
                *v *= s;
            }
        }
    }

    /// Zero every gradient whose name fails the predicate. Used to restrict
    /// an update to a named parameter subset.
    pub fn zero_except(&mut self, keep: impl Fn(&str) -> bool) {
        for (name, grad) in self.map.iter_mut() {
            if !keep(name) {
                for v in grad.data_mut() {
                    *v = 0.0;
                }
            }
        }
    }

    /// Euclidean norm over all entries, as one flattened vector.
    pub fn global_norm(&self) -> f64 {
        self.map
            .values()
            .map(|g| g.data().iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// Records a forward computation and differentiates it in reverse.
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<(String, NodeId)>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            params: Vec::new(),
        }
    }

    fn push(&mut self, op: Op, value: Array) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { op, value });
        id
    }

    /// Register a named parameter; its data is snapshotted onto the tape.
    pub fn param(&mut self, name: &str, value: &Array) -> NodeId {
        let id = self.push(Op::Leaf, value.clone());
        self.params.push((name.to_string(), id));
        id
    }

    /// Register a non-parameter input (constant with respect to gradients).
    pub fn input(&mut self, value: Array) -> NodeId {
        self.push(Op::Leaf, value)
    }

    pub fn value(&self, id: NodeId) -> &Array {
        &self.nodes[id].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn shape_err(op: &'static str, details: String) -> NumericsError {
        NumericsError::ShapeMismatch { op, details }
    }

    /// Matrix product with vector promotion: [m,k]x[k,n], [m,k]x[k],
    /// [k]x[k,n], and [k]x[k] (dot product) are all accepted.
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (av, bv) = (&self.nodes[a].value, &self.nodes[b].value);
        let value = matmul_forward(av, bv)?;
        Ok(self.push(Op::Matmul(a, b), value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (av, bv) = (&self.nodes[a].value, &self.nodes[b].value);
        if av.shape() != bv.shape() {
            return Err(Self::shape_err(
                "add",
                format!("{:?} vs {:?}", av.shape(), bv.shape()),
            ));
        }
        let data = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(x, y)| x + y)
            .collect();
        let value = Array::new(av.shape().to_vec(), data)?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericsError> {
        let (av, bv) = (&self.nodes[a].value, &self.nodes[b].value);
        if av.shape() != bv.shape() {
            return Err(Self::shape_err(
                "elementwise_mul",
                format!("{:?} vs {:?}", av.shape(), bv.shape()),
            ));
        }
        let data = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(x, y)| x * y)
            .collect();
        let value = Array::new(av.shape().to_vec(), data)?;
        Ok(self.push(Op::Mul(a, b), value))
    }

    /// Concatenate 1-D vectors.
    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId, NumericsError> {
        if parts.is_empty() {
            return Err(Self::shape_err("concat", "no inputs".into()));
        }
        let mut data = Vec::new();
        for &p in parts {
            let v = &self.nodes[p].value;
            if v.ndim() != 1 {
                return Err(Self::shape_err(
                    "concat",
                    format!("expected 1-D inputs, got {:?}", v.shape()),
                ));
            }
            data.extend_from_slice(v.data());
        }
        let value = Array::vector(data);
        Ok(self.push(Op::Concat(parts.to_vec()), value))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let value = self.map_unary(x, |v| 1.0 / (1.0 + (-v).exp()));
        self.push(Op::Sigmoid(x), value)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let value = self.map_unary(x, |v| v.tanh());
        self.push(Op::Tanh(x), value)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let value = self.map_unary(x, |v| if v > 0.0 { v } else { 0.0 });
        self.push(Op::Relu(x), value)
    }

    pub fn log(&mut self, x: NodeId) -> NodeId {
        let value = self.map_unary(x, |v| v.ln());
        self.push(Op::Log(x), value)
    }

    pub fn affine(&mut self, x: NodeId, scale: f64, shift: f64) -> NodeId {
        let value = self.map_unary(x, |v| scale * v + shift);
        self.push(Op::Affine { input: x, scale }, value)
    }

    fn map_unary(&self, x: NodeId, f: impl Fn(f64) -> f64) -> Array {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|&e| f(e)).collect();
        Array::new(v.shape().to_vec(), data).expect("unary op preserves shape")
    }

    /// Softmax along the last dimension of a 1-D or 2-D array.
    pub fn softmax_lastdim(&mut self, x: NodeId) -> Result<NodeId, NumericsError> {
        let v = &self.nodes[x].value;
        if v.ndim() > 2 || v.is_empty() {
            return Err(Self::shape_err(
                "softmax_lastdim",
                format!("expected non-empty 1-D or 2-D, got {:?}", v.shape()),
            ));
        }
        let cols = v.last_dim();
        let mut data = v.data().to_vec();
        for row in data.chunks_mut(cols) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for e in row.iter_mut() {
                *e = (*e - max).exp();
                total += *e;
            }
            for e in row.iter_mut() {
                *e /= total;
            }
        }
        let value = Array::new(v.shape().to_vec(), data)?;
        Ok(self.push(Op::SoftmaxLastDim(x), value))
    }

    /// Row `row` of a 2-D embedding table.
    pub fn embedding_lookup(&mut self, table: NodeId, row: usize) -> Result<NodeId, NumericsError> {
        let t = &self.nodes[table].value;
        if t.ndim() != 2 {
            return Err(Self::shape_err(
                "embedding_lookup",
                format!("table must be 2-D, got {:?}", t.shape()),
            ));
        }
        if row >= t.shape()[0] {
            return Err(Self::shape_err(
                "embedding_lookup",
                format!("row {} out of range for table {:?}", row, t.shape()),
            ));
        }
        let cols = t.shape()[1];
        let data = t.data()[row * cols..(row + 1) * cols].to_vec();
        let value = Array::vector(data);
        Ok(self.push(Op::EmbeddingLookup { table, row }, value))
    }

    /// Mean over the rows of a 2-D array, yielding a vector.
    pub fn mean_rows(&mut self, m: NodeId) -> Result<NodeId, NumericsError> {
        let v = &self.nodes[m].value;
        if v.ndim() != 2 || v.shape()[0] == 0 {
            return Err(Self::shape_err(
                "mean_rows",
                format!("expected non-empty 2-D, got {:?}", v.shape()),
            ));
        }
        let (rows, cols) = (v.shape()[0], v.shape()[1]);
        let mut data = vec![0.0; cols];
        for r in 0..rows {
            for (acc, x) in data.iter_mut().zip(&v.data()[r * cols..(r + 1) * cols]) {
                *acc += x;
            }
        }
        for e in data.iter_mut() {
            *e /= rows as f64;
        }
        Ok(self.push(Op::MeanRows(m), Array::vector(data)))
    }

    /// Add a vector to every row of a matrix.
    pub fn add_row_broadcast(
        &mut self,
        matrix: NodeId,
        row: NodeId,
    ) -> Result<NodeId, NumericsError> {
        let (mv, rv) = (&self.nodes[matrix].value, &self.nodes[row].value);
        if mv.ndim() != 2 || rv.ndim() != 1 || mv.shape()[1] != rv.shape()[0] {
            return Err(Self::shape_err(
                "add_row_broadcast",
                format!("{:?} vs row {:?}", mv.shape(), rv.shape()),
            ));
        }
        let cols = mv.shape()[1];
        let mut data = mv.data().to_vec();
        for chunk in data.chunks_mut(cols) {
            for (e, r) in chunk.iter_mut().zip(rv.data()) {
                *e += r;
            }
        }
        let value = Array::new(mv.shape().to_vec(), data)?;
        Ok(self.push(Op::AddRowBroadcast { matrix, row }, value))
    }

    /// Select a single element of a vector as a scalar node.
    pub fn pick(&mut self, input: NodeId, index: usize) -> Result<NodeId, NumericsError> {
        let v = &self.nodes[input].value;
        if v.ndim() != 1 || index >= v.len() {
            return Err(Self::shape_err(
                "pick",
                format!("index {} in {:?}", index, v.shape()),
            ));
        }
        let value = Array::scalar(v.data()[index]);
        Ok(self.push(Op::Pick { input, index }, value))
    }

    /// Sum of all elements as a scalar node.
    pub fn sum(&mut self, input: NodeId) -> NodeId {
        let v = &self.nodes[input].value;
        let total = v.data().iter().sum();
        self.push(Op::Sum(input), Array::scalar(total))
    }

    /// Uniform entry point addressing ops by kind; used by the property
    /// tests that sweep every op.
    pub fn forward_op(&mut self, kind: OpKind, inputs: &[NodeId]) -> Result<NodeId, NumericsError> {
        let arity_err = |want: usize| {
            Self::shape_err("forward_op", format!("{kind:?} wants {want} inputs, got {}", inputs.len()))
        };
        match kind {
            OpKind::Matmul => {
                if inputs.len() != 2 {
                    return Err(arity_err(2));
                }
                self.matmul(inputs[0], inputs[1])
            }
            OpKind::Add => {
                if inputs.len() != 2 {
                    return Err(arity_err(2));
                }
                self.add(inputs[0], inputs[1])
            }
            OpKind::ElementwiseMul => {
                if inputs.len() != 2 {
                    return Err(arity_err(2));
                }
                self.mul(inputs[0], inputs[1])
            }
            OpKind::Concat => self.concat(inputs),
            OpKind::Sigmoid => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.sigmoid(inputs[0]))
            }
            OpKind::Tanh => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.tanh(inputs[0]))
            }
            OpKind::Relu => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.relu(inputs[0]))
            }
            OpKind::SoftmaxLastDim => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                self.softmax_lastdim(inputs[0])
            }
            OpKind::EmbeddingLookup { row } => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                self.embedding_lookup(inputs[0], row)
            }
            OpKind::MeanRows => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                self.mean_rows(inputs[0])
            }
            OpKind::AddRowBroadcast => {
                if inputs.len() != 2 {
                    return Err(arity_err(2));
                }
                self.add_row_broadcast(inputs[0], inputs[1])
            }
            OpKind::Log => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.log(inputs[0]))
            }
            OpKind::Pick { index } => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                self.pick(inputs[0], index)
            }
            OpKind::Sum => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.sum(inputs[0]))
            }
            OpKind::Affine { scale, shift } => {
                if inputs.len() != 1 {
                    return Err(arity_err(1));
                }
                Ok(self.affine(inputs[0], scale, shift))
            }
        }
    }

    /// Backward pass from a scalar loss node. Returns gradients for every
    /// registered parameter (zeros where the loss does not reach).
    pub fn backward(&self, loss: NodeId) -> Result<Gradients, NumericsError> {
        let loss_shape = self.nodes[loss].value.shape();
        if self.nodes[loss].value.len() != 1 {
            return Err(NumericsError::NonScalarLoss {
                shape: loss_shape.to_vec(),
            });
        }

        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss] = Some(vec![1.0]);

        for id in (0..=loss).rev() {
            let Some(dout) = grads[id].take() else {
                continue;
            };
            // Re-stash so multiple fan-ins already accumulated stay intact
            // for later reads; leaves keep theirs for parameter collection.
            let node = &self.nodes[id];
            self.backprop_node(id, &dout, &mut grads);
            if matches!(node.op, Op::Leaf) {
                grads[id] = Some(dout);
            }
        }

        let mut out = Gradients::default();
        for (name, id) in &self.params {
            let shape = self.nodes[*id].value.shape().to_vec();
            let grad = match &grads[*id] {
                Some(g) => Array::new(shape, g.clone())?,
                None => Array::zeros(&shape),
            };
            out.insert(name.clone(), grad);
        }
        Ok(out)
    }

    fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, len: usize, f: impl FnOnce(&mut [f64])) {
        let slot = grads[id].get_or_insert_with(|| vec![0.0; len]);
        f(slot);
    }

    fn backprop_node(&self, id: NodeId, dout: &[f64], grads: &mut [Option<Vec<f64>>]) {
        match &self.nodes[id].op {
            Op::Leaf => {}
            Op::Matmul(a, b) => {
                let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                let (da, db) = matmul_backward(av, bv, dout);
                Self::accumulate(grads, *a, av.len(), |g| {
                    for (x, y) in g.iter_mut().zip(&da) {
                        *x += y;
                    }
                });
                Self::accumulate(grads, *b, bv.len(), |g| {
                    for (x, y) in g.iter_mut().zip(&db) {
                        *x += y;
                    }
                });
            }
            Op::Add(a, b) => {
                for &side in &[*a, *b] {
                    Self::accumulate(grads, side, dout.len(), |g| {
                        for (x, y) in g.iter_mut().zip(dout) {
                            *x += y;
                        }
                    });
                }
            }
            Op::Mul(a, b) => {
                let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                Self::accumulate(grads, *a, av.len(), |g| {
                    for ((x, y), bvv) in g.iter_mut().zip(dout).zip(bv.data()) {
                        *x += y * bvv;
                    }
                });
                Self::accumulate(grads, *b, bv.len(), |g| {
                    for ((x, y), avv) in g.iter_mut().zip(dout).zip(av.data()) {
                        *x += y * avv;
                    }
                });
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.nodes[p].value.len();
                    let slice = &dout[offset..offset + len];
                    Self::accumulate(grads, p, len, |g| {
                        for (x, y) in g.iter_mut().zip(slice) {
                            *x += y;
                        }
                    });
                    offset += len;
                }
            }
            Op::Sigmoid(x) => {
                let yv = &self.nodes[id].value;
                Self::accumulate(grads, *x, yv.len(), |g| {
                    for ((gx, d), y) in g.iter_mut().zip(dout).zip(yv.data()) {
                        *gx += d * y * (1.0 - y);
                    }
                });
            }
            Op::Tanh(x) => {
                let yv = &self.nodes[id].value;
                Self::accumulate(grads, *x, yv.len(), |g| {
                    for ((gx, d), y) in g.iter_mut().zip(dout).zip(yv.data()) {
                        *gx += d * (1.0 - y * y);
                    }
                });
            }
            Op::Relu(x) => {
                let xv = &self.nodes[*x].value;
                Self::accumulate(grads, *x, xv.len(), |g| {
                    for ((gx, d), xin) in g.iter_mut().zip(dout).zip(xv.data()) {
                        if *xin > 0.0 {
                            *gx += d;
                        }
                    }
                });
            }
            Op::SoftmaxLastDim(x) => {
                let yv = &self.nodes[id].value;
                let cols = yv.last_dim();
                Self::accumulate(grads, *x, yv.len(), |g| {
                    for ((grow, drow), yrow) in g
                        .chunks_mut(cols)
                        .zip(dout.chunks(cols))
                        .zip(yv.data().chunks(cols))
                    {
                        let dot: f64 = drow.iter().zip(yrow).map(|(d, y)| d * y).sum();
                        for ((gx, d), y) in grow.iter_mut().zip(drow).zip(yrow) {
                            *gx += y * (d - dot);
                        }
                    }
                });
            }
            Op::EmbeddingLookup { table, row } => {
                let tv = &self.nodes[*table].value;
                let cols = tv.shape()[1];
                let row = *row;
                Self::accumulate(grads, *table, tv.len(), |g| {
                    for (gx, d) in g[row * cols..(row + 1) * cols].iter_mut().zip(dout) {
                        *gx += d;
                    }
                });
            }
            Op::MeanRows(m) => {
                let mv = &self.nodes[*m].value;
                let (rows, cols) = (mv.shape()[0], mv.shape()[1]);
                let inv = 1.0 / rows as f64;
                Self::accumulate(grads, *m, mv.len(), |g| {
                    for chunk in g.chunks_mut(cols) {
                        for (gx, d) in chunk.iter_mut().zip(dout) {
                            *gx += d * inv;
                        }
                    }
                });
            }
            Op::AddRowBroadcast { matrix, row } => {
                let mv = &self.nodes[*matrix].value;
                let cols = mv.shape()[1];
                Self::accumulate(grads, *matrix, mv.len(), |g| {
                    for (x, y) in g.iter_mut().zip(dout) {
                        *x += y;
                    }
                });
                let rv = &self.nodes[*row].value;
                Self::accumulate(grads, *row, rv.len(), |g| {
                    for chunk in dout.chunks(cols) {
                        for (gx, d) in g.iter_mut().zip(chunk) {
                            *gx += d;
                        }
                    }
                });
            }
            Op::Log(x) => {
                let xv = &self.nodes[*x].value;
                Self::accumulate(grads, *x, xv.len(), |g| {
                    for ((gx, d), xin) in g.iter_mut().zip(dout).zip(xv.data()) {
                        *gx += d / xin;
                    }
                });
            }
            Op::Pick { input, index } => {
                let xv = &self.nodes[*input].value;
                let index = *index;
                Self::accumulate(grads, *input, xv.len(), |g| {
                    g[index] += dout[0];
                });
            }
            Op::Sum(input) => {
                let xv = &self.nodes[*input].value;
                Self::accumulate(grads, *input, xv.len(), |g| {
                    for gx in g.iter_mut() {
                        *gx += dout[0];
                    }
                });
            }
            Op::Affine { input, scale } => {
                let xv = &self.nodes[*input].value;
                let scale = *scale;
                Self::accumulate(grads, *input, xv.len(), |g| {
                    for (gx, d) in g.iter_mut().zip(dout) {
                        *gx += d * scale;
                    }
                });
            }
        }
    }
}

fn matmul_forward(a: &Array, b: &Array) -> Result<Array, NumericsError> {
    let err = |details: String| NumericsError::ShapeMismatch {
        op: "matmul",
        details,
    };
    match (a.ndim(), b.ndim()) {
        (2, 2) => {
            let (m, k) = (a.shape()[0], a.shape()[1]);
            let (k2, n) = (b.shape()[0], b.shape()[1]);
            if k != k2 {
                return Err(err(format!("{:?} x {:?}", a.shape(), b.shape())));
            }
            let mut out = vec![0.0; m * n];
            matmul_kernel(a.data(), b.data(), m, k, n, &mut out);
            Array::new(vec![m, n], out)
        }
        (2, 1) => {
            let (m, k) = (a.shape()[0], a.shape()[1]);
            if k != b.shape()[0] {
                return Err(err(format!("{:?} x {:?}", a.shape(), b.shape())));
            }
            let mut out = vec![0.0; m];
            for i in 0..m {
                out[i] = dot(&a.data()[i * k..(i + 1) * k], b.data());
            }
            Ok(Array::vector(out))
        }
        (1, 2) => {
            let k = a.shape()[0];
            let (k2, n) = (b.shape()[0], b.shape()[1]);
            if k != k2 {
                return Err(err(format!("{:?} x {:?}", a.shape(), b.shape())));
            }
            let mut out = vec![0.0; n];
            matmul_kernel(a.data(), b.data(), 1, k, n, &mut out);
            Ok(Array::vector(out))
        }
        (1, 1) => {
            if a.len() != b.len() {
                return Err(err(format!("{:?} x {:?}", a.shape(), b.shape())));
            }
            Ok(Array::scalar(dot(a.data(), b.data())))
        }
        _ => Err(err(format!(
            "unsupported ranks {:?} x {:?}",
            a.shape(),
            b.shape()
        ))),
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// C += A * B with A: m x k, B: k x n, in i-k-j order for contiguous access.
fn matmul_kernel(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (kk, &av) in arow.iter().enumerate() {
            if av != 0.0 {
                let brow = &b[kk * n..(kk + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += av * bv;
                }
            }
        }
    }
}

/// Returns (dA, dB) flat buffers for the four matmul rank combinations.
fn matmul_backward(a: &Array, b: &Array, dout: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match (a.ndim(), b.ndim()) {
        (2, 2) => {
            let (m, k) = (a.shape()[0], a.shape()[1]);
            let n = b.shape()[1];
            // dA = dout * B^T
            let mut da = vec![0.0; m * k];
            for i in 0..m {
                let drow = &dout[i * n..(i + 1) * n];
                let darow = &mut da[i * k..(i + 1) * k];
                for kk in 0..k {
                    darow[kk] = dot(drow, &b.data()[kk * n..(kk + 1) * n]);
                }
            }
            // dB = A^T * dout
            let mut db = vec![0.0; k * n];
            for i in 0..m {
                let arow = &a.data()[i * k..(i + 1) * k];
                let drow = &dout[i * n..(i + 1) * n];
                for (kk, &av) in arow.iter().enumerate() {
                    if av != 0.0 {
                        for (dbv, &dv) in db[kk * n..(kk + 1) * n].iter_mut().zip(drow) {
                            *dbv += av * dv;
                        }
                    }
                }
            }
            (da, db)
        }
        (2, 1) => {
            let (m, k) = (a.shape()[0], a.shape()[1]);
            let mut da = vec![0.0; m * k];
            let mut db = vec![0.0; k];
            for i in 0..m {
                let d = dout[i];
                let arow = &a.data()[i * k..(i + 1) * k];
                let darow = &mut da[i * k..(i + 1) * k];
                for j in 0..k {
                    darow[j] = d * b.data()[j];
                    db[j] += d * arow[j];
                }
            }
            (da, db)
        }
        (1, 2) => {
            let k = a.shape()[0];
            let n = b.shape()[1];
            let mut da = vec![0.0; k];
            let mut db = vec![0.0; k * n];
            for i in 0..k {
                let brow = &b.data()[i * n..(i + 1) * n];
                da[i] = dot(dout, brow);
                let av = a.data()[i];
                if av != 0.0 {
                    for (dbv, &dv) in db[i * n..(i + 1) * n].iter_mut().zip(dout) {
                        *dbv += av * dv;
                    }
                }
            }
            (da, db)
        }
        (1, 1) => {
            let d = dout[0];
            let da = b.data().iter().map(|v| d * v).collect();
            let db = a.data().iter().map(|v| d * v).collect();
            (da, db)
        }
        _ => unreachable!("matmul_forward validated ranks"),
    }
}
