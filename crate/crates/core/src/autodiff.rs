//! Tape-based reverse-mode automatic differentiation over dense tensors.
//!
//! Every primitive evaluates eagerly and appends a node to the [`Tape`].
//! [`Tape::backward`] replays the nodes in reverse order from a scalar loss
//! and accumulates one gradient buffer per reachable node.
//!
//! ```
//! use paragen::autodiff::Tape;
//! use paragen::tensor::Tensor;
//!
//! let tape = Tape::new();
//! let x = tape.param(Tensor::scalar(3.0));
//! let y = x * x;
//! let grads = tape.backward(y).unwrap();
//! assert_eq!(grads.get(x).item(), 6.0);
//! ```
//!
//! A tape is single-threaded; build one per forward/backward pass.

use std::cell::{Cell, RefCell};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    AddConst(NodeId),
    MulScalar(NodeId, NodeId),
    DivScalar(NodeId, NodeId),
    MatVec(NodeId, NodeId),
    MatMul(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Exp(NodeId),
    Ln(NodeId),
    Selu(NodeId),
    LogSigmoid(NodeId),
    Softmax(NodeId),
    LogSoftmax(NodeId),
    Concat(NodeId, NodeId),
    Slice(NodeId, usize),
    Sum(NodeId),
    Dot(NodeId, NodeId),
    Norm(NodeId),
    Pick(NodeId, usize),
    Row(NodeId, usize),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Ordered record of primitive operations.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    recording: Cell<bool>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: NodeId,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Var")
            .field("id", &self.id)
            .field("value", &self.value())
            .finish()
    }
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: RefCell::new(Vec::new()),
            recording: Cell::new(true),
        }
    }

    /// A tape that only evaluates: no node requires a gradient, which keeps
    /// inference from paying for backward bookkeeping.
    pub fn inference() -> Self {
        Tape {
            nodes: RefCell::new(Vec::new()),
            recording: Cell::new(false),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records a tensor as a leaf. Its `requires_grad` flag decides whether
    /// gradients flow to it.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        let requires_grad = self.recording.get() && value.requires_grad();
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Records a differentiable leaf regardless of the tensor's flag.
    pub fn param(&self, value: Tensor) -> Var<'_> {
        let requires_grad = self.recording.get();
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, false)
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.constant(Tensor::scalar(value))
    }

    pub fn vector(&self, data: Vec<f64>) -> Var<'_> {
        self.constant(Tensor::vector(data))
    }

    pub fn zeros(&self, len: usize) -> Var<'_> {
        self.constant(Tensor::zeros(&[len]))
    }

    fn push(&self, value: Tensor, op: Op, requires_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    fn needs(&self, ids: &[NodeId]) -> bool {
        let nodes = self.nodes.borrow();
        ids.iter().any(|&i| nodes[i].requires_grad)
    }

    fn record(&self, value: Tensor, op: Op, inputs: &[NodeId]) -> Var<'_> {
        let requires_grad = self.needs(inputs);
        self.push(value, op, requires_grad)
    }

    /// Backpropagates from a scalar `loss`.
    pub fn backward(&self, loss: Var<'_>) -> Result<Gradients> {
        let nodes = self.nodes.borrow();
        let root = &nodes[loss.id];
        if !root.value.is_scalar() {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                root.value.shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        grads[loss.id] = Some(vec![1.0]);
        for id in (0..=loss.id).rev() {
            let node = &nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            propagate(&nodes, &mut grads, id, &g);
            grads[id] = Some(g);
        }
        let shapes = nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }
}

fn acc<'a>(grads: &'a mut [Option<Vec<f64>>], nodes: &[Node], id: NodeId) -> Option<&'a mut Vec<f64>> {
    if !nodes[id].requires_grad {
        return None;
    }
    let slot = &mut grads[id];
    if slot.is_none() {
        *slot = Some(vec![0.0; nodes[id].value.numel()]);
    }
    slot.as_mut()
}

fn propagate(nodes: &[Node], grads: &mut [Option<Vec<f64>>], id: NodeId, g: &[f64]) {
    let y = nodes[id].value.data();
    let val = |i: NodeId| nodes[i].value.data();
    match nodes[id].op {
        Op::Leaf => {}
        Op::Add(a, b) => {
            for i in [a, b] {
                if let Some(ga) = acc(grads, nodes, i) {
                    ga.iter_mut().zip(g).for_each(|(x, gi)| *x += gi);
                }
            }
        }
        Op::Sub(a, b) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(g).for_each(|(x, gi)| *x += gi);
            }
            if let Some(gb) = acc(grads, nodes, b) {
                gb.iter_mut().zip(g).for_each(|(x, gi)| *x -= gi);
            }
        }
        Op::Mul(a, b) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), bv) in ga.iter_mut().zip(g).zip(val(b)) {
                    *x += gi * bv;
                }
            }
            if let Some(gb) = acc(grads, nodes, b) {
                for ((x, gi), av) in gb.iter_mut().zip(g).zip(val(a)) {
                    *x += gi * av;
                }
            }
        }
        Op::Scale(a, c) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(g).for_each(|(x, gi)| *x += c * gi);
            }
        }
        Op::AddConst(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(g).for_each(|(x, gi)| *x += gi);
            }
        }
        Op::MulScalar(a, s) => {
            let sv = val(s)[0];
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(g).for_each(|(x, gi)| *x += gi * sv);
            }
            if let Some(gs) = acc(grads, nodes, s) {
                gs[0] += g.iter().zip(val(a)).map(|(gi, av)| gi * av).sum::<f64>();
            }
        }
        Op::DivScalar(a, s) => {
            let sv = val(s)[0];
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(g).for_each(|(x, gi)| *x += gi / sv);
            }
            if let Some(gs) = acc(grads, nodes, s) {
                let dot: f64 = g.iter().zip(val(a)).map(|(gi, av)| gi * av).sum();
                gs[0] -= dot / (sv * sv);
            }
        }
        Op::MatVec(w, x) => {
            let cols = nodes[w].value.cols();
            if let Some(gw) = acc(grads, nodes, w) {
                let xv = val(x);
                for (row, gi) in gw.chunks_exact_mut(cols).zip(g) {
                    if *gi != 0.0 {
                        row.iter_mut().zip(xv).for_each(|(r, xj)| *r += gi * xj);
                    }
                }
            }
            if let Some(gx) = acc(grads, nodes, x) {
                for (row, gi) in val(w).chunks_exact(cols).zip(g) {
                    if *gi != 0.0 {
                        gx.iter_mut().zip(row).for_each(|(r, wij)| *r += gi * wij);
                    }
                }
            }
        }
        Op::MatMul(a, b) => {
            let (m, k) = (nodes[a].value.rows(), nodes[a].value.cols());
            let n = nodes[b].value.cols();
            if let Some(ga) = acc(grads, nodes, a) {
                let bv = val(b);
                for i in 0..m {
                    for p in 0..k {
                        let mut s = 0.0;
                        for j in 0..n {
                            s += g[i * n + j] * bv[p * n + j];
                        }
                        ga[i * k + p] += s;
                    }
                }
            }
            if let Some(gb) = acc(grads, nodes, b) {
                let av = val(a);
                for i in 0..m {
                    for p in 0..k {
                        let aip = av[i * k + p];
                        for j in 0..n {
                            gb[p * n + j] += aip * g[i * n + j];
                        }
                    }
                }
            }
        }
        Op::Sigmoid(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), yi) in ga.iter_mut().zip(g).zip(y) {
                    *x += gi * yi * (1.0 - yi);
                }
            }
        }
        Op::Tanh(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), yi) in ga.iter_mut().zip(g).zip(y) {
                    *x += gi * (1.0 - yi * yi);
                }
            }
        }
        Op::Exp(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), yi) in ga.iter_mut().zip(g).zip(y) {
                    *x += gi * yi;
                }
            }
        }
        Op::Ln(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), ai) in ga.iter_mut().zip(g).zip(val(a)) {
                    *x += gi / ai;
                }
            }
        }
        Op::Selu(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for (((x, gi), ai), yi) in ga.iter_mut().zip(g).zip(val(a)).zip(y) {
                    let d = if *ai > 0.0 {
                        SELU_LAMBDA
                    } else {
                        yi + SELU_LAMBDA * SELU_ALPHA
                    };
                    *x += gi * d;
                }
            }
        }
        Op::LogSigmoid(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                for ((x, gi), ai) in ga.iter_mut().zip(g).zip(val(a)) {
                    *x += gi * sigmoid(-ai);
                }
            }
        }
        Op::Softmax(a) => {
            let cols = nodes[a].value.cols();
            if let Some(ga) = acc(grads, nodes, a) {
                for ((gr, gin), yr) in ga
                    .chunks_exact_mut(cols)
                    .zip(g.chunks_exact(cols))
                    .zip(y.chunks_exact(cols))
                {
                    let dot: f64 = gin.iter().zip(yr).map(|(a, b)| a * b).sum();
                    for ((x, gi), yi) in gr.iter_mut().zip(gin).zip(yr) {
                        *x += yi * (gi - dot);
                    }
                }
            }
        }
        Op::LogSoftmax(a) => {
            let cols = nodes[a].value.cols();
            if let Some(ga) = acc(grads, nodes, a) {
                for ((gr, gin), yr) in ga
                    .chunks_exact_mut(cols)
                    .zip(g.chunks_exact(cols))
                    .zip(y.chunks_exact(cols))
                {
                    let total: f64 = gin.iter().sum();
                    for ((x, gi), yi) in gr.iter_mut().zip(gin).zip(yr) {
                        *x += gi - yi.exp() * total;
                    }
                }
            }
        }
        Op::Concat(a, b) => {
            let split = nodes[a].value.numel();
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(&g[..split]).for_each(|(x, gi)| *x += gi);
            }
            if let Some(gb) = acc(grads, nodes, b) {
                gb.iter_mut().zip(&g[split..]).for_each(|(x, gi)| *x += gi);
            }
        }
        Op::Slice(a, start) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga[start..start + g.len()]
                    .iter_mut()
                    .zip(g)
                    .for_each(|(x, gi)| *x += gi);
            }
        }
        Op::Sum(a) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().for_each(|x| *x += g[0]);
            }
        }
        Op::Dot(a, b) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga.iter_mut().zip(val(b)).for_each(|(x, bv)| *x += g[0] * bv);
            }
            if let Some(gb) = acc(grads, nodes, b) {
                gb.iter_mut().zip(val(a)).for_each(|(x, av)| *x += g[0] * av);
            }
        }
        Op::Norm(a) => {
            let n = y[0];
            if n > 0.0 {
                if let Some(ga) = acc(grads, nodes, a) {
                    ga.iter_mut()
                        .zip(val(a))
                        .for_each(|(x, av)| *x += g[0] * av / n);
                }
            }
        }
        Op::Pick(a, idx) => {
            if let Some(ga) = acc(grads, nodes, a) {
                ga[idx] += g[0];
            }
        }
        Op::Row(t, idx) => {
            let cols = nodes[t].value.cols();
            if let Some(gt) = acc(grads, nodes, t) {
                gt[idx * cols..(idx + 1) * cols]
                    .iter_mut()
                    .zip(g)
                    .for_each(|(x, gi)| *x += gi);
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    row.iter_mut().for_each(|x| *x /= total);
}

fn log_softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    row.iter_mut().for_each(|x| *x -= lse);
}

/// Numerically stable softmax over the last axis of a plain slice.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    softmax_in_place(&mut out);
    out
}

impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    /// Snapshot of the current value.
    pub fn value(&self) -> Tensor {
        self.tape.nodes.borrow()[self.id].value.clone()
    }

    pub fn with_value<R>(&self, f: impl FnOnce(&Tensor) -> R) -> R {
        f(&self.tape.nodes.borrow()[self.id].value)
    }

    pub fn item(&self) -> f64 {
        self.with_value(|t| t.item())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.with_value(|t| t.data().to_vec())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.with_value(|t| t.shape().to_vec())
    }

    pub fn numel(&self) -> usize {
        self.with_value(|t| t.numel())
    }

    pub fn requires_grad(&self) -> bool {
        self.tape.nodes.borrow()[self.id].requires_grad
    }

    fn same_tape(&self, other: &Var<'_>) {
        assert!(
            std::ptr::eq(self.tape, other.tape),
            "vars recorded on different tapes"
        );
    }

    fn unary(self, op: Op, f: impl Fn(f64) -> f64) -> Var<'t> {
        let value = self.with_value(|t| {
            let data = t.data().iter().map(|&x| f(x)).collect();
            Tensor::new(t.shape().to_vec(), data).expect("same shape")
        });
        self.tape.record(value, op, &[self.id])
    }

    fn binary(self, other: Var<'t>, op: Op, name: &str, f: impl Fn(f64, f64) -> f64) -> Var<'t> {
        self.same_tape(&other);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.id].value, &nodes[other.id].value);
            assert_eq!(a.shape(), b.shape(), "{name}: shape mismatch");
            let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
            Tensor::new(a.shape().to_vec(), data).expect("same shape")
        };
        self.tape.record(value, op, &[self.id, other.id])
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        self.unary(Op::Scale(self.id, c), |x| c * x)
    }

    pub fn add_const(self, c: f64) -> Var<'t> {
        self.unary(Op::AddConst(self.id), |x| x + c)
    }

    /// Multiplies every element by a scalar variable.
    pub fn mul_scalar(self, s: Var<'t>) -> Var<'t> {
        self.same_tape(&s);
        let sv = s.item();
        let value = self.with_value(|t| {
            let data = t.data().iter().map(|x| x * sv).collect();
            Tensor::new(t.shape().to_vec(), data).expect("same shape")
        });
        self.tape
            .record(value, Op::MulScalar(self.id, s.id), &[self.id, s.id])
    }

    /// Divides every element by a scalar variable.
    pub fn div_scalar(self, s: Var<'t>) -> Var<'t> {
        self.same_tape(&s);
        let sv = s.item();
        let value = self.with_value(|t| {
            let data = t.data().iter().map(|x| x / sv).collect();
            Tensor::new(t.shape().to_vec(), data).expect("same shape")
        });
        self.tape
            .record(value, Op::DivScalar(self.id, s.id), &[self.id, s.id])
    }

    /// Matrix `[m, n]` times vector `[n]`.
    pub fn matvec(self, x: Var<'t>) -> Var<'t> {
        self.same_tape(&x);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (w, xv) = (&nodes[self.id].value, &nodes[x.id].value);
            assert_eq!(w.shape().len(), 2, "matvec: weight must be 2-D");
            let cols = w.cols();
            assert_eq!(cols, xv.numel(), "matvec: inner dimension mismatch");
            let xd = xv.data();
            let out = w
                .data()
                .chunks_exact(cols)
                .map(|row| row.iter().zip(xd).map(|(a, b)| a * b).sum())
                .collect();
            Tensor::vector(out)
        };
        self.tape.record(value, Op::MatVec(self.id, x.id), &[self.id, x.id])
    }

    /// Matrix `[m, k]` times matrix `[k, n]`.
    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        self.same_tape(&other);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.id].value, &nodes[other.id].value);
            assert!(a.shape().len() == 2 && b.shape().len() == 2, "matmul: 2-D only");
            let (m, k, n) = (a.rows(), a.cols(), b.cols());
            assert_eq!(k, b.rows(), "matmul: inner dimension mismatch");
            let (ad, bd) = (a.data(), b.data());
            let mut out = vec![0.0; m * n];
            for i in 0..m {
                for p in 0..k {
                    let aip = ad[i * k + p];
                    for j in 0..n {
                        out[i * n + j] += aip * bd[p * n + j];
                    }
                }
            }
            Tensor::matrix(m, n, out).expect("shape")
        };
        self.tape
            .record(value, Op::MatMul(self.id, other.id), &[self.id, other.id])
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.unary(Op::Sigmoid(self.id), sigmoid)
    }

    pub fn tanh(self) -> Var<'t> {
        self.unary(Op::Tanh(self.id), f64::tanh)
    }

    pub fn exp(self) -> Var<'t> {
        self.unary(Op::Exp(self.id), f64::exp)
    }

    pub fn ln(self) -> Var<'t> {
        self.unary(Op::Ln(self.id), f64::ln)
    }

    pub fn selu(self) -> Var<'t> {
        self.unary(Op::Selu(self.id), selu)
    }

    pub fn log_sigmoid(self) -> Var<'t> {
        self.unary(Op::LogSigmoid(self.id), log_sigmoid)
    }

    /// Softmax over the last axis.
    pub fn softmax(self) -> Var<'t> {
        let value = self.with_value(|t| {
            let mut out = t.clone().with_requires_grad(false);
            let cols = out.cols();
            out.data_mut().chunks_exact_mut(cols).for_each(softmax_in_place);
            out
        });
        self.tape.record(value, Op::Softmax(self.id), &[self.id])
    }

    /// Log-softmax over the last axis.
    pub fn log_softmax(self) -> Var<'t> {
        let value = self.with_value(|t| {
            let mut out = t.clone().with_requires_grad(false);
            let cols = out.cols();
            out.data_mut()
                .chunks_exact_mut(cols)
                .for_each(log_softmax_in_place);
            out
        });
        self.tape.record(value, Op::LogSoftmax(self.id), &[self.id])
    }

    /// Concatenates two vectors.
    pub fn concat(self, other: Var<'t>) -> Var<'t> {
        self.same_tape(&other);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let mut data = nodes[self.id].value.data().to_vec();
            data.extend_from_slice(nodes[other.id].value.data());
            Tensor::vector(data)
        };
        self.tape
            .record(value, Op::Concat(self.id, other.id), &[self.id, other.id])
    }

    /// Contiguous sub-vector `[start, start + len)`.
    pub fn slice(self, start: usize, len: usize) -> Var<'t> {
        let value = self.with_value(|t| {
            assert!(start + len <= t.numel(), "slice out of range");
            Tensor::vector(t.data()[start..start + len].to_vec())
        });
        self.tape.record(value, Op::Slice(self.id, start), &[self.id])
    }

    pub fn sum(self) -> Var<'t> {
        let value = self.with_value(|t| Tensor::scalar(t.data().iter().sum()));
        self.tape.record(value, Op::Sum(self.id), &[self.id])
    }

    pub fn dot(self, other: Var<'t>) -> Var<'t> {
        self.same_tape(&other);
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.id].value, &nodes[other.id].value);
            assert_eq!(a.numel(), b.numel(), "dot: length mismatch");
            Tensor::scalar(a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum())
        };
        self.tape
            .record(value, Op::Dot(self.id, other.id), &[self.id, other.id])
    }

    /// Euclidean norm. The gradient at the origin is taken to be zero.
    pub fn norm(self) -> Var<'t> {
        let value = self.with_value(|t| Tensor::scalar(t.l2_norm()));
        self.tape.record(value, Op::Norm(self.id), &[self.id])
    }

    /// Element `idx` of a vector as a scalar.
    pub fn pick(self, idx: usize) -> Var<'t> {
        let value = self.with_value(|t| Tensor::scalar(t.data()[idx]));
        self.tape.record(value, Op::Pick(self.id, idx), &[self.id])
    }

    /// Row `idx` of a matrix as a vector.
    pub fn row(self, idx: usize) -> Var<'t> {
        let value = self.with_value(|t| {
            let cols = t.cols();
            assert!(idx < t.rows(), "row {idx} out of range");
            Tensor::vector(t.data()[idx * cols..(idx + 1) * cols].to_vec())
        });
        self.tape.record(value, Op::Row(self.id, idx), &[self.id])
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Add(self.id, rhs.id), "add", |a, b| a + b)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Sub(self.id, rhs.id), "sub", |a, b| a - b)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, Op::Mul(self.id, rhs.id), "mul", |a, b| a * b)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.scale(-1.0)
    }
}

/// Gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient with respect to `var`; zeros when the loss does not depend on it.
    pub fn get(&self, var: Var<'_>) -> Tensor {
        let shape = self.shapes[var.id].clone();
        match &self.grads[var.id] {
            Some(g) => Tensor::new(shape, g.clone()).expect("gradient shape"),
            None => Tensor::zeros(&shape),
        }
    }

    /// Whether any gradient reached `var`.
    pub fn reached(&self, var: Var<'_>) -> bool {
        self.grads[var.id].is_some()
    }
}
