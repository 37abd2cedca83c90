use std::cell::{Cell, Ref, RefCell};

use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    MatMul(usize, usize),
    Neg(usize),
    Scale(usize, f64),
    AddScalar(usize),
    Exp(usize),
    Log(usize),
    Tanh(usize),
    Sigmoid(usize),
    Powf(usize, f64),
    MaxScalar(usize, f64),
    Clamp(usize, f64, f64),
    Sum(usize),
    Mean(usize),
    RowSum(usize),
    GatherRows(usize, Vec<usize>),
    SliceCols(usize, usize),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records operations as they execute so that a scalar result can be
/// differentiated with respect to every leaf that requires a gradient.
///
/// A tape is built fresh for every forward pass and consumed by a single call
/// to [`Tape::backward`].
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    consumed: Cell<bool>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

/// Gradients of a scalar output with respect to the tape's trainable leaves.
#[derive(Debug)]
pub struct Gradients {
    by_node: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, var: Var<'_>) -> Option<&Tensor> {
        self.by_node.get(var.id).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.by_node.iter().filter(|g| g.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var#{}{:?}", self.id, self.shape())
    }
}

fn broadcast_dims(op: &'static str, a: &Tensor, b: &Tensor) -> Result<(usize, usize)> {
    let (ra, ca) = a.dims2();
    let (rb, cb) = b.dims2();
    let pick = |x: usize, y: usize| {
        if x == y || y == 1 {
            Some(x)
        } else if x == 1 {
            Some(y)
        } else {
            None
        }
    };
    match (pick(ra, rb), pick(ca, cb)) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::shape(
            op,
            format!("cannot broadcast {:?} with {:?}", a.shape(), b.shape()),
        )),
    }
}

fn broadcast_shape(a: &Tensor, b: &Tensor, r: usize, c: usize) -> Vec<usize> {
    if a.dims2() == (r, c) {
        a.shape().to_vec()
    } else if b.dims2() == (r, c) {
        b.shape().to_vec()
    } else {
        vec![r, c]
    }
}

#[inline]
fn bidx(dims: (usize, usize), i: usize, j: usize) -> usize {
    let (r, c) = dims;
    (if r == 1 { 0 } else { i }) * c + if c == 1 { 0 } else { j }
}

fn matmul_into(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a tensor as a leaf; it is trainable iff `tensor.requires_grad()`.
    pub fn var(&self, tensor: Tensor) -> Var<'_> {
        let rg = tensor.requires_grad();
        self.push(tensor, Op::Leaf, rg)
    }

    pub fn param(&self, tensor: Tensor) -> Var<'_> {
        self.var(tensor.with_requires_grad(true))
    }

    pub fn constant(&self, tensor: Tensor) -> Var<'_> {
        self.var(tensor.with_requires_grad(false))
    }

    pub fn scalar(&self, v: f64) -> Var<'_> {
        self.constant(Tensor::scalar(v))
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
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

    fn rg(&self, id: usize) -> bool {
        self.nodes.borrow()[id].requires_grad
    }

    fn unary(&self, a: usize, op: Op, f: impl Fn(f64) -> f64) -> Var<'_> {
        let value = self.nodes.borrow()[a].value.map(f);
        let rg = self.rg(a);
        self.push(value, op, rg)
    }

    fn binary(
        &self,
        name: &'static str,
        a: usize,
        b: usize,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var<'_>> {
        let value = {
            let nodes = self.nodes.borrow();
            let (ta, tb) = (&nodes[a].value, &nodes[b].value);
            let (r, c) = broadcast_dims(name, ta, tb)?;
            let (da, db) = (ta.dims2(), tb.dims2());
            let (xa, xb) = (ta.data(), tb.data());
            let data = if da == db {
                xa.iter().zip(xb).map(|(&x, &y)| f(x, y)).collect()
            } else {
                let mut out = Vec::with_capacity(r * c);
                for i in 0..r {
                    for j in 0..c {
                        out.push(f(xa[bidx(da, i, j)], xb[bidx(db, i, j)]));
                    }
                }
                out
            };
            Tensor::from_parts(broadcast_shape(ta, tb, r, c), data)
        };
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(value, op, rg))
    }

    /// Reverse-mode sweep from a scalar output. The tape can be swept once.
    pub fn backward(&self, output: Var<'_>) -> Result<Gradients> {
        if !std::ptr::eq(output.tape, self) {
            return Err(Error::Backward("output belongs to a different tape".into()));
        }
        let nodes = self.nodes.borrow();
        let out_node = &nodes[output.id];
        if out_node.value.len() != 1 {
            return Err(Error::Backward(format!(
                "output must be scalar, got shape {:?}",
                out_node.value.shape()
            )));
        }
        if self.consumed.replace(true) {
            return Err(Error::Backward("graph already consumed by a previous backward".into()));
        }

        let mut grads: Vec<Option<Vec<f64>>> = vec![None; output.id + 1];
        grads[output.id] = Some(vec![1.0]);

        fn acc<'g>(grads: &'g mut [Option<Vec<f64>>], id: usize, len: usize) -> &'g mut [f64] {
            grads[id].get_or_insert_with(|| vec![0.0; len])
        }

        for id in (0..=output.id).rev() {
            let node = &nodes[id];
            if !node.requires_grad {
                continue;
            }
            let g = match (&node.op, grads[id].as_ref()) {
                (Op::Leaf, _) | (_, None) => continue,
                (_, Some(_)) => grads[id].take().unwrap(),
            };
            let out = node.value.data();
            let val = |k: usize| &nodes[k].value;
            let need = |k: usize| nodes[k].requires_grad;

            match &node.op {
                Op::Leaf => unreachable!(),
                Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) => {
                    let (a, b) = (*a, *b);
                    let (ta, tb) = (val(a), val(b));
                    let (da, db) = (ta.dims2(), tb.dims2());
                    let (r, c) = node.value.dims2();
                    let (xa, xb) = (ta.data(), tb.data());
                    let (ga_local, gb_local) = {
                        let mut ga = need(a).then(|| vec![0.0; ta.len()]);
                        let mut gb = need(b).then(|| vec![0.0; tb.len()]);
                        for i in 0..r {
                            for j in 0..c {
                                let gv = g[i * c + j];
                                let (ia, ib) = (bidx(da, i, j), bidx(db, i, j));
                                let (x, y) = (xa[ia], xb[ib]);
                                let (dx, dy) = match node.op {
                                    Op::Add(..) => (gv, gv),
                                    Op::Sub(..) => (gv, -gv),
                                    Op::Mul(..) => (gv * y, gv * x),
                                    Op::Div(..) => (gv / y, -gv * x / (y * y)),
                                    _ => unreachable!(),
                                };
                                if let Some(ga) = ga.as_mut() {
                                    ga[ia] += dx;
                                }
                                if let Some(gb) = gb.as_mut() {
                                    gb[ib] += dy;
                                }
                            }
                        }
                        (ga, gb)
                    };
                    if let Some(ga) = ga_local {
                        for (t, v) in acc(&mut grads, a, ta.len()).iter_mut().zip(ga) {
                            *t += v;
                        }
                    }
                    if let Some(gb) = gb_local {
                        for (t, v) in acc(&mut grads, b, tb.len()).iter_mut().zip(gb) {
                            *t += v;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    let (ta, tb) = (val(a), val(b));
                    let (m, k) = ta.dims2();
                    let n = tb.cols();
                    if need(a) {
                        // dA = G · Bᵀ
                        let xb = tb.data();
                        let ga = acc(&mut grads, a, m * k);
                        for i in 0..m {
                            let grow = &g[i * n..(i + 1) * n];
                            for p in 0..k {
                                let brow = &xb[p * n..(p + 1) * n];
                                let s: f64 = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                                ga[i * k + p] += s;
                            }
                        }
                    }
                    if need(b) {
                        // dB = Aᵀ · G
                        let xa = ta.data();
                        let gb = acc(&mut grads, b, k * n);
                        for i in 0..m {
                            let grow = &g[i * n..(i + 1) * n];
                            for p in 0..k {
                                let av = xa[i * k + p];
                                if av == 0.0 {
                                    continue;
                                }
                                for (t, &gv) in gb[p * n..(p + 1) * n].iter_mut().zip(grow) {
                                    *t += av * gv;
                                }
                            }
                        }
                    }
                }
                Op::Neg(a)
                | Op::Scale(a, _)
                | Op::AddScalar(a)
                | Op::Exp(a)
                | Op::Log(a)
                | Op::Tanh(a)
                | Op::Sigmoid(a)
                | Op::Powf(a, _)
                | Op::MaxScalar(a, _)
                | Op::Clamp(a, ..) => {
                    let a = *a;
                    if !need(a) {
                        continue;
                    }
                    let x = val(a).data();
                    let op = node.op.clone();
                    let ga = acc(&mut grads, a, x.len());
                    for idx in 0..x.len() {
                        let gv = g[idx];
                        let d = match op {
                            Op::Neg(_) => -gv,
                            Op::Scale(_, s) => s * gv,
                            Op::AddScalar(..) => gv,
                            Op::Exp(_) => gv * out[idx],
                            Op::Log(_) => gv / x[idx],
                            Op::Tanh(_) => gv * (1.0 - out[idx] * out[idx]),
                            Op::Sigmoid(_) => gv * out[idx] * (1.0 - out[idx]),
                            // A zero upstream contributes nothing even where the
                            // local derivative is infinite (x = 0, e < 1).
                            Op::Powf(..) if gv == 0.0 => 0.0,
                            Op::Powf(_, e) => gv * e * x[idx].powf(e - 1.0),
                            Op::MaxScalar(_, c) => {
                                if x[idx] > c {
                                    gv
                                } else {
                                    0.0
                                }
                            }
                            Op::Clamp(_, lo, hi) => {
                                if x[idx] >= lo && x[idx] <= hi {
                                    gv
                                } else {
                                    0.0
                                }
                            }
                            _ => unreachable!(),
                        };
                        ga[idx] += d;
                    }
                }
                Op::Sum(a) | Op::Mean(a) => {
                    let a = *a;
                    if !need(a) {
                        continue;
                    }
                    let n = val(a).len();
                    let gv = match node.op {
                        Op::Mean(_) => g[0] / n as f64,
                        _ => g[0],
                    };
                    for t in acc(&mut grads, a, n).iter_mut() {
                        *t += gv;
                    }
                }
                Op::RowSum(a) => {
                    let a = *a;
                    if !need(a) {
                        continue;
                    }
                    let (r, c) = val(a).dims2();
                    let ga = acc(&mut grads, a, r * c);
                    for i in 0..r {
                        for t in ga[i * c..(i + 1) * c].iter_mut() {
                            *t += g[i];
                        }
                    }
                }
                Op::GatherRows(a, idx) => {
                    let a = *a;
                    if !need(a) {
                        continue;
                    }
                    let (r, c) = val(a).dims2();
                    let ga = acc(&mut grads, a, r * c);
                    for (k, &src) in idx.iter().enumerate() {
                        for (t, &gv) in ga[src * c..(src + 1) * c]
                            .iter_mut()
                            .zip(&g[k * c..(k + 1) * c])
                        {
                            *t += gv;
                        }
                    }
                }
                Op::SliceCols(a, start) => {
                    let (a, start) = (*a, *start);
                    if !need(a) {
                        continue;
                    }
                    let (r, c) = val(a).dims2();
                    let w = node.value.cols();
                    let ga = acc(&mut grads, a, r * c);
                    for i in 0..r {
                        for j in 0..w {
                            ga[i * c + start + j] += g[i * w + j];
                        }
                    }
                }
            }
        }

        let by_node = nodes
            .iter()
            .enumerate()
            .map(|(id, node)| match node.op {
                Op::Leaf if node.requires_grad => {
                    let data = grads
                        .get_mut(id)
                        .and_then(Option::take)
                        .unwrap_or_else(|| vec![0.0; node.value.len()]);
                    Some(Tensor::from_parts(node.value.shape().to_vec(), data))
                }
                _ => None,
            })
            .collect();
        Ok(Gradients { by_node })
    }
}

impl<'t> Var<'t> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Ref<'t, Tensor> {
        Ref::map(self.tape.nodes.borrow(), |n| &n[self.id].value)
    }

    pub fn to_tensor(&self) -> Tensor {
        self.value().clone()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    pub fn item(&self) -> Option<f64> {
        self.value().item()
    }

    pub fn requires_grad(&self) -> bool {
        self.tape.rg(self.id)
    }

    fn check_same_tape(&self, other: &Var<'_>, op: &'static str) -> Result<()> {
        if std::ptr::eq(self.tape, other.tape) {
            Ok(())
        } else {
            Err(Error::shape(op, "operands live on different tapes"))
        }
    }

    pub fn add(self, other: Var<'t>) -> Result<Var<'t>> {
        self.check_same_tape(&other, "add")?;
        self.tape
            .binary("add", self.id, other.id, Op::Add(self.id, other.id), |x, y| x + y)
    }

    pub fn sub(self, other: Var<'t>) -> Result<Var<'t>> {
        self.check_same_tape(&other, "sub")?;
        self.tape
            .binary("sub", self.id, other.id, Op::Sub(self.id, other.id), |x, y| x - y)
    }

    pub fn mul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.check_same_tape(&other, "mul")?;
        self.tape
            .binary("mul", self.id, other.id, Op::Mul(self.id, other.id), |x, y| x * y)
    }

    pub fn div(self, other: Var<'t>) -> Result<Var<'t>> {
        self.check_same_tape(&other, "div")?;
        self.tape
            .binary("div", self.id, other.id, Op::Div(self.id, other.id), |x, y| x / y)
    }

    pub fn matmul(self, other: Var<'t>) -> Result<Var<'t>> {
        self.check_same_tape(&other, "matmul")?;
        let value = {
            let (a, b) = (self.value(), other.value());
            if a.shape().len() != 2 || b.shape().len() != 2 || a.cols() != b.rows() {
                return Err(Error::shape(
                    "matmul",
                    format!("{:?} x {:?}", a.shape(), b.shape()),
                ));
            }
            let (m, k, n) = (a.rows(), a.cols(), b.cols());
            Tensor::from_parts(vec![m, n], matmul_into(a.data(), b.data(), m, k, n))
        };
        let rg = self.requires_grad() || other.requires_grad();
        Ok(self.tape.push(value, Op::MatMul(self.id, other.id), rg))
    }

    pub fn neg(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Neg(self.id), |x| -x)
    }

    pub fn scale(self, s: f64) -> Var<'t> {
        self.tape.unary(self.id, Op::Scale(self.id, s), |x| s * x)
    }

    pub fn add_scalar(self, s: f64) -> Var<'t> {
        self.tape.unary(self.id, Op::AddScalar(self.id), |x| x + s)
    }

    /// `s - self`
    pub fn rsub_scalar(self, s: f64) -> Var<'t> {
        self.neg().add_scalar(s)
    }

    pub fn exp(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Exp(self.id), f64::exp)
    }

    pub fn ln(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Log(self.id), f64::ln)
    }

    pub fn tanh(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Tanh(self.id), f64::tanh)
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.tape.unary(self.id, Op::Sigmoid(self.id), |x| {
            if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            }
        })
    }

    pub fn powf(self, e: f64) -> Var<'t> {
        self.tape.unary(self.id, Op::Powf(self.id, e), |x| x.powf(e))
    }

    /// Elementwise `max(x, c)`.
    pub fn max_scalar(self, c: f64) -> Var<'t> {
        self.tape.unary(self.id, Op::MaxScalar(self.id, c), |x| x.max(c))
    }

    pub fn relu(self) -> Var<'t> {
        self.max_scalar(0.0)
    }

    /// Elementwise clamp to `[lo, hi]`; gradient passes only inside the interval.
    pub fn clamp(self, lo: f64, hi: f64) -> Var<'t> {
        self.tape
            .unary(self.id, Op::Clamp(self.id, lo, hi), |x| x.clamp(lo, hi))
    }

    pub fn sum(self) -> Var<'t> {
        let v = Tensor::scalar(self.value().data().iter().sum());
        let rg = self.requires_grad();
        self.tape.push(v, Op::Sum(self.id), rg)
    }

    pub fn mean(self) -> Var<'t> {
        let v = {
            let t = self.value();
            Tensor::scalar(t.data().iter().sum::<f64>() / t.len() as f64)
        };
        let rg = self.requires_grad();
        self.tape.push(v, Op::Mean(self.id), rg)
    }

    /// Sum across columns: `[r, c] -> [r, 1]`.
    pub fn row_sum(self) -> Var<'t> {
        let v = {
            let t = self.value();
            let (r, c) = t.dims2();
            let data = (0..r).map(|i| t.data()[i * c..(i + 1) * c].iter().sum()).collect();
            Tensor::from_parts(vec![r, 1], data)
        };
        let rg = self.requires_grad();
        self.tape.push(v, Op::RowSum(self.id), rg)
    }

    pub fn gather_rows(self, idx: &[usize]) -> Result<Var<'t>> {
        let v = {
            let t = self.value();
            if t.shape().len() != 2 {
                return Err(Error::shape("gather_rows", format!("needs a matrix, got {:?}", t.shape())));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= t.rows()) {
                return Err(Error::shape(
                    "gather_rows",
                    format!("row {bad} out of range for {:?}", t.shape()),
                ));
            }
            if idx.is_empty() {
                return Err(Error::shape("gather_rows", "empty index list"));
            }
            t.select_rows(idx)
        };
        let rg = self.requires_grad();
        Ok(self.tape.push(v, Op::GatherRows(self.id, idx.to_vec()), rg))
    }

    /// Columns `start..end` of a matrix.
    pub fn slice_cols(self, start: usize, end: usize) -> Result<Var<'t>> {
        let v = {
            let t = self.value();
            let (r, c) = t.dims2();
            if t.shape().len() != 2 || start >= end || end > c {
                return Err(Error::shape(
                    "slice_cols",
                    format!("columns {start}..{end} of {:?}", t.shape()),
                ));
            }
            let w = end - start;
            let mut data = Vec::with_capacity(r * w);
            for i in 0..r {
                data.extend_from_slice(&t.data()[i * c + start..i * c + end]);
            }
            Tensor::from_parts(vec![r, w], data)
        };
        let rg = self.requires_grad();
        Ok(self.tape.push(v, Op::SliceCols(self.id, start), rg))
    }
}
