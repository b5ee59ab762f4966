//! Reverse-mode autodiff over a recorded computation.
//!
//! A [`Tape`] records every operation applied to its tensors and can replay
//! them backwards to accumulate gradients for the trainable leaves. The op
//! set is exactly what the detector networks need; shape mismatches inside a
//! recording are programmer errors and panic.
//!
//! Accumulation order in every kernel is fixed by node and row index, so a
//! recorded forward/backward pass is bitwise deterministic for fixed inputs
//! regardless of thread count in the surrounding code.

use super::{axpy, dot, Tensor};
use crate::error::{Error, Result};

/// Handle to a tensor on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    /// `a[r,k] * b[k,c] -> [r,c]`
    MatMul {
        a: Var,
        b: Var,
    },
    /// `x[r,k] * w[o,k]^T (+ bias[o]) -> [r,o]`; weights stored out-by-in.
    AffineNT {
        x: Var,
        w: Var,
        b: Option<Var>,
    },
    Add {
        a: Var,
        b: Var,
    },
    Sub {
        a: Var,
        b: Var,
    },
    Mul {
        a: Var,
        b: Var,
    },
    Div {
        a: Var,
        b: Var,
    },
    AddScalar {
        a: Var,
    },
    Scale {
        a: Var,
        c: f64,
    },
    ClampMin {
        a: Var,
        c: f64,
    },
    Recip {
        a: Var,
    },
    Relu {
        a: Var,
    },
    Sigmoid {
        a: Var,
    },
    Tanh {
        a: Var,
    },
    SoftmaxRows {
        a: Var,
    },
    SumAll {
        a: Var,
    },
    ConcatCols {
        parts: Vec<Var>,
    },
    /// Row `e` of the output is `[u[src[e],:], u[dst[e],:], feat[e,:]]`.
    EdgeConcat {
        u: Var,
        feat: Var,
        src: Vec<usize>,
        dst: Vec<usize>,
    },
    /// `out[targets[e],:] += a[e,:]` over `rows` output rows.
    IndexSum {
        a: Var,
        targets: Vec<usize>,
    },
}

struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// A recorded forward computation.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Vec<f64>>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
        });
        self.grads.push(Vec::new());
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Insert a constant leaf; no gradient is tracked for it.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(Op::Leaf, t, false)
    }

    /// Insert a trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push(Op::Leaf, t, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` call w.r.t. `v`, if any was recorded.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        let g = &self.grads[v.0];
        if g.is_empty() {
            None
        } else {
            Some(g)
        }
    }

    // ---- forward ops ----

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (ta, tb) = (self.value(a), self.value(b));
        let (r, k, c) = (ta.rows(), ta.cols(), tb.cols());
        assert_eq!(k, tb.rows(), "matmul inner dims {}x{}", k, tb.rows());
        let bt = tb.transposed();
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = ta.row(i);
            for j in 0..c {
                out[i * c + j] = dot(row, bt.row(j));
            }
        }
        let rg = self.needs(a) || self.needs(b);
        self.push(
            Op::MatMul { a, b },
            Tensor::new(vec![r, c], out).unwrap(),
            rg,
        )
    }

    pub fn affine_nt(&mut self, x: Var, w: Var, b: Option<Var>) -> Var {
        let (tx, tw) = (self.value(x), self.value(w));
        let (r, k, o) = (tx.rows(), tx.cols(), tw.rows());
        assert_eq!(k, tw.cols(), "affine_nt inner dims {}x{}", k, tw.cols());
        let bias = b.map(|bv| self.value(bv).data().to_vec());
        if let Some(bd) = &bias {
            assert_eq!(bd.len(), o, "affine_nt bias len");
        }
        let (tx, tw) = (self.value(x), self.value(w));
        let mut out = vec![0.0; r * o];
        for i in 0..r {
            let row = tx.row(i);
            for j in 0..o {
                let mut v = dot(row, tw.row(j));
                if let Some(bd) = &bias {
                    v += bd[j];
                }
                out[i * o + j] = v;
            }
        }
        let rg = self.needs(x) || self.needs(w) || b.map(|bv| self.needs(bv)).unwrap_or(false);
        self.push(
            Op::AffineNT { x, w, b },
            Tensor::new(vec![r, o], out).unwrap(),
            rg,
        )
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "elementwise shape mismatch");
        let data: Vec<f64> = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(x, y)| f(*x, *y))
            .collect();
        let shape = ta.shape().to_vec();
        let rg = self.needs(a) || self.needs(b);
        self.push(op, Tensor::new(shape, data).unwrap(), rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x + y, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x - y, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x * y, Op::Mul { a, b })
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x / y, Op::Div { a, b })
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let ta = self.value(a);
        let data: Vec<f64> = ta.data().iter().map(|x| f(*x)).collect();
        let shape = ta.shape().to_vec();
        let rg = self.needs(a);
        self.push(op, Tensor::new(shape, data).unwrap(), rg)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, |x| x + c, Op::AddScalar { a })
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, |x| x * c, Op::Scale { a, c })
    }

    pub fn clamp_min(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, |x| x.max(c), Op::ClampMin { a, c })
    }

    pub fn recip(&mut self, a: Var) -> Var {
        self.unary(a, |x| 1.0 / x, Op::Recip { a })
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.max(0.0), Op::Relu { a })
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, |x| 1.0 / (1.0 + (-x).exp()), Op::Sigmoid { a })
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.tanh(), Op::Tanh { a })
    }

    /// Row-wise softmax with max subtraction.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let (r, c) = (ta.rows(), ta.cols());
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = ta.row(i);
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for j in 0..c {
                let e = (row[j] - m).exp();
                out[i * c + j] = e;
                sum += e;
            }
            for j in 0..c {
                out[i * c + j] /= sum;
            }
        }
        let rg = self.needs(a);
        self.push(
            Op::SoftmaxRows { a },
            Tensor::new(vec![r, c], out).unwrap(),
            rg,
        )
    }

    /// Sum of all entries, as a `[1, 1]` tensor.
    pub fn sum_all(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let mut acc = 0.0;
        for v in ta.data() {
            acc += v;
        }
        let rg = self.needs(a);
        self.push(
            Op::SumAll { a },
            Tensor::new(vec![1, 1], vec![acc]).unwrap(),
            rg,
        )
    }

    /// Horizontal concatenation of matrices with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let r = self.value(parts[0]).rows();
        let total: usize = parts
            .iter()
            .map(|p| self.value(*p).cols())
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let mut out = vec![0.0; r * total];
        let mut col = 0;
        for p in parts {
            let tp = self.value(*p);
            assert_eq!(tp.rows(), r, "concat_cols row mismatch");
            let c = tp.cols();
            for i in 0..r {
                out[i * total + col..i * total + col + c].copy_from_slice(tp.row(i));
            }
            col += c;
        }
        let rg = parts.iter().any(|p| self.needs(*p));
        self.push(
            Op::ConcatCols {
                parts: parts.to_vec(),
            },
            Tensor::new(vec![r, total], out).unwrap(),
            rg,
        )
    }

    /// Build per-edge inputs `[u[src[e]], u[dst[e]], feat[e]]` in one pass.
    pub fn edge_concat(&mut self, u: Var, feat: Var, src: Vec<usize>, dst: Vec<usize>) -> Var {
        assert_eq!(src.len(), dst.len());
        let (tu, tf) = (self.value(u), self.value(feat));
        let e = src.len();
        assert_eq!(tf.rows(), e, "edge_concat feature rows");
        let (k, fc) = (tu.cols(), tf.cols());
        let width = 2 * k + fc;
        let mut out = vec![0.0; e * width];
        for i in 0..e {
            let o = i * width;
            out[o..o + k].copy_from_slice(tu.row(src[i]));
            out[o + k..o + 2 * k].copy_from_slice(tu.row(dst[i]));
            out[o + 2 * k..o + width].copy_from_slice(tf.row(i));
        }
        let rg = self.needs(u) || self.needs(feat);
        self.push(
            Op::EdgeConcat { u, feat, src, dst },
            Tensor::new(vec![e, width], out).unwrap(),
            rg,
        )
    }

    /// Scatter-add rows of `a` into `rows` output rows: `out[targets[e]] += a[e]`.
    /// Accumulation runs in edge order, which fixes the summation order.
    pub fn index_sum(&mut self, a: Var, targets: Vec<usize>, rows: usize) -> Var {
        let ta = self.value(a);
        assert_eq!(ta.rows(), targets.len(), "index_sum target count");
        let c = ta.cols();
        let mut out = vec![0.0; rows * c];
        for (e, &t) in targets.iter().enumerate() {
            debug_assert!(t < rows);
            axpy(&mut out[t * c..(t + 1) * c], 1.0, ta.row(e));
        }
        let rg = self.needs(a);
        self.push(
            Op::IndexSum { a, targets },
            Tensor::new(vec![rows, c], out).unwrap(),
            rg,
        )
    }

    // ---- backward ----

    /// Accumulate gradients of a scalar `loss` into every trainable leaf
    /// reachable from it. Errors if `loss` is not a single-entry tensor.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(Error::Usage(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        for g in &mut self.grads {
            g.clear();
        }
        self.grads[loss.0] = vec![1.0];

        for i in (0..self.nodes.len()).rev() {
            if self.grads[i].is_empty() || !self.nodes[i].requires_grad {
                continue;
            }
            let (lo, hi) = self.grads.split_at_mut(i);
            let g: &[f64] = &hi[0];
            let nodes = &self.nodes;
            let ensure = |lo: &mut [Vec<f64>], v: Var| {
                if lo[v.0].is_empty() {
                    lo[v.0] = vec![0.0; nodes[v.0].value.len()];
                }
            };
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let (ta, tb) = (&nodes[a.0].value, &nodes[b.0].value);
                    let (r, k, c) = (ta.rows(), ta.cols(), tb.cols());
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let da = &mut lo[a.0];
                        // dA[i,k] = sum_j G[i,j] B[k,j]
                        for ii in 0..r {
                            for kk in 0..k {
                                let mut s = 0.0;
                                for jj in 0..c {
                                    s += g[ii * c + jj] * tb.data()[kk * c + jj];
                                }
                                da[ii * k + kk] += s;
                            }
                        }
                    }
                    if nodes[b.0].requires_grad {
                        ensure(lo, *b);
                        let db = &mut lo[b.0];
                        // dB[k,:] += A[i,k] * G[i,:]
                        for ii in 0..r {
                            let arow = ta.row(ii);
                            let grow = &g[ii * c..(ii + 1) * c];
                            for kk in 0..k {
                                axpy(&mut db[kk * c..(kk + 1) * c], arow[kk], grow);
                            }
                        }
                    }
                }
                Op::AffineNT { x, w, b } => {
                    let (tx, tw) = (&nodes[x.0].value, &nodes[w.0].value);
                    let (r, k, o) = (tx.rows(), tx.cols(), tw.rows());
                    if nodes[x.0].requires_grad {
                        ensure(lo, *x);
                        let dx = &mut lo[x.0];
                        for ii in 0..r {
                            let grow = &g[ii * o..(ii + 1) * o];
                            let drow = &mut dx[ii * k..(ii + 1) * k];
                            for (jj, &gv) in grow.iter().enumerate() {
                                if gv != 0.0 {
                                    axpy(drow, gv, tw.row(jj));
                                }
                            }
                        }
                    }
                    if nodes[w.0].requires_grad {
                        ensure(lo, *w);
                        let dw = &mut lo[w.0];
                        for ii in 0..r {
                            let xrow = tx.row(ii);
                            let grow = &g[ii * o..(ii + 1) * o];
                            for (jj, &gv) in grow.iter().enumerate() {
                                if gv != 0.0 {
                                    axpy(&mut dw[jj * k..(jj + 1) * k], gv, xrow);
                                }
                            }
                        }
                    }
                    if let Some(bv) = b {
                        if nodes[bv.0].requires_grad {
                            ensure(lo, *bv);
                            let db = &mut lo[bv.0];
                            for ii in 0..r {
                                axpy(db, 1.0, &g[ii * o..(ii + 1) * o]);
                            }
                        }
                    }
                }
                Op::Add { a, b } => {
                    for v in [a, b] {
                        if nodes[v.0].requires_grad {
                            ensure(lo, *v);
                            axpy(&mut lo[v.0], 1.0, g);
                        }
                    }
                }
                Op::Sub { a, b } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        axpy(&mut lo[a.0], 1.0, g);
                    }
                    if nodes[b.0].requires_grad {
                        ensure(lo, *b);
                        axpy(&mut lo[b.0], -1.0, g);
                    }
                }
                Op::Mul { a, b } => {
                    let (ta, tb) = (&nodes[a.0].value, &nodes[b.0].value);
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            da[j] += g[j] * tb.data()[j];
                        }
                    }
                    if nodes[b.0].requires_grad {
                        ensure(lo, *b);
                        let db = &mut lo[b.0];
                        for j in 0..g.len() {
                            db[j] += g[j] * ta.data()[j];
                        }
                    }
                }
                Op::Div { a, b } => {
                    let tb = &nodes[b.0].value;
                    let tout = &nodes[i].value;
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            da[j] += g[j] / tb.data()[j];
                        }
                    }
                    if nodes[b.0].requires_grad {
                        ensure(lo, *b);
                        let db = &mut lo[b.0];
                        for j in 0..g.len() {
                            db[j] -= g[j] * tout.data()[j] / tb.data()[j];
                        }
                    }
                }
                Op::AddScalar { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        axpy(&mut lo[a.0], 1.0, g);
                    }
                }
                Op::Scale { a, c } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        axpy(&mut lo[a.0], *c, g);
                    }
                }
                Op::ClampMin { a, c } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let ta = &nodes[a.0].value;
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            if ta.data()[j] > *c {
                                da[j] += g[j];
                            }
                        }
                    }
                }
                Op::Recip { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let tout = &nodes[i].value;
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            let o = tout.data()[j];
                            da[j] -= g[j] * o * o;
                        }
                    }
                }
                Op::Relu { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let tout = &nodes[i].value;
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            if tout.data()[j] > 0.0 {
                                da[j] += g[j];
                            }
                        }
                    }
                }
                Op::Sigmoid { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let tout = &nodes[i].value;
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            let s = tout.data()[j];
                            da[j] += g[j] * s * (1.0 - s);
                        }
                    }
                }
                Op::Tanh { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let tout = &nodes[i].value;
                        let da = &mut lo[a.0];
                        for j in 0..g.len() {
                            let t = tout.data()[j];
                            da[j] += g[j] * (1.0 - t * t);
                        }
                    }
                }
                Op::SoftmaxRows { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let tout = &nodes[i].value;
                        let (r, c) = (tout.rows(), tout.cols());
                        let da = &mut lo[a.0];
                        for ii in 0..r {
                            let srow = tout.row(ii);
                            let grow = &g[ii * c..(ii + 1) * c];
                            let inner = dot(srow, grow);
                            for jj in 0..c {
                                da[ii * c + jj] += srow[jj] * (grow[jj] - inner);
                            }
                        }
                    }
                }
                Op::SumAll { a } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let da = &mut lo[a.0];
                        let gv = g[0];
                        for d in da.iter_mut() {
                            *d += gv;
                        }
                    }
                }
                Op::ConcatCols { parts } => {
                    let total = nodes[i].value.cols();
                    let r = nodes[i].value.rows();
                    let mut col = 0;
                    for p in parts {
                        let c = nodes[p.0].value.cols();
                        if nodes[p.0].requires_grad {
                            ensure(lo, *p);
                            let dp = &mut lo[p.0];
                            for ii in 0..r {
                                axpy(
                                    &mut dp[ii * c..(ii + 1) * c],
                                    1.0,
                                    &g[ii * total + col..ii * total + col + c],
                                );
                            }
                        }
                        col += c;
                    }
                }
                Op::EdgeConcat { u, feat, src, dst } => {
                    let k = nodes[u.0].value.cols();
                    let fc = nodes[feat.0].value.cols();
                    let width = 2 * k + fc;
                    if nodes[u.0].requires_grad {
                        ensure(lo, *u);
                        let du = &mut lo[u.0];
                        for e in 0..src.len() {
                            let o = e * width;
                            axpy(&mut du[src[e] * k..(src[e] + 1) * k], 1.0, &g[o..o + k]);
                            axpy(
                                &mut du[dst[e] * k..(dst[e] + 1) * k],
                                1.0,
                                &g[o + k..o + 2 * k],
                            );
                        }
                    }
                    if nodes[feat.0].requires_grad {
                        ensure(lo, *feat);
                        let df = &mut lo[feat.0];
                        for e in 0..src.len() {
                            let o = e * width;
                            axpy(&mut df[e * fc..(e + 1) * fc], 1.0, &g[o + 2 * k..o + width]);
                        }
                    }
                }
                Op::IndexSum { a, targets } => {
                    if nodes[a.0].requires_grad {
                        ensure(lo, *a);
                        let c = nodes[a.0].value.cols();
                        let da = &mut lo[a.0];
                        for (e, &t) in targets.iter().enumerate() {
                            axpy(&mut da[e * c..(e + 1) * c], 1.0, &g[t * c..(t + 1) * c]);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
