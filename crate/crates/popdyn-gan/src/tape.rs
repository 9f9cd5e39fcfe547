//! Eager reverse-mode autodiff on a growing tape.
//!
//! Every operation computes its value immediately and records how it was
//! built. [`Tape::backward`] walks the record in reverse and expresses each
//! vector-Jacobian product *with tape operations*, so gradients are
//! themselves differentiable nodes: calling `backward` on a function of a
//! gradient yields exact second derivatives. That property is what lets the
//! critic's gradient-penalty term be trained with exact gradients instead
//! of finite-difference approximations.
//!
//! The op set is deliberately small. Structural movement (convolution
//! lowering, padding, broadcasting, reductions, channel bookkeeping) is
//! expressed through the adjoint pair [`Tape::gather`] / [`Tape::scatter`],
//! which keeps everything closed under differentiation.

use ndarray::{ArrayD, Ix2, IxDyn};
use std::sync::Arc;

/// Handle to a value on a [`Tape`]. Only meaningful for the tape that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Neg(NodeId),
    AddScalar(NodeId),
    MulScalar(NodeId, f64),
    /// Elementwise x^p with constant exponent; covers square, sqrt, and
    /// reciprocal, so no separate ops are needed for them.
    PowConst(NodeId, f64),
    Matmul(NodeId, NodeId),
    Transpose(NodeId),
    Reshape(NodeId),
    /// out[t] = in[map[t]] over flattened indices.
    Gather(NodeId, Arc<Vec<usize>>),
    /// out[s] = sum of in[t] over every t with map[t] == s.
    Scatter(NodeId, Arc<Vec<usize>>),
    LeakyRelu(NodeId, f64),
    Tanh(NodeId),
}

struct Node {
    op: Op,
    value: ArrayD<f64>,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Result of a [`Tape::backward`] pass: the gradient node of every node
/// that influenced the root, keyed by the node's id.
pub struct Gradients {
    grads: Vec<Option<NodeId>>,
}

impl Gradients {
    /// Gradient node of `id`, or `None` when the root does not depend on it.
    pub fn get(&self, id: NodeId) -> Option<NodeId> {
        self.grads.get(id.0).copied().flatten()
    }
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

    pub fn value(&self, id: NodeId) -> &ArrayD<f64> {
        &self.nodes[id.0].value
    }

    /// The value of a single-element node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = &self.nodes[id.0].value;
        assert_eq!(v.len(), 1, "node is not a scalar");
        *v.iter().next().unwrap()
    }

    fn push(&mut self, op: Op, value: ArrayD<f64>) -> NodeId {
        // Keep every stored value in standard layout so index maps can
        // address flat slices; transposes and their derived values would
        // otherwise arrive in reversed-stride order.
        let value = if value.is_standard_layout() {
            value
        } else {
            value.as_standard_layout().into_owned()
        };
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: ArrayD<f64>) -> NodeId {
        self.push(Op::Leaf, value)
    }

    /// Convenience: a leaf holding a 2-D array.
    pub fn leaf2(&mut self, value: ndarray::Array2<f64>) -> NodeId {
        self.leaf(value.into_dyn())
    }

    fn flat(&self, id: NodeId) -> &[f64] {
        self.nodes[id.0]
            .value
            .as_slice()
            .expect("tape values are kept in standard layout")
    }

    fn binary_elementwise(
        &mut self,
        a: NodeId,
        b: NodeId,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> NodeId {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.shape(), vb.shape(), "elementwise shape mismatch");
        let value = ndarray::Zip::from(va).and(vb).map_collect(|&x, &y| f(x, y));
        self.push(op, value)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, Op::Div(a, b), |x, y| x / y)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a.0].value.mapv(|x| -x);
        self.push(Op::Neg(a), value)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.nodes[a.0].value.mapv(|x| x + c);
        self.push(Op::AddScalar(a), value)
    }

    pub fn mul_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.nodes[a.0].value.mapv(|x| x * c);
        self.push(Op::MulScalar(a, c), value)
    }

    pub fn pow_const(&mut self, a: NodeId, p: f64) -> NodeId {
        let value = self.nodes[a.0].value.mapv(|x| x.powf(p));
        self.push(Op::PowConst(a, p), value)
    }

    /// 2-D matrix product.
    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = {
            let va = as2(&self.nodes[a.0].value);
            let vb = as2(&self.nodes[b.0].value);
            assert_eq!(va.ncols(), vb.nrows(), "matmul inner dimension mismatch");
            va.dot(&vb).into_dyn()
        };
        self.push(Op::Matmul(a, b), value)
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = as2(&self.nodes[a.0].value).t().to_owned().into_dyn();
        self.push(Op::Transpose(a), value)
    }

    pub fn reshape(&mut self, a: NodeId, shape: &[usize]) -> NodeId {
        let flat = self.flat(a).to_vec();
        assert_eq!(flat.len(), shape.iter().product::<usize>(), "reshape keeps element count");
        let value = ArrayD::from_shape_vec(IxDyn(shape), flat).unwrap();
        self.push(Op::Reshape(a), value)
    }

    /// out[t] = in[map[t]], with `map.len() == out_shape.len product`.
    /// Duplicated indices broadcast; the adjoint sums them back.
    pub fn gather(&mut self, a: NodeId, map: Arc<Vec<usize>>, out_shape: &[usize]) -> NodeId {
        let src = self.flat(a);
        debug_assert_eq!(map.len(), out_shape.iter().product::<usize>());
        let data: Vec<f64> = map.iter().map(|&s| src[s]).collect();
        let value = ArrayD::from_shape_vec(IxDyn(out_shape), data).unwrap();
        self.push(Op::Gather(a, map), value)
    }

    /// out[s] = Σ in[t] over t with map[t] == s; entries of `out_shape`
    /// never hit by `map` stay zero. Exact adjoint of [`Tape::gather`].
    pub fn scatter(&mut self, a: NodeId, map: Arc<Vec<usize>>, out_shape: &[usize]) -> NodeId {
        let src = self.flat(a);
        debug_assert_eq!(map.len(), src.len());
        let mut data = vec![0.0f64; out_shape.iter().product()];
        for (t, &s) in map.iter().enumerate() {
            data[s] += src[t];
        }
        let value = ArrayD::from_shape_vec(IxDyn(out_shape), data).unwrap();
        self.push(Op::Scatter(a, map), value)
    }

    pub fn leaky_relu(&mut self, a: NodeId, slope: f64) -> NodeId {
        let value = self.nodes[a.0].value.mapv(|x| if x > 0.0 { x } else { slope * x });
        self.push(Op::LeakyRelu(a, slope), value)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let value = self.nodes[a.0].value.mapv(f64::tanh);
        self.push(Op::Tanh(a), value)
    }

    /// Sum of all elements, as a `[1]` node.
    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let map = Arc::new(vec![0usize; self.nodes[a.0].value.len()]);
        self.scatter(a, map, &[1])
    }

    /// Mean of all elements, as a `[1]` node.
    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let n = self.nodes[a.0].value.len();
        let s = self.sum_all(a);
        self.mul_scalar(s, 1.0 / n as f64)
    }

    /// Reverse pass from a scalar `root`. Gradient nodes are appended to
    /// this same tape, so any function of them can be differentiated again
    /// by a second `backward` call.
    pub fn backward(&mut self, root: NodeId) -> Gradients {
        assert_eq!(self.nodes[root.0].value.len(), 1, "backward needs a scalar root");
        let n = root.0 + 1;
        let mut grads: Vec<Option<NodeId>> = vec![None; n];
        let seed = ArrayD::ones(self.nodes[root.0].value.raw_dim());
        grads[root.0] = Some(self.leaf(seed));

        for i in (0..n).rev() {
            let Some(g) = grads[i] else { continue };
            let out = NodeId(i);
            match self.nodes[i].op.clone() {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.accum(&mut grads, a, g);
                    self.accum(&mut grads, b, g);
                }
                Op::Sub(a, b) => {
                    self.accum(&mut grads, a, g);
                    let ng = self.neg(g);
                    self.accum(&mut grads, b, ng);
                }
                Op::Mul(a, b) => {
                    let da = self.mul(g, b);
                    let db = self.mul(g, a);
                    self.accum(&mut grads, a, da);
                    self.accum(&mut grads, b, db);
                }
                Op::Div(a, b) => {
                    let da = self.div(g, b);
                    self.accum(&mut grads, a, da);
                    // d(a/b)/db = -(a/b)/b, reusing this node's own value.
                    let gy = self.mul(g, out);
                    let q = self.div(gy, b);
                    let db = self.neg(q);
                    self.accum(&mut grads, b, db);
                }
                Op::Neg(a) => {
                    let da = self.neg(g);
                    self.accum(&mut grads, a, da);
                }
                Op::AddScalar(a) => self.accum(&mut grads, a, g),
                Op::MulScalar(a, c) => {
                    let da = self.mul_scalar(g, c);
                    self.accum(&mut grads, a, da);
                }
                Op::PowConst(a, p) => {
                    let xp = self.pow_const(a, p - 1.0);
                    let gx = self.mul(g, xp);
                    let da = self.mul_scalar(gx, p);
                    self.accum(&mut grads, a, da);
                }
                Op::Matmul(a, b) => {
                    let bt = self.transpose(b);
                    let da = self.matmul(g, bt);
                    self.accum(&mut grads, a, da);
                    let at = self.transpose(a);
                    let db = self.matmul(at, g);
                    self.accum(&mut grads, b, db);
                }
                Op::Transpose(a) => {
                    let da = self.transpose(g);
                    self.accum(&mut grads, a, da);
                }
                Op::Reshape(a) => {
                    let shape = self.nodes[a.0].value.shape().to_vec();
                    let da = self.reshape(g, &shape);
                    self.accum(&mut grads, a, da);
                }
                Op::Gather(a, map) => {
                    let shape = self.nodes[a.0].value.shape().to_vec();
                    let da = self.scatter(g, map, &shape);
                    self.accum(&mut grads, a, da);
                }
                Op::Scatter(a, map) => {
                    let shape = self.nodes[a.0].value.shape().to_vec();
                    let da = self.gather(g, map, &shape);
                    self.accum(&mut grads, a, da);
                }
                Op::LeakyRelu(a, slope) => {
                    // The slope mask is locally constant, so it enters the
                    // graph as a plain leaf; second derivatives through the
                    // kink are correctly zero.
                    let mask =
                        self.nodes[a.0].value.mapv(|x| if x > 0.0 { 1.0 } else { slope });
                    let m = self.leaf(mask);
                    let da = self.mul(g, m);
                    self.accum(&mut grads, a, da);
                }
                Op::Tanh(a) => {
                    // d tanh = 1 - tanh^2, reusing this node's own value so
                    // the second derivative stays exact.
                    let y2 = self.pow_const(out, 2.0);
                    let ny2 = self.neg(y2);
                    let one_minus = self.add_scalar(ny2, 1.0);
                    let da = self.mul(g, one_minus);
                    self.accum(&mut grads, a, da);
                }
            }
        }
        Gradients { grads }
    }

    fn accum(&mut self, grads: &mut [Option<NodeId>], target: NodeId, v: NodeId) {
        grads[target.0] = Some(match grads[target.0] {
            Some(g) => self.add(g, v),
            None => v,
        });
    }
}

fn as2(v: &ArrayD<f64>) -> ndarray::ArrayView2<'_, f64> {
    v.view().into_dimensionality::<Ix2>().expect("expected a 2-D value")
}
