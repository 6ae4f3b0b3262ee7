//! A tiny compiler from level-by-level gadget circuits to uniform tanh sub-networks.
//!
//! Every intermediate quantity is an affine form over the current layer's units
//! (the raw inputs at level zero). A level turns a list of gadgets into one new
//! hidden layer and hands back the gadget outputs as affine forms over it.

use crate::error::{invalid, Result};
use crate::netcore::{activation_derivatives, Layer, SubNetwork};

/// Affine form `Σ w_i u_i + c` over the units of the current level.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Node {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Node {
    pub fn unit(i: usize) -> Self {
        Self { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// `a·self + b·other + c`.
    pub fn combine(&self, a: f64, other: &Node, b: f64, c: f64) -> Node {
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        for &(i, w) in &self.terms {
            terms.push((i, a * w));
        }
        for &(i, w) in &other.terms {
            match terms.iter_mut().find(|(j, _)| *j == i) {
                Some(t) => t.1 += b * w,
                None => terms.push((i, b * w)),
            }
        }
        Node { terms, constant: a * self.constant + b * other.constant + c }
    }
}

/// Parameters shared by the difference-quotient gadgets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Gadget {
    /// Step of the difference quotient.
    pub h: f64,
    /// Expansion point of `tanh`.
    pub x0: f64,
}

impl Gadget {
    pub fn new(h: f64, x0: f64) -> Result<Self> {
        let d2 = activation_derivatives(x0, 2)[2];
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("difference step must be positive, got {h}")));
        }
        if d2.abs() < 1e-12 {
            return Err(invalid(format!("tanh'' vanishes at x0 = {x0}")));
        }
        Ok(Self { h, x0 })
    }

    fn derivs(&self) -> [f64; 4] {
        let v = activation_derivatives(self.x0, 3);
        [v[0], v[1], v[2], v[3]]
    }
}

/// One gadget placed on a level.
#[derive(Clone, Debug)]
pub(crate) enum Op {
    /// `u²` from the symmetric second difference `ρ(x0+hu) − 2ρ(x0) + ρ(x0−hu)`.
    Square(Node, Gadget),
    /// `u·v` for `u, v ∈ [a, b]` by polarization of two symmetric second differences.
    Product { u: Node, v: Node, g: Gadget, a: f64, b: f64 },
    /// `u` through a single `tanh(hu)/h` unit.
    Identity(Node, f64),
    /// The tanh bump `ψ^s(3N(u − m/N))` on an input coordinate.
    Bump { u: Node, n: usize, s: f64, m: usize },
    /// A value known at build time; costs no units.
    Const(f64),
}

/// Sparse rows `(column, weight)` and biases of one hidden layer.
type SparseLayer = (Vec<Vec<(usize, f64)>>, Vec<f64>);

#[derive(Debug)]
pub(crate) struct Circuit {
    d: usize,
    layers: Vec<SparseLayer>,
}

impl Circuit {
    pub fn new(d: usize) -> Self {
        Self { d, layers: Vec::new() }
    }

    pub fn inputs(&self) -> Vec<Node> {
        (0..self.d).map(Node::unit).collect()
    }

    /// Appends one hidden layer realizing `ops` and returns their outputs.
    pub fn level(&mut self, ops: &[Op]) -> Vec<Node> {
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut bias = Vec::new();
        let mut push = |n: &Node, scale: f64, offset: f64, rows: &mut Vec<Vec<(usize, f64)>>| -> usize {
            rows.push(n.terms.iter().map(|&(i, w)| (i, scale * w)).collect());
            bias.push(scale * n.constant + offset);
            rows.len() - 1
        };
        let mut out = Vec::with_capacity(ops.len());
        for op in ops {
            let node = match op {
                Op::Const(c) => Node::constant(*c),
                Op::Identity(u, h) => {
                    let i = push(u, *h, 0.0, &mut rows);
                    Node { terms: vec![(i, 1.0 / h)], constant: 0.0 }
                }
                Op::Square(u, g) => {
                    let [r0, _, r2, _] = g.derivs();
                    let k = 1.0 / (r2 * g.h * g.h);
                    let i = push(u, g.h, g.x0, &mut rows);
                    let j = push(u, -g.h, g.x0, &mut rows);
                    Node { terms: vec![(i, k), (j, k)], constant: -2.0 * k * r0 }
                }
                Op::Product { u, v, g, a, b } => {
                    let [r0, r1, r2, _] = g.derivs();
                    let w = b - a;
                    let q = w * w / 4.0;
                    let lin = a * w;
                    // s = (u + v − 2a)/w and t = (u − v)/w live in [0, 2] and [−1, 1].
                    let s = u.combine(1.0 / w, v, 1.0 / w, -2.0 * a / w);
                    let t = u.combine(1.0 / w, v, -1.0 / w, 0.0);
                    let k = 1.0 / (r2 * g.h * g.h);
                    let even = 2.0 * q * k;
                    let odd = lin / (r1 * g.h);
                    let alpha = 0.5 * (even + odd);
                    let beta = 0.5 * (even - odd);
                    let gamma = -q * k;
                    let i1 = push(&s, g.h, g.x0, &mut rows);
                    let i2 = push(&s, -g.h, g.x0, &mut rows);
                    let i3 = push(&t, g.h, g.x0, &mut rows);
                    let i4 = push(&t, -g.h, g.x0, &mut rows);
                    Node { terms: vec![(i1, alpha), (i2, beta), (i3, gamma), (i4, gamma)], constant: a * a - even * r0 - 2.0 * gamma * r0 }
                }
                Op::Bump { u, n, s, m } => {
                    let scale = 3.0 * *n as f64 * s;
                    let shift = -3.0 * *m as f64 * s;
                    let i = push(u, scale, shift + 1.5 * s, &mut rows);
                    let j = push(u, scale, shift - 1.5 * s, &mut rows);
                    Node { terms: vec![(i, 0.5), (j, -0.5)], constant: 0.0 }
                }
            };
            out.push(node);
        }
        self.layers.push((rows, bias));
        out
    }

    /// Pairs nodes level by level until one remains; constant pairs fold exactly.
    pub fn product_tree(&mut self, mut nodes: Vec<Node>, g: Gadget) -> Node {
        let leaves = nodes.len().next_power_of_two();
        nodes.resize(leaves, Node::constant(1.0));
        while nodes.len() > 1 {
            let ops: Vec<Op> = nodes
                .chunks(2)
                .map(|p| match (p[0].is_constant(), p[1].is_constant()) {
                    (true, true) => Op::Const(p[0].constant * p[1].constant),
                    _ => Op::Product { u: p[0].clone(), v: p[1].clone(), g, a: 0.0, b: 1.0 },
                })
                .collect();
            nodes = self.level(&ops);
        }
        nodes.pop().expect("non-empty tree")
    }

    /// Emits the sub-network with every hidden layer zero-padded to `width`.
    pub fn finish(&self, root: &Node, width: usize) -> Result<SubNetwork> {
        if self.layers.is_empty() {
            return Err(invalid("circuit has no hidden layer"));
        }
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        let mut cols = self.d;
        for (rows, bias) in &self.layers {
            if rows.len() > width {
                return Err(invalid(format!("level needs {} units, width is {width}", rows.len())));
            }
            let mut l = Layer::zeros(width, cols);
            for (r, row) in rows.iter().enumerate() {
                for &(c, w) in row {
                    l.weights_mut()[r * cols + c] += w;
                }
                l.bias_mut()[r] = bias[r];
            }
            layers.push(l);
            cols = width;
        }
        let mut out = Layer::zeros(1, cols);
        for &(c, w) in &root.terms {
            out.weights_mut()[c] += w;
        }
        out.bias_mut()[0] = root.constant;
        layers.push(out);
        SubNetwork::new(layers, width)
    }
}
