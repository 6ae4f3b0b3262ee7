//! Fused evaluation of `u`, `∇u` and reverse accumulation of parameter gradients
//! of `seed_u·u(x) + seed_grad·∇u(x)`.

use super::activation::tanh_d1_d2;
use super::network::{FlatParams, Layout, ParallelNetwork, SubNetwork};
use crate::error::{check_dim, Result};

/// Per-hidden-level caches of one sub-network.
#[derive(Clone, Debug, Default)]
struct SubTape {
    act: Vec<Vec<f64>>,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
    /// Input tangents of the pre-activations, `rows × d` row-major.
    ztan: Vec<Vec<f64>>,
    /// Input Jacobian of the activations, `rows × d` row-major.
    jac: Vec<Vec<f64>>,
    phi: f64,
    dphi: Vec<f64>,
}

impl SubTape {
    fn for_subnet(s: &SubNetwork) -> Self {
        let d = s.input_dim();
        let hidden = &s.layers()[..s.depth() - 1];
        let n = |f: usize| hidden.iter().map(|l| vec![0.0; l.rows() * f]).collect::<Vec<_>>();
        Self { act: n(1), d1: n(1), d2: n(1), ztan: n(d), jac: n(d), phi: 0.0, dphi: vec![0.0; d] }
    }

    fn record(&mut self, s: &SubNetwork, x: &[f64]) {
        let d = x.len();
        let layers = s.layers();
        let last = layers.len() - 1;
        for (h, layer) in layers[..last].iter().enumerate() {
            let (prev_act, rest_act) = self.act.split_at_mut(h);
            let input: &[f64] = if h == 0 { x } else { &prev_act[h - 1] };
            let z = &mut rest_act[0];
            layer.apply(input, z);
            let (prev_jac, rest_jac) = self.jac.split_at_mut(h);
            let zt = &mut self.ztan[h];
            for r in 0..layer.rows() {
                let row = layer.row(r);
                for i in 0..d {
                    zt[r * d + i] = if h == 0 {
                        row[i]
                    } else {
                        let pj = &prev_jac[h - 1];
                        let mut acc = 0.0;
                        for (q, w) in row.iter().enumerate() {
                            acc += w * pj[q * d + i];
                        }
                        acc
                    };
                }
                let (t, d1, d2) = tanh_d1_d2(z[r]);
                z[r] = t;
                self.d1[h][r] = d1;
                self.d2[h][r] = d2;
                for i in 0..d {
                    rest_jac[0][r * d + i] = d1 * zt[r * d + i];
                }
            }
        }
        let out = &layers[last];
        let input: &[f64] = if last == 0 { x } else { &self.act[last - 1] };
        let mut v = [0.0];
        out.apply(input, &mut v);
        self.phi = v[0];
        let row = out.row(0);
        for i in 0..d {
            self.dphi[i] = if last == 0 {
                row[i]
            } else {
                let j = &self.jac[last - 1];
                let mut acc = 0.0;
                for (q, w) in row.iter().enumerate() {
                    acc += w * j[q * d + i];
                }
                acc
            };
        }
    }
}

/// Scratch space for the reverse sweep.
#[derive(Clone, Debug, Default)]
pub(crate) struct Scratch {
    abar: Vec<f64>,
    jbar: Vec<f64>,
    zbar: Vec<f64>,
    ztbar: Vec<f64>,
}

/// Record of one evaluation, sufficient for [`backward_from`].
#[derive(Clone, Debug)]
pub struct Tape<'a> {
    net: &'a ParallelNetwork,
    layout: Layout,
    slots: usize,
    x: Vec<f64>,
    subs: Vec<SubTape>,
    u: f64,
    grad: Vec<f64>,
}

impl<'a> Tape<'a> {
    pub(crate) fn new(net: &'a ParallelNetwork) -> Self {
        let shape = net.shape();
        Self {
            net,
            layout: shape.layout(),
            slots: shape.slots_per_subnet(),
            x: vec![0.0; shape.d],
            subs: net.subnets().iter().map(SubTape::for_subnet).collect(),
            u: 0.0,
            grad: vec![0.0; shape.d],
        }
    }

    pub(crate) fn record(&mut self, x: &[f64]) {
        self.x.copy_from_slice(x);
        self.u = 0.0;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        for ((st, s), c) in self.subs.iter_mut().zip(self.net.subnets()).zip(self.net.coefficients()) {
            st.record(s, x);
            self.u += c * st.phi;
            for (g, dp) in self.grad.iter_mut().zip(&st.dphi) {
                *g += c * dp;
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.u
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// Per-subnet outputs `φ_k(x)`.
    pub fn subnet_values(&self) -> Vec<f64> {
        self.subs.iter().map(|s| s.phi).collect()
    }

    /// Adds `scale · ∂/∂θ [seed_u·u + seed_grad·∇u]` into `out`.
    pub(crate) fn accumulate(&self, seed_u: f64, seed_grad: &[f64], scale: f64, out: &mut FlatParams, sc: &mut Scratch) {
        let d = self.x.len();
        let lay = &self.layout;
        for (k, (st, s)) in self.subs.iter().zip(self.net.subnets()).enumerate() {
            let mut oc = seed_u * st.phi;
            for (g, dp) in seed_grad.iter().zip(&st.dphi) {
                oc += g * dp;
            }
            out.outer[k] += scale * oc;

            let ck = self.net.coefficients()[k] * scale;
            if ck == 0.0 {
                continue;
            }
            let su = seed_u * ck;
            let base = k * self.slots;
            let layers = s.layers();
            let last = layers.len() - 1;
            let inner = &mut out.inner[base..base + self.slots];

            // Output layer.
            let ol = &layers[last];
            let moff = lay.mat_off[last];
            inner[lay.bias_off[last]] += su;
            let n_in = ol.cols();
            sc.abar.clear();
            sc.jbar.clear();
            for q in 0..n_in {
                let (a_q, mut jterm) = if last == 0 {
                    (self.x[q], seed_grad[q] * ck)
                } else {
                    let j = &st.jac[last - 1];
                    let mut acc = 0.0;
                    for i in 0..d {
                        acc += seed_grad[i] * j[q * d + i];
                    }
                    (st.act[last - 1][q], acc * ck)
                };
                jterm += su * a_q;
                inner[moff + q] += jterm;
                if last > 0 {
                    let w = ol.weight(0, q);
                    sc.abar.push(su * w);
                    for i in 0..d {
                        sc.jbar.push(w * seed_grad[i] * ck);
                    }
                }
            }

            // Hidden layers, top-down. Level h produced by layer h.
            for h in (0..last).rev() {
                let layer = &layers[h];
                let rows = layer.rows();
                let cols = layer.cols();
                let pc = lay.dims[h].1;
                let moff = lay.mat_off[h];
                let boff = lay.bias_off[h];
                sc.zbar.clear();
                sc.ztbar.clear();
                for p in 0..rows {
                    let d1 = st.d1[h][p];
                    let d2 = st.d2[h][p];
                    let mut cross = 0.0;
                    for i in 0..d {
                        let jb = sc.jbar[p * d + i];
                        cross += jb * st.ztan[h][p * d + i];
                        sc.ztbar.push(d1 * jb);
                    }
                    sc.zbar.push(sc.abar[p] * d1 + d2 * cross);
                }
                for p in 0..rows {
                    let zb = sc.zbar[p];
                    inner[boff + p] += zb;
                    let row_off = moff + p * pc;
                    if h == 0 {
                        for q in 0..cols {
                            inner[row_off + q] += zb * self.x[q] + sc.ztbar[p * d + q];
                        }
                    } else {
                        let a_in = &st.act[h - 1];
                        let j_in = &st.jac[h - 1];
                        for q in 0..cols {
                            let mut acc = zb * a_in[q];
                            for i in 0..d {
                                acc += sc.ztbar[p * d + i] * j_in[q * d + i];
                            }
                            inner[row_off + q] += acc;
                        }
                    }
                }
                if h > 0 {
                    sc.abar.clear();
                    sc.jbar.clear();
                    sc.abar.resize(cols, 0.0);
                    sc.jbar.resize(cols * d, 0.0);
                    for p in 0..rows {
                        let row = layer.row(p);
                        let zb = sc.zbar[p];
                        for (q, w) in row.iter().enumerate() {
                            sc.abar[q] += w * zb;
                            for i in 0..d {
                                sc.jbar[q * d + i] += w * sc.ztbar[p * d + i];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Evaluates `u(x)`, `∇u(x)` and returns a tape for [`backward_from`].
pub fn loss_primitives<'a>(net: &'a ParallelNetwork, x: &[f64]) -> Result<(f64, Vec<f64>, Tape<'a>)> {
    check_dim(net.input_dim(), x.len())?;
    let mut tape = Tape::new(net);
    tape.record(x);
    Ok((tape.u, tape.grad.clone(), tape))
}

/// Parameter gradient of `seed_u·u(x) + seed_grad·∇u(x)` at the taped point.
pub fn backward_from(tape: &Tape<'_>, seed_u: f64, seed_grad: &[f64]) -> FlatParams {
    assert_eq!(seed_grad.len(), tape.x.len(), "seed_grad must have dimension d");
    let mut out = FlatParams::zeros(tape.net.shape());
    tape.accumulate(seed_u, seed_grad, 1.0, &mut out, &mut Scratch::default());
    out
}

impl SubNetwork {
    /// Value and input gradient of this sub-network alone.
    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.input_dim(), x.len())?;
        let mut t = SubTape::for_subnet(self);
        t.record(self, x);
        Ok((t.phi, t.dphi))
    }
}
