//! Chunk-at-a-time evaluation and reverse accumulation.
//!
//! Same quantities as [`super::Tape`], laid out unit-major with the sample index
//! innermost so every inner loop runs over contiguous samples.

use super::network::{FlatParams, Layout, ParallelNetwork, SubNetwork};

/// Sets the length without touching retained contents.
fn fit(v: &mut Vec<f64>, len: usize) {
    if v.len() > len {
        v.truncate(len);
    } else {
        v.resize(len, 0.0);
    }
}

/// Dot product with four independent partial sums.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn sum(a: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let c = a.chunks_exact(4);
    let tail: f64 = c.remainder().iter().sum();
    for x in c {
        for k in 0..4 {
            acc[k] += x[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `tanh` with its first two derivatives, via one `exp`.
///
/// Absolute error stays below `1e-15`, which is all the energy sums need.
#[inline]
fn tanh_d1_d2(z: f64) -> (f64, f64, f64) {
    let t = if z.abs() > 19.0 {
        1.0f64.copysign(z)
    } else {
        let e = (2.0 * z).exp();
        (e - 1.0) / (e + 1.0)
    };
    let d1 = 1.0 - t * t;
    (t, d1, -2.0 * t * d1)
}

#[derive(Clone, Debug, Default)]
struct Level {
    act: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    /// `[(r·d + i)·n + p]`
    ztan: Vec<f64>,
    jac: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
struct SubBatch {
    levels: Vec<Level>,
    phi: Vec<f64>,
    /// `[i·n + p]`
    dphi: Vec<f64>,
}

/// Forward caches for every sub-network over one chunk of points.
#[derive(Debug)]
pub(crate) struct Batch<'a> {
    net: &'a ParallelNetwork,
    layout: Layout,
    slots: usize,
    d: usize,
    n: usize,
    /// Points, `[i·n + p]`.
    x: Vec<f64>,
    subs: Vec<SubBatch>,
    /// `u(x_p)`.
    pub u: Vec<f64>,
    /// `∂_i u(x_p)` at `[i·n + p]`.
    pub grad: Vec<f64>,
    abar: Vec<f64>,
    jbar: Vec<f64>,
    zbar: Vec<f64>,
    ztbar: Vec<f64>,
}

impl<'a> Batch<'a> {
    pub fn new(net: &'a ParallelNetwork) -> Self {
        let shape = net.shape();
        Self {
            net,
            layout: shape.layout(),
            slots: shape.slots_per_subnet(),
            d: shape.d,
            n: 0,
            x: Vec::new(),
            subs: vec![SubBatch::default(); net.subnets().len()],
            u: Vec::new(),
            grad: Vec::new(),
            abar: Vec::new(),
            jbar: Vec::new(),
            zbar: Vec::new(),
            ztbar: Vec::new(),
        }
    }

    pub fn net(&self) -> &'a ParallelNetwork {
        self.net
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Evaluates every sub-network at the `n` points yielded by `points`.
    pub fn record<'p>(&mut self, points: impl ExactSizeIterator<Item = &'p [f64]>) {
        let d = self.d;
        let n = points.len();
        self.n = n;
        fit(&mut self.x, d * n);
        for (p, pt) in points.enumerate() {
            for i in 0..d {
                self.x[i * n + p] = pt[i];
            }
        }
        fit(&mut self.u, n);
        self.u.fill(0.0);
        fit(&mut self.grad, d * n);
        self.grad.fill(0.0);
        for ((sb, s), &c) in self.subs.iter_mut().zip(self.net.subnets()).zip(self.net.coefficients()) {
            forward_sub(sb, s, &self.x, d, n);
            for p in 0..n {
                self.u[p] += c * sb.phi[p];
            }
            for (g, dp) in self.grad.iter_mut().zip(&sb.dphi) {
                *g += c * dp;
            }
        }
    }

    /// Adds `scale · Σ_p ∂/∂θ [seed_u_p·u(x_p) + seed_grad_p·∇u(x_p)]` into `out`.
    ///
    /// `seed_grad` is laid out `[i·n + p]`; pass `None` when it vanishes.
    pub fn accumulate(&mut self, seed_u: &[f64], seed_grad: Option<&[f64]>, scale: f64, out: &mut FlatParams) {
        let (d, n) = (self.d, self.n);
        for k in 0..self.subs.len() {
            let sb = &self.subs[k];
            let s = &self.net.subnets()[k];
            let mut oc = dot(&seed_u[..n], &sb.phi[..n]);
            if let Some(sg) = seed_grad {
                oc += dot(sg, &sb.dphi);
            }
            out.outer[k] += scale * oc;

            let ck = self.net.coefficients()[k] * scale;
            if ck == 0.0 {
                continue;
            }
            let base = k * self.slots;
            let inner = &mut out.inner[base..base + self.slots];
            reverse_sub(
                sb,
                s,
                &self.layout,
                &self.x,
                (d, n),
                (seed_u, seed_grad, ck),
                inner,
                [&mut self.abar, &mut self.jbar, &mut self.zbar, &mut self.ztbar],
            );
        }
    }
}

fn forward_sub(sb: &mut SubBatch, s: &SubNetwork, x: &[f64], d: usize, n: usize) {
    let layers = s.layers();
    let last = layers.len() - 1;
    sb.levels.resize_with(last, Level::default);
    for h in 0..last {
        let layer = &layers[h];
        let (rows, cols) = (layer.rows(), layer.cols());
        let (done, rest) = sb.levels.split_at_mut(h);
        let lv = &mut rest[0];
        fit(&mut lv.act, rows * n);
        fit(&mut lv.d1, rows * n);
        fit(&mut lv.d2, rows * n);
        fit(&mut lv.ztan, rows * d * n);
        fit(&mut lv.jac, rows * d * n);
        let (a_in, j_in): (&[f64], Option<&[f64]>) = match done.last() {
            None => (x, None),
            Some(prev) => (&prev.act, Some(&prev.jac)),
        };
        for r in 0..rows {
            let row = layer.row(r);
            let z = &mut lv.act[r * n..(r + 1) * n];
            z.fill(layer.bias()[r]);
            for q in 0..cols {
                let w = row[q];
                if w == 0.0 {
                    continue;
                }
                let a = &a_in[q * n..(q + 1) * n];
                for p in 0..n {
                    z[p] += w * a[p];
                }
            }
            for i in 0..d {
                let zt = &mut lv.ztan[(r * d + i) * n..(r * d + i + 1) * n];
                match j_in {
                    None => zt.fill(row[i]),
                    Some(j) => {
                        zt.fill(0.0);
                        for q in 0..cols {
                            let w = row[q];
                            if w == 0.0 {
                                continue;
                            }
                            let jq = &j[(q * d + i) * n..(q * d + i + 1) * n];
                            for p in 0..n {
                                zt[p] += w * jq[p];
                            }
                        }
                    }
                }
            }
            let span = r * n..(r + 1) * n;
            let (act, d1s, d2s) = (&mut lv.act[span.clone()], &mut lv.d1[span.clone()], &mut lv.d2[span]);
            for ((a, g1), g2) in act.iter_mut().zip(d1s.iter_mut()).zip(d2s.iter_mut()) {
                (*a, *g1, *g2) = tanh_d1_d2(*a);
            }
            let span = r * d * n..(r + 1) * d * n;
            for (jr, zr) in lv.jac[span.clone()].chunks_exact_mut(n).zip(lv.ztan[span].chunks_exact(n)) {
                for ((j, z), g1) in jr.iter_mut().zip(zr).zip(d1s.iter()) {
                    *j = g1 * z;
                }
            }
        }
    }
    let out = &layers[last];
    let w = out.row(0);
    fit(&mut sb.phi, n);
    sb.phi.fill(out.bias()[0]);
    fit(&mut sb.dphi, d * n);
    sb.dphi.fill(0.0);
    let (a_in, j_in): (&[f64], Option<&[f64]>) = match sb.levels.last() {
        None => (x, None),
        Some(lv) => (&lv.act, Some(&lv.jac)),
    };
    for (q, &wq) in w.iter().enumerate() {
        if wq == 0.0 {
            continue;
        }
        for p in 0..n {
            sb.phi[p] += wq * a_in[q * n + p];
        }
        for i in 0..d {
            match j_in {
                None => {
                    if q == i {
                        sb.dphi[i * n..(i + 1) * n].iter_mut().for_each(|v| *v += wq);
                    }
                }
                Some(j) => {
                    let jq = &j[(q * d + i) * n..(q * d + i + 1) * n];
                    let dp = &mut sb.dphi[i * n..(i + 1) * n];
                    for p in 0..n {
                        dp[p] += wq * jq[p];
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn reverse_sub(
    sb: &SubBatch,
    s: &SubNetwork,
    lay: &Layout,
    x: &[f64],
    (d, n): (usize, usize),
    (seed_u, seed_grad, ck): (&[f64], Option<&[f64]>, f64),
    inner: &mut [f64],
    [abar, jbar, zbar, ztbar]: [&mut Vec<f64>; 4],
) {
    let layers = s.layers();
    let last = layers.len() - 1;
    let ol = &layers[last];
    let moff = lay.mat_off[last];
    inner[lay.bias_off[last]] += ck * sum(seed_u);
    let (a_in, j_in): (&[f64], Option<&[f64]>) = match sb.levels.last() {
        None => (x, None),
        Some(lv) => (&lv.act, Some(&lv.jac)),
    };
    for q in 0..ol.cols() {
        let mut acc = dot(seed_u, &a_in[q * n..(q + 1) * n]);
        if let Some(sg) = seed_grad {
            for i in 0..d {
                let g = &sg[i * n..(i + 1) * n];
                match j_in {
                    None => {
                        if q == i {
                            acc += sum(g);
                        }
                    }
                    Some(j) => {
                        acc += dot(g, &j[(q * d + i) * n..(q * d + i + 1) * n]);
                    }
                }
            }
        }
        inner[moff + q] += ck * acc;
    }
    if last == 0 {
        return;
    }
    let top = ol.cols();
    fit(abar, top * n);
    fit(jbar, top * d * n);
    if seed_grad.is_none() {
        jbar.fill(0.0);
    }
    for q in 0..top {
        let w = ol.weight(0, q) * ck;
        for p in 0..n {
            abar[q * n + p] = w * seed_u[p];
        }
        if let Some(sg) = seed_grad {
            for i in 0..d {
                let o = (q * d + i) * n;
                for p in 0..n {
                    jbar[o + p] = w * sg[i * n + p];
                }
            }
        }
    }
    for h in (0..last).rev() {
        let layer = &layers[h];
        let (rows, cols) = (layer.rows(), layer.cols());
        let lv = &sb.levels[h];
        let pc = lay.dims[h].1;
        let moff = lay.mat_off[h];
        let boff = lay.bias_off[h];
        fit(zbar, rows * n);
        fit(ztbar, rows * d * n);
        for r in 0..rows {
            let zb = &mut zbar[r * n..(r + 1) * n];
            let span = r * n..(r + 1) * n;
            let (ab, d1s, d2s) = (&abar[span.clone()], &lv.d1[span.clone()], &lv.d2[span]);
            for ((z, a), g1) in zb.iter_mut().zip(ab).zip(d1s) {
                *z = a * g1;
            }
            let span = r * d * n..(r + 1) * d * n;
            let rows_i = jbar[span.clone()].chunks_exact(n).zip(lv.ztan[span.clone()].chunks_exact(n)).zip(ztbar[span].chunks_exact_mut(n));
            for ((jb, zt), ztb) in rows_i {
                for ((((z, o), &j), &t), (g1, g2)) in zb.iter_mut().zip(ztb.iter_mut()).zip(jb).zip(zt).zip(d1s.iter().zip(d2s)) {
                    *z += g2 * j * t;
                    *o = g1 * j;
                }
            }
        }
        let (a_prev, j_prev): (&[f64], Option<&[f64]>) =
            if h == 0 { (x, None) } else { (&sb.levels[h - 1].act, Some(&sb.levels[h - 1].jac)) };
        for r in 0..rows {
            let zb = &zbar[r * n..(r + 1) * n];
            inner[boff + r] += sum(zb);
            for q in 0..cols {
                let mut acc = dot(zb, &a_prev[q * n..(q + 1) * n]);
                match j_prev {
                    None => {
                        let o = (r * d + q) * n;
                        acc += sum(&ztbar[o..o + n]);
                    }
                    Some(j) => {
                        for i in 0..d {
                            acc += dot(&ztbar[(r * d + i) * n..(r * d + i + 1) * n], &j[(q * d + i) * n..(q * d + i + 1) * n]);
                        }
                    }
                }
                inner[moff + r * pc + q] += acc;
            }
        }
        if h > 0 {
            fit(abar, cols * n);
            abar.fill(0.0);
            fit(jbar, cols * d * n);
            jbar.fill(0.0);
            for r in 0..rows {
                let row = layer.row(r);
                for (q, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for p in 0..n {
                        abar[q * n + p] += w * zbar[r * n + p];
                    }
                    for i in 0..d {
                        let (oq, or) = ((q * d + i) * n, (r * d + i) * n);
                        for p in 0..n {
                            jbar[oq + p] += w * ztbar[or + p];
                        }
                    }
                }
            }
        }
    }
}
