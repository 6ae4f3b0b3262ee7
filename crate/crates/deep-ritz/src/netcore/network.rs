use crate::error::{check_dim, invalid, Error, Result};

/// Affine map `x -> A x + b` with `A` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("layer dimensions must be positive"));
        }
        check_dim(rows * cols, weights.len())?;
        check_dim(rows, bias.len())?;
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "layer weights", index: i });
        }
        if let Some(i) = bias.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "layer bias", index: i });
        }
        Ok(Self { rows, cols, weights, bias })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, weights: vec![0.0; rows * cols], bias: vec![0.0; rows] }
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged matrix rows"));
        }
        Self::new(rows.len(), cols, rows.concat(), bias)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    #[inline]
    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    pub fn matrix_rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    #[inline]
    pub(crate) fn apply(&self, input: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut s = self.bias[r];
            for (w, v) in row.iter().zip(input) {
                s += w * v;
            }
            *o = s;
        }
    }

    fn max_abs(&self) -> f64 {
        self.weights.iter().chain(&self.bias).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Width/depth/input dimension shared by every sub-network, plus the count `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetShape {
    pub m: usize,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "L")]
    pub depth: usize,
    pub d: usize,
}

impl NetShape {
    pub fn new(m: usize, width: usize, depth: usize, d: usize) -> Result<Self> {
        if m == 0 || width == 0 || depth == 0 || d == 0 {
            return Err(invalid("m, W, L and d must all be at least 1"));
        }
        Ok(Self { m, width, depth, d })
    }

    /// Slots reserved for one sub-network in a [`FlatParams`] inner vector.
    pub fn slots_per_subnet(&self) -> usize {
        let p = param_count(self.width, self.depth, self.d);
        match aligned_dim(self.width, self.depth, self.d) {
            Some(a) => a.max(p),
            None => p,
        }
    }

    pub fn inner_len(&self) -> usize {
        self.m * self.slots_per_subnet()
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(self.width, self.depth, self.d)
    }
}

/// The aligned dimension `(W+1)((L-2)W + d + 1)`; `None` when it is not positive.
pub fn aligned_dim(width: usize, depth: usize, d: usize) -> Option<usize> {
    let w = width as i64;
    let v = (w + 1) * ((depth as i64 - 2) * w + d as i64 + 1);
    (v > 0).then_some(v as usize)
}

/// Number of weights and biases in a uniform-width sub-network.
pub fn param_count(width: usize, depth: usize, d: usize) -> usize {
    if depth == 1 {
        return d + 1;
    }
    width * (d + 1) + (depth - 2) * width * (width + 1) + width + 1
}

/// Offsets of each padded matrix and bias inside one sub-network's slot block.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub dims: Vec<(usize, usize)>,
    pub mat_off: Vec<usize>,
    pub bias_off: Vec<usize>,
}

impl Layout {
    fn new(width: usize, depth: usize, d: usize) -> Self {
        let dims: Vec<(usize, usize)> = (0..depth)
            .map(|l| {
                let rows = if l + 1 == depth { 1 } else { width };
                let cols = if l == 0 { d } else { width };
                (rows, cols)
            })
            .collect();
        let mut off = 0;
        let mut mat_off = Vec::with_capacity(depth);
        for &(r, c) in &dims {
            mat_off.push(off);
            off += r * c;
        }
        let mut bias_off = Vec::with_capacity(depth);
        for &(r, _) in &dims {
            bias_off.push(off);
            off += r;
        }
        Self { dims, mat_off, bias_off }
    }
}

/// One tanh network `R^d -> R`: hidden layers apply tanh, the last layer is affine.
#[derive(Clone, Debug, PartialEq)]
pub struct SubNetwork {
    layers: Vec<Layer>,
    width: usize,
}

impl SubNetwork {
    /// `width` is the declared bound on hidden widths.
    pub fn new(layers: Vec<Layer>, width: usize) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(invalid("a sub-network needs at least one layer"));
        };
        if last.rows != 1 {
            return Err(invalid("the output layer must have exactly one row"));
        }
        for pair in layers.windows(2) {
            check_dim(pair[0].rows, pair[1].cols)?;
        }
        for l in &layers[..layers.len() - 1] {
            if l.rows > width {
                return Err(invalid(format!("hidden width {} exceeds declared width {width}", l.rows)));
            }
        }
        Ok(Self { layers, width })
    }

    pub fn zeros(width: usize, depth: usize, d: usize) -> Self {
        let layout = Layout::new(width, depth, d);
        let layers = layout.dims.iter().map(|&(r, c)| Layer::zeros(r, c)).collect();
        Self { layers, width }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer_matrices(&self) -> Vec<Vec<Vec<f64>>> {
        self.layers.iter().map(Layer::matrix_rows).collect()
    }

    pub fn layer_biases(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|l| l.bias.clone()).collect()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.layers.iter().fold(0.0, |m, l| m.max(l.max_abs()))
    }

    pub fn is_uniform(&self) -> bool {
        let layout = Layout::new(self.width, self.depth(), self.input_dim());
        self.layers.iter().zip(&layout.dims).all(|(l, &(r, c))| l.rows == r && l.cols == c)
    }

    /// Same function, with every hidden layer zero-padded to the declared width.
    pub fn padded(&self) -> SubNetwork {
        let layout = Layout::new(self.width, self.depth(), self.input_dim());
        let layers = self
            .layers
            .iter()
            .zip(&layout.dims)
            .map(|(l, &(rows, cols))| {
                let mut p = Layer::zeros(rows, cols);
                for r in 0..l.rows {
                    p.bias[r] = l.bias[r];
                    for c in 0..l.cols {
                        p.weights[r * cols + c] = l.weight(r, c);
                    }
                }
                p
            })
            .collect();
        SubNetwork { layers, width: self.width }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for layer in &self.layers[..last] {
            next.resize(layer.rows, 0.0);
            layer.apply(&cur, &mut next);
            for v in next.iter_mut() {
                *v = v.tanh();
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let mut out = [0.0];
        self.layers[last].apply(&cur, &mut out);
        out[0]
    }
}

/// Declared class budgets: ℓ1 bound on coefficients and sup bound on inner weights.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClassBounds {
    #[serde(rename = "M")]
    pub coeff_l1: f64,
    #[serde(rename = "B_theta")]
    pub weight_sup: f64,
}

/// `u(x) = Σ_k c_k φ_k(x)` over `m` sub-networks sharing one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelNetwork {
    subnets: Vec<SubNetwork>,
    coefficients: Vec<f64>,
    bounds: Option<ClassBounds>,
}

impl ParallelNetwork {
    pub fn new(subnets: Vec<SubNetwork>, coefficients: Vec<f64>) -> Result<Self> {
        let Some(first) = subnets.first() else {
            return Err(invalid("a parallel network needs at least one sub-network"));
        };
        check_dim(subnets.len(), coefficients.len())?;
        let (w, l, d) = (first.width, first.depth(), first.input_dim());
        for s in &subnets {
            if s.width != w || s.depth() != l || s.input_dim() != d {
                return Err(invalid("sub-networks must share (W, L, d)"));
            }
        }
        if let Some(i) = coefficients.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "coefficients", index: i });
        }
        Ok(Self { subnets, coefficients, bounds: None })
    }

    pub fn zeros(shape: NetShape) -> Self {
        Self {
            subnets: vec![SubNetwork::zeros(shape.width, shape.depth, shape.d); shape.m],
            coefficients: vec![0.0; shape.m],
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, bounds: ClassBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn bounds(&self) -> Option<ClassBounds> {
        self.bounds
    }

    pub fn shape(&self) -> NetShape {
        let s = &self.subnets[0];
        NetShape { m: self.subnets.len(), width: s.width, depth: s.depth(), d: s.input_dim() }
    }

    pub fn input_dim(&self) -> usize {
        self.subnets[0].input_dim()
    }

    pub fn subnets(&self) -> &[SubNetwork] {
        &self.subnets
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn set_coefficients(&mut self, c: Vec<f64>) -> Result<()> {
        check_dim(self.subnets.len(), c.len())?;
        self.coefficients = c;
        Ok(())
    }

    pub fn coeff_l1(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.subnets.iter().fold(0.0, |m, s| m.max(s.max_abs_weight()))
    }

    /// Whether the network satisfies its declared budgets (true when none are declared).
    pub fn in_class(&self) -> bool {
        match self.bounds {
            None => true,
            Some(b) => self.coeff_l1() <= b.coeff_l1 && self.max_abs_weight() <= b.weight_sup,
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.input_dim(), x.len())?;
        let mut u = 0.0;
        for (s, c) in self.subnets.iter().zip(&self.coefficients) {
            u += c * s.eval(x);
        }
        Ok(u)
    }

    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(x)?.1)
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (u, g, _) = super::tape::loss_primitives(self, x)?;
        Ok((u, g))
    }

    pub fn flatten(&self) -> FlatParams {
        let shape = self.shape();
        let layout = shape.layout();
        let slots = shape.slots_per_subnet();
        let mut inner = vec![0.0; shape.inner_len()];
        for (k, s) in self.subnets.iter().enumerate() {
            let base = k * slots;
            for (l, layer) in s.layers.iter().enumerate() {
                let pc = layout.dims[l].1;
                for r in 0..layer.rows {
                    inner[base + layout.bias_off[l] + r] = layer.bias[r];
                    for c in 0..layer.cols {
                        inner[base + layout.mat_off[l] + r * pc + c] = layer.weight(r, c);
                    }
                }
            }
        }
        FlatParams { inner, outer: self.coefficients.clone() }
    }

    pub fn unflatten(params: &FlatParams, shape: NetShape) -> Result<Self> {
        check_dim(shape.inner_len(), params.inner.len())?;
        check_dim(shape.m, params.outer.len())?;
        let layout = shape.layout();
        let slots = shape.slots_per_subnet();
        let mut subnets = Vec::with_capacity(shape.m);
        for k in 0..shape.m {
            let block = &params.inner[k * slots..(k + 1) * slots];
            let layers = layout
                .dims
                .iter()
                .enumerate()
                .map(|(l, &(r, c))| {
                    let w = block[layout.mat_off[l]..layout.mat_off[l] + r * c].to_vec();
                    let b = block[layout.bias_off[l]..layout.bias_off[l] + r].to_vec();
                    Layer::new(r, c, w, b)
                })
                .collect::<Result<Vec<_>>>()?;
            subnets.push(SubNetwork { layers, width: shape.width });
        }
        ParallelNetwork::new(subnets, params.outer.clone())
    }

    /// Overwrites all weights from `params`, which must use this network's layout.
    pub(crate) fn load_flat(&mut self, params: &FlatParams) {
        let shape = self.shape();
        let layout = shape.layout();
        let slots = shape.slots_per_subnet();
        for (k, s) in self.subnets.iter_mut().enumerate() {
            let base = k * slots;
            for (l, layer) in s.layers.iter_mut().enumerate() {
                let pc = layout.dims[l].1;
                let (rows, cols) = (layer.rows, layer.cols);
                for r in 0..rows {
                    layer.bias[r] = params.inner[base + layout.bias_off[l] + r];
                    for c in 0..cols {
                        layer.weights[r * cols + c] = params.inner[base + layout.mat_off[l] + r * pc + c];
                    }
                }
            }
        }
        self.coefficients.copy_from_slice(&params.outer);
    }

    pub(crate) fn subnets_mut(&mut self) -> &mut [SubNetwork] {
        &mut self.subnets
    }
}

/// Inner weights (subnet-major, padded, matrices row-major then biases) and outer coefficients.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FlatParams {
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
}

impl FlatParams {
    pub fn zeros(shape: NetShape) -> Self {
        Self { inner: vec![0.0; shape.inner_len()], outer: vec![0.0; shape.m] }
    }

    pub fn len(&self) -> usize {
        self.inner.len() + self.outer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.inner.iter().chain(&self.outer)
    }

    /// Mutable access by global index (inner first, then outer).
    pub fn get_mut(&mut self, i: usize) -> &mut f64 {
        if i < self.inner.len() {
            &mut self.inner[i]
        } else {
            &mut self.outer[i - self.inner.len()]
        }
    }

    pub fn norm2(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &FlatParams) {
        for (x, y) in self.inner.iter_mut().zip(&other.inner) {
            *x += a * y;
        }
        for (x, y) in self.outer.iter_mut().zip(&other.outer) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.inner.iter_mut().chain(self.outer.iter_mut()) {
            *v *= a;
        }
    }
}
