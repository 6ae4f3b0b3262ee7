//! Tanh bumps and the partition of unity they form on `[0,1]^d`.

use super::circuit::{Circuit, Node, Op};
use crate::error::{invalid, Result};
use crate::netcore::Layer;

/// Bump centered at the grid node `m/N` with sharpness `s`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BumpSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub m_index: Vec<usize>,
}

impl BumpSpec {
    pub fn new(n: usize, s: f64, m_index: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("grid resolution N must be positive"));
        }
        if !(s >= 1.0 && s.is_finite()) {
            return Err(invalid(format!("sharpness must be at least 1, got {s}")));
        }
        if let Some(&m) = m_index.iter().find(|&&m| m > n) {
            return Err(invalid(format!("node index {m} outside 0..={n}")));
        }
        Ok(Self { n, s, m_index })
    }

    pub fn dim(&self) -> usize {
        self.m_index.len()
    }
}

/// `ψ^s(x) = ½[ρ(s(x + 3/2)) − ρ(s(x − 3/2))]`.
pub fn psi(s: f64, x: f64) -> f64 {
    0.5 * ((s * (x + 1.5)).tanh() - (s * (x - 1.5)).tanh())
}

/// `Ψ_m^s(x) = Π_l ψ^s(3N(x_l − m_l/N))`.
pub fn bump_value(spec: &BumpSpec, x: &[f64]) -> f64 {
    let n = spec.n as f64;
    spec.m_index.iter().zip(x).map(|(&m, &xl)| psi(spec.s, 3.0 * n * (xl - m as f64 / n))).product()
}

/// Sum of `Ψ_m^s(x)` over every node of the `(N+1)^d` grid.
pub fn partition_sum(n: usize, s: f64, x: &[f64]) -> f64 {
    let nf = n as f64;
    // The sum factorizes over coordinates.
    x.iter().map(|&xl| (0..=n).map(|m| psi(s, 3.0 * nf * (xl - m as f64 / nf))).sum::<f64>()).product()
}

/// The first hidden layer feeding a bump: `2d` units `ρ(3Ns·x_l − 3m_l s ± 3s/2)`.
///
/// Unit `2l` carries the `+3s/2` shift and unit `2l + 1` the `−3s/2` shift, so
/// `ψ` of coordinate `l` is half their difference.
pub fn build_bump_first_layer(spec: &BumpSpec) -> Layer {
    let d = spec.dim();
    let ops: Vec<Op> = (0..d).map(|l| bump_op(spec, l, Node::unit(l))).collect();
    let mut c = Circuit::new(d);
    let out = c.level(&ops);
    let net = c.finish(&out[0], 2 * d).expect("bump layer is well formed");
    net.layers()[0].clone()
}

pub(crate) fn bump_op(spec: &BumpSpec, l: usize, u: Node) -> Op {
    Op::Bump { u, n: spec.n, s: spec.s, m: spec.m_index[l] }
}
