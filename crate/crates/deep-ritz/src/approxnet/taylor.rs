//! Node-centered Taylor polynomials re-expanded in the monomial basis.

use crate::energy::Field;
use crate::error::{invalid, Result};

/// All multi-indices in `d` variables with total degree `≤ max_degree`, graded then lexicographic.
pub fn multi_indices(d: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(d, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        rec(d, deg, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// Number of monomials of degree `≤ k` in `d` variables, `C(k + d, d)`.
pub fn simplex_count(d: usize, k: usize) -> usize {
    (1..=d).fold(1usize, |acc, i| acc * (k + i) / i)
}

/// `p_{f,m}(x) = Σ_α c_α x^α` for one grid node.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaylorPatch {
    pub m_index: Vec<usize>,
    /// `(α, c_α)` pairs in [`multi_indices`] order.
    pub coefficients: Vec<(Vec<usize>, f64)>,
}

impl TaylorPatch {
    pub fn center(&self, n: usize) -> Vec<f64> {
        self.m_index.iter().map(|&m| m as f64 / n as f64).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().map(|(a, c)| c * monomial(a, x)).sum()
    }
}

pub(crate) fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `D^β f(c)` by a tensor product of central difference stencils with step `step`.
fn fd_derivative(f: &Field, beta: &[usize], c: &[f64], step: f64) -> f64 {
    // Stencil for order k: Σ_j (−1)^j C(k,j) f(x + (k/2 − j)·step) / step^k.
    let d = beta.len();
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let mut w = 1.0;
        let mut x = c.to_vec();
        for i in 0..d {
            let (k, j) = (beta[i], idx[i]);
            w *= if j.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(k, j) / step.powi(k as i32);
            x[i] += (k as f64 / 2.0 - j as f64) * step;
        }
        total += w * f.value(&x);
        let mut i = 0;
        loop {
            if i == d {
                return total;
            }
            idx[i] += 1;
            if idx[i] <= beta[i] {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Step used for finite-difference derivatives of total order `order` on grid `N`.
///
/// First derivatives use `10⁻⁴/N`; higher orders widen the step to keep rounding
/// from swamping the difference.
pub(crate) fn fd_step(order: usize, n: usize) -> f64 {
    let base = 1e-4 / n as f64;
    if order <= 1 {
        base
    } else {
        base.max(f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) / n as f64)
    }
}

/// Taylor coefficients of `f` at every node `m/N` of `[0,1]^d`, to total degree `n − 1`.
///
/// `c_α = Σ_{β ≥ α} D^β f(c)/β! · Π_i C(β_i, α_i)(−c_i)^{β_i − α_i}`, the expansion
/// of `Σ_β D^β f(c)/β! (x − c)^β` in powers of `x`.
pub fn taylor_coefficients(f: &Field, grid: usize, n: usize, d: usize) -> Result<Vec<TaylorPatch>> {
    if n == 0 || grid == 0 || d == 0 {
        return Err(invalid("need n ≥ 1, N ≥ 1 and d ≥ 1"));
    }
    let alphas = multi_indices(d, n - 1);
    let analytic = f.has_derivatives();
    let nodes = (grid + 1).pow(d as u32);
    let mut out = Vec::with_capacity(nodes);
    for flat in 0..nodes {
        let mut m_index = vec![0; d];
        let mut r = flat;
        for mi in m_index.iter_mut() {
            *mi = r % (grid + 1);
            r /= grid + 1;
        }
        let c: Vec<f64> = m_index.iter().map(|&m| m as f64 / grid as f64).collect();
        let mut taylor = Vec::with_capacity(alphas.len());
        for beta in &alphas {
            let order: usize = beta.iter().sum();
            let dv =
                if analytic { f.derivative(beta, &c).expect("analytic field") } else { fd_derivative(f, beta, &c, fd_step(order, grid)) };
            if !dv.is_finite() {
                return Err(invalid(format!("non-finite derivative {beta:?} at node {m_index:?}")));
            }
            let bf: f64 = beta.iter().map(|&b| factorial(b)).product();
            taylor.push(dv / bf);
        }
        let coefficients = alphas
            .iter()
            .map(|alpha| {
                let c_alpha = alphas
                    .iter()
                    .zip(&taylor)
                    .filter(|(beta, _)| beta.iter().zip(alpha).all(|(b, a)| b >= a))
                    .map(|(beta, t)| {
                        let shift: f64 = (0..d).map(|i| binomial(beta[i], alpha[i]) * (-c[i]).powi((beta[i] - alpha[i]) as i32)).product();
                        t * shift
                    })
                    .sum();
                (alpha.clone(), c_alpha)
            })
            .collect();
        out.push(TaylorPatch { m_index, coefficients });
    }
    Ok(out)
}
