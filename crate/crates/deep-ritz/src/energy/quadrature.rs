use serde::{Deserialize, Serialize};

use super::problem::BoxDomain;
use crate::error::{invalid, Result};
use crate::rng::SplitRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadKind {
    TensorGauss,
    MonteCarlo,
}

/// How continuous integrals are measured: Gauss order per axis, or a Monte Carlo point count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub kind: QuadKind,
    pub order_or_count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn gauss(order: usize) -> Self {
        Self { kind: QuadKind::TensorGauss, order_or_count: order, seed: 0 }
    }

    pub fn monte_carlo(count: usize, seed: u64) -> Self {
        Self { kind: QuadKind::MonteCarlo, order_or_count: count, seed }
    }

    /// Gauss order 32 for `d ≤ 3`, otherwise 10⁵ Monte Carlo points.
    pub fn default_for(d: usize) -> Self {
        if d <= 3 {
            Self::gauss(32)
        } else {
            Self::monte_carlo(100_000, 0)
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.order_or_count == 0 {
            return Err(invalid("quadrature order/count must be positive"));
        }
        if self.kind == QuadKind::TensorGauss && d > 3 {
            return Err(invalid("tensor-gauss quadrature is limited to d <= 3"));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Weighted point set for a volume or a boundary integral.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub d: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Face ids for boundary rules.
    pub faces: Vec<usize>,
    pub monte_carlo: bool,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    /// Integral of per-point values `f(i)`, with a Monte Carlo standard error (0 for Gauss).
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> Estimate {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..self.len() {
            let v = self.weights[i] * f(i);
            sum += v;
            sumsq += v * v;
        }
        let std_error = if self.monte_carlo && self.len() > 1 {
            let n = self.len() as f64;
            let mean = sum / n;
            ((sumsq / n - mean * mean).max(0.0) * n / (n - 1.0)).sqrt() * n.sqrt()
        } else {
            0.0
        };
        Estimate { value: sum, std_error }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

fn tensor_grid(lo: &[f64], hi: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let k = lo.len();
    let total = n.pow(k as u32);
    let mut pts = Vec::with_capacity(total);
    let mut wts = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = Vec::with_capacity(k);
        let mut wt = 1.0;
        for i in 0..k {
            let j = idx % n;
            idx /= n;
            let half = 0.5 * (hi[i] - lo[i]);
            p.push(lo[i] + half * (x[j] + 1.0));
            wt *= half * w[j];
        }
        pts.push(p);
        wts.push(wt);
    }
    (pts, wts)
}

pub fn volume_rule(domain: &BoxDomain, spec: &QuadratureSpec) -> Result<QuadRule> {
    let d = domain.dim();
    spec.validate(d)?;
    match spec.kind {
        QuadKind::TensorGauss => {
            let (pts, wts) = tensor_grid(&domain.lo, &domain.hi, spec.order_or_count);
            Ok(QuadRule { d, points: pts.concat(), weights: wts, faces: Vec::new(), monte_carlo: false })
        }
        QuadKind::MonteCarlo => {
            let n = spec.order_or_count;
            let mut rng = SplitRng::new(spec.seed).split(0);
            let points = (0..n * d).map(|k| domain.lo[k % d] + domain.side(k % d) * rng.uniform_open()).collect();
            Ok(QuadRule { d, points, weights: vec![domain.volume() / n as f64; n], faces: Vec::new(), monte_carlo: true })
        }
    }
}

pub fn boundary_rule(domain: &BoxDomain, spec: &QuadratureSpec) -> Result<QuadRule> {
    let d = domain.dim();
    spec.validate(d)?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut faces = Vec::new();
    match spec.kind {
        QuadKind::TensorGauss => {
            for face in 0..2 * d {
                let axis = face / 2;
                let fixed = if face.is_multiple_of(2) { domain.lo[axis] } else { domain.hi[axis] };
                let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
                let lo: Vec<f64> = others.iter().map(|&j| domain.lo[j]).collect();
                let hi: Vec<f64> = others.iter().map(|&j| domain.hi[j]).collect();
                let (pts, wts) = tensor_grid(&lo, &hi, spec.order_or_count);
                for (p, w) in pts.into_iter().zip(wts) {
                    let mut full = vec![fixed; d];
                    for (k, &j) in others.iter().enumerate() {
                        full[j] = p[k];
                    }
                    points.extend(full);
                    weights.push(w);
                    faces.push(face);
                }
            }
            Ok(QuadRule { d, points, weights, faces, monte_carlo: false })
        }
        QuadKind::MonteCarlo => {
            let n = spec.order_or_count;
            let pts = super::sampling::sample_boundary_in(domain, n, &SplitRng::new(spec.seed).split(1))?;
            let w = domain.boundary_measure() / n as f64;
            for (p, f) in pts {
                points.extend(p);
                weights.push(w);
                faces.push(f);
            }
            Ok(QuadRule { d, points, weights, faces, monte_carlo: true })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_roots() {
        for n in 1..=40 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            for i in 1..n {
                assert!(x[i] > x[i - 1]);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn tensor_rule_on_box() {
        let b = BoxDomain::new(vec![0.0, 0.5], vec![1.0, 1.0]).unwrap();
        let r = volume_rule(&b, &QuadratureSpec::gauss(4)).unwrap();
        let e = r.integrate(|i| {
            let p = r.point(i);
            p[0] * p[0] * p[1]
        });
        assert!((e.value - (1.0 / 3.0) * (0.5 * (1.0 - 0.25))).abs() < 1e-14);
        let s = boundary_rule(&b, &QuadratureSpec::gauss(4)).unwrap();
        assert!((s.integrate(|_| 1.0).value - b.boundary_measure()).abs() < 1e-14);
    }

    #[test]
    fn gauss_limited_to_three_dims() {
        assert!(volume_rule(&BoxDomain::unit(4), &QuadratureSpec::gauss(4)).is_err());
        let r = volume_rule(&BoxDomain::unit(4), &QuadratureSpec::monte_carlo(1000, 1)).unwrap();
        let e = r.integrate(|_| 1.0);
        assert!((e.value - 1.0).abs() < 1e-12);
    }
}
