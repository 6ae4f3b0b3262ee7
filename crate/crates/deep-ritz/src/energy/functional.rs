use rayon::prelude::*;

use super::field::Field;
use super::problem::EllipticProblem;
use super::quadrature::{boundary_rule, volume_rule, Estimate, QuadratureSpec};
use super::sampling::SampleSet;
use crate::error::{check_dim, invalid, Result};
use crate::netcore::{Batch, FlatParams, ParallelNetwork, SubNetwork};

/// Anything with a value and an input gradient on `R^d`.
pub trait Evaluable: Sync {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);
}

impl Evaluable for ParallelNetwork {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.value_and_gradient(x).expect("dimension checked by caller")
    }
}

impl Evaluable for SubNetwork {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.value_and_gradient(x).expect("dimension checked by caller")
    }
}

/// Analytic fields evaluate with their exact gradient.
pub struct FieldFn<'a>(pub &'a Field, pub usize);

impl Evaluable for FieldFn<'_> {
    fn dim(&self) -> usize {
        self.1
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.0.value(x), self.0.gradient(x).expect("field needs analytic derivatives"))
    }
}

/// Closure-backed function with gradient.
pub struct FnEval<F: Fn(&[f64]) -> (f64, Vec<f64>)>(pub usize, pub F);

impl<F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync> Evaluable for FnEval<F> {
    fn dim(&self) -> usize {
        self.0
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.1)(x)
    }
}

/// How per-sample contributions are summed.
///
/// Both modes add fixed-size chunk partials in chunk order, so they return identical bits;
/// `Sequential` just avoids the thread pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    Sequential,
    #[default]
    Parallel,
}

const CHUNK: usize = 128;

/// Empirical Ritz energy on a fixed sample set, with the field values cached.
#[derive(Clone, Debug)]
pub struct EnergyEvaluator<'a> {
    samples: &'a SampleSet,
    omega: Vec<f64>,
    h: Vec<f64>,
    g: Vec<f64>,
    interior_scale: f64,
    boundary_scale: f64,
    reduction: Reduction,
}

struct Partial {
    energy: f64,
    grad: Option<FlatParams>,
}

impl<'a> EnergyEvaluator<'a> {
    pub fn new(problem: &EllipticProblem, samples: &'a SampleSet) -> Result<Self> {
        check_dim(problem.dim(), samples.dim())?;
        if samples.n_interior() == 0 {
            return Err(invalid("empty interior sample set"));
        }
        let g: Vec<f64> = samples.boundary().map(|(y, f)| problem.neumann_g().value(y, f)).collect();
        if samples.n_boundary() == 0 && !problem.neumann_g().is_zero() {
            return Err(invalid("boundary samples required when g is nonzero"));
        }
        let domain = problem.domain();
        Ok(Self {
            samples,
            omega: samples.interior().map(|x| problem.omega().value(x)).collect(),
            h: samples.interior().map(|x| problem.rhs_h().value(x)).collect(),
            g,
            interior_scale: domain.volume() / samples.n_interior() as f64,
            boundary_scale: if samples.n_boundary() == 0 { 0.0 } else { domain.boundary_measure() / samples.n_boundary() as f64 },
            reduction: Reduction::default(),
        })
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn energy(&self, net: &ParallelNetwork) -> Result<f64> {
        Ok(self.run(net, false)?.0)
    }

    pub fn energy_and_gradient(&self, net: &ParallelNetwork) -> Result<(f64, FlatParams)> {
        let (e, g) = self.run(net, true)?;
        Ok((e, g.expect("gradient requested")))
    }

    fn run(&self, net: &ParallelNetwork, want_grad: bool) -> Result<(f64, Option<FlatParams>)> {
        check_dim(self.samples.dim(), net.input_dim())?;
        let ni = self.samples.n_interior();
        let nb = self.samples.n_boundary();
        let ci = ni.div_ceil(CHUNK);
        let cb = nb.div_ceil(CHUNK);
        let job = |batch: &mut Batch, c: usize| {
            if c < ci {
                self.interior_chunk(batch, c * CHUNK..((c + 1) * CHUNK).min(ni), want_grad)
            } else {
                let c = c - ci;
                self.boundary_chunk(batch, c * CHUNK..((c + 1) * CHUNK).min(nb), want_grad)
            }
        };
        let parts: Vec<Partial> = match self.reduction {
            Reduction::Sequential => {
                let mut batch = Batch::new(net);
                (0..ci + cb).map(|c| job(&mut batch, c)).collect()
            }
            Reduction::Parallel => (0..ci + cb).into_par_iter().map_init(|| Batch::new(net), job).collect(),
        };
        let mut energy = 0.0;
        let mut grad = want_grad.then(|| FlatParams::zeros(net.shape()));
        for p in parts {
            energy += p.energy;
            if let (Some(g), Some(pg)) = (grad.as_mut(), p.grad.as_ref()) {
                g.axpy(1.0, pg);
            }
        }
        Ok((energy, grad))
    }

    fn interior_chunk(&self, batch: &mut Batch, range: std::ops::Range<usize>, want_grad: bool) -> Partial {
        let d = self.samples.dim();
        let net = batch.net();
        batch.record(range.clone().map(|p| self.samples.interior_point(p)));
        let n = batch.len();
        let mut sum = 0.0;
        let mut seed = vec![0.0; n];
        for (j, p) in range.enumerate() {
            let u = batch.u[j];
            let mut gn2 = 0.0;
            for i in 0..d {
                gn2 += batch.grad[i * n + j] * batch.grad[i * n + j];
            }
            sum += 0.5 * gn2 + 0.5 * self.omega[p] * u * u - u * self.h[p];
            seed[j] = self.omega[p] * u - self.h[p];
        }
        let grad = want_grad.then(|| {
            let mut g = FlatParams::zeros(net.shape());
            let sg = std::mem::take(&mut batch.grad);
            batch.accumulate(&seed, Some(&sg), self.interior_scale, &mut g);
            batch.grad = sg;
            g
        });
        Partial { energy: self.interior_scale * sum, grad }
    }

    fn boundary_chunk(&self, batch: &mut Batch, range: std::ops::Range<usize>, want_grad: bool) -> Partial {
        let net = batch.net();
        let active: Vec<usize> = range.filter(|&p| self.g[p] != 0.0).collect();
        if active.is_empty() {
            return Partial { energy: 0.0, grad: want_grad.then(|| FlatParams::zeros(net.shape())) };
        }
        batch.record(active.iter().map(|&p| self.samples.boundary_point(p).0));
        let mut sum = 0.0;
        let mut seed = Vec::with_capacity(active.len());
        for (j, &p) in active.iter().enumerate() {
            sum += batch.u[j] * self.g[p];
            seed.push(-self.g[p]);
        }
        let grad = want_grad.then(|| {
            let mut g = FlatParams::zeros(net.shape());
            batch.accumulate(&seed, None, self.boundary_scale, &mut g);
            g
        });
        Partial { energy: -self.boundary_scale * sum, grad }
    }
}

/// `(|Ω|/N_in) Σ [½|∇u|² + ½ω u² − h u](X_p) − (|∂Ω|/N_b) Σ g u (Y_p)`.
pub fn empirical_energy(net: &ParallelNetwork, samples: &SampleSet, problem: &EllipticProblem) -> Result<f64> {
    EnergyEvaluator::new(problem, samples)?.energy(net)
}

/// Exact parameter gradient of [`empirical_energy`].
pub fn energy_gradient(net: &ParallelNetwork, samples: &SampleSet, problem: &EllipticProblem) -> Result<FlatParams> {
    Ok(EnergyEvaluator::new(problem, samples)?.energy_and_gradient(net)?.1)
}

/// Quadrature estimate of the continuous Ritz energy.
pub fn continuous_energy(u: &dyn Evaluable, problem: &EllipticProblem, quad: &QuadratureSpec) -> Result<f64> {
    Ok(continuous_energy_estimate(u, problem, quad)?.value)
}

/// As [`continuous_energy`], with the Monte Carlo standard error (zero under Gauss rules).
pub fn continuous_energy_estimate(u: &dyn Evaluable, problem: &EllipticProblem, quad: &QuadratureSpec) -> Result<Estimate> {
    check_dim(problem.dim(), u.dim())?;
    let vol = volume_rule(problem.domain(), quad)?;
    let interior = vol.integrate(|i| {
        let x = vol.point(i);
        let (v, g) = u.value_grad(x);
        let gn2: f64 = g.iter().map(|a| a * a).sum();
        0.5 * gn2 + 0.5 * problem.omega().value(x) * v * v - problem.rhs_h().value(x) * v
    });
    if problem.neumann_g().is_zero() {
        return Ok(interior);
    }
    let bnd = boundary_rule(problem.domain(), quad)?;
    let boundary = bnd.integrate(|i| {
        let y = bnd.point(i);
        problem.neumann_g().value(y, bnd.faces[i]) * u.value_grad(y).0
    });
    Ok(Estimate { value: interior.value - boundary.value, std_error: interior.std_error.hypot(boundary.std_error) })
}

/// `‖u − u₀‖_{H¹}` for the problem's exact solution.
pub fn h1_error(u: &dyn Evaluable, problem: &EllipticProblem, quad: &QuadratureSpec) -> Result<f64> {
    let u0 = problem.exact_solution().ok_or_else(|| invalid("problem has no exact solution"))?;
    h1_distance(u, &FieldFn(u0, problem.dim()), problem, quad)
}

/// `‖u − v‖_{H¹}` over the problem's domain.
pub fn h1_distance(u: &dyn Evaluable, v: &dyn Evaluable, problem: &EllipticProblem, quad: &QuadratureSpec) -> Result<f64> {
    check_dim(problem.dim(), u.dim())?;
    check_dim(problem.dim(), v.dim())?;
    let vol = volume_rule(problem.domain(), quad)?;
    let sq = vol.integrate(|i| {
        let x = vol.point(i);
        let (a, ga) = u.value_grad(x);
        let (b, gb) = v.value_grad(x);
        (a - b).powi(2) + ga.iter().zip(&gb).map(|(p, q)| (p - q).powi(2)).sum::<f64>()
    });
    Ok(sq.value.max(0.0).sqrt())
}

/// `‖u‖_{H¹}` over the problem's domain.
pub fn h1_norm(u: &dyn Evaluable, problem: &EllipticProblem, quad: &QuadratureSpec) -> Result<f64> {
    let zero = FnEval(problem.dim(), |x: &[f64]| (0.0, vec![0.0; x.len()]));
    h1_distance(u, &zero, problem, quad)
}
