use serde::{Deserialize, Serialize};

use super::field::{BoundaryField, Field};
use crate::error::{check_dim, invalid, Result};
use crate::rng::SplitRng;

/// Axis-aligned box `[lo, hi]` in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(invalid("box must have dimension at least 1"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(invalid("box must satisfy lo < hi in every coordinate"));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(d: usize) -> Self {
        Self { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    /// `(d-1)`-measure of a face; each face of a 1-D box is a point of measure 1.
    pub fn face_measure(&self, face: usize) -> f64 {
        let axis = face / 2;
        (0..self.dim()).filter(|&j| j != axis).map(|j| self.side(j)).product()
    }

    pub fn boundary_measure(&self) -> f64 {
        (0..2 * self.dim()).map(|f| self.face_measure(f)).sum()
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a < v && v < b)
    }

    /// Deterministic probe points: a tensor grid for `d ≤ 3`, seeded uniform points otherwise.
    pub(crate) fn probe_points(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        if d <= 3 {
            let n: usize = 33;
            let total = n.pow(d as u32);
            (0..total)
                .map(|mut k| {
                    (0..d)
                        .map(|i| {
                            let j = k % n;
                            k /= n;
                            self.lo[i] + self.side(i) * j as f64 / (n - 1) as f64
                        })
                        .collect()
                })
                .collect()
        } else {
            let mut rng = SplitRng::new(0x5EED);
            (0..4096).map(|_| (0..d).map(|i| rng.uniform_range(self.lo[i], self.hi[i])).collect()).collect()
        }
    }
}

/// `-Δu + ω u = h` in the box with `∂u/∂n = g` on its boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticProblem {
    domain: BoxDomain,
    omega: Field,
    h: Field,
    g: BoundaryField,
    exact: Option<Field>,
    c0: f64,
    omega_max: f64,
    b0: f64,
    warnings: Vec<String>,
}

impl EllipticProblem {
    /// Builds a problem; `c0`, `sup ω` and `B₀` are measured on a probe grid.
    pub fn new(domain: BoxDomain, omega: Field, h: Field, g: BoundaryField, exact: Option<Field>) -> Result<Self> {
        let probes = domain.probe_points();
        let (mut c0, mut wmax, mut hmax) = (f64::INFINITY, 0.0f64, 0.0f64);
        for x in &probes {
            let w = omega.value(x);
            c0 = c0.min(w);
            wmax = wmax.max(w.abs());
            hmax = hmax.max(h.value(x).abs());
        }
        let gmax = boundary_probe_max(&domain, &g, &probes);
        if !(c0 > 0.0) {
            return Err(invalid(format!("omega must be positive on the domain (min probe value {c0})")));
        }
        if !hmax.is_finite() || !gmax.is_finite() {
            return Err(invalid("h or g is not finite on the probe grid"));
        }
        let b0 = wmax.max(hmax).max(gmax);
        Ok(Self { domain, omega, h, g, exact, c0, omega_max: wmax, b0, warnings: Vec::new() })
    }

    /// Overrides the measured constants; inconsistent values are kept but recorded as warnings.
    pub fn with_declared_bounds(mut self, c0: Option<f64>, b0: Option<f64>) -> Result<Self> {
        if let Some(c) = c0 {
            if !(c > 0.0) {
                return Err(invalid("c0 must be positive"));
            }
            if c > self.c0 {
                self.warnings.push(format!("declared c0 = {c} exceeds probed minimum of omega {}", self.c0));
            }
            self.c0 = c;
        }
        if let Some(b) = b0 {
            if b < self.b0 {
                self.warnings.push(format!("declared B0 = {b} is below probed sup {}", self.b0));
            }
            self.b0 = b;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn omega(&self) -> &Field {
        &self.omega
    }

    pub fn rhs_h(&self) -> &Field {
        &self.h
    }

    pub fn neumann_g(&self) -> &BoundaryField {
        &self.g
    }

    pub fn exact_solution(&self) -> Option<&Field> {
        self.exact.as_ref()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Same problem with `h` and `g` replaced.
    pub fn with_data(&self, h: Field, g: BoundaryField) -> Result<Self> {
        EllipticProblem::new(self.domain.clone(), self.omega.clone(), h, g, None)
    }
}

fn boundary_probe_max(domain: &BoxDomain, g: &BoundaryField, probes: &[Vec<f64>]) -> f64 {
    let mut gmax = 0.0f64;
    for x in probes {
        for face in 0..2 * domain.dim() {
            let mut y = x.clone();
            let axis = face / 2;
            y[axis] = if face.is_multiple_of(2) { domain.lo[axis] } else { domain.hi[axis] };
            gmax = gmax.max(g.value(&y, face).abs());
        }
    }
    gmax
}

/// Problem whose exact solution is `u0`: `h = -Δu0 + ω u0` and `g = ∂u0/∂n`.
///
/// When `∂u0/∂n` vanishes on every boundary probe up to 1e-12 relative to `sup|∇u0|`,
/// `g` is stored as the exact zero field so boundary terms drop out.
pub fn manufacture(u0: Field, omega: Field, domain: BoxDomain) -> Result<EllipticProblem> {
    if !u0.has_derivatives() {
        return Err(invalid("manufactured solution needs analytic derivatives"));
    }
    let probes = domain.probe_points();
    let gscale = probes.iter().filter_map(|x| u0.gradient(x)).flat_map(|g| g.into_iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let normal = BoundaryField::NormalDerivative(u0.clone());
    let g = if boundary_probe_max(&domain, &normal, &probes) <= 1e-12 * (1.0 + gscale) {
        BoundaryField::Trace(Field::constant(0.0))
    } else {
        normal
    };
    let h = Field::Source { u: Box::new(u0.clone()), omega: Box::new(omega.clone()) };
    EllipticProblem::new(domain, omega, h, g, Some(u0))
}

/// JSON problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxDomain>,
    pub omega: Field,
    #[serde(default)]
    pub u0: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<BoundaryField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(rename = "B0", default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
}

impl ProblemConfig {
    /// The 1-D or multi-D cosine problem `u0 = Π cos(π x_i)`, `ω ≡ 1` on the unit cube.
    pub fn cosine(d: usize) -> Self {
        Self { d, domain: None, omega: Field::constant(1.0), u0: Some(Field::cosine_pi(d)), h: None, g: None, c0: None, b0: None }
    }

    pub fn build(&self) -> Result<EllipticProblem> {
        let domain = match &self.domain {
            Some(b) => BoxDomain::new(b.lo.clone(), b.hi.clone())?,
            None => BoxDomain::unit(self.d),
        };
        check_dim(self.d, domain.dim())?;
        if domain.lo.iter().chain(&domain.hi).any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("box must lie inside [0,1]^d"));
        }
        let problem = match (&self.u0, &self.h) {
            (Some(u0), None) => {
                let p = manufacture(u0.clone(), self.omega.clone(), domain)?;
                match &self.g {
                    Some(g) => EllipticProblem::new(p.domain.clone(), p.omega.clone(), p.h.clone(), g.clone(), p.exact.clone())?,
                    None => p,
                }
            }
            (u0, Some(h)) => {
                let g = self.g.clone().unwrap_or(BoundaryField::Trace(Field::constant(0.0)));
                EllipticProblem::new(domain, self.omega.clone(), h.clone(), g, u0.clone())?
            }
            (None, None) => return Err(invalid("either u0 or h must be given")),
        };
        problem.with_declared_bounds(self.c0, self.b0)
    }
}
