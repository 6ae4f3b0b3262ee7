use serde::{Deserialize, Serialize};

/// One monomial term `coef · Π x_i^{powers_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Built-in scalar fields on `R^d`, selectable from JSON as `{kind, params}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Field {
    Constant {
        value: f64,
    },
    Polynomial {
        terms: Vec<Monomial>,
    },
    /// `amplitude · Π cos(k_i x_i + p_i)`.
    Cosine {
        amplitude: f64,
        wavenumbers: Vec<f64>,
        phases: Vec<f64>,
    },
    Sum {
        terms: Vec<Field>,
    },
    /// `-Δu + ω u` for an analytic `u`; only values are available.
    Source {
        u: Box<Field>,
        omega: Box<Field>,
    },
}

fn falling(p: u32, k: usize) -> f64 {
    (0..k as u32).map(|j| (p - j) as f64).product()
}

impl Field {
    pub fn constant(value: f64) -> Self {
        Field::Constant { value }
    }

    /// `Π cos(π x_i)` on `R^d`.
    pub fn cosine_pi(d: usize) -> Self {
        Field::Cosine { amplitude: 1.0, wavenumbers: vec![std::f64::consts::PI; d], phases: vec![0.0; d] }
    }

    pub fn monomial(coef: f64, powers: Vec<u32>) -> Self {
        Field::Polynomial { terms: vec![Monomial { coef, powers }] }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Field::Source { u, omega } => omega.value(x) * u.value(x) - u.laplacian(x),
            _ => self.derivative(&vec![0; x.len()], x).expect("analytic field"),
        }
    }

    /// `D^alpha f(x)`, or `None` when the field has no analytic derivatives.
    pub fn derivative(&self, alpha: &[usize], x: &[f64]) -> Option<f64> {
        match self {
            Field::Constant { value } => Some(if alpha.iter().all(|&a| a == 0) { *value } else { 0.0 }),
            Field::Polynomial { terms } => Some(
                terms
                    .iter()
                    .map(|t| {
                        let mut v = t.coef;
                        for (i, &xi) in x.iter().enumerate() {
                            let p = t.powers.get(i).copied().unwrap_or(0);
                            let a = alpha[i];
                            if a as u32 > p {
                                return 0.0;
                            }
                            v *= falling(p, a) * xi.powi((p - a as u32) as i32);
                        }
                        v
                    })
                    .sum(),
            ),
            Field::Cosine { amplitude, wavenumbers, phases } => {
                let mut v = *amplitude;
                for (i, &xi) in x.iter().enumerate() {
                    let k = wavenumbers[i];
                    let a = alpha[i];
                    v *= k.powi(a as i32) * (k * xi + phases[i] + a as f64 * std::f64::consts::FRAC_PI_2).cos();
                }
                Some(v)
            }
            Field::Sum { terms } => terms.iter().map(|t| t.derivative(alpha, x)).sum(),
            Field::Source { .. } => alpha.iter().all(|&a| a == 0).then(|| self.value(x)),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        (0..d)
            .map(|i| {
                let mut a = vec![0; d];
                a[i] = 1;
                self.derivative(&a, x)
            })
            .collect()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let d = x.len();
        (0..d)
            .map(|i| {
                let mut a = vec![0; d];
                a[i] = 2;
                self.derivative(&a, x).expect("laplacian needs an analytic field")
            })
            .sum()
    }

    pub fn has_derivatives(&self) -> bool {
        match self {
            Field::Source { .. } => false,
            Field::Sum { terms } => terms.iter().all(Field::has_derivatives),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Field::Constant { value } => *value == 0.0,
            Field::Polynomial { terms } => terms.iter().all(|t| t.coef == 0.0),
            Field::Cosine { amplitude, .. } => *amplitude == 0.0,
            Field::Sum { terms } => terms.iter().all(Field::is_zero),
            Field::Source { .. } => false,
        }
    }
}

/// Neumann data on the faces of a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum BoundaryField {
    /// A field evaluated at the boundary point, independent of the face.
    Trace(Field),
    /// Outward normal derivative of `u` on the face.
    NormalDerivative(Field),
}

impl BoundaryField {
    /// `face = 2i` is `x_i = lo_i` (normal `-e_i`); `face = 2i+1` is `x_i = hi_i`.
    pub fn value(&self, x: &[f64], face: usize) -> f64 {
        match self {
            BoundaryField::Trace(f) => f.value(x),
            BoundaryField::NormalDerivative(u) => {
                let axis = face / 2;
                let mut a = vec![0; x.len()];
                a[axis] = 1;
                let dn = u.derivative(&a, x).expect("normal derivative needs an analytic field");
                if face.is_multiple_of(2) {
                    -dn
                } else {
                    dn
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BoundaryField::Trace(f) if f.is_zero())
    }
}
