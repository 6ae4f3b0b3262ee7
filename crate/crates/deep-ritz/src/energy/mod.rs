//! Elliptic Neumann problems on boxes, Monte Carlo samples, and Ritz energies.

mod field;
mod functional;
mod problem;
mod quadrature;
mod sampling;

pub use field::{BoundaryField, Field, Monomial};
pub use functional::{
    continuous_energy, continuous_energy_estimate, empirical_energy, energy_gradient, h1_distance, h1_error, h1_norm, EnergyEvaluator,
    Evaluable, FieldFn, FnEval, Reduction,
};
pub use problem::{manufacture, BoxDomain, EllipticProblem, ProblemConfig};
pub use quadrature::{boundary_rule, gauss_legendre, volume_rule, Estimate, QuadKind, QuadRule, QuadratureSpec};
pub use sampling::{sample_boundary, sample_interior, SampleSet};

#[cfg(test)]
mod tests;
