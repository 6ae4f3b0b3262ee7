//! Explicit tanh networks approximating squares, products, monomials and smooth
//! functions in `W^{1,∞}`, with constants calibrated against measured error.
//!
//! Squares and products use the symmetric second difference
//! `ρ(x0 + t) − 2ρ(x0) + ρ(x0 − t) ≈ ρ''(x0) t²`, so product networks are exactly
//! symmetric and vanish on the axes. Smooth targets are assembled from tanh bumps
//! times node Taylor polynomials, one sub-network per `(node, monomial)` pair.

mod assemble;
mod builders;
mod bump;
mod circuit;
mod measure;
mod taylor;

pub use assemble::{
    assemble_approximant, assemble_approximant_with, bump_taylor_sum, default_resolution, initial_grid, patch_levels, ApproxOptions,
    ApproxReport, Approximant,
};
pub use builders::{
    build_monomial_net, build_product_net, build_square_net, calibrate_monomial_net, calibrate_product_net, calibrate_square_net,
    monomial_constant, tree_levels, Calibrated, DEFAULT_X0,
};
pub use bump::{build_bump_first_layer, bump_value, partition_sum, psi, BumpSpec};
pub use measure::{measure_sobolev_error, measure_sobolev_error_random};
pub use taylor::{multi_indices, simplex_count, taylor_coefficients, TaylorPatch};
