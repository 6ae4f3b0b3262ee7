//! Deep Ritz solver and verification toolkit for Neumann elliptic problems on boxes.
//!
//! The hypothesis class is a parallel tanh network `u = Σ c_k φ_k`. Training
//! minimizes a Monte Carlo Ritz energy by projected gradient descent; the other
//! modules build explicit approximating networks and evaluate the bounds that
//! relate training error, approximation error and sample size.

pub mod approxnet;
pub mod cli;
pub mod energy;
pub mod error;
pub mod netcore;
pub mod optdiag;
pub mod pgd;
pub mod rng;
pub mod statbound;

pub use error::{Error, Result};
