//! Parallel tanh networks: evaluation, input derivatives, parameter gradients,
//! flattening and serialization.

mod activation;
mod batch;
pub mod bounds;
mod json;
mod network;
mod tape;

pub use activation::activation_derivatives;
pub use network::{aligned_dim, param_count, ClassBounds, FlatParams, Layer, NetShape, ParallelNetwork, SubNetwork};
pub use tape::{backward_from, loss_primitives, Tape};

pub(crate) use batch::Batch;

use crate::rng::SplitRng;

/// Draws every sub-network weight i.i.d. from `U[-bound, bound]`; coefficients start at zero.
pub fn random_uniform(shape: NetShape, bound: f64, rng: &mut SplitRng) -> ParallelNetwork {
    let mut net = ParallelNetwork::zeros(shape);
    for s in net.subnets_mut() {
        for layer in s.layers_mut() {
            for w in layer.weights_mut() {
                *w = rng.uniform_range(-bound, bound);
            }
            for b in layer.bias_mut() {
                *b = rng.uniform_range(-bound, bound);
            }
        }
    }
    net
}

pub fn forward(net: &ParallelNetwork, x: &[f64]) -> crate::Result<f64> {
    net.forward(x)
}

pub fn input_gradient(net: &ParallelNetwork, x: &[f64]) -> crate::Result<Vec<f64>> {
    net.input_gradient(x)
}

pub fn flatten(net: &ParallelNetwork) -> FlatParams {
    net.flatten()
}

pub fn unflatten(params: &FlatParams, shape: NetShape) -> crate::Result<ParallelNetwork> {
    ParallelNetwork::unflatten(params, shape)
}
