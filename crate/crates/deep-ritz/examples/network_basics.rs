//! Builds a random parallel tanh network, evaluates it with its input gradient,
//! checks the closed-form magnitude bounds, and round-trips it through JSON.

use deep_ritz::netcore::bounds::{input_gradient_bound, value_bound};
use deep_ritz::netcore::{aligned_dim, param_count, random_uniform, NetShape, ParallelNetwork};
use deep_ritz::rng::SplitRng;

fn main() -> deep_ritz::Result<()> {
    let shape = NetShape::new(8, 4, 3, 2)?;
    let mut rng = SplitRng::new(42);
    let mut net = random_uniform(shape, 1.0, &mut rng);
    net.set_coefficients(vec![0.125; 8])?;

    println!("m = {}, W = {}, L = {}, d = {}", shape.m, shape.width, shape.depth, shape.d);
    println!("parameters per sub-network: {}", param_count(4, 3, 2));
    println!("padded dimension: {:?}, slots used: {}", aligned_dim(4, 3, 2), shape.slots_per_subnet());

    for x in [[0.0, 0.0], [0.25, 0.75], [1.0, 0.5]] {
        let (u, g) = net.value_and_gradient(&x)?;
        println!("u({x:?}) = {u:+.6}, ∇u = [{:+.6}, {:+.6}]", g[0], g[1]);
    }

    let sub = &net.subnets()[0];
    let (w, l) = (sub.width(), sub.depth());
    let b = sub.max_abs_weight();
    println!("sub-network 0: |φ(x)| ≤ {:.3}, |∂φ/∂x_i| ≤ {:.3}", value_bound(w, b), input_gradient_bound(w, l, b));

    let text = net.to_json_string(Some(serde_json::json!({ "seed": 42 })));
    let (back, prov) = ParallelNetwork::from_json_str(&text)?;
    assert_eq!(back.forward(&[0.3, 0.6])?, net.forward(&[0.3, 0.6])?);
    println!("JSON round trip ok ({} bytes, provenance {})", text.len(), prov.unwrap());
    Ok(())
}
