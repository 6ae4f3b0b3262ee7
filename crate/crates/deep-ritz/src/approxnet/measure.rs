//! Sup-norm and `W^{1,∞}` error measurement on tensor grids and random clouds.

use rayon::prelude::*;

use crate::energy::Evaluable;
use crate::error::{check_dim, invalid, Result};
use crate::rng::SplitRng;

fn pointwise(f: &dyn Evaluable, net: &dyn Evaluable, k: usize, x: &[f64]) -> f64 {
    let (a, ga) = f.value_grad(x);
    let (b, gb) = net.value_grad(x);
    let mut e = (a - b).abs();
    if k >= 1 {
        for (p, q) in ga.iter().zip(&gb) {
            e = e.max((p - q).abs());
        }
    }
    e
}

/// Max of `|f − net|` (and, for `k = 1`, every `|∂_i f − ∂_i net|`) over the
/// `resolution^d` tensor grid of `[0,1]^d`, endpoints included.
pub fn measure_sobolev_error(f: &dyn Evaluable, net: &dyn Evaluable, k: usize, resolution: usize) -> Result<f64> {
    check_dim(f.dim(), net.dim())?;
    if k > 1 {
        return Err(invalid("only k ∈ {0, 1} is measured"));
    }
    if resolution < 2 {
        return Err(invalid("grid resolution must be at least 2"));
    }
    Ok(measure_sobolev_error_on(f, net, k, resolution, 0.0, 1.0))
}

/// As [`measure_sobolev_error`] on `[a, b]^d`.
pub(crate) fn measure_sobolev_error_on(f: &dyn Evaluable, net: &dyn Evaluable, k: usize, resolution: usize, a: f64, b: f64) -> f64 {
    let d = f.dim();
    let total = resolution.pow(d as u32);
    let step = (b - a) / (resolution - 1) as f64;
    let eval = |idx: usize| {
        let mut x = vec![0.0; d];
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = a + (r % resolution) as f64 * step;
            r /= resolution;
        }
        pointwise(f, net, k, &x)
    };
    (0..total).into_par_iter().with_min_len(512).map(eval).reduce(|| 0.0, f64::max)
}

/// Same measurement over `count` uniform random points of `[0,1]^d`.
pub fn measure_sobolev_error_random(f: &dyn Evaluable, net: &dyn Evaluable, k: usize, count: usize, seed: u64) -> Result<f64> {
    check_dim(f.dim(), net.dim())?;
    let d = f.dim();
    let mut rng = SplitRng::new(seed);
    let pts: Vec<Vec<f64>> = (0..count).map(|_| (0..d).map(|_| rng.uniform()).collect()).collect();
    Ok(pts.par_iter().with_min_len(512).map(|x| pointwise(f, net, k, x)).reduce(|| 0.0, f64::max))
}
