//! Synthetic inputs shared by the benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ximsis_core::SurvivalResponse;

/// Uniform features and a censored response driven by the first column.
pub fn synthetic_problem(n: usize, p: usize, seed: u64) -> (Array2<f64>, SurvivalResponse) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
    let y: Vec<f64> = (0..n)
        .map(|i| (2.0 * x[[i, 0]] + rng.random::<f64>()).exp())
        .collect();
    let delta: Vec<bool> = (0..n).map(|i| i == 0 || rng.random_bool(0.7)).collect();
    let resp = SurvivalResponse::new(y, delta).expect("valid synthetic response");
    (x, resp)
}

pub fn synthetic_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let v = u.iter().map(|x| x.sin() + rng.random::<f64>()).collect();
    (u, v)
}
