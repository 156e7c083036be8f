//! Random instance generators shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prob::{Channel, Joint3, ProbVector};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_simplex(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -r.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub(crate) fn random_prob(r: &mut impl Rng, n: usize) -> ProbVector {
    ProbVector::new(random_simplex(r, n)).unwrap()
}

pub(crate) fn random_channel(r: &mut impl Rng, n_in: usize, n_out: usize) -> Channel {
    let rows = (0..n_in).map(|_| random_simplex(r, n_out)).collect();
    Channel::new(rows).unwrap()
}

pub(crate) fn random_joint3(r: &mut impl Rng, dims: [usize; 3]) -> Joint3 {
    Joint3::new(dims, random_simplex(r, dims.iter().product())).unwrap()
}

/// `Y` uniform, `X` an erasure of `Y` (1/6), `Z` a further erasure of `X` (1/5).
pub(crate) fn erasure_chain() -> Joint3 {
    let z_given_x = Channel::new(vec![
        vec![0.8, 0.0, 0.2],
        vec![0.0, 0.8, 0.2],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    Joint3::from_chain(&ProbVector::uniform(2), &Channel::erasure(1.0 / 6.0).unwrap(), &z_given_x)
        .unwrap()
}

/// `Y = X xor Z` with independent uniform bits.
pub(crate) fn xor() -> Joint3 {
    Joint3::from_fn([2, 2, 2], |y, x, z| if y == x ^ z { 0.25 } else { 0.0 }).unwrap()
}

/// `Y = X = Z`, a uniform bit.
pub(crate) fn copy() -> Joint3 {
    Joint3::from_fn([2, 2, 2], |y, x, z| if y == x && x == z { 0.5 } else { 0.0 }).unwrap()
}

/// `Y = (X, Z)` with independent uniform bits.
pub(crate) fn pair() -> Joint3 {
    Joint3::from_fn([4, 2, 2], |y, x, z| if y == 2 * x + z { 0.25 } else { 0.0 }).unwrap()
}

/// Markov chain `Y - X - Z` built from random pieces.
pub(crate) fn random_markov(r: &mut impl Rng, dims: [usize; 3]) -> Joint3 {
    let [ny, nx, nz] = dims;
    Joint3::from_chain(&random_prob(r, ny), &random_channel(r, ny, nx), &random_channel(r, nx, nz))
        .unwrap()
}
