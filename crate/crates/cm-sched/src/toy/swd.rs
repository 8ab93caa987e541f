//! Sliced Wasserstein-1 distance between point sets: the exact 1D
//! Wasserstein distance of the projections onto random unit directions,
//! averaged over directions.

use crate::error::{Error, Result};
use crate::rng;

/// `count` unit directions in `dim` dimensions, row-major, Gaussian
/// normalized, deterministic given the seed.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::rng_from_seed(seed);
    let mut dirs = Vec::with_capacity(count * dim);
    for _ in 0..count {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng::standard_normal(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                dirs.extend(v.iter().map(|x| x / norm));
                break;
            }
        }
    }
    dirs
}

/// Exact W1 between two 1D empirical distributions (possibly of different
/// sizes): the integral of |F_a^-1 - F_b^-1| over the merged quantile
/// grid, walked in exact integer arithmetic over the common denominator.
pub fn wasserstein_1d(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let denom = (n * m) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut q = 0usize; // current quantile, in units of 1/(n*m)
    let mut total = 0.0;
    while i < n && j < m {
        let next_a = (i + 1) * m;
        let next_b = (j + 1) * n;
        let next = next_a.min(next_b);
        total += (next - q) as f64 / denom * (a[i] - b[j]).abs();
        q = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    total
}

/// Sliced Wasserstein-1 distance. Symmetric in its arguments and
/// deterministic given the seed; both sets are `rows x dim` row-major.
pub fn evaluate_swd(a: &[f64], b: &[f64], dim: usize, projections: usize, seed: u64) -> Result<f64> {
    if dim == 0 || projections == 0 {
        return Err(Error::config("projections", "dim and projections must be >= 1"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Dimension("both point sets must be non-empty".into()));
    }
    if a.len() % dim != 0 || b.len() % dim != 0 {
        return Err(Error::Dimension(format!(
            "point buffers ({} and {}) are not multiples of dim = {dim}",
            a.len(),
            b.len()
        )));
    }
    let dirs = unit_directions(dim, projections, seed);
    let mut total = 0.0;
    let mut pa = vec![0.0; a.len() / dim];
    let mut pb = vec![0.0; b.len() / dim];
    for dir in dirs.chunks_exact(dim) {
        for (out, row) in pa.iter_mut().zip(a.chunks_exact(dim)) {
            *out = row.iter().zip(dir).map(|(x, d)| x * d).sum();
        }
        for (out, row) in pb.iter_mut().zip(b.chunks_exact(dim)) {
            *out = row.iter().zip(dir).map(|(x, d)| x * d).sum();
        }
        total += wasserstein_1d(&mut pa, &mut pb);
    }
    Ok(total / projections as f64)
}
