//! One-step and multistep consistency sampling.

use crate::error::{Error, Result};
use crate::rng;
use crate::schedule::NoiseArray;
use crate::toy::model::{consistency_forward, ConsistencyParam, ToyModel};

/// Draw `n` points with 1 to 4 consistency steps.
///
/// One step is `f(sigma_max * z, sigma_max)`. Additional steps re-noise
/// the current estimate at intermediate sigmas spaced geometrically
/// between sigma_max and sigma_min, snapped to the nearest noise-array
/// level (in log space) so the sampler only ever visits predefined levels.
pub fn sample(
    model: &ToyModel,
    cp: &ConsistencyParam,
    n: usize,
    steps: usize,
    array: &NoiseArray,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(1..=4).contains(&steps) {
        return Err(Error::Domain(format!("steps must be in [1, 4], got {steps}")));
    }
    let dim = model.data_dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let sigmas = array.sigmas();
    let sigma_max = *sigmas.last().expect("noise array is never empty");
    let sigma_min = sigmas[0];

    let mut rng = rng::rng_from_seed(seed);
    let mut noised: Vec<f64> = (0..n * dim)
        .map(|_| sigma_max * rng::standard_normal(&mut rng))
        .collect();
    let mut denoised = consistency_forward(model, &noised, &vec![sigma_max; n], cp)?;

    for i in 1..steps {
        let frac = i as f64 / steps as f64;
        let target = (sigma_max.ln() + frac * (sigma_min.ln() - sigma_max.ln())).exp();
        let t = snap_to_level(sigmas, target);
        if t <= cp.sigma_min {
            break;
        }
        let renoise = (t * t - cp.sigma_min * cp.sigma_min).sqrt();
        for (out, x0) in noised.iter_mut().zip(&denoised) {
            *out = x0 + renoise * rng::standard_normal(&mut rng);
        }
        denoised = consistency_forward(model, &noised, &vec![t; n], cp)?;
    }

    if denoised.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sampler output".into()));
    }
    Ok(denoised)
}

/// Nearest array level to `target` in log space.
fn snap_to_level(sigmas: &[f64], target: f64) -> f64 {
    let lt = target.ln();
    let pos = sigmas.partition_point(|&s| s < target);
    if pos == 0 {
        return sigmas[0];
    }
    if pos == sigmas.len() {
        return *sigmas.last().unwrap();
    }
    let (lo, hi) = (sigmas[pos - 1], sigmas[pos]);
    if (lt - lo.ln()).abs() <= (hi.ln() - lt).abs() {
        lo
    } else {
        hi
    }
}
