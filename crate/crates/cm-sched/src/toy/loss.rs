//! Consistency-training loss with analytic gradients.
//!
//! Per sample the student sees `x + sigma_hi * z` at `sigma_hi` and the
//! teacher — a gradient-severed copy of the current parameters, no EMA —
//! sees `x + sigma_lo * z` with the *same* draw `z`. The loss is the
//! weighted mean distance between the two consistency outputs; gradients
//! flow through the student side only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::MiniBatchSigmas;
use crate::toy::model::{ConsistencyParam, Gradients, ToyModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Squared,
    /// `dist(a, b) = sqrt(||a - b||^2 + c^2) - c`.
    PseudoHuber { c: f64 },
}

impl LossKind {
    /// The customary pseudo-Huber constant `0.00054 * sqrt(dim)`.
    pub fn pseudo_huber_for_dim(dim: usize) -> LossKind {
        LossKind::PseudoHuber {
            c: 0.00054 * (dim as f64).sqrt(),
        }
    }

    /// `(dist, d dist / d diff)` for the residual vector `diff = a - b`.
    fn eval(&self, diff: &[f64]) -> (f64, Vec<f64>) {
        let sq: f64 = diff.iter().map(|d| d * d).sum();
        match *self {
            LossKind::Squared => (sq, diff.iter().map(|d| 2.0 * d).collect()),
            LossKind::PseudoHuber { c } => {
                let root = (sq + c * c).sqrt();
                // sqrt(sq + c^2) - c written without the cancellation that
                // would swamp the value for large c.
                (sq / (root + c), diff.iter().map(|d| d / root).collect())
            }
        }
    }
}

/// How each sample's distance is weighted in the batch mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingKind {
    /// `lambda = 1 / (sigma_hi - sigma_lo)`.
    InverseDelta,
    Uniform,
}

impl WeightingKind {
    fn weight(&self, sigma_lo: f64, sigma_hi: f64) -> f64 {
        match self {
            WeightingKind::InverseDelta => 1.0 / (sigma_hi - sigma_lo),
            WeightingKind::Uniform => 1.0,
        }
    }
}

/// Loss and student gradients for one mini-batch.
///
/// `points` and `noise` are `n x dim` row-major; `noise` must be the same
/// unit-Gaussian draw for both sides of each pair — that sharing is what
/// makes the pair a denoising step along one trajectory.
#[allow(clippy::too_many_arguments)]
pub fn ct_loss(
    student: &ToyModel,
    teacher: &ToyModel,
    points: &[f64],
    noise: &[f64],
    sched: &MiniBatchSigmas,
    loss_kind: LossKind,
    weighting: WeightingKind,
    cp: &ConsistencyParam,
) -> Result<(f64, Gradients)> {
    cp.validate()?;
    let dim = student.data_dim();
    let n = sched.len();
    if n == 0 {
        return Err(Error::Schedule("ct_loss needs a non-empty batch".into()));
    }
    if points.len() != n * dim || noise.len() != n * dim {
        return Err(Error::Dimension(format!(
            "batch of {n} samples needs {} values, got {} points / {} noise",
            n * dim,
            points.len(),
            noise.len()
        )));
    }
    if student.dims() != teacher.dims() {
        return Err(Error::Dimension("student and teacher disagree on architecture".into()));
    }

    let mut grads = Gradients::zeros_like(student);
    let mut total = 0.0;
    let inv_n = 1.0 / n as f64;
    let mut x_hi = vec![0.0; dim];
    let mut x_lo = vec![0.0; dim];

    for j in 0..n {
        let (s_lo, s_hi) = (sched.sigma_lo[j], sched.sigma_hi[j]);
        if s_hi <= s_lo {
            return Err(Error::Schedule(format!(
                "sample {j}: sigma_hi ({s_hi}) must exceed sigma_lo ({s_lo}); the pair weight is undefined otherwise"
            )));
        }
        let x = &points[j * dim..(j + 1) * dim];
        let z = &noise[j * dim..(j + 1) * dim];
        for d in 0..dim {
            x_hi[d] = x[d] + s_hi * z[d];
            x_lo[d] = x[d] + s_lo * z[d];
        }

        let (skip_hi, out_hi) = cp.coefficients(s_hi);
        let (skip_lo, out_lo) = cp.coefficients(s_lo);

        let (nn_hi, cache) = student.forward_cached(&x_hi, s_hi);
        let nn_lo = teacher.nn_forward(&x_lo, s_lo);

        let diff: Vec<f64> = (0..dim)
            .map(|d| {
                (skip_hi * x_hi[d] + out_hi * nn_hi[d]) - (skip_lo * x_lo[d] + out_lo * nn_lo[d])
            })
            .collect();
        let (dist, ddist) = loss_kind.eval(&diff);
        let w = weighting.weight(s_lo, s_hi) * inv_n;
        total += w * dist;

        // d loss / d nn_hi = w * ddist * c_out(sigma_hi)
        let grad_out: Vec<f64> = ddist.iter().map(|g| w * g * out_hi).collect();
        student.backward(&cache, &grad_out, &mut grads);
    }

    if !total.is_finite() {
        return Err(Error::NonFinite("ct_loss".into()));
    }
    Ok((total, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::schedule::{karras_sigmas, subsample_levels, KarrasParams, MiniBatchSigmas};

    fn cp() -> ConsistencyParam {
        ConsistencyParam {
            sigma_data: 0.5,
            sigma_min: 0.002,
        }
    }

    fn batch_from_levels(n_k: usize, count: usize, seed: u64) -> MiniBatchSigmas {
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let levels = subsample_levels(&array, n_k).unwrap();
        let mut rng = rng::rng_from_seed(seed);
        let idx: Vec<usize> = (0..count)
            .map(|_| rand::Rng::gen_range(&mut rng, 0..n_k - 1))
            .collect();
        MiniBatchSigmas {
            sigma_lo: idx.iter().map(|&i| levels.sigmas()[i]).collect(),
            sigma_hi: idx.iter().map(|&i| levels.sigmas()[i + 1]).collect(),
            level_index: idx,
            seed,
        }
    }

    fn random_batch(n: usize, dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = rng::rng_from_seed(seed);
        let points = (0..n * dim).map(|_| rng::standard_normal(&mut rng)).collect();
        let noise = (0..n * dim).map(|_| rng::standard_normal(&mut rng)).collect();
        (points, noise)
    }

    /// Central finite differences over every parameter, the independent
    /// oracle for the analytic gradients.
    fn finite_difference_check(loss_kind: LossKind, seed: u64) -> f64 {
        let model = ToyModel::new(2, &[8, 8], 4, seed).unwrap();
        let sched = batch_from_levels(12, 16, seed ^ 0xABCD);
        let (points, noise) = random_batch(16, 2, seed ^ 0x1234);
        let (_, grads) = ct_loss(
            &model,
            &model,
            &points,
            &noise,
            &sched,
            loss_kind,
            WeightingKind::InverseDelta,
            &cp(),
        )
        .unwrap();

        let flat_grad: Vec<f64> = {
            let mut f = Vec::new();
            for l in 0..grads.weights.len() {
                f.extend_from_slice(&grads.weights[l]);
                f.extend_from_slice(&grads.biases[l]);
            }
            f
        };

        let h = 1e-5;
        let base = model.to_flat();
        let mut worst = 0.0f64;
        for p in 0..base.len() {
            let mut plus = base.clone();
            plus[p] += h;
            let mut minus = base.clone();
            minus[p] -= h;
            let mut m_plus = model.clone();
            m_plus.set_flat(&plus).unwrap();
            let mut m_minus = model.clone();
            m_minus.set_flat(&minus).unwrap();
            // The teacher is a frozen snapshot: only the student moves, so
            // the difference quotient probes the same severed-gradient
            // partial the analytic path computes.
            let lp = ct_loss(
                &m_plus,
                &model,
                &points,
                &noise,
                &sched,
                loss_kind,
                WeightingKind::InverseDelta,
                &cp(),
            )
            .unwrap()
            .0;
            let lm = ct_loss(
                &m_minus,
                &model,
                &points,
                &noise,
                &sched,
                loss_kind,
                WeightingKind::InverseDelta,
                &cp(),
            )
            .unwrap()
            .0;
            let numeric = (lp - lm) / (2.0 * h);
            let denom = flat_grad[p].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((flat_grad[p] - numeric).abs() / denom);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences_squared() {
        let worst = finite_difference_check(LossKind::Squared, 1);
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn gradients_match_finite_differences_pseudo_huber() {
        let worst = finite_difference_check(LossKind::pseudo_huber_for_dim(2), 2);
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn pseudo_huber_large_c_approaches_scaled_squared() {
        // sqrt(r^2 + c^2) - c -> r^2 / (2c) as c -> infinity.
        let model = ToyModel::new(2, &[8], 4, 3).unwrap();
        let sched = batch_from_levels(10, 8, 5);
        let (points, noise) = random_batch(8, 2, 7);
        let c = 1e6;
        let (huber, _) = ct_loss(
            &model,
            &model,
            &points,
            &noise,
            &sched,
            LossKind::PseudoHuber { c },
            WeightingKind::Uniform,
            &cp(),
        )
        .unwrap();
        let (squared, _) = ct_loss(
            &model,
            &model,
            &points,
            &noise,
            &sched,
            LossKind::Squared,
            WeightingKind::Uniform,
            &cp(),
        )
        .unwrap();
        let rel = (huber - squared / (2.0 * c)).abs() / (squared / (2.0 * c));
        assert!(rel < 1e-6, "relative deviation {rel}");
    }

    #[test]
    fn teacher_at_sigma_min_reduces_to_reconstruction() {
        // With z = 0 and sigma_lo = sigma_min the teacher output is the
        // clean x, so the loss is a weighted reconstruction error.
        let model = ToyModel::new(2, &[8], 4, 4).unwrap();
        let array = karras_sigmas(&KarrasParams::default()).unwrap();
        let levels = subsample_levels(&array, 10).unwrap();
        let sched = MiniBatchSigmas {
            level_index: vec![0; 4],
            sigma_lo: vec![levels.sigmas()[0]; 4],
            sigma_hi: vec![levels.sigmas()[1]; 4],
            seed: 0,
        };
        let (points, _) = random_batch(4, 2, 9);
        let noise = vec![0.0; 8];
        let (loss, _) = ct_loss(
            &model,
            &model,
            &points,
            &noise,
            &sched,
            LossKind::Squared,
            WeightingKind::Uniform,
            &cp(),
        )
        .unwrap();
        // Compare to directly reconstructing x with the student at sigma_hi.
        let outputs =
            crate::toy::model::consistency_forward(&model, &points, &sched.sigma_hi, &cp()).unwrap();
        let expected: f64 = outputs
            .chunks_exact(2)
            .zip(points.chunks_exact(2))
            .map(|(o, x)| (o[0] - x[0]).powi(2) + (o[1] - x[1]).powi(2))
            .sum::<f64>()
            / 4.0;
        assert!((loss - expected).abs() < 1e-12);
    }

    #[test]
    fn equal_sigmas_rejected() {
        let model = ToyModel::new(2, &[8], 4, 4).unwrap();
        let sched = MiniBatchSigmas {
            level_index: vec![0],
            sigma_lo: vec![1.0],
            sigma_hi: vec![1.0],
            seed: 0,
        };
        let err = ct_loss(
            &model,
            &model,
            &[0.0, 0.0],
            &[0.0, 0.0],
            &sched,
            LossKind::Squared,
            WeightingKind::InverseDelta,
            &cp(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schedule(_)));
    }

    #[test]
    fn teacher_equals_gradient_severed_student_forward() {
        let model = ToyModel::new(2, &[16], 4, 8).unwrap();
        let x = [0.2, -0.4];
        let sigma = 1.5;
        let teacher_out = model.nn_forward(&x, sigma);
        let (student_out, _) = model.forward_cached(&x, sigma);
        for (a, b) in teacher_out.iter().zip(&student_out) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
