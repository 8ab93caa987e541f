//! Predefined Karras noise array and per-mini-batch noise assignment.
//!
//! The key design rule here: the Karras grid is generated **once** per run
//! (`karras_sigmas`) and every downstream operation *selects* values from
//! it rather than recomputing them. Subsampling (`subsample_levels`) picks
//! an `n_k`-level view by index, and the batch schedulers
//! (`polynomial_schedule`, `lognormal_schedule`, `inject_high_noise`) only
//! ever hand out elements of that view. As a consequence the set of
//! distinct sigmas touched over an entire run is bounded by the grid size,
//! no matter how often the discretization count changes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Parameters of the predefined Karras grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KarrasParams {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Warp exponent; larger values concentrate resolution at low noise.
    pub rho: f64,
    /// Grid resolution: the array holds `s1 + 1` sigmas.
    pub s1: usize,
}

impl Default for KarrasParams {
    fn default() -> Self {
        KarrasParams {
            sigma_min: 0.002,
            sigma_max: 80.0,
            rho: 7.0,
            s1: 250,
        }
    }
}

impl KarrasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::config("sigma_min", "must be a positive finite number"));
        }
        if !(self.sigma_max > self.sigma_min && self.sigma_max.is_finite()) {
            return Err(Error::config("sigma_max", "must be finite and exceed sigma_min"));
        }
        if !(self.rho >= 1.0 && self.rho.is_finite()) {
            return Err(Error::config("rho", "must be >= 1"));
        }
        if self.s1 < 2 {
            return Err(Error::config("s1", "must be >= 2"));
        }
        Ok(())
    }
}

/// The immutable predefined noise grid. Constructed once, shared read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseArray {
    sigmas: Vec<f64>,
    params: KarrasParams,
}

impl NoiseArray {
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn params(&self) -> &KarrasParams {
        &self.params
    }

    pub fn s1(&self) -> usize {
        self.params.s1
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Bitwise membership test: scheduling never *recomputes* sigmas, so a
    /// value belongs to the array iff its exact bit pattern is present.
    pub fn contains_bits(&self, value: f64) -> bool {
        let bits = value.to_bits();
        self.sigmas.iter().any(|s| s.to_bits() == bits)
    }
}

/// Generate the predefined Karras grid:
/// `sigma(u) = (sigma_min^(1/rho) + u * (sigma_max^(1/rho) - sigma_min^(1/rho)))^rho`
/// evaluated at `u = i / s1` for `i in 0..=s1`, ascending.
pub fn karras_sigmas(params: &KarrasParams) -> Result<NoiseArray> {
    params.validate()?;
    let inv_rho = 1.0 / params.rho;
    let lo = params.sigma_min.powf(inv_rho);
    let hi = params.sigma_max.powf(inv_rho);
    let sigmas: Vec<f64> = (0..=params.s1)
        .map(|i| {
            let u = i as f64 / params.s1 as f64;
            (lo + u * (hi - lo)).powf(params.rho)
        })
        .collect();
    debug_assert!(sigmas.windows(2).all(|w| w[0] < w[1]));
    Ok(NoiseArray {
        sigmas,
        params: *params,
    })
}

/// An `n_k`-level view of the parent array, selected by index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationLevels {
    indices: Vec<usize>,
    sigmas: Vec<f64>,
    n_k: usize,
}

impl DiscretizationLevels {
    /// Indices into the parent `NoiseArray`, length `n_k + 1`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The selected sigma values, length `n_k + 1`.
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }
}

/// Round `num / den` half-to-even, in exact integer arithmetic.
fn round_ratio_half_even(num: usize, den: usize) -> usize {
    let q = num / den;
    let r = num % den;
    match (2 * r).cmp(&den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Select `n_k + 1` levels from the parent array at indices
/// `round(i * s1 / n_k)` for `i in 0..=n_k` (ties round half-to-even).
///
/// Both endpoints are always pinned, so sigma_min and sigma_max survive
/// every discretization change.
pub fn subsample_levels(array: &NoiseArray, n_k: usize) -> Result<DiscretizationLevels> {
    let s1 = array.s1();
    if n_k < 1 || n_k > s1 {
        return Err(Error::config(
            "n_k",
            format!("must be in [1, {s1}], got {n_k}"),
        ));
    }
    let indices: Vec<usize> = (0..=n_k).map(|i| round_ratio_half_even(i * s1, n_k)).collect();
    let sigmas: Vec<f64> = indices.iter().map(|&i| array.sigmas[i]).collect();
    debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
    debug_assert_eq!(indices[0], 0);
    debug_assert_eq!(indices[n_k], s1);
    Ok(DiscretizationLevels {
        indices,
        sigmas,
        n_k,
    })
}

/// Parameters of the polynomial batch scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyScheduleParams {
    /// Polynomial exponent `c`; higher values weight low noise more heavily.
    pub curve: f64,
    /// Std of the additive per-sample index jitter (0 disables it).
    pub jitter_std: f64,
    pub batch_size: usize,
}

impl PolyScheduleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.curve > 0.0 && self.curve.is_finite()) {
            return Err(Error::config("curve", "must be a positive finite number"));
        }
        if !(self.jitter_std >= 0.0 && self.jitter_std.is_finite()) {
            return Err(Error::config("jitter_std", "must be >= 0"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// Per-sample noise levels for one training step. `sigma_lo[j]` and
/// `sigma_hi[j]` are always *adjacent* levels of the discretization the
/// batch was drawn from, so each sample carries a valid denoising pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatchSigmas {
    pub level_index: Vec<usize>,
    pub sigma_lo: Vec<f64>,
    pub sigma_hi: Vec<f64>,
    pub seed: u64,
}

impl MiniBatchSigmas {
    pub fn len(&self) -> usize {
        self.level_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level_index.is_empty()
    }

    fn from_level_indices(level_index: Vec<usize>, levels: &DiscretizationLevels, seed: u64) -> Self {
        let sigma_lo = level_index.iter().map(|&i| levels.sigmas[i]).collect();
        let sigma_hi = level_index.iter().map(|&i| levels.sigmas[i + 1]).collect();
        MiniBatchSigmas {
            level_index,
            sigma_lo,
            sigma_hi,
            seed,
        }
    }

    /// Check the structural invariants against the levels this batch was
    /// drawn from. Used by tests and the audit path.
    pub fn check_invariants(&self, levels: &DiscretizationLevels) -> Result<()> {
        for j in 0..self.len() {
            let i = self.level_index[j];
            if i + 1 >= levels.sigmas().len() {
                return Err(Error::Schedule(format!(
                    "level_index[{j}] = {i} out of range for n_k = {}",
                    levels.n_k()
                )));
            }
            if self.sigma_lo[j].to_bits() != levels.sigmas()[i].to_bits()
                || self.sigma_hi[j].to_bits() != levels.sigmas()[i + 1].to_bits()
            {
                return Err(Error::Schedule(format!(
                    "sample {j} carries sigmas that are not the levels at index {i}"
                )));
            }
            if !(self.sigma_lo[j] < self.sigma_hi[j]) {
                return Err(Error::Schedule(format!(
                    "sample {j}: sigma_lo >= sigma_hi"
                )));
            }
        }
        Ok(())
    }
}

/// Polynomial noise scheduling: batch position `j` maps to the raw index
/// `(j / (d-1))^c * (n_k - 1)` plus one Gaussian jitter draw, rounded
/// half-to-even and clamped to `[0, n_k - 1]` — the largest index whose
/// upper neighbour still exists, so the jitter-free top of the curve
/// trains the `(sigma_{n_k-1}, sigma_max)` pair. The assignments are then
/// randomly permuted across batch positions, so the polynomial shape
/// controls the index *distribution* rather than binding noise levels to
/// specific sample slots.
pub fn polynomial_schedule(
    levels: &DiscretizationLevels,
    p: &PolyScheduleParams,
    seed: u64,
) -> Result<MiniBatchSigmas> {
    p.validate()?;
    let n_k = levels.n_k();
    if n_k < 2 {
        return Err(Error::Schedule(format!(
            "polynomial schedule needs n_k >= 2 so a (sigma_lo, sigma_hi) pair exists, got n_k = {n_k}"
        )));
    }
    let d = p.batch_size;
    let top = n_k - 1;
    let mut rng = rng::rng_from_seed(seed);

    let mut level_index = Vec::with_capacity(d);
    for j in 0..d {
        let frac = if d == 1 { 0.0 } else { j as f64 / (d - 1) as f64 };
        let mut raw = frac.powf(p.curve) * (n_k - 1) as f64;
        if p.jitter_std > 0.0 {
            raw += p.jitter_std * rng::standard_normal(&mut rng);
        }
        let idx = raw.round_ties_even().clamp(0.0, top as f64) as usize;
        level_index.push(idx);
    }

    let perm = rng::permutation(&mut rng, d);
    let permuted: Vec<usize> = perm.iter().map(|&j| level_index[j]).collect();
    Ok(MiniBatchSigmas::from_level_indices(permuted, levels, seed))
}

/// Log-normal baseline: each sample draws `l ~ Normal(mean_log, std_log)`
/// and lands on the level whose sigma is nearest to `exp(l)` in log-space,
/// among the `n_k` levels that have an upper neighbour.
pub fn lognormal_schedule(
    levels: &DiscretizationLevels,
    mean_log: f64,
    std_log: f64,
    batch_size: usize,
    seed: u64,
) -> Result<MiniBatchSigmas> {
    if !(std_log > 0.0 && std_log.is_finite()) {
        return Err(Error::config("std_log", "must be a positive finite number"));
    }
    if !mean_log.is_finite() {
        return Err(Error::config("mean_log", "must be finite"));
    }
    if batch_size < 1 {
        return Err(Error::config("batch_size", "must be >= 1"));
    }
    let n_k = levels.n_k();
    if n_k < 1 {
        return Err(Error::Schedule("lognormal schedule needs n_k >= 1".into()));
    }
    let log_sigmas: Vec<f64> = levels.sigmas()[..n_k].iter().map(|s| s.ln()).collect();
    let mut rng = rng::rng_from_seed(seed);
    let level_index: Vec<usize> = (0..batch_size)
        .map(|_| {
            let l = mean_log + std_log * rng::standard_normal(&mut rng);
            nearest_index(&log_sigmas, l)
        })
        .collect();
    Ok(MiniBatchSigmas::from_level_indices(level_index, levels, seed))
}

/// Index of the element of a sorted slice nearest to `x` (ties -> lower).
fn nearest_index(sorted: &[f64], x: f64) -> usize {
    let pos = sorted.partition_point(|&v| v < x);
    if pos == 0 {
        return 0;
    }
    if pos == sorted.len() {
        return sorted.len() - 1;
    }
    if (x - sorted[pos - 1]) <= (sorted[pos] - x) {
        pos - 1
    } else {
        pos
    }
}

/// Reassign `floor(ratio * batch_size)` uniformly chosen batch positions to
/// uniformly chosen levels whose sigma falls inside `sigma_range`. If the
/// discretization has no level in range, the level nearest to the range
/// midpoint is used instead. Levels are selected from the existing
/// discretization, never invented, so closure against the parent array is
/// preserved.
pub fn inject_high_noise(
    mut batch: MiniBatchSigmas,
    levels: &DiscretizationLevels,
    ratio: f64,
    sigma_range: (f64, f64),
    seed: u64,
) -> Result<MiniBatchSigmas> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::config("ratio", "must lie in [0, 1]"));
    }
    let (range_lo, range_hi) = sigma_range;
    if !(range_lo.is_finite() && range_hi.is_finite() && range_lo <= range_hi) {
        return Err(Error::config("sigma_range", "must be a finite (lo, hi) with lo <= hi"));
    }
    let d = batch.len();
    let count = (ratio * d as f64).floor() as usize;
    if d == 0 || count == 0 {
        return Ok(batch);
    }
    let n_k = levels.n_k();
    if n_k < 2 {
        return Err(Error::Schedule(
            "high-noise injection needs n_k >= 2".into(),
        ));
    }

    // Candidate levels: those whose sigma_lo falls inside the range and
    // which still have an upper neighbour.
    let candidates: Vec<usize> = (0..=n_k - 2)
        .filter(|&i| {
            let s = levels.sigmas()[i];
            s >= range_lo && s <= range_hi
        })
        .collect();
    let candidates = if candidates.is_empty() {
        let mid = 0.5 * (range_lo + range_hi);
        let nearest = (0..=n_k - 2)
            .min_by(|&a, &b| {
                let da = (levels.sigmas()[a] - mid).abs();
                let db = (levels.sigmas()[b] - mid).abs();
                da.partial_cmp(&db).unwrap()
            })
            .expect("n_k >= 2 guarantees at least one candidate");
        vec![nearest]
    } else {
        candidates
    };

    let mut rng = rng::rng_from_seed(seed);
    let positions = rng::sample_without_replacement(&mut rng, d, count);
    for pos in positions {
        let pick = candidates[rand::Rng::gen_range(&mut rng, 0..candidates.len())];
        batch.level_index[pos] = pick;
        batch.sigma_lo[pos] = levels.sigmas()[pick];
        batch.sigma_hi[pos] = levels.sigmas()[pick + 1];
    }
    Ok(batch)
}

/// Which batch scheduler to run, with its distribution parameters.
/// Batch size and seed arrive at call time so analysis code can sweep them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    Polynomial { curve: f64, jitter_std: f64 },
    LogNormal { mean_log: f64, std_log: f64 },
}

impl ScheduleSpec {
    pub fn generate(
        &self,
        levels: &DiscretizationLevels,
        batch_size: usize,
        seed: u64,
    ) -> Result<MiniBatchSigmas> {
        match *self {
            ScheduleSpec::Polynomial { curve, jitter_std } => polynomial_schedule(
                levels,
                &PolyScheduleParams {
                    curve,
                    jitter_std,
                    batch_size,
                },
                seed,
            ),
            ScheduleSpec::LogNormal { mean_log, std_log } => {
                lognormal_schedule(levels, mean_log, std_log, batch_size, seed)
            }
        }
    }
}

/// Optional high-noise injection applied after the base schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub ratio: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

impl InjectionSpec {
    pub fn apply(
        &self,
        batch: MiniBatchSigmas,
        levels: &DiscretizationLevels,
        seed: u64,
    ) -> Result<MiniBatchSigmas> {
        inject_high_noise(batch, levels, self.ratio, (self.sigma_lo, self.sigma_hi), seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_array() -> NoiseArray {
        karras_sigmas(&KarrasParams::default()).unwrap()
    }

    #[test]
    fn karras_endpoints_and_midpoint() {
        let array = default_array();
        let s = array.sigmas();
        assert_eq!(s.len(), 251);
        assert!((s[0] - 0.002).abs() / 0.002 < 1e-9);
        assert!((s[250] - 80.0).abs() / 80.0 < 1e-9);
        // Frozen from a 50-digit evaluation of the warp at u = 1/2.
        let expected_mid = 2.515_218_976_147_158_6;
        assert!((s[125] - expected_mid).abs() / expected_mid < 1e-12);
    }

    #[test]
    fn karras_linear_when_rho_is_one() {
        let array = karras_sigmas(&KarrasParams {
            sigma_min: 0.002,
            sigma_max: 80.0,
            rho: 1.0,
            s1: 2,
        })
        .unwrap();
        let s = array.sigmas();
        assert!((s[0] - 0.002).abs() < 1e-12);
        assert!((s[1] - 40.001).abs() < 1e-9);
        assert!((s[2] - 80.0).abs() < 1e-9);
    }

    #[test]
    fn karras_rejects_bad_params() {
        let err = karras_sigmas(&KarrasParams {
            sigma_min: 80.0,
            sigma_max: 0.002,
            rho: 7.0,
            s1: 250,
        })
        .unwrap_err();
        assert!(err.to_string().contains("sigma_max"));
        let err = karras_sigmas(&KarrasParams {
            rho: 0.5,
            ..KarrasParams::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("rho"));
        let err = karras_sigmas(&KarrasParams {
            s1: 1,
            ..KarrasParams::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("s1"));
    }

    #[test]
    fn subsample_identity_and_stride_two() {
        let array = default_array();
        let id = subsample_levels(&array, 250).unwrap();
        assert_eq!(id.indices(), (0..=250).collect::<Vec<_>>());
        let half = subsample_levels(&array, 125).unwrap();
        assert_eq!(half.indices(), (0..=125).map(|i| 2 * i).collect::<Vec<_>>());
    }

    #[test]
    fn subsample_small_grid_hand_enumerated() {
        let array = karras_sigmas(&KarrasParams {
            s1: 10,
            ..KarrasParams::default()
        })
        .unwrap();
        let levels = subsample_levels(&array, 4).unwrap();
        // round-half-even of [0, 2.5, 5, 7.5, 10]
        assert_eq!(levels.indices(), &[0, 2, 5, 8, 10]);
        for (i, &idx) in levels.indices().iter().enumerate() {
            assert_eq!(levels.sigmas()[i].to_bits(), array.sigmas()[idx].to_bits());
        }
    }

    #[test]
    fn subsample_rejects_out_of_range() {
        let array = default_array();
        assert!(subsample_levels(&array, 0).is_err());
        assert!(subsample_levels(&array, 251).is_err());
    }

    #[test]
    fn polynomial_linear_map_is_identity() {
        // c = 1 with d = n_k lands each batch position on its own level,
        // the top one carrying the (sigma_{n_k-1}, sigma_max) pair.
        let array = default_array();
        let n_k = 16;
        let levels = subsample_levels(&array, n_k).unwrap();
        let batch = polynomial_schedule(
            &levels,
            &PolyScheduleParams {
                curve: 1.0,
                jitter_std: 0.0,
                batch_size: n_k,
            },
            0,
        )
        .unwrap();
        let mut sorted = batch.level_index.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..=n_k - 1).collect::<Vec<_>>());
        assert_eq!(
            batch.sigma_hi.iter().cloned().fold(0.0, f64::max),
            *levels.sigmas().last().unwrap()
        );
        batch.check_invariants(&levels).unwrap();
    }

    #[test]
    fn polynomial_curve_four_hand_evaluated() {
        // Raw indices (j/4)^4 * 20 = [0, 0.078125, 1.25, 6.328125, 20]
        // -> rounded half-even: [0, 0, 1, 6, 20].
        let array = default_array();
        let levels = subsample_levels(&array, 21).unwrap();
        let batch = polynomial_schedule(
            &levels,
            &PolyScheduleParams {
                curve: 4.0,
                jitter_std: 0.0,
                batch_size: 5,
            },
            0,
        )
        .unwrap();
        let mut sorted = batch.level_index.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 0, 1, 6, 20]);
    }

    #[test]
    fn polynomial_rejects_single_level() {
        let array = default_array();
        let levels = subsample_levels(&array, 1).unwrap();
        let err = polynomial_schedule(
            &levels,
            &PolyScheduleParams {
                curve: 4.0,
                jitter_std: 0.0,
                batch_size: 8,
            },
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schedule(_)));
    }

    #[test]
    fn polynomial_deterministic_given_seed() {
        let array = default_array();
        let levels = subsample_levels(&array, 100).unwrap();
        let p = PolyScheduleParams {
            curve: 4.0,
            jitter_std: 1.0,
            batch_size: 256,
        };
        let a = polynomial_schedule(&levels, &p, 42).unwrap();
        let b = polynomial_schedule(&levels, &p, 42).unwrap();
        assert_eq!(a, b);
        let c = polynomial_schedule(&levels, &p, 43).unwrap();
        assert_ne!(a.level_index, c.level_index);
    }

    #[test]
    fn lognormal_degenerate_std_collapses_to_one_level() {
        let array = default_array();
        let levels = subsample_levels(&array, 50).unwrap();
        let m = 17;
        let batch = lognormal_schedule(&levels, levels.sigmas()[m].ln(), 1e-12, 64, 9).unwrap();
        assert!(batch.level_index.iter().all(|&i| i == m));
        batch.check_invariants(&levels).unwrap();
    }

    #[test]
    fn lognormal_shares_match_monte_carlo_oracle() {
        // Oracle (10^6 draws, independent implementation): share of
        // assigned sigma > 40 is ~0.9%, share < 10 is ~95%.
        let array = default_array();
        let levels = subsample_levels(&array, 100).unwrap();
        let batch = lognormal_schedule(&levels, -1.1, 2.0, 1024, 0).unwrap();
        let hi = batch.sigma_lo.iter().filter(|&&s| s > 40.0).count() as f64 / 1024.0;
        let lo = batch.sigma_lo.iter().filter(|&&s| s < 10.0).count() as f64 / 1024.0;
        assert!(hi < 0.05, "high-noise share {hi} should be below 5%");
        assert!(lo > 0.60, "low-noise share {lo} should be above 60%");
    }

    #[test]
    fn injection_ratio_zero_is_identity() {
        let array = default_array();
        let levels = subsample_levels(&array, 100).unwrap();
        let batch = lognormal_schedule(&levels, -1.1, 2.0, 128, 0).unwrap();
        let after = inject_high_noise(batch.clone(), &levels, 0.0, (40.0, 80.0), 5).unwrap();
        assert_eq!(batch, after);
    }

    #[test]
    fn injection_hits_exact_count() {
        let array = default_array();
        let levels = subsample_levels(&array, 250).unwrap();
        // Base batch with every sample far below the range.
        let base = lognormal_schedule(&levels, -2.0, 0.1, 1024, 1).unwrap();
        assert!(base.sigma_lo.iter().all(|&s| s < 40.0));
        let after = inject_high_noise(base, &levels, 0.04, (40.0, 80.0), 2).unwrap();
        let in_range = after
            .sigma_lo
            .iter()
            .filter(|&&s| (40.0..=80.0).contains(&s))
            .count();
        assert_eq!(in_range, 40);
        after.check_invariants(&levels).unwrap();
    }

    #[test]
    fn injection_ratio_one_covers_everything() {
        let array = default_array();
        let levels = subsample_levels(&array, 250).unwrap();
        let base = lognormal_schedule(&levels, -1.1, 2.0, 256, 3).unwrap();
        let after = inject_high_noise(base, &levels, 1.0, (40.0, 80.0), 4).unwrap();
        assert!(after
            .sigma_lo
            .iter()
            .all(|&s| (40.0..=80.0).contains(&s)));
    }

    #[test]
    fn injection_empty_range_falls_back_to_nearest() {
        let array = default_array();
        let levels = subsample_levels(&array, 10).unwrap();
        // Pick a range between two adjacent coarse levels so nothing is inside.
        let s = levels.sigmas();
        let gap = (s[7] + s[8]) / 2.0;
        let range = (gap * 0.999, gap * 1.001);
        assert!(!s[..9].iter().any(|&v| v >= range.0 && v <= range.1));
        let base = lognormal_schedule(&levels, -1.1, 2.0, 32, 3).unwrap();
        let after = inject_high_noise(base, &levels, 1.0, range, 4).unwrap();
        // Nearest level to the midpoint is index 7 or 8; all samples share it.
        let first = after.level_index[0];
        assert!(after.level_index.iter().all(|&i| i == first));
        after.check_invariants(&levels).unwrap();
    }

    #[test]
    fn injection_empty_batch_is_noop() {
        let array = default_array();
        let levels = subsample_levels(&array, 10).unwrap();
        let empty = MiniBatchSigmas {
            level_index: vec![],
            sigma_lo: vec![],
            sigma_hi: vec![],
            seed: 0,
        };
        let after = inject_high_noise(empty.clone(), &levels, 0.5, (40.0, 80.0), 0).unwrap();
        assert_eq!(empty, after);
    }

    #[test]
    fn closure_all_emitted_sigmas_are_array_elements() {
        let array = default_array();
        for n_k in [2, 7, 50, 125, 250] {
            let levels = subsample_levels(&array, n_k).unwrap();
            let poly = polynomial_schedule(
                &levels,
                &PolyScheduleParams {
                    curve: 4.0,
                    jitter_std: 1.0,
                    batch_size: 64,
                },
                n_k as u64,
            )
            .unwrap();
            let logn = lognormal_schedule(&levels, -1.1, 2.0, 64, n_k as u64).unwrap();
            let inj = inject_high_noise(poly.clone(), &levels, 0.25, (40.0, 80.0), 7).unwrap();
            for batch in [&poly, &logn, &inj] {
                for j in 0..batch.len() {
                    assert!(array.contains_bits(batch.sigma_lo[j]));
                    assert!(array.contains_bits(batch.sigma_hi[j]));
                }
            }
        }
    }

    #[test]
    fn curve_monotonicity_mean_sigma_non_increasing() {
        let array = default_array();
        let levels = subsample_levels(&array, 250).unwrap();
        let mut prev = f64::INFINITY;
        for c in [1.0, 2.0, 3.0, 4.0, 5.0] {
            let batch = polynomial_schedule(
                &levels,
                &PolyScheduleParams {
                    curve: c,
                    jitter_std: 0.0,
                    batch_size: 1024,
                },
                0,
            )
            .unwrap();
            let mean = batch.sigma_lo.iter().sum::<f64>() / batch.len() as f64;
            assert!(
                mean < prev,
                "mean sigma must strictly decrease in c (c = {c}: {mean} vs {prev})"
            );
            prev = mean;
        }
    }
}
