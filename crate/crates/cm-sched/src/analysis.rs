//! Noise-distribution composition reports and schedule audits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{
    karras_sigmas, subsample_levels, KarrasParams, MiniBatchSigmas, NoiseArray, ScheduleSpec,
};

/// Bucket edges for composition reports. The default matches the four
/// pie-chart sections [10,20], [20,40], [40,60], [60,80], with everything
/// at or below the first edge reported separately as the low-noise mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSpec {
    pub edges: Vec<f64>,
}

impl Default for BucketSpec {
    fn default() -> Self {
        BucketSpec {
            edges: vec![10.0, 20.0, 40.0, 60.0, 80.0],
        }
    }
}

impl BucketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.edges.len() < 2 {
            return Err(Error::config("edges", "need at least two bucket edges"));
        }
        if !self.edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("edges", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn bucket_count(&self) -> usize {
        self.edges.len() - 1
    }
}

/// Composition of a sigma sample: one share per bucket plus the share at
/// or below the first edge. Shares always sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub bucket_shares: Vec<f64>,
    pub below_min_share: f64,
    pub total_samples: usize,
    pub distinct_sigma_count: usize,
}

/// Bucket a sigma sample. A value exactly on an edge counts toward the
/// lower bucket; values above the last edge are folded into the top
/// bucket (closure against a Karras array makes that case unreachable in
/// normal use).
pub fn bucket_ratios(sigmas: &[f64], spec: &BucketSpec) -> Result<DistributionReport> {
    spec.validate()?;
    if sigmas.is_empty() {
        return Err(Error::Schedule("bucket_ratios needs a non-empty sample".into()));
    }
    let nb = spec.bucket_count();
    let mut counts = vec![0usize; nb];
    let mut below = 0usize;
    for &s in sigmas {
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("sigma sample contains {s}")));
        }
        if s <= spec.edges[0] {
            below += 1;
            continue;
        }
        let mut b = nb - 1;
        for i in 0..nb {
            if s <= spec.edges[i + 1] {
                b = i;
                break;
            }
        }
        counts[b] += 1;
    }
    let n = sigmas.len() as f64;
    let distinct: BTreeSet<u64> = sigmas.iter().map(|s| s.to_bits()).collect();
    Ok(DistributionReport {
        bucket_shares: counts.iter().map(|&c| c as f64 / n).collect(),
        below_min_share: below as f64 / n,
        total_samples: sigmas.len(),
        distinct_sigma_count: distinct.len(),
    })
}

/// Count the distinct sigma values consumed by a sequence of batches and
/// verify closure: every value must be an exact element of `array`.
pub fn unique_level_audit(batches: &[MiniBatchSigmas], array: &NoiseArray) -> Result<usize> {
    let member: BTreeSet<u64> = array.sigmas().iter().map(|s| s.to_bits()).collect();
    let mut used = BTreeSet::new();
    let mut foreign = Vec::new();
    for batch in batches {
        for &s in batch.sigma_lo.iter().chain(batch.sigma_hi.iter()) {
            let bits = s.to_bits();
            if !member.contains(&bits) {
                foreign.push(s);
            }
            used.insert(bits);
        }
    }
    if !foreign.is_empty() {
        foreign.sort_by(|a, b| a.partial_cmp(b).unwrap());
        foreign.dedup();
        return Err(Error::Audit {
            message: "sigma values not drawn from the predefined noise array".into(),
            offending: foreign,
        });
    }
    Ok(used.len())
}

/// Distinct sigma count for the regeneration baseline: a fresh Karras
/// grid of resolution `n_k` is generated for every discretization count
/// in `n_values`, the behaviour the predefined array exists to avoid.
/// Values from different grids almost never coincide, so the count grows
/// with every curriculum change.
pub fn regenerated_unique_count(params: &KarrasParams, n_values: &[usize]) -> Result<usize> {
    let mut used = BTreeSet::new();
    let distinct_n: BTreeSet<usize> = n_values.iter().copied().collect();
    for n in distinct_n {
        let fresh = karras_sigmas(&KarrasParams { s1: n.max(2), ..*params })?;
        for &s in fresh.sigmas() {
            used.insert(s.to_bits());
        }
    }
    Ok(used.len())
}

/// One row of a schedule comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleComparison {
    pub id: String,
    pub report: DistributionReport,
    pub mean_sigma: f64,
    pub median_sigma: f64,
}

/// Worker-thread cap: `CM_SCHED_THREADS` when set, else the machine's
/// available parallelism.
pub fn max_threads() -> usize {
    std::env::var("CM_SCHED_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Generate one batch of `samples_per_config` sigmas per config (all with
/// the same seed, so identical configs produce identical rows) and report
/// their composition. The reported values are the assigned `sigma_lo`
/// levels, the quantity the schedulers distribute.
///
/// Configs are independent, so they run on up to [`max_threads`] workers;
/// the result order and values do not depend on the thread count.
pub fn compare_schedules(
    array: &NoiseArray,
    n_k: usize,
    configs: &[(String, ScheduleSpec)],
    samples_per_config: usize,
    seed: u64,
    buckets: &BucketSpec,
) -> Result<Vec<ScheduleComparison>> {
    if configs.len() < 2 {
        return Err(Error::config("configs", "comparison needs at least two configs"));
    }
    if samples_per_config < 1 {
        return Err(Error::config("samples_per_config", "must be >= 1"));
    }
    let levels = subsample_levels(array, n_k)?;

    let run_one = |id: &str, spec: &ScheduleSpec| -> Result<ScheduleComparison> {
        let batch = spec.generate(&levels, samples_per_config, seed)?;
        let report = bucket_ratios(&batch.sigma_lo, buckets)?;
        let mean = batch.sigma_lo.iter().sum::<f64>() / batch.sigma_lo.len() as f64;
        let mut sorted = batch.sigma_lo.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        Ok(ScheduleComparison {
            id: id.to_string(),
            report,
            mean_sigma: mean,
            median_sigma: median,
        })
    };

    let workers = max_threads().min(configs.len());
    if workers <= 1 {
        return configs.iter().map(|(id, spec)| run_one(id, spec)).collect();
    }
    let chunk = configs.len().div_ceil(workers);
    let mut slots: Vec<Option<Result<ScheduleComparison>>> = Vec::new();
    slots.resize_with(configs.len(), || None);
    std::thread::scope(|scope| {
        for (cfg_chunk, out_chunk) in configs.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            scope.spawn(|| {
                for ((id, spec), slot) in cfg_chunk.iter().zip(out_chunk.iter_mut()) {
                    *slot = Some(run_one(id, spec));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every slot is filled by its worker"))
        .collect()
}
