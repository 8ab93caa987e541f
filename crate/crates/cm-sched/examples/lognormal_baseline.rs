//! The log-normal baseline scheduler: heavy low-noise weight, thin
//! high-noise tail.
//!
//! Run with: cargo run --example lognormal_baseline

use cm_sched::analysis::{bucket_ratios, BucketSpec};
use cm_sched::schedule::{karras_sigmas, lognormal_schedule, subsample_levels, KarrasParams};

fn main() -> cm_sched::Result<()> {
    let array = karras_sigmas(&KarrasParams::default())?;
    let levels = subsample_levels(&array, 100)?;

    let batch = lognormal_schedule(&levels, -1.1, 2.0, 100_000, 0)?;
    let report = bucket_ratios(&batch.sigma_lo, &BucketSpec::default())?;

    println!("log-normal (mean_log = -1.1, std_log = 2.0), n_k = 100:");
    println!("  sigma <= 10 share: {:.4}", report.below_min_share);
    for (i, share) in report.bucket_shares.iter().enumerate() {
        let edges = &BucketSpec::default().edges;
        println!("  {:>2} < sigma <= {:>2}: {:.4}", edges[i], edges[i + 1], share);
    }
    let high = batch.sigma_lo.iter().filter(|&&s| s > 40.0).count() as f64 / batch.len() as f64;
    println!("  sigma > 40 share: {high:.4} (the thin tail the injection experiment pads)");
    println!("  distinct levels used: {}", report.distinct_sigma_count);
    Ok(())
}
