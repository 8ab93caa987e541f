//! Pad a log-normal batch with explicit high-noise levels, sweeping the
//! injected fraction of the mini-batch.
//!
//! Run with: cargo run --example high_noise_injection

use cm_sched::schedule::{
    inject_high_noise, karras_sigmas, lognormal_schedule, subsample_levels, KarrasParams,
};

fn main() -> cm_sched::Result<()> {
    let array = karras_sigmas(&KarrasParams::default())?;
    let levels = subsample_levels(&array, 100)?;
    let batch_size = 1024;

    println!("ratio | injected | sigma in [40,80] share");
    for pct in [0usize, 2, 3, 4, 5, 12] {
        let ratio = pct as f64 / 100.0;
        let base = lognormal_schedule(&levels, -1.1, 2.0, batch_size, 0)?;
        let before = in_range_share(&base.sigma_lo);
        let after = inject_high_noise(base, &levels, ratio, (40.0, 80.0), 1)?;
        let share = in_range_share(&after.sigma_lo);
        println!(
            "{pct:>4}% | {:>8} | {before:.4} -> {share:.4}",
            (ratio * batch_size as f64).floor() as usize
        );
    }
    println!();
    println!("every injected sigma is an existing discretization level, so");
    println!("the unique-level bound of the predefined array still holds.");
    Ok(())
}

fn in_range_share(sigmas: &[f64]) -> f64 {
    sigmas.iter().filter(|&&s| (40.0..=80.0).contains(&s)).count() as f64 / sigmas.len() as f64
}
