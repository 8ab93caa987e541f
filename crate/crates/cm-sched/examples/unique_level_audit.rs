//! Why the array is generated once: count distinct sigmas consumed over a
//! full sinusoidal-curriculum run, predefined-array mode vs regenerating
//! a fresh Karras grid at every discretization change.
//!
//! Run with: cargo run --release --example unique_level_audit

use cm_sched::analysis::{regenerated_unique_count, unique_level_audit};
use cm_sched::curriculum::{trace, CurriculumConfig, CurriculumKind};
use cm_sched::schedule::{
    karras_sigmas, polynomial_schedule, subsample_levels, KarrasParams, PolyScheduleParams,
};

fn main() -> cm_sched::Result<()> {
    let params = KarrasParams::default();
    let array = karras_sigmas(&params)?;
    let cfg = CurriculumConfig {
        s0: 20,
        s1_cap: 250,
        total_steps: 10_000,
        rho: 7.0,
        kind: CurriculumKind::Sinusoidal,
    };
    let tr = trace(&cfg)?;

    let mut batches = Vec::with_capacity(cfg.total_steps);
    for k in 0..cfg.total_steps {
        let levels = subsample_levels(&array, tr.n_of_k[k])?;
        batches.push(polynomial_schedule(
            &levels,
            &PolyScheduleParams {
                curve: 4.0,
                jitter_std: 1.0,
                batch_size: 256,
            },
            k as u64,
        )?);
    }
    let used = unique_level_audit(&batches, &array)?;
    println!(
        "predefined-array mode: {used} distinct sigmas over {} steps (bound: {})",
        cfg.total_steps,
        array.len()
    );

    let regenerated = regenerated_unique_count(&params, &tr.n_of_k)?;
    println!(
        "regeneration baseline: {regenerated} distinct sigmas from the same trace"
    );
    println!(
        "regeneration floods the model with {}x more unique noise levels",
        regenerated / used.max(1)
    );
    Ok(())
}
