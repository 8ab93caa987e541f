//! The sinusoidal discretization curriculum: plateau-stepped rise from s0
//! to the cap and a decreasing phase that eliminates learned levels.
//!
//! Run with: cargo run --example sinusoidal_curriculum
//! Writes out/sinusoidal_trace.svg for visual inspection.

use cm_sched::curriculum::{eliminated_levels, trace, CurriculumConfig, CurriculumKind};
use cm_sched::schedule::{karras_sigmas, KarrasParams};
use cm_sched::svg;

fn main() -> cm_sched::Result<()> {
    let cfg = CurriculumConfig {
        s0: 20,
        s1_cap: 250,
        total_steps: 100_000,
        rho: 7.0,
        kind: CurriculumKind::Sinusoidal,
    };
    let tr = trace(&cfg)?;

    println!("N(0) = {}", tr.n_of_k[0]);
    println!("max N = {} first reached at k = {}", tr.max_n(), tr.peak_step);
    println!("N(K) = {}", tr.n_of_k[cfg.total_steps]);
    let distinct: std::collections::BTreeSet<_> = tr.n_of_k.iter().collect();
    println!("distinct plateaus: {}", distinct.len());

    // The decreasing phase drops levels relative to the peak grid.
    let array = karras_sigmas(&KarrasParams::default())?;
    for k in [tr.peak_step, 80_000, 95_000, 100_000] {
        let dropped = eliminated_levels(&tr, &array, k)?;
        println!(
            "k = {k:>6}: N = {:>3}, eliminated levels so far: {}",
            tr.n_of_k[k],
            dropped.indices.len()
        );
    }

    let series: Vec<(f64, f64)> = tr
        .n_of_k
        .iter()
        .enumerate()
        .step_by(100)
        .map(|(k, &n)| (k as f64, n as f64))
        .collect();
    std::fs::create_dir_all("out")?;
    std::fs::write(
        "out/sinusoidal_trace.svg",
        svg::line_plot(&series, "sinusoidal curriculum (s0=20, s1=250)", "k", "N(k)"),
    )?;
    println!("wrote out/sinusoidal_trace.svg");
    Ok(())
}
