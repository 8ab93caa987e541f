//! The doubling curriculum baseline: N(k) jumps by powers of two up to
//! the cap, one value per span of steps.
//!
//! Run with: cargo run --example doubling_curriculum
//! Writes out/doubling_trace.svg.

use cm_sched::curriculum::{trace, CurriculumConfig, CurriculumKind};
use cm_sched::svg;

fn main() -> cm_sched::Result<()> {
    let cfg = CurriculumConfig {
        s0: 20,
        s1_cap: 1280,
        total_steps: 100_000,
        rho: 7.0,
        kind: CurriculumKind::Doubling,
    };
    let tr = trace(&cfg)?;

    let mut prev = 0;
    println!("transitions:");
    for (k, &n) in tr.n_of_k.iter().enumerate() {
        if n != prev {
            println!("  k = {k:>6}: N = {n}");
            prev = n;
        }
    }
    println!(
        "each jump doubles the count; the model must absorb {}x more levels at once",
        2
    );

    let series: Vec<(f64, f64)> = tr
        .n_of_k
        .iter()
        .enumerate()
        .step_by(100)
        .map(|(k, &n)| (k as f64, n as f64))
        .collect();
    std::fs::create_dir_all("out")?;
    std::fs::write(
        "out/doubling_trace.svg",
        svg::line_plot(&series, "doubling curriculum (s0=20, s1=1280)", "k", "N(k)"),
    )?;
    println!("wrote out/doubling_trace.svg");
    Ok(())
}
