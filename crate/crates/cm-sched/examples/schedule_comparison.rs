//! Side-by-side composition of the polynomial scheduler and the
//! log-normal baseline, with pie SVGs per config.
//!
//! Run with: cargo run --example schedule_comparison
//! Writes out/pie_<id>.svg per config.

use cm_sched::analysis::{compare_schedules, BucketSpec};
use cm_sched::schedule::{karras_sigmas, KarrasParams, ScheduleSpec};
use cm_sched::svg;

fn main() -> cm_sched::Result<()> {
    let array = karras_sigmas(&KarrasParams::default())?;
    let buckets = BucketSpec::default();
    let configs = vec![
        (
            "lognormal".to_string(),
            ScheduleSpec::LogNormal {
                mean_log: -1.1,
                std_log: 2.0,
            },
        ),
        (
            "poly_c4".to_string(),
            ScheduleSpec::Polynomial {
                curve: 4.0,
                jitter_std: 1.0,
            },
        ),
    ];
    let rows = compare_schedules(&array, 250, &configs, 100_000, 0, &buckets)?;

    std::fs::create_dir_all("out")?;
    for row in &rows {
        println!(
            "{:>9}: mean sigma {:.3}, median {:.3}, [60,80] share {:.4}, <=10 share {:.4}",
            row.id,
            row.mean_sigma,
            row.median_sigma,
            row.report.bucket_shares.last().unwrap(),
            row.report.below_min_share,
        );
        let mut slices = vec![(
            format!("sigma <= {}", buckets.edges[0]),
            row.report.below_min_share,
        )];
        for (i, share) in row.report.bucket_shares.iter().enumerate() {
            slices.push((
                format!("{} < sigma <= {}", buckets.edges[i], buckets.edges[i + 1]),
                *share,
            ));
        }
        let path = format!("out/pie_{}.svg", row.id);
        std::fs::write(&path, svg::pie_chart(&slices, &row.id))?;
        println!("           wrote {path}");
    }
    println!();
    println!("the polynomial schedule keeps low noise dominant while holding a");
    println!("visibly larger top-bucket share than the log-normal baseline.");
    Ok(())
}
