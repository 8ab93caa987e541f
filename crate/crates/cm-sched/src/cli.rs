//! The `cm-sched` command line: one subcommand per capability, JSON
//! configs in, CSV/SVG artifacts plus a manifest out.
//!
//! Exit codes: 0 success, 1 validation error (the message names the
//! offending field), 2 runtime failure (non-finite loss, audit failure,
//! I/O trouble).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{bucket_ratios, compare_schedules};
use crate::config::{
    apply_override, load_value, resolve, AnalyzeConfig, EvalConfig, RunManifest, SampleConfig,
    ScheduleRunConfig,
};
use crate::csvio;
use crate::curriculum::{trace, CurriculumConfig};
use crate::error::Result;
use crate::schedule::{karras_sigmas, subsample_levels, MiniBatchSigmas};
use crate::svg;
use crate::toy::{
    load_checkpoint, reference_points, sample, save_checkpoint, train, ConsistencyParam,
    TrainConfig, DATA_DIM, SWD_PROJECTION_SEED,
};

#[derive(Parser, Debug)]
#[command(
    name = "cm-sched",
    version,
    about = "Noise scheduling and curriculum toolkit for consistency-model training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit mini-batch noise assignments and their distribution report
    Schedule(CommonArgs),
    /// Materialize a curriculum trace as CSV and an SVG line plot
    Curriculum(CommonArgs),
    /// Compare schedule configs: composition CSV plus one pie per config
    Analyze(CommonArgs),
    /// Train the toy consistency model and write metrics plus a checkpoint
    Train(CommonArgs),
    /// Draw points from a trained checkpoint
    Sample(CommonArgs),
    /// Score a samples CSV against the reference distribution
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent)
    #[arg(long, default_value = "./out")]
    output: PathBuf,
    /// Seed for the run (train configs may carry their own)
    #[arg(long)]
    seed: Option<u64>,
    /// Dot-path config override, e.g. --set schedule.curve=3 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Second samples CSV to score side by side
    #[arg(long)]
    compare: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Schedule(args) => run_schedule(&args),
        Command::Curriculum(args) => run_curriculum(&args),
        Command::Analyze(args) => run_analyze(&args),
        Command::Train(args) => run_train(&args),
        Command::Sample(args) => run_sample(&args),
        Command::Eval(args) => run_eval(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Load the config, apply `--set` overrides, and create the output dir.
fn prepare(args: &CommonArgs) -> Result<(Value, u64)> {
    let mut value = load_value(&args.config)?;
    for assignment in &args.set {
        apply_override(&mut value, assignment)?;
    }
    fs::create_dir_all(&args.output)?;
    Ok((value, args.seed.unwrap_or(0)))
}

fn run_schedule(args: &CommonArgs) -> Result<()> {
    let (value, seed) = prepare(args)?;
    let cfg: ScheduleRunConfig = resolve(&value)?;
    let array = karras_sigmas(&cfg.karras)?;
    let levels = subsample_levels(&array, cfg.n_k)?;

    let mut batches: Vec<MiniBatchSigmas> = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let mut batch = cfg
            .schedule
            .generate(&levels, cfg.batch_size, seed.wrapping_add(step as u64))?;
        if let Some(inj) = &cfg.injection {
            batch = inj.apply(batch, &levels, seed.wrapping_add(0x1000 + step as u64))?;
        }
        batches.push(batch);
    }

    let rows: Vec<(usize, usize, &MiniBatchSigmas)> = batches
        .iter()
        .enumerate()
        .map(|(step, b)| (step, step, b))
        .collect();
    let all_sigmas: Vec<f64> = batches.iter().flat_map(|b| b.sigma_lo.iter().copied()).collect();
    let report = bucket_ratios(&all_sigmas, &cfg.buckets)?;

    let mut manifest = RunManifest::new("schedule", seed, value);
    manifest.write_artifact(&args.output, "schedule.csv", csvio::schedule_dump(&rows).as_bytes())?;
    manifest.write_artifact(
        &args.output,
        "distribution.csv",
        csvio::distribution_report("schedule", &report, &cfg.buckets).as_bytes(),
    )?;
    let pie = svg::pie_chart(&pie_slices(&report, &cfg.buckets), "noise distribution");
    manifest.write_artifact(&args.output, "distribution.svg", pie.as_bytes())?;
    manifest.save(&args.output)?;
    println!(
        "schedule: {} batches of {} written to {}",
        cfg.steps,
        cfg.batch_size,
        args.output.display()
    );
    Ok(())
}

fn run_curriculum(args: &CommonArgs) -> Result<()> {
    let (value, seed) = prepare(args)?;
    let cfg: CurriculumConfig = resolve(&value)?;
    let tr = trace(&cfg)?;

    let series: Vec<(f64, f64)> = tr
        .n_of_k
        .iter()
        .enumerate()
        .map(|(k, &n)| (k as f64, n as f64))
        .collect();
    let plot = svg::line_plot(
        &series,
        &format!("{} curriculum (s0={}, s1={})", cfg.kind, cfg.s0, cfg.s1_cap),
        "training step k",
        "N(k)",
    );

    let mut manifest = RunManifest::new("curriculum", seed, value);
    manifest.write_artifact(&args.output, "trace.csv", csvio::curriculum_trace(&tr).as_bytes())?;
    manifest.write_artifact(&args.output, "trace.svg", plot.as_bytes())?;
    manifest.save(&args.output)?;
    println!(
        "curriculum: {} steps, peak N = {} at k = {}",
        cfg.total_steps,
        tr.max_n(),
        tr.peak_step
    );
    Ok(())
}

fn run_analyze(args: &CommonArgs) -> Result<()> {
    let (value, seed) = prepare(args)?;
    let cfg: AnalyzeConfig = resolve(&value)?;
    let array = karras_sigmas(&cfg.karras)?;
    let named: Vec<(String, crate::schedule::ScheduleSpec)> = cfg
        .configs
        .iter()
        .map(|c| (c.id.clone(), c.schedule.clone()))
        .collect();
    let rows = compare_schedules(
        &array,
        cfg.n_k,
        &named,
        cfg.samples_per_config,
        seed,
        &cfg.buckets,
    )?;

    let mut manifest = RunManifest::new("analyze", seed, value);
    manifest.write_artifact(
        &args.output,
        "comparison.csv",
        csvio::comparison_report(&rows, &cfg.buckets).as_bytes(),
    )?;
    manifest.write_artifact(
        &args.output,
        "stats.csv",
        csvio::comparison_stats(&rows).as_bytes(),
    )?;
    for row in &rows {
        let pie = svg::pie_chart(&pie_slices(&row.report, &cfg.buckets), &row.id);
        manifest.write_artifact(&args.output, &format!("pie_{}.svg", row.id), pie.as_bytes())?;
    }
    manifest.save(&args.output)?;
    for row in &rows {
        println!(
            "{}: mean sigma {:.4}, median {:.4}, top-bucket share {:.4}",
            row.id,
            row.mean_sigma,
            row.median_sigma,
            row.report.bucket_shares.last().unwrap_or(&0.0)
        );
    }
    Ok(())
}

fn run_train(args: &CommonArgs) -> Result<()> {
    let (value, cli_seed) = prepare(args)?;
    let mut cfg: TrainConfig = resolve(&value)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let _ = cli_seed;
    // Re-serialize so the manifest records the exact resolved config.
    let resolved = serde_json::to_value(&cfg)?;
    let hash = crate::config::config_hash(&resolved);

    let (model, metrics) = train(&cfg)?;
    let array = karras_sigmas(&cfg.karras)?;
    let cp = ConsistencyParam {
        sigma_data: cfg.sigma_data,
        sigma_min: array.sigmas()[0],
    };
    let points = sample(
        &model,
        &cp,
        cfg.eval_samples,
        1,
        &array,
        crate::toy::EVAL_SAMPLE_SEED,
    )?;

    let mut manifest = RunManifest::new("train", cfg.seed, resolved.clone());
    manifest.write_artifact(
        &args.output,
        "metrics.csv",
        csvio::train_metrics(&metrics.loss, &metrics.n_k).as_bytes(),
    )?;
    manifest.write_artifact(&args.output, "samples.csv", csvio::points_2d(&points).as_bytes())?;
    save_checkpoint(&model, &cp, &cfg.karras, &hash, &args.output.join("checkpoint"))?;
    for name in ["checkpoint.json", "checkpoint.bin"] {
        let bytes = fs::read(args.output.join(name))?;
        manifest
            .artifacts
            .insert(name.to_string(), crate::config::sha256_hex(&bytes));
    }
    let summary = json!({
        "final_swd": metrics.final_swd,
        "wallclock_secs": metrics.wallclock_secs,
        "steps": metrics.loss.len(),
        "config_hash": hash,
    });
    manifest.write_artifact(
        &args.output,
        "summary.json",
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    manifest.save(&args.output)?;
    println!(
        "train: {} steps, final SWD {:.6}, wallclock {:.1}s",
        metrics.loss.len(),
        metrics.final_swd,
        metrics.wallclock_secs
    );
    Ok(())
}

fn run_sample(args: &CommonArgs) -> Result<()> {
    let (value, seed) = prepare(args)?;
    let cfg: SampleConfig = resolve(&value)?;
    let stem = checkpoint_stem(&cfg.checkpoint);
    let (model, cp, header) = load_checkpoint(&stem)?;
    let array = karras_sigmas(&header.karras)?;
    let points = sample(&model, &cp, cfg.count, cfg.steps, &array, seed)?;

    let mut manifest = RunManifest::new("sample", seed, value);
    manifest.write_artifact(&args.output, "samples.csv", csvio::points_2d(&points).as_bytes())?;
    manifest.save(&args.output)?;
    println!(
        "sample: {} points in {} step(s) from {}",
        cfg.count,
        cfg.steps,
        stem.display()
    );
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let (value, seed) = prepare(&args.common)?;
    let cfg: EvalConfig = resolve(&value)?;
    let reference = reference_points(cfg.dataset, cfg.reference_samples);

    let mut scored: Vec<(String, f64)> = Vec::new();
    let mut inputs = vec![cfg.samples.clone()];
    if let Some(other) = &args.compare {
        inputs.push(other.clone());
    }
    for path in &inputs {
        let points = csvio::read_points_2d(path)?;
        let swd = crate::toy::evaluate_swd(
            &points,
            &reference,
            DATA_DIM,
            cfg.projections,
            SWD_PROJECTION_SEED,
        )?;
        scored.push((file_id(path), swd));
    }

    let mut csv = String::from("id,swd\n");
    for (id, swd) in &scored {
        csv.push_str(&format!("{id},{swd}\n"));
    }
    let mut manifest = RunManifest::new("eval", seed, value);
    manifest.write_artifact(&args.common.output, "eval.csv", csv.as_bytes())?;
    manifest.save(&args.common.output)?;
    for (id, swd) in &scored {
        println!("eval: {id} SWD = {swd:.6}");
    }
    if scored.len() == 2 {
        let (a, b) = (&scored[0], &scored[1]);
        let better = if a.1 <= b.1 { &a.0 } else { &b.0 };
        println!("eval: closer to reference: {better}");
    }
    Ok(())
}

fn pie_slices(
    report: &crate::analysis::DistributionReport,
    buckets: &crate::analysis::BucketSpec,
) -> Vec<(String, f64)> {
    let mut slices = vec![(format!("sigma <= {}", buckets.edges[0]), report.below_min_share)];
    for (i, share) in report.bucket_shares.iter().enumerate() {
        slices.push((
            format!("{} < sigma <= {}", buckets.edges[i], buckets.edges[i + 1]),
            *share,
        ));
    }
    slices
}

fn checkpoint_stem(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn file_id(path: &Path) -> String {
    // Disambiguate by parent dir: run outputs are all named samples.csv.
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("samples");
    match path.parent().and_then(|p| p.file_name()).and_then(|s| s.to_str()) {
        Some(parent) if !parent.is_empty() => format!("{parent}/{stem}"),
        _ => stem.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(run(["cm-sched", "frobnicate"]), 1);
    }

    #[test]
    fn unknown_flag_exits_one() {
        assert_eq!(run(["cm-sched", "schedule", "--bogus"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["cm-sched", "--help"]), 0);
    }

    #[test]
    fn missing_config_file_exits_one() {
        let code = run([
            "cm-sched",
            "schedule",
            "--config",
            "/nonexistent/nope.json",
        ]);
        assert_eq!(code, 1);
    }

    #[test]
    fn checkpoint_stem_strips_known_extensions() {
        assert_eq!(
            checkpoint_stem(Path::new("out/checkpoint.json")),
            PathBuf::from("out/checkpoint")
        );
        assert_eq!(
            checkpoint_stem(Path::new("out/checkpoint")),
            PathBuf::from("out/checkpoint")
        );
    }
}
