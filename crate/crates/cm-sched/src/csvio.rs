//! Fixed-schema CSV emission and parsing.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value parses back to the exact bits that were written and reruns of
//! the same config produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{BucketSpec, DistributionReport, ScheduleComparison};
use crate::curriculum::CurriculumTrace;
use crate::error::{Error, Result};
use crate::schedule::MiniBatchSigmas;

/// `step,k,batch_pos,level_index,sigma_lo,sigma_hi` for a sequence of
/// `(step, k, batch)` rows.
pub fn schedule_dump(batches: &[(usize, usize, &MiniBatchSigmas)]) -> String {
    let mut out = String::from("step,k,batch_pos,level_index,sigma_lo,sigma_hi\n");
    for (step, k, batch) in batches {
        for j in 0..batch.len() {
            let _ = writeln!(
                out,
                "{step},{k},{j},{},{},{}",
                batch.level_index[j], batch.sigma_lo[j], batch.sigma_hi[j]
            );
        }
    }
    out
}

/// `k,n_k,kind` over the whole trace.
pub fn curriculum_trace(trace: &CurriculumTrace) -> String {
    let mut out = String::from("k,n_k,kind\n");
    for (k, n) in trace.n_of_k.iter().enumerate() {
        let _ = writeln!(out, "{k},{n},{}", trace.kind);
    }
    out
}

/// `config_id,bucket_lo,bucket_hi,share`; the mass at or below the first
/// edge is reported as the bucket `0 .. edges[0]`.
pub fn distribution_report(config_id: &str, report: &DistributionReport, spec: &BucketSpec) -> String {
    let mut out = String::from("config_id,bucket_lo,bucket_hi,share\n");
    append_report_rows(&mut out, config_id, report, spec);
    out
}

/// Same schema as [`distribution_report`], one block per compared config.
pub fn comparison_report(rows: &[ScheduleComparison], spec: &BucketSpec) -> String {
    let mut out = String::from("config_id,bucket_lo,bucket_hi,share\n");
    for row in rows {
        append_report_rows(&mut out, &row.id, &row.report, spec);
    }
    out
}

/// `config_id,mean_sigma,median_sigma,distinct_sigmas` per compared config.
pub fn comparison_stats(rows: &[ScheduleComparison]) -> String {
    let mut out = String::from("config_id,mean_sigma,median_sigma,distinct_sigmas\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.id, row.mean_sigma, row.median_sigma, row.report.distinct_sigma_count
        );
    }
    out
}

fn append_report_rows(out: &mut String, id: &str, report: &DistributionReport, spec: &BucketSpec) {
    let _ = writeln!(out, "{id},0,{},{}", spec.edges[0], report.below_min_share);
    for (i, share) in report.bucket_shares.iter().enumerate() {
        let _ = writeln!(out, "{id},{},{},{share}", spec.edges[i], spec.edges[i + 1]);
    }
}

/// `step,k,n_k,loss` per training step.
pub fn train_metrics(loss: &[f64], n_k: &[usize]) -> String {
    let mut out = String::from("step,k,n_k,loss\n");
    for (k, (l, n)) in loss.iter().zip(n_k).enumerate() {
        let _ = writeln!(out, "{k},{k},{n},{l}");
    }
    out
}

/// `x,y` point rows.
pub fn points_2d(points: &[f64]) -> String {
    let mut out = String::from("x,y\n");
    for p in points.chunks_exact(2) {
        let _ = writeln!(out, "{},{}", p[0], p[1]);
    }
    out
}

/// Parse a `x,y` CSV produced by [`points_2d`].
pub fn read_points_2d(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "x,y" {
                return Err(Error::Schedule(format!(
                    "{}: expected header `x,y`, found `{line}`",
                    path.display()
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (x, y) = (fields.next(), fields.next());
        match (x, y) {
            (Some(x), Some(y)) => {
                out.push(parse_f64(x, path, lineno)?);
                out.push(parse_f64(y, path, lineno)?);
            }
            _ => {
                return Err(Error::Schedule(format!(
                    "{}:{}: malformed point row `{line}`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Parse a `step,k,n_k,loss` CSV produced by [`train_metrics`].
pub fn read_train_metrics(path: &Path) -> Result<(Vec<f64>, Vec<usize>)> {
    let text = fs::read_to_string(path)?;
    let mut loss = Vec::new();
    let mut n_k = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Schedule(format!(
                "{}:{}: malformed metrics row `{line}`",
                path.display(),
                lineno + 1
            )));
        }
        n_k.push(fields[2].parse::<usize>().map_err(|e| {
            Error::Schedule(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?);
        loss.push(parse_f64(fields[3], path, lineno)?);
    }
    Ok((loss, n_k))
}

fn parse_f64(field: &str, path: &Path, lineno: usize) -> Result<f64> {
    field.parse::<f64>().map_err(|e| {
        Error::Schedule(format!("{}:{}: {e}", path.display(), lineno + 1))
    })
}
