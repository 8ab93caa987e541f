//! Discretization-count curricula: the map `k -> N(k)` over training steps.
//!
//! Three kinds:
//! - `sinusoidal` — rises smoothly from `s0` to `s1_cap` and falls back,
//!   stepped in plateaus (the sine argument is quantized to tenths, so
//!   `N(k)` never creeps by one level per step).
//! - `doubling` — the step-wise `s0 * 2^m` baseline, capped at `s1_cap`.
//! - `constant` — `N(k) = s0` for every step.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{subsample_levels, NoiseArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurriculumKind {
    Sinusoidal,
    Doubling,
    Constant,
}

impl std::fmt::Display for CurriculumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CurriculumKind::Sinusoidal => "sinusoidal",
            CurriculumKind::Doubling => "doubling",
            CurriculumKind::Constant => "constant",
        };
        f.write_str(name)
    }
}

/// Curriculum shape without a step count, for configs that carry the
/// total step budget elsewhere (training runs own `K`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSpec {
    pub kind: CurriculumKind,
    pub s0: usize,
    pub s1_cap: usize,
    pub rho: f64,
}

impl CurriculumSpec {
    pub fn with_total_steps(&self, total_steps: usize) -> CurriculumConfig {
        CurriculumConfig {
            s0: self.s0,
            s1_cap: self.s1_cap,
            total_steps,
            rho: self.rho,
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    /// Initial (and, for the sinusoidal kind, approximate final) count.
    pub s0: usize,
    /// Maximum discretization count the curriculum may reach.
    pub s1_cap: usize,
    /// Total training steps `K`; the trace covers `k in 0..=K`.
    pub total_steps: usize,
    /// Warp exponent shared with the Karras grid.
    pub rho: f64,
    pub kind: CurriculumKind,
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s0 < 2 {
            return Err(Error::config("s0", "must be >= 2"));
        }
        if self.s1_cap <= self.s0 {
            return Err(Error::config("s1_cap", "must exceed s0"));
        }
        if self.total_steps < 1 {
            return Err(Error::config("total_steps", "must be >= 1"));
        }
        if !(self.rho >= 1.0 && self.rho.is_finite()) {
            return Err(Error::config("rho", "must be >= 1"));
        }
        Ok(())
    }

    /// Curricula select levels from a predefined array, so the cap can
    /// never exceed the array resolution.
    pub fn validate_against(&self, array: &NoiseArray) -> Result<()> {
        self.validate()?;
        if self.s1_cap > array.s1() {
            return Err(Error::config(
                "s1_cap",
                format!("must not exceed the noise array s1 = {}", array.s1()),
            ));
        }
        Ok(())
    }
}

/// `N(k)` for the sinusoidal curriculum:
/// `x = (k/K)^(rho/4) * pi`, quantized to tenths `q = floor(10 x) / 10`,
/// then `ceil(|(s1_cap - s0) * sin(q) + s0|)`.
///
/// The tenth-quantization is what produces the plateau steps: within one
/// `q` value the count is constant, so the model never sees marginal
/// one-level shifts of the discretization.
pub fn sinusoidal_n(k: usize, cfg: &CurriculumConfig) -> Result<usize> {
    cfg.validate()?;
    if k > cfg.total_steps {
        return Err(Error::Domain(format!(
            "step k = {k} outside [0, {}]",
            cfg.total_steps
        )));
    }
    let x = (k as f64 / cfg.total_steps as f64).powf(cfg.rho / 4.0) * std::f64::consts::PI;
    let q = (x * 10.0).floor() / 10.0;
    let span = (cfg.s1_cap - cfg.s0) as f64;
    Ok(((span * q.sin() + cfg.s0 as f64).abs()).ceil() as usize)
}

/// `N(k)` for the doubling baseline: `[0, K]` is cut into
/// `floor(log2(s1_cap / s0)) + 1` equal spans (final span absorbs the
/// remainder) and span `m` holds `min(s0 * 2^m, s1_cap)`.
pub fn doubling_n(k: usize, cfg: &CurriculumConfig) -> Result<usize> {
    cfg.validate()?;
    if k > cfg.total_steps {
        return Err(Error::Domain(format!(
            "step k = {k} outside [0, {}]",
            cfg.total_steps
        )));
    }
    let num_spans = (cfg.s1_cap as f64 / cfg.s0 as f64).log2().floor() as u32 + 1;
    let span_len = ((cfg.total_steps + 1) / num_spans as usize).max(1);
    let span = (k / span_len).min(num_spans as usize - 1) as u32;
    Ok((cfg.s0 << span).min(cfg.s1_cap))
}

/// The realized `k -> N(k)` sequence for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurriculumTrace {
    pub n_of_k: Vec<usize>,
    /// First step attaining the maximum count.
    pub peak_step: usize,
    pub kind: CurriculumKind,
}

impl CurriculumTrace {
    pub fn max_n(&self) -> usize {
        *self.n_of_k.iter().max().expect("trace is never empty")
    }
}

/// Materialize the full curriculum over `k in 0..=K`.
pub fn trace(cfg: &CurriculumConfig) -> Result<CurriculumTrace> {
    cfg.validate()?;
    let n_of_k: Vec<usize> = (0..=cfg.total_steps)
        .map(|k| match cfg.kind {
            CurriculumKind::Sinusoidal => sinusoidal_n(k, cfg),
            CurriculumKind::Doubling => doubling_n(k, cfg),
            CurriculumKind::Constant => Ok(cfg.s0),
        })
        .collect::<Result<_>>()?;
    let max = *n_of_k.iter().max().expect("non-empty");
    let peak_step = n_of_k.iter().position(|&n| n == max).expect("non-empty");
    Ok(CurriculumTrace {
        n_of_k,
        peak_step,
        kind: cfg.kind,
    })
}

/// Levels dropped by the decreasing phase at step `k`: array indices that
/// the peak discretization selects but the current one no longer does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminatedLevels {
    pub indices: BTreeSet<usize>,
    /// False when `k` has not passed the peak yet (the set is then empty
    /// by definition, not by elimination).
    pub past_peak: bool,
}

pub fn eliminated_levels(
    trace: &CurriculumTrace,
    array: &NoiseArray,
    k: usize,
) -> Result<EliminatedLevels> {
    if k >= trace.n_of_k.len() {
        return Err(Error::Domain(format!(
            "step k = {k} outside [0, {}]",
            trace.n_of_k.len() - 1
        )));
    }
    if k < trace.peak_step {
        return Ok(EliminatedLevels {
            indices: BTreeSet::new(),
            past_peak: false,
        });
    }
    let peak_grid: BTreeSet<usize> = subsample_levels(array, trace.max_n())?
        .indices()
        .iter()
        .copied()
        .collect();
    let current_grid: BTreeSet<usize> = subsample_levels(array, trace.n_of_k[k])?
        .indices()
        .iter()
        .copied()
        .collect();
    Ok(EliminatedLevels {
        indices: peak_grid.difference(&current_grid).copied().collect(),
        past_peak: true,
    })
}
