//! Train the toy consistency model on the 8-Gaussian mixture with the
//! polynomial schedule and sinusoidal curriculum, then score it.
//!
//! Run with: cargo run --release --example train_toy
//! (a few minutes; lower total_steps for a quicker look)

use cm_sched::curriculum::{CurriculumKind, CurriculumSpec};
use cm_sched::schedule::{KarrasParams, ScheduleSpec};
use cm_sched::toy::{train, LossChoice, ToyDataset, TrainConfig, WeightingKind};

fn main() -> cm_sched::Result<()> {
    let cfg = TrainConfig {
        karras: KarrasParams::default(),
        schedule: ScheduleSpec::Polynomial {
            curve: 4.0,
            jitter_std: 1.0,
        },
        injection: None,
        curriculum: CurriculumSpec {
            kind: CurriculumKind::Sinusoidal,
            s0: 20,
            s1_cap: 250,
            rho: 7.0,
        },
        loss: LossChoice::PseudoHuber,
        weighting: WeightingKind::InverseDelta,
        batch_size: 256,
        total_steps: 8_000,
        learning_rate: 1e-2,
        seed: 0,
        dataset: ToyDataset::GaussianMixture8,
        hidden_dims: vec![64, 64, 64],
        n_freq: 4,
        sigma_data: 0.5,
        eval_samples: 4096,
        eval_projections: 128,
    };

    println!("training {} steps on {} ...", cfg.total_steps, cfg.dataset);
    let (_, metrics) = train(&cfg)?;

    let window = 500;
    let head: f64 = metrics.loss[..window].iter().sum::<f64>() / window as f64;
    let tail: f64 =
        metrics.loss[metrics.loss.len() - window..].iter().sum::<f64>() / window as f64;
    println!("mean loss, first {window} steps: {head:.4}");
    println!("mean loss, last  {window} steps: {tail:.4}");
    println!("curriculum visited n_k in [{}, {}]",
        metrics.n_k.iter().min().unwrap(),
        metrics.n_k.iter().max().unwrap()
    );
    println!("final one-step SWD vs reference: {:.4}", metrics.final_swd);
    println!("wallclock: {:.1}s", metrics.wallclock_secs);
    Ok(())
}
