//! Sample a trained toy model with 1 to 4 consistency steps and compare
//! sliced-Wasserstein distances to the reference distribution.
//!
//! Run with: cargo run --release --example multistep_sampling

use cm_sched::curriculum::{CurriculumKind, CurriculumSpec};
use cm_sched::schedule::{karras_sigmas, KarrasParams, ScheduleSpec};
use cm_sched::toy::{
    evaluate_swd, reference_points, sample, train, ConsistencyParam, LossChoice, ToyDataset,
    TrainConfig, WeightingKind, DATA_DIM, EVAL_SAMPLE_SEED, SWD_PROJECTION_SEED,
};

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
        total_steps: 6_000,
        learning_rate: 1e-2,
        seed: 0,
        dataset: ToyDataset::GaussianMixture8,
        hidden_dims: vec![64, 64, 64],
        n_freq: 4,
        sigma_data: 0.5,
        eval_samples: 4096,
        eval_projections: 128,
    };
    println!("training {} steps ...", cfg.total_steps);
    let (model, _) = train(&cfg)?;

    let array = karras_sigmas(&cfg.karras)?;
    let cp = ConsistencyParam {
        sigma_data: cfg.sigma_data,
        sigma_min: array.sigmas()[0],
    };
    let reference = reference_points(cfg.dataset, 4096);
    for steps in 1..=4 {
        let points = sample(&model, &cp, 4096, steps, &array, EVAL_SAMPLE_SEED)?;
        let swd = evaluate_swd(&points, &reference, DATA_DIM, 128, SWD_PROJECTION_SEED)?;
        println!("{steps}-step SWD: {swd:.4}");
    }
    Ok(())
}
