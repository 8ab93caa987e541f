// Temporary calibration harness (deleted before release).
use cm_sched::curriculum::{CurriculumKind, CurriculumSpec};
use cm_sched::schedule::{karras_sigmas, KarrasParams, ScheduleSpec};
use cm_sched::toy::*;

fn cfg(schedule: ScheduleSpec, kind: CurriculumKind, seed: u64) -> TrainConfig {
    TrainConfig {
        karras: KarrasParams::default(),
        schedule,
        injection: None,
        curriculum: CurriculumSpec { kind, s0: 20, s1_cap: 250, rho: 7.0 },
        loss: LossChoice::PseudoHuber,
        weighting: WeightingKind::InverseDelta,
        batch_size: 256,
        total_steps: 20000,
        learning_rate: 1e-2,
        seed,
        dataset: ToyDataset::GaussianMixture8,
        hidden_dims: vec![64, 64, 64],
        n_freq: 4,
        sigma_data: 0.5,
        eval_samples: 4096,
        eval_projections: 128,
    }
}

fn main() {
    let array = karras_sigmas(&KarrasParams::default()).unwrap();
    let cp = ConsistencyParam { sigma_data: 0.5, sigma_min: array.sigmas()[0] };
    let untrained = ToyModel::new(2, &[64, 64, 64], 4, 17).unwrap();
    println!(
        "untrained swd = {:.4}",
        model_swd(&untrained, &cp, &array, ToyDataset::GaussianMixture8, 4096, 128).unwrap()
    );

    let poly3 = ScheduleSpec::Polynomial { curve: 3.0, jitter_std: 1.0 };
    let logn = ScheduleSpec::LogNormal { mean_log: -1.1, std_log: 2.0 };
    let jobs: Vec<(&str, TrainConfig)> = vec![
        ("poly3+sin", cfg(poly3, CurriculumKind::Sinusoidal, 0)),
        ("logn+dbl ", cfg(logn, CurriculumKind::Doubling, 0)),
    ];
    let mut handles = Vec::new();
    for (name, c) in jobs {
        handles.push(std::thread::spawn(move || {
            let (model, m) = train(&c).unwrap();
            let pts = sample(&model, &ConsistencyParam { sigma_data: 0.5, sigma_min: 0.002021 }, 4096, 1, &karras_sigmas(&KarrasParams::default()).unwrap(), EVAL_SAMPLE_SEED);
            let _ = pts;
            format!("{name}: swd = {:.4}", m.final_swd)
        }));
    }
    for h in handles {
        println!("{}", h.join().unwrap());
    }
}
