use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::model::FuzzySystem;

use super::encoding::{check_part1_shape, decode_position, encode_any, particle_bounds};
use super::{Fitness, LearnConfig, LearnError, LearnReport};

#[derive(Debug, Clone)]
struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_fitness: f64,
}

/// Global-best PSO over the trapezoid parameters of every variable.
///
/// Particle 0 starts at `template`, the rest uniformly inside the bounds;
/// all velocities start at zero. Positions are clamped to their variable's
/// domain and speeds to `velocity_clamp_fraction` of the domain width.
pub fn pso_optimize_from(template: &FuzzySystem, train: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    config.check()?;
    check_part1_shape(template)?;
    let bounds = particle_bounds(template)?;
    let vmax: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| config.velocity_clamp_fraction * (hi - lo))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut positions = vec![encode_any(template)?.position()];
    while positions.len() < config.population_size {
        positions.push(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }
    let scorer = Fitness::new(template, train)?;
    let fitness = scorer.positions(&positions)?;
    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(fitness)
        .map(|(p, f)| Particle {
            velocity: vec![0.0; p.len()],
            best_position: p.clone(),
            position: p,
            best_fitness: f,
        })
        .collect();
    let mut global = best_of(&swarm);
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        for particle in &mut swarm {
            for d in 0..bounds.len() {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                let x = particle.position[d];
                let v = config.inertia * particle.velocity[d]
                    + config.cognitive * r1 * (particle.best_position[d] - x)
                    + config.social * r2 * (global.1[d] - x);
                let v = v.clamp(-vmax[d], vmax[d]);
                particle.velocity[d] = v;
                particle.position[d] = (x + v).clamp(bounds[d].0, bounds[d].1);
            }
        }
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        let fitness = scorer.positions(&positions)?;
        for (particle, f) in swarm.iter_mut().zip(fitness) {
            if f < particle.best_fitness {
                particle.best_fitness = f;
                particle.best_position.clone_from(&particle.position);
            }
        }
        let candidate = best_of(&swarm);
        if candidate.0 < global.0 {
            global = candidate;
        }
        history.push(global.0);
    }

    Ok(LearnReport {
        config: config.clone(),
        best_system: Some(decode_position(template, &global.1)?),
        history_best_mse: history,
        best_mse: global.0,
        folds: Vec::new(),
        mean_before_test_mse: None,
        mean_train_mse: None,
        mean_test_mse: None,
    })
}

fn best_of(swarm: &[Particle]) -> (f64, Vec<f64>) {
    let mut best = &swarm[0];
    for p in swarm {
        if p.best_fitness < best.best_fitness {
            best = p;
        }
    }
    (best.best_fitness, best.best_position.clone())
}
