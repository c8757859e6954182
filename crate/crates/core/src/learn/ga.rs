use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::model::{FuzzySystem, Hedge};

use super::encoding::{check_part1_shape, decode_chromosome, encode_any, Chromosome};
use super::{Fitness, LearnConfig, LearnError, LearnReport};

struct Operators<'a> {
    config: &'a LearnConfig,
    domains: Vec<(f64, f64)>,
}

impl Operators<'_> {
    /// Per-gene mutation; returns whether anything changed.
    fn mutate(&self, c: &mut Chromosome, rng: &mut ChaCha8Rng) -> bool {
        let rate = self.config.mutation_rate;
        let mut changed = false;
        for (block, &(lo, hi)) in c.knowledge.iter_mut().zip(&self.domains) {
            if rng.gen::<f64>() < rate {
                let sigma = self.config.mutation_sigma_fraction * (hi - lo);
                let idx = rng.gen_range(0..block.len());
                let step = Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
                block[idx] += step;
                // Repair: clamp, then keep each term's four parameters sorted.
                for p in block.iter_mut() {
                    *p = p.clamp(lo, hi);
                }
                for term in block.chunks_exact_mut(4) {
                    term.sort_by(f64::total_cmp);
                }
                changed = true;
            }
        }
        for w in &mut c.weights {
            if rng.gen::<f64>() < rate {
                *w = rng.gen::<f64>();
                changed = true;
            }
        }
        for h in &mut c.hedges {
            if rng.gen::<f64>() < rate {
                *h = *Hedge::ALL.choose(rng).expect("non-empty");
                changed = true;
            }
        }
        changed
    }

    /// Uniform crossover; knowledge genes swap as whole variable blocks.
    fn crossover(&self, a: &mut Chromosome, b: &mut Chromosome, rng: &mut ChaCha8Rng) {
        for (x, y) in a.knowledge.iter_mut().zip(b.knowledge.iter_mut()) {
            if rng.gen::<bool>() {
                std::mem::swap(x, y);
            }
        }
        for (x, y) in a.weights.iter_mut().zip(b.weights.iter_mut()) {
            if rng.gen::<bool>() {
                std::mem::swap(x, y);
            }
        }
        for (x, y) in a.hedges.iter_mut().zip(b.hedges.iter_mut()) {
            if rng.gen::<bool>() {
                std::mem::swap(x, y);
            }
        }
    }

    fn tournament(&self, fitness: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let mut best = rng.gen_range(0..fitness.len());
        for _ in 1..self.config.tournament_size {
            let c = rng.gen_range(0..fitness.len());
            if fitness[c] < fitness[best] {
                best = c;
            }
        }
        best
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Generational GA with elitism of one, seeded at `template`.
///
/// The initial population is `template` plus mutated copies of it. Each
/// generation keeps the current best, then fills the population with
/// children of tournament-selected parents.
pub fn ga_optimize_from(template: &FuzzySystem, train: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    config.check()?;
    check_part1_shape(template)?;
    let scorer = Fitness::new(template, train)?;
    let ops = Operators {
        config,
        domains: scorer.domains().to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seed_genome = encode_any(template)?;

    let mut population = vec![seed_genome.clone()];
    while population.len() < config.population_size {
        let mut c = seed_genome.clone();
        ops.mutate(&mut c, &mut rng);
        population.push(c);
    }
    let mut fitness = scorer.chromosomes(&population)?;
    let mut best_idx = argmin(&fitness);
    let mut best = (fitness[best_idx], population[best_idx].clone());
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        let mut next = vec![population[best_idx].clone()];
        let mut next_fitness = vec![Some(fitness[best_idx])];
        while next.len() < config.population_size {
            let (i, j) = (ops.tournament(&fitness, &mut rng), ops.tournament(&fitness, &mut rng));
            let (mut a, mut b) = (population[i].clone(), population[j].clone());
            let crossed = rng.gen::<f64>() < config.crossover_rate;
            if crossed {
                ops.crossover(&mut a, &mut b, &mut rng);
            }
            let ma = ops.mutate(&mut a, &mut rng);
            let mb = ops.mutate(&mut b, &mut rng);
            next.push(a);
            next_fitness.push((!crossed && !ma).then_some(fitness[i]));
            if next.len() < config.population_size {
                next.push(b);
                next_fitness.push((!crossed && !mb).then_some(fitness[j]));
            }
        }
        let pending: Vec<usize> = (0..next.len()).filter(|&k| next_fitness[k].is_none()).collect();
        let children: Vec<Chromosome> = pending.iter().map(|&k| next[k].clone()).collect();
        for (&k, f) in pending.iter().zip(scorer.chromosomes(&children)?) {
            next_fitness[k] = Some(f);
        }
        population = next;
        fitness = next_fitness.into_iter().map(|f| f.expect("evaluated")).collect();
        best_idx = argmin(&fitness);
        if fitness[best_idx] < best.0 {
            best = (fitness[best_idx], population[best_idx].clone());
        }
        history.push(best.0);
    }

    Ok(LearnReport {
        config: config.clone(),
        best_system: Some(decode_chromosome(template, &best.1)?),
        history_best_mse: history,
        best_mse: best.0,
        folds: Vec::new(),
        mean_before_test_mse: None,
        mean_train_mse: None,
        mean_test_mse: None,
    })
}
