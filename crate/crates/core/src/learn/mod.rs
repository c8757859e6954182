//! Knowledge-base tuning by genetic algorithm and particle swarm, scored by
//! mean squared error and evaluated with k-fold cross-validation.
//!
//! All random draws come from one seeded stream consumed on the calling
//! thread; only fitness evaluation fans out (rayon). Reports are therefore
//! identical for any thread count.

pub mod encoding;
mod ga;
mod pso;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{kfold_split, Dataset, DatasetError};
use crate::inference::{Engine, InferenceError, Scratch};
use crate::model::{baseline_part1_system, FuzzySystem, Hedge, TrapezoidShape};

pub use encoding::{
    check_part1_shape, decode_chromosome, decode_position, encode_chromosome, particle_bounds, Chromosome,
    PART1_GENE_COUNT, PART1_PARTICLE_DIMS,
};
pub use ga::ga_optimize_from;
pub use pso::pso_optimize_from;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset schema does not match the system: {0}")]
    SchemaMismatch(String),
    #[error("genome shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    Pso,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(Method::Ga),
            "pso" => Ok(Method::Pso),
            other => Err(format!("unknown method {other:?} (expected ga or pso)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnConfig {
    pub method: Method,
    pub generations: usize,
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation step for knowledge genes as a fraction of the domain width.
    pub mutation_sigma_fraction: f64,
    pub tournament_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub velocity_clamp_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl LearnConfig {
    pub fn ga() -> Self {
        Self {
            method: Method::Ga,
            generations: 300,
            population_size: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma_fraction: 0.05,
            tournament_size: 2,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp_fraction: 0.2,
            folds: 5,
            seed: 42,
        }
    }

    pub fn pso() -> Self {
        Self {
            method: Method::Pso,
            population_size: 84,
            ..Self::ga()
        }
    }

    pub fn for_method(method: Method) -> Self {
        match method {
            Method::Ga => Self::ga(),
            Method::Pso => Self::pso(),
        }
    }

    pub fn check(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::InvalidConfig(m.to_string()));
        if self.generations < 1 {
            return bad("generations must be at least 1");
        }
        if self.population_size < 1 {
            return bad("population size must be at least 1");
        }
        for (name, r) in [("crossover rate", self.crossover_rate), ("mutation rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(&format!("{name} {r} outside [0, 1]"));
            }
        }
        if self.tournament_size < 1 {
            return bad("tournament size must be at least 1");
        }
        if !(self.velocity_clamp_fraction > 0.0) {
            return bad("velocity clamp fraction must be positive");
        }
        Ok(())
    }
}

/// Cross-validation outcome for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub before_train_mse: f64,
    pub before_test_mse: f64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub history_best_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LearnReport {
    pub config: LearnConfig,
    #[serde(skip)]
    pub best_system: Option<FuzzySystem>,
    /// Best training MSE after each generation; for cross-validation the
    /// per-generation mean over folds.
    pub history_best_mse: Vec<f64>,
    pub best_mse: f64,
    pub folds: Vec<FoldReport>,
    pub mean_before_test_mse: Option<f64>,
    pub mean_train_mse: Option<f64>,
    pub mean_test_mse: Option<f64>,
}

impl LearnReport {
    pub fn best_system(&self) -> &FuzzySystem {
        self.best_system.as_ref().expect("report carries its best system")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is serializable")
    }
}

/// Input positions of `dataset.schema` within the engine's input order.
fn column_map(engine: &Engine, dataset: &Dataset) -> Result<Vec<usize>, LearnError> {
    if !engine.output_name().eq_ignore_ascii_case(&dataset.target) {
        return Err(LearnError::SchemaMismatch(format!(
            "dataset target {} but system output {}",
            dataset.target,
            engine.output_name()
        )));
    }
    let names: Vec<&str> = engine.input_names().collect();
    if names.len() != dataset.schema.len() {
        return Err(LearnError::SchemaMismatch(format!(
            "system inputs {:?}, dataset columns {:?}",
            names, dataset.schema
        )));
    }
    names
        .iter()
        .map(|n| {
            dataset
                .schema
                .iter()
                .position(|c| c.eq_ignore_ascii_case(n))
                .ok_or_else(|| LearnError::SchemaMismatch(format!("dataset lacks column {n}")))
        })
        .collect()
}

/// Crisp predictions for every record, in record order.
pub fn predict(system: &FuzzySystem, dataset: &Dataset) -> Result<Vec<f64>, LearnError> {
    let engine = Engine::new(system)?;
    predict_with(&engine, dataset)
}

pub fn predict_with(engine: &Engine, dataset: &Dataset) -> Result<Vec<f64>, LearnError> {
    let cols = column_map(engine, dataset)?;
    let mut scratch = Scratch::default();
    let mut values = vec![0.0; cols.len()];
    dataset
        .records
        .iter()
        .map(|r| {
            for (slot, &c) in values.iter_mut().zip(&cols) {
                *slot = r.inputs[c];
            }
            Ok(engine.evaluate_with(&values, &mut scratch)?.value)
        })
        .collect()
}

pub fn mse(system: &FuzzySystem, dataset: &Dataset) -> Result<f64, LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    mse_with(&Engine::new(system)?, dataset)
}

pub fn mse_with(engine: &Engine, dataset: &Dataset) -> Result<f64, LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let predictions = predict_with(engine, dataset)?;
    let sum: f64 = predictions
        .iter()
        .zip(&dataset.records)
        .map(|(p, r)| (p - r.desired).powi(2))
        .sum();
    Ok(sum / dataset.len() as f64)
}

/// MSE of candidate genomes against a fixed training set. Candidates are
/// scored by re-tuning one compiled engine, which is equivalent to
/// `mse(decode_chromosome(template, c), data)`.
pub(crate) struct Fitness<'a> {
    engine: Engine,
    domains: Vec<(f64, f64)>,
    rule_count: usize,
    data: &'a Dataset,
}

impl<'a> Fitness<'a> {
    pub(crate) fn new(template: &FuzzySystem, data: &'a Dataset) -> Result<Self, LearnError> {
        if data.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let engine = Engine::new(template)?;
        let mut domains: Vec<(f64, f64)> = engine.input_domains().collect();
        domains.push(engine.output_domain());
        Ok(Self {
            engine,
            domains,
            rule_count: template.rules.len(),
            data,
        })
    }

    pub(crate) fn domains(&self) -> &[(f64, f64)] {
        &self.domains
    }

    fn score(&self, knowledge: &[Vec<f64>], hedges: &[Hedge], weights: &[f64]) -> Result<f64, LearnError> {
        let shapes: Vec<Vec<TrapezoidShape>> = knowledge
            .iter()
            .zip(&self.domains)
            .map(|(block, &(lo, hi))| {
                block
                    .chunks_exact(4)
                    .map(|p| TrapezoidShape::new(p[0], p[1], p[2], p[3]).repaired(lo, hi))
                    .collect()
            })
            .collect();
        let engine = self.engine.retuned(&shapes, hedges, weights)?;
        mse_with(&engine, self.data)
    }

    pub(crate) fn chromosome(&self, c: &Chromosome) -> Result<f64, LearnError> {
        let weights: Vec<f64> = c
            .weights
            .iter()
            .map(|&w| if w.is_nan() { 0.0 } else { w.clamp(0.0, 1.0) })
            .collect();
        self.score(&c.knowledge, &c.hedges, &weights)
    }

    pub(crate) fn position(&self, position: &[f64]) -> Result<f64, LearnError> {
        let mut knowledge = Vec::with_capacity(self.domains.len());
        let mut rest = position;
        for term_count in self.engine.term_counts() {
            let n = 4 * term_count;
            if rest.len() < n {
                return Err(LearnError::ShapeMismatch("position too short".into()));
            }
            knowledge.push(rest[..n].to_vec());
            rest = &rest[n..];
        }
        if !rest.is_empty() {
            return Err(LearnError::ShapeMismatch("position too long".into()));
        }
        let hedges = vec![Hedge::None; self.domains.len()];
        self.score(&knowledge, &hedges, &vec![1.0; self.rule_count])
    }


    pub(crate) fn chromosomes(&self, pop: &[Chromosome]) -> Result<Vec<f64>, LearnError> {
        pop.par_iter().map(|c| self.chromosome(c)).collect()
    }

    pub(crate) fn positions(&self, ps: &[Vec<f64>]) -> Result<Vec<f64>, LearnError> {
        ps.par_iter().map(|p| self.position(p)).collect()
    }
}

pub fn ga_optimize(train: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    ga_optimize_from(&baseline_part1_system(), train, config)
}

pub fn pso_optimize(train: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    pso_optimize_from(&baseline_part1_system(), train, config)
}

pub fn optimize_from(template: &FuzzySystem, train: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    match config.method {
        Method::Ga => ga_optimize_from(template, train, config),
        Method::Pso => pso_optimize_from(template, train, config),
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn cross_validate(dataset: &Dataset, config: &LearnConfig) -> Result<LearnReport, LearnError> {
    cross_validate_from(&baseline_part1_system(), dataset, config)
}

/// Optimize on each training split and score on the held-out fold. The
/// report's best system is the one with the lowest held-out MSE.
pub fn cross_validate_from(
    template: &FuzzySystem,
    dataset: &Dataset,
    config: &LearnConfig,
) -> Result<LearnReport, LearnError> {
    config.check()?;
    let splits = kfold_split(dataset, config.folds, config.seed)?;
    let mut folds = Vec::with_capacity(splits.len());
    let mut best: Option<(f64, FuzzySystem)> = None;
    for (i, split) in splits.iter().enumerate() {
        let fold_config = LearnConfig {
            seed: fold_seed(config.seed, i),
            ..config.clone()
        };
        let report = optimize_from(template, &split.train, &fold_config)?;
        let test_mse = mse(report.best_system(), &split.test)?;
        log::info!(
            "{:?} fold {}/{}: train {:.6} test {:.6}",
            config.method,
            i + 1,
            splits.len(),
            report.best_mse,
            test_mse
        );
        folds.push(FoldReport {
            fold: i,
            train_size: split.train.len(),
            test_size: split.test.len(),
            before_train_mse: mse(template, &split.train)?,
            before_test_mse: mse(template, &split.test)?,
            train_mse: report.best_mse,
            test_mse,
            history_best_mse: report.history_best_mse,
        });
        if best.as_ref().map_or(true, |(m, _)| test_mse < *m) {
            best = Some((test_mse, report.best_system.expect("optimizer returns a system")));
        }
    }
    let k = folds.len() as f64;
    let mean = |f: fn(&FoldReport) -> f64| folds.iter().map(f).sum::<f64>() / k;
    let generations = folds[0].history_best_mse.len();
    let history = (0..generations)
        .map(|g| folds.iter().map(|f| f.history_best_mse[g]).sum::<f64>() / k)
        .collect::<Vec<_>>();
    let (_, best_system) = best.expect("at least two folds");
    Ok(LearnReport {
        config: config.clone(),
        best_mse: mean(|f| f.train_mse),
        history_best_mse: history,
        best_system: Some(best_system),
        mean_before_test_mse: Some(mean(|f| f.before_test_mse)),
        mean_train_mse: Some(mean(|f| f.train_mse)),
        mean_test_mse: Some(mean(|f| f.test_mse)),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_slp_dataset, Record, DEFAULT_NOISE_SIGMA};
    use crate::inference::{infer, CrispInput};

    fn small() -> Dataset {
        gen_slp_dataset(40, 5, DEFAULT_NOISE_SIGMA)
    }

    #[test]
    fn mse_of_exact_targets_is_zero() {
        let base = baseline_part1_system();
        let mut ds = small();
        let preds = predict(&base, &ds).unwrap();
        for (r, p) in ds.records.iter_mut().zip(preds) {
            r.desired = p;
        }
        assert_eq!(mse(&base, &ds).unwrap(), 0.0);
    }

    #[test]
    fn mse_definition() {
        let base = baseline_part1_system();
        let input = CrispInput::from_pairs([("SA", -3.0), ("LCD", -3.0), ("SCL", 1.0), ("STS", 1.0)]);
        let y = infer(&base, &input).unwrap().crisp_value;
        let mut ds = Dataset::new(vec!["SA".into(), "LCD".into(), "SCL".into(), "STS".into()], "SLP");
        ds.records.push(Record {
            inputs: vec![-3.0, -3.0, 1.0, 1.0],
            desired: y + 0.1,
        });
        assert!((mse(&base, &ds).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn mse_errors() {
        let base = baseline_part1_system();
        let mut ds = small();
        ds.records.clear();
        assert_eq!(mse(&base, &ds), Err(LearnError::EmptyDataset));
        let mut ds = small();
        ds.target = "RLCR".into();
        assert!(matches!(mse(&base, &ds), Err(LearnError::SchemaMismatch(_))));
    }

    #[test]
    fn column_order_is_resolved_by_name() {
        let base = baseline_part1_system();
        let ds = small();
        let mut shuffled = ds.clone();
        shuffled.schema = vec!["sts".into(), "sa".into(), "scl".into(), "lcd".into()];
        for (s, r) in shuffled.records.iter_mut().zip(&ds.records) {
            s.inputs = vec![r.inputs[3], r.inputs[0], r.inputs[2], r.inputs[1]];
        }
        assert_eq!(mse(&base, &ds).unwrap(), mse(&base, &shuffled).unwrap());
    }

    #[test]
    fn config_checks() {
        let mut c = LearnConfig::ga();
        assert!(c.check().is_ok());
        c.mutation_rate = 1.5;
        assert!(c.check().is_err());
        let mut c = LearnConfig::pso();
        assert_eq!(c.population_size, 84);
        c.generations = 0;
        assert!(c.check().is_err());
    }

    #[test]
    fn cross_validate_shape() {
        let ds = gen_slp_dataset(50, 3, DEFAULT_NOISE_SIGMA);
        let config = LearnConfig {
            generations: 2,
            population_size: 4,
            ..LearnConfig::ga()
        };
        let r = cross_validate(&ds, &config).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert!(r.folds.iter().all(|f| f.test_size == 10 && f.history_best_mse.len() == 2));
        assert_eq!(r.history_best_mse.len(), 2);
        assert_eq!(r, cross_validate(&ds, &config).unwrap());
        let json = r.to_json();
        assert_eq!(json["folds"].as_array().unwrap().len(), 5);
        assert_eq!(json["config"]["method"], "ga");
    }

    #[test]
    fn fitness_matches_decoded_system() {
        use rand::{Rng, SeedableRng};
        let base = baseline_part1_system();
        let ds = small();
        let scorer = Fitness::new(&base, &ds).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut c = encode_chromosome(&base).unwrap();
        for block in &mut c.knowledge {
            for g in block.iter_mut() {
                *g += rng.gen_range(-1.5..1.5);
            }
        }
        for w in &mut c.weights {
            *w = rng.gen_range(-0.2..1.2);
        }
        c.hedges = vec![Hedge::Very, Hedge::None, Hedge::MoreOrLess, Hedge::None, Hedge::Very];
        let expected = mse(&decode_chromosome(&base, &c).unwrap(), &ds).unwrap();
        assert_eq!(scorer.chromosome(&c).unwrap(), expected);

        let p: Vec<f64> = particle_bounds(&base)
            .unwrap()
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        let expected = mse(&decode_position(&base, &p).unwrap(), &ds).unwrap();
        assert_eq!(scorer.position(&p).unwrap(), expected);
        assert!(scorer.position(&p[1..]).is_err());
    }

    #[test]
    fn too_few_records() {
        let ds = gen_slp_dataset(3, 3, DEFAULT_NOISE_SIGMA);
        assert!(matches!(
            cross_validate(&ds, &LearnConfig::ga()),
            Err(LearnError::Dataset(DatasetError::TooFewRecords { .. }))
        ));
    }
}
