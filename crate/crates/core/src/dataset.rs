//! Seeded synthetic datasets and their target functions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::CrispInput;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DatasetError {
    #[error("need at least {k} records for {k}-fold split, have {n}")]
    TooFewRecords { n: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Values in the owning dataset's `schema` order.
    pub inputs: Vec<f64>,
    pub desired: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// Input variable names.
    pub schema: Vec<String>,
    /// Output variable whose desired value each record carries.
    pub target: String,
    pub records: Vec<Record>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(schema: Vec<String>, target: impl Into<String>) -> Self {
        Self {
            schema,
            target: target.into(),
            records: Vec::new(),
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn crisp_input(&self, record: &Record) -> CrispInput {
        CrispInput::from_pairs(self.schema.iter().map(String::as_str).zip(record.inputs.iter().copied()))
    }

    /// A dataset with the same schema holding the records at `indices`.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            target: self.target.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            seed: self.seed,
        }
    }
}

pub const SLP_SCHEMA: [&str; 4] = ["SA", "LCD", "SCL", "STS"];
pub const RLCR_SCHEMA: [&str; 2] = ["SA", "SLP"];

const ABILITY_DOMAIN: (f64, f64) = (-4.0, 4.0);
const BEHAVIOUR_DOMAIN: (f64, f64) = (0.0, 10.0);

fn to_three(x: f64, (lo, hi): (f64, f64)) -> f64 {
    3.0 * (x.clamp(lo, hi) - lo) / (hi - lo)
}

/// Continuous analogue of the rule-table score, normalised to `[0, 1]`.
pub fn slp_oracle(sa: f64, lcd: f64, scl: f64, sts: f64) -> f64 {
    let s = 4.0 * to_three(sa, ABILITY_DOMAIN) - to_three(lcd, ABILITY_DOMAIN)
        + to_three(scl, BEHAVIOUR_DOMAIN)
        + to_three(sts, BEHAVIOUR_DOMAIN);
    ((s + 3.0) / 21.0).clamp(0.0, 1.0)
}

/// Desired recommendation rank for a student.
pub fn rlcr_oracle(sa: f64, slp: f64) -> f64 {
    ((2.0 * sa + 8.0 * slp - 4.0) / 3.0).clamp(-4.0, 4.0)
}

/// Published `(SA, SLP)` input pairs, usable as a fixed dataset prefix.
pub const PAPER_RLCR_ROWS: [(f64, f64); 15] = [
    (-1.43, 0.111),
    (-1.03, 0.167),
    (-2.23, 0.098),
    (-1.88, 0.11),
    (-3.74, 0.113),
    (-2.87, 0.116),
    (-1.68, 0.153),
    (-0.97, 0.117),
    (-1.5, 0.105),
    (-2.65, 0.112),
    (2.87, 0.903),
    (3.71, 0.902),
    (1.43, 0.803),
    (1.61, 0.85),
    (1.57, 0.907),
];

pub const DEFAULT_NOISE_SIGMA: f64 = 0.02;

pub fn gen_slp_dataset(n: usize, seed: u64, noise_sigma: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    let mut ds = Dataset::new(SLP_SCHEMA.iter().map(|s| s.to_string()).collect(), "SLP");
    ds.seed = Some(seed);
    for _ in 0..n {
        let sa = rng.gen_range(ABILITY_DOMAIN.0..=ABILITY_DOMAIN.1);
        let lcd = rng.gen_range(ABILITY_DOMAIN.0..=ABILITY_DOMAIN.1);
        let scl = rng.gen_range(BEHAVIOUR_DOMAIN.0..=BEHAVIOUR_DOMAIN.1);
        let sts = rng.gen_range(BEHAVIOUR_DOMAIN.0..=BEHAVIOUR_DOMAIN.1);
        let desired = (slp_oracle(sa, lcd, scl, sts) + noise.sample(&mut rng)).clamp(0.0, 1.0);
        ds.records.push(Record {
            inputs: vec![sa, lcd, scl, sts],
            desired,
        });
    }
    ds
}

/// `n` recommendation records; with `include_paper_rows` the published
/// input pairs come first (counted within `n`).
pub fn gen_rlcr_dataset(n: usize, seed: u64, include_paper_rows: bool) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::new(RLCR_SCHEMA.iter().map(|s| s.to_string()).collect(), "RLCR");
    ds.seed = Some(seed);
    let prefix = if include_paper_rows { PAPER_RLCR_ROWS.len().min(n) } else { 0 };
    for &(sa, slp) in &PAPER_RLCR_ROWS[..prefix] {
        ds.records.push(Record {
            inputs: vec![sa, slp],
            desired: rlcr_oracle(sa, slp),
        });
    }
    for _ in prefix..n {
        let sa = rng.gen_range(ABILITY_DOMAIN.0..=ABILITY_DOMAIN.1);
        let slp = rng.gen_range(0.0..=1.0);
        ds.records.push(Record {
            inputs: vec![sa, slp],
            desired: rlcr_oracle(sa, slp),
        });
    }
    ds
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub train: Dataset,
    pub test: Dataset,
    /// Indices into the source dataset that form `test`.
    pub test_indices: Vec<usize>,
}

/// Shuffle with `seed` and cut into `k` contiguous test folds.
pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::BadFoldCount(k));
    }
    let n = dataset.len();
    if n < k {
        return Err(DatasetError::TooFewRecords { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..k)
        .map(|f| {
            let (lo, hi) = (f * n / k, (f + 1) * n / k);
            let mut test_indices = order[lo..hi].to_vec();
            test_indices.sort_unstable();
            let mut train_indices: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
            train_indices.sort_unstable();
            Fold {
                train: dataset.subset(&train_indices),
                test: dataset.subset(&test_indices),
                test_indices,
            }
        })
        .collect())
}
