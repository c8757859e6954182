//! Second pipeline stage: recommend learning contents from a student's
//! ability and assessed learning performance.

mod graph;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::learn::{self, LearnError};
use crate::model::{FuzzySystem, FuzzyTerm, FuzzyVariable, TrapezoidShape, VariableKind, RLCR, SA, SLP};
use crate::rulegen::{build_rlcr_rulebase, RLCR_TERMS};

pub use graph::{recommend_contents, recommend_contents_with, ContentGraph, ContentLevel, ContentNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("no learning contents for grade {0}")]
    UnknownGrade(i32),
    #[error("duplicate content id {0:?}")]
    DuplicateContent(String),
    #[error("content {content:?} lists unknown prerequisite {prerequisite:?}")]
    UnknownPrerequisite { content: String, prerequisite: String },
    #[error("prerequisite cycle through {0:?}")]
    Cycle(String),
    #[error("system shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid content graph: {0}")]
    Json(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Recommended content rank, from last-grade high-intermediate up to
/// next-grade intermediate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RankLevel {
    #[serde(rename = "LGHIL")]
    Lghil,
    #[serde(rename = "LGAL")]
    Lgal,
    #[serde(rename = "CGEL")]
    Cgel,
    #[serde(rename = "CGIL")]
    Cgil,
    #[serde(rename = "CGHIL")]
    Cghil,
    #[serde(rename = "CGAL")]
    Cgal,
    #[serde(rename = "NGEL")]
    Ngel,
    #[serde(rename = "NGIL")]
    Ngil,
}

impl RankLevel {
    pub const ALL: [RankLevel; 8] = [
        RankLevel::Lghil,
        RankLevel::Lgal,
        RankLevel::Cgel,
        RankLevel::Cgil,
        RankLevel::Cghil,
        RankLevel::Cgal,
        RankLevel::Ngel,
        RankLevel::Ngil,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Same spelling as the RLCR term names.
    pub fn as_str(self) -> &'static str {
        RLCR_TERMS[self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        RLCR_TERMS
            .iter()
            .position(|t| t.eq_ignore_ascii_case(s))
            .map(|i| Self::ALL[i])
    }

    /// Grade relative to the student's current one: -1, 0 or +1.
    pub fn grade_offset(self) -> i32 {
        match self {
            RankLevel::Lghil | RankLevel::Lgal => -1,
            RankLevel::Ngel | RankLevel::Ngil => 1,
            _ => 0,
        }
    }

    pub fn content_level(self) -> ContentLevel {
        match self {
            RankLevel::Cgel | RankLevel::Ngel => ContentLevel::Elementary,
            RankLevel::Cgil | RankLevel::Ngil => ContentLevel::Intermediate,
            RankLevel::Lghil | RankLevel::Cghil => ContentLevel::HighIntermediate,
            RankLevel::Lgal | RankLevel::Cgal => ContentLevel::Advanced,
        }
    }
}

impl std::fmt::Display for RankLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit-width bins over [-4, 4]; the top bin is closed and values outside
/// the range fall into the end bins. NaN maps to the lowest level.
pub fn rank_to_level(rlcr: f64) -> RankLevel {
    if rlcr.is_nan() {
        return RankLevel::Lghil;
    }
    let bin = (rlcr.clamp(-4.0, 4.0) + 4.0).floor() as usize;
    RankLevel::ALL[bin.min(7)]
}

pub const RLCR_DOMAIN: (f64, f64) = (-4.0, 4.0);

/// Eight overlapping trapezoids centred at -3.5, -2.5, ..., 3.5; the end
/// terms are shouldered at the domain edges.
pub fn rlcr_shapes() -> [TrapezoidShape; 8] {
    std::array::from_fn(|i| {
        let c = -3.5 + i as f64;
        let (a, b) = if i == 0 { (-4.0, -4.0) } else { (c - 0.75, c - 0.25) };
        let (cc, d) = if i == 7 { (4.0, 4.0) } else { (c + 0.25, c + 0.75) };
        TrapezoidShape::new(a, b, cc, d)
    })
}

/// Recommendation system whose SA and SLP terms are taken from a (possibly
/// tuned) assessment system. SLP becomes an input over its original domain.
pub fn build_part2_system(part1: &FuzzySystem) -> Result<FuzzySystem, RecommendError> {
    let sa = part1
        .variable(SA)
        .filter(|v| v.kind == VariableKind::Input)
        .ok_or_else(|| RecommendError::ShapeMismatch(format!("no {SA} input")))?;
    let slp = part1
        .variable(SLP)
        .filter(|v| v.kind == VariableKind::Output)
        .ok_or_else(|| RecommendError::ShapeMismatch(format!("no {SLP} output")))?;
    let mut slp_in = slp.clone();
    slp_in.kind = VariableKind::Input;
    let terms = RLCR_TERMS
        .iter()
        .zip(rlcr_shapes())
        .map(|(name, shape)| FuzzyTerm::new(*name, shape))
        .collect();
    let rlcr = FuzzyVariable::new(RLCR, VariableKind::Output, RLCR_DOMAIN, terms);
    let mut system = FuzzySystem::new("RLCRSystemRB", vec![sa.clone(), slp_in, rlcr], build_rlcr_rulebase());
    system.network_address = part1.network_address.clone();
    Ok(system)
}

/// Fraction of records whose inferred value lies within `threshold` of the
/// desired one.
pub fn accuracy(system: &FuzzySystem, dataset: &Dataset, threshold: f64) -> Result<f64, RecommendError> {
    let predictions = learn::predict(system, dataset)?;
    accuracy_of(&predictions, dataset, threshold)
}

pub fn accuracy_of(predictions: &[f64], dataset: &Dataset, threshold: f64) -> Result<f64, RecommendError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset.into());
    }
    let hits = predictions
        .iter()
        .zip(&dataset.records)
        .filter(|(p, r)| (*p - r.desired).abs() <= threshold)
        .count();
    Ok(hits as f64 / dataset.len() as f64)
}
