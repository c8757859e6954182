//! Fuzzy Markup Language engine for student learning-performance assessment
//! and learning-content recommendation.
//!
//! The crate covers the knowledge-base model and its FML serialization,
//! Mamdani inference, GA/PSO tuning of the knowledge base, the two-stage
//! assessment and recommendation pipeline, and a line-oriented JSON socket
//! service exposing both stages.

pub mod dataset;
pub mod inference;
pub mod io;
pub mod learn;
pub mod model;
pub mod recommend;
pub mod rulegen;
pub mod service;

pub use inference::{infer, CrispInput, Engine, InferenceError, InferenceResult};
pub use model::{baseline_part1_system, validate, FuzzySystem};
