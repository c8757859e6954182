//! Genome layouts for the tuned knowledge base.
//!
//! The GA chromosome carries one knowledge gene per variable (the flattened
//! trapezoid parameters of all its terms), one weight gene per rule and one
//! hedge gene per variable: 5 + 256 + 5 = 266 genes for the assessment
//! system. A PSO particle is the concatenation of the knowledge genes only,
//! 16 * 4 + 20 = 84 reals.

use serde::{Deserialize, Serialize};

use crate::model::{FuzzySystem, Hedge, TrapezoidShape, VariableKind};

use super::LearnError;

pub const PART1_GENE_COUNT: usize = 266;
pub const PART1_PARTICLE_DIMS: usize = 84;

/// Tunable genes of one knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    /// One block per variable (inputs in system order, then the output):
    /// `4 * term_count` trapezoid parameters.
    pub knowledge: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub hedges: Vec<Hedge>,
}

impl Chromosome {
    pub fn gene_count(&self) -> usize {
        self.knowledge.len() + self.weights.len() + self.hedges.len()
    }

    /// Knowledge parameters flattened into a particle position.
    pub fn position(&self) -> Vec<f64> {
        self.knowledge.iter().flatten().copied().collect()
    }
}

/// Index of every tuned variable in `system.variables`: inputs first, then
/// the output.
fn tuned_variables(system: &FuzzySystem) -> Result<Vec<usize>, LearnError> {
    let mut idx: Vec<usize> = system
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VariableKind::Input)
        .map(|(i, _)| i)
        .collect();
    let out = system
        .variables
        .iter()
        .position(|v| v.kind == VariableKind::Output)
        .ok_or_else(|| LearnError::ShapeMismatch("system has no output variable".into()))?;
    idx.push(out);
    Ok(idx)
}

/// Check the assessment-system shape: 4 inputs x 4 terms, a 5-term output
/// and 256 rules.
pub fn check_part1_shape(system: &FuzzySystem) -> Result<(), LearnError> {
    let vars = tuned_variables(system)?;
    let counts: Vec<usize> = vars.iter().map(|&i| system.variables[i].terms.len()).collect();
    if counts != [4, 4, 4, 4, 5] || system.rules.len() != 256 {
        return Err(LearnError::ShapeMismatch(format!(
            "expected terms [4, 4, 4, 4, 5] and 256 rules, found {:?} and {} rules",
            counts,
            system.rules.len()
        )));
    }
    Ok(())
}

pub fn encode_chromosome(system: &FuzzySystem) -> Result<Chromosome, LearnError> {
    check_part1_shape(system)?;
    encode_any(system)
}

pub(crate) fn encode_any(system: &FuzzySystem) -> Result<Chromosome, LearnError> {
    let vars = tuned_variables(system)?;
    Ok(Chromosome {
        knowledge: vars
            .iter()
            .map(|&i| system.variables[i].terms.iter().flat_map(|t| t.shape.params()).collect())
            .collect(),
        weights: system.rules.iter().map(|r| r.weight).collect(),
        hedges: vars
            .iter()
            .map(|&i| system.variables[i].terms.first().map(|t| t.hedge).unwrap_or_default())
            .collect(),
    })
}

/// Rebuild a system from `template`, repairing every trapezoid (clamp to
/// the domain, sort ascending) and clamping weights into `[0, 1]`.
pub fn decode_chromosome(template: &FuzzySystem, chromosome: &Chromosome) -> Result<FuzzySystem, LearnError> {
    let vars = tuned_variables(template)?;
    if chromosome.knowledge.len() != vars.len()
        || chromosome.hedges.len() != vars.len()
        || chromosome.weights.len() != template.rules.len()
    {
        return Err(LearnError::ShapeMismatch(format!(
            "chromosome has {} knowledge / {} weight / {} hedge genes, template needs {} / {} / {}",
            chromosome.knowledge.len(),
            chromosome.weights.len(),
            chromosome.hedges.len(),
            vars.len(),
            template.rules.len(),
            vars.len()
        )));
    }
    let mut system = template.clone();
    for ((&vi, block), &hedge) in vars.iter().zip(&chromosome.knowledge).zip(&chromosome.hedges) {
        let var = &mut system.variables[vi];
        if block.len() != 4 * var.terms.len() {
            return Err(LearnError::ShapeMismatch(format!(
                "knowledge gene for {} has {} parameters, expected {}",
                var.name,
                block.len(),
                4 * var.terms.len()
            )));
        }
        let (lo, hi) = (var.domain_left, var.domain_right);
        for (term, p) in var.terms.iter_mut().zip(block.chunks_exact(4)) {
            term.shape = TrapezoidShape::new(p[0], p[1], p[2], p[3]).repaired(lo, hi);
            term.hedge = hedge;
        }
    }
    for (rule, &w) in system.rules.iter_mut().zip(&chromosome.weights) {
        rule.weight = if w.is_nan() { 0.0 } else { w.clamp(0.0, 1.0) };
    }
    Ok(system)
}

/// Per-dimension `(low, high)` bounds of a particle position.
pub fn particle_bounds(template: &FuzzySystem) -> Result<Vec<(f64, f64)>, LearnError> {
    let vars = tuned_variables(template)?;
    Ok(vars
        .iter()
        .flat_map(|&i| {
            let v = &template.variables[i];
            std::iter::repeat((v.domain_left, v.domain_right)).take(4 * v.terms.len())
        })
        .collect())
}

/// Rebuild a system from a particle position. Rule weights are reset to 1
/// and hedges to none.
pub fn decode_position(template: &FuzzySystem, position: &[f64]) -> Result<FuzzySystem, LearnError> {
    let vars = tuned_variables(template)?;
    let mut knowledge = Vec::with_capacity(vars.len());
    let mut rest = position;
    for &i in &vars {
        let n = 4 * template.variables[i].terms.len();
        if rest.len() < n {
            return Err(LearnError::ShapeMismatch(format!(
                "position has {} dimensions, template needs more",
                position.len()
            )));
        }
        knowledge.push(rest[..n].to_vec());
        rest = &rest[n..];
    }
    if !rest.is_empty() {
        return Err(LearnError::ShapeMismatch(format!(
            "position has {} extra dimensions",
            rest.len()
        )));
    }
    let chromosome = Chromosome {
        knowledge,
        weights: vec![1.0; template.rules.len()],
        hedges: vec![Hedge::None; vars.len()],
    };
    decode_chromosome(template, &chromosome)
}
