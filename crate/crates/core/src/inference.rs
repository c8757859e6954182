//! Mamdani inference: hedged fuzzification, MIN activation, MIN implication,
//! MAX accumulation and discretized centre-of-gravity defuzzification.
//!
//! [`Engine`] compiles a [`FuzzySystem`] into index form and caches the
//! output terms sampled on the COG grid. The free functions are thin
//! wrappers for one-off evaluation.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FuzzySystem, FuzzyTerm, Hedge, Rule, TrapezoidShape, VariableKind};

pub const DEFAULT_COG_SAMPLES: usize = 1001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("missing input value for variable {0}")]
    MissingInput(String),
    #[error("input {0} is not a finite number")]
    NonFinite(String),
    #[error("aggregated membership has zero area")]
    ZeroArea,
    #[error("system cannot be evaluated: {0}")]
    InvalidSystem(String),
}

/// Crisp values keyed by input variable name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrispInput(pub BTreeMap<String, f64>);

impl CrispInput {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied().or_else(|| {
            self.0
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| *v)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub crisp_value: f64,
    pub winning_term: String,
    /// Membership of each output term at `crisp_value`, in term order.
    pub term_degrees: Vec<(String, f64)>,
    /// True when at least one input was clamped into its domain.
    pub clamped: bool,
    /// False when no rule fired and the default value was returned.
    pub fired: bool,
}

/// Trapezoid membership; a point shape `a == b == c == d` is 1 only at `a`.
pub fn membership(shape: &TrapezoidShape, x: f64) -> f64 {
    let TrapezoidShape { a, b, c, d } = *shape;
    if x < a || x > d {
        0.0
    } else if x >= b && x <= c {
        1.0
    } else if x < b {
        (x - a) / (b - a)
    } else {
        (d - x) / (d - c)
    }
}

pub fn apply_hedge(degree: f64, hedge: Hedge) -> f64 {
    match hedge {
        Hedge::None => degree,
        Hedge::Very => degree * degree,
        Hedge::MoreOrLess => degree.sqrt(),
    }
}

/// Membership of `x` in `term` including complement and hedge.
pub fn term_degree(term: &FuzzyTerm, x: f64) -> f64 {
    let mu = membership(&term.shape, x);
    let mu = if term.complement { 1.0 - mu } else { mu };
    apply_hedge(mu, term.hedge)
}

/// Firing strength of one rule: weight times the MIN of its clause degrees.
pub fn rule_strength(system: &FuzzySystem, rule: &Rule, input: &CrispInput) -> Result<f64, InferenceError> {
    let mut strength = 1.0_f64;
    for clause in &rule.antecedent {
        let var = system
            .variable(&clause.variable)
            .ok_or_else(|| InferenceError::InvalidSystem(format!("unknown variable {}", clause.variable)))?;
        let term = var.term(&clause.term).ok_or_else(|| {
            InferenceError::InvalidSystem(format!("unknown term {}/{}", var.name, clause.term))
        })?;
        let x = input
            .get(&var.name)
            .ok_or_else(|| InferenceError::MissingInput(var.name.clone()))?;
        if !x.is_finite() {
            return Err(InferenceError::NonFinite(var.name.clone()));
        }
        strength = strength.min(term_degree(term, var.clamp(x)));
    }
    Ok(rule.weight * strength)
}

/// Centroid of `mu` over `samples` evenly spaced points of `[left, right]`.
pub fn defuzzify_cog(mu: impl Fn(f64) -> f64, left: f64, right: f64, samples: usize) -> Result<f64, InferenceError> {
    let grid = sample_grid(left, right, samples);
    let (mut num, mut den) = (0.0, 0.0);
    for &x in &grid {
        let m = mu(x);
        num += x * m;
        den += m;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(InferenceError::ZeroArea)
    }
}

type SampledTerms = (Vec<Vec<f64>>, Vec<Option<(usize, usize)>>);

fn sample_terms(terms: &[CompiledTerm], grid: &[f64]) -> SampledTerms {
    let table: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| grid.iter().map(|&x| t.degree(x)).collect())
        .collect();
    let support = table
        .iter()
        .map(|row| {
            let first = row.iter().position(|&m| m > 0.0)?;
            let last = row.iter().rposition(|&m| m > 0.0)?;
            Some((first, last))
        })
        .collect();
    (table, support)
}

fn sample_grid(left: f64, right: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let step = (right - left) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { right } else { left + i as f64 * step })
        .collect()
}

/// One-shot inference. Builds an [`Engine`] each call; reuse an engine when
/// evaluating many inputs against the same system.
pub fn infer(system: &FuzzySystem, input: &CrispInput) -> Result<InferenceResult, InferenceError> {
    Engine::new(system)?.infer(input)
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    shape: TrapezoidShape,
    complement: bool,
    hedge: Hedge,
}

impl CompiledTerm {
    fn from_term(t: &FuzzyTerm) -> Self {
        Self {
            shape: t.shape,
            complement: t.complement,
            hedge: t.hedge,
        }
    }

    fn degree(&self, x: f64) -> f64 {
        let mu = membership(&self.shape, x);
        let mu = if self.complement { 1.0 - mu } else { mu };
        apply_hedge(mu, self.hedge)
    }
}

#[derive(Debug, Clone)]
struct CompiledInput {
    name: String,
    left: f64,
    right: f64,
    /// Offset of this variable's first term in the flat degree buffer.
    offset: usize,
    terms: Vec<CompiledTerm>,
}

/// Rules sharing an antecedent prefix share a path; a zero degree prunes the
/// whole subtree.
#[derive(Debug, Clone, Default)]
struct RuleNode {
    /// Index into the flat degree buffer tested at this node.
    degree: usize,
    children: Vec<RuleNode>,
    /// `(consequent term, rule index)` of rules whose antecedent ends here.
    leaves: Vec<(usize, usize)>,
}

impl RuleNode {
    fn insert(nodes: &mut Vec<RuleNode>, path: &[usize], leaf: (usize, usize)) {
        let (first, rest) = path.split_first().expect("non-empty antecedent");
        let pos = match nodes.iter().position(|n| n.degree == *first) {
            Some(p) => p,
            None => {
                nodes.push(RuleNode {
                    degree: *first,
                    ..Default::default()
                });
                nodes.len() - 1
            }
        };
        if rest.is_empty() {
            nodes[pos].leaves.push(leaf);
        } else {
            Self::insert(&mut nodes[pos].children, rest, leaf);
        }
    }

    fn fire(nodes: &[RuleNode], upper: f64, degrees: &[f64], weights: &[f64], strengths: &mut [f64]) {
        for node in nodes {
            let s = upper.min(degrees[node.degree]);
            if s == 0.0 {
                continue;
            }
            for &(k, r) in &node.leaves {
                let v = weights[r] * s;
                if v > strengths[k] {
                    strengths[k] = v;
                }
            }
            Self::fire(&node.children, s, degrees, weights, strengths);
        }
    }
}

#[derive(Debug, Clone)]
struct CompiledOutput {
    name: String,
    left: f64,
    right: f64,
    default_value: f64,
    term_names: Arc<Vec<String>>,
    terms: Vec<CompiledTerm>,
    grid: Arc<Vec<f64>>,
    /// `table[k][i]`: hedged membership of output term `k` at `grid[i]`.
    table: Vec<Vec<f64>>,
    /// Inclusive index range where `table[k]` is non-zero; `None` if all zero.
    support: Vec<Option<(usize, usize)>>,
}

/// Reusable buffers for [`Engine::evaluate_with`].
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    degrees: Vec<f64>,
    strengths: Vec<f64>,
    aggregate: Vec<f64>,
}

/// Result of evaluating ordered inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub fired: bool,
    pub clamped: bool,
}

/// A system compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Engine {
    inputs: Vec<CompiledInput>,
    rules: Arc<Vec<RuleNode>>,
    weights: Vec<f64>,
    output: CompiledOutput,
    degree_len: usize,
}

impl Engine {
    pub fn new(system: &FuzzySystem) -> Result<Self, InferenceError> {
        Self::with_samples(system, DEFAULT_COG_SAMPLES)
    }

    pub fn with_samples(system: &FuzzySystem, samples: usize) -> Result<Self, InferenceError> {
        let mut inputs = Vec::new();
        let mut offset = 0;
        for var in system.inputs() {
            inputs.push(CompiledInput {
                name: var.name.clone(),
                left: var.domain_left,
                right: var.domain_right,
                offset,
                terms: var.terms.iter().map(CompiledTerm::from_term).collect(),
            });
            offset += var.terms.len();
        }
        let mut outputs = system.variables.iter().filter(|v| v.kind == VariableKind::Output);
        let out_var = outputs
            .next()
            .ok_or_else(|| InferenceError::InvalidSystem("no output variable".into()))?;
        if outputs.next().is_some() {
            return Err(InferenceError::InvalidSystem("more than one output variable".into()));
        }

        let mut flat: HashMap<(&str, &str), usize> = HashMap::new();
        for (input, var) in inputs.iter().zip(system.inputs()) {
            for (k, term) in var.terms.iter().enumerate() {
                flat.insert((var.name.as_str(), term.name.as_str()), input.offset + k);
            }
        }
        let out_terms: HashMap<&str, usize> = out_var
            .terms
            .iter()
            .enumerate()
            .map(|(k, t)| (t.name.as_str(), k))
            .collect();

        let mut rules = Vec::new();
        let mut clauses = Vec::new();
        for (r, rule) in system.rules.iter().enumerate() {
            clauses.clear();
            for clause in &rule.antecedent {
                let idx = flat
                    .get(&(clause.variable.as_str(), clause.term.as_str()))
                    .ok_or_else(|| {
                        InferenceError::InvalidSystem(format!(
                            "rule {} uses unknown input term {}/{}",
                            rule.name, clause.variable, clause.term
                        ))
                    })?;
                clauses.push(*idx);
            }
            if rule.consequent.variable != out_var.name {
                return Err(InferenceError::InvalidSystem(format!(
                    "rule {} does not target {}",
                    rule.name, out_var.name
                )));
            }
            let consequent = *out_terms.get(rule.consequent.term.as_str()).ok_or_else(|| {
                InferenceError::InvalidSystem(format!(
                    "rule {} uses unknown output term {}",
                    rule.name, rule.consequent.term
                ))
            })?;
            if clauses.is_empty() {
                return Err(InferenceError::InvalidSystem(format!("rule {} has no antecedent", rule.name)));
            }
            RuleNode::insert(&mut rules, &clauses, (consequent, r));
        }

        let terms: Vec<_> = out_var.terms.iter().map(CompiledTerm::from_term).collect();
        let grid = sample_grid(out_var.domain_left, out_var.domain_right, samples);
        let (table, support) = sample_terms(&terms, &grid);

        Ok(Self {
            inputs,
            rules: Arc::new(rules),
            weights: system.rules.iter().map(|r| r.weight).collect(),
            output: CompiledOutput {
                name: out_var.name.clone(),
                left: out_var.domain_left,
                right: out_var.domain_right,
                default_value: out_var.default_value,
                term_names: Arc::new(out_var.terms.iter().map(|t| t.name.clone()).collect()),
                terms,
                grid: Arc::new(grid),
                table,
                support,
            },
            degree_len: offset,
        })
    }

    /// A copy of this engine with new term shapes, hedges and rule weights.
    ///
    /// `shapes` and `hedges` list the inputs in engine order followed by the
    /// output; shapes must already be ordered. The rule structure is shared.
    pub fn retuned(&self, shapes: &[Vec<TrapezoidShape>], hedges: &[Hedge], weights: &[f64]) -> Result<Self, InferenceError> {
        let n = self.inputs.len() + 1;
        if shapes.len() != n || hedges.len() != n || weights.len() != self.weights.len() {
            return Err(InferenceError::InvalidSystem("retune dimensions do not match the engine".into()));
        }
        let retune = |terms: &[CompiledTerm], new: &[TrapezoidShape], hedge: Hedge| -> Result<Vec<CompiledTerm>, InferenceError> {
            if new.len() != terms.len() {
                return Err(InferenceError::InvalidSystem("retune term count does not match".into()));
            }
            Ok(terms
                .iter()
                .zip(new)
                .map(|(t, &shape)| CompiledTerm {
                    shape,
                    complement: t.complement,
                    hedge,
                })
                .collect())
        };
        let mut inputs = self.inputs.clone();
        for (i, input) in inputs.iter_mut().enumerate() {
            input.terms = retune(&input.terms, &shapes[i], hedges[i])?;
        }
        let mut output = self.output.clone();
        output.terms = retune(&output.terms, &shapes[n - 1], hedges[n - 1])?;
        let (table, support) = sample_terms(&output.terms, &output.grid);
        output.table = table;
        output.support = support;
        Ok(Self {
            inputs,
            rules: Arc::clone(&self.rules),
            weights: weights.to_vec(),
            output,
            degree_len: self.degree_len,
        })
    }

    /// Term count of each input in engine order, then of the output.
    pub fn term_counts(&self) -> Vec<usize> {
        self.inputs
            .iter()
            .map(|i| i.terms.len())
            .chain(std::iter::once(self.output.terms.len()))
            .collect()
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|i| i.name.as_str())
    }

    pub fn input_domains(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.inputs.iter().map(|i| (i.left, i.right))
    }

    pub fn output_name(&self) -> &str {
        &self.output.name
    }

    pub fn output_domain(&self) -> (f64, f64) {
        (self.output.left, self.output.right)
    }

    pub fn output_terms(&self) -> &[String] {
        &self.output.term_names
    }

    /// Evaluate inputs given in [`Engine::input_names`] order.
    pub fn evaluate(&self, values: &[f64]) -> Result<Evaluation, InferenceError> {
        self.evaluate_with(values, &mut Scratch::default())
    }

    pub fn evaluate_with(&self, values: &[f64], scratch: &mut Scratch) -> Result<Evaluation, InferenceError> {
        if values.len() != self.inputs.len() {
            let missing = self.inputs.get(values.len()).map(|i| i.name.clone()).unwrap_or_default();
            return Err(InferenceError::MissingInput(missing));
        }
        scratch.degrees.clear();
        scratch.degrees.resize(self.degree_len, 0.0);
        let mut clamped = false;
        for (input, &raw) in self.inputs.iter().zip(values) {
            if !raw.is_finite() {
                return Err(InferenceError::NonFinite(input.name.clone()));
            }
            let x = raw.clamp(input.left, input.right);
            if x != raw {
                clamped = true;
                log::warn!(
                    "input {}={} outside [{}, {}], clamped to {}",
                    input.name,
                    raw,
                    input.left,
                    input.right,
                    x
                );
            }
            for (k, term) in input.terms.iter().enumerate() {
                scratch.degrees[input.offset + k] = term.degree(x);
            }
        }

        // MAX over rules sharing a consequent; MIN implication commutes with it.
        let out = &self.output;
        scratch.strengths.clear();
        scratch.strengths.resize(out.terms.len(), 0.0);
        RuleNode::fire(&self.rules, 1.0, &scratch.degrees, &self.weights, &mut scratch.strengths);

        // Hedges are monotone, so hedge(min(s, mu)) == min(hedge(s), hedge(mu)).
        let mut lo = usize::MAX;
        let mut hi = 0;
        for (k, s) in scratch.strengths.iter_mut().enumerate() {
            *s = apply_hedge(*s, out.terms[k].hedge);
            if *s > 0.0 {
                if let Some((a, b)) = out.support[k] {
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
        }

        let (mut num, mut den) = (0.0, 0.0);
        if lo <= hi {
            let agg = &mut scratch.aggregate;
            agg.clear();
            agg.resize(hi - lo + 1, 0.0);
            for (k, &s) in scratch.strengths.iter().enumerate() {
                if s <= 0.0 {
                    continue;
                }
                if let Some((a, b)) = out.support[k] {
                    let row = &out.table[k][a..=b];
                    // Plain comparisons (no NaN handling) let this vectorise.
                    for (m, &mu) in agg[a - lo..=b - lo].iter_mut().zip(row) {
                        let v = if mu < s { mu } else { s };
                        *m = if v > *m { v } else { *m };
                    }
                }
            }
            // Four independent partial sums; the order is fixed, so results
            // stay deterministic.
            let grid = &out.grid[lo..=hi];
            let (mut n4, mut d4) = ([0.0f64; 4], [0.0f64; 4]);
            let mut xs = grid.chunks_exact(4);
            let mut ms = agg.chunks_exact(4);
            for (x, m) in (&mut xs).zip(&mut ms) {
                for j in 0..4 {
                    n4[j] += x[j] * m[j];
                    d4[j] += m[j];
                }
            }
            for (&x, &m) in xs.remainder().iter().zip(ms.remainder()) {
                n4[0] += x * m;
                d4[0] += m;
            }
            num = (n4[0] + n4[1]) + (n4[2] + n4[3]);
            den = (d4[0] + d4[1]) + (d4[2] + d4[3]);
        }
        if den > 0.0 {
            let value = (num / den).clamp(out.left, out.right);
            Ok(Evaluation {
                value,
                fired: true,
                clamped,
            })
        } else {
            Ok(Evaluation {
                value: out.default_value,
                fired: false,
                clamped,
            })
        }
    }

    /// Evaluate a named input map and label the result.
    pub fn infer(&self, input: &CrispInput) -> Result<InferenceResult, InferenceError> {
        let values = self
            .inputs
            .iter()
            .map(|i| input.get(&i.name).ok_or_else(|| InferenceError::MissingInput(i.name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let eval = self.evaluate(&values)?;
        Ok(self.label(eval))
    }

    pub fn label(&self, eval: Evaluation) -> InferenceResult {
        let out = &self.output;
        let term_degrees: Vec<(String, f64)> = out
            .term_names
            .iter()
            .zip(&out.terms)
            .map(|(n, t)| (n.clone(), t.degree(eval.value)))
            .collect();
        let mut best = 0;
        for (k, (_, d)) in term_degrees.iter().enumerate() {
            if *d > term_degrees[best].1 {
                best = k;
            }
        }
        InferenceResult {
            crisp_value: eval.value,
            winning_term: out.term_names[best].clone(),
            term_degrees,
            clamped: eval.clamped,
            fired: eval.fired,
        }
    }
}
