//! Knowledge-base and rule-base types shared across the crate.
//!
//! A [`FuzzySystem`] bundles the fuzzy variables (each a list of trapezoid
//! terms over a bounded domain) with a Mamdani rule base. Systems are plain
//! data: construct them directly, through [`baseline_part1_system`], or by
//! parsing an FML document.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rulegen;

/// Trapezoid membership parameters `a <= b <= c <= d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidShape {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TrapezoidShape {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_params(p: [f64; 4]) -> Self {
        Self::new(p[0], p[1], p[2], p[3])
    }

    pub fn params(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_ordered(&self) -> bool {
        self.a <= self.b && self.b <= self.c && self.c <= self.d
    }

    /// Clamp every parameter into `[left, right]` and sort ascending.
    pub fn repaired(&self, left: f64, right: f64) -> Self {
        let mut p = self.params().map(|v| {
            if v.is_nan() {
                left
            } else {
                v.clamp(left, right)
            }
        });
        p.sort_by(f64::total_cmp);
        Self::from_params(p)
    }
}

/// Linguistic hedge applied to a membership degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Hedge {
    #[default]
    None,
    Very,
    MoreOrLess,
}

impl Hedge {
    pub const ALL: [Hedge; 3] = [Hedge::None, Hedge::Very, Hedge::MoreOrLess];

    pub fn as_str(&self) -> &'static str {
        match self {
            Hedge::None => "none",
            Hedge::Very => "very",
            Hedge::MoreOrLess => "moreOrLess",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "" | "none" => Some(Hedge::None),
            "very" => Some(Hedge::Very),
            "moreorless" | "more_or_less" | "somewhat" => Some(Hedge::MoreOrLess),
            _ => None,
        }
    }
}

/// Ontology attributes attached to a linguistic concept.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TermMeta {
    pub area: Option<String>,
    pub grade: Option<String>,
    pub subject: Option<String>,
}

impl TermMeta {
    pub fn is_empty(&self) -> bool {
        self.area.is_none() && self.grade.is_none() && self.subject.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyTerm {
    pub name: String,
    pub shape: TrapezoidShape,
    pub complement: bool,
    pub hedge: Hedge,
    pub meta: Option<TermMeta>,
    /// Attributes carried through from a parsed document but not interpreted.
    pub extra: BTreeMap<String, String>,
}

impl FuzzyTerm {
    pub fn new(name: impl Into<String>, shape: TrapezoidShape) -> Self {
        Self {
            name: name.into(),
            shape,
            complement: false,
            hedge: Hedge::None,
            meta: None,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableKind {
    Input,
    Output,
}

impl VariableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableKind::Input => "Input",
            VariableKind::Output => "Output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Accumulation {
    #[default]
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Defuzzifier {
    #[default]
    Cog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    pub name: String,
    pub domain_left: f64,
    pub domain_right: f64,
    pub kind: VariableKind,
    pub accumulation: Accumulation,
    pub defuzzifier: Defuzzifier,
    pub default_value: f64,
    pub terms: Vec<FuzzyTerm>,
    pub extra: BTreeMap<String, String>,
}

impl FuzzyVariable {
    pub fn new(
        name: impl Into<String>,
        kind: VariableKind,
        domain: (f64, f64),
        terms: Vec<FuzzyTerm>,
    ) -> Self {
        Self {
            name: name.into(),
            domain_left: domain.0,
            domain_right: domain.1,
            kind,
            accumulation: Accumulation::Max,
            defuzzifier: Defuzzifier::Cog,
            default_value: 0.0_f64.clamp(domain.0, domain.1),
            terms,
            extra: BTreeMap::new(),
        }
    }

    /// Convenience constructor from `(name, [a, b, c, d])` pairs.
    pub fn with_shapes(
        name: &str,
        kind: VariableKind,
        domain: (f64, f64),
        shapes: &[(&str, [f64; 4])],
    ) -> Self {
        let terms = shapes
            .iter()
            .map(|(n, p)| FuzzyTerm::new(*n, TrapezoidShape::from_params(*p)))
            .collect();
        Self::new(name, kind, domain, terms)
    }

    pub fn width(&self) -> f64 {
        self.domain_right - self.domain_left
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    pub fn term(&self, name: &str) -> Option<&FuzzyTerm> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.domain_left, self.domain_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connector {
    #[default]
    And,
    Or,
}

/// One `(variable, term)` reference inside a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub variable: String,
    pub term: String,
}

impl Clause {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            term: term.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub antecedent: Vec<Clause>,
    pub consequent: Clause,
    pub connector: Connector,
    pub weight: f64,
    pub extra: BTreeMap<String, String>,
}

impl Rule {
    pub fn new(name: impl Into<String>, antecedent: Vec<Clause>, consequent: Clause) -> Self {
        Self {
            name: name.into(),
            antecedent,
            consequent,
            connector: Connector::And,
            weight: 1.0,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySystem {
    pub name: String,
    pub network_address: Option<String>,
    pub rule_base_name: String,
    pub variables: Vec<FuzzyVariable>,
    pub rules: Vec<Rule>,
    pub extra: BTreeMap<String, String>,
}

impl FuzzySystem {
    pub fn new(name: impl Into<String>, variables: Vec<FuzzyVariable>, rules: Vec<Rule>) -> Self {
        let name = name.into();
        Self {
            rule_base_name: name.clone(),
            name,
            network_address: None,
            variables,
            rules,
            extra: BTreeMap::new(),
        }
    }

    pub fn variable(&self, name: &str) -> Option<&FuzzyVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variable_mut(&mut self, name: &str) -> Option<&mut FuzzyVariable> {
        self.variables.iter_mut().find(|v| v.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &FuzzyVariable> {
        self.variables
            .iter()
            .filter(|v| v.kind == VariableKind::Input)
    }

    /// The first output variable. Validated systems have exactly one.
    pub fn output(&self) -> Option<&FuzzyVariable> {
        self.variables
            .iter()
            .find(|v| v.kind == VariableKind::Output)
    }
}

/// A broken invariant, located by the element it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Check every structural invariant of `system`; an empty list means valid.
pub fn validate(system: &FuzzySystem) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: String| out.push(Violation { location, message });

    let mut seen_vars = HashSet::new();
    for var in &system.variables {
        let loc = format!("variable {}", var.name);
        if !seen_vars.insert(var.name.as_str()) {
            push(loc.clone(), "duplicate variable name".into());
        }
        if !(var.domain_left < var.domain_right) {
            push(
                loc.clone(),
                format!(
                    "domainLeft {} must be below domainRight {}",
                    var.domain_left, var.domain_right
                ),
            );
        }
        if !(var.default_value >= var.domain_left && var.default_value <= var.domain_right) {
            push(
                loc.clone(),
                format!("defaultValue {} outside domain", var.default_value),
            );
        }
        if var.terms.len() < 2 {
            push(loc.clone(), format!("needs at least 2 terms, has {}", var.terms.len()));
        }
        let mut seen_terms = HashSet::new();
        for term in &var.terms {
            let tloc = format!("variable {}/term {}", var.name, term.name);
            if !seen_terms.insert(term.name.as_str()) {
                push(tloc.clone(), "duplicate term name".into());
            }
            let s = term.shape;
            if s.params().iter().any(|p| !p.is_finite()) {
                push(tloc.clone(), "non-finite shape parameter".into());
            } else {
                if !s.is_ordered() {
                    push(
                        tloc.clone(),
                        format!("shape [{}, {}, {}, {}] is not ordered", s.a, s.b, s.c, s.d),
                    );
                }
                if s.a < var.domain_left || s.d > var.domain_right {
                    push(tloc.clone(), "shape support leaves the variable domain".into());
                }
            }
            if let Some(meta) = &term.meta {
                for (key, val) in [("area", &meta.area), ("grade", &meta.grade), ("subject", &meta.subject)] {
                    if matches!(val, Some(v) if v.trim().is_empty()) {
                        push(tloc.clone(), format!("empty {key} attribute"));
                    }
                }
            }
        }
    }

    let outputs: Vec<_> = system
        .variables
        .iter()
        .filter(|v| v.kind == VariableKind::Output)
        .collect();
    if outputs.len() != 1 {
        push(
            format!("system {}", system.name),
            format!("expected exactly one output variable, found {}", outputs.len()),
        );
    }

    for rule in &system.rules {
        let loc = format!("rule {}", rule.name);
        if !(0.0..=1.0).contains(&rule.weight) {
            push(loc.clone(), format!("weight {} outside [0, 1]", rule.weight));
        }
        if rule.connector == Connector::Or {
            push(loc.clone(), "OR connector is not supported".into());
        }
        if rule.antecedent.is_empty() {
            push(loc.clone(), "empty antecedent".into());
        }
        for clause in &rule.antecedent {
            match system.variable(&clause.variable) {
                None => push(loc.clone(), format!("unknown variable {}", clause.variable)),
                Some(v) if v.kind != VariableKind::Input => {
                    push(loc.clone(), format!("antecedent uses non-input {}", v.name))
                }
                Some(v) if v.term(&clause.term).is_none() => push(
                    loc.clone(),
                    format!("unknown term {} of {}", clause.term, clause.variable),
                ),
                _ => {}
            }
        }
        match system.variable(&rule.consequent.variable) {
            None => push(
                loc.clone(),
                format!("unknown consequent variable {}", rule.consequent.variable),
            ),
            Some(v) => {
                if v.kind != VariableKind::Output {
                    push(loc.clone(), format!("consequent targets non-output {}", v.name));
                }
                if v.term(&rule.consequent.term).is_none() {
                    push(
                        loc.clone(),
                        format!("unknown term {} of {}", rule.consequent.term, v.name),
                    );
                }
            }
        }
    }
    out
}

pub const SA: &str = "SA";
pub const LCD: &str = "LCD";
pub const SCL: &str = "SCL";
pub const STS: &str = "STS";
pub const SLP: &str = "SLP";
pub const RLCR: &str = "RLCR";

pub const SA_TERMS: [&str; 4] = ["BelowBasic", "Basic", "Proficient", "Advanced"];
pub const LCD_TERMS: [&str; 4] = ["VeryEasy", "Easy", "Average", "Hard"];
pub const SCL_TERMS: [&str; 4] = ["Distracted", "Nonfocused", "Focused", "Absorbed"];
pub const STS_TERMS: [&str; 4] = ["Passive", "Normal", "Initiative", "Positive"];
pub const SLP_TERMS: [&str; 5] = ["FallBehind", "Insufficient", "Basic", "Good", "Excellent"];

const ABILITY_SHAPES: [[f64; 4]; 4] = [
    [-4.0, -4.0, -1.11, -0.6],
    [-1.11, -0.6, 0.05, 0.4],
    [0.05, 0.4, 0.95, 1.5],
    [0.95, 1.5, 4.0, 4.0],
];
const BEHAVIOUR_SHAPES: [[f64; 4]; 4] = [
    [0.0, 0.0, 2.0, 3.0],
    [2.0, 3.0, 4.0, 5.0],
    [4.0, 5.0, 6.0, 7.0],
    [6.0, 7.0, 10.0, 10.0],
];
const SLP_SHAPES: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.2, 0.3],
    [0.2, 0.3, 0.4, 0.5],
    [0.4, 0.5, 0.6, 0.7],
    [0.6, 0.7, 0.8, 0.9],
    [0.8, 0.9, 1.0, 1.0],
];

fn variable_from(name: &str, kind: VariableKind, domain: (f64, f64), names: &[&str], shapes: &[[f64; 4]]) -> FuzzyVariable {
    let pairs: Vec<_> = names.iter().copied().zip(shapes.iter().copied()).collect();
    FuzzyVariable::with_shapes(name, kind, domain, &pairs)
}

/// The untuned learning-performance assessment system: four inputs, the
/// five-term SLP output and the full 256-rule base.
pub fn baseline_part1_system() -> FuzzySystem {
    let variables = vec![
        variable_from(SA, VariableKind::Input, (-4.0, 4.0), &SA_TERMS, &ABILITY_SHAPES),
        variable_from(LCD, VariableKind::Input, (-4.0, 4.0), &LCD_TERMS, &ABILITY_SHAPES),
        variable_from(SCL, VariableKind::Input, (0.0, 10.0), &SCL_TERMS, &BEHAVIOUR_SHAPES),
        variable_from(STS, VariableKind::Input, (0.0, 10.0), &STS_TERMS, &BEHAVIOUR_SHAPES),
        variable_from(SLP, VariableKind::Output, (0.0, 1.0), &SLP_TERMS, &SLP_SHAPES),
    ];
    let mut system = FuzzySystem::new("SLFSystemRB", variables, rulegen::build_slp_rulebase());
    system.network_address = Some("127.0.0.1".into());
    system
}
