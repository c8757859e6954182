//! Rule bases for the assessment (256 rules) and recommendation (20 rules)
//! stages.
//!
//! Only a handful of assessment rules are known verbatim. The rest follow a
//! monotone integer score over term indices:
//! `4*SA - LCD + SCL + STS`, cut at 3 / 6 / 9 / 11 into the five SLP terms.

use crate::model::{
    Clause, Rule, LCD, LCD_TERMS, RLCR, SA, SA_TERMS, SCL, SCL_TERMS, SLP, SLP_TERMS, STS, STS_TERMS,
};

/// Term indices (0..=3) of one assessment rule's antecedent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermIndexTuple {
    pub sa: usize,
    pub lcd: usize,
    pub scl: usize,
    pub sts: usize,
}

impl TermIndexTuple {
    pub fn new(sa: usize, lcd: usize, scl: usize, sts: usize) -> Self {
        assert!(sa < 4 && lcd < 4 && scl < 4 && sts < 4, "term index out of range");
        Self { sa, lcd, scl, sts }
    }

    /// Decode the 1-based rule number (SA outermost, STS innermost).
    pub fn from_rule_number(k: usize) -> Self {
        assert!((1..=256).contains(&k), "rule number {k} out of range");
        let i = k - 1;
        Self::new(i / 64, (i / 16) % 4, (i / 4) % 4, i % 4)
    }

    pub fn score(&self) -> i32 {
        4 * self.sa as i32 - self.lcd as i32 + self.scl as i32 + self.sts as i32
    }
}

/// Index into [`SLP_TERMS`] for the given antecedent.
pub fn slp_category(t: TermIndexTuple) -> usize {
    match t.score() {
        s if s <= 3 => 0,
        4..=6 => 1,
        7..=9 => 2,
        10..=11 => 3,
        _ => 4,
    }
}

pub fn build_slp_rulebase() -> Vec<Rule> {
    (1..=256)
        .map(|k| {
            let t = TermIndexTuple::from_rule_number(k);
            Rule::new(
                format!("rule-{k}"),
                vec![
                    Clause::new(SA, SA_TERMS[t.sa]),
                    Clause::new(LCD, LCD_TERMS[t.lcd]),
                    Clause::new(SCL, SCL_TERMS[t.scl]),
                    Clause::new(STS, STS_TERMS[t.sts]),
                ],
                Clause::new(SLP, SLP_TERMS[slp_category(t)]),
            )
        })
        .collect()
}

pub const RLCR_TERMS: [&str; 8] = ["LGHIL", "LGAL", "CGEL", "CGIL", "CGHIL", "CGAL", "NGEL", "NGIL"];

/// `(SA term, SLP term) -> RLCR term` for the recommendation stage.
pub const RLCR_TABLE: [(&str, &str, &str); 20] = [
    ("BelowBasic", "FallBehind", "LGHIL"),
    ("BelowBasic", "Insufficient", "LGAL"),
    ("BelowBasic", "Basic", "LGAL"),
    ("BelowBasic", "Good", "CGEL"),
    ("BelowBasic", "Excellent", "CGIL"),
    ("Basic", "FallBehind", "LGAL"),
    ("Basic", "Insufficient", "CGEL"),
    ("Basic", "Basic", "CGIL"),
    ("Basic", "Good", "CGHIL"),
    ("Basic", "Excellent", "CGAL"),
    ("Proficient", "FallBehind", "CGIL"),
    ("Proficient", "Insufficient", "CGHIL"),
    ("Proficient", "Basic", "CGAL"),
    ("Proficient", "Good", "CGAL"),
    ("Proficient", "Excellent", "NGEL"),
    ("Advanced", "FallBehind", "CGAL"),
    ("Advanced", "Insufficient", "CGAL"),
    ("Advanced", "Basic", "NGEL"),
    ("Advanced", "Good", "NGIL"),
    ("Advanced", "Excellent", "NGIL"),
];

pub fn build_rlcr_rulebase() -> Vec<Rule> {
    RLCR_TABLE
        .iter()
        .enumerate()
        .map(|(i, (sa, slp, rlcr))| {
            Rule::new(
                format!("rule-{}", i + 1),
                vec![Clause::new(SA, *sa), Clause::new(SLP, *slp)],
                Clause::new(RLCR, *rlcr),
            )
        })
        .collect()
}
