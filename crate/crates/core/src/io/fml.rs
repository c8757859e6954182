//! Reader and writer for the FML (IEEE 1855 subset) XML dialect.
//!
//! Recognized tree:
//!
//! ```text
//! fuzzySystem
//!   knowledgeBase
//!     fuzzyVariable*
//!       fuzzyTerm*
//!         trapezoidShape
//!   mamdaniRuleBase | mandaniRuleBase
//!     rule*
//!       antecedent / clause* / (variable, term)
//!       consequent / [then] / clause / (variable, term)
//! ```
//!
//! Attribute names are matched case-insensitively. Attributes the model does
//! not interpret are kept in the owning element's `extra` map and written
//! back out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::model::{
    validate, Clause, Connector, FuzzySystem, FuzzyTerm, FuzzyVariable, Hedge, Rule, TermMeta,
    TrapezoidShape, VariableKind,
};

#[derive(Debug, Error)]
pub enum FmlError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unsupported membership shape <{0}>")]
    UnknownShape(String),
    #[error("unknown element <{element}> inside <{parent}>")]
    UnknownElement { element: String, parent: String },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("<{element}> is missing required attribute {attribute}")]
    MissingAttribute { element: String, attribute: String },
    #[error("<{element}> is missing child <{child}>")]
    MissingElement { element: String, child: String },
    #[error("invalid value {value:?} for {attribute} on <{element}>")]
    InvalidValue {
        element: String,
        attribute: String,
        value: String,
    },
    #[error("invalid system: {}", .0.join("; "))]
    InvalidSystem(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parser behaviour switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Skip unknown child elements with a warning instead of failing.
    pub lenient: bool,
}

#[derive(Debug, Default)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
}

impl Element {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, FmlError> {
        self.attr(key).ok_or_else(|| FmlError::MissingAttribute {
            element: self.name.clone(),
            attribute: key.to_string(),
        })
    }

    fn number(&self, key: &str) -> Result<Option<f64>, FmlError> {
        match self.attr(key) {
            None => Ok(None),
            Some(raw) => raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| self.invalid(key, raw)),
        }
    }

    fn required_number(&self, key: &str) -> Result<f64, FmlError> {
        self.number(key)?.ok_or_else(|| FmlError::MissingAttribute {
            element: self.name.clone(),
            attribute: key.to_string(),
        })
    }

    fn invalid(&self, key: &str, value: &str) -> FmlError {
        FmlError::InvalidValue {
            element: self.name.clone(),
            attribute: key.to_string(),
            value: value.to_string(),
        }
    }

    /// Attributes whose lowercase name is not in `known`.
    fn extras(&self, known: &[&str]) -> BTreeMap<String, String> {
        self.attrs
            .iter()
            .filter(|(k, _)| !known.iter().any(|n| n.eq_ignore_ascii_case(k)))
            .cloned()
            .collect()
    }

    fn is(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name)
    }
}

fn start_element(e: &BytesStart<'_>) -> Result<Element, FmlError> {
    let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| FmlError::MalformedXml(err.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|err| FmlError::MalformedXml(err.to_string()))?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        name,
        attrs,
        ..Default::default()
    })
}

fn parse_tree(text: &str) -> Result<Element, FmlError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let event = reader
            .read_event()
            .map_err(|e| FmlError::MalformedXml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(e) => stack.push(start_element(&e)?),
            Event::Empty(e) => {
                let el = start_element(&e)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(FmlError::MalformedXml("multiple root elements".into())),
                }
            }
            Event::End(_) => {
                let el = stack
                    .pop()
                    .ok_or_else(|| FmlError::MalformedXml("unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(FmlError::MalformedXml("multiple root elements".into())),
                }
            }
            Event::Text(t) => {
                let t = t.unescape().map_err(|e| FmlError::MalformedXml(e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&t),
                    None if t.trim().is_empty() => {}
                    None => return Err(FmlError::MalformedXml("text outside root element".into())),
                }
            }
            Event::CData(t) => {
                if let Some(el) = stack.last_mut() {
                    el.text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(FmlError::MalformedXml(format!("unclosed element <{}>", stack[stack.len() - 1].name)));
    }
    root.ok_or_else(|| FmlError::MalformedXml("document has no root element".into()))
}

struct Interp {
    opts: ParseOptions,
}

impl Interp {
    fn unknown(&self, el: &Element, parent: &Element) -> Result<(), FmlError> {
        if el.name.ends_with("Shape") {
            return Err(FmlError::UnknownShape(el.name.clone()));
        }
        if self.opts.lenient {
            log::warn!("skipping unknown element <{}> inside <{}>", el.name, parent.name);
            Ok(())
        } else {
            Err(FmlError::UnknownElement {
                element: el.name.clone(),
                parent: parent.name.clone(),
            })
        }
    }

    fn system(&self, root: &Element) -> Result<FuzzySystem, FmlError> {
        if !root.is("fuzzySystem") {
            return Err(FmlError::MalformedXml(format!(
                "root element is <{}>, expected <fuzzySystem>",
                root.name
            )));
        }
        let name = root.required("name")?.to_string();
        let mut system = FuzzySystem::new(name, Vec::new(), Vec::new());
        system.network_address = root.attr("networkAddress").map(str::to_string);
        system.extra = root.extras(&["name", "networkAddress"]);

        let mut seen_kb = false;
        for child in &root.children {
            if child.is("knowledgeBase") {
                seen_kb = true;
                for var in &child.children {
                    if var.is("fuzzyVariable") {
                        system.variables.push(self.variable(var)?);
                    } else {
                        self.unknown(var, child)?;
                    }
                }
            } else if child.is("mamdaniRuleBase") || child.is("mandaniRuleBase") {
                if let Some(n) = child.attr("name") {
                    system.rule_base_name = n.to_string();
                }
                for (key, expected) in [("activationMethod", "MIN"), ("andMethod", "MIN"), ("orMethod", "MAX")] {
                    check_method(child, key, expected)?;
                }
                for rule in &child.children {
                    if rule.is("rule") {
                        system.rules.push(self.rule(rule)?);
                    } else {
                        self.unknown(rule, child)?;
                    }
                }
            } else {
                self.unknown(child, root)?;
            }
        }
        if !seen_kb {
            return Err(FmlError::MissingElement {
                element: root.name.clone(),
                child: "knowledgeBase".into(),
            });
        }
        Ok(system)
    }

    fn variable(&self, el: &Element) -> Result<FuzzyVariable, FmlError> {
        let name = el.required("name")?;
        let left = el.required_number("domainLeft")?;
        let right = el.required_number("domainRight")?;
        let type_raw = el.required("type")?;
        let kind = match type_raw.to_ascii_lowercase().as_str() {
            "input" => VariableKind::Input,
            "output" => VariableKind::Output,
            _ => return Err(el.invalid("type", type_raw)),
        };
        check_method(el, "accumulation", "MAX")?;
        check_method(el, "defuzzifier", "COG")?;
        let mut var = FuzzyVariable::new(name, kind, (left, right), Vec::new());
        if let Some(v) = el.number("defaultValue")? {
            var.default_value = v;
        }
        var.extra = el.extras(&[
            "name",
            "domainLeft",
            "domainRight",
            "type",
            "accumulation",
            "defuzzifier",
            "defaultValue",
        ]);
        for child in &el.children {
            if child.is("fuzzyTerm") {
                var.terms.push(self.term(child)?);
            } else {
                self.unknown(child, el)?;
            }
        }
        Ok(var)
    }

    fn term(&self, el: &Element) -> Result<FuzzyTerm, FmlError> {
        let name = el.required("name")?;
        let complement = match el.attr("complement").map(str::to_ascii_lowercase).as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(el.invalid("complement", other)),
        };
        let hedge = match el.attr("hedge") {
            None => Hedge::None,
            Some(h) => Hedge::parse(h).ok_or_else(|| el.invalid("hedge", h))?,
        };
        let meta = TermMeta {
            area: el.attr("area").map(str::to_string),
            grade: el.attr("grade").map(str::to_string),
            subject: el.attr("subject").map(str::to_string),
        };
        let mut shape = None;
        for child in &el.children {
            if child.is("trapezoidShape") {
                shape = Some(TrapezoidShape::new(
                    child.required_number("param1")?,
                    child.required_number("param2")?,
                    child.required_number("param3")?,
                    child.required_number("param4")?,
                ));
            } else {
                self.unknown(child, el)?;
            }
        }
        let shape = shape.ok_or_else(|| FmlError::MissingElement {
            element: format!("fuzzyTerm name={name}"),
            child: "trapezoidShape".into(),
        })?;
        let mut term = FuzzyTerm::new(name, shape);
        term.complement = complement;
        term.hedge = hedge;
        term.meta = (!meta.is_empty()).then_some(meta);
        term.extra = el.extras(&["name", "complement", "hedge", "area", "grade", "subject"]);
        Ok(term)
    }

    fn rule(&self, el: &Element) -> Result<Rule, FmlError> {
        let name = el.required("name")?;
        let connector = match el.attr("connector").map(str::to_ascii_lowercase).as_deref() {
            None | Some("and") => Connector::And,
            Some("or") => Connector::Or,
            Some(other) => return Err(el.invalid("connector", other)),
        };
        check_method(el, "andMethod", "MIN")?;
        check_method(el, "orMethod", "MAX")?;
        let weight = el.number("weight")?.unwrap_or(1.0);
        let mut antecedent = Vec::new();
        let mut consequent = None;
        for child in &el.children {
            if child.is("antecedent") {
                for clause in &child.children {
                    if clause.is("clause") {
                        antecedent.push(self.clause(clause)?);
                    } else {
                        self.unknown(clause, child)?;
                    }
                }
            } else if child.is("consequent") {
                for part in &child.children {
                    if part.is("then") {
                        for clause in &part.children {
                            if clause.is("clause") {
                                consequent = Some(self.clause(clause)?);
                            } else {
                                self.unknown(clause, part)?;
                            }
                        }
                    } else if part.is("clause") {
                        consequent = Some(self.clause(part)?);
                    } else {
                        self.unknown(part, child)?;
                    }
                }
            } else {
                self.unknown(child, el)?;
            }
        }
        let consequent = consequent.ok_or_else(|| FmlError::MissingElement {
            element: format!("rule name={name}"),
            child: "consequent".into(),
        })?;
        let mut rule = Rule::new(name, antecedent, consequent);
        rule.connector = connector;
        rule.weight = weight;
        rule.extra = el.extras(&["name", "connector", "andMethod", "orMethod", "weight"]);
        Ok(rule)
    }

    fn clause(&self, el: &Element) -> Result<Clause, FmlError> {
        let mut variable = None;
        let mut term = None;
        for child in &el.children {
            if child.is("variable") {
                variable = Some(child.text.trim().to_string());
            } else if child.is("term") {
                term = Some(child.text.trim().to_string());
            } else {
                self.unknown(child, el)?;
            }
        }
        let missing = |child: &str| FmlError::MissingElement {
            element: "clause".into(),
            child: child.into(),
        };
        Ok(Clause::new(variable.ok_or_else(|| missing("variable"))?, term.ok_or_else(|| missing("term"))?))
    }
}

fn check_method(el: &Element, key: &str, expected: &str) -> Result<(), FmlError> {
    match el.attr(key) {
        Some(v) if !v.eq_ignore_ascii_case(expected) => Err(el.invalid(key, v)),
        _ => Ok(()),
    }
}

fn check_references(system: &FuzzySystem) -> Result<(), FmlError> {
    for rule in &system.rules {
        for clause in rule.antecedent.iter().chain(std::iter::once(&rule.consequent)) {
            let known = system
                .variable(&clause.variable)
                .map(|v| v.term(&clause.term).is_some())
                .unwrap_or(false);
            if !known {
                return Err(FmlError::DanglingReference(format!(
                    "rule {} refers to {}/{}",
                    rule.name, clause.variable, clause.term
                )));
            }
        }
    }
    Ok(())
}

pub fn parse_fml(doc: &str) -> Result<FuzzySystem, FmlError> {
    parse_fml_with(doc, ParseOptions::default())
}

pub fn parse_fml_with(doc: &str, opts: ParseOptions) -> Result<FuzzySystem, FmlError> {
    let root = parse_tree(doc)?;
    let system = Interp { opts }.system(&root)?;
    check_references(&system)?;
    let violations = validate(&system);
    if !violations.is_empty() {
        return Err(FmlError::InvalidSystem(violations.iter().map(|v| v.to_string()).collect()));
    }
    Ok(system)
}

pub fn read_fml_file(path: impl AsRef<Path>) -> Result<FuzzySystem, FmlError> {
    parse_fml(&fs::read_to_string(path)?)
}

pub fn write_fml_file(system: &FuzzySystem, path: impl AsRef<Path>) -> Result<(), FmlError> {
    fs::write(path, serialize_fml(system)?)?;
    Ok(())
}

/// Shortest decimal text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn attr(out: &mut String, key: &str, value: &str) {
    let _ = write!(out, " {key}=\"{}\"", escape(value));
}

fn extras(out: &mut String, extra: &BTreeMap<String, String>) {
    for (k, v) in extra {
        attr(out, k, v);
    }
}

fn text_el(out: &mut String, indent: &str, name: &str, text: &str) {
    let _ = writeln!(out, "{indent}<{name}>{}</{name}>", escape(text));
}

fn clause(out: &mut String, indent: &str, c: &Clause) {
    let _ = writeln!(out, "{indent}<clause>");
    text_el(out, &format!("{indent}  "), "variable", &c.variable);
    text_el(out, &format!("{indent}  "), "term", &c.term);
    let _ = writeln!(out, "{indent}</clause>");
}

pub fn serialize_fml(system: &FuzzySystem) -> Result<String, FmlError> {
    let violations = validate(system);
    if !violations.is_empty() {
        return Err(FmlError::InvalidSystem(violations.iter().map(|v| v.to_string()).collect()));
    }
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<fuzzySystem");
    attr(&mut out, "name", &system.name);
    if let Some(addr) = &system.network_address {
        attr(&mut out, "networkAddress", addr);
    }
    extras(&mut out, &system.extra);
    out.push_str(">\n");

    out.push_str("  <knowledgeBase");
    if let Some(addr) = &system.network_address {
        attr(&mut out, "networkAddress", addr);
    }
    out.push_str(">\n");
    for var in &system.variables {
        out.push_str("    <fuzzyVariable");
        attr(&mut out, "name", &var.name);
        attr(&mut out, "domainLeft", &num(var.domain_left));
        attr(&mut out, "domainRight", &num(var.domain_right));
        attr(&mut out, "type", var.kind.as_str());
        attr(&mut out, "accumulation", "MAX");
        attr(&mut out, "defuzzifier", "COG");
        attr(&mut out, "defaultValue", &num(var.default_value));
        extras(&mut out, &var.extra);
        out.push_str(">\n");
        for term in &var.terms {
            out.push_str("      <fuzzyTerm");
            attr(&mut out, "name", &term.name);
            attr(&mut out, "complement", if term.complement { "true" } else { "false" });
            if term.hedge != Hedge::None {
                attr(&mut out, "hedge", term.hedge.as_str());
            }
            if let Some(meta) = &term.meta {
                for (k, v) in [("area", &meta.area), ("grade", &meta.grade), ("subject", &meta.subject)] {
                    if let Some(v) = v {
                        attr(&mut out, k, v);
                    }
                }
            }
            extras(&mut out, &term.extra);
            out.push_str(">\n");
            let s = term.shape;
            let _ = writeln!(
                out,
                "        <trapezoidShape param1=\"{}\" param2=\"{}\" param3=\"{}\" param4=\"{}\"/>",
                num(s.a),
                num(s.b),
                num(s.c),
                num(s.d)
            );
            out.push_str("      </fuzzyTerm>\n");
        }
        out.push_str("    </fuzzyVariable>\n");
    }
    out.push_str("  </knowledgeBase>\n");

    out.push_str("  <mamdaniRuleBase");
    attr(&mut out, "name", &system.rule_base_name);
    attr(&mut out, "activationMethod", "MIN");
    attr(&mut out, "andMethod", "MIN");
    attr(&mut out, "orMethod", "MAX");
    if let Some(addr) = &system.network_address {
        attr(&mut out, "networkAddress", addr);
    }
    out.push_str(">\n");
    for rule in &system.rules {
        out.push_str("    <rule");
        attr(&mut out, "name", &rule.name);
        attr(&mut out, "andMethod", "MIN");
        attr(&mut out, "orMethod", "MAX");
        attr(&mut out, "connector", if rule.connector == Connector::And { "AND" } else { "OR" });
        attr(&mut out, "weight", &num(rule.weight));
        extras(&mut out, &rule.extra);
        out.push_str(">\n      <antecedent>\n");
        for c in &rule.antecedent {
            clause(&mut out, "        ", c);
        }
        out.push_str("      </antecedent>\n      <consequent>\n        <then>\n");
        clause(&mut out, "          ", &rule.consequent);
        out.push_str("        </then>\n      </consequent>\n    </rule>\n");
    }
    out.push_str("  </mamdaniRuleBase>\n</fuzzySystem>\n");
    Ok(out)
}
