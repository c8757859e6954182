//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any hard criterion fails.
//!
//! Learning runs at full scale (300 generations, 5 folds, 400 records), so
//! this target takes a few minutes on a single core.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::Command;
use std::time::{Duration, Instant};

use fml_core::dataset::{gen_rlcr_dataset, gen_slp_dataset, rlcr_oracle, DEFAULT_NOISE_SIGMA, PAPER_RLCR_ROWS};
use fml_core::io::{parse_fml, serialize_fml};
use fml_core::learn::{cross_validate, LearnConfig, LearnReport, Method};
use fml_core::model::{
    baseline_part1_system, validate, Clause, FuzzySystem, FuzzyVariable, Hedge, Rule, TermMeta, TrapezoidShape,
    VariableKind,
};
use fml_core::recommend::{accuracy, build_part2_system, ContentGraph};
use fml_core::rulegen::{build_rlcr_rulebase, build_slp_rulebase};
use fml_core::service::{Server, Service};
use fml_core::{infer, CrispInput, Engine};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Tolerances.
const CLOSED_FORM_TOL: f64 = 1e-3;
const ORACLE_TOL: f64 = 1e-3;
const REFINEMENT_TOL: f64 = 1e-3;
const IMPROVEMENT_RATIO: f64 = 0.8;
const ACCURACY_BAND: (f64, f64) = (0.6, 0.95);
const ACCURACY_THRESHOLD: f64 = 1.0;
const SERVICE_TOL: f64 = 1e-9;
const RUNTIME_TARGET: Duration = Duration::from_secs(120);
/// Generations per run for the five-seed GA/PSO comparison.
const TREND_GENERATIONS: usize = 60;
const TREND_SEEDS: [u64; 5] = [42, 43, 44, 45, 46];

#[derive(PartialEq)]
enum Status {
    Pass,
    Soft,
    Fail,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

// ---------------------------------------------------------------------------
// Fixtures

const SLP_ANCHORS: [(usize, [&str; 5]); 17] = [
    (1, ["BelowBasic", "VeryEasy", "Distracted", "Passive", "FallBehind"]),
    (2, ["BelowBasic", "VeryEasy", "Distracted", "Normal", "FallBehind"]),
    (3, ["BelowBasic", "VeryEasy", "Distracted", "Initiative", "FallBehind"]),
    (4, ["BelowBasic", "VeryEasy", "Distracted", "Positive", "FallBehind"]),
    (5, ["BelowBasic", "VeryEasy", "Nonfocused", "Passive", "FallBehind"]),
    (6, ["BelowBasic", "VeryEasy", "Nonfocused", "Normal", "FallBehind"]),
    (7, ["BelowBasic", "VeryEasy", "Nonfocused", "Initiative", "FallBehind"]),
    (8, ["BelowBasic", "VeryEasy", "Nonfocused", "Positive", "Insufficient"]),
    (9, ["BelowBasic", "VeryEasy", "Focused", "Passive", "FallBehind"]),
    (10, ["BelowBasic", "VeryEasy", "Focused", "Normal", "FallBehind"]),
    (250, ["Advanced", "Hard", "Focused", "Normal", "Excellent"]),
    (251, ["Advanced", "Hard", "Focused", "Initiative", "Excellent"]),
    (252, ["Advanced", "Hard", "Focused", "Positive", "Excellent"]),
    (253, ["Advanced", "Hard", "Absorbed", "Passive", "Excellent"]),
    (254, ["Advanced", "Hard", "Absorbed", "Normal", "Excellent"]),
    (255, ["Advanced", "Hard", "Absorbed", "Initiative", "Excellent"]),
    (256, ["Advanced", "Hard", "Absorbed", "Positive", "Excellent"]),
];

const RLCR_RULES: [[&str; 3]; 20] = [
    ["BelowBasic", "FallBehind", "LGHIL"],
    ["BelowBasic", "Insufficient", "LGAL"],
    ["BelowBasic", "Basic", "LGAL"],
    ["BelowBasic", "Good", "CGEL"],
    ["BelowBasic", "Excellent", "CGIL"],
    ["Basic", "FallBehind", "LGAL"],
    ["Basic", "Insufficient", "CGEL"],
    ["Basic", "Basic", "CGIL"],
    ["Basic", "Good", "CGHIL"],
    ["Basic", "Excellent", "CGAL"],
    ["Proficient", "FallBehind", "CGIL"],
    ["Proficient", "Insufficient", "CGHIL"],
    ["Proficient", "Basic", "CGAL"],
    ["Proficient", "Good", "CGAL"],
    ["Proficient", "Excellent", "NGEL"],
    ["Advanced", "FallBehind", "CGAL"],
    ["Advanced", "Insufficient", "CGAL"],
    ["Advanced", "Basic", "NGEL"],
    ["Advanced", "Good", "NGIL"],
    ["Advanced", "Excellent", "NGIL"],
];

/// `(sa, slp, desired rank)` rows.
const RANK_ROWS: [(f64, f64, f64); 15] = [
    (-1.43, 0.111, -1.99067),
    (-1.03, 0.167, -1.57467),
    (-2.23, 0.098, -2.55867),
    (-1.88, 0.11, -2.29333),
    (-3.74, 0.113, -3.52533),
    (-2.87, 0.116, -2.93733),
    (-1.68, 0.153, -2.04533),
    (-0.97, 0.117, -1.668),
    (-1.5, 0.105, -2.05333),
    (-2.65, 0.112, -2.80133),
    (2.87, 0.903, 2.988),
    (3.71, 0.902, 3.545333),
    (1.43, 0.803, 1.761333),
    (1.61, 0.85, 2.006667),
    (1.57, 0.907, 2.132),
];

const SA_DOCUMENT: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<fuzzySystem name="SLFSystemRB" networkAddress="127.0.0.1">
  <knowledgeBase networkAddress="127.0.0.1">
    <fuzzyVariable name="SA" domainleft="-4" domainright="4" scale="" type="input" accumulation="MAX" defuzzifier="COG" defaultValue="0.0" networkAddress="127.0.0.1">
      <fuzzyTerm name="BelowBasic" complement="false"><trapezoidShape param1="-4" param2="-4" param3="-1.11" param4="-0.6"/></fuzzyTerm>
      <fuzzyTerm name="Basic" complement="false"><trapezoidShape param1="-1.11" param2="-0.6" param3="0.05" param4="0.4"/></fuzzyTerm>
      <fuzzyTerm name="Proficient" complement="false"><trapezoidShape param1="0.05" param2="0.4" param3="0.95" param4="1.5"/></fuzzyTerm>
      <fuzzyTerm name="Advanced" complement="false"><trapezoidShape param1="0.95" param2="1.5" param3="4" param4="4"/></fuzzyTerm>
    </fuzzyVariable>
    <fuzzyVariable name="SLP" domainleft="0" domainright="1" scale="" type="output" accumulation="MAX" defuzzifier="COG" defaultValue="0.0" networkAddress="127.0.0.1">
      <fuzzyTerm name="FallBehind" complement="false"><trapezoidShape param1="0" param2="0" param3="0.2" param4="0.3"/></fuzzyTerm>
      <fuzzyTerm name="Excellent" complement="false"><trapezoidShape param1="0.8" param2="0.9" param3="1" param4="1"/></fuzzyTerm>
    </fuzzyVariable>
  </knowledgeBase>
  <mamdaniRuleBase name="SLFSystemRB" activationMethod="MIN" andMethod="MIN" orMethod="MAX" networkAddress="127.0.0.1">
    <rule name="rule-1" andMethod="MIN" orMethod="MAX" connector="and" weight="1.0" networkAddress="127.0.0.1">
      <antecedent><clause><variable>SA</variable><term>BelowBasic</term></clause></antecedent>
      <consequent><clause><variable>SLP</variable><term>FallBehind</term></clause></consequent>
    </rule>
  </mamdaniRuleBase>
</fuzzySystem>
"#;

const SA_PARAMS: [[f64; 4]; 4] = [
    [-4.0, -4.0, -1.11, -0.6],
    [-1.11, -0.6, 0.05, 0.4],
    [0.05, 0.4, 0.95, 1.5],
    [0.95, 1.5, 4.0, 4.0],
];

// ---------------------------------------------------------------------------
// Criteria

fn rule_terms(rule: &Rule) -> Vec<&str> {
    rule.antecedent
        .iter()
        .chain(std::iter::once(&rule.consequent))
        .map(|c| c.term.as_str())
        .collect()
}

fn c1_rule_anchors() -> Outcome {
    let t = Instant::now();
    let rules = build_slp_rulebase();
    let matched = SLP_ANCHORS
        .iter()
        .filter(|(k, terms)| rule_terms(&rules[k - 1]) == terms.as_slice() && rules[k - 1].weight == 1.0)
        .count();
    let elapsed = t.elapsed();
    check(
        matched == 17 && rules.len() == 256 && elapsed < Duration::from_secs(1),
        format!("{matched}/17 anchor rules exact, {} rules, {:.3}s", rules.len(), elapsed.as_secs_f64()),
    )
}

fn c2_recommendation_rules() -> Outcome {
    let rules = build_rlcr_rulebase();
    let matched = rules
        .iter()
        .zip(RLCR_RULES)
        .filter(|(r, expected)| rule_terms(r) == expected.as_slice() && r.weight == 1.0)
        .count();
    check(matched == 20 && rules.len() == 20, format!("{matched}/20 rules exact"))
}

fn c3_rank_oracle() -> Outcome {
    let worst = RANK_ROWS
        .iter()
        .map(|&(sa, slp, want)| (rlcr_oracle(sa, slp) - want).abs())
        .fold(0.0, f64::max);
    let inputs_match = PAPER_RLCR_ROWS
        .iter()
        .zip(RANK_ROWS)
        .all(|(&(a, b), (sa, slp, _))| a == sa && b == slp);
    check(
        worst <= ORACLE_TOL && inputs_match,
        format!("15 rows, max |error| {worst:.2e} (tol {ORACLE_TOL:e})"),
    )
}

/// Centroid of a trapezoid by exact piecewise integration.
fn trapezoid_centroid([a, b, c, d]: [f64; 4]) -> f64 {
    let mut area = c - b;
    let mut moment = (c * c - b * b) / 2.0;
    if b > a {
        area += (b - a) / 2.0;
        moment += (b - a) / 2.0 * (a + 2.0 * (b - a) / 3.0);
    }
    if d > c {
        area += (d - c) / 2.0;
        moment += (d - c) / 2.0 * (c + (d - c) / 3.0);
    }
    moment / area
}

fn symmetric_system() -> FuzzySystem {
    let x = FuzzyVariable::with_shapes(
        "X",
        VariableKind::Input,
        (0.0, 1.0),
        &[("Low", [0.0, 0.0, 0.4, 0.6]), ("High", [0.4, 0.6, 1.0, 1.0])],
    );
    let y = FuzzyVariable::with_shapes(
        "Y",
        VariableKind::Output,
        (0.0, 1.0),
        &[("Mid", [0.4, 0.5, 0.6, 0.7]), ("Top", [0.8, 0.9, 1.0, 1.0])],
    );
    let rule = Rule::new("rule-1", vec![Clause::new("X", "Low")], Clause::new("Y", "Mid"));
    FuzzySystem::new("Symmetric", vec![x, y], vec![rule])
}

fn baseline_input(v: [f64; 4]) -> CrispInput {
    CrispInput::from_pairs([("SA", v[0]), ("LCD", v[1]), ("SCL", v[2]), ("STS", v[3])])
}

fn c4_inference() -> Outcome {
    let base = baseline_part1_system();
    let single = infer(&base, &baseline_input([-3.0, -3.0, 1.0, 1.0])).unwrap().crisp_value;
    let single_oracle = trapezoid_centroid([0.0, 0.0, 0.2, 0.3]);
    let sym = infer(&symmetric_system(), &CrispInput::new().with("X", 0.1)).unwrap().crisp_value;

    let coarse = Engine::new(&base).unwrap();
    let fine = Engine::with_samples(&base, 20_001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for _ in 0..300 {
        let v = [
            rng.gen_range(-4.0..=4.0),
            rng.gen_range(-4.0..=4.0),
            rng.gen_range(0.0..=10.0),
            rng.gen_range(0.0..=10.0),
        ];
        let input = baseline_input(v);
        let a = coarse.infer(&input).unwrap().crisp_value;
        let b = fine.infer(&input).unwrap().crisp_value;
        worst = worst.max((a - b).abs());
    }
    let ok = (single - 0.1267).abs() <= CLOSED_FORM_TOL
        && (single - single_oracle).abs() <= CLOSED_FORM_TOL
        && (sym - 0.55).abs() <= CLOSED_FORM_TOL
        && worst < REFINEMENT_TOL;
    check(
        ok,
        format!(
            "single rule {single:.5} (exact {single_oracle:.5}), symmetric {sym:.5}, refinement 1001->20001 max shift {worst:.2e}"
        ),
    )
}

fn perturbed_system(rng: &mut ChaCha8Rng) -> FuzzySystem {
    let mut sys = baseline_part1_system();
    for var in &mut sys.variables {
        let (lo, hi) = (var.domain_left, var.domain_right);
        for term in &mut var.terms {
            let mut p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(lo..=hi));
            p.sort_by(f64::total_cmp);
            term.shape = TrapezoidShape::from_params(p);
            term.complement = rng.gen_bool(0.2);
            term.hedge = Hedge::ALL[rng.gen_range(0..3)];
            if rng.gen_bool(0.3) {
                term.meta = Some(TermMeta {
                    area: Some("Number Line".into()),
                    grade: Some(format!("{}", rng.gen_range(3..=5))),
                    subject: Some("Mathematics".into()),
                });
            }
        }
        var.default_value = rng.gen_range(lo..=hi);
    }
    for rule in &mut sys.rules {
        rule.weight = rng.gen::<f64>();
    }
    sys
}

fn c5_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut equal = 0;
    for _ in 0..100 {
        let sys = perturbed_system(&mut rng);
        assert!(validate(&sys).is_empty());
        let text = serialize_fml(&sys).unwrap();
        if parse_fml(&text).ok().as_ref() == Some(&sys) {
            equal += 1;
        }
    }
    let fragment_ok = parse_fml(SA_DOCUMENT)
        .ok()
        .and_then(|s| s.variable("SA").map(|v| v.terms.iter().map(|t| t.shape.params()).collect::<Vec<_>>()))
        .is_some_and(|p| p == SA_PARAMS);
    check(
        equal == 100 && fragment_ok,
        format!("{equal}/100 perturbed systems round-trip exactly; SA fragment exact: {fragment_ok}"),
    )
}

struct LearningRun {
    ga: LearnReport,
    pso: LearnReport,
    ga_time: Duration,
    pso_time: Duration,
    before_accuracy: f64,
    after_accuracy: f64,
}

impl LearningRun {
    /// Everything that must be bit-identical across repeats.
    fn fingerprint(&self) -> String {
        let kb = |r: &LearnReport| serialize_fml(r.best_system()).unwrap();
        format!(
            "{}\n{}\n{}\n{}\n{:?} {:?}",
            self.ga.to_json(),
            kb(&self.ga),
            self.pso.to_json(),
            kb(&self.pso),
            self.before_accuracy.to_bits(),
            self.after_accuracy.to_bits()
        )
    }
}

fn learning_run() -> LearningRun {
    let ds = gen_slp_dataset(400, 42, DEFAULT_NOISE_SIGMA);
    let t = Instant::now();
    let ga = cross_validate(&ds, &LearnConfig::ga()).unwrap();
    let ga_time = t.elapsed();
    let t = Instant::now();
    let pso = cross_validate(&ds, &LearnConfig::pso()).unwrap();
    let pso_time = t.elapsed();

    let rank_data = gen_rlcr_dataset(400, 42, true);
    let before = build_part2_system(&baseline_part1_system()).unwrap();
    let after = build_part2_system(pso.best_system()).unwrap();
    LearningRun {
        before_accuracy: accuracy(&before, &rank_data, ACCURACY_THRESHOLD).unwrap(),
        after_accuracy: accuracy(&after, &rank_data, ACCURACY_THRESHOLD).unwrap(),
        ga,
        pso,
        ga_time,
        pso_time,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn c6_learning(run: &LearningRun) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r, time) in [("GA", &run.ga, run.ga_time), ("PSO", &run.pso, run.pso_time)] {
        let before = r.mean_before_test_mse.unwrap();
        let after = r.mean_test_mse.unwrap();
        let monotone = r
            .folds
            .iter()
            .all(|f| f.history_best_mse.windows(2).all(|w| w[1] <= w[0]));
        ok &= after <= IMPROVEMENT_RATIO * before && monotone;
        let pace = if time <= RUNTIME_TARGET { "" } else { " over target" };
        parts.push(format!(
            "{name} test MSE {before:.5} -> {after:.5} (ratio {:.3}, monotone {monotone}, {:.0}s{pace})",
            after / before,
            time.as_secs_f64()
        ));
    }
    check(ok, parts.join("; "))
}

fn trend_pair(seed: u64) -> (f64, f64) {
    let ds = gen_slp_dataset(400, seed, DEFAULT_NOISE_SIGMA);
    let cfg = |m: Method| LearnConfig {
        generations: TREND_GENERATIONS,
        seed,
        ..LearnConfig::for_method(m)
    };
    let ga = cross_validate(&ds, &cfg(Method::Ga)).unwrap().mean_test_mse.unwrap();
    let pso = cross_validate(&ds, &cfg(Method::Pso)).unwrap().mean_test_mse.unwrap();
    (ga, pso)
}

fn c7_trend(pairs: &[(u64, (f64, f64))]) -> Outcome {
    let wins = pairs.iter().filter(|(_, (ga, pso))| pso <= ga).count();
    let detail = format!(
        "PSO <= GA in {wins}/5 seeds at {TREND_GENERATIONS} generations [{}]",
        pairs
            .iter()
            .map(|(s, (ga, pso))| format!("{s}: {ga:.5} vs {pso:.5}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Outcome {
        status: match wins {
            3.. => Status::Pass,
            _ => Status::Soft,
        },
        detail,
    }
}

fn c8_accuracy(run: &LearningRun) -> Outcome {
    let (b, a) = (run.before_accuracy, run.after_accuracy);
    check(
        a >= b && (ACCURACY_BAND.0..=ACCURACY_BAND.1).contains(&b),
        format!("accuracy before {:.2}% -> after {:.2}% at threshold {ACCURACY_THRESHOLD}", b * 100.0, a * 100.0),
    )
}

fn c9_determinism(first: &LearningRun, second: &LearningRun, trend: (f64, f64), trend_again: (f64, f64)) -> Outcome {
    let same = first.fingerprint() == second.fingerprint();
    let trend_same = trend.0.to_bits() == trend_again.0.to_bits() && trend.1.to_bits() == trend_again.1.to_bits();
    check(
        same && trend_same,
        format!("4-thread vs 1-thread pools: learning reports identical {same}, trend run identical {trend_same}"),
    )
}

fn random_malformed_line(rng: &mut ChaCha8Rng) -> Vec<u8> {
    const SNIPPETS: [&str; 8] = [
        "{\"op\":\"assess\"",
        "{\"op\":\"assess\",\"sa\":\"x\",\"lcd\":0,\"scl\":0,\"sts\":0}",
        "{\"op\":\"teleport\"}",
        "{\"op\":null}",
        "[\"assess\"]",
        "{\"op\":\"recommend\",\"sa\":1}",
        "{\"op\":\"reload\",\"path\":7}",
        "{{}}",
    ];
    let mut line: Vec<u8> = if rng.gen_bool(0.3) {
        SNIPPETS[rng.gen_range(0..SNIPPETS.len())].as_bytes().to_vec()
    } else {
        let len = rng.gen_range(1..120);
        (0..len).map(|_| rng.gen::<u8>()).filter(|&b| b != b'\n').collect()
    };
    // Blank lines are skipped without a response; keep every line non-blank.
    line.push(b'#');
    line
}

fn c10_service() -> Outcome {
    let part1 = baseline_part1_system();
    let part2 = build_part2_system(&part1).unwrap();
    let service = Service::new(part1, part2, ContentGraph::sample()).unwrap();
    let (addr, stop, join) = Server::bind("127.0.0.1:0", service).unwrap().spawn().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let lines: Vec<Vec<u8>> = (0..10_000).map(|_| random_malformed_line(&mut rng)).collect();
    let stream = TcpStream::connect(addr).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let sender = std::thread::spawn(move || {
        for l in &lines {
            writer.write_all(l).unwrap();
            writer.write_all(b"\n").unwrap();
        }
        writer.shutdown(std::net::Shutdown::Write).unwrap();
    });
    let mut errors = 0;
    let mut other = 0;
    for line in BufReader::new(stream).lines() {
        let v: Value = serde_json::from_str(&line.unwrap()).unwrap();
        if v["status"] == "error" && v["message"].as_str().is_some_and(|m| !m.is_empty()) {
            errors += 1;
        } else {
            other += 1;
        }
    }
    sender.join().unwrap();

    let mut conn = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut worst = 0.0_f64;
    let mut labels_agree = true;
    for i in 0..20 {
        let v = [
            rng.gen_range(-4.5..=4.5),
            rng.gen_range(-4.5..=4.5),
            rng.gen_range(-0.5..=10.5),
            rng.gen_range(-0.5..=10.5),
        ];
        let request = format!(
            "{{\"op\":\"assess\",\"sa\":{},\"lcd\":{},\"scl\":{},\"sts\":{},\"requestId\":{i}}}\n",
            v[0], v[1], v[2], v[3]
        );
        conn.write_all(request.as_bytes()).unwrap();
        let mut resp = String::new();
        reader.read_line(&mut resp).unwrap();
        let resp: Value = serde_json::from_str(&resp).unwrap();

        let out = Command::new(env!("CARGO_BIN_EXE_fml-agent"))
            .env("RUST_LOG", "error")
            .args(["infer", "--sa", &v[0].to_string(), "--lcd", &v[1].to_string()])
            .args(["--scl", &v[2].to_string(), "--sts", &v[3].to_string()])
            .output()
            .unwrap();
        let stdout = String::from_utf8(out.stdout).unwrap();
        let mut parts = stdout.split_whitespace();
        let cli_value: f64 = parts.next().unwrap().parse().unwrap();
        worst = worst.max((resp["result"]["slp"].as_f64().unwrap() - cli_value).abs());
        labels_agree &= parts.next() == resp["result"]["label"].as_str();
    }
    stop.shutdown();
    join.join().unwrap().unwrap();
    check(
        errors == 10_000 && other == 0 && worst <= SERVICE_TOL && labels_agree,
        format!(
            "{errors}/10000 malformed lines answered with errors ({other} other); assess vs infer max |diff| {worst:.1e}, labels agree {labels_agree}"
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() {
    let mut outcomes: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Soft => "SOFT",
            Status::Fail => "FAIL",
        };
        println!("criterion {id:>2} [{tag}] {name}: {}", o.detail);
        let _ = std::io::stdout().flush();
        outcomes.push((id, name, o));
    };

    report(1, "assessment rule-base anchors", c1_rule_anchors());
    report(2, "recommendation rule base", c2_recommendation_rules());
    report(3, "recommendation rank oracle", c3_rank_oracle());
    report(4, "inference closed forms", c4_inference());
    report(5, "FML round trip", c5_round_trip());

    let first = in_pool(4, learning_run);
    report(6, "learning improves test MSE", c6_learning(&first));
    let trend: Vec<(u64, (f64, f64))> = TREND_SEEDS.iter().map(|&s| (s, in_pool(4, || trend_pair(s)))).collect();
    report(7, "PSO vs GA trend (soft)", c7_trend(&trend));
    report(8, "recommendation accuracy direction", c8_accuracy(&first));

    let second = in_pool(1, learning_run);
    let trend_again = in_pool(1, || trend_pair(TREND_SEEDS[1]));
    report(9, "determinism across thread counts", c9_determinism(&first, &second, trend[1].1, trend_again));
    report(10, "service robustness", c10_service());

    let failed: Vec<_> = outcomes.iter().filter(|(_, _, o)| o.status == Status::Fail).collect();
    let soft = outcomes.iter().filter(|(_, _, o)| o.status == Status::Soft).count();
    println!(
        "acceptance: {} passed, {soft} soft, {} failed",
        outcomes.len() - failed.len() - soft,
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
