use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use fml_core::dataset::{gen_rlcr_dataset, gen_slp_dataset, Dataset};
use fml_core::io::{read_csv_dataset, read_fml_file, write_csv_dataset, write_fml_file};
use fml_core::learn::{self, cross_validate_from, LearnConfig, LearnReport};
use fml_core::model::{baseline_part1_system, validate, FuzzySystem, RLCR, SLP};
use fml_core::recommend::{accuracy_of, build_part2_system, ContentGraph};
use fml_core::service::{Server, Service};
use fml_core::{CrispInput, Engine};

use crate::args::{GenDataArgs, InferArgs, Part1Args, Part2Args, ServeArgs, Stage};

const PAPER_SCALE_GENERATIONS: [usize; 3] = [1000, 2000, 3000];

/// `before` for the untuned assessment KB, otherwise an FML path.
fn load_kb(spec: &str) -> Result<FuzzySystem> {
    if spec.eq_ignore_ascii_case("before") {
        return Ok(baseline_part1_system());
    }
    let system = read_fml_file(spec).with_context(|| format!("loading knowledge base {spec}"))?;
    let violations = validate(&system);
    if !violations.is_empty() {
        bail!("knowledge base {spec} is invalid: {}", violations[0]);
    }
    Ok(system)
}

fn load_dataset(path: &Path, target: &str) -> Result<Dataset> {
    let ds = read_csv_dataset(path).with_context(|| format!("reading dataset {}", path.display()))?;
    if !ds.target.eq_ignore_ascii_case(target) {
        bail!(
            "dataset {} has target {}, expected {}",
            path.display(),
            ds.target,
            target.to_ascii_lowercase()
        );
    }
    if ds.is_empty() {
        bail!("dataset {} has no records", path.display());
    }
    Ok(ds)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn gen_data(args: &GenDataArgs) -> Result<()> {
    let n = args.n as usize;
    let ds = match args.stage {
        Stage::Part1 => {
            if !(args.noise >= 0.0) {
                bail!("--noise must be non-negative");
            }
            gen_slp_dataset(n, args.seed, args.noise)
        }
        Stage::Part2 => gen_rlcr_dataset(n, args.seed, args.include_paper_rows),
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_csv_dataset(&ds, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} records to {}", ds.len(), args.out.display());
    Ok(())
}

fn history_csv(report: &LearnReport) -> String {
    let mut out = String::from("generation,mean_best_mse");
    for f in &report.folds {
        let _ = write!(out, ",fold_{}", f.fold + 1);
    }
    out.push('\n');
    for (g, mean) in report.history_best_mse.iter().enumerate() {
        let _ = write!(out, "{},{}", g + 1, mean);
        for f in &report.folds {
            let _ = write!(out, ",{}", f.history_best_mse[g]);
        }
        out.push('\n');
    }
    out
}

fn run_part1(args: &Part1Args, ds: &Dataset, generations: usize, prefix: &str) -> Result<()> {
    let mut config = LearnConfig::for_method(args.method.into());
    config.generations = generations;
    config.folds = args.folds as usize;
    config.seed = args.seed;
    if let Some(p) = args.population {
        config.population_size = p as usize;
    }
    let template = baseline_part1_system();
    let report = cross_validate_from(&template, ds, &config)?;
    let before = report.mean_before_test_mse.expect("cross-validation report");
    let after = report.mean_test_mse.expect("cross-validation report");

    let mut value = report.to_json();
    let obj = value.as_object_mut().expect("report is an object");
    obj.insert("data".into(), json!(args.data.display().to_string()));
    obj.insert("records".into(), json!(ds.len()));
    obj.insert("beforeMse".into(), json!(before));
    obj.insert("afterMse".into(), json!(after));

    let report_path = args.out_dir.join(format!("{prefix}_report.json"));
    let kb_path = args.out_dir.join(format!("{prefix}_learned.fml"));
    let history_path = args.out_dir.join(format!("{prefix}_history.csv"));
    write_json(&report_path, &value)?;
    write_fml_file(report.best_system(), &kb_path).with_context(|| format!("writing {}", kb_path.display()))?;
    write_text(&history_path, &history_csv(&report))?;
    println!(
        "{prefix}: before MSE {before:.6}, after MSE {after:.6} ({} generations, {} folds)",
        generations, config.folds
    );
    println!("  report  {}", report_path.display());
    println!("  kb      {}", kb_path.display());
    println!("  history {}", history_path.display());
    Ok(())
}

pub fn part1(args: &Part1Args) -> Result<()> {
    let ds = load_dataset(&args.data, SLP)?;
    create_dir(&args.out_dir)?;
    let method = match args.method {
        crate::args::MethodArg::Ga => "ga",
        crate::args::MethodArg::Pso => "pso",
    };
    if args.paper_scale {
        for g in PAPER_SCALE_GENERATIONS {
            run_part1(args, &ds, g, &format!("{method}_g{g}"))?;
        }
        Ok(())
    } else {
        run_part1(args, &ds, args.generations as usize, method)
    }
}

fn kb_label(spec: &str) -> String {
    if spec.eq_ignore_ascii_case("before") {
        return "before".into();
    }
    Path::new(spec)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "kb".into())
}

pub fn part2(args: &Part2Args) -> Result<()> {
    if !(args.threshold >= 0.0) {
        bail!("--threshold must be non-negative");
    }
    let part1 = load_kb(&args.part1_kb)?;
    let system = build_part2_system(&part1)?;
    let ds = load_dataset(&args.data, RLCR)?;
    let predictions = learn::predict(&system, &ds)?;
    let accuracy = accuracy_of(&predictions, &ds, args.threshold)?;
    let correct = (accuracy * ds.len() as f64).round() as usize;

    create_dir(&args.out_dir)?;
    let label = kb_label(&args.part1_kb);
    let report_path = args.out_dir.join(format!("part2_{label}.json"));
    let records_path = args.out_dir.join(format!("part2_{label}_records.csv"));
    write_json(
        &report_path,
        &json!({
            "part1Kb": args.part1_kb,
            "data": args.data.display().to_string(),
            "threshold": args.threshold,
            "records": ds.len(),
            "correct": correct,
            "accuracy": accuracy,
        }),
    )?;
    let mut csv = format!(
        "{},inferred,desired,correct\n",
        ds.schema.iter().map(|s| s.to_ascii_lowercase()).collect::<Vec<_>>().join(",")
    );
    for (r, p) in ds.records.iter().zip(&predictions) {
        for x in &r.inputs {
            let _ = write!(csv, "{x},");
        }
        let _ = writeln!(csv, "{p},{},{}", r.desired, (p - r.desired).abs() <= args.threshold);
    }
    write_text(&records_path, &csv)?;
    println!(
        "{label}: accuracy {:.2}% ({correct}/{}) at threshold {}",
        accuracy * 100.0,
        ds.len(),
        args.threshold
    );
    println!("  report  {}", report_path.display());
    println!("  records {}", records_path.display());
    Ok(())
}

pub fn infer(args: &InferArgs) -> Result<()> {
    let system = load_kb(&args.kb)?;
    let engine = Engine::new(&system)?;
    let input = CrispInput::new()
        .with("SA", args.sa)
        .with("LCD", args.lcd)
        .with("SCL", args.scl)
        .with("STS", args.sts);
    let r = engine.infer(&input)?;
    if args.json {
        println!(
            "{}",
            json!({"slp": r.crisp_value, "label": r.winning_term, "clamped": r.clamped, "fired": r.fired})
        );
    } else {
        println!("{} {}", r.crisp_value, r.winning_term);
    }
    Ok(())
}

pub fn serve(args: &ServeArgs) -> Result<()> {
    let part1 = load_kb(&args.part1_kb)?;
    let part2 = match &args.part2_kb {
        Some(path) => load_kb(&path.to_string_lossy())?,
        None => build_part2_system(&part1)?,
    };
    let graph = match &args.content_graph {
        Some(path) => ContentGraph::read(path)?,
        None => ContentGraph::sample(),
    };
    let server = Server::bind(args.bind.as_str(), Service::new(part1, part2, graph)?)
        .with_context(|| format!("binding {}", args.bind))?;
    let handle = server.shutdown_handle()?;
    ctrlc::set_handler(move || handle.shutdown()).context("installing signal handler")?;
    println!("fml-agent listening on {}", server.local_addr()?);
    std::io::stdout().flush()?;
    server.run()?;
    Ok(())
}
