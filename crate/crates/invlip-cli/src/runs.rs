//! Command implementations: pipeline runs, seed sweeps, and the suite.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use invlip_core::error::Error;
use invlip_core::json::{FunctionSpec, InstanceSpec, MatrixSpec, OrbitInstanceSpec, VectorSpec};
use invlip_core::rational::{format_rat, parse_rat, rat_int};
use invlip_core::word::parse_word_text;
use invlip_core::{approx, kernel, mean_growth, orbit, qm, suite};

use crate::envelope::{emit, parse_json, read_text, to_value, Envelope};
use crate::{ApproxArgs, CliError, CliResult, KernelArgs, MeanGrowthArgs, QmArgs, SuiteArgs};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ApproxKind {
    Free,
    Presented,
    Orbit,
}

impl ApproxKind {
    fn command(self) -> &'static str {
        match self {
            ApproxKind::Free => "approx-free",
            ApproxKind::Presented => "approx-presented",
            ApproxKind::Orbit => "approx-orbit",
        }
    }
}

fn input_err(e: Error) -> CliError {
    CliError::Parse(e.to_string())
}

struct CurveRow {
    seed: Option<u64>,
    delta_hat: String,
    bound: String,
    achieved: String,
    pass: bool,
}

fn write_curve(path: &Path, rows: &[CurveRow]) -> CliResult<()> {
    if rows.is_empty() {
        return Err(CliError::Parse("curve output needs at least one run".into()));
    }
    let mut text = String::from("seed,delta_hat,bound,achieved,pass\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            row.seed.map(|s| s.to_string()).unwrap_or_default(),
            row.delta_hat,
            row.bound,
            row.achieved,
            row.pass
        ));
    }
    fs::write(path, text)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}

fn seeds_to_run(args: &ApproxArgs) -> CliResult<Vec<Option<u64>>> {
    match (&args.seeds, args.seed) {
        (Some(range), _) => Ok(crate::parse_seed_range(range)?.into_iter().map(Some).collect()),
        (None, seed) => Ok(vec![seed]),
    }
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Parse(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(job))
}

pub fn run_approx(args: &ApproxArgs, kind: ApproxKind) -> CliResult<()> {
    if args.radius < 1 {
        return Err(CliError::Parse("radius must be at least 1".into()));
    }
    let cap = crate::element_cap();
    let text = read_text(&args.instance)?;
    let seeds = seeds_to_run(args)?;
    let sweep = args.seeds.is_some();

    let outcomes: Vec<(Envelope, CurveRow)> = match kind {
        ApproxKind::Free | ApproxKind::Presented => {
            let spec: InstanceSpec = parse_json(&args.instance, &text)?;
            let run_one = |seed: Option<u64>| -> CliResult<(Envelope, CurveRow)> {
                let (space, f) = spec.build(cap, seed).map_err(input_err)?;
                let radius = rat_int(args.radius as i64);
                let (fbar, report) = match kind {
                    ApproxKind::Free => approx::free_approximant(&f, &space, &radius)
                        .map(|(fbar, report)| (fbar, to_value(&report)))
                        .map_err(input_err)?,
                    _ => {
                        let presentation = spec.group.presentation().map_err(input_err)?;
                        let (fbar, report, constants) =
                            approx::presented_approximant(&f, &presentation, &space, &radius)
                                .map_err(input_err)?;
                        let mut value = to_value(&report);
                        value["constants"] = to_value(&constants);
                        (fbar, value)
                    }
                };
                let pass = report["pass"].as_bool().unwrap_or(false);
                let achieved = report["achieved_exact"]
                    .as_str()
                    .unwrap_or_else(|| report["achieved_ball"].as_str().unwrap_or_default())
                    .to_string();
                let row = CurveRow {
                    seed,
                    delta_hat: report["delta_hat"].as_str().unwrap_or_default().to_string(),
                    bound: report["bound"].as_str().unwrap_or_default().to_string(),
                    achieved,
                    pass,
                };
                let envelope = Envelope {
                    command: kind.command().into(),
                    seed,
                    radius: Some(args.radius),
                    delta: None,
                    instance: to_value(&spec),
                    approximant: Some(to_value(&FunctionSpec::from_lipfn(&fbar).map_err(input_err)?)),
                    report,
                };
                Ok((envelope, row))
            };
            with_pool(args.workers, || {
                seeds.par_iter().map(|&s| run_one(s)).collect::<CliResult<Vec<_>>>()
            })??
        }
        ApproxKind::Orbit => {
            let spec: OrbitInstanceSpec = parse_json(&args.instance, &text)?;
            let run_one = |seed: Option<u64>| -> CliResult<(Envelope, CurveRow)> {
                let (space, f) = spec.build(cap, seed).map_err(input_err)?;
                let (collapsed, report) =
                    orbit::orbit_collapse_approximant(&space, &f).map_err(input_err)?;
                let row = CurveRow {
                    seed,
                    delta_hat: format_rat(&report.delta_hat),
                    bound: format_rat(&report.bound),
                    achieved: format_rat(&report.achieved),
                    pass: report.pass,
                };
                let envelope = Envelope {
                    command: kind.command().into(),
                    seed,
                    radius: None,
                    delta: None,
                    instance: to_value(&spec),
                    approximant: Some(to_value(
                        &collapsed.iter().map(format_rat).collect::<Vec<_>>(),
                    )),
                    report: to_value(&report),
                };
                Ok((envelope, row))
            };
            with_pool(args.workers, || {
                seeds.par_iter().map(|&s| run_one(s)).collect::<CliResult<Vec<_>>>()
            })??
        }
    };

    let (envelopes, rows): (Vec<Envelope>, Vec<CurveRow>) = outcomes.into_iter().unzip();
    if sweep {
        emit(args.out.as_deref(), &envelopes)?;
    } else {
        emit(args.out.as_deref(), &envelopes[0])?;
    }
    if let Some(csv) = &args.csv {
        write_curve(csv, &rows)?;
    }

    if let Some(failed) = rows.iter().find(|r| !r.pass) {
        return Err(CliError::Violation(format!(
            "bound violated{}: achieved {} > bound {} (witnesses in the report)",
            failed.seed.map(|s| format!(" at seed {s}")).unwrap_or_default(),
            failed.achieved,
            failed.bound
        )));
    }
    Ok(())
}

pub fn run_mean_growth(args: &MeanGrowthArgs) -> CliResult<()> {
    if args.radius < 1 {
        return Err(CliError::Parse("radius must be at least 1".into()));
    }
    let cap = crate::element_cap();
    let text = read_text(&args.instance)?;
    let spec: InstanceSpec = parse_json(&args.instance, &text)?;
    let (space, f) = spec.build(cap, args.seed).map_err(input_err)?;
    let direction =
        parse_word_text(space.generator_names(), &args.direction).map_err(input_err)?;
    let base = parse_word_text(space.generator_names(), &args.base).map_err(input_err)?;
    let growth = mean_growth::mean_growth(&f, &space, &direction, &base, &rat_int(args.radius as i64))
        .map_err(input_err)?;
    let envelope = Envelope {
        command: "mean-growth".into(),
        seed: args.seed,
        radius: Some(args.radius),
        delta: None,
        instance: to_value(&spec),
        approximant: None,
        report: to_value(&growth),
    };
    emit(args.out.as_deref(), &envelope)
}

pub fn run_kernel(args: &KernelArgs) -> CliResult<()> {
    let matrix_text = read_text(&args.matrix)?;
    let matrix_spec: MatrixSpec = parse_json(&args.matrix, &matrix_text)?;
    let vector_text = read_text(&args.vector)?;
    let vector_spec: VectorSpec = parse_json(&args.vector, &vector_text)?;
    let a = matrix_spec.build().map_err(input_err)?;
    let projection = kernel::linf_kernel_project(&a, &vector_spec.entries).map_err(input_err)?;
    let envelope = Envelope {
        command: "kernel-project".into(),
        seed: None,
        radius: None,
        delta: None,
        instance: serde_json::json!({
            "matrix": to_value(&matrix_spec),
            "vector": to_value(&vector_spec),
        }),
        approximant: None,
        report: to_value(&projection),
    };
    emit(args.out.as_deref(), &envelope)
}

pub fn run_qm(args: &QmArgs) -> CliResult<()> {
    if args.radius < 1 {
        return Err(CliError::Parse("radius must be at least 1".into()));
    }
    let cap = crate::element_cap();
    let text = read_text(&args.instance)?;
    let spec: InstanceSpec = parse_json(&args.instance, &text)?;
    let (space, f) = spec.build(cap, args.seed).map_err(input_err)?;
    let radius = rat_int(args.radius as i64);
    let delta = parse_rat(&args.delta).map_err(input_err)?;
    let defects = qm::qm_defects(&f, &space, &radius).map_err(input_err)?;
    let implications = qm::check_pqm_implications(&f, &space, &delta, &radius).map_err(input_err)?;
    let constant = match &args.discreteness {
        Some(bound) => Some(
            qm::pqm_constant_from_lipschitz(
                &f,
                &space,
                &parse_rat(bound).map_err(input_err)?,
                &radius,
            )
            .map_err(input_err)?,
        ),
        None => None,
    };

    let mut report = serde_json::json!({
        "defects": to_value(&defects),
        "implications": to_value(&implications),
    });
    if let Some(c) = &constant {
        report["lipschitz_constant"] = to_value(c);
    }
    let envelope = Envelope {
        command: "qm".into(),
        seed: args.seed,
        radius: Some(args.radius),
        delta: Some(args.delta.clone()),
        instance: to_value(&spec),
        approximant: None,
        report,
    };
    emit(args.out.as_deref(), &envelope)?;

    if !implications.implications_hold {
        return Err(CliError::Violation(
            "implication chain violated on the scanned ball".into(),
        ));
    }
    if constant.as_ref().is_some_and(|c| !c.holds) {
        return Err(CliError::Violation(
            "partial defect exceeds the Lipschitz-derived constant".into(),
        ));
    }
    Ok(())
}

pub fn run_suite(args: &SuiteArgs) -> CliResult<()> {
    let seeds = crate::parse_seed_range(&args.seeds)?;
    let fifty: Vec<u64> = seeds.iter().copied().take(50.min(seeds.len())).collect();

    type Task<'a> = Box<dyn Fn() -> suite::CriterionResult + Send + Sync + 'a>;
    let tasks: Vec<Task> = vec![
        Box::new(|| suite::criterion_1()),
        Box::new(|| suite::criterion_2(&seeds)),
        Box::new(|| suite::criterion_3(&seeds)),
        Box::new(|| suite::criterion_4(&seeds)),
        Box::new(|| suite::criterion_5()),
        Box::new(|| suite::criterion_6(&fifty)),
        Box::new(|| suite::criterion_7(&fifty)),
        Box::new(|| suite::criterion_8(&fifty)),
        Box::new(|| suite::criterion_9(&seeds)),
        Box::new(|| suite::criterion_10(&seeds)),
    ];
    let results: Vec<suite::CriterionResult> =
        with_pool(args.workers, || tasks.par_iter().map(|t| t()).collect())?;
    let report = suite::SuiteReport {
        all_pass: results.iter().all(|r| r.pass),
        results,
    };
    for line in report.lines() {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        emit(Some(path), &report)?;
    }
    if !report.all_pass {
        return Err(CliError::Violation("certification suite failed".into()));
    }
    Ok(())
}
