//! `invlip check`: recompute every serialized witness and verdict.

use num::{Signed, Zero};

use invlip_core::approx::ApproximationReport;
use invlip_core::error::Error;
use invlip_core::json::{FunctionSpec, InstanceSpec, MatrixSpec, OrbitInstanceSpec, VectorSpec};
use invlip_core::kernel::{kernel_project_oracle, linf_kernel_project, sup_norm, KernelProjection};
use invlip_core::lipschitz::{recheck_defect_witness, LipFn};
use invlip_core::mean_growth::MeanGrowth;
use invlip_core::orbit::OrbitReport;
use invlip_core::qm::QmReport;
use invlip_core::rational::{rat_int, Rat};
use invlip_core::space::GroupSpace;
use invlip_core::suite::SuiteReport;

use crate::envelope::{read_envelopes, Envelope};
use crate::{CheckArgs, CliError, CliResult};

fn input_err(e: Error) -> CliError {
    CliError::Parse(e.to_string())
}

fn field<T: serde::de::DeserializeOwned>(value: &serde_json::Value, what: &str) -> CliResult<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| CliError::Parse(format!("report is missing a valid {what}: {e}")))
}

fn verify(condition: bool, what: &str) -> CliResult<()> {
    if condition {
        Ok(())
    } else {
        Err(CliError::Violation(format!("witness re-check failed: {what}")))
    }
}

pub fn run_check(args: &CheckArgs) -> CliResult<()> {
    let envelopes = read_envelopes(&args.report)?;
    if envelopes.is_empty() {
        return Err(CliError::Parse("report file holds no envelopes".into()));
    }
    for (index, envelope) in envelopes.iter().enumerate() {
        check_envelope(envelope)
            .map_err(|e| match e {
                CliError::Violation(m) => {
                    CliError::Violation(format!("envelope {index} ({}): {m}", envelope.command))
                }
                CliError::Parse(m) => {
                    CliError::Parse(format!("envelope {index} ({}): {m}", envelope.command))
                }
            })?;
        println!("envelope {index} ({}): witnesses verified", envelope.command);
    }
    Ok(())
}

fn rebuild_instance(envelope: &Envelope) -> CliResult<(GroupSpace, LipFn)> {
    let spec: InstanceSpec = field(&envelope.instance, "instance")?;
    spec.build(crate::element_cap(), envelope.seed).map_err(input_err)
}

fn check_envelope(envelope: &Envelope) -> CliResult<()> {
    match envelope.command.as_str() {
        "approx-free" | "approx-presented" => {
            let (space, f) = rebuild_instance(envelope)?;
            let report: ApproximationReport = field(&envelope.report, "approximation report")?;
            let fbar_spec: FunctionSpec = field(
                envelope
                    .approximant
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("approximant missing".into()))?,
                "approximant",
            )?;
            let fbar = fbar_spec.build(&space).map_err(input_err)?;

            let defect_value =
                recheck_defect_witness(&f, &space, &report.defect_witness).map_err(input_err)?;
            verify(defect_value == report.delta_hat, "defect witness ratio")?;

            let w = &report.norm_witness;
            let dx = f.eval(&space, &w.x).map_err(input_err)?
                - fbar.eval(&space, &w.x).map_err(input_err)?;
            let dy = f.eval(&space, &w.y).map_err(input_err)?
                - fbar.eval(&space, &w.y).map_err(input_err)?;
            let d = space.distance(&w.x, &w.y).map_err(input_err)?;
            verify(!d.is_zero(), "norm witness distance")?;
            verify((dx - dy).abs() / d == *report.achieved(), "norm witness ratio")?;
            verify(
                report.pass == (report.achieved() <= &report.bound),
                "pass verdict",
            )?;
            Ok(())
        }
        "approx-orbit" => {
            let spec: OrbitInstanceSpec = field(&envelope.instance, "orbit instance")?;
            let (space, f) = spec.build(crate::element_cap(), envelope.seed).map_err(input_err)?;
            let report: OrbitReport = field(&envelope.report, "orbit report")?;
            let collapsed: Vec<String> = field(
                envelope
                    .approximant
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("approximant missing".into()))?,
                "collapsed values",
            )?;
            let collapsed: Vec<Rat> = collapsed
                .iter()
                .map(|s| invlip_core::rational::parse_rat(s))
                .collect::<Result<_, _>>()
                .map_err(input_err)?;

            let (g, x, y) = &report.defect_witness;
            let elements = space.group_elements().map_err(input_err)?;
            let g_nf = space.group.normal_form(g).map_err(input_err)?;
            let g_index = elements
                .iter()
                .position(|e| *e == g_nf)
                .ok_or_else(|| CliError::Parse("defect witness element unknown".into()))?;
            let perm = &space.element_actions()[g_index];
            let qx = &f[perm.apply(*x)] - &f[*x];
            let qy = &f[perm.apply(*y)] - &f[*y];
            verify(
                (qx - qy).abs() / &space.dist[*x][*y] == report.delta_hat,
                "orbit defect witness",
            )?;

            let (nx, ny) = report.norm_witness;
            let dx = &f[nx] - &collapsed[nx];
            let dy = &f[ny] - &collapsed[ny];
            verify(
                (dx - dy).abs() / &space.dist[nx][ny] == report.achieved,
                "orbit norm witness",
            )?;
            verify(
                report.pass == (report.achieved <= report.bound && report.invariant),
                "orbit pass verdict",
            )?;
            Ok(())
        }
        "mean-growth" => {
            let (space, f) = rebuild_instance(envelope)?;
            let report: MeanGrowth = field(&envelope.report, "mean growth report")?;
            let plus = report.recheck(&f, &space, true).map_err(input_err)?;
            let minus = report.recheck(&f, &space, false).map_err(input_err)?;
            verify(plus == report.c_plus, "c_plus witness")?;
            verify(minus == report.c_minus, "c_minus witness")?;
            verify(
                report.c == (&report.c_plus + &report.c_minus) / rat_int(2),
                "midpoint",
            )?;
            Ok(())
        }
        "kernel-project" => {
            let matrix: MatrixSpec = field(&envelope.instance["matrix"], "matrix")?;
            let vector: VectorSpec = field(&envelope.instance["vector"], "vector")?;
            let report: KernelProjection = field(&envelope.report, "kernel projection")?;
            let a = matrix.build().map_err(input_err)?;
            let residual = a.apply(&report.u).map_err(input_err)?;
            verify(residual.iter().all(num::Zero::is_zero), "kernel residual")?;
            let deviation: Vec<Rat> = vector
                .entries
                .iter()
                .zip(&report.u)
                .map(|(a, b)| a - b)
                .collect();
            verify(sup_norm(&deviation) == report.t, "achieved deviation")?;
            if a.rows + a.cols <= 14 {
                let oracle = kernel_project_oracle(&a, &vector.entries).map_err(input_err)?;
                verify(oracle == report.t, "enumeration oracle optimum")?;
            }
            let fresh = linf_kernel_project(&a, &vector.entries).map_err(input_err)?;
            verify(fresh.t == report.t, "solver optimum")?;
            Ok(())
        }
        "qm" => {
            let (space, f) = rebuild_instance(envelope)?;
            let report: QmReport = field(&envelope.report["defects"], "quasimorphism report")?;
            let numerator = |g: &invlip_core::word::Word, h: &invlip_core::word::Word| -> CliResult<Rat> {
                let product = space.multiply_nf(g, h).map_err(input_err)?;
                Ok((f.eval(&space, &product).map_err(input_err)?
                    - f.eval(&space, g).map_err(input_err)?
                    - f.eval(&space, h).map_err(input_err)?)
                .abs())
            };
            let (g, h) = &report.witness_defect;
            verify(numerator(g, h)? == report.defect_d, "defect witness")?;
            let (g, h) = &report.witness_partial;
            if !report.partial_d.is_zero() {
                let dg = space.distance_to_identity(g).map_err(input_err)?;
                let dh = space.distance_to_identity(h).map_err(input_err)?;
                verify(
                    numerator(g, h)? / dg.min(dh) == report.partial_d,
                    "partial defect witness",
                )?;
            }
            Ok(())
        }
        "suite" => {
            // Suite outputs carry verdicts, not witnesses; parse and accept.
            let _report: SuiteReport = field(&envelope.report, "suite report")?;
            Ok(())
        }
        other => Err(CliError::Parse(format!("unknown report command {other:?}"))),
    }
}
