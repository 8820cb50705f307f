use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use wirecomp::dsl::ast::{Application, Directive, SimTarget};
use wirecomp::dsl::{self, render, Diagnostic, Model};
use wirecomp::inverse::{recover_loop_blocks_with, LoopOptions};
use wirecomp::{
    check_composition, coupled_simulate, flatten, leaves, simulate, LinSystem, MatchReport, Matrix, StatePartition,
    Trace, WiringDiagram,
};

use crate::error::{Exit, OrUsage, Result};
use crate::{dot, inputs, model, text, Command, Common, Composite, Format};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Compose { common, composite } => compose(&common, &composite),
        Command::Simulate {
            common,
            system,
            composite,
            steps,
            init,
            input_const,
            inputs,
            inputs_csv,
            oracle,
            compare,
        } => {
            let mode = match (oracle, compare) {
                (true, _) => Mode::Oracle,
                (_, true) => Mode::Compare,
                _ => Mode::Composite,
            };
            let input = InputFlags {
                steps,
                constant: input_const.as_deref(),
                inline: inputs.as_deref(),
                csv: inputs_csv.as_deref(),
            };
            simulate_cmd(&common, system.as_deref(), &composite, init.as_deref(), input, mode)
        }
        Command::Check {
            common,
            diagram,
            candidates,
            target,
        } => check(&common, &diagram, &candidates, &target),
        Command::Solve {
            common,
            system,
            partition,
            controller_readout,
        } => solve(&common, &system, &partition, controller_readout.as_deref()),
        Command::Flatten { common, implementation } => flatten_cmd(&common, &implementation),
        Command::ExportDot {
            common,
            diagram,
            implementation,
        } => export_dot(&common, diagram.as_deref(), implementation.as_deref()),
        Command::Run { common } => run(&common),
        Command::Fmt { common, check } => fmt(&common, check),
        Command::Json { common } => {
            format(&common, Format::Json, &[Format::Json], "json")?;
            let src = model::load(&common.model)?;
            emit(&common, &dsl::to_json(&src.loaded.model))
        }
    }
}

fn format(common: &Common, default: Format, allowed: &[Format], command: &str) -> Result<Format> {
    let f = common.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<String> = allowed.iter().map(|f| format!("{f:?}").to_lowercase()).collect();
        Err(Exit::usage(format!(
            "`{command}` does not support --format {}; use {}",
            format!("{f:?}").to_lowercase(),
            names.join(" or ")
        )))
    }
}

fn emit(common: &Common, payload: &str) -> Result<()> {
    let mut body = payload.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &common.output {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Exit::usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn to_value(x: &impl serde::Serialize) -> Value {
    serde_json::to_value(x).expect("model values serialize")
}

fn partition_json(parts: &[(String, usize)]) -> Value {
    Value::Array(parts.iter().map(|(n, k)| json!({"name": n, "states": k})).collect())
}

fn compose(common: &Common, c: &Composite) -> Result<()> {
    let fmt = format(common, Format::Json, &[Format::Json, Format::Text], "compose")?;
    let diagram = c
        .diagram
        .as_deref()
        .ok_or_else(|| Exit::usage("`compose` needs --diagram"))?;
    let src = model::load(&common.model)?;
    let m = &src.loaded.model;
    let sys = model::compose(m, diagram, &c.systems)?;
    let parts = named_parts(m, &c.systems)?;
    let out = match fmt {
        Format::Text => text::system(&sys, &parts),
        _ => pretty(&json!({"system": to_value(&sys), "partition": partition_json(&parts)})),
    };
    emit(common, &out)
}

fn named_parts(m: &Model, names: &[String]) -> Result<Vec<(String, usize)>> {
    names
        .iter()
        .map(|n| Ok((n.clone(), model::system(m, n)?.state_dim())))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Composite,
    Oracle,
    Compare,
}

struct InputFlags<'a> {
    steps: Option<usize>,
    constant: Option<&'a [f64]>,
    inline: Option<&'a str>,
    csv: Option<&'a Path>,
}

/// What a simulation runs on: a system, or a diagram with its components.
struct Target<'a> {
    label: String,
    system: LinSystem,
    parts: Option<(&'a WiringDiagram, Vec<&'a LinSystem>)>,
}

fn application_label(diagram: &str, args: &[String]) -> String {
    format!("{diagram}({})", args.join(", "))
}

fn resolve_target<'a>(m: &'a Model, system: Option<&str>, c: &Composite) -> Result<Target<'a>> {
    match (system, c.diagram.as_deref()) {
        (Some(name), _) => Ok(Target {
            label: name.to_string(),
            system: model::system(m, name)?.clone(),
            parts: None,
        }),
        (None, Some(d)) => Ok(Target {
            label: application_label(d, &c.systems),
            system: model::compose(m, d, &c.systems)?,
            parts: Some((model::diagram(m, d)?, model::systems(m, &c.systems)?)),
        }),
        (None, None) => Err(Exit::usage("give --system, or --diagram with --systems")),
    }
}

fn initial_state(init: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    match init {
        None => Ok(vec![0.0; n]),
        Some(v) if v.len() == n => {
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Exit::usage(format!("--init: `{x}` is not a finite number")));
            }
            Ok(v.to_vec())
        }
        Some(v) => Err(Exit::usage(format!(
            "--init has {} entries, the system has {n} states",
            v.len()
        ))),
    }
}

fn split_state(s: &[f64], parts: &[&LinSystem]) -> Vec<Vec<f64>> {
    let mut off = 0;
    parts
        .iter()
        .map(|p| {
            let k = p.state_dim();
            let v = s[off..off + k].to_vec();
            off += k;
            v
        })
        .collect()
}

fn trace_json(label: &str, source: &str, trace: &Trace) -> Value {
    json!({
        "target": label,
        "source": source,
        "steps": trace.steps(),
        "trace": to_value(trace),
    })
}

fn simulate_cmd(
    common: &Common,
    system: Option<&str>,
    c: &Composite,
    init: Option<&[f64]>,
    input: InputFlags,
    mode: Mode,
) -> Result<()> {
    let fmt = format(common, Format::Json, &[Format::Json, Format::Csv], "simulate")?;
    let src = model::load(&common.model)?;
    let m = &src.loaded.model;
    let target = resolve_target(m, system, c)?;
    if mode != Mode::Composite && target.parts.is_none() {
        return Err(Exit::usage(
            "--oracle and --compare need --diagram with --systems (the coupled run steps each component)",
        ));
    }
    let sys = &target.system;
    let s0 = initial_state(init, sys.state_dim())?;
    let xs = inputs::sequence(input.steps, sys.input_dim(), input.constant, input.inline, input.csv)?;

    let composite = || simulate(sys, &s0, &xs).or_usage();
    let coupled = || {
        let (d, parts) = target.parts.as_ref().expect("checked above");
        coupled_simulate(d, parts, &split_state(&s0, parts), &xs).or_usage()
    };
    let (trace, comparison) = match mode {
        Mode::Composite => (composite()?, None),
        Mode::Oracle => (coupled()?, None),
        Mode::Compare => {
            let a = composite()?;
            let b = coupled()?;
            let diff = a.max_abs_diff(&b).expect("both runs have the same shape");
            (a, Some(diff))
        }
    };
    let source = if mode == Mode::Oracle { "coupled" } else { "composite" };
    let out = match fmt {
        Format::Csv => trace.to_csv_string(),
        _ => {
            let mut v = trace_json(&target.label, source, &trace);
            if let Some(diff) = comparison {
                v["comparison"] = json!({
                    "max_abs_diff": diff,
                    "tolerance": common.tol,
                    "pass": diff <= common.tol,
                });
            }
            pretty(&v)
        }
    };
    emit(common, &out)?;
    match comparison {
        Some(diff) if diff > common.tol => Err(Exit::failed(format!(
            "composite and coupled runs differ by {diff:e} (tolerance {:e})",
            common.tol
        ))),
        Some(diff) if fmt == Format::Csv => {
            eprintln!("composite and coupled runs agree: max |diff| = {diff:e}");
            Ok(())
        }
        _ => Ok(()),
    }
}

fn report_text(report: &MatchReport) -> String {
    let mut out = String::new();
    writeln!(out, "verdict: {:?} (tolerance {:e})", report.verdict, report.tolerance).unwrap();
    for d in &report.block_diffs {
        let mark = if d.within_tol { "ok" } else { "MISMATCH" };
        match d.at.filter(|_| d.max_abs_diff > 0.0) {
            Some((i, j)) => writeln!(out, "  {:<16} {:e} at ({i}, {j}) {mark}", d.block, d.max_abs_diff),
            None => writeln!(out, "  {:<16} {:e} {mark}", d.block, d.max_abs_diff),
        }
        .unwrap();
    }
    for b in &report.determined {
        text::matrix(
            &mut out,
            &format!("{} [{:?}, {}]", b.name, b.kind, b.component),
            &b.value,
        );
    }
    for f in &report.free {
        match &f.constrained_by {
            Some(p) => writeln!(out, "free: {} ({}), constrained by {p}", f.name, f.component),
            None => writeln!(out, "free: {} ({})", f.name, f.component),
        }
        .unwrap();
    }
    for v in &report.violations {
        writeln!(out, "violation: {v}").unwrap();
    }
    out
}

fn finish_report(common: &Common, fmt: Format, report: &MatchReport, what: &str) -> Result<()> {
    let out = match fmt {
        Format::Text => report_text(report),
        _ => pretty(&to_value(report)),
    };
    emit(common, &out)?;
    if report.passed() {
        Ok(())
    } else {
        let mut why = report.failing_blocks().join(", ");
        if why.is_empty() {
            why = report.violations.join("; ");
        }
        Err(Exit::failed(format!("{what} failed: {why}")))
    }
}

fn check(common: &Common, diagram: &str, candidates: &[String], target: &str) -> Result<()> {
    let fmt = format(common, Format::Json, &[Format::Json, Format::Text], "check")?;
    let src = model::load(&common.model)?;
    let m = &src.loaded.model;
    let d = model::diagram(m, diagram)?;
    let cands = model::systems(m, candidates)?;
    let t = model::system(m, target)?;
    let report = check_composition(d, &cands, t, common.tol).or_usage()?;
    finish_report(common, fmt, &report, "check")
}

fn loop_options(tol: f64, readout: Option<&str>) -> Result<LoopOptions> {
    let controller_readout = match readout {
        Some(spec) => {
            let rows = inputs::matrix_rows(spec, "--controller-readout")?;
            Some(Matrix::from_rows(&rows).or_usage()?)
        }
        None => None,
    };
    Ok(LoopOptions {
        structural_tol: tol,
        controller_readout,
    })
}

fn loop_partition(partition: &[usize]) -> Result<StatePartition> {
    match partition {
        [l, c, d] => Ok(StatePartition::loop_parts(*l, *c, *d)),
        _ => Err(Exit::usage(format!(
            "--partition takes three state sizes (sensor, controller, dynamics), got {}",
            partition.len()
        ))),
    }
}

fn solve(common: &Common, system: &str, partition: &[usize], readout: Option<&str>) -> Result<()> {
    let fmt = format(common, Format::Json, &[Format::Json, Format::Text], "solve")?;
    let src = model::load(&common.model)?;
    let sys = model::system(&src.loaded.model, system)?;
    let part = loop_partition(partition)?;
    let report = recover_loop_blocks_with(sys, &part, &loop_options(common.tol, readout)?).or_usage()?;
    finish_report(common, fmt, &report, "solve")
}

fn flatten_cmd(common: &Common, root: &str) -> Result<()> {
    let fmt = format(common, Format::Json, &[Format::Json, Format::Text], "flatten")?;
    let src = model::load(&common.model)?;
    let t = model::implementation(&src.loaded.model, root)?;
    let flat = flatten(t).or_usage()?;
    let out = match fmt {
        Format::Text => text::diagram(&flat),
        _ => pretty(&json!({"diagram": to_value(&flat), "leaves": to_value(&leaves(t))})),
    };
    emit(common, &out)
}

fn export_dot(common: &Common, diagram: Option<&str>, implementation: Option<&str>) -> Result<()> {
    format(common, Format::Dot, &[Format::Dot], "export-dot")?;
    let src = model::load(&common.model)?;
    let m = &src.loaded.model;
    let out = match (diagram, implementation) {
        (Some(name), _) => dot::diagram(name, model::diagram(m, name)?),
        (None, Some(root)) => dot::tree(model::implementation(m, root)?),
        (None, None) => return Err(Exit::usage("give --diagram or --implementation")),
    };
    emit(common, &out)
}

fn fmt(common: &Common, check: bool) -> Result<()> {
    format(common, Format::Text, &[Format::Text], "fmt")?;
    let src = model::load(&common.model)?;
    let canonical = dsl::serialize(&src.loaded.file);
    if check {
        if src.text == canonical {
            Ok(())
        } else {
            Err(Exit::failed(format!(
                "{} is not in canonical form",
                common.model.display()
            )))
        }
    } else {
        emit(common, &canonical)
    }
}

/// A directive that cannot run is reported against its source position.
fn at(src: &model::Source, d: &Directive, message: impl std::fmt::Display) -> Exit {
    let message = message.to_string();
    let message = message.strip_prefix("error: ").unwrap_or(&message);
    let diag = Diagnostic::error(d.span().clone(), message);
    Exit {
        code: crate::error::USAGE,
        message: render(&diag, &src.text),
    }
}

fn arg_names(app: &Application) -> Vec<String> {
    app.args.iter().map(|a| a.name.clone()).collect()
}

fn run(common: &Common) -> Result<()> {
    format(common, Format::Json, &[Format::Json], "run")?;
    let src = model::load(&common.model)?;
    let m = &src.loaded.model;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for d in &m.directives {
        let line = d.span().line;
        match d {
            Directive::Simulate {
                target,
                steps,
                init,
                input,
                ..
            } => {
                let (label, sys) = match target {
                    SimTarget::System(id) => (id.name.clone(), model::system(m, &id.name)?.clone()),
                    SimTarget::Composite(app) => {
                        let args = arg_names(app);
                        let sys = model::compose(m, &app.diagram.name, &args).map_err(|e| at(&src, d, e.message))?;
                        (application_label(&app.diagram.name, &args), sys)
                    }
                };
                let s0 = initial_state(init.as_deref(), sys.state_dim()).map_err(|e| at(&src, d, e.message))?;
                let x = input.clone().unwrap_or_else(|| vec![0.0; sys.input_dim()]);
                let xs = vec![x; *steps];
                let trace = simulate(&sys, &s0, &xs).map_err(|e| at(&src, d, e))?;
                let mut v = trace_json(&label, "composite", &trace);
                v["kind"] = json!("simulate");
                v["line"] = json!(line);
                results.push(v);
            }
            Directive::Check {
                application,
                target,
                tol,
                ..
            } => {
                let args = arg_names(application);
                let diagram = model::diagram(m, &application.diagram.name)?;
                let cands = model::systems(m, &args)?;
                let t = model::system(m, &target.name)?;
                let report =
                    check_composition(diagram, &cands, t, tol.unwrap_or(common.tol)).map_err(|e| at(&src, d, e))?;
                if !report.passed() {
                    failures.push(format!("line {line}: check against `{}` failed", target.name));
                }
                results.push(json!({
                    "kind": "check",
                    "line": line,
                    "application": application_label(&application.diagram.name, &args),
                    "target": target.name,
                    "report": to_value(&report),
                }));
            }
            Directive::Solve {
                system, partition, tol, ..
            } => {
                let sys = model::system(m, &system.name)?;
                let part = loop_partition(partition).map_err(|e| at(&src, d, e.message))?;
                let opts = loop_options(tol.unwrap_or(common.tol), None)?;
                let report = recover_loop_blocks_with(sys, &part, &opts).map_err(|e| at(&src, d, e))?;
                if !report.passed() {
                    failures.push(format!("line {line}: solve for `{}` failed", system.name));
                }
                results.push(json!({
                    "kind": "solve",
                    "line": line,
                    "system": system.name,
                    "report": to_value(&report),
                }));
            }
        }
    }
    emit(common, &pretty(&Value::Array(results)))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Exit::failed(failures.join("\n")))
    }
}
