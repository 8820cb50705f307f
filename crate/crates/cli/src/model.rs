use std::path::Path;

use wirecomp::dsl::{self, render, Loaded, Model};
use wirecomp::hierarchy::Decomposition;
use wirecomp::{apply_diagram, laxator, LinSystem, WiringDiagram};

use crate::error::{Exit, Result, USAGE};

pub struct Source {
    pub text: String,
    pub loaded: Loaded,
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Exit::usage(format!("cannot read {}: {e}", path.display())))
}

/// Loads a model; diagnostics and warnings go to stderr.
pub fn load(path: &Path) -> Result<Source> {
    let text = read(path)?;
    let name = path.display().to_string();
    match dsl::load(&name, &text) {
        Ok(loaded) => {
            for w in &loaded.warnings {
                eprintln!("{}", render(w, &text));
            }
            Ok(Source { text, loaded })
        }
        Err(diags) => {
            let rendered: Vec<String> = diags.iter().map(|d| render(d, &text)).collect();
            Err(Exit {
                code: USAGE,
                message: rendered.join("\n"),
            })
        }
    }
}

fn names<'a>(items: impl Iterator<Item = &'a str>) -> String {
    let v: Vec<&str> = items.collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

pub fn system<'a>(m: &'a Model, name: &str) -> Result<&'a LinSystem> {
    m.system(name).ok_or_else(|| {
        Exit::usage(format!(
            "unknown system `{name}` (declared: {})",
            names(m.systems.iter().map(|(n, _)| n.as_str()))
        ))
    })
}

pub fn diagram<'a>(m: &'a Model, name: &str) -> Result<&'a WiringDiagram> {
    m.diagram(name).ok_or_else(|| {
        Exit::usage(format!(
            "unknown diagram `{name}` (declared: {})",
            names(m.diagrams.iter().map(|(n, _)| n.as_str()))
        ))
    })
}

pub fn implementation<'a>(m: &'a Model, root: &str) -> Result<&'a Decomposition> {
    m.implementation(root).ok_or_else(|| {
        Exit::usage(format!(
            "no implementation of `{root}` (implemented: {})",
            names(m.implementations.iter().map(|(n, _)| n.as_str()))
        ))
    })
}

pub fn systems<'a>(m: &'a Model, list: &[String]) -> Result<Vec<&'a LinSystem>> {
    list.iter().map(|n| system(m, n)).collect()
}

/// `diagram(systems...)`, with errors that name the diagram's inner boxes
/// and the boxes the systems live on.
pub fn compose(m: &Model, diagram_name: &str, list: &[String]) -> Result<LinSystem> {
    let d = diagram(m, diagram_name)?;
    let parts = systems(m, list)?;
    apply_diagram(d, &laxator(&parts)).map_err(|e| {
        Exit::usage(format!(
            "cannot apply diagram `{diagram_name}` ({} -> {}) to {}: {e}",
            d.domain(),
            d.codomain(),
            names(list.iter().map(String::as_str))
        ))
    })
}
