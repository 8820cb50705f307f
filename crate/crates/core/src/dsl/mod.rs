//! The `.wd` modeling language.
//!
//! ```text
//! box D { in c: R; out s: R^3 }
//! system Dsys on D { state 3; A = [[..], ..]; B = [[..]]; C = [[..]] }
//! system Usys = f(Lsys, Csys, Dsys);
//! diagram f : L (*) C (*) D -> U { wire U.e -> L.e; map C.d <- [[..]]; }
//! implement U by f { child L by g; child C by h { child P2 by p; } }
//! simulate Usys steps 100 init [..] input [..];
//! check f(Lsys, Csys, Dsys) against Usys tol 1e-9;
//! solve Usys partition (1, 1, 3);
//! ```
//!
//! A `map` line writes a raw block into the row of its target port: for an
//! inner input the block spans the inner outputs followed by the outer
//! inputs, for an outer output it spans the inner outputs. Wires and maps
//! never share a target.

pub mod ast;
mod compile;
mod export;
mod format;
mod lexer;
mod parser;
mod resolve;
mod span;

use std::sync::Arc;

pub use compile::{compile, Model};
pub use export::{to_json, to_json_value};
pub use format::serialize;
pub use span::{render, Diagnostic, Diagnostics, Severity, SourceSpan};

use crate::wd::{LabeledBox, WiringDiagram};
use ast::{DiagramDecl, ModelFile};

/// Parses and resolves `text`. Syntax errors are collected across
/// declarations; resolution only runs on a syntactically clean file.
pub fn parse_named(file: &str, text: &str) -> Result<ModelFile, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let (tokens, mut diags) = lexer::lex(&file, text);
    let (model, parse_diags) = parser::Parser::new(tokens).parse_file();
    diags.extend(parse_diags);
    if diags.is_empty() {
        let sym = resolve::symbols(&model, &mut diags);
        resolve::resolve(&model, &sym, &mut diags);
    }
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(Diagnostics(diags))
    }
}

pub fn parse(text: &str) -> Result<ModelFile, Diagnostics> {
    parse_named("<input>", text)
}

/// A parsed, resolved and compiled file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ModelFile,
    pub model: Model,
    pub warnings: Vec<Diagnostic>,
}

pub fn load(file: &str, text: &str) -> Result<Loaded, Diagnostics> {
    let parsed = parse_named(file, text)?;
    let (model, warnings) = compile(&parsed).map_err(Diagnostics)?;
    Ok(Loaded {
        file: parsed,
        model,
        warnings,
    })
}

/// Lowers one diagram declaration against the given boxes. Returns the
/// diagram and its warnings (unwired inner inputs).
pub fn compile_routing(
    decl: &DiagramDecl,
    boxes: &[LabeledBox],
) -> Result<(WiringDiagram, Vec<Diagnostic>), Diagnostics> {
    compile::compile_diagram(decl, boxes).map_err(Diagnostics)
}
