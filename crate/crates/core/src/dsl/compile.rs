//! Lowering a resolved [`ModelFile`] to library values.

use std::collections::HashMap;

use super::ast::*;
use super::span::{Diagnostic, SourceSpan};
use crate::hierarchy::{Child, Decomposition};
use crate::ltis::{apply_diagram, laxator, LinSystem};
use crate::numerics::Matrix;
use crate::wd::{BoxTensor, LabeledBox, Port, RouteError, RoutingBuilder, WiringDiagram};

/// Everything a file declares, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub boxes: Vec<LabeledBox>,
    pub systems: Vec<(String, LinSystem)>,
    pub diagrams: Vec<(String, WiringDiagram)>,
    /// Keyed by root box name.
    pub implementations: Vec<(String, Decomposition)>,
    pub directives: Vec<Directive>,
}

impl Model {
    pub fn box_named(&self, name: &str) -> Option<&LabeledBox> {
        self.boxes.iter().find(|b| b.name == name)
    }

    pub fn system(&self, name: &str) -> Option<&LinSystem> {
        self.systems.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn diagram(&self, name: &str) -> Option<&WiringDiagram> {
        self.diagrams.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn implementation(&self, root: &str) -> Option<&Decomposition> {
        self.implementations.iter().find(|(n, _)| n == root).map(|(_, d)| d)
    }
}

pub fn matrix_of(lit: &MatrixLit, rows: usize, cols: usize, what: &str) -> Result<Matrix, Diagnostic> {
    let shape_err =
        |found: String| Diagnostic::error(lit.span.clone(), format!("{what} must be {rows}x{cols}, found {found}"));
    if lit.rows.len() != rows {
        let found = match lit.rows.first() {
            Some(r) => format!("{}x{}", lit.rows.len(), r.len()),
            None => "no rows".to_string(),
        };
        return Err(shape_err(found));
    }
    if let Some((i, r)) = lit.rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(shape_err(format!("{} entries in row {}", r.len(), i + 1)));
    }
    Matrix::new(rows, cols, lit.rows.concat()).map_err(|e| Diagnostic::error(lit.span.clone(), format!("{what}: {e}")))
}

struct Compiler<'a> {
    diags: Vec<Diagnostic>,
    boxes: HashMap<String, LabeledBox>,
    diagrams: HashMap<String, WiringDiagram>,
    system_decls: HashMap<String, &'a SystemDecl>,
    systems: HashMap<String, Option<LinSystem>>,
    in_progress: Vec<String>,
}

impl<'a> Compiler<'a> {
    fn error(&mut self, span: SourceSpan, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    fn compile_box(&mut self, d: &BoxDecl) {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut ok = true;
        for p in &d.ports {
            let (side, list) = match p.direction {
                Direction::In => ("input", &mut inputs),
                Direction::Out => ("output", &mut outputs),
            };
            if list.iter().any(|q: &Port| q.name == p.name.name) {
                self.diags.push(Diagnostic::error(
                    p.name.span.clone(),
                    format!("duplicate {side} port `{}` on box `{}`", p.name.name, d.name.name),
                ));
                ok = false;
                continue;
            }
            list.push(Port::new(p.name.name.clone(), p.dim));
        }
        if !ok {
            return;
        }
        match LabeledBox::new(d.name.name.clone(), inputs, outputs) {
            Ok(b) => {
                self.boxes.insert(d.name.name.clone(), b);
            }
            Err(e) => self.error(d.name.span.clone(), e.to_string()),
        }
    }

    fn tensor(&self, names: &[Ident]) -> Option<BoxTensor> {
        let factors: Option<Vec<LabeledBox>> = names.iter().map(|n| self.boxes.get(&n.name).cloned()).collect();
        factors.map(BoxTensor::from_factors)
    }

    fn compile_diagram(&mut self, d: &DiagramDecl) {
        let (Some(domain), Some(codomain)) = (self.tensor(&d.domain), self.tensor(&d.codomain)) else {
            return;
        };
        let mut b = RoutingBuilder::new(domain, codomain);
        let mut ok = true;
        for item in &d.items {
            let res = match item {
                DiagramItem::Wire { src, dst, .. } => b
                    .wire((&src.boxname.name, &src.port.name), (&dst.boxname.name, &dst.port.name))
                    .map_err(|e| (wire_error_span(&e, src, dst), e)),
                DiagramItem::Map { dst, value, .. } => {
                    let rows = port_dim(dst, &self.boxes).unwrap_or(value.rows.len());
                    let cols_hint = value.rows.first().map_or(0, Vec::len);
                    match rows_matrix(value, rows, cols_hint) {
                        Ok(m) => b.map((&dst.boxname.name, &dst.port.name), &m).map_err(|e| {
                            let span = match e {
                                RouteError::MapShape { .. } => value.span.clone(),
                                _ => dst.span(),
                            };
                            (span, e)
                        }),
                        Err(diag) => {
                            self.diags.push(diag);
                            ok = false;
                            continue;
                        }
                    }
                }
            };
            if let Err((span, e)) = res {
                ok = false;
                self.error(span, format!("in diagram `{}`: {e}", d.name.name));
            }
        }
        if !ok {
            return;
        }
        for p in b.unwired_inputs() {
            self.diags.push(Diagnostic::warning(
                d.name.span.clone(),
                format!(
                    "inner input {} of diagram `{}` is not wired; it reads zero",
                    p.name, d.name.name
                ),
            ));
        }
        self.diagrams.insert(d.name.name.clone(), b.finish());
    }

    fn system(&mut self, name: &str) -> Option<LinSystem> {
        if let Some(done) = self.systems.get(name) {
            return done.clone();
        }
        let decl = *self.system_decls.get(name)?;
        if self.in_progress.iter().any(|n| n == name) {
            let cycle = self.in_progress.join(" -> ");
            self.error(
                decl.name.span.clone(),
                format!("system `{name}` is defined in terms of itself ({cycle} -> {name})"),
            );
            self.systems.insert(name.to_string(), None);
            return None;
        }
        self.in_progress.push(name.to_string());
        let sys = match &decl.body {
            SystemBody::Literal {
                on, state, matrices, ..
            } => self.literal_system(decl, on, *state, matrices),
            SystemBody::Composite(app) => self.apply(app),
        };
        self.in_progress.pop();
        self.systems.insert(name.to_string(), sys.clone());
        sys
    }

    fn literal_system(
        &mut self,
        decl: &SystemDecl,
        on: &Ident,
        n: usize,
        matrices: &[MatrixAssign],
    ) -> Option<LinSystem> {
        let b = self.boxes.get(&on.name)?.clone();
        let (ni, no) = (b.total_in(), b.total_out());
        let mut a = Matrix::zeros(n, n);
        let mut bm = Matrix::zeros(n, ni);
        let mut c = Matrix::zeros(no, n);
        let mut seen: Vec<MatrixName> = Vec::new();
        let mut ok = true;
        for m in matrices {
            if seen.contains(&m.name) {
                self.error(
                    m.span.clone(),
                    format!("{} assigned twice in system `{}`", m.name.as_str(), decl.name.name),
                );
                ok = false;
                continue;
            }
            seen.push(m.name);
            let what = format!("{} of system `{}`", m.name.as_str(), decl.name.name);
            let res = match m.name {
                MatrixName::A => matrix_of(&m.value, n, n, &what).map(|x| a = x),
                MatrixName::B => matrix_of(&m.value, n, ni, &what).map(|x| bm = x),
                MatrixName::C => matrix_of(&m.value, no, n, &what).map(|x| c = x),
                MatrixName::D => {
                    if m.value.rows.iter().flatten().any(|&x| x != 0.0) {
                        Err(Diagnostic::error(
                            m.value.span.clone(),
                            format!(
                                "system `{}`: nonzero feedforward D is not supported; outputs read the state only, so feedback wiring cannot create algebraic loops",
                                decl.name.name
                            ),
                        ))
                    } else {
                        Ok(())
                    }
                }
            };
            if let Err(d) = res {
                self.diags.push(d);
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        match LinSystem::new(b, a, bm, c) {
            Ok(s) => Some(s),
            Err(e) => {
                self.error(decl.name.span.clone(), e.to_string());
                None
            }
        }
    }

    fn apply(&mut self, app: &Application) -> Option<LinSystem> {
        let d = self.diagrams.get(&app.diagram.name)?.clone();
        let mut parts = Vec::new();
        for a in &app.args {
            parts.push(self.system(&a.name));
        }
        let parts: Vec<LinSystem> = parts.into_iter().collect::<Option<_>>()?;
        let refs: Vec<&LinSystem> = parts.iter().collect();
        let lax = laxator(&refs);
        match apply_diagram(&d, &lax) {
            Ok(s) => Some(s),
            Err(e) => {
                let names: Vec<&str> = app.args.iter().map(|a| a.name.as_str()).collect();
                self.error(
                    app.span.clone(),
                    format!(
                        "cannot apply diagram `{}` to ({}): {e}",
                        app.diagram.name,
                        names.join(", ")
                    ),
                );
                None
            }
        }
    }

    fn decomposition(&mut self, root: &Ident, diagram: &Ident, children: &[ChildDecl]) -> Option<Decomposition> {
        let root_box = self.boxes.get(&root.name)?.clone();
        let node = self.diagrams.get(&diagram.name)?.clone();
        let mut opened: Vec<Option<&ChildDecl>> = vec![None; node.domain().len()];
        let mut ok = true;
        for c in children {
            let hits: Vec<usize> = node
                .domain()
                .factors()
                .iter()
                .enumerate()
                .filter(|(_, f)| f.name == c.boxname.name)
                .map(|(i, _)| i)
                .collect();
            match hits.as_slice() {
                [i] if opened[*i].is_some() => {
                    self.error(
                        c.boxname.span.clone(),
                        format!("box `{}` is opened twice", c.boxname.name),
                    );
                    ok = false;
                }
                [i] => opened[*i] = Some(c),
                [] => ok = false,
                _ => {
                    self.error(
                        c.boxname.span.clone(),
                        format!(
                            "box `{}` appears more than once in diagram `{}`; which one to open is ambiguous",
                            c.boxname.name, diagram.name
                        ),
                    );
                    ok = false;
                }
            }
        }
        if !ok {
            return None;
        }
        let mut kids = Vec::new();
        for (factor, c) in node.domain().factors().iter().zip(opened) {
            match c {
                None => kids.push(Child::Leaf(factor.clone())),
                Some(c) => kids.push(Child::Node(self.decomposition(&c.boxname, &c.diagram, &c.children)?)),
            }
        }
        match Decomposition::new(root_box, node, kids) {
            Ok(d) => Some(d),
            Err(e) => {
                self.error(
                    diagram.span.clone(),
                    format!("`{}` by `{}`: {e}", root.name, diagram.name),
                );
                None
            }
        }
    }
}

fn wire_error_span(e: &RouteError, src: &PortRef, dst: &PortRef) -> SourceSpan {
    match e {
        RouteError::UnknownPort { role: "target", .. } | RouteError::FanIn(_) | RouteError::DimMismatch { .. } => {
            dst.span()
        }
        RouteError::UnknownBox(b) | RouteError::AmbiguousBox(b) if *b != src.boxname.name => dst.span(),
        _ => src.span(),
    }
}

fn port_dim(dst: &PortRef, boxes: &HashMap<String, LabeledBox>) -> Option<usize> {
    let b = boxes.get(&dst.boxname.name)?;
    b.input(&dst.port.name)
        .or_else(|| b.output(&dst.port.name))
        .map(|p| p.dim)
}

/// A `map` literal is checked for raggedness here; the builder checks its
/// shape against the target port.
fn rows_matrix(lit: &MatrixLit, rows: usize, cols_hint: usize) -> Result<Matrix, Diagnostic> {
    if lit.rows.len() != rows {
        return Err(Diagnostic::error(
            lit.span.clone(),
            format!(
                "map block must have {rows} rows, one per component of the target port, found {}",
                lit.rows.len()
            ),
        ));
    }
    matrix_of(lit, rows, cols_hint, "map block")
}

pub(super) fn compile_diagram(
    decl: &DiagramDecl,
    boxes: &[LabeledBox],
) -> Result<(WiringDiagram, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut c = Compiler {
        diags: Vec::new(),
        boxes: boxes.iter().map(|b| (b.name.clone(), b.clone())).collect(),
        diagrams: HashMap::new(),
        system_decls: HashMap::new(),
        systems: HashMap::new(),
        in_progress: Vec::new(),
    };
    for b in decl.domain.iter().chain(&decl.codomain) {
        if !c.boxes.contains_key(&b.name) {
            c.error(b.span.clone(), format!("unknown box `{}`", b.name));
        }
    }
    c.compile_diagram(decl);
    match c.diagrams.remove(&decl.name.name) {
        Some(d) if !c.diags.iter().any(Diagnostic::is_error) => Ok((d, c.diags)),
        _ => Err(c.diags),
    }
}

/// Compiles a resolved file. On success returns the model and any warnings.
pub fn compile(file: &ModelFile) -> Result<(Model, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut c = Compiler {
        diags: Vec::new(),
        boxes: HashMap::new(),
        diagrams: HashMap::new(),
        system_decls: HashMap::new(),
        systems: HashMap::new(),
        in_progress: Vec::new(),
    };
    for d in &file.decls {
        if let Decl::System(x) = d {
            c.system_decls.entry(x.name.name.clone()).or_insert(x);
        }
    }
    for d in &file.decls {
        if let Decl::Box(b) = d {
            c.compile_box(b);
        }
    }
    for d in &file.decls {
        if let Decl::Diagram(x) = d {
            c.compile_diagram(x);
        }
    }
    let mut model = Model::default();
    for d in &file.decls {
        match d {
            Decl::Box(b) => {
                if let Some(x) = c.boxes.get(&b.name.name) {
                    model.boxes.push(x.clone());
                }
            }
            Decl::Diagram(x) => {
                if let Some(w) = c.diagrams.get(&x.name.name) {
                    model.diagrams.push((x.name.name.clone(), w.clone()));
                }
            }
            Decl::System(x) => {
                if let Some(s) = c.system(&x.name.name) {
                    model.systems.push((x.name.name.clone(), s));
                }
            }
            Decl::Implement(i) => {
                if let Some(t) = c.decomposition(&i.root, &i.diagram, &i.children) {
                    model.implementations.push((i.root.name.clone(), t));
                }
            }
            Decl::Directive(x) => model.directives.push(x.clone()),
        }
    }
    if c.diags.iter().any(Diagnostic::is_error) {
        Err(c.diags)
    } else {
        Ok((model, c.diags))
    }
}
