//! Name resolution over a parsed file. Order independent: every table is
//! built before any reference is looked up.

use std::collections::HashMap;

use super::ast::*;
use super::span::Diagnostic;

/// Per-kind symbol tables, each mapping a name to its declaration index.
#[derive(Debug, Default)]
pub struct Symbols {
    pub boxes: HashMap<String, usize>,
    pub systems: HashMap<String, usize>,
    pub diagrams: HashMap<String, usize>,
    pub implements: HashMap<String, usize>,
}

fn declare(
    table: &mut HashMap<String, usize>,
    kind: &str,
    id: &Ident,
    index: usize,
    firsts: &mut HashMap<(String, String), Ident>,
    diags: &mut Vec<Diagnostic>,
) {
    let key = (kind.to_string(), id.name.clone());
    if let Some(first) = firsts.get(&key) {
        diags.push(Diagnostic::error(
            id.span.clone(),
            format!(
                "duplicate {kind} `{}` (first declared at line {})",
                id.name, first.span.line
            ),
        ));
    } else {
        firsts.insert(key, id.clone());
        table.insert(id.name.clone(), index);
    }
}

pub fn symbols(file: &ModelFile, diags: &mut Vec<Diagnostic>) -> Symbols {
    let mut s = Symbols::default();
    let mut firsts = HashMap::new();
    for (i, d) in file.decls.iter().enumerate() {
        match d {
            Decl::Box(b) => declare(&mut s.boxes, "box", &b.name, i, &mut firsts, diags),
            Decl::System(x) => declare(&mut s.systems, "system", &x.name, i, &mut firsts, diags),
            Decl::Diagram(x) => declare(&mut s.diagrams, "diagram", &x.name, i, &mut firsts, diags),
            Decl::Implement(x) => declare(&mut s.implements, "implementation of", &x.root, i, &mut firsts, diags),
            Decl::Directive(_) => {}
        }
    }
    s
}

struct Resolver<'a> {
    file: &'a ModelFile,
    sym: &'a Symbols,
    diags: &'a mut Vec<Diagnostic>,
}

impl Resolver<'_> {
    fn box_decl(&self, name: &str) -> Option<&BoxDecl> {
        match &self.file.decls[*self.sym.boxes.get(name)?] {
            Decl::Box(b) => Some(b),
            _ => None,
        }
    }

    fn diagram_decl(&self, name: &str) -> Option<&DiagramDecl> {
        match &self.file.decls[*self.sym.diagrams.get(name)?] {
            Decl::Diagram(d) => Some(d),
            _ => None,
        }
    }

    fn need(&mut self, table: &HashMap<String, usize>, kind: &str, id: &Ident) -> bool {
        let ok = table.contains_key(&id.name);
        if !ok {
            self.diags.push(Diagnostic::error(
                id.span.clone(),
                format!("unknown {kind} `{}`", id.name),
            ));
        }
        ok
    }

    fn application(&mut self, app: &Application) {
        let sym = self.sym;
        self.need(&sym.diagrams, "diagram", &app.diagram);
        for a in &app.args {
            self.need(&sym.systems, "system", a);
        }
    }

    fn diagram(&mut self, d: &DiagramDecl) {
        let sym = self.sym;
        for b in d.domain.iter().chain(&d.codomain) {
            self.need(&sym.boxes, "box", b);
        }
        for item in &d.items {
            match item {
                DiagramItem::Wire { src, dst, .. } => {
                    let s = self.port_ref(d, src, true);
                    let t = self.port_ref(d, dst, false);
                    if let (Some(Place::OuterOnly), Some(Place::OuterOnly)) = (s, t) {
                        self.diags.push(Diagnostic::error(
                            src.span(),
                            format!(
                                "wire {} -> {} joins an outer input to an outer output: no passthrough in wiring-diagram morphisms",
                                src.qualified(),
                                dst.qualified()
                            ),
                        ));
                    }
                }
                DiagramItem::Map { dst, .. } => {
                    self.port_ref(d, dst, false);
                }
            }
        }
    }

    /// Checks that the box is on this diagram and has the port somewhere.
    /// Role-specific resolution happens when the diagram is compiled.
    fn port_ref(&mut self, d: &DiagramDecl, r: &PortRef, as_source: bool) -> Option<Place> {
        let name = &r.boxname.name;
        let inner = d.domain.iter().any(|b| &b.name == name);
        let outer = d.codomain.iter().any(|b| &b.name == name);
        if !inner && !outer {
            self.diags.push(Diagnostic::error(
                r.boxname.span.clone(),
                format!("box `{name}` is not part of diagram `{}`", d.name.name),
            ));
            return None;
        }
        let b = self.box_decl(name)?;
        // Sources are inner outputs or outer inputs; targets the reverse.
        let has = |dir: Direction| b.ports.iter().any(|p| p.name.name == r.port.name && p.direction == dir);
        let (inner_dir, outer_dir) = if as_source {
            (Direction::Out, Direction::In)
        } else {
            (Direction::In, Direction::Out)
        };
        let at_inner = inner && has(inner_dir);
        let at_outer = outer && has(outer_dir);
        if !b.ports.iter().any(|p| p.name.name == r.port.name) {
            self.diags.push(Diagnostic::error(
                r.port.span.clone(),
                format!("box `{name}` has no port `{}`", r.port.name),
            ));
            return None;
        }
        match (at_inner, at_outer) {
            (false, true) => Some(Place::OuterOnly),
            _ => Some(Place::Other),
        }
    }

    fn children(&mut self, diagram: &Ident, children: &[ChildDecl]) {
        let sym = self.sym;
        let node = self.diagram_decl(&diagram.name).cloned();
        for c in children {
            if self.need(&sym.boxes, "box", &c.boxname) {
                if let Some(node) = &node {
                    if !node.domain.iter().any(|b| b.name == c.boxname.name) {
                        self.diags.push(Diagnostic::error(
                            c.boxname.span.clone(),
                            format!(
                                "box `{}` is not an inner box of diagram `{}`",
                                c.boxname.name, node.name.name
                            ),
                        ));
                    }
                }
            }
            self.need(&sym.diagrams, "diagram", &c.diagram);
            self.children(&c.diagram, &c.children);
        }
    }
}

#[derive(Clone, Copy)]
enum Place {
    OuterOnly,
    Other,
}

pub fn resolve(file: &ModelFile, sym: &Symbols, diags: &mut Vec<Diagnostic>) {
    let mut r = Resolver { file, sym, diags };
    for d in &file.decls {
        match d {
            Decl::Box(_) => {}
            Decl::System(s) => match &s.body {
                SystemBody::Literal { on, .. } => {
                    r.need(&sym.boxes, "box", on);
                }
                SystemBody::Composite(app) => r.application(app),
            },
            Decl::Diagram(d) => r.diagram(d),
            Decl::Implement(i) => {
                r.need(&sym.boxes, "box", &i.root);
                r.need(&sym.diagrams, "diagram", &i.diagram);
                r.children(&i.diagram, &i.children);
            }
            Decl::Directive(Directive::Simulate { target, .. }) => match target {
                SimTarget::System(s) => {
                    r.need(&sym.systems, "system", s);
                }
                SimTarget::Composite(app) => r.application(app),
            },
            Decl::Directive(Directive::Check {
                application, target, ..
            }) => {
                r.application(application);
                r.need(&sym.systems, "system", target);
            }
            Decl::Directive(Directive::Solve { system, .. }) => {
                r.need(&sym.systems, "system", system);
            }
        }
    }
}
