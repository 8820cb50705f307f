//! Canonical text for a [`ModelFile`]. Comments are not part of the tree and
//! do not survive formatting.

use std::fmt::Write;

use super::ast::*;

fn num(out: &mut String, x: f64) {
    // `{}` prints the shortest string that parses back to the same f64.
    write!(out, "{x}").expect("writing to a String");
}

fn vector(out: &mut String, v: &[f64]) {
    out.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        num(out, *x);
    }
    out.push(']');
}

fn matrix(out: &mut String, m: &MatrixLit) {
    out.push('[');
    for (i, r) in m.rows.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        vector(out, r);
    }
    out.push(']');
}

fn tensor(out: &mut String, names: &[Ident]) {
    if names.is_empty() {
        out.push_str("()");
    }
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            out.push_str(" (*) ");
        }
        out.push_str(&n.name);
    }
}

fn application(out: &mut String, app: &Application) {
    out.push_str(&app.diagram.name);
    out.push('(');
    let args: Vec<&str> = app.args.iter().map(|a| a.name.as_str()).collect();
    out.push_str(&args.join(", "));
    out.push(')');
}

fn children(out: &mut String, cs: &[ChildDecl], indent: usize) {
    out.push_str(" {\n");
    for c in cs {
        let pad = "  ".repeat(indent + 1);
        write!(out, "{pad}child {} by {}", c.boxname.name, c.diagram.name).expect("writing to a String");
        if c.children.is_empty() {
            out.push_str(";\n");
        } else {
            children(out, &c.children, indent + 1);
            out.push('\n');
        }
    }
    out.push_str(&"  ".repeat(indent));
    out.push('}');
}

fn tol(out: &mut String, t: Option<f64>) {
    if let Some(t) = t {
        out.push_str(" tol ");
        num(out, t);
    }
}

fn decl(out: &mut String, d: &Decl) {
    match d {
        Decl::Box(b) => {
            write!(out, "box {} {{", b.name.name).expect("writing to a String");
            for (i, p) in b.ports.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { "; " });
                let dir = match p.direction {
                    Direction::In => "in",
                    Direction::Out => "out",
                };
                write!(out, "{dir} {}: R", p.name.name).expect("writing to a String");
                if p.dim != 1 {
                    write!(out, "^{}", p.dim).expect("writing to a String");
                }
            }
            out.push_str(if b.ports.is_empty() { "}" } else { " }" });
        }
        Decl::System(s) => match &s.body {
            SystemBody::Composite(app) => {
                write!(out, "system {} = ", s.name.name).expect("writing to a String");
                application(out, app);
                out.push(';');
            }
            SystemBody::Literal {
                on, state, matrices, ..
            } => {
                writeln!(out, "system {} on {} {{", s.name.name, on.name).expect("writing to a String");
                writeln!(out, "  state {state};").expect("writing to a String");
                for m in matrices {
                    write!(out, "  {} = ", m.name.as_str()).expect("writing to a String");
                    if m.name == MatrixName::D && m.value.rows.is_empty() {
                        out.push_str("zero");
                    } else {
                        matrix(out, &m.value);
                    }
                    out.push_str(";\n");
                }
                out.push('}');
            }
        },
        Decl::Diagram(d) => {
            write!(out, "diagram {} : ", d.name.name).expect("writing to a String");
            tensor(out, &d.domain);
            out.push_str(" -> ");
            tensor(out, &d.codomain);
            if d.items.is_empty() {
                out.push_str(" {}");
                return;
            }
            out.push_str(" {\n");
            for item in &d.items {
                match item {
                    DiagramItem::Wire { src, dst, .. } => {
                        writeln!(out, "  wire {} -> {};", src.qualified(), dst.qualified())
                            .expect("writing to a String")
                    }
                    DiagramItem::Map { dst, value, .. } => {
                        write!(out, "  map {} <- ", dst.qualified()).expect("writing to a String");
                        matrix(out, value);
                        out.push_str(";\n");
                    }
                }
            }
            out.push('}');
        }
        Decl::Implement(i) => {
            write!(out, "implement {} by {}", i.root.name, i.diagram.name).expect("writing to a String");
            if i.children.is_empty() {
                out.push(';');
            } else {
                children(out, &i.children, 0);
            }
        }
        Decl::Directive(Directive::Simulate {
            target,
            steps,
            init,
            input,
            ..
        }) => {
            out.push_str("simulate ");
            match target {
                SimTarget::System(s) => out.push_str(&s.name),
                SimTarget::Composite(app) => application(out, app),
            }
            write!(out, " steps {steps}").expect("writing to a String");
            if let Some(v) = init {
                out.push_str(" init ");
                vector(out, v);
            }
            if let Some(v) = input {
                out.push_str(" input ");
                vector(out, v);
            }
            out.push(';');
        }
        Decl::Directive(Directive::Check {
            application: app,
            target,
            tol: t,
            ..
        }) => {
            out.push_str("check ");
            application(out, app);
            write!(out, " against {}", target.name).expect("writing to a String");
            tol(out, *t);
            out.push(';');
        }
        Decl::Directive(Directive::Solve {
            system,
            partition,
            tol: t,
            ..
        }) => {
            let parts: Vec<String> = partition.iter().map(usize::to_string).collect();
            write!(out, "solve {} partition ({})", system.name, parts.join(", ")).expect("writing to a String");
            tol(out, *t);
            out.push(';');
        }
    }
}

/// Canonical text: one declaration per block, a blank line between
/// declarations, consecutive directives kept together.
pub fn serialize(file: &ModelFile) -> String {
    let mut out = String::new();
    let mut prev_directive = None;
    for d in &file.decls {
        let is_directive = matches!(d, Decl::Directive(_));
        match prev_directive {
            Some(true) if is_directive => {}
            Some(_) => out.push('\n'),
            None => {}
        }
        decl(&mut out, d);
        out.push('\n');
        prev_directive = Some(is_directive);
    }
    out
}
