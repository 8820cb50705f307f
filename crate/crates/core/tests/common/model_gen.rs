//! Random valid `.wd` models, built as parse trees.

use rand::seq::SliceRandom;
use rand::Rng;

use super::TestRng;
use wirecomp::dsl::ast::*;
use wirecomp::dsl::SourceSpan;

fn sp() -> SourceSpan {
    SourceSpan::synthetic()
}

/// Mostly short decimals, sometimes full-precision or extreme values, so the
/// round trip exercises exact float printing.
fn number(rng: &mut TestRng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => rng.gen_range(-1.0..1.0),
        2 => rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-300..300)),
        3 => -0.0,
        _ => (rng.gen_range(-1000..1000) as f64) / 100.0,
    }
}

fn lit(rng: &mut TestRng, rows: usize, cols: usize) -> MatrixLit {
    MatrixLit {
        rows: (0..rows).map(|_| (0..cols).map(|_| number(rng)).collect()).collect(),
        span: sp(),
    }
}

struct BoxInfo {
    name: String,
    inputs: Vec<(String, usize)>,
    outputs: Vec<(String, usize)>,
}

impl BoxInfo {
    fn total_in(&self) -> usize {
        self.inputs.iter().map(|p| p.1).sum()
    }
    fn total_out(&self) -> usize {
        self.outputs.iter().map(|p| p.1).sum()
    }
}

struct DiagramInfo {
    name: String,
    domain: Vec<usize>,
    codomain: usize,
}

fn ident(s: &str) -> Ident {
    Ident::new(s)
}

fn port_ref(b: &str, p: &str) -> PortRef {
    PortRef::new(b, p)
}

pub fn random_model(rng: &mut TestRng) -> ModelFile {
    let mut decls = Vec::new();

    let nboxes = rng.gen_range(1..=5);
    let mut boxes = Vec::new();
    for i in 0..nboxes {
        let mut ports = Vec::new();
        let mut info = BoxInfo {
            name: format!("B{i}"),
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        for j in 0..rng.gen_range(0..=3) {
            let dim = rng.gen_range(1..=3);
            let name = format!("p{j}");
            let direction = if rng.gen_bool(0.5) {
                Direction::In
            } else {
                Direction::Out
            };
            match direction {
                Direction::In => info.inputs.push((name.clone(), dim)),
                Direction::Out => info.outputs.push((name.clone(), dim)),
            }
            ports.push(PortDecl {
                direction,
                name: ident(&name),
                dim,
                span: sp(),
            });
        }
        decls.push(Decl::Box(BoxDecl {
            name: ident(&info.name),
            ports,
            span: sp(),
        }));
        boxes.push(info);
    }

    // One literal system per box, sometimes omitting matrices.
    let mut literal_on: Vec<(String, usize, usize)> = Vec::new();
    for (bi, b) in boxes.iter().enumerate() {
        if rng.gen_bool(0.2) {
            continue;
        }
        let n = rng.gen_range(0..=3);
        let mut matrices = Vec::new();
        for (name, rows, cols) in [
            (MatrixName::A, n, n),
            (MatrixName::B, n, b.total_in()),
            (MatrixName::C, b.total_out(), n),
        ] {
            if rng.gen_bool(0.85) {
                matrices.push(MatrixAssign {
                    name,
                    value: lit(rng, rows, cols),
                    span: sp(),
                });
            }
        }
        if rng.gen_bool(0.2) {
            matrices.push(MatrixAssign {
                name: MatrixName::D,
                value: MatrixLit {
                    rows: Vec::new(),
                    span: sp(),
                },
                span: sp(),
            });
        }
        matrices.shuffle(rng);
        let sname = format!("S{bi}");
        decls.push(Decl::System(SystemDecl {
            name: ident(&sname),
            body: SystemBody::Literal {
                on: ident(&b.name),
                state: n,
                state_span: sp(),
                matrices,
            },
            span: sp(),
        }));
        literal_on.push((sname, bi, n));
    }

    let mut diagrams: Vec<DiagramInfo> = Vec::new();
    for di in 0..rng.gen_range(0..=4) {
        let codomain = rng.gen_range(0..nboxes);
        let mut others: Vec<usize> = (0..nboxes).filter(|&i| i != codomain).collect();
        others.shuffle(rng);
        others.truncate(rng.gen_range(0..=3.min(others.len())));
        let domain = others;
        let name = format!("d{di}");
        let items = diagram_items(rng, &boxes, &domain, codomain);
        decls.push(Decl::Diagram(DiagramDecl {
            name: ident(&name),
            domain: domain.iter().map(|&i| ident(&boxes[i].name)).collect(),
            codomain: vec![ident(&boxes[codomain].name)],
            items,
            span: sp(),
        }));
        diagrams.push(DiagramInfo { name, domain, codomain });
    }

    // Composites: a diagram applied to literal systems on each inner box.
    let mut systems: Vec<(String, usize, usize)> = literal_on.clone();
    let mut apps = Vec::new();
    for (k, d) in diagrams.iter().enumerate() {
        let args: Option<Vec<&(String, usize, usize)>> = d
            .domain
            .iter()
            .map(|&bi| literal_on.iter().find(|s| s.1 == bi))
            .collect();
        let Some(args) = args else { continue };
        if !rng.gen_bool(0.7) {
            continue;
        }
        let app = Application {
            diagram: ident(&d.name),
            args: args.iter().map(|a| ident(&a.0)).collect(),
            span: sp(),
        };
        let n: usize = args.iter().map(|a| a.2).sum();
        let sname = format!("K{k}");
        decls.push(Decl::System(SystemDecl {
            name: ident(&sname),
            body: SystemBody::Composite(app.clone()),
            span: sp(),
        }));
        systems.push((sname.clone(), d.codomain, n));
        apps.push((app, sname, d.codomain, n));
    }

    // Implementations: at most one per root box.
    let mut implemented = Vec::new();
    for d in &diagrams {
        if implemented.contains(&d.codomain) || !rng.gen_bool(0.5) {
            continue;
        }
        implemented.push(d.codomain);
        decls.push(Decl::Implement(ImplementDecl {
            root: ident(&boxes[d.codomain].name),
            diagram: ident(&d.name),
            children: children(rng, &diagrams, &boxes, d, 2),
            span: sp(),
        }));
    }

    for _ in 0..rng.gen_range(0..=3) {
        match rng.gen_range(0..3) {
            0 if !systems.is_empty() => {
                let (name, bi, n) = systems.choose(rng).unwrap().clone();
                let target = match apps.iter().find(|a| a.1 == name) {
                    Some(a) if rng.gen_bool(0.5) => SimTarget::Composite(a.0.clone()),
                    _ => SimTarget::System(ident(&name)),
                };
                decls.push(Decl::Directive(Directive::Simulate {
                    target,
                    steps: rng.gen_range(0..50),
                    init: rng.gen_bool(0.5).then(|| (0..n).map(|_| number(rng)).collect()),
                    input: rng
                        .gen_bool(0.5)
                        .then(|| (0..boxes[bi].total_in()).map(|_| number(rng)).collect()),
                    span: sp(),
                }));
            }
            1 if !apps.is_empty() => {
                let (app, target, _, _) = apps.choose(rng).unwrap().clone();
                decls.push(Decl::Directive(Directive::Check {
                    application: app,
                    target: ident(&target),
                    tol: rng.gen_bool(0.5).then(|| 10f64.powi(-rng.gen_range(1..15))),
                    span: sp(),
                }));
            }
            2 if !systems.is_empty() => {
                let (name, _, n) = systems.choose(rng).unwrap().clone();
                let a = rng.gen_range(0..=n);
                let b = rng.gen_range(0..=n - a);
                decls.push(Decl::Directive(Directive::Solve {
                    system: ident(&name),
                    partition: vec![a, b, n - a - b],
                    tol: None,
                    span: sp(),
                }));
            }
            _ => {}
        }
    }

    ModelFile { decls }
}

fn diagram_items(rng: &mut TestRng, boxes: &[BoxInfo], domain: &[usize], codomain: usize) -> Vec<DiagramItem> {
    let outer = &boxes[codomain];
    // (box, port, dim) sources: inner outputs and outer inputs.
    let inner_out: Vec<(&str, &str, usize)> = domain
        .iter()
        .flat_map(|&i| {
            boxes[i]
                .outputs
                .iter()
                .map(move |p| (boxes[i].name.as_str(), p.0.as_str(), p.1))
        })
        .collect();
    let outer_in: Vec<(&str, &str, usize)> = outer
        .inputs
        .iter()
        .map(|p| (outer.name.as_str(), p.0.as_str(), p.1))
        .collect();
    let total_inner_out: usize = domain.iter().map(|&i| boxes[i].total_out()).sum();
    let mut items = Vec::new();
    let targets: Vec<(&str, &str, usize, bool)> = domain
        .iter()
        .flat_map(|&i| {
            boxes[i]
                .inputs
                .iter()
                .map(move |p| (boxes[i].name.as_str(), p.0.as_str(), p.1, true))
        })
        .chain(
            outer
                .outputs
                .iter()
                .map(|p| (outer.name.as_str(), p.0.as_str(), p.1, false)),
        )
        .collect();
    for (b, p, dim, inner_target) in targets {
        let mut sources: Vec<(&str, &str, usize)> = inner_out.iter().copied().filter(|s| s.2 == dim).collect();
        if inner_target {
            sources.extend(outer_in.iter().copied().filter(|s| s.2 == dim));
        }
        match rng.gen_range(0..3) {
            0 if !sources.is_empty() => {
                let s = sources.choose(rng).unwrap();
                items.push(DiagramItem::Wire {
                    src: port_ref(s.0, s.1),
                    dst: port_ref(b, p),
                    span: sp(),
                });
            }
            1 => {
                let cols = if inner_target {
                    total_inner_out + outer.total_in()
                } else {
                    total_inner_out
                };
                items.push(DiagramItem::Map {
                    dst: port_ref(b, p),
                    value: lit(rng, dim, cols),
                    span: sp(),
                });
            }
            _ => {}
        }
    }
    items.shuffle(rng);
    items
}

fn children(
    rng: &mut TestRng,
    diagrams: &[DiagramInfo],
    boxes: &[BoxInfo],
    node: &DiagramInfo,
    depth: usize,
) -> Vec<ChildDecl> {
    if depth == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &f in &node.domain {
        let candidates: Vec<&DiagramInfo> = diagrams.iter().filter(|d| d.codomain == f).collect();
        if let Some(d) = candidates.choose(rng) {
            if rng.gen_bool(0.6) {
                out.push(ChildDecl {
                    boxname: ident(&boxes[f].name),
                    diagram: ident(&d.name),
                    children: children(rng, diagrams, boxes, d, depth - 1),
                    span: sp(),
                });
            }
        }
    }
    out
}
