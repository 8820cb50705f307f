//! Graphviz output. Boxes are nodes, outer ports are plaintext nodes, and
//! each diagram level is a cluster. In a tree, an opened box becomes a nested
//! cluster holding its own port nodes and sub-boxes.

use wirecomp::hierarchy::{Child, Decomposition};
use wirecomp::wd::{Endpoint, Side};
use wirecomp::{BoxTensor, WiringDiagram};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn short(qualified: &str) -> &str {
    qualified.split_once('.').map_or(qualified, |(_, p)| p)
}

struct Graph {
    out: String,
    depth: usize,
}

impl Graph {
    fn line(&mut self, s: impl AsRef<str>) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn port_nodes(&mut self, prefix: &str, boundary: &BoxTensor) {
        for p in boundary.input_ports() {
            let id = format!("{prefix}:in:{}", p.name);
            self.line(format!(
                "{} [shape=plaintext, label={}];",
                quote(&id),
                quote(short(&p.name))
            ));
        }
        for p in boundary.output_ports() {
            let id = format!("{prefix}:out:{}", p.name);
            self.line(format!(
                "{} [shape=plaintext, label={}];",
                quote(&id),
                quote(short(&p.name))
            ));
        }
    }

    fn cluster(&mut self, prefix: &str, label: &str, body: impl FnOnce(&mut Self)) {
        self.line(format!("subgraph {} {{", quote(&format!("cluster_{prefix}"))));
        self.depth += 1;
        self.line(format!("label={};", quote(label)));
        body(self);
        self.depth -= 1;
        self.line("}");
    }

    /// Nodes and edges of one diagram whose outer ports live under `prefix`.
    fn level(&mut self, prefix: &str, d: &WiringDiagram, children: Option<&[Child]>) {
        let factor_ids: Vec<String> = d
            .domain()
            .factors()
            .iter()
            .enumerate()
            .map(|(i, b)| format!("{prefix}/{i}.{}", b.name))
            .collect();
        let opened = |i: usize| match children {
            Some(cs) => match &cs[i] {
                Child::Node(t) => Some(t),
                Child::Leaf(_) => None,
            },
            None => None,
        };
        for (i, b) in d.domain().factors().iter().enumerate() {
            match opened(i) {
                Some(t) => self.cluster(&factor_ids[i], &b.name, |g| {
                    g.port_nodes(&factor_ids[i], &BoxTensor::from(b.clone()));
                    g.level(&factor_ids[i], t.node(), Some(t.children()));
                }),
                None => self.line(format!("{} [label={}];", quote(&factor_ids[i]), quote(&b.name))),
            }
        }
        let node = |e: &Endpoint, as_source: bool| -> String {
            match e.side {
                Side::Outer => {
                    let dir = if as_source { "in" } else { "out" };
                    format!("{prefix}:{dir}:{}", e.port)
                }
                Side::Inner => match opened(e.factor) {
                    Some(_) => {
                        let dir = if as_source { "out" } else { "in" };
                        format!("{}:{dir}:{}", factor_ids[e.factor], e.port)
                    }
                    None => factor_ids[e.factor].clone(),
                },
            }
        };
        for w in d.wires() {
            let mut label = format!(
                "{} -> {} : R^{}",
                short(&w.source.port),
                short(&w.target.port),
                w.source.dim
            );
            if w.source.dim != w.target.dim {
                label = format!(
                    "{} -> {} : R^{} -> R^{}",
                    short(&w.source.port),
                    short(&w.target.port),
                    w.source.dim,
                    w.target.dim
                );
            }
            let style = if w.is_routing() { "" } else { ", style=dashed" };
            self.line(format!(
                "{} -> {} [label={}{style}];",
                quote(&node(&w.source, true)),
                quote(&node(&w.target, false)),
                quote(&label)
            ));
        }
    }
}

fn render(name: &str, d: &WiringDiagram, children: Option<&[Child]>) -> String {
    let mut g = Graph {
        out: String::new(),
        depth: 0,
    };
    let root = d.codomain().name();
    g.line(format!("digraph {} {{", quote(name)));
    g.depth += 1;
    g.line("rankdir=LR;");
    g.line("node [shape=box];");
    g.port_nodes(&root, d.codomain());
    g.cluster(&root, &root, |g| g.level(&root, d, children));
    g.depth -= 1;
    g.line("}");
    g.out
}

pub fn diagram(name: &str, d: &WiringDiagram) -> String {
    render(name, d, None)
}

pub fn tree(t: &Decomposition) -> String {
    render(&t.root().name, t.node(), Some(t.children()))
}
