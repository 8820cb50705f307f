//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

pub mod model_gen;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wirecomp::hierarchy::{Child, Decomposition};
use wirecomp::{apply_diagram, laxator, BoxTensor, LabeledBox, LinSystem, Matrix, Port, WiringDiagram};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut TestRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Roughly half the entries zero, the rest uniform in `[-scale, scale]`.
pub fn sparse_matrix(rng: &mut TestRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(-scale..=scale)
            }
        })
        .collect();
    Matrix::new(rows, cols, data).unwrap()
}

pub fn vector(rng: &mut TestRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..=scale)).collect()
}

/// A box with up to `max_ports` ports on each side, each of dimension
/// `1..=max_dim`.
pub fn random_box(rng: &mut TestRng, name: &str, max_ports: usize, max_dim: usize) -> LabeledBox {
    let mut side = |prefix: &str| -> Vec<Port> {
        let n = rng.gen_range(0..=max_ports);
        (0..n)
            .map(|i| Port::new(format!("{prefix}{i}"), rng.gen_range(1..=max_dim)))
            .collect()
    };
    let inputs = side("x");
    let outputs = side("y");
    LabeledBox::new(name, inputs, outputs).unwrap()
}

pub fn random_tensor(
    rng: &mut TestRng,
    prefix: &str,
    factors: std::ops::RangeInclusive<usize>,
    max_ports: usize,
    max_dim: usize,
) -> BoxTensor {
    let factors = rng.gen_range(factors);
    BoxTensor::from_factors(
        (0..factors)
            .map(|i| random_box(rng, &format!("{prefix}{i}"), max_ports, max_dim))
            .collect(),
    )
}

/// Real-valued routing, entries in `[-scale, scale]`, about half zero.
pub fn general_diagram(rng: &mut TestRng, domain: &BoxTensor, codomain: &BoxTensor, scale: f64) -> WiringDiagram {
    let (xi, xo, yi, yo) = (
        domain.total_in(),
        domain.total_out(),
        codomain.total_in(),
        codomain.total_out(),
    );
    WiringDiagram::new(
        domain.clone(),
        codomain.clone(),
        sparse_matrix(rng, xi, xo, scale),
        sparse_matrix(rng, xi, yi, scale),
        sparse_matrix(rng, yo, xo, scale),
    )
    .unwrap()
}

/// Identity wires only: every inner input and outer output port is either
/// fed from a random source of the same dimension or left unwired.
pub fn routing_diagram(rng: &mut TestRng, domain: &BoxTensor, codomain: &BoxTensor) -> WiringDiagram {
    let (xi, xo, yi, yo) = (
        domain.total_in(),
        domain.total_out(),
        codomain.total_in(),
        codomain.total_out(),
    );
    let mut a = Matrix::zeros(xi, xo);
    let mut b = Matrix::zeros(xi, yi);
    let mut c = Matrix::zeros(yo, xo);
    let inner_out = domain.output_ports();
    let outer_in = domain_ports(codomain.input_ports());
    for p in domain.input_ports() {
        let mut sources: Vec<(bool, usize)> = inner_out
            .iter()
            .filter(|q| q.dim == p.dim)
            .map(|q| (true, q.offset))
            .chain(outer_in.iter().filter(|q| q.1 == p.dim).map(|q| (false, q.0)))
            .collect();
        sources.push((true, usize::MAX));
        match *sources.choose(rng).unwrap() {
            (_, usize::MAX) => {}
            (true, off) => {
                for k in 0..p.dim {
                    a = a.with_entry(p.offset + k, off + k, 1.0).unwrap();
                }
            }
            (false, off) => {
                for k in 0..p.dim {
                    b = b.with_entry(p.offset + k, off + k, 1.0).unwrap();
                }
            }
        }
    }
    for p in codomain.output_ports() {
        let sources: Vec<usize> = inner_out.iter().filter(|q| q.dim == p.dim).map(|q| q.offset).collect();
        if let Some(&off) = sources.choose(rng) {
            if rng.gen_bool(0.8) {
                for k in 0..p.dim {
                    c = c.with_entry(p.offset + k, off + k, 1.0).unwrap();
                }
            }
        }
    }
    WiringDiagram::new(domain.clone(), codomain.clone(), a, b, c).unwrap()
}

fn domain_ports(ports: Vec<wirecomp::wd::QualifiedPort>) -> Vec<(usize, usize)> {
    ports.into_iter().map(|p| (p.offset, p.dim)).collect()
}

pub fn random_system(rng: &mut TestRng, boundary: &LabeledBox, max_state: usize, scale: f64) -> LinSystem {
    let n = rng.gen_range(1..=max_state);
    LinSystem::new(
        boundary.clone(),
        matrix(rng, n, n, scale),
        matrix(rng, n, boundary.total_in(), scale),
        matrix(rng, boundary.total_out(), n, scale),
    )
    .unwrap()
}

pub fn systems_on(rng: &mut TestRng, tensor: &BoxTensor, max_state: usize, scale: f64) -> Vec<LinSystem> {
    tensor
        .factors()
        .iter()
        .map(|b| random_system(rng, b, max_state, scale))
        .collect()
}

pub fn inf_norm(m: &Matrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row_slice(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(s: &LinSystem, alpha: f64) -> LinSystem {
    let r = alpha.sqrt();
    LinSystem::new(s.boundary().clone(), s.a().scale(alpha), s.b().scale(r), s.c().scale(r)).unwrap()
}

/// A diagram, its component systems, initial states and an input sequence.
pub struct OracleInstance {
    pub diagram: WiringDiagram,
    pub systems: Vec<LinSystem>,
    pub s0: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
}

/// Up to 3 subsystems, state dims ≤ 4, port dims ≤ 3. The components are
/// rescaled so the composite update has infinity norm at most 0.9, which
/// keeps trajectories bounded and an absolute tolerance meaningful.
pub fn oracle_instance(rng: &mut TestRng, steps: usize) -> OracleInstance {
    let domain = random_tensor(rng, "S", 1..=3, 2, 3);
    let codomain: BoxTensor = random_box(rng, "O", 2, 3).into();
    let diagram = if rng.gen_bool(0.5) {
        routing_diagram(rng, &domain, &codomain)
    } else {
        general_diagram(rng, &domain, &codomain, 1.0)
    };
    let mut systems = systems_on(rng, &domain, 4, 1.0);
    let refs: Vec<&LinSystem> = systems.iter().collect();
    let composite = apply_diagram(&diagram, &laxator(&refs)).unwrap();
    let norm = inf_norm(composite.a());
    if norm > 0.9 {
        let alpha = 0.9 / norm;
        systems = systems.iter().map(|s| scaled(s, alpha)).collect();
    }
    let s0 = systems.iter().map(|s| vector(rng, s.state_dim(), 1.0)).collect();
    let inputs = (0..steps).map(|_| vector(rng, codomain.total_in(), 1.0)).collect();
    OracleInstance {
        diagram,
        systems,
        s0,
        inputs,
    }
}

/// A random implementation tree under `root`, at most `depth` levels deep.
/// Inner box names are drawn from `counter` so they are unique in the tree.
pub fn random_tree(rng: &mut TestRng, root: &LabeledBox, depth: usize, counter: &mut usize) -> Decomposition {
    let k = rng.gen_range(1..=3);
    let factors: Vec<LabeledBox> = (0..k)
        .map(|_| {
            *counter += 1;
            random_box(rng, &format!("N{counter}"), 2, 2)
        })
        .collect();
    let domain = BoxTensor::from_factors(factors.clone());
    let node = if rng.gen_bool(0.5) {
        routing_diagram(rng, &domain, &root.clone().into())
    } else {
        general_diagram(rng, &domain, &root.clone().into(), 1.0)
    };
    let children = factors
        .into_iter()
        .map(|f| {
            if depth > 1 && rng.gen_bool(0.5) {
                Child::Node(random_tree(rng, &f, depth - 1, counter))
            } else {
                Child::Leaf(f)
            }
        })
        .collect();
    Decomposition::new(root.clone(), node, children).unwrap()
}

/// Invalid-model corpus entries, sorted by file name.
pub fn invalid_corpus() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/invalid");
    let mut entries: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "wd"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// Checks one corpus entry: loading must fail, every `# expect: L:C text`
/// header must match a diagnostic at that position whose message contains
/// `text`, and every diagnostic span must lie inside its source line.
pub fn check_invalid(name: &str, text: &str) -> Result<(), String> {
    let expects: Vec<(usize, usize, &str)> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# expect: "))
        .map(|rest| {
            let (pos, msg) = rest.split_once(' ').unwrap();
            let (l, c) = pos.split_once(':').unwrap();
            (l.parse().unwrap(), c.parse().unwrap(), msg)
        })
        .collect();
    if expects.is_empty() {
        return Err(format!("{name}: no expectations"));
    }
    let diags = match wirecomp::dsl::load(name, text) {
        Ok(_) => return Err(format!("{name}: loaded without errors")),
        Err(d) => d.0,
    };
    for (l, c, msg) in &expects {
        if !diags
            .iter()
            .any(|d| d.span.line == *l && d.span.column == *c && d.message.contains(msg))
        {
            let got: Vec<String> = diags
                .iter()
                .map(|d| format!("{}:{} {}", d.span.line, d.span.column, d.message))
                .collect();
            return Err(format!("{name}: no `{msg}` at {l}:{c}; got {got:?}"));
        }
    }
    let lines: Vec<&str> = text.split('\n').collect();
    for d in &diags {
        let Some(line) = lines.get(d.span.line.wrapping_sub(1)) else {
            return Err(format!("{name}: span line {} out of range", d.span.line));
        };
        let width = line.chars().count();
        let end = d.span.column + d.span.length.max(1) - 1;
        // An end-of-file diagnostic may sit one past the last character.
        if d.span.column == 0 || end > width.max(d.span.column) {
            return Err(format!(
                "{name}: span {}:{}+{} outside `{line}`",
                d.span.line, d.span.column, d.span.length
            ));
        }
    }
    Ok(())
}

/// Boxes of the sensor/controller/dynamics loop with the given port
/// dimensions: desired state `pd`, environment `pe`, measured state `ms`,
/// prediction `q` and control action `nc`.
pub fn loop_boxes(pd: usize, pe: usize, ms: usize, q: usize, nc: usize) -> [LabeledBox; 4] {
    let b = |n: &str, i: &[(&str, usize)], o: &[(&str, usize)]| LabeledBox::with_dims(n, i, o).unwrap();
    [
        b("U", &[("d", pd), ("e", pe)], &[("s", ms)]),
        b("L", &[("e", pe), ("s", ms)], &[("s_pred", q)]),
        b("C", &[("d", pd), ("s_pred", q)], &[("c", nc)]),
        b("D", &[("c", nc)], &[("s", ms)]),
    ]
}

pub fn loop_diagram(boxes: &[LabeledBox; 4]) -> WiringDiagram {
    let [u, l, c, d] = boxes.clone();
    wirecomp::wd::routing(
        wirecomp::tensor_boxes([l, c, d]),
        u.into(),
        &wirecomp::fixtures::UAV_WIRES,
    )
    .unwrap()
}

/// Random loop components with controller readout fixed to the identity.
pub struct LoopInstance {
    pub boxes: [LabeledBox; 4],
    pub sensor: LinSystem,
    pub controller: LinSystem,
    pub dynamics: LinSystem,
}

pub fn loop_instance(rng: &mut TestRng) -> LoopInstance {
    let mut d = || rng.gen_range(1..=2);
    let (pd, pe, ms, q) = (d(), d(), d(), d());
    let (nl, nc, nd) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=4));
    let boxes = loop_boxes(pd, pe, ms, q, nc);
    let [_, l, c, dy] = boxes.clone();
    let sys = |rng: &mut TestRng, b: &LabeledBox, n: usize, readout: Option<Matrix>| {
        let c = readout.unwrap_or_else(|| matrix(rng, b.total_out(), n, 1.0));
        LinSystem::new(b.clone(), matrix(rng, n, n, 1.0), matrix(rng, n, b.total_in(), 1.0), c).unwrap()
    };
    let sensor = sys(rng, &l, nl, None);
    let controller = sys(rng, &c, nc, Some(Matrix::identity(nc)));
    let dynamics = sys(rng, &dy, nd, None);
    LoopInstance {
        boxes,
        sensor,
        controller,
        dynamics,
    }
}
