//! Labeled boxes and wiring diagrams over real linear spaces.
//!
//! A [`WiringDiagram`] from the inner boxes `X` to the outer box `Y` carries
//! three matrices:
//!
//! ```text
//! x_in  = a_f · x_out + b_f · y_in      (feed inner inputs)
//! y_out = c_f · x_out                   (feed outer outputs)
//! ```
//!
//! Sides of a diagram are [`BoxTensor`]s: ordered lists of atomic
//! [`LabeledBox`]es. Tensoring concatenates those lists, which keeps
//! associativity and the unit laws exact.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{block_diag, Matrix, MatrixError, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub dim: usize,
}

impl Port {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self { name: name.into(), dim }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WdError {
    #[error("port `{port}` of box `{owner}` has dimension 0")]
    ZeroDimPort { owner: String, port: String },
    #[error("duplicate {side} port `{port}` on box `{owner}`")]
    DuplicatePort {
        owner: String,
        side: &'static str,
        port: String,
    },
    #[error("cannot compose: codomain {left} of the inner diagram does not match domain {right} of the outer diagram")]
    BoundaryMismatch { left: String, right: String },
    #[error("invalid wiring diagram: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A box `X = (X_in, X_out)`: named, ordered input and output ports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledBox {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
}

impl LabeledBox {
    pub fn new(name: impl Into<String>, inputs: Vec<Port>, outputs: Vec<Port>) -> Result<Self, WdError> {
        let b = Self {
            name: name.into(),
            inputs,
            outputs,
        };
        for (side, ports) in [("input", &b.inputs), ("output", &b.outputs)] {
            let mut seen = HashSet::new();
            for p in ports {
                if p.dim == 0 {
                    return Err(WdError::ZeroDimPort {
                        owner: b.name.clone(),
                        port: p.name.clone(),
                    });
                }
                if !seen.insert(p.name.as_str()) {
                    return Err(WdError::DuplicatePort {
                        owner: b.name.clone(),
                        side,
                        port: p.name.clone(),
                    });
                }
            }
        }
        Ok(b)
    }

    /// Shorthand for a box whose ports are given as `(name, dim)` pairs.
    pub fn with_dims(
        name: impl Into<String>,
        inputs: &[(&str, usize)],
        outputs: &[(&str, usize)],
    ) -> Result<Self, WdError> {
        let ports = |ps: &[(&str, usize)]| ps.iter().map(|&(n, d)| Port::new(n, d)).collect();
        Self::new(name, ports(inputs), ports(outputs))
    }

    pub fn total_in(&self) -> usize {
        self.inputs.iter().map(|p| p.dim).sum()
    }

    pub fn total_out(&self) -> usize {
        self.outputs.iter().map(|p| p.dim).sum()
    }

    pub fn input(&self, name: &str) -> Option<&Port> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&Port> {
        self.outputs.iter().find(|p| p.name == name)
    }

    /// Offset of the named input inside this box's input vector.
    pub fn input_offset(&self, name: &str) -> Option<usize> {
        offset_of(&self.inputs, name)
    }

    pub fn output_offset(&self, name: &str) -> Option<usize> {
        offset_of(&self.outputs, name)
    }
}

fn offset_of(ports: &[Port], name: &str) -> Option<usize> {
    let mut off = 0;
    for p in ports {
        if p.name == name {
            return Some(off);
        }
        off += p.dim;
    }
    None
}

impl fmt::Display for LabeledBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |ps: &[Port]| {
            ps.iter()
                .map(|p| format!("{}:R^{}", p.name, p.dim))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "{}({} -> {})", self.name, side(&self.inputs), side(&self.outputs))
    }
}

/// A port of a tensor, qualified by the box it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualifiedPort {
    /// Index of the owning factor.
    pub factor: usize,
    /// `Box.port`, unique within the tensor as long as factor names are.
    pub name: String,
    pub dim: usize,
    /// Offset inside the tensor's concatenated input or output vector.
    pub offset: usize,
}

/// Ordered tensor product of labeled boxes. The empty tensor is the
/// monoidal unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxTensor(Vec<LabeledBox>);

impl BoxTensor {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn single(b: LabeledBox) -> Self {
        Self(vec![b])
    }

    pub fn from_factors(factors: Vec<LabeledBox>) -> Self {
        Self(factors)
    }

    pub fn factors(&self) -> &[LabeledBox] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The box, if this tensor has exactly one factor.
    pub fn as_single(&self) -> Option<&LabeledBox> {
        match self.0.as_slice() {
            [b] => Some(b),
            _ => None,
        }
    }

    pub fn total_in(&self) -> usize {
        self.0.iter().map(LabeledBox::total_in).sum()
    }

    pub fn total_out(&self) -> usize {
        self.0.iter().map(LabeledBox::total_out).sum()
    }

    pub fn input_ports(&self) -> Vec<QualifiedPort> {
        self.qualified(|b| &b.inputs)
    }

    pub fn output_ports(&self) -> Vec<QualifiedPort> {
        self.qualified(|b| &b.outputs)
    }

    fn qualified(&self, side: impl Fn(&LabeledBox) -> &Vec<Port>) -> Vec<QualifiedPort> {
        let mut out = Vec::new();
        let mut offset = 0;
        for (factor, b) in self.0.iter().enumerate() {
            for p in side(b) {
                out.push(QualifiedPort {
                    factor,
                    name: format!("{}.{}", b.name, p.name),
                    dim: p.dim,
                    offset,
                });
                offset += p.dim;
            }
        }
        out
    }

    /// Offsets of each factor's input block inside the tensor's input vector.
    pub fn input_offsets(&self) -> Vec<usize> {
        prefix_sums(self.0.iter().map(LabeledBox::total_in))
    }

    pub fn output_offsets(&self) -> Vec<usize> {
        prefix_sums(self.0.iter().map(LabeledBox::total_out))
    }

    /// Flattens the tensor into one box with ports renamed `Box.port`.
    pub fn to_box(&self) -> LabeledBox {
        let to_ports = |qs: Vec<QualifiedPort>| qs.into_iter().map(|q| Port::new(q.name, q.dim)).collect::<Vec<_>>();
        LabeledBox {
            name: self.name(),
            inputs: to_ports(self.input_ports()),
            outputs: to_ports(self.output_ports()),
        }
    }

    pub fn name(&self) -> String {
        if self.0.is_empty() {
            "I".to_string()
        } else {
            self.0.iter().map(|b| b.name.as_str()).collect::<Vec<_>>().join("(*)")
        }
    }
}

fn prefix_sums(dims: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    dims.map(|d| {
        let o = acc;
        acc += d;
        o
    })
    .collect()
}

impl From<LabeledBox> for BoxTensor {
    fn from(b: LabeledBox) -> Self {
        Self::single(b)
    }
}

impl fmt::Display for BoxTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parallel placement of boxes: concatenates their factor lists.
pub fn tensor_boxes<I>(xs: I) -> BoxTensor
where
    I: IntoIterator,
    I::Item: Into<BoxTensor>,
{
    BoxTensor(xs.into_iter().flat_map(|x| x.into().0).collect())
}

/// Something wrong with a diagram's matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Shape {
        matrix: &'static str,
        expected: Shape,
        actual: Shape,
    },
    /// Strict mode: an inner-input coordinate fed by more than one source.
    FanIn { row: usize, sources: usize },
    /// Strict mode: an entry other than 0 or 1.
    NonUnitWeight {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape {
                matrix,
                expected,
                actual,
            } => write!(f, "{matrix} has shape {actual}, expected {expected}"),
            Violation::FanIn { row, sources } => {
                write!(f, "inner input coordinate {row} is fed by {sources} sources")
            }
            Violation::NonUnitWeight {
                matrix,
                row,
                col,
                value,
            } => write!(f, "{matrix}[{row},{col}] = {value} is not a 0/1 routing weight"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// Shapes only.
    #[default]
    Shapes,
    /// Shapes, plus pure 0/1 routing with at most one source per inner input.
    Strict,
}

/// A morphism `domain -> codomain` in the wiring-diagram category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiringDiagram {
    domain: BoxTensor,
    codomain: BoxTensor,
    a_f: Matrix,
    b_f: Matrix,
    c_f: Matrix,
}

/// Shape checks shared by [`WiringDiagram::new`] and [`validate`].
pub fn shape_violations(
    domain: &BoxTensor,
    codomain: &BoxTensor,
    a_f: &Matrix,
    b_f: &Matrix,
    c_f: &Matrix,
) -> Vec<Violation> {
    let (xi, xo) = (domain.total_in(), domain.total_out());
    let (yi, yo) = (codomain.total_in(), codomain.total_out());
    let expect = [
        ("a_f", a_f.shape(), Shape { rows: xi, cols: xo }),
        ("b_f", b_f.shape(), Shape { rows: xi, cols: yi }),
        ("c_f", c_f.shape(), Shape { rows: yo, cols: xo }),
    ];
    expect
        .into_iter()
        .filter(|(_, actual, expected)| actual != expected)
        .map(|(matrix, actual, expected)| Violation::Shape {
            matrix,
            expected,
            actual,
        })
        .collect()
}

impl WiringDiagram {
    pub fn new(domain: BoxTensor, codomain: BoxTensor, a_f: Matrix, b_f: Matrix, c_f: Matrix) -> Result<Self, WdError> {
        let v = shape_violations(&domain, &codomain, &a_f, &b_f, &c_f);
        if !v.is_empty() {
            return Err(WdError::Invalid(v));
        }
        Ok(Self {
            domain,
            codomain,
            a_f,
            b_f,
            c_f,
        })
    }

    /// The diagram with no wires at all.
    pub fn empty(domain: BoxTensor, codomain: BoxTensor) -> Self {
        let (xi, xo) = (domain.total_in(), domain.total_out());
        let (yi, yo) = (codomain.total_in(), codomain.total_out());
        Self {
            domain,
            codomain,
            a_f: Matrix::zeros(xi, xo),
            b_f: Matrix::zeros(xi, yi),
            c_f: Matrix::zeros(yo, xo),
        }
    }

    pub fn domain(&self) -> &BoxTensor {
        &self.domain
    }

    pub fn codomain(&self) -> &BoxTensor {
        &self.codomain
    }

    /// Inner outputs to inner inputs.
    pub fn a_f(&self) -> &Matrix {
        &self.a_f
    }

    /// Outer inputs to inner inputs.
    pub fn b_f(&self) -> &Matrix {
        &self.b_f
    }

    /// Inner outputs to outer outputs.
    pub fn c_f(&self) -> &Matrix {
        &self.c_f
    }

    /// Every nonzero port-to-port connection, in row-major target order.
    pub fn wires(&self) -> Vec<Wire> {
        let inner_in = self.domain.input_ports();
        let inner_out = self.domain.output_ports();
        let outer_in = self.codomain.input_ports();
        let outer_out = self.codomain.output_ports();
        let mut wires = Vec::new();
        let mut collect =
            |m: &Matrix, targets: &[QualifiedPort], t_side: Side, sources: &[QualifiedPort], s_side: Side| {
                for t in targets {
                    for s in sources {
                        let block = m
                            .submatrix(t.offset..t.offset + t.dim, s.offset..s.offset + s.dim)
                            .expect("ports lie inside the diagram's matrices");
                        if !block.is_zero() {
                            wires.push(Wire {
                                source: Endpoint::new(s_side, s),
                                target: Endpoint::new(t_side, t),
                                block,
                            });
                        }
                    }
                }
            };
        collect(&self.a_f, &inner_in, Side::Inner, &inner_out, Side::Inner);
        collect(&self.b_f, &inner_in, Side::Inner, &outer_in, Side::Outer);
        collect(&self.c_f, &outer_out, Side::Outer, &inner_out, Side::Inner);
        wires
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Outer,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Endpoint {
    pub side: Side,
    /// Factor index within the inner or outer tensor.
    pub factor: usize,
    /// Qualified `Box.port` name.
    pub port: String,
    pub dim: usize,
}

impl Endpoint {
    fn new(side: Side, q: &QualifiedPort) -> Self {
        Self {
            side,
            factor: q.factor,
            port: q.name.clone(),
            dim: q.dim,
        }
    }
}

/// One port-level connection of a diagram, for renderers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wire {
    pub source: Endpoint,
    pub target: Endpoint,
    /// Linear weight block, `target.dim x source.dim`.
    pub block: Matrix,
}

impl Wire {
    /// True when the block is an identity, i.e. a plain routing wire.
    pub fn is_routing(&self) -> bool {
        self.block.rows() == self.block.cols() && self.block == Matrix::identity(self.block.rows())
    }
}

pub fn identity_diagram(x: impl Into<BoxTensor>) -> WiringDiagram {
    let x = x.into();
    let (i, o) = (x.total_in(), x.total_out());
    WiringDiagram {
        domain: x.clone(),
        codomain: x,
        a_f: Matrix::zeros(i, o),
        b_f: Matrix::identity(i),
        c_f: Matrix::identity(o),
    }
}

/// Sequential composition: `g` first, then `f`. Requires
/// `g.codomain == f.domain`.
pub fn compose_diagrams(g: &WiringDiagram, f: &WiringDiagram) -> Result<WiringDiagram, WdError> {
    if g.codomain != f.domain {
        return Err(WdError::BoundaryMismatch {
            left: g.codomain.to_string(),
            right: f.domain.to_string(),
        });
    }
    let a_f = g.a_f.mat_add(&g.b_f.mat_mul(&f.a_f)?.mat_mul(&g.c_f)?)?;
    let b_f = g.b_f.mat_mul(&f.b_f)?;
    let c_f = f.c_f.mat_mul(&g.c_f)?;
    WiringDiagram::new(g.domain.clone(), f.codomain.clone(), a_f, b_f, c_f)
}

/// Parallel placement of diagrams; matrices become block-diagonal.
pub fn tensor_diagrams(fs: &[&WiringDiagram]) -> WiringDiagram {
    let domain = tensor_boxes(fs.iter().map(|f| f.domain.clone()));
    let codomain = tensor_boxes(fs.iter().map(|f| f.codomain.clone()));
    let pick = |sel: fn(&WiringDiagram) -> &Matrix| block_diag(&fs.iter().map(|f| sel(f)).collect::<Vec<_>>());
    WiringDiagram {
        domain,
        codomain,
        a_f: pick(WiringDiagram::a_f),
        b_f: pick(WiringDiagram::b_f),
        c_f: pick(WiringDiagram::c_f),
    }
}

/// Checks shape invariants and, in strict mode, that the diagram is a pure
/// routing: 0/1 entries, every row of `(a_f b_f)` with at most one nonzero.
/// Fan-out from one source to several targets is allowed.
pub fn validate(d: &WiringDiagram, mode: ValidationMode) -> Result<(), Vec<Violation>> {
    let mut v = shape_violations(&d.domain, &d.codomain, &d.a_f, &d.b_f, &d.c_f);
    if v.is_empty() && mode == ValidationMode::Strict {
        for (name, m) in [("a_f", &d.a_f), ("b_f", &d.b_f), ("c_f", &d.c_f)] {
            for r in 0..m.rows() {
                for (c, &x) in m.row_slice(r).iter().enumerate() {
                    if x != 0.0 && x != 1.0 {
                        v.push(Violation::NonUnitWeight {
                            matrix: name,
                            row: r,
                            col: c,
                            value: x,
                        });
                    }
                }
            }
        }
        for r in 0..d.a_f.rows() {
            let sources = d.a_f.row_slice(r).iter().filter(|&&x| x != 0.0).count()
                + d.b_f.row_slice(r).iter().filter(|&&x| x != 0.0).count();
            if sources > 1 {
                v.push(Violation::FanIn { row: r, sources });
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("unknown box `{0}` in this diagram")]
    UnknownBox(String),
    #[error("reference to box `{0}` is ambiguous in this diagram")]
    AmbiguousBox(String),
    #[error("`{boxname}` has no port `{port}` usable as a wire {role} (sources are inner outputs or outer inputs, targets inner inputs or outer outputs)")]
    UnknownPort {
        boxname: String,
        port: String,
        role: &'static str,
    },
    #[error(
        "wire {src} -> {dst}: no passthrough in wiring-diagram morphisms (outer inputs cannot feed outer outputs)"
    )]
    Passthrough { src: String, dst: String },
    #[error("wire {src} -> {dst}: dimension mismatch (R^{src_dim} vs R^{dst_dim})")]
    DimMismatch {
        src: String,
        dst: String,
        src_dim: usize,
        dst_dim: usize,
    },
    #[error("`{0}` is already fed by another wire or map (fan-in is not allowed in a routing)")]
    FanIn(String),
    #[error("map into `{dst}` must be {expected}, got {actual}")]
    MapShape {
        dst: String,
        expected: Shape,
        actual: Shape,
    },
}

const IN_RANGE: &str = "resolved ports lie inside the routing matrices";

/// A resolved `Box.port` reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Resolved {
    side: Side,
    offset: usize,
    dim: usize,
}

/// Builds a diagram from named wires (`Box.port -> Box.port`) and explicit
/// row blocks. A reference to a domain factor means that inner box, a
/// reference to a codomain factor means the outer box. Sources are inner
/// outputs or outer inputs; targets are inner inputs or outer outputs.
#[derive(Debug, Clone)]
pub struct RoutingBuilder {
    domain: BoxTensor,
    codomain: BoxTensor,
    a_f: Matrix,
    b_f: Matrix,
    c_f: Matrix,
    fed: HashSet<(Side, usize)>,
}

impl RoutingBuilder {
    pub fn new(domain: BoxTensor, codomain: BoxTensor) -> Self {
        let d = WiringDiagram::empty(domain, codomain);
        Self {
            domain: d.domain,
            codomain: d.codomain,
            a_f: d.a_f,
            b_f: d.b_f,
            c_f: d.c_f,
            fed: HashSet::new(),
        }
    }

    /// Resolves by role: a source is an inner output or an outer input, a
    /// target an inner input or an outer output. A box on both sides of the
    /// diagram is fine as long as only one side has a matching port.
    fn resolve(&self, boxname: &str, port: &str, as_source: bool) -> Result<Resolved, RouteError> {
        let mut hits = Vec::new();
        let mut box_seen = false;
        for (side, tensor) in [(Side::Inner, &self.domain), (Side::Outer, &self.codomain)] {
            let input = (side == Side::Outer) == as_source;
            let bases = if input {
                tensor.input_offsets()
            } else {
                tensor.output_offsets()
            };
            for (factor, b) in tensor.factors().iter().enumerate() {
                if b.name != boxname {
                    continue;
                }
                box_seen = true;
                let ports = if input { &b.inputs } else { &b.outputs };
                if let Some(off) = offset_of(ports, port) {
                    let dim = ports.iter().find(|p| p.name == port).map_or(0, |p| p.dim);
                    hits.push(Resolved {
                        side,
                        offset: bases[factor] + off,
                        dim,
                    });
                }
            }
        }
        match hits.as_slice() {
            [r] => Ok(*r),
            [] if box_seen => Err(RouteError::UnknownPort {
                boxname: boxname.to_string(),
                port: port.to_string(),
                role: if as_source { "source" } else { "target" },
            }),
            [] => Err(RouteError::UnknownBox(boxname.to_string())),
            _ => Err(RouteError::AmbiguousBox(boxname.to_string())),
        }
    }

    fn claim(&mut self, dst: &Resolved, dst_name: &str) -> Result<(), RouteError> {
        for k in 0..dst.dim {
            if self.fed.contains(&(dst.side, dst.offset + k)) {
                return Err(RouteError::FanIn(dst_name.to_string()));
            }
        }
        for k in 0..dst.dim {
            self.fed.insert((dst.side, dst.offset + k));
        }
        Ok(())
    }

    /// Adds an identity wire from `src = (box, port)` to `dst = (box, port)`.
    pub fn wire(&mut self, src: (&str, &str), dst: (&str, &str)) -> Result<(), RouteError> {
        let src_name = format!("{}.{}", src.0, src.1);
        let dst_name = format!("{}.{}", dst.0, dst.1);
        let s = self.resolve(src.0, src.1, true)?;
        let d = self.resolve(dst.0, dst.1, false)?;
        if s.side == Side::Outer && d.side == Side::Outer {
            return Err(RouteError::Passthrough {
                src: src_name,
                dst: dst_name,
            });
        }
        if s.dim != d.dim {
            return Err(RouteError::DimMismatch {
                src: src_name,
                dst: dst_name,
                src_dim: s.dim,
                dst_dim: d.dim,
            });
        }
        let target = match (s.side, d.side) {
            (Side::Inner, Side::Inner) => &mut self.a_f,
            (Side::Outer, Side::Inner) => &mut self.b_f,
            (Side::Inner, Side::Outer) => &mut self.c_f,
            (Side::Outer, Side::Outer) => unreachable!(),
        };
        let id = Matrix::identity(d.dim);
        let updated = target.with_block(d.offset, s.offset, &id).expect(IN_RANGE);
        self.claim(&d, &dst_name)?;
        match (s.side, d.side) {
            (Side::Inner, Side::Inner) => self.a_f = updated,
            (Side::Outer, Side::Inner) => self.b_f = updated,
            _ => self.c_f = updated,
        }
        Ok(())
    }

    /// Writes the full row block feeding `dst`. For an inner input the block
    /// spans `(a_f b_f)`, i.e. all inner outputs then all outer inputs; for
    /// an outer output it spans the columns of `c_f`.
    pub fn map(&mut self, dst: (&str, &str), rows: &Matrix) -> Result<(), RouteError> {
        let dst_name = format!("{}.{}", dst.0, dst.1);
        let d = self.resolve(dst.0, dst.1, false)?;
        let xo = self.domain.total_out();
        let expected = match d.side {
            Side::Inner => Shape {
                rows: d.dim,
                cols: xo + self.codomain.total_in(),
            },
            Side::Outer => Shape { rows: d.dim, cols: xo },
        };
        if rows.shape() != expected {
            return Err(RouteError::MapShape {
                dst: dst_name,
                expected,
                actual: rows.shape(),
            });
        }
        self.claim(&d, &dst_name)?;
        match d.side {
            Side::Inner => {
                let left = rows.submatrix(0..d.dim, 0..xo).expect(IN_RANGE);
                let right = rows.submatrix(0..d.dim, xo..expected.cols).expect(IN_RANGE);
                self.a_f = self.a_f.with_block(d.offset, 0, &left).expect(IN_RANGE);
                self.b_f = self.b_f.with_block(d.offset, 0, &right).expect(IN_RANGE);
            }
            Side::Outer => self.c_f = self.c_f.with_block(d.offset, 0, rows).expect(IN_RANGE),
        }
        Ok(())
    }

    /// Inner input ports that no wire or map has written to yet. In the
    /// finished diagram their rows are zero.
    pub fn unwired_inputs(&self) -> Vec<QualifiedPort> {
        self.domain
            .input_ports()
            .into_iter()
            .filter(|p| (0..p.dim).all(|k| !self.fed.contains(&(Side::Inner, p.offset + k))))
            .collect()
    }

    pub fn finish(self) -> WiringDiagram {
        WiringDiagram {
            domain: self.domain,
            codomain: self.codomain,
            a_f: self.a_f,
            b_f: self.b_f,
            c_f: self.c_f,
        }
    }
}

/// Convenience wrapper: a diagram from `"Box.port"` wire pairs.
pub fn routing(domain: BoxTensor, codomain: BoxTensor, wires: &[(&str, &str)]) -> Result<WiringDiagram, RouteError> {
    let mut b = RoutingBuilder::new(domain, codomain);
    for (src, dst) in wires {
        b.wire(split_ref(src), split_ref(dst))?;
    }
    Ok(b.finish())
}

fn split_ref(r: &str) -> (&str, &str) {
    r.split_once('.').unwrap_or((r, ""))
}
