//! Linear time-invariant systems inhabiting boxes.
//!
//! A [`LinSystem`] on a box `X` is `(n, A, B, C)` with
//!
//! ```text
//! s' = A·s + B·x        y = C·s
//! ```
//!
//! Readout is Moore: it never sees the current input. That is what lets an
//! arbitrary wiring diagram close feedback loops without algebraic loops.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{block_diag, Matrix, MatrixError, Shape};
use crate::wd::{tensor_boxes, BoxTensor, WiringDiagram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LtisError {
    #[error("{matrix} has shape {actual}, expected {expected} for a {n}-state system on {boundary}")]
    Shape {
        matrix: &'static str,
        expected: Shape,
        actual: Shape,
        n: usize,
        boundary: String,
    },
    #[error("nonzero feedforward term D is not supported: readout must depend on state only (y = C·s), otherwise feedback wiring creates algebraic loops")]
    Feedforward,
    #[error("system lives on {system} but the diagram expects {diagram}")]
    BoxMismatch { system: String, diagram: String },
    #[error("{what} has length {actual}, expected {expected}")]
    VectorLength {
        what: String,
        expected: usize,
        actual: usize,
    },
    #[error("expected {expected} initial states, one per subsystem, got {actual}")]
    InitialStateCount { expected: usize, actual: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinSystem {
    boundary: BoxTensor,
    a: Matrix,
    b: Matrix,
    c: Matrix,
}

impl LinSystem {
    /// State dimension is read off `a`.
    pub fn new(boundary: impl Into<BoxTensor>, a: Matrix, b: Matrix, c: Matrix) -> Result<Self, LtisError> {
        let boundary = boundary.into();
        let n = a.rows();
        let (k, l) = (boundary.total_in(), boundary.total_out());
        let checks = [
            ("A", a.shape(), Shape { rows: n, cols: n }),
            ("B", b.shape(), Shape { rows: n, cols: k }),
            ("C", c.shape(), Shape { rows: l, cols: n }),
        ];
        for (matrix, actual, expected) in checks {
            if actual != expected {
                return Err(LtisError::Shape {
                    matrix,
                    expected,
                    actual,
                    n,
                    boundary: boundary.to_string(),
                });
            }
        }
        Ok(Self { boundary, a, b, c })
    }

    /// Accepts a feedforward matrix only to reject it unless it is zero.
    pub fn with_feedforward(
        boundary: impl Into<BoxTensor>,
        a: Matrix,
        b: Matrix,
        c: Matrix,
        d: &Matrix,
    ) -> Result<Self, LtisError> {
        let sys = Self::new(boundary, a, b, c)?;
        let expected = Shape {
            rows: sys.boundary.total_out(),
            cols: sys.boundary.total_in(),
        };
        if d.shape() != expected {
            return Err(LtisError::Shape {
                matrix: "D",
                expected,
                actual: d.shape(),
                n: sys.state_dim(),
                boundary: sys.boundary.to_string(),
            });
        }
        if !d.is_zero() {
            return Err(LtisError::Feedforward);
        }
        Ok(sys)
    }

    /// The all-zero system with `n` states.
    pub fn zero(boundary: impl Into<BoxTensor>, n: usize) -> Self {
        let boundary = boundary.into();
        let (k, l) = (boundary.total_in(), boundary.total_out());
        Self {
            boundary,
            a: Matrix::zeros(n, n),
            b: Matrix::zeros(n, k),
            c: Matrix::zeros(l, n),
        }
    }

    pub fn boundary(&self) -> &BoxTensor {
        &self.boundary
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn readout(&self, s: &[f64]) -> Result<Vec<f64>, LtisError> {
        check_len("state", self.state_dim(), s)?;
        Ok(self.c.mul_vec(s)?)
    }

    /// One update: returns `(A·s + B·x, C·s)`.
    pub fn step(&self, s: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), LtisError> {
        check_len("state", self.state_dim(), s)?;
        check_len("input", self.input_dim(), x)?;
        let next = add(&self.a.mul_vec(s)?, &self.b.mul_vec(x)?);
        Ok((next, self.c.mul_vec(s)?))
    }
}

fn check_len(what: &str, expected: usize, v: &[f64]) -> Result<(), LtisError> {
    if v.len() != expected {
        return Err(LtisError::VectorLength {
            what: what.to_string(),
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// States, outputs and inputs of a run of `T` steps.
///
/// `states` and `outputs` have `T + 1` entries: `outputs[t]` is the readout
/// of `states[t]`, taken before the step that consumes `inputs[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.inputs.len()
    }

    /// Largest absolute difference over states and outputs; `None` when the
    /// traces have different shapes.
    pub fn max_abs_diff(&self, other: &Trace) -> Option<f64> {
        fn diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Option<f64> {
            if a.len() != b.len() {
                return None;
            }
            let mut m: f64 = 0.0;
            for (x, y) in a.iter().zip(b) {
                if x.len() != y.len() {
                    return None;
                }
                for (p, q) in x.iter().zip(y) {
                    m = m.max((p - q).abs());
                }
            }
            Some(m)
        }
        Some(diff(&self.states, &other.states)?.max(diff(&self.outputs, &other.outputs)?))
    }

    /// CSV with header `t,s1..sn,y1..ym`, one row per time step.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let n = self.states.first().map_or(0, Vec::len);
        let m = self.outputs.first().map_or(0, Vec::len);
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("s{i}")));
        header.extend((1..=m).map(|i| format!("y{i}")));
        wr.write_record(&header)?;
        for (t, (s, y)) in self.states.iter().zip(&self.outputs).enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(s.iter().chain(y).map(f64::to_string));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

pub fn simulate(sys: &LinSystem, s0: &[f64], inputs: &[Vec<f64>]) -> Result<Trace, LtisError> {
    check_len("initial state", sys.state_dim(), s0)?;
    let mut states = Vec::with_capacity(inputs.len() + 1);
    let mut outputs = Vec::with_capacity(inputs.len() + 1);
    let mut s = s0.to_vec();
    for x in inputs {
        let (next, y) = sys.step(&s, x)?;
        states.push(std::mem::replace(&mut s, next));
        outputs.push(y);
    }
    outputs.push(sys.readout(&s)?);
    states.push(s);
    Ok(Trace {
        states,
        outputs,
        inputs: inputs.to_vec(),
    })
}

/// The composite system on `d.codomain`:
/// `(A + B·A_f·C, B·B_f, C_f·C)` with the state space unchanged.
pub fn apply_diagram(d: &WiringDiagram, sys: &LinSystem) -> Result<LinSystem, LtisError> {
    if sys.boundary() != d.domain() {
        return Err(LtisError::BoxMismatch {
            system: sys.boundary().to_string(),
            diagram: d.domain().to_string(),
        });
    }
    let a = sys.a.mat_add(&sys.b.mat_mul(d.a_f())?.mat_mul(&sys.c)?)?;
    let b = sys.b.mat_mul(d.b_f())?;
    let c = d.c_f().mat_mul(&sys.c)?;
    LinSystem::new(d.codomain().clone(), a, b, c)
}

/// Places systems side by side: tensor of boxes, block-diagonal matrices.
pub fn laxator(systems: &[&LinSystem]) -> LinSystem {
    let diag = |sel: fn(&LinSystem) -> &Matrix| block_diag(&systems.iter().map(|s| sel(s)).collect::<Vec<_>>());
    LinSystem {
        boundary: tensor_boxes(systems.iter().map(|s| s.boundary.clone())),
        a: diag(LinSystem::a),
        b: diag(LinSystem::b),
        c: diag(LinSystem::c),
    }
}

/// Steps the interconnection operationally, subsystem by subsystem, without
/// ever forming the composite matrices. At each step every readout is taken
/// from the current states, inner inputs are routed as
/// `A_f·readouts + B_f·outer_input`, and each subsystem steps on its slice.
pub fn coupled_simulate(
    d: &WiringDiagram,
    systems: &[&LinSystem],
    s0: &[Vec<f64>],
    outer_inputs: &[Vec<f64>],
) -> Result<Trace, LtisError> {
    let inner = tensor_boxes(systems.iter().map(|s| s.boundary().clone()));
    if &inner != d.domain() {
        return Err(LtisError::BoxMismatch {
            system: inner.to_string(),
            diagram: d.domain().to_string(),
        });
    }
    if s0.len() != systems.len() {
        return Err(LtisError::InitialStateCount {
            expected: systems.len(),
            actual: s0.len(),
        });
    }
    for (i, (sys, s)) in systems.iter().zip(s0).enumerate() {
        check_len(&format!("initial state of subsystem {i}"), sys.state_dim(), s)?;
    }
    let outer_dim = d.codomain().total_in();
    let mut states: Vec<Vec<f64>> = s0.to_vec();
    let mut trace = Trace {
        states: Vec::with_capacity(outer_inputs.len() + 1),
        outputs: Vec::with_capacity(outer_inputs.len() + 1),
        inputs: outer_inputs.to_vec(),
    };

    let readouts = |states: &[Vec<f64>]| -> Result<Vec<f64>, LtisError> {
        let mut y = Vec::with_capacity(d.domain().total_out());
        for (sys, s) in systems.iter().zip(states) {
            y.extend(sys.readout(s)?);
        }
        Ok(y)
    };

    for x in outer_inputs {
        check_len("outer input", outer_dim, x)?;
        let y = readouts(&states)?;
        let routed = add(&d.a_f().mul_vec(&y)?, &d.b_f().mul_vec(x)?);
        trace.states.push(states.concat());
        trace.outputs.push(d.c_f().mul_vec(&y)?);
        let mut offset = 0;
        for (sys, s) in systems.iter().zip(states.iter_mut()) {
            let k = sys.input_dim();
            let (next, _) = sys.step(s, &routed[offset..offset + k])?;
            *s = next;
            offset += k;
        }
    }
    let y = readouts(&states)?;
    trace.states.push(states.concat());
    trace.outputs.push(d.c_f().mul_vec(&y)?);
    Ok(trace)
}
