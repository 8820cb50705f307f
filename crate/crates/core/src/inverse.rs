//! Consistency checks between chosen components and a target composite.
//!
//! [`check_composition`] is the forward membership test: compose the
//! candidates and compare with the target. [`recover_loop_blocks`] reads the
//! component blocks off a composite that has the sensor → controller →
//! dynamics loop shape of the UAV diagram:
//!
//! ```text
//!        | A_L          0            B_L(s)·C_D |        | 0       B_L(e) |
//!   A =  | B_C(sp)·C_L  A_C          0          |   B =  | B_C(d)  0      |
//!        | 0            B_D·C_C      A_D        |        | 0       0      |
//!
//!   C =  ( 0  0  C_D )
//! ```
//!
//! Only products are visible off the diagonal. `B_D·C_C` is split by fixing
//! the controller readout `C_C` (identity unless given); the other two
//! products stay unsplit and their factors are reported as free.

use serde::Serialize;
use thiserror::Error;

use crate::ltis::{apply_diagram, laxator, LinSystem, LtisError};
use crate::numerics::{Matrix, MatrixError, DEFAULT_TOL};
use crate::wd::WiringDiagram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InverseError {
    #[error("target lives on {target} but the diagram's outer box is {diagram}")]
    TargetBox { target: String, diagram: String },
    #[error("composed candidates have {composed} states, target has {target}")]
    StateDim { composed: usize, target: usize },
    #[error("partition sums to {sum} but the composite has {n} states")]
    PartitionSum { sum: usize, n: usize },
    #[error("loop recovery needs exactly 3 partition parts (sensor, controller, dynamics), got {0}")]
    PartitionArity(usize),
    #[error("loop recovery needs a composite with inputs (d, e): two input ports or two scalar inputs, got {0}")]
    LoopInputs(String),
    #[error("controller readout C_C must be {rows}x{cols} with orthonormal rows")]
    BadConvention { rows: usize, cols: usize },
    #[error(transparent)]
    Ltis(#[from] LtisError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatePartition {
    parts: Vec<(String, usize)>,
}

impl StatePartition {
    pub fn new(parts: Vec<(String, usize)>) -> Self {
        Self { parts }
    }

    /// Sensor, controller and dynamics state dimensions, named `L`, `C`, `D`.
    pub fn loop_parts(n_sensor: usize, n_controller: usize, n_dynamics: usize) -> Self {
        Self::new(vec![
            ("L".into(), n_sensor),
            ("C".into(), n_controller),
            ("D".into(), n_dynamics),
        ])
    }

    pub fn parts(&self) -> &[(String, usize)] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().map(|(_, n)| n).sum()
    }

    fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut off = 0;
        self.parts
            .iter()
            .map(|(_, n)| {
                let r = off..off + n;
                off += n;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDiff {
    pub block: String,
    pub max_abs_diff: f64,
    pub at: Option<(usize, usize)>,
    pub within_tol: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// A dynamics matrix recovered from the composite.
    Component,
    /// A sensor or controller matrix that this particular composite happens
    /// to pin. It is a design parameter of the loop, not something the
    /// dynamics constrain.
    Parameter,
    /// A product of two component matrices; factors not individually fixed.
    Product,
    /// Fixed by the normalization convention, not by the composite.
    Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveredBlock {
    pub name: String,
    pub component: String,
    pub kind: BlockKind,
    pub value: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeBlock {
    pub name: String,
    pub component: String,
    /// The product this block enters, if any.
    pub constrained_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub verdict: Verdict,
    pub tolerance: f64,
    pub block_diffs: Vec<BlockDiff>,
    pub determined: Vec<RecoveredBlock>,
    pub free: Vec<FreeBlock>,
    pub violations: Vec<String>,
}

impl MatchReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn block(&self, name: &str) -> Option<&BlockDiff> {
        self.block_diffs.iter().find(|b| b.block == name)
    }

    pub fn determined(&self, name: &str) -> Option<&Matrix> {
        self.determined.iter().find(|b| b.name == name).map(|b| &b.value)
    }

    /// Blocks outside tolerance.
    pub fn failing_blocks(&self) -> Vec<&str> {
        self.block_diffs
            .iter()
            .filter(|b| !b.within_tol)
            .map(|b| b.block.as_str())
            .collect()
    }
}

fn diff_block(name: String, got: &Matrix, want: &Matrix, tol: f64) -> Result<BlockDiff, MatrixError> {
    let cmp = got.approx_eq(want, tol)?;
    Ok(BlockDiff {
        block: name,
        max_abs_diff: cmp.max_abs_diff,
        at: cmp.at,
        within_tol: cmp.equal,
    })
}

/// Composes `candidates` through `d` and compares with `target`.
///
/// Besides the whole `A`, `B`, `C`, the report carries one diff per state
/// block `A[i,j]`, `B[i]`, `C[j]` (indexed by candidate box names) so that a
/// mismatch points at the responsible component.
pub fn check_composition(
    d: &WiringDiagram,
    candidates: &[&LinSystem],
    target: &LinSystem,
    tol: f64,
) -> Result<MatchReport, InverseError> {
    if target.boundary() != d.codomain() {
        return Err(InverseError::TargetBox {
            target: target.boundary().to_string(),
            diagram: d.codomain().to_string(),
        });
    }
    let composed = apply_diagram(d, &laxator(candidates))?;
    if composed.state_dim() != target.state_dim() {
        return Err(InverseError::StateDim {
            composed: composed.state_dim(),
            target: target.state_dim(),
        });
    }
    let names: Vec<String> = candidates.iter().map(|c| c.boundary().name()).collect();
    let partition = StatePartition::new(
        names
            .iter()
            .cloned()
            .zip(candidates.iter().map(|c| c.state_dim()))
            .collect(),
    );
    let ranges = partition.ranges();
    let (k, l) = (target.input_dim(), target.output_dim());

    let mut diffs = vec![
        diff_block("A".into(), composed.a(), target.a(), tol)?,
        diff_block("B".into(), composed.b(), target.b(), tol)?,
        diff_block("C".into(), composed.c(), target.c(), tol)?,
    ];
    for (i, ri) in ranges.iter().enumerate() {
        for (j, rj) in ranges.iter().enumerate() {
            diffs.push(diff_block(
                format!("A[{},{}]", names[i], names[j]),
                &composed.a().submatrix(ri.clone(), rj.clone())?,
                &target.a().submatrix(ri.clone(), rj.clone())?,
                tol,
            )?);
        }
    }
    for (i, ri) in ranges.iter().enumerate() {
        diffs.push(diff_block(
            format!("B[{}]", names[i]),
            &composed.b().submatrix(ri.clone(), 0..k)?,
            &target.b().submatrix(ri.clone(), 0..k)?,
            tol,
        )?);
    }
    for (j, rj) in ranges.iter().enumerate() {
        diffs.push(diff_block(
            format!("C[{}]", names[j]),
            &composed.c().submatrix(0..l, rj.clone())?,
            &target.c().submatrix(0..l, rj.clone())?,
            tol,
        )?);
    }
    let pass = diffs.iter().all(|d| d.within_tol);
    Ok(MatchReport {
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        tolerance: tol,
        block_diffs: diffs,
        determined: Vec::new(),
        free: Vec::new(),
        violations: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOptions {
    /// Absolute tolerance for blocks that must vanish.
    pub structural_tol: f64,
    /// Controller readout used to split `B_D·C_C`. `None` means identity.
    /// Must have orthonormal rows so that `B_D = P·C_Cᵀ` is exact.
    pub controller_readout: Option<Matrix>,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            structural_tol: DEFAULT_TOL,
            controller_readout: None,
        }
    }
}

/// Component blocks recovered from a loop-shaped composite.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopBlocks {
    pub a_sensor: Matrix,
    pub a_controller: Matrix,
    pub a_dynamics: Matrix,
    pub b_dynamics: Matrix,
    pub c_dynamics: Matrix,
    pub c_controller: Matrix,
    /// Column block of `B_L` fed by `e`.
    pub b_sensor_env: Matrix,
    /// Column block of `B_C` fed by `d`.
    pub b_controller_desired: Matrix,
    /// `B_L(s)·C_D`.
    pub sensor_feedback: Matrix,
    /// `B_C(s_pred)·C_L`.
    pub controller_feedback: Matrix,
}

fn loop_input_split(composite: &LinSystem) -> Result<(usize, usize), InverseError> {
    let b = composite.boundary();
    if let Some(single) = b.as_single() {
        if let [d, e] = single.inputs.as_slice() {
            return Ok((d.dim, e.dim));
        }
    }
    if b.total_in() == 2 {
        return Ok((1, 1));
    }
    Err(InverseError::LoopInputs(b.to_string()))
}

/// Recovers the blocks with default options.
pub fn recover_loop_blocks(composite: &LinSystem, partition: &StatePartition) -> Result<MatchReport, InverseError> {
    recover_loop_blocks_with(composite, partition, &LoopOptions::default())
}

pub fn recover_loop_blocks_with(
    composite: &LinSystem,
    partition: &StatePartition,
    opts: &LoopOptions,
) -> Result<MatchReport, InverseError> {
    let (blocks, diffs) = extract_loop_blocks(composite, partition, opts)?;
    let tol = opts.structural_tol;
    let violations: Vec<String> = diffs
        .iter()
        .filter(|d| !d.within_tol)
        .map(|d| {
            format!(
                "{} must vanish for a sensor/controller/dynamics loop (max |entry| {:e})",
                d.block, d.max_abs_diff
            )
        })
        .collect();
    let names: Vec<&str> = partition.parts().iter().map(|(n, _)| n.as_str()).collect();
    let (l, c, d) = (names[0], names[1], names[2]);

    let mut report = MatchReport {
        verdict: if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        tolerance: tol,
        block_diffs: diffs,
        determined: Vec::new(),
        free: Vec::new(),
        violations,
    };
    if !report.passed() {
        return Ok(report);
    }

    let rb = |name: String, component: &str, kind, value: &Matrix| RecoveredBlock {
        name,
        component: component.to_string(),
        kind,
        value: value.clone(),
    };
    let sensor_product = format!("B_{l}(s)·C_{d}");
    let controller_product = format!("B_{c}(s_pred)·C_{l}");
    report.determined = vec![
        rb(format!("A_{d}"), d, BlockKind::Component, &blocks.a_dynamics),
        rb(format!("B_{d}"), d, BlockKind::Component, &blocks.b_dynamics),
        rb(format!("C_{d}"), d, BlockKind::Component, &blocks.c_dynamics),
        rb(format!("C_{c}"), c, BlockKind::Convention, &blocks.c_controller),
        rb(format!("A_{l}"), l, BlockKind::Parameter, &blocks.a_sensor),
        rb(format!("A_{c}"), c, BlockKind::Parameter, &blocks.a_controller),
        rb(format!("B_{l}(e)"), l, BlockKind::Parameter, &blocks.b_sensor_env),
        rb(
            format!("B_{c}(d)"),
            c,
            BlockKind::Parameter,
            &blocks.b_controller_desired,
        ),
        rb(sensor_product.clone(), l, BlockKind::Product, &blocks.sensor_feedback),
        rb(
            controller_product.clone(),
            c,
            BlockKind::Product,
            &blocks.controller_feedback,
        ),
    ];
    report.free = vec![
        FreeBlock {
            name: format!("B_{l}(s)"),
            component: l.to_string(),
            constrained_by: Some(sensor_product),
        },
        FreeBlock {
            name: format!("B_{c}(s_pred)"),
            component: c.to_string(),
            constrained_by: Some(controller_product.clone()),
        },
        FreeBlock {
            name: format!("C_{l}"),
            component: l.to_string(),
            constrained_by: Some(controller_product),
        },
    ];
    Ok(report)
}

/// Block extraction plus the list of structural checks (blocks that must be
/// zero, and the residual of splitting `B_D·C_C`).
pub fn extract_loop_blocks(
    composite: &LinSystem,
    partition: &StatePartition,
    opts: &LoopOptions,
) -> Result<(LoopBlocks, Vec<BlockDiff>), InverseError> {
    if partition.parts().len() != 3 {
        return Err(InverseError::PartitionArity(partition.parts().len()));
    }
    let n = composite.state_dim();
    if partition.total() != n {
        return Err(InverseError::PartitionSum {
            sum: partition.total(),
            n,
        });
    }
    let (dd, de) = loop_input_split(composite)?;
    let [rl, rc, rd]: [std::ops::Range<usize>; 3] = partition.ranges().try_into().expect("three parts");
    let names: Vec<&str> = partition.parts().iter().map(|(n, _)| n.as_str()).collect();
    let (ln, cn, dn) = (names[0], names[1], names[2]);
    let tol = opts.structural_tol;
    let (a, b, c) = (composite.a(), composite.b(), composite.c());
    let out = c.rows();
    let d_cols = 0..dd;
    let e_cols = dd..dd + de;

    let nc = rc.len();
    let c_controller = match &opts.controller_readout {
        None => Matrix::identity(nc),
        Some(m) => m.clone(),
    };
    if c_controller.cols() != nc
        || !c_controller
            .mat_mul(&c_controller.transpose())?
            .approx_eq(&Matrix::identity(c_controller.rows()), 1e-12)?
            .equal
    {
        return Err(InverseError::BadConvention {
            rows: c_controller.rows(),
            cols: nc,
        });
    }

    let zero_checks = [
        (format!("C[{ln}]"), c.submatrix(0..out, rl.clone())?),
        (format!("C[{cn}]"), c.submatrix(0..out, rc.clone())?),
        (format!("A[{ln},{cn}]"), a.submatrix(rl.clone(), rc.clone())?),
        (format!("A[{cn},{dn}]"), a.submatrix(rc.clone(), rd.clone())?),
        (format!("A[{dn},{ln}]"), a.submatrix(rd.clone(), rl.clone())?),
        (format!("B[{ln}](d)"), b.submatrix(rl.clone(), d_cols.clone())?),
        (format!("B[{cn}](e)"), b.submatrix(rc.clone(), e_cols.clone())?),
        (format!("B[{dn}]"), b.submatrix(rd.clone(), 0..dd + de)?),
    ];
    let mut diffs = Vec::with_capacity(zero_checks.len() + 1);
    for (name, block) in &zero_checks {
        diffs.push(diff_block(
            name.clone(),
            block,
            &Matrix::zeros(block.rows(), block.cols()),
            tol,
        )?);
    }

    let coupling = a.submatrix(rd.clone(), rc.clone())?;
    // B_D·C_C = coupling with orthonormal C_C rows gives B_D = coupling·C_Cᵀ.
    let b_dynamics = coupling.mat_mul(&c_controller.transpose())?;
    diffs.push(diff_block(
        format!("A[{dn},{cn}] - B_{dn}·C_{cn}"),
        &b_dynamics.mat_mul(&c_controller)?,
        &coupling,
        tol,
    )?);

    let blocks = LoopBlocks {
        a_sensor: a.submatrix(rl.clone(), rl.clone())?,
        a_controller: a.submatrix(rc.clone(), rc.clone())?,
        a_dynamics: a.submatrix(rd.clone(), rd.clone())?,
        b_dynamics,
        c_dynamics: c.submatrix(0..out, rd.clone())?,
        c_controller,
        b_sensor_env: b.submatrix(rl.clone(), e_cols)?,
        b_controller_desired: b.submatrix(rc.clone(), d_cols)?,
        sensor_feedback: a.submatrix(rl.clone(), rd)?,
        controller_feedback: a.submatrix(rc, rl)?,
    };
    Ok((blocks, diffs))
}
