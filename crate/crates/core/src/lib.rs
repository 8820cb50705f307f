//! Wiring diagrams over real linear spaces and the algebra of linear
//! time-invariant systems on them.
//!
//! - [`numerics`]: small dense matrices.
//! - [`wd`]: boxes, wiring diagrams, composition and tensor.
//! - [`ltis`]: systems on boxes, the action of diagrams, simulation.
//! - [`hierarchy`]: nested decompositions and flattening.
//! - [`inverse`]: consistency checks and block recovery.
//! - [`dsl`]: the `.wd` modeling language.
//! - [`fixtures`]: the UAV pitch model used throughout the tests.

pub mod dsl;
pub mod fixtures;
pub mod hierarchy;
pub mod inverse;
pub mod ltis;
pub mod numerics;
pub mod wd;

pub use hierarchy::{flatten, leaves, semantics_of, Child, Decomposition};
pub use inverse::{check_composition, recover_loop_blocks, MatchReport, StatePartition, Verdict};
pub use ltis::{apply_diagram, coupled_simulate, laxator, simulate, LinSystem, Trace};
pub use numerics::{block_diag, Matrix};
pub use wd::{
    compose_diagrams, identity_diagram, tensor_boxes, tensor_diagrams, validate, BoxTensor, LabeledBox, Port,
    ValidationMode, WiringDiagram,
};
