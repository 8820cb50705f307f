//! Nested implementation choices for a box.
//!
//! A [`Decomposition`] picks a diagram `node: X1 ⊗ … ⊗ Xk -> root` and, for
//! each factor `Xi`, either leaves it closed or decomposes it further.
//! Flattening erases the intermediate boxes and yields one diagram from the
//! tensor of all leaves to the root.

use serde::Serialize;
use thiserror::Error;

use crate::ltis::{apply_diagram, laxator, LinSystem, LtisError};
use crate::wd::{compose_diagrams, identity_diagram, tensor_diagrams, BoxTensor, LabeledBox, WdError, WiringDiagram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("diagram for `{root}` has codomain {codomain}, expected the box itself")]
    RootMismatch { root: String, codomain: String },
    #[error("decomposition of `{root}` has {actual} children but its diagram has {expected} inner boxes")]
    Arity {
        root: String,
        expected: usize,
        actual: usize,
    },
    #[error("child {index} of `{root}` is `{child}` but the diagram's inner box there is `{factor}`")]
    ChildMismatch {
        root: String,
        index: usize,
        child: String,
        factor: String,
    },
    #[error("{expected} leaf systems needed, {actual} given")]
    LeafCount { expected: usize, actual: usize },
    #[error("leaf system {index} lives on {system}, expected leaf box `{leaf}`")]
    LeafMismatch { index: usize, system: String, leaf: String },
    #[error(transparent)]
    Wd(#[from] WdError),
    #[error(transparent)]
    Ltis(#[from] LtisError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Child {
    Leaf(LabeledBox),
    Node(Decomposition),
}

impl Child {
    pub fn root(&self) -> &LabeledBox {
        match self {
            Child::Leaf(b) => b,
            Child::Node(t) => &t.root,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    root: LabeledBox,
    node: WiringDiagram,
    children: Vec<Child>,
}

impl Decomposition {
    pub fn new(root: LabeledBox, node: WiringDiagram, children: Vec<Child>) -> Result<Self, HierarchyError> {
        if node.codomain().as_single() != Some(&root) {
            return Err(HierarchyError::RootMismatch {
                root: root.name.clone(),
                codomain: node.codomain().to_string(),
            });
        }
        let factors = node.domain().factors();
        if factors.len() != children.len() {
            return Err(HierarchyError::Arity {
                root: root.name.clone(),
                expected: factors.len(),
                actual: children.len(),
            });
        }
        for (index, (child, factor)) in children.iter().zip(factors).enumerate() {
            if child.root() != factor {
                return Err(HierarchyError::ChildMismatch {
                    root: root.name.clone(),
                    index,
                    child: child.root().name.clone(),
                    factor: factor.name.clone(),
                });
            }
        }
        Ok(Self { root, node, children })
    }

    /// Every factor of `node` left closed.
    pub fn shallow(root: LabeledBox, node: WiringDiagram) -> Result<Self, HierarchyError> {
        let children = node.domain().factors().iter().cloned().map(Child::Leaf).collect();
        Self::new(root, node, children)
    }

    pub fn root(&self) -> &LabeledBox {
        &self.root
    }

    pub fn node(&self) -> &WiringDiagram {
        &self.node
    }

    pub fn children(&self) -> &[Child] {
        &self.children
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| match c {
                Child::Leaf(_) => 0,
                Child::Node(t) => t.depth(),
            })
            .max()
            .unwrap_or(0)
    }
}

/// Depth-first, left-to-right leaf boxes.
pub fn leaves(t: &Decomposition) -> Vec<LabeledBox> {
    let mut out = Vec::new();
    collect_leaves(t, &mut out);
    out
}

fn collect_leaves(t: &Decomposition, out: &mut Vec<LabeledBox>) {
    for c in &t.children {
        match c {
            Child::Leaf(b) => out.push(b.clone()),
            Child::Node(sub) => collect_leaves(sub, out),
        }
    }
}

/// One diagram from the tensor of `leaves(t)` to `t.root`:
/// `compose(child_1 ⊗ … ⊗ child_k, node)`, with identities at leaves.
pub fn flatten(t: &Decomposition) -> Result<WiringDiagram, HierarchyError> {
    if t.children.iter().all(|c| matches!(c, Child::Leaf(_))) {
        return Ok(t.node.clone());
    }
    let parts = t
        .children
        .iter()
        .map(|c| match c {
            Child::Leaf(b) => Ok(identity_diagram(b.clone())),
            Child::Node(sub) => flatten(sub),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lower = tensor_diagrams(&parts.iter().collect::<Vec<_>>());
    Ok(compose_diagrams(&lower, &t.node)?)
}

fn check_leaf_systems(t: &Decomposition, leaf_systems: &[&LinSystem]) -> Result<(), HierarchyError> {
    let ls = leaves(t);
    if ls.len() != leaf_systems.len() {
        return Err(HierarchyError::LeafCount {
            expected: ls.len(),
            actual: leaf_systems.len(),
        });
    }
    for (index, (leaf, sys)) in ls.iter().zip(leaf_systems).enumerate() {
        if sys.boundary() != &BoxTensor::single(leaf.clone()) {
            return Err(HierarchyError::LeafMismatch {
                index,
                system: sys.boundary().to_string(),
                leaf: leaf.name.clone(),
            });
        }
    }
    Ok(())
}

/// The composite system on `t.root` obtained through the flattened diagram.
pub fn semantics_of(t: &Decomposition, leaf_systems: &[&LinSystem]) -> Result<LinSystem, HierarchyError> {
    check_leaf_systems(t, leaf_systems)?;
    Ok(apply_diagram(&flatten(t)?, &laxator(leaf_systems))?)
}

/// The same composite built bottom-up: each subtree is evaluated on its own
/// leaf systems first, then the node diagram is applied to the laxator of
/// the children's results. Never forms a composed diagram.
pub fn semantics_level_by_level(t: &Decomposition, leaf_systems: &[&LinSystem]) -> Result<LinSystem, HierarchyError> {
    check_leaf_systems(t, leaf_systems)?;
    let mut rest = leaf_systems;
    eval_level(t, &mut rest)
}

fn eval_level(t: &Decomposition, rest: &mut &[&LinSystem]) -> Result<LinSystem, HierarchyError> {
    let mut parts = Vec::with_capacity(t.children.len());
    for c in &t.children {
        match c {
            Child::Leaf(_) => {
                let (first, tail) = rest.split_first().expect("leaf count checked");
                parts.push((*first).clone());
                *rest = tail;
            }
            Child::Node(sub) => parts.push(eval_level(sub, rest)?),
        }
    }
    let inner = laxator(&parts.iter().collect::<Vec<_>>());
    Ok(apply_diagram(&t.node, &inner)?)
}
