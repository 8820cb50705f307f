//! The UAV pitch model, built programmatically.
//!
//! Boxes and the top-level loop `f: L ⊗ C ⊗ D -> U` wire a sensor `L`, a
//! controller `C` and the airframe dynamics `D` (longitudinal pitch model:
//! state `(angle of attack, pitch rate, pitch angle)`, input the elevator
//! deflection, output the pitch angle). `U` takes the desired state `d`
//! and environmental input `e` and exposes the current state `s`.
//!
//! Sensor and controller matrices, and every port dimension in the
//! second-level implementation tree (`g`, `h`, `k`), are fixture choices.
//! The dynamics matrices are the standard longitudinal pitch model.
//!
//! `crates/core/examples/uav.wd` encodes the same model in the DSL; a test
//! keeps the two in agreement.

use crate::hierarchy::{Child, Decomposition};
use crate::ltis::LinSystem;
use crate::numerics::Matrix;
use crate::wd::{routing, tensor_boxes, LabeledBox, WiringDiagram};

pub const PITCH_A: [[f64; 3]; 3] = [[-0.313, 56.7, 0.0], [-0.0139, -0.426, 0.0], [0.0, 56.7, 0.0]];
pub const PITCH_B: [f64; 3] = [0.232, 0.0203, 0.0];
pub const PITCH_C: [f64; 3] = [0.0, 0.0, 1.0];

fn bx(name: &str, inputs: &[(&str, usize)], outputs: &[(&str, usize)]) -> LabeledBox {
    LabeledBox::with_dims(name, inputs, outputs).expect("fixture boxes are well formed")
}

fn mat<const C: usize>(rows: &[[f64; C]]) -> Matrix {
    Matrix::from_rows(rows).expect("fixture matrices are finite")
}

pub fn uav_box() -> LabeledBox {
    bx("U", &[("d", 1), ("e", 1)], &[("s", 1)])
}

pub fn sensor_box() -> LabeledBox {
    bx("L", &[("e", 1), ("s", 1)], &[("s_pred", 1)])
}

pub fn controller_box() -> LabeledBox {
    bx("C", &[("d", 1), ("s_pred", 1)], &[("c", 1)])
}

pub fn dynamics_box() -> LabeledBox {
    bx("D", &[("c", 1)], &[("s", 1)])
}

pub const UAV_WIRES: [(&str, &str); 6] = [
    ("U.e", "L.e"),
    ("D.s", "L.s"),
    ("U.d", "C.d"),
    ("L.s_pred", "C.s_pred"),
    ("C.c", "D.c"),
    ("D.s", "U.s"),
];

/// `f: L ⊗ C ⊗ D -> U`.
pub fn uav_diagram() -> WiringDiagram {
    routing(
        tensor_boxes([sensor_box(), controller_box(), dynamics_box()]),
        uav_box().into(),
        &UAV_WIRES,
    )
    .expect("fixture wiring is valid")
}

/// Sensor: one state tracking the measured pitch angle, lightly disturbed by
/// the environment.
pub fn sensor_system() -> LinSystem {
    LinSystem::new(sensor_box(), mat(&[[0.2]]), mat(&[[0.05, 0.8]]), mat(&[[1.0]]))
        .expect("fixture system is well formed")
}

/// Controller: proportional action on `d - s_pred` with a little memory.
/// Readout `C_C = 1`, so its state is the deflection command.
pub fn controller_system() -> LinSystem {
    LinSystem::new(controller_box(), mat(&[[0.3]]), mat(&[[0.02, -0.02]]), mat(&[[1.0]]))
        .expect("fixture system is well formed")
}

pub fn dynamics_system() -> LinSystem {
    LinSystem::new(
        dynamics_box(),
        mat(&PITCH_A),
        Matrix::column(&PITCH_B).expect("finite"),
        Matrix::row(&PITCH_C).expect("finite"),
    )
    .expect("fixture system is well formed")
}

// Second-level implementation boxes.

pub fn imu_boxes() -> (LabeledBox, LabeledBox) {
    let imu = |n| bx(n, &[("e", 1), ("s", 1)], &[("m", 1)]);
    (imu("I1"), imu("I2"))
}

pub fn sensor_processor_box() -> LabeledBox {
    bx("P1", &[("m1", 1), ("m2", 1)], &[("est", 1)])
}

pub fn control_processor_box() -> LabeledBox {
    bx("P2", &[("d", 1), ("s_pred", 1)], &[("cmd", 1)])
}

pub fn servo_box() -> LabeledBox {
    bx("V", &[("cmd", 1)], &[("defl", 1)])
}

/// Aileron, rudder, throttle, elevator.
pub fn surface_boxes() -> [LabeledBox; 4] {
    ["X", "Y", "Z", "W"].map(|n| bx(n, &[("u", 1)], &[("f", 1)]))
}

pub fn airframe_box() -> LabeledBox {
    bx("F", &[("x", 1), ("y", 1), ("z", 1), ("w", 1)], &[("s", 1)])
}

/// `g: I1 ⊗ I2 ⊗ P1 -> L`: two IMUs fused by a processor.
pub fn sensor_diagram() -> WiringDiagram {
    let (i1, i2) = imu_boxes();
    routing(
        tensor_boxes([i1, i2, sensor_processor_box()]),
        sensor_box().into(),
        &[
            ("L.e", "I1.e"),
            ("L.s", "I1.s"),
            ("L.e", "I2.e"),
            ("L.s", "I2.s"),
            ("I1.m", "P1.m1"),
            ("I2.m", "P1.m2"),
            ("P1.est", "L.s_pred"),
        ],
    )
    .expect("fixture wiring is valid")
}

/// `h: P2 ⊗ V -> C`: processor in series with the servos.
pub fn controller_diagram() -> WiringDiagram {
    routing(
        tensor_boxes([control_processor_box(), servo_box()]),
        controller_box().into(),
        &[
            ("C.d", "P2.d"),
            ("C.s_pred", "P2.s_pred"),
            ("P2.cmd", "V.cmd"),
            ("V.defl", "C.c"),
        ],
    )
    .expect("fixture wiring is valid")
}

/// `k: X ⊗ Y ⊗ Z ⊗ W ⊗ F -> D`: four control surfaces in parallel, all
/// feeding the airframe.
pub fn dynamics_diagram() -> WiringDiagram {
    let [x, y, z, w] = surface_boxes();
    routing(
        tensor_boxes([x, y, z, w, airframe_box()]),
        dynamics_box().into(),
        &[
            ("D.c", "X.u"),
            ("D.c", "Y.u"),
            ("D.c", "Z.u"),
            ("D.c", "W.u"),
            ("X.f", "F.x"),
            ("Y.f", "F.y"),
            ("Z.f", "F.z"),
            ("W.f", "F.w"),
            ("F.s", "D.s"),
        ],
    )
    .expect("fixture wiring is valid")
}

fn leaves_of(d: &WiringDiagram) -> Vec<Child> {
    d.domain().factors().iter().cloned().map(Child::Leaf).collect()
}

fn subtree(root: LabeledBox, node: WiringDiagram) -> Child {
    let children = leaves_of(&node);
    Child::Node(Decomposition::new(root, node, children).expect("fixture tree is well formed"))
}

/// Only `L`, `C`, `D` under `U`.
pub fn uav_tree_depth1() -> Decomposition {
    let f = uav_diagram();
    let children = leaves_of(&f);
    Decomposition::new(uav_box(), f, children).expect("fixture tree is well formed")
}

/// `L` opened by `g`; `C` and `D` stay closed.
pub fn uav_tree_sensor_only() -> Decomposition {
    Decomposition::new(
        uav_box(),
        uav_diagram(),
        vec![
            subtree(sensor_box(), sensor_diagram()),
            Child::Leaf(controller_box()),
            Child::Leaf(dynamics_box()),
        ],
    )
    .expect("fixture tree is well formed")
}

/// The full two-level implementation tree: `L` by `g`, `C` by `h`, `D` by `k`.
pub fn uav_tree_full() -> Decomposition {
    Decomposition::new(
        uav_box(),
        uav_diagram(),
        vec![
            subtree(sensor_box(), sensor_diagram()),
            subtree(controller_box(), controller_diagram()),
            subtree(dynamics_box(), dynamics_diagram()),
        ],
    )
    .expect("fixture tree is well formed")
}
