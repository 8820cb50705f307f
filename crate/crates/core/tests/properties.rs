//! Algebraic laws of diagrams, systems, trees and block recovery.

mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{general_diagram, random_box, random_tensor, routing_diagram, systems_on};
use wirecomp::hierarchy::semantics_level_by_level;
use wirecomp::inverse::{BlockKind, StatePartition};
use wirecomp::{
    apply_diagram, check_composition, compose_diagrams, coupled_simulate, flatten, identity_diagram, laxator, leaves,
    recover_loop_blocks, semantics_of, simulate, tensor_diagrams, BoxTensor, Decomposition, LinSystem, Matrix,
    WiringDiagram,
};

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.approx_eq(b, tol).map(|c| c.equal).unwrap_or(false)
}

fn diagrams_close(x: &WiringDiagram, y: &WiringDiagram, tol: f64) -> bool {
    x.domain() == y.domain()
        && x.codomain() == y.codomain()
        && close(x.a_f(), y.a_f(), tol)
        && close(x.b_f(), y.b_f(), tol)
        && close(x.c_f(), y.c_f(), tol)
}

fn systems_close(x: &LinSystem, y: &LinSystem, tol: f64) -> bool {
    x.boundary() == y.boundary() && close(x.a(), y.a(), tol) && close(x.b(), y.b(), tol) && close(x.c(), y.c(), tol)
}

/// Three composable diagrams `X -> Y -> Z -> W`.
fn chain(rng: &mut common::TestRng, routing: bool) -> [WiringDiagram; 3] {
    let x = random_tensor(rng, "X", 1..=3, 2, 3);
    let y = random_tensor(rng, "Y", 1..=2, 2, 3);
    let z = random_tensor(rng, "Z", 1..=2, 2, 3);
    let w: BoxTensor = random_box(rng, "W", 2, 3).into();
    let mut mk = |a: &BoxTensor, b: &BoxTensor| {
        if routing {
            routing_diagram(rng, a, b)
        } else {
            general_diagram(rng, a, b, 1.0)
        }
    };
    [mk(&x, &y), mk(&y, &z), mk(&z, &w)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compose_is_associative(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let [f, g, h] = chain(&mut rng, false);
        let left = compose_diagrams(&compose_diagrams(&f, &g).unwrap(), &h).unwrap();
        let right = compose_diagrams(&f, &compose_diagrams(&g, &h).unwrap()).unwrap();
        prop_assert!(diagrams_close(&left, &right, 1e-12));
    }

    #[test]
    fn compose_is_exactly_associative_on_routings(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let [f, g, h] = chain(&mut rng, true);
        let left = compose_diagrams(&compose_diagrams(&f, &g).unwrap(), &h).unwrap();
        let right = compose_diagrams(&f, &compose_diagrams(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn identities_are_units(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let [f, _, _] = chain(&mut rng, false);
        let before = identity_diagram(f.domain().clone());
        let after = identity_diagram(f.codomain().clone());
        prop_assert_eq!(&compose_diagrams(&before, &f).unwrap(), &f);
        prop_assert_eq!(&compose_diagrams(&f, &after).unwrap(), &f);
    }

    #[test]
    fn monoidal_interchange(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        // total dimension at most 6 per side
        let t = |rng: &mut common::TestRng, p: &str| random_tensor(rng, p, 1..=2, 1, 2);
        let (a0, a1, a2) = (t(&mut rng, "A"), t(&mut rng, "B"), t(&mut rng, "C"));
        let (b0, b1, b2) = (t(&mut rng, "P"), t(&mut rng, "Q"), t(&mut rng, "R"));
        let f1 = general_diagram(&mut rng, &a0, &a1, 1.0);
        let f2 = general_diagram(&mut rng, &a1, &a2, 1.0);
        let g1 = general_diagram(&mut rng, &b0, &b1, 1.0);
        let g2 = general_diagram(&mut rng, &b1, &b2, 1.0);
        let left = tensor_diagrams(&[&compose_diagrams(&f1, &f2).unwrap(), &compose_diagrams(&g1, &g2).unwrap()]);
        let right = compose_diagrams(&tensor_diagrams(&[&f1, &g1]), &tensor_diagrams(&[&f2, &g2])).unwrap();
        prop_assert!(diagrams_close(&left, &right, 1e-12));
    }

    #[test]
    fn tensor_is_block_diagonal(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let [f, _, _] = chain(&mut rng, false);
        let [g, _, _] = chain(&mut rng, false);
        let t = tensor_diagrams(&[&f, &g]);
        let (fi, fo) = (f.domain().total_in(), f.domain().total_out());
        let (fyi, fyo) = (f.codomain().total_in(), f.codomain().total_out());
        let a = t.a_f();
        prop_assert!(a.submatrix(0..fi, fo..a.cols()).unwrap().is_zero());
        prop_assert!(a.submatrix(fi..a.rows(), 0..fo).unwrap().is_zero());
        let b = t.b_f();
        prop_assert!(b.submatrix(0..fi, fyi..b.cols()).unwrap().is_zero());
        prop_assert!(b.submatrix(fi..b.rows(), 0..fyi).unwrap().is_zero());
        let c = t.c_f();
        prop_assert!(c.submatrix(0..fyo, fo..c.cols()).unwrap().is_zero());
        prop_assert!(c.submatrix(fyo..c.rows(), 0..fo).unwrap().is_zero());
    }

    #[test]
    fn apply_is_functorial(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let routing = rng.gen_bool(0.3);
        let [f, g, _] = chain(&mut rng, routing);
        let parts = systems_on(&mut rng, f.domain(), 4, 1.0);
        let refs: Vec<&LinSystem> = parts.iter().collect();
        let s = laxator(&refs);
        let once = apply_diagram(&compose_diagrams(&f, &g).unwrap(), &s).unwrap();
        let twice = apply_diagram(&g, &apply_diagram(&f, &s).unwrap()).unwrap();
        prop_assert!(systems_close(&once, &twice, 1e-12));
    }

    #[test]
    fn identity_preserves_systems(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let b = random_box(&mut rng, "B", 3, 3);
        let s = common::random_system(&mut rng, &b, 4, 1.0);
        prop_assert_eq!(apply_diagram(&identity_diagram(b), &s).unwrap(), s);
    }

    #[test]
    fn laxator_is_natural(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let [f, _, _] = chain(&mut rng, false);
        let [g, _, _] = chain(&mut rng, false);
        let sf = systems_on(&mut rng, f.domain(), 4, 1.0);
        let sg = systems_on(&mut rng, g.domain(), 4, 1.0);
        let s1 = laxator(&sf.iter().collect::<Vec<_>>());
        let s2 = laxator(&sg.iter().collect::<Vec<_>>());
        let left = apply_diagram(&tensor_diagrams(&[&f, &g]), &laxator(&[&s1, &s2])).unwrap();
        let right = laxator(&[&apply_diagram(&f, &s1).unwrap(), &apply_diagram(&g, &s2).unwrap()]);
        prop_assert!(systems_close(&left, &right, 1e-12));
    }

    #[test]
    fn coupled_simulation_matches_composite(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::oracle_instance(&mut rng, 100);
        let refs: Vec<&LinSystem> = inst.systems.iter().collect();
        let composite = apply_diagram(&inst.diagram, &laxator(&refs)).unwrap();
        let s0: Vec<f64> = inst.s0.concat();
        let direct = simulate(&composite, &s0, &inst.inputs).unwrap();
        let coupled = coupled_simulate(&inst.diagram, &refs, &inst.s0, &inst.inputs).unwrap();
        prop_assert!(coupled.max_abs_diff(&direct).unwrap() <= 1e-9);
    }

    #[test]
    fn simulation_is_linear(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::oracle_instance(&mut rng, 50);
        let refs: Vec<&LinSystem> = inst.systems.iter().collect();
        let sys = apply_diagram(&inst.diagram, &laxator(&refs)).unwrap();
        let m = sys.input_dim();
        let other: Vec<Vec<f64>> = (0..50).map(|_| common::vector(&mut rng, m, 1.0)).collect();
        let (alpha, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mixed: Vec<Vec<f64>> = inst
            .inputs
            .iter()
            .zip(&other)
            .map(|(x, y)| x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect())
            .collect();
        let zero = vec![0.0; sys.state_dim()];
        let tx = simulate(&sys, &zero, &inst.inputs).unwrap();
        let ty = simulate(&sys, &zero, &other).unwrap();
        let tm = simulate(&sys, &zero, &mixed).unwrap();
        for t in 0..=50 {
            for k in 0..sys.output_dim() {
                let want = alpha * tx.outputs[t][k] + beta * ty.outputs[t][k];
                prop_assert!((tm.outputs[t][k] - want).abs() <= 1e-9);
            }
            for k in 0..sys.state_dim() {
                let want = alpha * tx.states[t][k] + beta * ty.states[t][k];
                prop_assert!((tm.states[t][k] - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn hierarchy_invariance(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let root = random_box(&mut rng, "Root", 2, 2);
        let mut counter = 0;
        let tree = common::random_tree(&mut rng, &root, 3, &mut counter);
        let leaf_boxes = leaves(&tree);
        let leaf_systems: Vec<LinSystem> = leaf_boxes.iter().map(|b| common::random_system(&mut rng, b, 3, 1.0)).collect();
        let refs: Vec<&LinSystem> = leaf_systems.iter().collect();
        let flat = semantics_of(&tree, &refs).unwrap();
        let staged = semantics_level_by_level(&tree, &refs).unwrap();
        prop_assert!(systems_close(&flat, &staged, 1e-12));
        // The state partition of the flattened composite has one part per leaf.
        let partition = StatePartition::new(
            leaf_boxes.iter().zip(&leaf_systems).map(|(b, s)| (b.name.clone(), s.state_dim())).collect(),
        );
        prop_assert_eq!(partition.parts().len(), leaf_boxes.len());
        prop_assert_eq!(partition.total(), flat.state_dim());
    }

    #[test]
    fn flatten_of_depth_one_is_the_node(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let root = random_box(&mut rng, "Root", 2, 2);
        let mut counter = 0;
        let tree = common::random_tree(&mut rng, &root, 1, &mut counter);
        prop_assert_eq!(&flatten(&tree).unwrap(), tree.node());
        let shallow = Decomposition::shallow(root, tree.node().clone()).unwrap();
        prop_assert_eq!(&flatten(&shallow).unwrap(), tree.node());
    }

    #[test]
    fn loop_recovery_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::loop_instance(&mut rng);
        let f = common::loop_diagram(&inst.boxes);
        let composite = apply_diagram(&f, &laxator(&[&inst.sensor, &inst.controller, &inst.dynamics])).unwrap();
        let partition = StatePartition::loop_parts(
            inst.sensor.state_dim(),
            inst.controller.state_dim(),
            inst.dynamics.state_dim(),
        );
        let rep = recover_loop_blocks(&composite, &partition).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.violations);
        let b = |name: &str| rep.determined(name).unwrap().clone();
        prop_assert!(close(&b("A_D"), inst.dynamics.a(), 1e-9));
        prop_assert!(close(&b("B_D"), inst.dynamics.b(), 1e-9));
        prop_assert!(close(&b("C_D"), inst.dynamics.c(), 1e-9));
        prop_assert!(close(&b("C_C"), inst.controller.c(), 1e-9));
        prop_assert!(close(&b("A_L"), inst.sensor.a(), 1e-9));
        prop_assert!(close(&b("A_C"), inst.controller.a(), 1e-9));
        let pe = inst.boxes[1].input("e").unwrap().dim;
        let nl = inst.sensor.state_dim();
        prop_assert!(close(&b("B_L(e)"), &inst.sensor.b().submatrix(0..nl, 0..pe).unwrap(), 1e-9));
        let bl_s = inst.sensor.b().submatrix(0..nl, pe..inst.sensor.input_dim()).unwrap();
        prop_assert!(close(&b("B_L(s)·C_D"), &bl_s.mat_mul(inst.dynamics.c()).unwrap(), 1e-9));
        // Free blocks carry no values, only the product that constrains them.
        prop_assert_eq!(rep.free.len(), 3);
        prop_assert!(rep.free.iter().all(|x| x.constrained_by.is_some()));
        prop_assert!(rep
            .determined
            .iter()
            .filter(|x| x.component != "D")
            .all(|x| x.kind != BlockKind::Component));
    }

    #[test]
    fn loop_recovery_is_sound(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::loop_instance(&mut rng);
        let f = common::loop_diagram(&inst.boxes);
        let composite = apply_diagram(&f, &laxator(&[&inst.sensor, &inst.controller, &inst.dynamics])).unwrap();
        let (nl, nc, nd) = (inst.sensor.state_dim(), inst.controller.state_dim(), inst.dynamics.state_dim());
        let rep = recover_loop_blocks(&composite, &StatePartition::loop_parts(nl, nc, nd)).unwrap();
        prop_assert!(rep.passed());
        let get = |n: &str| rep.determined(n).unwrap().clone();
        let [_, lb, cb, db] = inst.boxes.clone();
        // Free blocks filled with zeros.
        let ms = lb.input("s").unwrap().dim;
        let q = cb.input("s_pred").unwrap().dim;
        let sensor = LinSystem::new(
            lb.clone(),
            get("A_L"),
            wirecomp::numerics::hcat(&[&get("B_L(e)"), &Matrix::zeros(nl, ms)]).unwrap(),
            Matrix::zeros(q, nl),
        )
        .unwrap();
        let controller = LinSystem::new(
            cb.clone(),
            get("A_C"),
            wirecomp::numerics::hcat(&[&get("B_C(d)"), &Matrix::zeros(nc, q)]).unwrap(),
            get("C_C"),
        )
        .unwrap();
        let dynamics = LinSystem::new(db, get("A_D"), get("B_D"), get("C_D")).unwrap();
        let tol = 1e-9;
        let check = check_composition(&f, &[&sensor, &controller, &dynamics], &composite, tol).unwrap();
        for block in ["A[D,D]", "A[D,C]", "A[D,L]", "A[C,D]", "A[L,L]", "A[C,C]", "B[D]", "B[L]", "B[C]", "C[L]", "C[C]", "C[D]"] {
            let d = check.block(block).unwrap();
            prop_assert!(d.within_tol, "{} off by {}", block, d.max_abs_diff);
        }
    }
}
