//! Plain-text renderings.

use std::fmt::Write;

use wirecomp::{LinSystem, Matrix, WiringDiagram};

pub fn matrix(out: &mut String, name: &str, m: &Matrix) {
    writeln!(out, "{name} ({}x{}):", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row_slice(i).iter().map(|x| format!("{x:>12}")).collect();
        writeln!(out, "  {}", row.join(" ")).unwrap();
    }
}

pub fn system(sys: &LinSystem, partition: &[(String, usize)]) -> String {
    let mut out = String::new();
    writeln!(out, "system on {} with {} states", sys.boundary(), sys.state_dim()).unwrap();
    if !partition.is_empty() {
        let parts: Vec<String> = partition.iter().map(|(n, k)| format!("{n}:{k}")).collect();
        writeln!(out, "state partition: {}", parts.join(" ")).unwrap();
    }
    matrix(&mut out, "A", sys.a());
    matrix(&mut out, "B", sys.b());
    matrix(&mut out, "C", sys.c());
    out
}

pub fn diagram(d: &WiringDiagram) -> String {
    let mut out = String::new();
    writeln!(out, "diagram {} -> {}", d.domain(), d.codomain()).unwrap();
    matrix(&mut out, "A_f", d.a_f());
    matrix(&mut out, "B_f", d.b_f());
    matrix(&mut out, "C_f", d.c_f());
    out
}
