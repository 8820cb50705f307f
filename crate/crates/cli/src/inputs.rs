//! Input sequences for `simulate`.

use std::path::Path;

use crate::error::{Exit, OrUsage, Result};

fn parse_row(row: &str, what: &str) -> Result<Vec<f64>> {
    let row = row.trim();
    if row.is_empty() {
        return Ok(Vec::new());
    }
    row.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Exit::usage(format!("{what}: `{x}` is not a finite number")))
        })
        .collect()
}

/// `1,0;2,0;3,0`
pub fn inline(spec: &str) -> Result<Vec<Vec<f64>>> {
    spec.split(';').map(|r| parse_row(r, "--inputs")).collect()
}

/// A semicolon-separated row list, as for matrices on the command line.
pub fn matrix_rows(spec: &str, what: &str) -> Result<Vec<Vec<f64>>> {
    spec.split(';').map(|r| parse_row(r, what)).collect()
}

/// One row per step. A first row that does not parse as numbers is taken
/// to be a header.
pub fn csv_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Exit::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.or_usage()?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) if r.iter().all(|x| x.is_finite()) => rows.push(r),
            _ if i == 0 => {}
            _ => {
                return Err(Exit::usage(format!(
                    "{}: row {} is not a list of finite numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Resolves the input sequence and step count from the flags. With no
/// input flag the inputs are zero.
pub fn sequence(
    steps: Option<usize>,
    dim: usize,
    constant: Option<&[f64]>,
    inline_spec: Option<&str>,
    csv: Option<&Path>,
) -> Result<Vec<Vec<f64>>> {
    let rows = match (constant, inline_spec, csv) {
        (Some(c), _, _) => {
            let t = steps.ok_or_else(|| Exit::usage("--input-const needs --steps"))?;
            vec![c.to_vec(); t]
        }
        (_, Some(s), _) => inline(s)?,
        (_, _, Some(p)) => csv_file(p)?,
        _ => {
            let t = steps
                .ok_or_else(|| Exit::usage("give --steps, or inputs via --input-const, --inputs or --inputs-csv"))?;
            vec![vec![0.0; dim]; t]
        }
    };
    if let Some(t) = steps {
        if rows.len() != t {
            return Err(Exit::usage(format!(
                "--steps {t} but {} input rows were given",
                rows.len()
            )));
        }
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(Exit::usage(format!(
            "input row {} has {} entries, the system takes {dim}",
            i + 1,
            r.len()
        )));
    }
    Ok(rows)
}
