//! The operation registry and the loader for user-supplied definitions.
//!
//! A definitions file is a sequence of blocks:
//!
//! ```text
//! unitary NAME arity N
//! <2^N rows of 2^N complex entries>
//!
//! observable NAME arity N eigen L
//! <2^N projector rows>
//! ```
//!
//! Complex entries look like `1`, `-0.5`, `2i`, `0.5+0.5i`, `1e-3-2e-4i`.
//! Observable blocks with the same name are merged, one block per
//! eigenvalue; the merged projectors must decompose the identity. Blank
//! lines and `#` comments are ignored.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::gates::{builtin_observables, builtin_unitaries};
use crate::quantum::matrix::{CMatrix, UnitaryMatrix};
use crate::quantum::observable::{MeasurementBranch, Observable};

const MAX_ARITY: usize = 8;

/// Named unitaries and observables available to a program.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    unitaries: BTreeMap<String, UnitaryMatrix>,
    observables: BTreeMap<String, Observable>,
}

impl Registry {
    /// The built-in operations.
    pub fn builtin() -> Registry {
        let unitaries = builtin_unitaries()
            .into_iter()
            .map(|(n, m)| (n.to_string(), UnitaryMatrix::new(m).expect("built-in unitary")))
            .collect();
        let observables = builtin_observables()
            .into_iter()
            .map(|(n, o)| (n.to_string(), o))
            .collect();
        Registry { unitaries, observables }
    }

    pub fn unitary(&self, name: &str) -> Option<&UnitaryMatrix> {
        self.unitaries.get(name)
    }

    pub fn observable(&self, name: &str) -> Option<&Observable> {
        self.observables.get(name)
    }

    fn taken(&self, name: &str) -> bool {
        self.unitaries.contains_key(name) || self.observables.contains_key(name)
    }

    /// Load a definitions file into the registry.
    pub fn load_defs(&mut self, text: &str) -> Result<()> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut idx = 0;
        let mut pending: BTreeMap<String, (usize, Vec<MeasurementBranch>)> = BTreeMap::new();
        while idx < lines.len() {
            let (line, header) = lines[idx];
            idx += 1;
            let toks: Vec<&str> = header.split_whitespace().collect();
            match toks.as_slice() {
                ["unitary", name, "arity", n] => {
                    let n = parse_arity(n, line)?;
                    let mat = read_matrix(&lines, &mut idx, 1 << n, line)?;
                    if self.taken(name) || pending.contains_key(*name) {
                        return defs_err(line, format!("`{name}` is already defined"));
                    }
                    let u = UnitaryMatrix::new(mat)
                        .map_err(|e| defs_error(line, format!("unitary `{name}`: {e}")))?;
                    self.unitaries.insert(name.to_string(), u);
                }
                ["observable", name, "arity", n, "eigen", l] => {
                    let n = parse_arity(n, line)?;
                    let eigen: i64 = l
                        .parse()
                        .map_err(|_| defs_error(line, format!("bad eigenvalue `{l}`")))?;
                    if eigen < 0 {
                        return defs_err(
                            line,
                            format!("negative eigenvalue {eigen}; outcomes must be naturals"),
                        );
                    }
                    if self.taken(name) {
                        return defs_err(line, format!("`{name}` is already defined"));
                    }
                    let mat = read_matrix(&lines, &mut idx, 1 << n, line)?;
                    let (_, branches) =
                        pending.entry(name.to_string()).or_insert_with(|| (line, Vec::new()));
                    if branches.iter().any(|b| b.eigenvalue == eigen) {
                        return defs_err(
                            line,
                            format!("observable `{name}` already has eigenvalue {eigen}"),
                        );
                    }
                    branches.push(MeasurementBranch { eigenvalue: eigen, projector: mat });
                }
                _ => {
                    return defs_err(
                        line,
                        "expected `unitary NAME arity N` or `observable NAME arity N eigen L`"
                            .into(),
                    )
                }
            }
        }
        for (name, (line, branches)) in pending {
            let obs = Observable::new(branches)
                .map_err(|e| defs_error(line, format!("observable `{name}`: {e}")))?;
            self.observables.insert(name, obs);
        }
        Ok(())
    }
}

fn defs_error(line: usize, message: String) -> Error {
    Error::Defs { line, message }
}

fn defs_err<T>(line: usize, message: String) -> Result<T> {
    Err(defs_error(line, message))
}

fn parse_arity(tok: &str, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(n) if (1..=MAX_ARITY).contains(&n) => Ok(n),
        _ => defs_err(line, format!("arity must be between 1 and {MAX_ARITY}, got `{tok}`")),
    }
}

fn read_matrix(
    lines: &[(usize, &str)],
    idx: &mut usize,
    dim: usize,
    header_line: usize,
) -> Result<CMatrix> {
    let mut rows = Vec::with_capacity(dim);
    for _ in 0..dim {
        let Some(&(line, text)) = lines.get(*idx) else {
            return defs_err(
                header_line,
                format!("matrix needs {dim} rows, file ended after {}", rows.len()),
            );
        };
        *idx += 1;
        let mut row = Vec::with_capacity(dim);
        for tok in text.split_whitespace() {
            let v = parse_complex(tok)
                .ok_or_else(|| defs_error(line, format!("bad complex entry `{tok}`")))?;
            row.push(v);
        }
        if row.len() != dim {
            return defs_err(line, format!("expected {dim} entries, got {}", row.len()));
        }
        rows.push(row);
    }
    CMatrix::from_rows(rows).map_err(|e| defs_error(header_line, e.to_string()))
}

/// Parse `a`, `bi`, or `a±bi`, with `i`/`-i` meaning unit imaginary parts.
fn parse_complex(tok: &str) -> Option<Complex64> {
    let Some(rest) = tok.strip_suffix('i') else {
        return tok.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    for (bidx, b) in rest.bytes().enumerate().rev() {
        if (b == b'+' || b == b'-') && bidx != 0 {
            let prev = rest.as_bytes()[bidx - 1];
            if prev == b'e' || prev == b'E' {
                continue;
            }
            let re = rest[..bidx].parse::<f64>().ok()?;
            let im = match &rest[bidx..] {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            return Some(Complex64::new(re, im));
        }
    }
    let im = match rest {
        "" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(Complex64::new(0.0, im))
}
