//! Built-in unitaries and observables.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::quantum::matrix::CMatrix;
use crate::quantum::observable::{MeasurementBranch, Observable};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn z() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn mat(rows: Vec<Vec<Complex64>>) -> CMatrix {
    CMatrix::from_rows(rows).expect("built-in matrix shape")
}

/// Basis-state projector |k><k| on `n` qubits.
fn basis_projector(n: usize, k: usize) -> CMatrix {
    let dim = 1 << n;
    mat((0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == k && j == k { re(1.0) } else { z() })
                .collect()
        })
        .collect())
}

/// The built-in unitaries. Multi-qubit gates read their first target as the
/// most significant basis bit (`CNot[c,t]` flips `t` when `c` is set).
pub fn builtin_unitaries() -> Vec<(&'static str, CMatrix)> {
    let h = FRAC_1_SQRT_2;
    vec![
        ("I", mat(vec![vec![re(1.0), z()], vec![z(), re(1.0)]])),
        ("X", mat(vec![vec![z(), re(1.0)], vec![re(1.0), z()]])),
        ("Y", mat(vec![vec![z(), im(-1.0)], vec![im(1.0), z()]])),
        ("Z", mat(vec![vec![re(1.0), z()], vec![z(), re(-1.0)]])),
        ("H", mat(vec![vec![re(h), re(h)], vec![re(h), re(-h)]])),
        ("S", mat(vec![vec![re(1.0), z()], vec![z(), im(1.0)]])),
        (
            "T",
            mat(vec![
                vec![re(1.0), z()],
                vec![z(), Complex64::from_polar(1.0, FRAC_PI_4)],
            ]),
        ),
        (
            "CNot",
            mat(vec![
                vec![re(1.0), z(), z(), z()],
                vec![z(), re(1.0), z(), z()],
                vec![z(), z(), z(), re(1.0)],
                vec![z(), z(), re(1.0), z()],
            ]),
        ),
        (
            "CZ",
            mat(vec![
                vec![re(1.0), z(), z(), z()],
                vec![z(), re(1.0), z(), z()],
                vec![z(), z(), re(1.0), z()],
                vec![z(), z(), z(), re(-1.0)],
            ]),
        ),
        (
            "Swap",
            mat(vec![
                vec![re(1.0), z(), z(), z()],
                vec![z(), z(), re(1.0), z()],
                vec![z(), re(1.0), z(), z()],
                vec![z(), z(), z(), re(1.0)],
            ]),
        ),
    ]
}

/// The built-in observables: standard-basis measurement of one (`M_std`)
/// or two (`M_std2`) qubits, with the measured basis index as outcome.
pub fn builtin_observables() -> Vec<(&'static str, Observable)> {
    let std_n = |n: usize| {
        Observable::new(
            (0..1usize << n)
                .map(|k| MeasurementBranch {
                    eigenvalue: k as i64,
                    projector: basis_projector(n, k),
                })
                .collect(),
        )
        .expect("built-in observable shape")
    };
    vec![("M_std", std_n(1)), ("M_std2", std_n(2))]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::validate_unitary;
    use crate::quantum::observable::validate_observable;

    #[test]
    fn builtins_pass_their_own_validation() {
        for (name, m) in builtin_unitaries() {
            validate_unitary(&m).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        for (name, o) in builtin_observables() {
            validate_observable(o.branches()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn cnot_flips_target_on_set_control() {
        let cnot = &builtin_unitaries()[7].1;
        // Column for |10> (control set, target clear) is |11>.
        assert_eq!(cnot.at(3, 2), re(1.0));
        assert_eq!(cnot.at(2, 3), re(1.0));
        assert_eq!(cnot.at(0, 0), re(1.0));
    }
}
