//! Dense square complex matrices, sized for few-qubit operators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::TOL;

/// A square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<CMatrix> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Validate("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::Validate(format!(
                    "matrix is not square: {dim} rows but a row of {} entries",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(CMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    /// Number of qubits this operator acts on; the dimension must be a
    /// power of two.
    pub fn arity(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn is_qubit_sized(&self) -> bool {
        self.dim >= 2 && self.dim.is_power_of_two()
    }
}

/// Largest absolute deviation of `U†U` from the identity.
fn unitary_deviation(m: &CMatrix) -> f64 {
    let n = m.dim;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += m.at(k, i).conj() * m.at(k, j);
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - expect).norm());
        }
    }
    worst
}

/// Check that `m` is unitary to within [`TOL`].
pub fn validate_unitary(m: &CMatrix) -> Result<()> {
    if !m.is_qubit_sized() {
        return Err(Error::Validate(format!(
            "operator dimension {} is not a power of two >= 2",
            m.dim
        )));
    }
    let dev = unitary_deviation(m);
    if dev > TOL {
        return Err(Error::Validate(format!(
            "matrix is not unitary (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// A validated unitary operator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(mat: CMatrix) -> Result<UnitaryMatrix> {
        validate_unitary(&mat)?;
        Ok(UnitaryMatrix { mat })
    }

    pub fn arity(&self) -> usize {
        self.mat.arity()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hadamard_is_unitary() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_rows(vec![vec![re(h), re(h)], vec![re(h), re(-h)]]).unwrap();
        validate_unitary(&m).unwrap();
    }

    #[test]
    fn perturbed_matrix_is_rejected() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_rows(vec![
            vec![re(h + 1e-6), re(h)],
            vec![re(h), re(-h)],
        ])
        .unwrap();
        assert!(validate_unitary(&m).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(CMatrix::from_rows(vec![]).is_err());
        assert!(CMatrix::from_rows(vec![vec![re(1.0)], vec![re(0.0)]]).is_err());
        let three = CMatrix::from_rows(vec![
            vec![re(1.0), re(0.0), re(0.0)],
            vec![re(0.0), re(1.0), re(0.0)],
            vec![re(0.0), re(0.0), re(1.0)],
        ])
        .unwrap();
        assert!(validate_unitary(&three).is_err());
    }
}
