//! Projective measurements described as eigenvalue/projector pairs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::matrix::CMatrix;
use crate::quantum::TOL;

/// One measurement outcome: a non-negative eigenvalue and its projector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBranch {
    pub eigenvalue: i64,
    pub projector: CMatrix,
}

/// A complete projective observable; branches are kept sorted by eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    branches: Vec<MeasurementBranch>,
}

impl Observable {
    pub fn new(mut branches: Vec<MeasurementBranch>) -> Result<Observable> {
        branches.sort_by_key(|b| b.eigenvalue);
        validate_observable(&branches)?;
        Ok(Observable { branches })
    }

    pub fn arity(&self) -> usize {
        self.branches[0].projector.arity()
    }

    pub fn branches(&self) -> &[MeasurementBranch] {
        &self.branches
    }
}

/// Check that the branches form a projective decomposition of the identity:
/// distinct non-negative eigenvalues and Hermitian, idempotent projectors
/// summing to I, all to within [`TOL`].
pub fn validate_observable(branches: &[MeasurementBranch]) -> Result<()> {
    let Some(first) = branches.first() else {
        return Err(Error::Validate("observable has no branches".into()));
    };
    let dim = first.projector.dim();
    if !first.projector.is_qubit_sized() {
        return Err(Error::Validate(format!(
            "projector dimension {dim} is not a power of two >= 2"
        )));
    }
    for pair in branches.windows(2) {
        if pair[0].eigenvalue == pair[1].eigenvalue {
            return Err(Error::Validate(format!(
                "eigenvalue {} appears twice",
                pair[0].eigenvalue
            )));
        }
    }
    for b in branches {
        if b.eigenvalue < 0 {
            return Err(Error::Validate(format!(
                "negative eigenvalue {}; outcomes must be naturals",
                b.eigenvalue
            )));
        }
        if b.projector.dim() != dim {
            return Err(Error::Validate(format!(
                "projector for eigenvalue {} has dimension {}, expected {dim}",
                b.eigenvalue,
                b.projector.dim()
            )));
        }
        let p = &b.projector;
        for i in 0..dim {
            for j in 0..dim {
                if (p.at(i, j) - p.at(j, i).conj()).norm() > TOL {
                    return Err(Error::Validate(format!(
                        "projector for eigenvalue {} is not Hermitian",
                        b.eigenvalue
                    )));
                }
                let mut sq = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    sq += p.at(i, k) * p.at(k, j);
                }
                if (sq - p.at(i, j)).norm() > TOL {
                    return Err(Error::Validate(format!(
                        "projector for eigenvalue {} is not idempotent",
                        b.eigenvalue
                    )));
                }
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            let sum: Complex64 = branches.iter().map(|b| b.projector.at(i, j)).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (sum - expect).norm() > TOL {
                return Err(Error::Validate(
                    "projectors do not sum to the identity".into(),
                ));
            }
        }
    }
    Ok(())
}
