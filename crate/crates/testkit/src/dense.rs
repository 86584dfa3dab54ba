//! Brute-force dense-matrix route for register operations: build the full
//! permutation and operator matrices and multiply them out. Exponential and
//! slow by design — a reference to check the optimized kernels against.

use num_complex::Complex64;
use qproc_core::quantum::CMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<Complex64>>;

pub fn mat_of(m: &CMatrix) -> Mat {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.at(i, j)).collect())
        .collect()
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(dim: usize) -> Mat {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { ONE } else { ZERO }).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let (ca, cb) = (a[0].len(), b[0].len());
    let mut out = vec![vec![ZERO; ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![ZERO; p]; n];
    for i in 0..n {
        for k in 0..m {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..p {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

/// The permutation matrix that moves the qubits at `positions` to the front,
/// keeping all others in their original order: Π|b⟩ = |reordered b⟩.
pub fn perm_matrix(positions: &[usize], width: usize) -> Mat {
    let mut order: Vec<usize> = positions.to_vec();
    for q in 0..width {
        if !positions.contains(&q) {
            order.push(q);
        }
    }
    let dim = 1usize << width;
    let image = |b: usize| {
        order.iter().enumerate().fold(0usize, |acc, (new_pos, orig_pos)| {
            acc | ((b >> (width - 1 - orig_pos)) & 1) << (width - 1 - new_pos)
        })
    };
    let mut out = vec![vec![ZERO; dim]; dim];
    for (b, row) in (0..dim).map(image).enumerate() {
        out[row][b] = ONE;
    }
    out
}

/// Literal Πᵗ (U ⊗ I) Π ψ.
pub fn apply_unitary_dense(
    state: &[Complex64],
    u: &Mat,
    positions: &[usize],
    width: usize,
) -> Vec<Complex64> {
    let perm = perm_matrix(positions, width);
    let arity = u.len().trailing_zeros() as usize;
    let big = kron(u, &identity(1 << (width - arity)));
    let moved = mat_vec(&perm, state);
    let acted = mat_vec(&big, &moved);
    mat_vec(&dagger(&perm), &acted)
}

/// Measurement by explicit projector matrices: per projector the
/// renormalized post-state and the probability Σ|Πᵗ(P⊗I)Πψ|².
pub fn measure_dense(
    state: &[Complex64],
    projectors: &[Mat],
    positions: &[usize],
    width: usize,
) -> Vec<(Vec<Complex64>, f64)> {
    projectors
        .iter()
        .map(|p| {
            let projected = apply_unitary_dense(state, p, positions, width);
            let prob: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
            let scale = if prob > 0.0 { 1.0 / prob.sqrt() } else { 0.0 };
            (projected.iter().map(|a| a * scale).collect(), prob)
        })
        .collect()
}

/// A reproducible random normalized register state.
pub fn random_state(seed: u64, width: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << width;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    amps
}

/// A reproducible random single-qubit state (α, β).
pub fn random_qubit(seed: u64) -> (Complex64, Complex64) {
    let v = random_state(seed, 1);
    (v[0], v[1])
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
