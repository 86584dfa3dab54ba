//! State vectors over an ordered qubit register.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantum::matrix::CMatrix;
use crate::quantum::observable::Observable;
use crate::quantum::EPS_DROP;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Minimum amplitude count before the parallel kernels pay off.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 1 << 12;

/// Amplitudes over `2^width` basis states. Register position 0 holds the
/// most significant basis-index bit, so newly prepended qubits extend the
/// index at the top without disturbing existing positions.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

/// Permutation of basis indices moving `positions` (in order) to the front
/// of the register and keeping the rest in their original relative order.
/// `perm[b]` is the index `b` maps to.
pub fn front_permutation(positions: &[usize], width: usize) -> Vec<usize> {
    let t = positions.len();
    let mut newpos = vec![usize::MAX; width];
    for (i, &p) in positions.iter().enumerate() {
        assert!(p < width && newpos[p] == usize::MAX, "bad target positions");
        newpos[p] = i;
    }
    let mut next = t;
    for np in newpos.iter_mut() {
        if *np == usize::MAX {
            *np = next;
            next += 1;
        }
    }
    (0..1usize << width)
        .map(|b| {
            let mut out = 0usize;
            for (p, &np) in newpos.iter().enumerate() {
                if (b >> (width - 1 - p)) & 1 == 1 {
                    out |= 1 << (width - 1 - np);
                }
            }
            out
        })
        .collect()
}

/// `phi[perm[b]] = amps[b]`.
fn permute(amps: &[Complex64], perm: &[usize]) -> Vec<Complex64> {
    let mut out = vec![ZERO; amps.len()];
    for (b, &p) in perm.iter().enumerate() {
        out[p] = amps[b];
    }
    out
}

/// `out[b] = amps[perm[b]]`.
fn unpermute(amps: &[Complex64], perm: &[usize]) -> Vec<Complex64> {
    perm.iter().map(|&p| amps[p]).collect()
}

/// `(op ⊗ I^k)` applied to a front-permuted vector, one output block per
/// operator row. Zero coefficients are skipped in both kernels, which keeps
/// their results bit-identical.
fn apply_block_seq(op: &CMatrix, phi: &[Complex64], k: usize) -> Vec<Complex64> {
    let block = 1usize << k;
    let mut out = vec![ZERO; phi.len()];
    for u in 0..op.dim() {
        let dst = &mut out[u * block..(u + 1) * block];
        for (up, &coef) in op.row(u).iter().enumerate() {
            if coef == ZERO {
                continue;
            }
            let src = &phi[up * block..(up + 1) * block];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += coef * s;
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn apply_block_par(op: &CMatrix, phi: &[Complex64], k: usize) -> Vec<Complex64> {
    let block = 1usize << k;
    let mut out = vec![ZERO; phi.len()];
    out.par_chunks_mut(block).enumerate().for_each(|(u, dst)| {
        for (up, &coef) in op.row(u).iter().enumerate() {
            if coef == ZERO {
                continue;
            }
            let src = &phi[up * block..(up + 1) * block];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += coef * s;
            }
        }
    });
    out
}

fn apply_block(op: &CMatrix, phi: &[Complex64], k: usize) -> Vec<Complex64> {
    #[cfg(feature = "parallel")]
    if phi.len() >= PAR_MIN_LEN {
        return apply_block_par(op, phi, k);
    }
    apply_block_seq(op, phi, k)
}

impl StateVector {
    /// The empty register: a single unit amplitude.
    pub fn scalar() -> StateVector {
        StateVector { amps: vec![Complex64::new(1.0, 0.0)] }
    }

    /// Build from raw amplitudes (length a power of two), normalizing.
    pub fn from_amps(amps: Vec<Complex64>) -> Result<StateVector> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Validate(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Validate("state has no norm".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { amps })
    }

    pub fn width(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn dot(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.dot(other).norm_sqr()
    }

    /// Prepend a fresh qubit in basis state `bit` at register position 0.
    pub fn push_front(&mut self, bit: u8) {
        let len = self.amps.len();
        let mut out = vec![ZERO; len * 2];
        let dst = if bit == 0 {
            &mut out[..len]
        } else {
            &mut out[len..]
        };
        dst.copy_from_slice(&self.amps);
        self.amps = out;
    }

    fn apply_operator(&self, op: &CMatrix, positions: &[usize]) -> Vec<Complex64> {
        let width = self.width();
        let t = op.arity();
        assert_eq!(positions.len(), t, "target count != operator arity");
        let perm = front_permutation(positions, width);
        let phi = permute(&self.amps, &perm);
        let out = apply_block(op, &phi, width - t);
        unpermute(&out, &perm)
    }

    /// Apply a unitary to the qubits at `positions` (operator row order).
    pub fn apply_unitary(&mut self, op: &CMatrix, positions: &[usize]) {
        self.amps = self.apply_operator(op, positions);
    }

    /// Sequential kernel, for benchmarking against the parallel one.
    pub fn apply_unitary_seq(&mut self, op: &CMatrix, positions: &[usize]) {
        let width = self.width();
        let perm = front_permutation(positions, width);
        let phi = permute(&self.amps, &perm);
        let out = apply_block_seq(op, &phi, width - op.arity());
        self.amps = unpermute(&out, &perm);
    }

    #[cfg(feature = "parallel")]
    pub fn apply_unitary_par(&mut self, op: &CMatrix, positions: &[usize]) {
        let width = self.width();
        let perm = front_permutation(positions, width);
        let phi = permute(&self.amps, &perm);
        let out = apply_block_par(op, &phi, width - op.arity());
        self.amps = unpermute(&out, &perm);
    }

    /// Measure `obs` on the qubits at `positions`: every outcome with
    /// probability above [`EPS_DROP`], as (eigenvalue, collapsed state,
    /// probability), probabilities renormalized over the kept outcomes.
    pub fn measure(&self, obs: &Observable, positions: &[usize]) -> Vec<(i64, StateVector, f64)> {
        let width = self.width();
        let t = obs.arity();
        assert_eq!(positions.len(), t, "target count != observable arity");
        let perm = front_permutation(positions, width);
        let phi = permute(&self.amps, &perm);
        let mut kept = Vec::new();
        let mut total = 0.0;
        for branch in obs.branches() {
            let out = apply_block(&branch.projector, &phi, width - t);
            let p: f64 = out.iter().map(|a| a.norm_sqr()).sum();
            if p > EPS_DROP {
                let scale = 1.0 / p.sqrt();
                let amps = unpermute(&out, &perm)
                    .into_iter()
                    .map(|a| a * scale)
                    .collect();
                kept.push((branch.eigenvalue, StateVector { amps }, p));
                total += p;
            }
        }
        for (_, _, p) in kept.iter_mut() {
            *p /= total;
        }
        kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::defs::Registry;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn reg() -> Registry {
        Registry::builtin()
    }

    #[test]
    fn push_front_prepends_most_significant_bit() {
        let mut s = StateVector::scalar();
        s.push_front(0);
        assert_eq!(s.amps(), &[Complex64::new(1.0, 0.0), ZERO]);
        s.push_front(1);
        // |1> ⊗ |0> = |10>, index 2 of 4.
        assert!(close(s.amps()[2], Complex64::new(1.0, 0.0)));
        assert_eq!(s.width(), 2);
    }

    #[test]
    fn bell_pair_from_h_and_cnot() {
        let r = reg();
        let mut s = StateVector::scalar();
        s.push_front(0);
        s.push_front(0);
        s.apply_unitary(r.unitary("H").unwrap().matrix(), &[0]);
        s.apply_unitary(r.unitary("CNot").unwrap().matrix(), &[0, 1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amps()[0], Complex64::new(h, 0.0)));
        assert!(close(s.amps()[1], ZERO));
        assert!(close(s.amps()[2], ZERO));
        assert!(close(s.amps()[3], Complex64::new(h, 0.0)));
    }

    #[test]
    fn gate_targets_follow_position_order() {
        let r = reg();
        let cnot = r.unitary("CNot").unwrap().matrix();
        // |01>: qubit at position 1 is set.
        let mut s = StateVector::from_amps(vec![
            ZERO,
            Complex64::new(1.0, 0.0),
            ZERO,
            ZERO,
        ])
        .unwrap();
        // Control on position 1, target position 0: flips to |11>.
        s.apply_unitary(cnot, &[1, 0]);
        assert!(close(s.amps()[3], Complex64::new(1.0, 0.0)));
        // Control on position 0 (still set): flips position 1 back; |10>.
        s.apply_unitary(cnot, &[0, 1]);
        assert!(close(s.amps()[2], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn middle_qubit_addressing_in_three_wide_register() {
        let r = reg();
        let mut s = StateVector::scalar();
        for _ in 0..3 {
            s.push_front(0);
        }
        s.apply_unitary(r.unitary("X").unwrap().matrix(), &[1]);
        // |010> is index 2.
        assert!(close(s.amps()[2], Complex64::new(1.0, 0.0)));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measuring_a_plus_state_splits_evenly() {
        let r = reg();
        let mut s = StateVector::scalar();
        s.push_front(0);
        s.apply_unitary(r.unitary("H").unwrap().matrix(), &[0]);
        let outcomes = s.measure(r.observable("M_std").unwrap(), &[0]);
        assert_eq!(outcomes.len(), 2);
        assert_eq!(outcomes[0].0, 0);
        assert!((outcomes[0].2 - 0.5).abs() < 1e-12);
        assert!(close(outcomes[0].1.amps()[0], Complex64::new(1.0, 0.0)));
        assert_eq!(outcomes[1].0, 1);
        assert!(close(outcomes[1].1.amps()[1], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn impossible_outcomes_are_dropped() {
        let r = reg();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amps(vec![
            Complex64::new(h, 0.0),
            ZERO,
            ZERO,
            Complex64::new(h, 0.0),
        ])
        .unwrap();
        let outcomes = bell.measure(r.observable("M_std2").unwrap(), &[0, 1]);
        let eigen: Vec<i64> = outcomes.iter().map(|(e, _, _)| *e).collect();
        assert_eq!(eigen, vec![0, 3]);
        let total: f64 = outcomes.iter().map(|(_, _, p)| *p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn front_permutation_is_identity_for_leading_targets() {
        let perm = front_permutation(&[0, 1], 3);
        assert_eq!(perm, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn from_amps_rejects_bad_shapes() {
        assert!(StateVector::from_amps(vec![]).is_err());
        assert!(StateVector::from_amps(vec![ZERO; 3]).is_err());
        assert!(StateVector::from_amps(vec![ZERO; 2]).is_err());
    }
}
