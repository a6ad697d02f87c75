//! Multi-qubit Pauli operators indexed by base-4 multi-indices.
//!
//! Every `sigma_I` is a signed permutation matrix: row `r` has its single
//! nonzero at column `r ^ xmask(I)`. That sparsity is what makes exact
//! Pauli-coefficient extraction cheap at desk scale.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// One entry of a Pauli multi-index: 0 = identity, 1 = X, 2 = Y, 3 = Z.
pub type PauliCode = u8;

/// A Pauli multi-index over `n` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliIndex {
    entries: Vec<PauliCode>,
}

impl PauliIndex {
    pub fn new(entries: Vec<PauliCode>) -> Result<Self> {
        if entries.iter().any(|&e| e > 3) {
            return Err(Error::Domain("Pauli codes must be in 0..=3".into()));
        }
        if entries.is_empty() {
            return Err(Error::Domain("Pauli index needs at least one qubit".into()));
        }
        Ok(Self { entries })
    }

    /// Decode `code` as base-4 digits, qubit 0 = least significant digit.
    pub fn from_code(code: usize, n: usize) -> Self {
        let mut entries = vec![0u8; n];
        let mut c = code;
        for e in entries.iter_mut() {
            *e = (c & 3) as u8;
            c >>= 2;
        }
        Self { entries }
    }

    pub fn code(&self) -> usize {
        self.entries
            .iter()
            .enumerate()
            .map(|(k, &e)| (e as usize) << (2 * k))
            .sum()
    }

    pub fn entries(&self) -> &[PauliCode] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of non-identity entries.
    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    /// Bitmask of qubits on which the index acts nontrivially.
    pub fn support(&self) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(k, _)| 1usize << k)
            .sum()
    }

    /// Bitmask of qubits with an X or Y entry (the bit-flipping part).
    fn xmask(&self) -> usize {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e == 1 || e == 2)
            .map(|(k, _)| 1usize << k)
            .sum()
    }

    /// Matrix element `<r ^ xmask | sigma_I | c>` for column `c`.
    fn column_phase(&self, col: usize) -> Complex64 {
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, &e) in self.entries.iter().enumerate() {
            let bit = (col >> k) & 1;
            match e {
                2 => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
                3 => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
                _ => {}
            }
        }
        phase
    }

    /// Dense `2^n x 2^n` matrix of the Pauli tensor product.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = 1usize << self.entries.len();
        let xm = self.xmask();
        let mut m = DMatrix::zeros(d, d);
        for c in 0..d {
            m[(c ^ xm, c)] = self.column_phase(c);
        }
        m
    }

    /// Exact trace `tr(sigma_I * a)` using the one-nonzero-per-row structure.
    pub fn trace_with(&self, a: &DMatrix<Complex64>) -> Complex64 {
        let d = 1usize << self.entries.len();
        debug_assert_eq!(a.nrows(), d);
        let xm = self.xmask();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..d {
            acc += self.column_phase(c) * a[(c, c ^ xm)];
        }
        acc
    }
}

/// Dense Pauli matrix for a multi-index.
pub fn pauli_matrix(index: &PauliIndex) -> DMatrix<Complex64> {
    index.matrix()
}

/// Single-qubit Pauli matrices, indexed by code.
pub fn pauli_1q(code: PauliCode) -> DMatrix<Complex64> {
    PauliIndex::new(vec![code]).unwrap().matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_index_is_identity_matrix() {
        let m = PauliIndex::from_code(0, 3).matrix();
        assert_eq!(m, DMatrix::identity(8, 8));
    }

    #[test]
    fn single_qubit_z_is_diag_1_minus1() {
        let z = pauli_1q(3);
        assert_eq!(z[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(z[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn y_matches_convention() {
        let y = pauli_1q(2);
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
    }

    /// Exhaustive Hilbert-Schmidt orthogonality sweep at n = 2:
    /// tr(sigma_I sigma_J) = 2^n * delta_IJ over all 256 pairs.
    #[test]
    fn hilbert_schmidt_orthogonality_n2() {
        let n = 2;
        let d = 4.0;
        for i in 0..16 {
            let mi = PauliIndex::from_code(i, n).matrix();
            for j in 0..16 {
                let pj = PauliIndex::from_code(j, n);
                let t = pj.trace_with(&mi);
                let expected = if i == j { d } else { 0.0 };
                assert_abs_diff_eq!(t.re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(t.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn trace_with_agrees_with_dense_product() {
        let n = 3;
        let d = 8;
        // arbitrary deterministic complex matrix
        let a = DMatrix::from_fn(d, d, |i, j| {
            Complex64::new((i * 7 + j) as f64 * 0.1, (i as f64) - (j as f64) * 0.3)
        });
        for code in [0usize, 5, 14, 33, 63] {
            let idx = PauliIndex::from_code(code, n);
            let dense = (idx.matrix() * &a).trace();
            let sparse = idx.trace_with(&a);
            assert_abs_diff_eq!(dense.re, sparse.re, epsilon = 1e-10);
            assert_abs_diff_eq!(dense.im, sparse.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn weight_and_support() {
        let idx = PauliIndex::new(vec![0, 1, 0, 3]).unwrap();
        assert_eq!(idx.weight(), 2);
        assert_eq!(idx.support(), 0b1010);
    }
}
