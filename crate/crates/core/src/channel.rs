//! Quantum operations as Kraus families, including the collapse-based
//! error models: single-qubit collapse `W_k`, mask errors `E_x`, simple
//! mixtures `E_D`, and collapse-profile channels `E_f`.

use crate::error::{Error, Result};
use crate::mask::{CollapseProfile, ErrorMaskDistribution};
use crate::pauli::PauliIndex;
use crate::register::{QubitLabel, QubitRegister};
use crate::state::DensityOperator;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Trace-preservation tolerance for channel construction.
pub const TP_TOL: f64 = 1e-9;
/// Looser trace-preservation tolerance for channels recovered from
/// superoperators (accumulated-error extraction).
pub const TP_TOL_RECOVERED: f64 = 1e-8;

/// A completely positive trace-preserving map held as a Kraus family.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    register: QubitRegister,
    kraus: Vec<DMatrix<Complex64>>,
}

impl QuantumChannel {
    pub fn new(register: QubitRegister, kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        Self::new_with_tol(register, kraus, TP_TOL)
    }

    pub fn new_with_tol(
        register: QubitRegister,
        kraus: Vec<DMatrix<Complex64>>,
        tol: f64,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Domain("channel needs at least one Kraus operator".into()));
        }
        let d = register.dim();
        for a in &kraus {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::RegisterMismatch {
                    expected: d,
                    got: a.nrows(),
                });
            }
        }
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for a in &kraus {
            acc += a.adjoint() * a;
        }
        let dev = (&acc - DMatrix::<Complex64>::identity(d, d)).camax();
        if dev > tol {
            return Err(Error::InvariantViolation(format!(
                "channel is not trace preserving: max deviation {dev:.3e}"
            )));
        }
        Ok(Self { register, kraus })
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.register.dim()
    }

    /// Identity channel.
    pub fn identity(register: QubitRegister) -> Self {
        let d = register.dim();
        Self {
            register,
            kraus: vec![DMatrix::identity(d, d)],
        }
    }

    /// Unitary-conjugation channel `rho -> U rho U^dag`.
    pub fn unitary(register: QubitRegister, u: DMatrix<Complex64>) -> Result<Self> {
        let d = register.dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::RegisterMismatch {
                expected: d,
                got: u.nrows(),
            });
        }
        let dev = (u.adjoint() * &u - DMatrix::<Complex64>::identity(d, d)).camax();
        if dev > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "matrix is not unitary: deviation {dev:.3e}"
            )));
        }
        Ok(Self {
            register,
            kraus: vec![u],
        })
    }

    /// Collapse channel `W_k`: replaces the state of qubit `k` by the
    /// maximum-entropy state. Kraus family `{sigma_i / 2}` on that qubit.
    pub fn collapse(register: QubitRegister, k: QubitLabel) -> Result<Self> {
        let pos = register.position(k)?;
        let n = register.len();
        let half = Complex64::new(0.5, 0.0);
        let kraus = (0..4u8)
            .map(|code| {
                let mut entries = vec![0u8; n];
                entries[pos] = code;
                PauliIndex::new(entries).unwrap().matrix() * half
            })
            .collect();
        Ok(Self { register, kraus })
    }

    /// Simple error channel `E_D`: mixture over masks of collapsing exactly
    /// the masked qubits. Masks with zero probability are dropped to keep
    /// dilation environments small.
    pub fn simple_error(register: QubitRegister, dist: &ErrorMaskDistribution) -> Result<Self> {
        let n = register.len();
        if dist.n() != n {
            return Err(Error::RegisterMismatch {
                expected: n,
                got: dist.n(),
            });
        }
        let mut kraus = Vec::new();
        for (mask, prob) in dist.support() {
            let masked: Vec<usize> = (0..n).filter(|k| (mask >> k) & 1 == 1).collect();
            let w = masked.len();
            let scale = Complex64::new(prob.sqrt() / (1 << w) as f64, 0.0);
            // every Pauli supported inside the mask, including identity parts
            let combos = 1usize << (2 * w);
            for combo in 0..combos {
                let mut entries = vec![0u8; n];
                for (b, &pos) in masked.iter().enumerate() {
                    entries[pos] = ((combo >> (2 * b)) & 3) as u8;
                }
                kraus.push(PauliIndex::new(entries).unwrap().matrix() * scale);
            }
        }
        Self::new(register, kraus)
    }

    /// Collapse-profile channel `E_f`: draw `t` from the profile, then
    /// collapse each qubit independently with probability `t`. Equals
    /// [`Self::simple_error`] of the mixture-of-product-Bernoulli table.
    pub fn collapse_profile(register: QubitRegister, profile: &CollapseProfile) -> Result<Self> {
        let dist = profile.to_mask_distribution(register.len());
        Self::simple_error(register, &dist)
    }

    /// Single-qubit depolarizing with collapse probability `t`:
    /// `rho -> (1-t) rho + t I/2` on qubit `k`.
    pub fn depolarizing_qubit(register: QubitRegister, k: QubitLabel, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("rate t = {t} out of [0,1]")));
        }
        let pos = register.position(k)?;
        let n = register.len();
        let d = register.dim();
        let mut kraus = vec![DMatrix::identity(d, d) * Complex64::new((1.0 - 0.75 * t).sqrt(), 0.0)];
        for code in 1..4u8 {
            let mut entries = vec![0u8; n];
            entries[pos] = code;
            kraus.push(
                PauliIndex::new(entries).unwrap().matrix() * Complex64::new(t.sqrt() / 2.0, 0.0),
            );
        }
        Self::new(register, kraus)
    }

    /// Independent depolarizing with rate `t` on every qubit, as an explicit
    /// Kraus family (4^n operators); capped because the family is only
    /// needed explicitly at small n.
    pub fn iid_depolarizing(register: QubitRegister, t: f64) -> Result<Self> {
        let n = register.len();
        if n > 5 {
            return Err(Error::CapExceeded {
                requested: n,
                cap: 5,
            });
        }
        let mut chan = Self::identity(register.clone());
        for &l in register.labels() {
            let step = Self::depolarizing_qubit(register.clone(), l, t)?;
            chan = step.compose(&chan)?;
        }
        Ok(chan)
    }

    /// Global depolarizing: `rho -> (1-p) rho + p I/2^n tr(rho)`, via the
    /// Pauli-twirl Kraus family. Commutes with every unitary conjugation.
    pub fn global_depolarizing(register: QubitRegister, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("rate p = {p} out of [0,1]")));
        }
        let n = register.len();
        if n > 5 {
            return Err(Error::CapExceeded {
                requested: n,
                cap: 5,
            });
        }
        let d = register.dim();
        let mut kraus = vec![DMatrix::identity(d, d) * Complex64::new((1.0 - p).sqrt(), 0.0)];
        let scale = Complex64::new(p.sqrt() / d as f64, 0.0);
        for code in 0..(1usize << (2 * n)) {
            kraus.push(PauliIndex::from_code(code, n).matrix() * scale);
        }
        Self::new(register, kraus)
    }

    /// Kraus action `rho -> sum_k A_k rho A_k^dag`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.register() != &self.register {
            return Err(Error::RegisterMismatch {
                expected: self.register.len(),
                got: rho.register().len(),
            });
        }
        let d = self.dim();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for a in &self.kraus {
            out += a * rho.matrix() * a.adjoint();
        }
        Ok(DensityOperator::from_parts_unchecked(
            self.register.clone(),
            out,
        ))
    }

    /// Sequential composition: the returned channel applies `inner` first,
    /// then `self`, so `superop(self.compose(inner)) = superop(self) * superop(inner)`.
    pub fn compose(&self, inner: &QuantumChannel) -> Result<QuantumChannel> {
        if self.register != inner.register {
            return Err(Error::RegisterMismatch {
                expected: self.register.len(),
                got: inner.register.len(),
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * inner.kraus.len());
        for a in &self.kraus {
            for b in &inner.kraus {
                kraus.push(a * b);
            }
        }
        Ok(QuantumChannel {
            register: self.register.clone(),
            kraus,
        })
    }

    /// Tensor product of channels on disjoint registers; `other`'s qubits
    /// occupy the higher index bits.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let register = self.register.join(&other.register)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b.kronecker(a));
            }
        }
        Ok(QuantumChannel { register, kraus })
    }

    /// Stinespring dilation: an isometry `V: H_S -> H_S (x) H_E` with
    /// `tr_E(V rho V^dag) = E(rho)`. The environment has
    /// `max(1, ceil(log2 m))` qubits for `m` Kraus operators.
    pub fn stinespring_dilation(&self) -> (DMatrix<Complex64>, usize) {
        let m = self.kraus.len();
        let env_qubits = usize::max(1, (m as f64).log2().ceil() as usize);
        // guard against log2 rounding at exact powers of two
        let env_qubits = if (1usize << env_qubits) < m {
            env_qubits + 1
        } else {
            env_qubits
        };
        let d = self.dim();
        let de = 1usize << env_qubits;
        let mut v = DMatrix::<Complex64>::zeros(d * de, d);
        for (k, a) in self.kraus.iter().enumerate() {
            for r in 0..d {
                for c in 0..d {
                    v[(k * d + r, c)] = a[(r, c)];
                }
            }
        }
        (v, env_qubits)
    }

    /// Row-major superoperator matrix of the channel on `vec(rho)`:
    /// `S = sum_k A_k (x) conj(A_k)`.
    pub fn superoperator(&self, qubit_cap: usize) -> Result<DMatrix<Complex64>> {
        let n = self.register.len();
        if n > qubit_cap {
            return Err(Error::CapExceeded {
                requested: n,
                cap: qubit_cap,
            });
        }
        let d = self.dim();
        let mut s = DMatrix::<Complex64>::zeros(d * d, d * d);
        for a in &self.kraus {
            s += a.kronecker(&a.conjugate());
        }
        Ok(s)
    }

    /// Rebuild a channel from its superoperator via the Choi eigenvalue
    /// decomposition. Eigenvalues below `1e-12` are dropped; small negative
    /// eigenvalues within `1e-8` are tolerated as roundoff.
    pub fn from_superoperator(
        register: QubitRegister,
        superop: &DMatrix<Complex64>,
    ) -> Result<QuantumChannel> {
        let d = register.dim();
        if superop.nrows() != d * d || superop.ncols() != d * d {
            return Err(Error::RegisterMismatch {
                expected: d * d,
                got: superop.nrows(),
            });
        }
        // Choi matrix J[(r,i),(s,j)] = S[(r,s),(i,j)]
        let mut choi = DMatrix::<Complex64>::zeros(d * d, d * d);
        for r in 0..d {
            for i in 0..d {
                for s in 0..d {
                    for j in 0..d {
                        choi[(r * d + i, s * d + j)] = superop[(r * d + s, i * d + j)];
                    }
                }
            }
        }
        let herm_dev = (&choi - choi.adjoint()).camax();
        if herm_dev > 1e-7 {
            return Err(Error::InvariantViolation(format!(
                "superoperator is not completely positive: Choi Hermiticity deviation {herm_dev:.3e}"
            )));
        }
        let choi = (&choi + choi.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(choi);
        let mut kraus = Vec::new();
        for (idx, &mu) in eig.eigenvalues.iter().enumerate() {
            if mu < -1e-8 {
                return Err(Error::InvariantViolation(format!(
                    "superoperator is not completely positive: Choi eigenvalue {mu:.3e}"
                )));
            }
            if mu <= 1e-12 {
                continue;
            }
            let w = eig.eigenvectors.column(idx);
            let scale = Complex64::new(mu.sqrt(), 0.0);
            let a = DMatrix::from_fn(d, d, |r, i| w[r * d + i] * scale);
            kraus.push(a);
        }
        QuantumChannel::new_with_tol(register, kraus, TP_TOL_RECOVERED)
    }

    /// Remix the Kraus family by an isometry: `A'_j = sum_k U[j,k] A_k`.
    /// Represents the same channel; used to test representation invariance.
    pub fn remix(&self, u: &DMatrix<Complex64>) -> Result<QuantumChannel> {
        let m = self.kraus.len();
        if u.ncols() != m {
            return Err(Error::Domain(format!(
                "remix matrix has {} columns, channel has {m} Kraus operators",
                u.ncols()
            )));
        }
        let dev = (u.adjoint() * u - DMatrix::<Complex64>::identity(m, m)).camax();
        if dev > 1e-10 {
            return Err(Error::Domain(
                "remix matrix must have orthonormal columns".into(),
            ));
        }
        let d = self.dim();
        let kraus: Vec<_> = (0..u.nrows())
            .map(|j| {
                let mut a = DMatrix::<Complex64>::zeros(d, d);
                for k in 0..m {
                    a += &self.kraus[k] * u[(j, k)];
                }
                a
            })
            .collect();
        QuantumChannel::new(self.register.clone(), kraus)
    }
}

/// Row-major vectorization `v[i*d + j] = m[(i, j)]`.
pub fn vec_row_major(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let d = m.nrows();
    DVector::from_fn(d * d, |k, _| m[(k / d, k % d)])
}

/// Inverse of [`vec_row_major`].
pub fn unvec_row_major(v: &DVector<Complex64>, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Embed an operator acting on the qubits at `positions` (little-endian,
/// `positions[0]` is the small matrix's low bit) into the full register.
pub fn embed_operator(
    n: usize,
    positions: &[usize],
    small: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let k = positions.len();
    assert_eq!(small.nrows(), 1 << k);
    let d = 1usize << n;
    let rest: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
    let expand = |compact: usize, ps: &[usize]| -> usize {
        ps.iter()
            .enumerate()
            .map(|(b, &p)| ((compact >> b) & 1) << p)
            .sum()
    };
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for e in 0..(1usize << rest.len()) {
        let base = expand(e, &rest);
        for a in 0..(1usize << k) {
            let row = base | expand(a, positions);
            for b in 0..(1usize << k) {
                let col = base | expand(b, positions);
                out[(row, col)] = small[(a, b)];
            }
        }
    }
    out
}
