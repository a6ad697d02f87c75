//! States of labeled qubit registers: pure vectors, density operators,
//! reductions, entropies, and distances. All entropies are in bits.

use crate::error::{Error, Result};
use crate::register::{QubitLabel, QubitRegister};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Hermiticity / unit-trace tolerance for density operators.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIG_CLIP_TOL, 0]` are treated as roundoff and clipped
/// to zero; anything more negative is a hard invariant violation.
pub const EIG_CLIP_TOL: f64 = 1e-9;
/// Purity deficit below which a single-qubit marginal counts as pure.
pub const PURITY_TOL: f64 = 1e-9;

/// A pure state: unit amplitude vector over a labeled register.
#[derive(Debug, Clone)]
pub struct PureState {
    register: QubitRegister,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(register: QubitRegister, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::RegisterMismatch {
                expected: register.dim(),
                got: amplitudes.len(),
            });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > HERMITICITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "amplitude norm^2 = {norm2}, expected 1"
            )));
        }
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Computational basis state; `bits[p]` is the value of the qubit at
    /// register position `p` (little-endian index ordering).
    pub fn basis(register: QubitRegister, bits: &[u8]) -> Result<Self> {
        if bits.len() != register.len() {
            return Err(Error::RegisterMismatch {
                expected: register.len(),
                got: bits.len(),
            });
        }
        let idx: usize = bits
            .iter()
            .enumerate()
            .map(|(p, &b)| ((b as usize) & 1) << p)
            .sum();
        let mut amps = DVector::zeros(register.dim());
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            register,
            amplitudes: amps,
        })
    }

    /// `|0...0>` on `n` qubits with default labels.
    pub fn zeros(n: usize) -> Self {
        let reg = QubitRegister::new(n);
        let bits = vec![0u8; n];
        Self::basis(reg, &bits).unwrap()
    }

    /// Bell pair `(|00> + |11>)/sqrt(2)` on two qubits.
    pub fn bell() -> Self {
        let reg = QubitRegister::new(2);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = DVector::zeros(4);
        amps[0] = h;
        amps[3] = h;
        Self {
            register: reg,
            amplitudes: amps,
        }
    }

    /// GHZ state `(|0..0> + |1..1>)/sqrt(2)` on `n` qubits.
    pub fn ghz(n: usize) -> Self {
        let reg = QubitRegister::new(n);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = DVector::zeros(reg.dim());
        amps[0] = h;
        amps[reg.dim() - 1] = h;
        Self {
            register: reg,
            amplitudes: amps,
        }
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Outer product `|psi><psi|`.
    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            register: self.register.clone(),
            matrix: m,
        }
    }

    /// Tensor product; `other`'s qubits occupy the higher index bits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = self.register.join(&other.register)?;
        let amplitudes = other.amplitudes.kronecker(&self.amplitudes);
        Ok(PureState {
            register,
            amplitudes,
        })
    }

    /// True when every single-qubit marginal is pure within `PURITY_TOL`.
    pub fn is_product(&self) -> bool {
        let rho = self.to_density();
        self.register.labels().iter().all(|&l| {
            let m = rho.partial_trace(&[l]).expect("label from own register");
            let purity = (&m.matrix * &m.matrix).trace().re;
            1.0 - purity <= PURITY_TOL
        })
    }
}

/// A density operator: Hermitian, unit-trace, positive semidefinite matrix
/// over a labeled register.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    register: QubitRegister,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace (cheap checks). Positivity is
    /// enforced where eigenvalues are actually computed.
    pub fn new(register: QubitRegister, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != register.dim() || matrix.ncols() != register.dim() {
            return Err(Error::RegisterMismatch {
                expected: register.dim(),
                got: matrix.nrows(),
            });
        }
        let d = matrix.nrows();
        for i in 0..d {
            for j in i..d {
                let err = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if err > HERMITICITY_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "matrix not Hermitian at ({i},{j}): deviation {err:.3e}"
                    )));
                }
            }
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "trace = {tr}, expected 1"
            )));
        }
        Ok(Self { register, matrix })
    }

    /// Maximum-entropy state `I / 2^n`.
    pub fn maximally_mixed(register: QubitRegister) -> Self {
        let d = register.dim();
        let m = DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self {
            register,
            matrix: m,
        }
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues, ascending, with the roundoff clip applied.
    /// Fails hard when an eigenvalue is below `-EIG_CLIP_TOL`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for v in vals.iter_mut() {
            if *v < -EIG_CLIP_TOL {
                return Err(Error::InvariantViolation(format!(
                    "negative eigenvalue {v:.3e} beyond clip tolerance"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(vals)
    }

    /// Von Neumann entropy in bits: `-sum lambda log2 lambda`.
    pub fn entropy_bits(&self) -> Result<f64> {
        Ok(entropy_bits_from_eigenvalues(&self.eigenvalues()?))
    }

    /// Full invariant check (Hermitian, unit trace, PSD); used by tests
    /// after every operation.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.register.clone(), self.matrix.clone())?;
        self.eigenvalues()?;
        Ok(())
    }

    /// Tensor product; `other`'s qubits occupy the higher index bits.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let register = self.register.join(&other.register)?;
        let matrix = other.matrix.kronecker(&self.matrix);
        Ok(DensityOperator { register, matrix })
    }

    /// Reduced state on `keep`, tracing out the rest.
    pub fn partial_trace(&self, keep: &[QubitLabel]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Domain("partial trace onto empty subset".into()));
        }
        let keep_pos = self.register.positions(keep)?;
        let n = self.register.len();
        let traced_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
        let sub_register = self.register.subset(keep)?;

        if traced_pos.is_empty() {
            return Ok(self.clone());
        }

        let dk = 1usize << keep_pos.len();
        let dt = 1usize << traced_pos.len();
        let expand = |compact: usize, positions: &[usize]| -> usize {
            positions
                .iter()
                .enumerate()
                .map(|(b, &p)| ((compact >> b) & 1) << p)
                .sum()
        };
        let keep_exp: Vec<usize> = (0..dk).map(|m| expand(m, &keep_pos)).collect();
        let tr_exp: Vec<usize> = (0..dt).map(|e| expand(e, &traced_pos)).collect();

        let mut out = DMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for e in tr_exp.iter() {
                    acc += self.matrix[(keep_exp[i] | e, keep_exp[j] | e)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityOperator {
            register: sub_register,
            matrix: out,
        })
    }

    /// Trace distance `(1/2) sum |eig(rho - sigma)|`, in `[0, 1]`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch {
                expected: self.register.len(),
                got: other.register.len(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let sym = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        Ok(0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Purity `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Replace the matrix, keeping the register. Internal constructor for
    /// operations that preserve the invariants analytically.
    pub(crate) fn from_parts_unchecked(
        register: QubitRegister,
        matrix: DMatrix<Complex64>,
    ) -> Self {
        Self { register, matrix }
    }
}

/// Entropy in bits of a probability vector (clipped eigenvalues).
pub fn entropy_bits_from_eigenvalues(eigs: &[f64]) -> f64 {
    let s: f64 = eigs
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    s / std::f64::consts::LN_2
}

/// Binary entropy `H2(p)` in bits; independent scalar oracle used by tests.
pub fn binary_entropy_bits(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}
