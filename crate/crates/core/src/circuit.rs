//! Layered circuits with continuous gate sets, storage-noise models applied
//! after every layer, exact noisy simulation, and extraction of the
//! accumulated (propagated) error channel.

use crate::channel::{embed_operator, QuantumChannel};
use crate::error::{Error, Result};
use crate::mask::{CollapseProfile, ErrorMaskDistribution};
use crate::register::{QubitLabel, QubitRegister};
use crate::rng::{haar_unitary_with, SeedRng};
use crate::state::{DensityOperator, PureState};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Unitarity tolerance for gates.
pub const GATE_TOL: f64 = 1e-10;

/// A gate: a unitary on an ordered tuple of at most two qubits.
/// `qubits[0]` addresses the low bit of the gate matrix.
#[derive(Debug, Clone)]
pub struct Gate {
    qubits: Vec<QubitLabel>,
    unitary: DMatrix<Complex64>,
}

impl Gate {
    pub fn new(qubits: Vec<QubitLabel>, unitary: DMatrix<Complex64>) -> Result<Self> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(Error::Domain("gate arity must be 1 or 2".into()));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::Domain("gate qubits must be distinct".into()));
        }
        let d = 1usize << qubits.len();
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::Domain(format!(
                "gate matrix is {}x{}, expected {d}x{d}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let dev = (unitary.adjoint() * &unitary - DMatrix::<Complex64>::identity(d, d)).camax();
        if dev > GATE_TOL {
            return Err(Error::InvariantViolation(format!(
                "gate is not unitary: deviation {dev:.3e}"
            )));
        }
        Ok(Self { qubits, unitary })
    }

    pub fn qubits(&self) -> &[QubitLabel] {
        &self.qubits
    }

    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }
}

pub type Layer = Vec<Gate>;

/// An ordered list of layers; gates within a layer act on disjoint qubits.
#[derive(Debug, Clone)]
pub struct Circuit {
    register: QubitRegister,
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(register: QubitRegister, layers: Vec<Layer>) -> Result<Self> {
        for (i, layer) in layers.iter().enumerate() {
            let mut used = std::collections::HashSet::new();
            for gate in layer {
                for q in gate.qubits() {
                    if !register.contains(*q) {
                        return Err(Error::UnknownLabel(q.0));
                    }
                    if !used.insert(*q) {
                        return Err(Error::Domain(format!(
                            "layer {i}: qubit {q} used by two gates"
                        )));
                    }
                }
            }
        }
        Ok(Self { register, layers })
    }

    /// Random circuit: every layer draws a random disjoint matching of the
    /// qubits; each matched pair becomes a Haar-random two-qubit gate with
    /// probability `entangling_fraction`, otherwise two independent
    /// Haar-random single-qubit gates.
    pub fn random(
        n: usize,
        depth: usize,
        entangling_fraction: f64,
        rng: &mut SeedRng,
    ) -> Result<Circuit> {
        if !(0.0..=1.0).contains(&entangling_fraction) {
            return Err(Error::Domain(
                "entangling fraction out of [0,1]".into(),
            ));
        }
        let register = QubitRegister::new(n);
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let mut order: Vec<QubitLabel> = register.labels().to_vec();
            order.shuffle(rng);
            let mut layer = Vec::new();
            let mut i = 0;
            while i + 1 < order.len() {
                let (a, b) = (order[i], order[i + 1]);
                if rng.random::<f64>() < entangling_fraction {
                    layer.push(Gate::new(vec![a, b], haar_unitary_with(4, rng))?);
                } else {
                    layer.push(Gate::new(vec![a], haar_unitary_with(2, rng))?);
                    layer.push(Gate::new(vec![b], haar_unitary_with(2, rng))?);
                }
                i += 2;
            }
            if i < order.len() {
                layer.push(Gate::new(vec![order[i]], haar_unitary_with(2, rng))?);
            }
            layers.push(layer);
        }
        Circuit::new(register, layers)
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Full-register unitary of one layer.
    pub fn layer_unitary(&self, layer: usize) -> DMatrix<Complex64> {
        let n = self.register.len();
        let d = self.register.dim();
        let mut u = DMatrix::<Complex64>::identity(d, d);
        for gate in &self.layers[layer] {
            let positions: Vec<usize> = gate
                .qubits()
                .iter()
                .map(|q| self.register.position(*q).expect("validated label"))
                .collect();
            u = embed_operator(n, &positions, gate.unitary()) * u;
        }
        u
    }

    /// Product of all layer unitaries (layer 0 applied first).
    pub fn total_unitary(&self) -> DMatrix<Complex64> {
        let d = self.register.dim();
        let mut u = DMatrix::<Complex64>::identity(d, d);
        for l in 0..self.layers.len() {
            u = self.layer_unitary(l) * u;
        }
        u
    }

    /// Interaction graph: one edge per pair of qubits that share a gate.
    pub fn interaction_graph(&self) -> Vec<(QubitLabel, QubitLabel)> {
        let mut edges = std::collections::BTreeSet::new();
        for layer in &self.layers {
            for gate in layer {
                if gate.qubits().len() == 2 {
                    let (a, b) = (gate.qubits()[0], gate.qubits()[1]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        edges.into_iter().collect()
    }
}

/// Collapse one qubit position of a raw density matrix to I/2.
pub(crate) fn collapse_position(m: &DMatrix<Complex64>, pos: usize) -> DMatrix<Complex64> {
    let d = m.nrows();
    let bit = 1usize << pos;
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if (i ^ j) & bit != 0 {
                continue;
            }
            let (i0, j0) = (i & !bit, j & !bit);
            let (i1, j1) = (i | bit, j | bit);
            out[(i, j)] = (m[(i0, j0)] + m[(i1, j1)]) * Complex64::new(0.5, 0.0);
        }
    }
    out
}

/// Collapse every qubit in the mask.
fn collapse_mask(m: &DMatrix<Complex64>, mask: usize, n: usize) -> DMatrix<Complex64> {
    let mut cur = m.clone();
    for p in 0..n {
        if (mask >> p) & 1 == 1 {
            cur = collapse_position(&cur, p);
        }
    }
    cur
}

/// Storage-noise model applied after every circuit layer.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// Independent per-qubit depolarizing with collapse probability `rate`.
    IidDepolarizing { rate: f64 },
    /// Simple mask-mixture error with an explicit table.
    Simple { dist: ErrorMaskDistribution },
    /// Collapse-probability profile (symmetric mask mixture).
    Profile { profile: CollapseProfile },
    /// Mask table from an Ising model on an interaction graph.
    Ising { model: IsingNoise },
}

/// Calibrated Ising-graph noise: masks drawn from a Gibbs table on the
/// graph, with a global field offset fixing the mean per-qubit rate.
#[derive(Debug, Clone)]
pub struct IsingNoise {
    pub couplings: Vec<(usize, usize, f64)>,
    pub fields: Vec<f64>,
    pub field_offset: f64,
    pub dist: ErrorMaskDistribution,
}

impl NoiseModel {
    pub fn iid_depolarizing(rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Domain(format!("rate {rate} out of [0,1]")));
        }
        Ok(NoiseModel::IidDepolarizing { rate })
    }

    /// Mask table equivalent on `n` qubits, when one exists at desk scale.
    pub fn mask_distribution(&self, n: usize) -> Result<ErrorMaskDistribution> {
        match self {
            NoiseModel::IidDepolarizing { rate } => {
                ErrorMaskDistribution::product_bernoulli(&vec![*rate; n])
            }
            NoiseModel::Simple { dist } => {
                if dist.n() != n {
                    return Err(Error::RegisterMismatch {
                        expected: n,
                        got: dist.n(),
                    });
                }
                Ok(dist.clone())
            }
            NoiseModel::Profile { profile } => Ok(profile.to_mask_distribution(n)),
            NoiseModel::Ising { model } => {
                if model.dist.n() != n {
                    return Err(Error::RegisterMismatch {
                        expected: n,
                        got: model.dist.n(),
                    });
                }
                Ok(model.dist.clone())
            }
        }
    }

    /// Apply one noise step exactly. Mask models use the partial-collapse
    /// route `E_D(rho) = sum_x D(x) (tr_x rho) (x) I/2^|x|`, which avoids
    /// materializing Kraus families.
    pub fn apply_to(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let n = rho.register().len();
        let m = match self {
            NoiseModel::IidDepolarizing { rate } => {
                let mut cur = rho.matrix().clone();
                for p in 0..n {
                    let collapsed = collapse_position(&cur, p);
                    cur = cur * Complex64::new(1.0 - rate, 0.0)
                        + collapsed * Complex64::new(*rate, 0.0);
                }
                cur
            }
            _ => {
                let dist = self.mask_distribution(n)?;
                let d = rho.dim();
                let mut acc = DMatrix::<Complex64>::zeros(d, d);
                for (mask, p) in dist.support() {
                    acc += collapse_mask(rho.matrix(), mask, n) * Complex64::new(p, 0.0);
                }
                acc
            }
        };
        Ok(DensityOperator::from_parts_unchecked(
            rho.register().clone(),
            m,
        ))
    }

    /// Explicit channel form (Kraus family); desk-scale registers only.
    pub fn as_channel(&self, register: &QubitRegister) -> Result<QuantumChannel> {
        match self {
            NoiseModel::IidDepolarizing { rate } => {
                QuantumChannel::iid_depolarizing(register.clone(), *rate)
            }
            _ => {
                let dist = self.mask_distribution(register.len())?;
                QuantumChannel::simple_error(register.clone(), &dist)
            }
        }
    }

    /// Superoperator of one noise step, built from per-position collapse
    /// superoperators without enumerating Kraus families.
    pub fn superoperator(&self, n: usize, qubit_cap: usize) -> Result<DMatrix<Complex64>> {
        if n > qubit_cap {
            return Err(Error::CapExceeded {
                requested: n,
                cap: qubit_cap,
            });
        }
        let dd = 1usize << (2 * n);
        // collapse superoperator on one qubit position of the doubled space:
        // vec index bits are (row bits at n..2n-1, col bits at 0..n-1)
        let collapse_super = |pos: usize| -> DMatrix<Complex64> {
            let single = {
                // 4x4 matrix acting on vec(rho) of one qubit
                let mut s = DMatrix::<Complex64>::zeros(4, 4);
                let half = Complex64::new(0.5, 0.0);
                // vec index = 2*i + j (row-major), collapse: rho -> I/2 tr(rho)
                s[(0, 0)] = half;
                s[(0, 3)] = half;
                s[(3, 0)] = half;
                s[(3, 3)] = half;
                s
            };
            embed_operator(2 * n, &[pos, n + pos], &single)
        };
        let ident = DMatrix::<Complex64>::identity(dd, dd);
        match self {
            NoiseModel::IidDepolarizing { rate } => {
                let mut s = ident.clone();
                for p in 0..n {
                    let step =
                        &ident * Complex64::new(1.0 - rate, 0.0) + collapse_super(p) * Complex64::new(*rate, 0.0);
                    s = step * s;
                }
                Ok(s)
            }
            _ => {
                let dist = self.mask_distribution(n)?;
                let mut s = DMatrix::<Complex64>::zeros(dd, dd);
                for (mask, prob) in dist.support() {
                    let mut term = ident.clone();
                    for p in 0..n {
                        if (mask >> p) & 1 == 1 {
                            term = collapse_super(p) * term;
                        }
                    }
                    s += term * Complex64::new(prob, 0.0);
                }
                Ok(s)
            }
        }
    }
}

/// Ising-graph noise with the mean per-qubit rate calibrated by bisection
/// on a global field offset.
pub fn ising_noise(
    n: usize,
    couplings: &[(usize, usize, f64)],
    fields: &[f64],
    base_rate: f64,
) -> Result<NoiseModel> {
    if n > 12 {
        return Err(Error::CapExceeded {
            requested: n,
            cap: 12,
        });
    }
    if !(0.0..=1.0).contains(&base_rate) {
        return Err(Error::Domain(format!("base rate {base_rate} out of [0,1]")));
    }
    let mean_rate = |offset: f64| -> Result<f64> {
        let shifted: Vec<f64> = fields.iter().map(|h| h + offset).collect();
        let d = ErrorMaskDistribution::gibbs(n, couplings, &shifted)?;
        Ok(d.rates().iter().sum::<f64>() / n as f64)
    };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if mean_rate(lo)? > base_rate || mean_rate(hi)? < base_rate {
        return Err(Error::CalibrationOutOfRange(format!(
            "base rate {base_rate} not reachable by field offset in [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_rate(mid)? < base_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let offset = 0.5 * (lo + hi);
    let shifted: Vec<f64> = fields.iter().map(|h| h + offset).collect();
    let dist = ErrorMaskDistribution::gibbs(n, couplings, &shifted)?;
    let achieved = dist.rates().iter().sum::<f64>() / n as f64;
    if (achieved - base_rate).abs() > 1e-6 {
        return Err(Error::CalibrationOutOfRange(format!(
            "bisection stalled at rate {achieved}, requested {base_rate}"
        )));
    }
    Ok(NoiseModel::Ising {
        model: IsingNoise {
            couplings: couplings.to_vec(),
            fields: fields.to_vec(),
            field_offset: offset,
            dist,
        },
    })
}

/// Per-layer record of an exact noisy simulation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Ideal pure states, one per layer boundary (depth + 1 entries).
    pub ideal: Vec<PureState>,
    /// Noisy density operators at the same boundaries.
    pub noisy: Vec<DensityOperator>,
    /// Trace distances between the two branches at each boundary.
    pub distances: Vec<f64>,
}

/// Exact two-branch evolution: the ideal branch applies the layer
/// unitaries; the noisy branch interleaves the noise model after every
/// layer.
pub fn simulate(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    input: &PureState,
    qubit_cap: usize,
) -> Result<Trajectory> {
    let n = circuit.register().len();
    if n > qubit_cap {
        return Err(Error::CapExceeded {
            requested: n,
            cap: qubit_cap,
        });
    }
    if input.register() != circuit.register() {
        return Err(Error::RegisterMismatch {
            expected: n,
            got: input.register().len(),
        });
    }
    let mut ideal = vec![input.clone()];
    let mut noisy = vec![input.to_density()];
    let mut distances = vec![0.0];
    let mut amps = input.amplitudes().clone();
    let mut rho = input.to_density();
    for l in 0..circuit.depth() {
        let u = circuit.layer_unitary(l);
        amps = &u * amps;
        let pure = PureState::new(circuit.register().clone(), amps.clone())?;
        let m = &u * rho.matrix() * u.adjoint();
        rho = DensityOperator::from_parts_unchecked(circuit.register().clone(), m);
        if let Some(model) = noise {
            rho = model.apply_to(&rho)?;
        }
        distances.push(pure.to_density().trace_distance(&rho)?);
        ideal.push(pure);
        noisy.push(rho.clone());
    }
    Ok(Trajectory {
        ideal,
        noisy,
        distances,
    })
}

/// Accumulated error channel of a noisy circuit: the map `E_eff` with
/// `S_eff = S_noisy * S_ideal^{-1}`, so that running the noisy circuit
/// equals running the ideal circuit and then applying `E_eff`.
pub fn accumulated_error_channel(
    circuit: &Circuit,
    noise: &NoiseModel,
    superop_cap: usize,
) -> Result<QuantumChannel> {
    let n = circuit.register().len();
    if n > superop_cap {
        return Err(Error::CapExceeded {
            requested: n,
            cap: superop_cap,
        });
    }
    let d = circuit.register().dim();
    let s_noise = noise.superoperator(n, superop_cap)?;
    let mut s_noisy = DMatrix::<Complex64>::identity(d * d, d * d);
    for l in 0..circuit.depth() {
        let u = circuit.layer_unitary(l);
        let s_gate = u.kronecker(&u.conjugate());
        s_noisy = &s_noise * (s_gate * s_noisy);
    }
    let u_tot = circuit.total_unitary();
    let u_inv = u_tot.adjoint();
    let s_ideal_inv = u_inv.kronecker(&u_inv.conjugate());
    let s_eff = s_noisy * s_ideal_inv;
    QuantumChannel::from_superoperator(circuit.register().clone(), &s_eff)
}
