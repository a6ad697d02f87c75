//! Error-weight spectra. A channel's Kraus family expands in the Pauli
//! basis as `A_k = sum_I a_{k,I} sigma_I`; collecting the coefficient
//! vectors `v^I = (a_{k,I})_k` by weight gives the spectrum
//! `f(w) = sum_{|I| = w} ||v^I||^2`, which sums to one for any
//! trace-preserving channel and is invariant under Kraus remixing.

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::mask::binomial;
use crate::par::par_map;
use crate::pauli::PauliIndex;
use crate::register::QubitLabel;
use serde::{Deserialize, Serialize};

/// Spectrum entries may be negative by at most this much before erroring;
/// within it they are clipped to zero.
pub const SPECTRUM_CLIP_TOL: f64 = 1e-12;
/// Normalization tolerance for `sum_w f(w) = 1`.
pub const SPECTRUM_SUM_TOL: f64 = 1e-9;

/// Nonnegative mass per error weight `w = 0..n`, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpectrum {
    n: usize,
    f: Vec<f64>,
}

impl WeightSpectrum {
    pub fn new(n: usize, f: Vec<f64>) -> Result<Self> {
        if f.len() != n + 1 {
            return Err(Error::Domain(format!(
                "spectrum length {} does not match n+1 = {}",
                f.len(),
                n + 1
            )));
        }
        if f.iter().any(|&v| v < -SPECTRUM_CLIP_TOL) {
            return Err(Error::InvariantViolation(
                "negative spectrum entry beyond clip tolerance".into(),
            ));
        }
        let f: Vec<f64> = f.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_SUM_TOL {
            return Err(Error::InvariantViolation(format!(
                "spectrum sums to {sum}, expected 1"
            )));
        }
        Ok(Self { n, f })
    }

    /// Spectrum of mask weights: how many qubits a noise event touches.
    /// This is the mask-level reading used for collapse models.
    pub fn from_mask_weights(hist: Vec<f64>) -> Result<Self> {
        let n = hist.len().saturating_sub(1);
        Self::new(n, hist)
    }

    /// Binomial(n, p) reference spectrum.
    pub fn binomial(n: usize, p: f64) -> Self {
        let f = (0..=n)
            .map(|w| binomial(n, w) * p.powi(w as i32) * (1.0 - p).powi((n - w) as i32))
            .collect();
        Self { n, f }
    }

    /// Point mass at a single weight.
    pub fn point_mass(n: usize, w: usize) -> Self {
        let mut f = vec![0.0; n + 1];
        f[w.min(n)] = 1.0;
        Self { n, f }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &[f64] {
        &self.f
    }

    pub fn mass_at(&self, w: usize) -> f64 {
        self.f.get(w).copied().unwrap_or(0.0)
    }

    /// Tail mass `f(>= x)` at a real threshold.
    pub fn tail_at_least(&self, x: f64) -> f64 {
        self.f
            .iter()
            .enumerate()
            .filter(|(w, _)| *w as f64 >= x)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Mean weight `sum_w f(w) w`.
    pub fn mean_weight(&self) -> f64 {
        self.f.iter().enumerate().map(|(w, &p)| p * w as f64).sum()
    }

    /// Error rate: mean weight over register size, the per-qubit average.
    pub fn rate(&self) -> f64 {
        self.mean_weight() / self.n as f64
    }

    /// Spectrum of a tensor product of channels: weight masses convolve.
    pub fn convolve(&self, other: &WeightSpectrum) -> WeightSpectrum {
        let n = self.n + other.n;
        let mut f = vec![0.0; n + 1];
        for (u, &a) in self.f.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (v, &b) in other.f.iter().enumerate() {
                f[u + v] += a * b;
            }
        }
        WeightSpectrum { n, f }
    }
}

/// Squared Pauli-coefficient mass `||v^I||^2` for every multi-index,
/// indexed by the base-4 code of `I`.
fn pauli_masses(channel: &QuantumChannel) -> Vec<f64> {
    let n = channel.register().len();
    let d = channel.dim() as f64;
    let codes: Vec<usize> = (0..(1usize << (2 * n))).collect();
    par_map(&codes, |&code| {
        let idx = PauliIndex::from_code(code, n);
        channel
            .kraus()
            .iter()
            .map(|a| (idx.trace_with(a) / d).norm_sqr())
            .sum::<f64>()
    })
}

/// Pauli weight spectrum of a channel.
pub fn pauli_weight_spectrum(channel: &QuantumChannel) -> Result<WeightSpectrum> {
    let n = channel.register().len();
    let masses = pauli_masses(channel);
    let mut f = vec![0.0; n + 1];
    for (code, &m) in masses.iter().enumerate() {
        f[PauliIndex::from_code(code, n).weight()] += m;
    }
    WeightSpectrum::new(n, f)
}

/// Amount of error on one qubit: `sum { ||v^I||^2 : i_k != 0 }`.
pub fn per_qubit_error(channel: &QuantumChannel, k: QubitLabel) -> Result<f64> {
    let pos = channel.register().position(k)?;
    let masses = pauli_masses(channel);
    Ok(masses
        .iter()
        .enumerate()
        .filter(|(code, _)| (code >> (2 * pos)) & 3 != 0)
        .map(|(_, &m)| m)
        .sum())
}

/// Error rate of a channel: the average per-qubit error, equal to
/// `sum_w f(w) w / n`.
pub fn error_rate(channel: &QuantumChannel) -> Result<f64> {
    Ok(pauli_weight_spectrum(channel)?.rate())
}
