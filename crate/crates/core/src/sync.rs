//! Error-synchronization analysis: grading weight spectra, the tail-bound
//! lemma for correlated masks with its LP verification oracle, the proof's
//! extremal mixture constructions, and the mean-field reference family.

use crate::error::{Error, Result};
use crate::lp::{solve_min, LinearProgram};
use crate::mask::{binomial, ErrorMaskDistribution};
use crate::spectrum::WeightSpectrum;
use serde::Serialize;

/// Synchronization grade of a weight spectrum, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SyncGrade {
    IndependentLike,
    Synchronized,
    Strong,
    VeryStrong,
}

impl std::fmt::Display for SyncGrade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SyncGrade::IndependentLike => "independent-like",
            SyncGrade::Synchronized => "synchronized",
            SyncGrade::Strong => "strong",
            SyncGrade::VeryStrong => "very-strong",
        };
        write!(f, "{s}")
    }
}

/// Classification thresholds; every verdict echoes the values in force.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifyParams {
    /// Rate margin for the exponential-decay probe.
    pub epsilon: f64,
    /// A tail beyond `sync_multiplier * rate * n` marks synchronization.
    pub sync_multiplier: f64,
    /// Offset below the 1/2 and 3/4 weight fractions for the strong grades.
    pub delta: f64,
    /// Substantiality threshold on tail masses.
    pub substantial: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            sync_multiplier: 10.0,
            delta: 0.1,
            substantial: 0.01,
        }
    }
}

/// Verdict with the tail evidence at every probe threshold.
#[derive(Debug, Clone, Serialize)]
pub struct SyncVerdict {
    pub grade: SyncGrade,
    pub rate: f64,
    /// `(threshold, tail mass)` probes, in the order independent-like,
    /// synchronized, strong, very-strong.
    pub tails: Vec<(f64, f64)>,
    /// Whether the tail beyond `(rate + epsilon) n` is below `2^(-epsilon n)`.
    pub decay_bound_holds: bool,
    pub params: ClassifyParams,
}

/// Grade a spectrum, strongest grade first; `independent-like` is the
/// fallback when no synchronization tail is substantial, with the
/// exponential-decay probe recorded as evidence.
pub fn classify(spectrum: &WeightSpectrum, params: &ClassifyParams) -> SyncVerdict {
    let n = spectrum.n() as f64;
    let rate = spectrum.rate();
    let thr_indep = (rate + params.epsilon) * n;
    let thr_sync = params.sync_multiplier * rate * n;
    let thr_strong = (0.5 - params.delta) * n;
    let thr_very = (0.75 - params.delta) * n;
    let tails = vec![
        (thr_indep, spectrum.tail_at_least(thr_indep)),
        (thr_sync, spectrum.tail_at_least(thr_sync)),
        (thr_strong, spectrum.tail_at_least(thr_strong)),
        (thr_very, spectrum.tail_at_least(thr_very)),
    ];
    let decay_bound_holds = tails[0].1 < 2f64.powf(-params.epsilon * n);
    let grade = if tails[3].1 >= params.substantial {
        SyncGrade::VeryStrong
    } else if tails[2].1 >= params.substantial {
        SyncGrade::Strong
    } else if tails[1].1 >= params.substantial {
        SyncGrade::Synchronized
    } else {
        SyncGrade::IndependentLike
    };
    SyncVerdict {
        grade,
        rate,
        tails,
        decay_bound_holds,
        params: *params,
    }
}

/// Permutation-symmetric mask distribution held as weight-class
/// probabilities; scales to hundreds of qubits where explicit tables
/// cannot.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricMaskDistribution {
    n: usize,
    q: Vec<f64>,
}

impl SymmetricMaskDistribution {
    pub fn new(n: usize, q: Vec<f64>) -> Result<Self> {
        if q.len() != n + 1 {
            return Err(Error::Domain(format!(
                "weight-class vector length {} does not match n+1 = {}",
                q.len(),
                n + 1
            )));
        }
        if q.iter().any(|&p| p < -1e-12) {
            return Err(Error::Domain("negative weight-class probability".into()));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "weight-class probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            n,
            q: q.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class_probabilities(&self) -> &[f64] {
        &self.q
    }

    /// Per-qubit rate `p = sum_k q_k k / n` (equal across qubits).
    pub fn rate(&self) -> f64 {
        self.q.iter().enumerate().map(|(k, &p)| p * k as f64).sum::<f64>() / self.n as f64
    }

    /// Pairwise second moment `E[x_i x_j] = sum_k q_k k(k-1)/(n(n-1))`.
    pub fn pair_moment(&self) -> f64 {
        let n = self.n as f64;
        self.q
            .iter()
            .enumerate()
            .map(|(k, &p)| p * (k * k.saturating_sub(1)) as f64)
            .sum::<f64>()
            / (n * (n - 1.0))
    }

    /// Pairwise correlation; 0 when the marginals are degenerate.
    pub fn pair_correlation(&self) -> f64 {
        let p = self.rate();
        let var = p * (1.0 - p);
        if var <= 1e-15 {
            return 0.0;
        }
        (self.pair_moment() - p * p) / var
    }

    /// `Prob(sum x_i > threshold)`, strict.
    pub fn tail_above(&self, threshold: f64) -> f64 {
        self.q
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as f64 > threshold)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Weight histogram as a spectrum (mask-level weights).
    pub fn to_weight_spectrum(&self) -> Result<WeightSpectrum> {
        WeightSpectrum::from_mask_weights(self.q.clone())
    }

    /// Explicit mask table, spreading each class uniformly; desk scale only.
    pub fn to_mask_distribution(&self) -> Result<ErrorMaskDistribution> {
        if self.n > 12 {
            return Err(Error::CapExceeded {
                requested: self.n,
                cap: 12,
            });
        }
        let mut table = vec![0.0; 1 << self.n];
        for (mask, slot) in table.iter_mut().enumerate() {
            let w = mask.count_ones() as usize;
            *slot = self.q[w] / binomial(self.n, w);
        }
        ErrorMaskDistribution::new(self.n, table)
    }
}

/// Scalar regime bounds of the tail lemma.
pub fn lemma_regime_ok(t: f64, s: f64) -> bool {
    t < 1.0 / 20.0 && s > 4.0 * t
}

/// Full hypothesis check of the tail lemma on an explicit table:
/// `t < 1/20`, `s > 4t`, every `p_i >= t`, every `c_ij >= s`.
pub fn lemma1_hypothesis_check(dist: &ErrorMaskDistribution, t: f64, s: f64) -> bool {
    if !lemma_regime_ok(t, s) {
        return false;
    }
    let n = dist.n();
    if (0..n).any(|k| dist.rate(k) < t - 1e-12) {
        return false;
    }
    for j in 0..n {
        for k in (j + 1)..n {
            if dist.correlation(j, k) < s - 1e-12 {
                return false;
            }
        }
    }
    true
}

/// The lemma's conclusion quantity: `Prob(sum x_i > s n / 2)` computed
/// exactly from the mask table.
pub fn lemma1_conclusion(dist: &ErrorMaskDistribution, s: f64) -> f64 {
    dist.tail_above(s * dist.n() as f64 / 2.0)
}

/// LP-oracle result for the symmetric minimization.
#[derive(Debug, Clone)]
pub struct LemmaLpOracle {
    /// Minimum tail probability over the constrained symmetric family.
    pub optimum: f64,
    pub minimizer: SymmetricMaskDistribution,
    /// The lemma's claimed lower bound `s t / 4`.
    pub bound: f64,
}

/// Minimize `Prob(sum x_i > sn/2)` over symmetric distributions with first
/// moment exactly `t` and pairwise correlation at least `s`. Both moment
/// constraints are linear in the weight-class probabilities, so the
/// minimization is a linear program solved exactly by basis enumeration.
/// If the lemma is right the optimum exceeds `s t / 4`.
pub fn lemma1_lp_oracle(n: usize, t: f64, s: f64) -> Result<LemmaLpOracle> {
    if n > 200 {
        return Err(Error::CapExceeded {
            requested: n,
            cap: 200,
        });
    }
    if n < 2 {
        return Err(Error::Domain("the lemma needs at least two qubits".into()));
    }
    if !lemma_regime_ok(t, s) {
        return Err(Error::Precondition(format!(
            "(t, s) = ({t}, {s}) outside the lemma regime t < 1/20, s > 4t"
        )));
    }
    let nf = n as f64;
    let tail_threshold = s * nf / 2.0;
    let objective: Vec<f64> = (0..=n)
        .map(|k| if k as f64 > tail_threshold { 1.0 } else { 0.0 })
        .collect();
    let mean_row: Vec<f64> = (0..=n).map(|k| k as f64 / nf).collect();
    let pair_row: Vec<f64> = (0..=n)
        .map(|k| (k * k.saturating_sub(1)) as f64 / (nf * (nf - 1.0)))
        .collect();
    // correlation >= s at rate t means E[x_i x_j] >= t^2 + s t (1 - t)
    let pair_bound = t * t + s * t * (1.0 - t);
    let lp = LinearProgram {
        objective,
        eq: vec![(vec![1.0; n + 1], 1.0), (mean_row, t)],
        ge: vec![(pair_row, pair_bound)],
    };
    let sol = solve_min(&lp).map_err(|e| match e {
        Error::LpInfeasible(msg) => Error::LpInfeasible(format!(
            "symmetric family empty at (n, t, s) = ({n}, {t}, {s}): {msg}"
        )),
        other => other,
    })?;
    let total: f64 = sol.x.iter().sum();
    let q: Vec<f64> = sol.x.iter().map(|&v| v.max(0.0) / total).collect();
    Ok(LemmaLpOracle {
        optimum: sol.objective,
        minimizer: SymmetricMaskDistribution::new(n, q)?,
        bound: s * t / 4.0,
    })
}

/// Moment summary of a symmetric construction.
#[derive(Debug, Clone, Serialize)]
pub struct MaskStats {
    pub rate: f64,
    pub pair_correlation: f64,
    /// `Prob(sum x_i > s n / 2)`.
    pub tail: f64,
}

fn stats_of(d: &SymmetricMaskDistribution, s: f64) -> MaskStats {
    MaskStats {
        rate: d.rate(),
        pair_correlation: d.pair_correlation(),
        tail: d.tail_above(s * d.n() as f64 / 2.0),
    }
}

/// The proof's extremal three-part mixture and its modified variant, with
/// their moment audits.
#[derive(Debug, Clone)]
pub struct ExtremalConstruction {
    /// Mass `ts/4` on all-ones, calibrated mass on the weight-`floor(sn/2)`
    /// class, remainder on all-zeros.
    pub base: SymmetricMaskDistribution,
    /// Mass `st/4` on all-ones, mass `2t/s - t/2` of iid Bernoulli(s/2),
    /// remainder all-zeros.
    pub modified: SymmetricMaskDistribution,
    pub base_stats: MaskStats,
    pub modified_stats: MaskStats,
    /// The lemma bound `s t / 4` these are compared against.
    pub bound: f64,
    /// Scalar regime check `t < 1/20`, `s > 4t`.
    pub regime_ok: bool,
}

/// Build both proof constructions, calibrated so every `p_i = t`.
/// Errors when the calibration would need a negative mass or an empty
/// middle weight class.
pub fn extremal_distribution(n: usize, t: f64, s: f64) -> Result<ExtremalConstruction> {
    if n < 2 {
        return Err(Error::Domain("construction needs at least two qubits".into()));
    }
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain("t and s must lie in [0, 1]".into()));
    }
    let nf = n as f64;
    let m = (s * nf / 2.0).floor() as usize;
    if m < 1 {
        return Err(Error::CalibrationOutOfRange(format!(
            "middle weight class floor(sn/2) = 0 at (n, s) = ({n}, {s})"
        )));
    }
    let p1 = t * s / 4.0;
    let p2 = (t - p1) * nf / m as f64;
    let p0 = 1.0 - p1 - p2;
    if p2 < 0.0 || p0 < -1e-12 {
        return Err(Error::CalibrationOutOfRange(format!(
            "three-part mixture masses (p0, p2) = ({p0}, {p2}) out of range"
        )));
    }
    let mut q = vec![0.0; n + 1];
    q[0] = p0.max(0.0);
    q[m] += p2;
    q[n] += p1;
    let base = SymmetricMaskDistribution::new(n, q)?;

    let w_ones = s * t / 4.0;
    let w_bern = 2.0 * t / s - t / 2.0;
    let w_zero = 1.0 - w_ones - w_bern;
    if w_bern < 0.0 || w_zero < -1e-12 {
        return Err(Error::CalibrationOutOfRange(format!(
            "modified mixture masses (zeros, bernoulli) = ({w_zero}, {w_bern}) out of range"
        )));
    }
    let half_s = s / 2.0;
    let mut qm = vec![0.0; n + 1];
    qm[0] += w_zero.max(0.0);
    for (k, slot) in qm.iter_mut().enumerate() {
        *slot += w_bern * binomial(n, k) * half_s.powi(k as i32) * (1.0 - half_s).powi((n - k) as i32);
    }
    qm[n] += w_ones;
    let modified = SymmetricMaskDistribution::new(n, qm)?;

    let base_stats = stats_of(&base, s);
    let modified_stats = stats_of(&modified, s);
    Ok(ExtremalConstruction {
        base,
        modified,
        base_stats,
        modified_stats,
        bound: s * t / 4.0,
        regime_ok: lemma_regime_ok(t, s),
    })
}

/// Mean-field reference family: `q(k)` proportional to
/// `C(n,k) exp(beta k^2 / n + h k)`.
pub fn curie_weiss_distribution(n: usize, beta: f64, h: f64) -> Result<SymmetricMaskDistribution> {
    if n > 20 {
        return Err(Error::CapExceeded {
            requested: n,
            cap: 20,
        });
    }
    if n < 1 {
        return Err(Error::Domain("need at least one qubit".into()));
    }
    let nf = n as f64;
    let logits: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            binomial(n, k).ln() + beta * kf * kf / nf + h * kf
        })
        .collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut q: Vec<f64> = logits.iter().map(|&l| (l - top).exp()).collect();
    let z: f64 = q.iter().sum();
    for p in q.iter_mut() {
        *p /= z;
    }
    SymmetricMaskDistribution::new(n, q)
}
