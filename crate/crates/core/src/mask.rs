//! Probability distributions over 0-1 error masks, and the symmetric
//! collapse-probability profiles that generate them. A mask says which
//! qubits get replaced by the maximum-entropy state in one noise event.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance for mask-table normalization.
pub const MASK_SUM_TOL: f64 = 1e-12;

/// Explicit probability table over `{0,1}^n` masks, indexed by the mask's
/// little-endian integer encoding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorMaskDistribution {
    n: usize,
    table: Vec<f64>,
}

impl ErrorMaskDistribution {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != 1 << n {
            return Err(Error::Domain(format!(
                "mask table length {} does not match 2^{n}",
                table.len()
            )));
        }
        if table.iter().any(|&p| p < -MASK_SUM_TOL) {
            return Err(Error::Domain("negative mask probability".into()));
        }
        let sum: f64 = table.iter().sum();
        if (sum - 1.0).abs() > MASK_SUM_TOL {
            return Err(Error::Domain(format!(
                "mask probabilities sum to {sum}, expected 1"
            )));
        }
        let table = table.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { n, table })
    }

    /// All mass on a single mask.
    pub fn point_mass(n: usize, mask: usize) -> Self {
        let mut table = vec![0.0; 1 << n];
        table[mask & ((1 << n) - 1)] = 1.0;
        Self { n, table }
    }

    /// `(1-t)` on the all-zeros mask, `t` on the all-ones mask.
    pub fn all_or_nothing(n: usize, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("probability t = {t} out of [0,1]")));
        }
        let mut table = vec![0.0; 1 << n];
        table[0] = 1.0 - t;
        table[(1 << n) - 1] += t;
        Ok(Self { n, table })
    }

    /// Independent per-qubit mask probabilities.
    pub fn product_bernoulli(rates: &[f64]) -> Result<Self> {
        let n = rates.len();
        if rates.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Domain("Bernoulli rate out of [0,1]".into()));
        }
        let mut table = vec![0.0; 1 << n];
        for (mask, slot) in table.iter_mut().enumerate() {
            let mut p = 1.0;
            for (k, &r) in rates.iter().enumerate() {
                p *= if (mask >> k) & 1 == 1 { r } else { 1.0 - r };
            }
            *slot = p;
        }
        Ok(Self { n, table })
    }

    /// Gibbs table `D(x) proportional to exp(sum J_ij x_i x_j + sum h_i x_i)`.
    pub fn gibbs(n: usize, couplings: &[(usize, usize, f64)], fields: &[f64]) -> Result<Self> {
        if fields.len() != n {
            return Err(Error::Domain("field vector length != n".into()));
        }
        if couplings.iter().any(|&(i, j, _)| i >= n || j >= n || i == j) {
            return Err(Error::Domain("coupling endpoint out of range".into()));
        }
        let mut energies = vec![0.0; 1 << n];
        for (mask, e) in energies.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &h) in fields.iter().enumerate() {
                if (mask >> k) & 1 == 1 {
                    acc += h;
                }
            }
            for &(i, j, jij) in couplings {
                if (mask >> i) & 1 == 1 && (mask >> j) & 1 == 1 {
                    acc += jij;
                }
            }
            *e = acc;
        }
        let emax = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut table: Vec<f64> = energies.iter().map(|&e| (e - emax).exp()).collect();
        let z: f64 = table.iter().sum();
        for p in table.iter_mut() {
            *p /= z;
        }
        Ok(Self { n, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.table[mask]
    }

    /// Masks with nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(m, &p)| (m, p))
    }

    /// Per-qubit error amount `p_k = Prob(x_k = 1)`.
    pub fn rate(&self, k: usize) -> f64 {
        self.support()
            .filter(|(m, _)| (m >> k) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn rates(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.rate(k)).collect()
    }

    fn joint_rate(&self, j: usize, k: usize) -> f64 {
        self.support()
            .filter(|(m, _)| (m >> j) & 1 == 1 && (m >> k) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Pearson correlation of the events `x_j = 1` and `x_k = 1`.
    /// Defined as 0 when either marginal is degenerate (p in {0, 1});
    /// [`Self::correlation_flagged`] reports that case.
    pub fn correlation(&self, j: usize, k: usize) -> f64 {
        self.correlation_flagged(j, k).0
    }

    /// Correlation plus a degeneracy flag for reporting.
    pub fn correlation_flagged(&self, j: usize, k: usize) -> (f64, bool) {
        assert_ne!(j, k, "correlation needs two distinct qubits");
        let pj = self.rate(j);
        let pk = self.rate(k);
        let vj = pj * (1.0 - pj);
        let vk = pk * (1.0 - pk);
        if vj <= 1e-15 || vk <= 1e-15 {
            return (0.0, true);
        }
        let cov = self.joint_rate(j, k) - pj * pk;
        (cov / (vj * vk).sqrt(), false)
    }

    /// Histogram of mask weights: `q[w] = Prob(|x| = w)`.
    pub fn weight_histogram(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.n + 1];
        for (m, p) in self.support() {
            q[m.count_ones() as usize] += p;
        }
        q
    }

    /// `Prob(sum x_i > threshold)` with strict inequality.
    pub fn tail_above(&self, threshold: f64) -> f64 {
        self.weight_histogram()
            .iter()
            .enumerate()
            .filter(|(w, _)| *w as f64 > threshold)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Marginal mask distribution on the given qubit positions.
    pub fn marginal(&self, positions: &[usize]) -> Result<ErrorMaskDistribution> {
        if positions.is_empty() {
            return Err(Error::Domain("marginal onto empty set".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &p in positions {
            if p >= self.n || !seen.insert(p) {
                return Err(Error::Domain(format!("bad marginal position {p}")));
            }
        }
        let k = positions.len();
        let mut table = vec![0.0; 1 << k];
        for (m, p) in self.support() {
            let mut sub = 0usize;
            for (b, &pos) in positions.iter().enumerate() {
                sub |= ((m >> pos) & 1) << b;
            }
            table[sub] += p;
        }
        Ok(ErrorMaskDistribution { n: k, table })
    }

    /// Product of this distribution's single-qubit marginals.
    pub fn product_of_marginals(&self) -> ErrorMaskDistribution {
        ErrorMaskDistribution::product_bernoulli(&self.rates()).expect("rates are probabilities")
    }
}

/// A discrete distribution over collapse probabilities `t in [0, 1]`:
/// draw `t`, then collapse every qubit independently with probability `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollapseProfile {
    /// Point masses `(t_i, weight_i)`.
    atoms: Vec<(f64, f64)>,
}

impl CollapseProfile {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("profile needs at least one atom".into()));
        }
        if atoms
            .iter()
            .any(|&(t, w)| !(0.0..=1.0).contains(&t) || w < 0.0)
        {
            return Err(Error::Domain("profile atom out of range".into()));
        }
        let sum: f64 = atoms.iter().map(|&(_, w)| w).sum();
        if (sum - 1.0).abs() > MASK_SUM_TOL {
            return Err(Error::Domain(format!(
                "profile weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// All mass on a single collapse probability.
    pub fn constant(t: f64) -> Result<Self> {
        Self::new(vec![(t, 1.0)])
    }

    /// `(1-t)` nothing happens, `t` every qubit collapses.
    pub fn all_or_nothing(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("probability t = {t} out of [0,1]")));
        }
        Self::new(vec![(0.0, 1.0 - t), (1.0, t)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Mean collapse probability `R(f)`; the per-qubit error rate.
    pub fn mean_rate(&self) -> f64 {
        self.atoms.iter().map(|&(t, w)| t * w).sum()
    }

    /// Mixture-of-product-Bernoulli mask table on `n` qubits.
    pub fn to_mask_distribution(&self, n: usize) -> ErrorMaskDistribution {
        let mut table = vec![0.0; 1 << n];
        for &(t, w) in &self.atoms {
            if w == 0.0 {
                continue;
            }
            for (mask, slot) in table.iter_mut().enumerate() {
                let ones = mask.count_ones() as i32;
                let p = t.powi(ones) * (1.0 - t).powi(n as i32 - ones);
                *slot += w * p;
            }
        }
        ErrorMaskDistribution { n, table }
    }

    /// Weight-class probabilities `q[k] = C(n,k) * sum_i w_i t_i^k (1-t_i)^(n-k)`.
    pub fn weight_histogram(&self, n: usize) -> Vec<f64> {
        let mut q = vec![0.0; n + 1];
        for (k, slot) in q.iter_mut().enumerate() {
            let binom = binomial(n, k);
            for &(t, w) in &self.atoms {
                *slot += w * binom * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32);
            }
        }
        q
    }
}

/// Binomial coefficient as f64; exact for the desk-scale `n` used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_bernoulli_has_zero_correlation() {
        let d = ErrorMaskDistribution::product_bernoulli(&[0.1, 0.3, 0.25]).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert_abs_diff_eq!(d.correlation(j, k), 0.0, epsilon = 1e-12);
                }
            }
        }
        assert_abs_diff_eq!(d.rate(1), 0.3, epsilon = 1e-14);
    }

    #[test]
    fn all_or_nothing_moments() {
        let t = 0.07;
        let d = ErrorMaskDistribution::all_or_nothing(5, t).unwrap();
        for k in 0..5 {
            assert_abs_diff_eq!(d.rate(k), t, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(d.correlation(0, 3), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_marginal_correlation_is_zero_and_flagged() {
        let d = ErrorMaskDistribution::point_mass(2, 0b01);
        let (c, degenerate) = d.correlation_flagged(0, 1);
        assert_eq!(c, 0.0);
        assert!(degenerate);
    }

    #[test]
    fn tail_uses_strict_inequality() {
        let d = ErrorMaskDistribution::point_mass(4, 0b0011);
        assert_eq!(d.tail_above(2.0), 0.0);
        assert_eq!(d.tail_above(1.9), 1.0);
    }

    #[test]
    fn profile_mask_table_matches_binomial() {
        let t = 0.2;
        let f = CollapseProfile::constant(t).unwrap();
        let d = f.to_mask_distribution(3);
        let iid = ErrorMaskDistribution::product_bernoulli(&[t, t, t]).unwrap();
        for m in 0..8 {
            assert_abs_diff_eq!(d.prob(m), iid.prob(m), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(f.mean_rate(), t, epsilon = 1e-14);
        let q = f.weight_histogram(3);
        assert_abs_diff_eq!(q[1], 3.0 * t * (1.0 - t) * (1.0 - t), epsilon = 1e-14);
    }

    #[test]
    fn marginal_of_synchronized_pair() {
        let d = ErrorMaskDistribution::all_or_nothing(3, 0.25).unwrap();
        let m = d.marginal(&[0, 2]).unwrap();
        assert_abs_diff_eq!(m.prob(0b00), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(m.prob(0b11), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn gibbs_zero_coupling_is_product() {
        let h = 0.4f64;
        let d = ErrorMaskDistribution::gibbs(3, &[], &[h, h, h]).unwrap();
        let p = h.exp() / (1.0 + h.exp());
        let iid = ErrorMaskDistribution::product_bernoulli(&[p, p, p]).unwrap();
        for m in 0..8 {
            assert_abs_diff_eq!(d.prob(m), iid.prob(m), epsilon = 1e-12);
        }
    }
}
