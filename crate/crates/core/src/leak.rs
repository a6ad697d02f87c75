//! Entropy-based information-leak measures: the leak of a channel from a
//! qubit subset against a product input, the pairwise leak correlation,
//! the environment-side variant built on the Stinespring dilation, and the
//! pairwise entanglement functional the leak correlations are compared to.

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::register::{QubitLabel, QubitRegister};
use crate::state::{DensityOperator, PureState};
use serde::Serialize;

/// A leak cell: entropy of the noisy image of a product state on a subset.
#[derive(Debug, Clone, Serialize)]
pub struct LeakReport {
    pub subset: Vec<u32>,
    pub leak_bits: f64,
}

fn require_product(tau: &PureState) -> Result<()> {
    if !tau.is_product() {
        return Err(Error::Precondition(
            "leak is defined against tensor-product pure states".into(),
        ));
    }
    Ok(())
}

/// Information leak `L_E(A; tau) = S(E(tau)|_A)` in bits.
pub fn leak(channel: &QuantumChannel, subset: &[QubitLabel], tau: &PureState) -> Result<f64> {
    require_product(tau)?;
    let out = channel.apply(&tau.to_density())?;
    out.partial_trace(subset)?.entropy_bits()
}

/// Leak of every single qubit, in register order.
pub fn single_qubit_leaks(channel: &QuantumChannel, tau: &PureState) -> Result<Vec<f64>> {
    channel
        .register()
        .labels()
        .iter()
        .map(|&l| leak(channel, &[l], tau))
        .collect()
}

/// Pairwise leak correlation
/// `EL_E(a, b; tau) = L(a) + L(b) - L({a, b})`, the mutual information of
/// the noisy output restricted to the pair.
pub fn pair_leak_correlation(
    channel: &QuantumChannel,
    a: QubitLabel,
    b: QubitLabel,
    tau: &PureState,
) -> Result<f64> {
    if a == b {
        return Err(Error::Domain("leak correlation needs two distinct qubits".into()));
    }
    require_product(tau)?;
    let out = channel.apply(&tau.to_density())?;
    ent_sets(&out, &[a], &[b])
}

/// Environment-side leak: dilate the channel, feed the maximally mixed
/// state on `subset` (and `|0>` elsewhere), and return the mutual
/// information between `subset` and the environment register.
pub fn environment_leak(channel: &QuantumChannel, subset: &[QubitLabel]) -> Result<f64> {
    let reg = channel.register();
    let positions = reg.positions(subset)?;
    let n = reg.len();

    // psi_0: maximally mixed on the subset, |0> on the complement
    let mut rho_sys = DensityOperator::maximally_mixed(QubitRegister::new(1));
    let first_in = positions.contains(&0);
    rho_sys = if first_in {
        rho_sys
    } else {
        PureState::zeros(1).to_density()
    };
    for p in 1..n {
        let reg_p = QubitRegister::from_labels(vec![reg.labels()[p]])?;
        let factor = if positions.contains(&p) {
            DensityOperator::maximally_mixed(reg_p)
        } else {
            PureState::basis(reg_p, &[0])?.to_density()
        };
        rho_sys = rho_sys.tensor(&factor)?;
    }
    // relabel position 0 to the true register
    let rho_sys = DensityOperator::new(reg.clone(), rho_sys.matrix().clone())?;

    let (v, env_qubits) = channel.stinespring_dilation();
    let max_label = reg.labels().iter().map(|l| l.0).max().unwrap_or(0);
    let env_labels: Vec<QubitLabel> = (1..=env_qubits as u32)
        .map(|k| QubitLabel(max_label + k))
        .collect();
    let env_reg = QubitRegister::from_labels(env_labels.clone())?;
    let joint_reg = reg.join(&env_reg)?;

    let global = &v * rho_sys.matrix() * v.adjoint();
    let global = DensityOperator::new(joint_reg, global)?;

    let s_a = global.partial_trace(subset)?.entropy_bits()?;
    let s_n = global.partial_trace(&env_labels)?.entropy_bits()?;
    let mut both = subset.to_vec();
    both.extend_from_slice(&env_labels);
    let s_an = global.partial_trace(&both)?.entropy_bits()?;
    Ok(s_a + s_n - s_an)
}

/// Entanglement functional between two disjoint qubit sets:
/// `ENT(rho; A, B) = S(rho|_A) + S(rho|_B) - S(rho|_{A u B})`.
/// Qudits are handled as sets of qubits, so the pair version extends
/// unchanged.
pub fn ent_sets(rho: &DensityOperator, a: &[QubitLabel], b: &[QubitLabel]) -> Result<f64> {
    if a.iter().any(|l| b.contains(l)) {
        return Err(Error::Domain("entanglement sets must be disjoint".into()));
    }
    let s_a = rho.partial_trace(a)?.entropy_bits()?;
    let s_b = rho.partial_trace(b)?.entropy_bits()?;
    let mut ab = a.to_vec();
    ab.extend_from_slice(b);
    let s_ab = rho.partial_trace(&ab)?.entropy_bits()?;
    Ok(s_a + s_b - s_ab)
}

/// Pairwise entanglement `ENT(rho; a, b)`.
pub fn ent_pair(rho: &DensityOperator, a: QubitLabel, b: QubitLabel) -> Result<f64> {
    ent_sets(rho, &[a], &[b])
}

/// Below this entanglement a conjecture cell is vacuous: the compared
/// relation constrains nothing for unentangled pairs.
pub const VACUITY_ENT_TOL: f64 = 1e-6;
/// Leak correlations below this count as null for verdict purposes.
pub const NULL_EL_TOL: f64 = 1e-9;

/// Verdict of one leak-correlation-versus-entanglement cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellVerdict {
    /// Entanglement below threshold; the relation says nothing here.
    Vacuous,
    /// Entangled pair but (numerically) zero leak correlation: this channel
    /// family cannot support a positive proportionality constant.
    NullLeakCorrelation,
    /// Positive leak correlation recorded alongside the entanglement.
    PositiveLeakCorrelation,
}

/// One evaluation cell comparing the leak correlation of a pair against
/// the pair's entanglement in the intended state.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureACell {
    pub leak_a: f64,
    pub leak_b: f64,
    pub leak_correlation: f64,
    pub ent: f64,
    pub emergent_ent: f64,
    /// `EL / ENT` when the cell is not vacuous.
    pub ratio_plain: Option<f64>,
    /// `EL / (ENT * min(L_a, L_b)^2)` when defined.
    pub ratio_scaled: Option<f64>,
    pub verdict: CellVerdict,
}

/// Evaluate one cell: leaks and their correlation on `tau`, entanglement
/// and its assisted variant on the intended state `rho`.
pub fn conjecture_a_evaluate(
    channel: &QuantumChannel,
    rho: &DensityOperator,
    tau: &PureState,
    a: QubitLabel,
    b: QubitLabel,
    ee_budget: usize,
    seed: u64,
) -> Result<ConjectureACell> {
    let leak_a = leak(channel, &[a], tau)?;
    let leak_b = leak(channel, &[b], tau)?;
    let el = pair_leak_correlation(channel, a, b, tau)?;
    let ent = ent_pair(rho, a, b)?;
    let pair = rho.partial_trace(&[a, b])?;
    let ee = crate::ee::emergent_entanglement(&pair, (2, 2), ee_budget, seed)?.value;

    let vacuous = ent < VACUITY_ENT_TOL;
    let min_leak = leak_a.min(leak_b);
    let ratio_plain = if vacuous { None } else { Some(el / ent) };
    let ratio_scaled = if vacuous || min_leak * min_leak < 1e-30 {
        None
    } else {
        Some(el / (ent * min_leak * min_leak))
    };
    let verdict = if vacuous {
        CellVerdict::Vacuous
    } else if el.abs() < NULL_EL_TOL {
        CellVerdict::NullLeakCorrelation
    } else {
        CellVerdict::PositiveLeakCorrelation
    };
    Ok(ConjectureACell {
        leak_a,
        leak_b,
        leak_correlation: el,
        ent,
        emergent_ent: ee,
        ratio_plain,
        ratio_scaled,
        verdict,
    })
}

/// Marginal purity guard used by [`leak`]; exposed for tests.
pub fn is_product_within(tau: &PureState, tol: f64) -> bool {
    let rho = tau.to_density();
    tau.register().labels().iter().all(|&l| {
        let m = rho.partial_trace(&[l]).expect("own label");
        1.0 - m.purity() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::ErrorMaskDistribution;
    use crate::state::{binary_entropy_bits, PURITY_TOL};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use num_complex::Complex64;

    #[test]
    fn identity_channel_leaks_nothing() {
        let reg = QubitRegister::new(2);
        let e = QuantumChannel::identity(reg.clone());
        let tau = crate::rng::random_product_state(&reg, 1);
        for l in reg.labels() {
            assert_abs_diff_eq!(leak(&e, &[*l], &tau).unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn collapse_leaks_one_full_bit() {
        let reg = QubitRegister::new(1);
        let w = QuantumChannel::collapse(reg.clone(), QubitLabel(0)).unwrap();
        let tau = PureState::zeros(1);
        assert_abs_diff_eq!(
            leak(&w, &[QubitLabel(0)], &tau).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    /// The noisy marginal is diag(0.9, 0.1); the scalar oracle gives
    /// H2(0.1).
    #[test]
    fn depolarizing_leak_matches_binary_entropy() {
        let reg = QubitRegister::new(2);
        let e = QuantumChannel::iid_depolarizing(reg.clone(), 0.2).unwrap();
        let tau = PureState::zeros(2);
        let oracle = binary_entropy_bits(0.1);
        assert_abs_diff_eq!(oracle, 0.46899559358928117, epsilon = 1e-12);
        assert_abs_diff_eq!(
            leak(&e, &[QubitLabel(0)], &tau).unwrap(),
            oracle,
            epsilon = 1e-9
        );
    }

    #[test]
    fn leak_rejects_entangled_tau() {
        let reg = QubitRegister::new(2);
        let e = QuantumChannel::identity(reg);
        let bell = PureState::bell();
        assert!(matches!(
            leak(&e, &[QubitLabel(0)], &bell),
            Err(Error::Precondition(_))
        ));
        assert!(!is_product_within(&bell, PURITY_TOL));
    }

    #[test]
    fn product_channel_has_zero_pair_leak_correlation() {
        let reg_a = QubitRegister::new(1);
        let reg_b = QubitRegister::from_labels(vec![QubitLabel(1)]).unwrap();
        let ea = QuantumChannel::depolarizing_qubit(reg_a, QubitLabel(0), 0.3).unwrap();
        let eb = QuantumChannel::collapse(reg_b, QubitLabel(1)).unwrap();
        let e = ea.tensor(&eb).unwrap();
        let tau = crate::rng::random_product_state(e.register(), 4);
        let el = pair_leak_correlation(&e, QubitLabel(0), QubitLabel(1), &tau).unwrap();
        assert_abs_diff_eq!(el, 0.0, epsilon = 1e-9);
    }

    /// Exact 2-qubit oracle: synchronized masks leak correlated information.
    #[test]
    fn synchronized_masks_produce_positive_leak_correlation() {
        let reg = QubitRegister::new(2);
        let dist = ErrorMaskDistribution::all_or_nothing(2, 0.1).unwrap();
        let e = QuantumChannel::simple_error(reg, &dist).unwrap();
        let tau = PureState::zeros(2);
        let el = pair_leak_correlation(&e, QubitLabel(0), QubitLabel(1), &tau).unwrap();
        assert!(el > 0.05, "EL = {el}");
    }

    #[test]
    fn independent_masks_produce_zero_leak_correlation() {
        let reg = QubitRegister::new(2);
        let dist = ErrorMaskDistribution::product_bernoulli(&[0.15, 0.15]).unwrap();
        let e = QuantumChannel::simple_error(reg, &dist).unwrap();
        let tau = PureState::zeros(2);
        let el = pair_leak_correlation(&e, QubitLabel(0), QubitLabel(1), &tau).unwrap();
        assert_abs_diff_eq!(el, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn environment_leak_of_identity_is_zero() {
        let reg = QubitRegister::new(2);
        let e = QuantumChannel::identity(reg);
        let l = environment_leak(&e, &[QubitLabel(0)]).unwrap();
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-9);
    }

    /// Exact dilation oracle: collapsing one maximally mixed qubit hands
    /// two full bits of mutual information to the environment.
    #[test]
    fn environment_leak_of_collapse_is_two_bits() {
        let reg = QubitRegister::new(1);
        let w = QuantumChannel::collapse(reg, QubitLabel(0)).unwrap();
        let l = environment_leak(&w, &[QubitLabel(0)]).unwrap();
        assert_abs_diff_eq!(l, 2.0, epsilon = 1e-9);
    }

    /// Additivity over tensor products on disjoint subset parts.
    #[test]
    fn environment_leak_is_additive_over_products() {
        let reg_a = QubitRegister::new(1);
        let reg_b = QubitRegister::from_labels(vec![QubitLabel(1)]).unwrap();
        let wa = QuantumChannel::collapse(reg_a.clone(), QubitLabel(0)).unwrap();
        let db = QuantumChannel::depolarizing_qubit(reg_b.clone(), QubitLabel(1), 0.35).unwrap();
        let joint = wa.tensor(&db).unwrap();
        let la = environment_leak(&wa, &[QubitLabel(0)]).unwrap();
        let lb = environment_leak(&db, &[QubitLabel(1)]).unwrap();
        let ljoint = environment_leak(&joint, &[QubitLabel(0), QubitLabel(1)]).unwrap();
        assert_abs_diff_eq!(ljoint, la + lb, epsilon = 1e-9);
    }

    #[test]
    fn ent_values_for_canonical_states() {
        // product pure state
        let reg = QubitRegister::new(2);
        let tau = crate::rng::random_product_state(&reg, 2).to_density();
        assert_abs_diff_eq!(
            ent_pair(&tau, QubitLabel(0), QubitLabel(1)).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        // Bell pair
        let bell = PureState::bell().to_density();
        assert_abs_diff_eq!(
            ent_pair(&bell, QubitLabel(0), QubitLabel(1)).unwrap(),
            2.0,
            epsilon = 1e-9
        );
        // GHZ(3) pair marginal
        let ghz = PureState::ghz(3).to_density();
        let pair = ghz.partial_trace(&[QubitLabel(0), QubitLabel(1)]).unwrap();
        assert_abs_diff_eq!(
            ent_pair(&pair, QubitLabel(0), QubitLabel(1)).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    /// The pair functional extends to qudits (disjoint qubit sets) without
    /// change: GHZ(4) split into two 2-qubit "qudits" has ENT = 2.
    #[test]
    fn ent_sets_handles_qudit_pairs() {
        let ghz = PureState::ghz(4).to_density();
        let v = ent_sets(
            &ghz,
            &[QubitLabel(0), QubitLabel(1)],
            &[QubitLabel(2), QubitLabel(3)],
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn conjecture_cell_verdicts() {
        let reg = QubitRegister::new(2);
        let bell = PureState::bell().to_density();
        let tau = PureState::zeros(2);

        // independent depolarizing on an entangled pair: EL = 0, ENT = 2
        let iid = QuantumChannel::iid_depolarizing(reg.clone(), 0.2).unwrap();
        let cell =
            conjecture_a_evaluate(&iid, &bell, &tau, QubitLabel(0), QubitLabel(1), 400, 7).unwrap();
        assert_eq!(cell.verdict, CellVerdict::NullLeakCorrelation);
        assert_abs_diff_eq!(cell.ent, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(cell.ratio_plain.unwrap(), 0.0, epsilon = 1e-9);

        // synchronized collapse: EL > 0, scaled ratio recorded
        let dist = ErrorMaskDistribution::all_or_nothing(2, 0.1).unwrap();
        let sync = QuantumChannel::simple_error(reg.clone(), &dist).unwrap();
        let cell =
            conjecture_a_evaluate(&sync, &bell, &tau, QubitLabel(0), QubitLabel(1), 400, 7)
                .unwrap();
        assert_eq!(cell.verdict, CellVerdict::PositiveLeakCorrelation);
        assert!(cell.ratio_scaled.unwrap() > 0.0);

        // identity channel: zero leaks; cell is not vacuous (Bell has ENT=2)
        // but records null correlation
        let id = QuantumChannel::identity(reg.clone());
        let cell =
            conjecture_a_evaluate(&id, &bell, &tau, QubitLabel(0), QubitLabel(1), 400, 7).unwrap();
        assert_abs_diff_eq!(cell.leak_a, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(cell.leak_b, 0.0, epsilon = 1e-10);
        assert!(cell.ratio_scaled.is_none());

        // product intended state: vacuous
        let prod = crate::rng::random_product_state(&reg, 3).to_density();
        let cell =
            conjecture_a_evaluate(&iid, &prod, &tau, QubitLabel(0), QubitLabel(1), 400, 7).unwrap();
        assert_eq!(cell.verdict, CellVerdict::Vacuous);
    }

    #[test]
    fn pair_leak_requires_distinct_qubits() {
        let reg = QubitRegister::new(2);
        let e = QuantumChannel::identity(reg);
        let tau = PureState::zeros(2);
        assert!(pair_leak_correlation(&e, QubitLabel(0), QubitLabel(0), &tau).is_err());
    }

    #[test]
    fn leak_report_serializes() {
        let r = LeakReport {
            subset: vec![0, 1],
            leak_bits: 0.5,
        };
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("leak_bits"));
    }

    // keep DVector/Complex64 imports exercised in this test module
    #[test]
    fn plus_state_is_product() {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = PureState::new(QubitRegister::new(1), DVector::from_vec(vec![h, h])).unwrap();
        assert!(plus.is_product());
    }
}
