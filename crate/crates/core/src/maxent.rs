//! Maximum-entropy machinery: the censorship functional (entropy gap to
//! the max-entropy completion matching all proper-subset marginals), its
//! sum over subsets, and the restricted multi-set leak correlation for
//! simple mask channels.
//!
//! The completion is solved in the dual: `rho* = exp(H)/Z` with `H`
//! spanned by the constrained (non-full-support) Pauli terms, and the dual
//! potential `log Z - lambda . t` minimized by damped Newton steps using
//! the exact Kubo-Mori response matrix. Boundary targets (pure inputs,
//! GHZ-type parity constraints) converge linearly but fast enough to push
//! residuals to 1e-10 well inside the iteration cap.

use crate::error::{Error, Result};
use crate::mask::ErrorMaskDistribution;
use crate::pauli::PauliIndex;
use crate::register::QubitLabel;
use crate::state::{entropy_bits_from_eigenvalues, DensityOperator, PureState};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct MaxEntOptions {
    /// Convergence threshold on the max moment residual.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Cap on the register size of the completion problem.
    pub cap_qubits: usize,
}

impl Default for MaxEntOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iterations: 10_000,
            cap_qubits: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaxEntCompletion {
    /// The max-entropy state with the same proper-subset marginals.
    pub rho_star: DensityOperator,
    /// Censorship value `ENT(rho; A) = S(rho*) - S(rho)` in bits.
    pub censorship_bits: f64,
    /// Final max moment residual.
    pub residual: f64,
    pub iterations: usize,
}

fn hermitian_from_coefficients(
    paulis: &[DMatrix<Complex64>],
    lambda: &DVector<f64>,
    d: usize,
) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for (m, &c) in paulis.iter().zip(lambda.iter()) {
        if c != 0.0 {
            h += m * Complex64::new(c, 0.0);
        }
    }
    h
}

struct GibbsState {
    rho: DMatrix<Complex64>,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<Complex64>,
    /// Centered weights `exp(lambda_p - mu)` and their sum.
    weights: Vec<f64>,
    log_z_centered: f64,
    mu: f64,
}

fn gibbs_state(h: &DMatrix<Complex64>) -> GibbsState {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let eigvals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mu = eigvals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = eigvals.iter().map(|&l| (l - mu).exp()).collect();
    let z: f64 = weights.iter().sum();
    let d = h.nrows();
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for (p, &w) in weights.iter().enumerate() {
        let v = eig.eigenvectors.column(p);
        rho += (v * v.adjoint()) * Complex64::new(w / z, 0.0);
    }
    GibbsState {
        rho,
        eigvals,
        eigvecs: eig.eigenvectors,
        weights,
        log_z_centered: z.ln(),
        mu,
    }
}

/// Kubo-Mori response matrix `d m_i / d lambda_j` at the current state.
fn response_matrix(
    state: &GibbsState,
    paulis_tilde: &[DMatrix<Complex64>],
    moments: &[f64],
) -> DMatrix<f64> {
    let nc = paulis_tilde.len();
    let d = state.eigvals.len();
    let z: f64 = state.weights.iter().sum();
    // divided difference of exp at the centered eigenvalues, over Z
    let mut g = DMatrix::<f64>::zeros(d, d);
    for p in 0..d {
        for q in 0..d {
            let (a, b) = (state.eigvals[p] - state.mu, state.eigvals[q] - state.mu);
            g[(p, q)] = if (a - b).abs() < 1e-12 {
                a.exp() / z
            } else {
                (a.exp() - b.exp()) / (a - b) / z
            };
        }
    }
    let mut k = DMatrix::<f64>::zeros(nc, nc);
    for i in 0..nc {
        for j in i..nc {
            let (si, sj) = (&paulis_tilde[i], &paulis_tilde[j]);
            let mut acc = 0.0;
            for p in 0..d {
                for q in 0..d {
                    acc += (sj[(p, q)] * si[(q, p)]).re * g[(p, q)];
                }
            }
            let v = acc - moments[i] * moments[j];
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Maximize `S(rho*)` over states matching every proper-subset marginal of
/// `rho`, i.e. every Pauli moment of non-full support.
pub fn max_entropy_completion(
    rho: &DensityOperator,
    opts: &MaxEntOptions,
) -> Result<MaxEntCompletion> {
    let n = rho.register().len();
    if n > opts.cap_qubits {
        return Err(Error::CapExceeded {
            requested: n,
            cap: opts.cap_qubits,
        });
    }
    let d = rho.dim();
    let s_rho = rho.entropy_bits()?;

    // constrained moments: weight 1 .. n-1 (identity is normalization,
    // full-support moments are free)
    let mut indices = Vec::new();
    for code in 1..(1usize << (2 * n)) {
        let idx = PauliIndex::from_code(code, n);
        let w = idx.weight();
        if w >= 1 && w < n {
            indices.push(idx);
        }
    }
    if indices.is_empty() {
        // single qubit: nothing is constrained, the completion is I/2
        let star = DensityOperator::maximally_mixed(rho.register().clone());
        let s_star = star.entropy_bits()?;
        return Ok(MaxEntCompletion {
            rho_star: star,
            censorship_bits: s_star - s_rho,
            residual: 0.0,
            iterations: 0,
        });
    }

    let paulis: Vec<DMatrix<Complex64>> = indices.iter().map(|i| i.matrix()).collect();
    let targets: Vec<f64> = indices.iter().map(|i| i.trace_with(rho.matrix()).re).collect();
    let t = DVector::from_vec(targets.clone());
    let nc = indices.len();

    let dual = |state: &GibbsState, lambda: &DVector<f64>| -> f64 {
        state.log_z_centered + state.mu - lambda.dot(&t)
    };

    let mut lambda = DVector::<f64>::zeros(nc);
    let mut state = gibbs_state(&hermitian_from_coefficients(&paulis, &lambda, d));
    let mut phi = dual(&state, &lambda);
    let mut residual = f64::INFINITY;
    let mut iterations = 0usize;

    for iter in 0..opts.max_iterations {
        iterations = iter;
        let moments: Vec<f64> = indices.iter().map(|i| i.trace_with(&state.rho).re).collect();
        let grad = DVector::from_vec(
            moments
                .iter()
                .zip(targets.iter())
                .map(|(m, t)| m - t)
                .collect::<Vec<_>>(),
        );
        residual = grad.amax();
        if residual < opts.residual_tol {
            break;
        }

        // rotate constraint operators into the eigenbasis for the response
        let paulis_tilde: Vec<DMatrix<Complex64>> = paulis
            .iter()
            .map(|s| state.eigvecs.adjoint() * s * &state.eigvecs)
            .collect();
        let mut k = response_matrix(&state, &paulis_tilde, &moments);
        for i in 0..nc {
            k[(i, i)] += 1e-10;
        }
        let direction = k
            .lu()
            .solve(&grad)
            .unwrap_or_else(|| grad.clone());
        let slope = grad.dot(&direction).max(0.0);

        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-8 {
            let cand = &lambda - &direction * alpha;
            let cand_state = gibbs_state(&hermitian_from_coefficients(&paulis, &cand, d));
            let cand_phi = dual(&cand_state, &cand);
            if cand_phi <= phi - 1e-4 * alpha * slope {
                lambda = cand;
                state = cand_state;
                phi = cand_phi;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // damped fixed-point fallback
            lambda -= grad * 0.5;
            state = gibbs_state(&hermitian_from_coefficients(&paulis, &lambda, d));
            phi = dual(&state, &lambda);
        }
    }

    if residual >= opts.residual_tol.max(1e-6) {
        return Err(Error::MaxEntNonConvergence {
            residual,
            iterations,
        });
    }

    let probs: Vec<f64> = {
        let z: f64 = state.weights.iter().sum();
        state.weights.iter().map(|&w| w / z).collect()
    };
    let s_star = entropy_bits_from_eigenvalues(&probs);
    let rho_star = DensityOperator::new(rho.register().clone(), state.rho.clone())?;
    Ok(MaxEntCompletion {
        rho_star,
        censorship_bits: s_star - s_rho,
        residual,
        iterations,
    })
}

/// Sum of censorship values over all subsets with at least two qubits;
/// singletons contribute zero by convention.
pub fn tilde_ent(rho: &DensityOperator, opts: &MaxEntOptions) -> Result<f64> {
    let n = rho.register().len();
    if n > 4 {
        return Err(Error::CapExceeded {
            requested: n,
            cap: 4,
        });
    }
    let labels = rho.register().labels().to_vec();
    let mut total = 0.0;
    for subset_bits in 1usize..(1 << n) {
        if subset_bits.count_ones() < 2 {
            continue;
        }
        let subset: Vec<QubitLabel> = labels
            .iter()
            .enumerate()
            .filter(|(p, _)| (subset_bits >> p) & 1 == 1)
            .map(|(_, &l)| l)
            .collect();
        let reduced = rho.partial_trace(&subset)?;
        total += max_entropy_completion(&reduced, opts)?.censorship_bits;
    }
    Ok(total)
}

/// Result of the restricted multi-set leak maximization.
#[derive(Debug, Clone)]
pub struct MultiLeakCorrelation {
    /// `EL(A) = max L_{E*}(A) - L_E(A)` over the marginal-matching family.
    pub value: f64,
    /// Leak of the given channel itself.
    pub base_leak: f64,
    /// Coefficient of the parity direction at the maximizer.
    pub theta_star: f64,
}

/// Multi-set leak correlation for a simple channel `E_D`, maximizing the
/// leak over simple channels whose mask tables match `D`'s marginals on
/// every proper subset of `A`. The matching family is the one-parameter
/// parity fiber through `D|_A`, and the leak is concave along it, so a
/// golden-section search is exact to solver precision.
pub fn multi_leak_correlation(
    dist: &ErrorMaskDistribution,
    subset: &[QubitLabel],
    tau: &PureState,
) -> Result<MultiLeakCorrelation> {
    if subset.len() > 4 {
        return Err(Error::CapExceeded {
            requested: subset.len(),
            cap: 4,
        });
    }
    if subset.is_empty() {
        return Err(Error::Domain("leak over empty subset".into()));
    }
    if !tau.is_product() {
        return Err(Error::Precondition(
            "leak is defined against tensor-product pure states".into(),
        ));
    }
    let reg = tau.register();
    if dist.n() != reg.len() {
        return Err(Error::RegisterMismatch {
            expected: reg.len(),
            got: dist.n(),
        });
    }
    let positions = reg.positions(subset)?;
    let k = positions.len();
    let marginal = dist.marginal(&positions)?;
    let tau_a = tau.to_density().partial_trace(subset)?;

    // collapse images of the reduced input, one per sub-mask
    let da = tau_a.dim();
    let components: Vec<DMatrix<Complex64>> = (0..(1usize << k))
        .map(|mask| {
            let mut cur = tau_a.matrix().clone();
            for (b, _) in positions.iter().enumerate() {
                if (mask >> b) & 1 == 1 {
                    cur = crate::circuit::collapse_position(&cur, b);
                }
            }
            cur
        })
        .collect();

    let parity = |mask: usize| -> f64 {
        if (k as u32 - mask.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };

    // feasibility interval for q = D|_A + theta * parity
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for mask in 0..(1usize << k) {
        let q = marginal.prob(mask);
        if parity(mask) > 0.0 {
            lo = lo.max(-q);
        } else {
            hi = hi.min(q);
        }
    }
    debug_assert!(lo <= 1e-15 && hi >= -1e-15);

    let entropy_at = |theta: f64| -> f64 {
        let mut m = DMatrix::<Complex64>::zeros(da, da);
        for (mask, comp) in components.iter().enumerate() {
            let w = marginal.prob(mask) + theta * parity(mask);
            m += comp * Complex64::new(w, 0.0);
        }
        let eig = SymmetricEigen::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0));
        let probs: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        entropy_bits_from_eigenvalues(&probs)
    };

    let base = entropy_at(0.0);

    // golden-section maximization of a concave function
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - gr * (b - a);
    let mut dpt = a + gr * (b - a);
    let (mut fc, mut fd) = (entropy_at(c), entropy_at(dpt));
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if fc >= fd {
            b = dpt;
            dpt = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = entropy_at(c);
        } else {
            a = c;
            c = dpt;
            fc = fd;
            dpt = a + gr * (b - a);
            fd = entropy_at(dpt);
        }
    }
    let mut best_theta = 0.5 * (a + b);
    let mut best = entropy_at(best_theta);
    for (th, f) in [(lo, entropy_at(lo)), (hi, entropy_at(hi)), (0.0, base)] {
        if f > best {
            best = f;
            best_theta = th;
        }
    }

    Ok(MultiLeakCorrelation {
        value: best - base,
        base_leak: base,
        theta_star: best_theta,
    })
}

/// Evidence record for the multi-qubit leak/censorship relation; cells are
/// data for the experimenter, not assertions.
#[derive(Debug, Clone)]
pub struct MultiSetCell {
    pub leak_correlation: f64,
    pub censorship_bits: f64,
    /// Assisted-entanglement variant, available for pairs.
    pub emergent_ent: Option<f64>,
    pub min_single_leak: f64,
    /// `EL(A) / censorship` where the censorship is non-vacuous.
    pub ratio: Option<f64>,
}

/// Evaluate one multi-qubit cell for a simple channel: the restricted leak
/// correlation `EL(A)`, the censorship value of the intended state on `A`,
/// and the per-qubit leak floor.
pub fn relation_multiset_evaluate(
    dist: &ErrorMaskDistribution,
    rho: &DensityOperator,
    subset: &[QubitLabel],
    tau: &PureState,
    maxent_opts: &MaxEntOptions,
    ee_budget: usize,
    seed: u64,
) -> Result<MultiSetCell> {
    let el = multi_leak_correlation(dist, subset, tau)?;
    let reduced = rho.partial_trace(subset)?;
    let censorship = max_entropy_completion(&reduced, maxent_opts)?.censorship_bits;
    let channel =
        crate::channel::QuantumChannel::simple_error(tau.register().clone(), dist)?;
    let mut min_leak = f64::INFINITY;
    for &l in subset {
        min_leak = min_leak.min(crate::leak::leak(&channel, &[l], tau)?);
    }
    let ee = if subset.len() == 2 {
        Some(crate::ee::emergent_entanglement(&reduced, (2, 2), ee_budget, seed)?.value)
    } else {
        None
    };
    let ratio = if censorship > crate::leak::VACUITY_ENT_TOL {
        Some(el.value / censorship)
    } else {
        None
    };
    Ok(MultiSetCell {
        leak_correlation: el.value,
        censorship_bits: censorship,
        emergent_ent: ee,
        min_single_leak: min_leak,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::QubitRegister;
    use approx::assert_abs_diff_eq;

    #[test]
    fn completion_of_product_pure_state_is_tight() {
        let reg = QubitRegister::new(2);
        let tau = crate::rng::random_product_state(&reg, 1).to_density();
        let out = max_entropy_completion(&tau, &MaxEntOptions::default()).unwrap();
        assert!(out.censorship_bits.abs() < 1e-6, "{}", out.censorship_bits);
        assert!(out.residual < 1e-10);
    }

    /// Single-qubit marginals of a Bell pair constrain nothing else; the
    /// completion is the maximally mixed state and the censorship is 2.
    #[test]
    fn completion_of_bell_pair() {
        let bell = PureState::bell().to_density();
        let out = max_entropy_completion(&bell, &MaxEntOptions::default()).unwrap();
        assert_abs_diff_eq!(out.censorship_bits, 2.0, epsilon = 1e-5);
        let mixed = DensityOperator::maximally_mixed(QubitRegister::new(2));
        assert!((out.rho_star.matrix() - mixed.matrix()).camax() < 1e-6);
    }

    /// Brute-force-style oracle at dimension 8: GHZ(3) pairwise marginals
    /// admit the even classical mixture of |000> and |111>, entropy 1,
    /// while GHZ itself is pure.
    #[test]
    fn completion_of_ghz3() {
        let ghz = PureState::ghz(3).to_density();
        let out = max_entropy_completion(&ghz, &MaxEntOptions::default()).unwrap();
        assert_abs_diff_eq!(out.censorship_bits, 1.0, epsilon = 1e-4);
        // rho* concentrates on the two GHZ bit strings
        let m = out.rho_star.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(m[(7, 7)].re, 0.5, epsilon = 1e-4);
        assert!(m[(0, 7)].norm() < 1e-4);
    }

    #[test]
    fn completion_feasibility_on_random_mixed_states() {
        let reg = QubitRegister::new(2);
        let mut rng = crate::rng::rng_from(2);
        for _ in 0..5 {
            let rho = crate::rng::random_density_with(&reg, 4, &mut rng).unwrap();
            let out = max_entropy_completion(&rho, &MaxEntOptions::default()).unwrap();
            // every proper-subset marginal matches entrywise
            for l in reg.labels() {
                let a = rho.partial_trace(&[*l]).unwrap();
                let b = out.rho_star.partial_trace(&[*l]).unwrap();
                assert!((a.matrix() - b.matrix()).camax() < 1e-6);
            }
            // rho itself is feasible, so S(rho*) >= S(rho)
            assert!(out.censorship_bits >= -1e-9);
        }
    }

    #[test]
    fn tilde_ent_of_product_pure_states_vanishes() {
        for n in 2..=4 {
            let reg = QubitRegister::new(n);
            let tau = crate::rng::random_product_state(&reg, 7 + n as u64).to_density();
            let v = tilde_ent(&tau, &MaxEntOptions::default()).unwrap();
            assert!(v.abs() < 1e-6, "n = {n}: tilde ENT = {v}");
        }
    }

    #[test]
    fn tilde_ent_of_bell_pair_is_two() {
        let bell = PureState::bell().to_density();
        let v = tilde_ent(&bell, &MaxEntOptions::default()).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn tilde_ent_cap() {
        let rho = DensityOperator::maximally_mixed(QubitRegister::new(5));
        assert!(matches!(
            tilde_ent(&rho, &MaxEntOptions::default()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn multi_leak_of_product_table_is_zero() {
        let reg = QubitRegister::new(2);
        let dist = ErrorMaskDistribution::product_bernoulli(&[0.2, 0.3]).unwrap();
        let tau = PureState::zeros(2);
        let out = multi_leak_correlation(
            &dist,
            &[QubitLabel(0), QubitLabel(1)],
            &tau,
        )
        .unwrap();
        assert!(out.value.abs() < 1e-9, "EL = {}", out.value);
        assert_eq!(reg.len(), 2);
    }

    /// Exhaustive 2-qubit check: the synchronized pair has strictly
    /// positive restricted leak correlation.
    #[test]
    fn multi_leak_of_synchronized_pair_is_positive() {
        let dist = ErrorMaskDistribution::all_or_nothing(2, 0.1).unwrap();
        let tau = PureState::zeros(2);
        let out = multi_leak_correlation(&dist, &[QubitLabel(0), QubitLabel(1)], &tau).unwrap();
        assert!(out.value > 1e-3, "EL = {}", out.value);
    }

    /// Cross-check oracle: for pairs the restricted maximization equals the
    /// pairwise leak correlation, because the product table lies in the
    /// marginal-matching family and saturates subadditivity.
    #[test]
    fn multi_leak_matches_pair_version_for_pairs() {
        let tau = PureState::zeros(2);
        for (name, dist) in [
            (
                "synchronized",
                ErrorMaskDistribution::all_or_nothing(2, 0.15).unwrap(),
            ),
            (
                "gibbs",
                ErrorMaskDistribution::gibbs(2, &[(0, 1, 1.2)], &[-1.0, -0.7]).unwrap(),
            ),
        ] {
            let out =
                multi_leak_correlation(&dist, &[QubitLabel(0), QubitLabel(1)], &tau).unwrap();
            let channel =
                crate::channel::QuantumChannel::simple_error(QubitRegister::new(2), &dist)
                    .unwrap();
            let pair = crate::leak::pair_leak_correlation(
                &channel,
                QubitLabel(0),
                QubitLabel(1),
                &tau,
            )
            .unwrap();
            assert_abs_diff_eq!(out.value, pair, epsilon = 1e-9);
            let _ = name;
        }
    }

    #[test]
    fn multiset_cell_records_evidence() {
        let dist = ErrorMaskDistribution::all_or_nothing(3, 0.1).unwrap();
        let ghz = PureState::ghz(3).to_density();
        let tau = PureState::zeros(3);
        let labels = [QubitLabel(0), QubitLabel(1), QubitLabel(2)];
        let cell = relation_multiset_evaluate(
            &dist,
            &ghz,
            &labels,
            &tau,
            &MaxEntOptions::default(),
            200,
            3,
        )
        .unwrap();
        assert!(cell.leak_correlation > 0.0);
        assert_abs_diff_eq!(cell.censorship_bits, 1.0, epsilon = 1e-4);
        assert!(cell.min_single_leak > 0.0);
        assert!(cell.ratio.is_some());
        assert!(cell.emergent_ent.is_none());
    }
}
