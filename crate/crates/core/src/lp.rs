//! Exact solver for tiny linear programs (at most four constraint rows)
//! by exhaustive basic-solution enumeration. Every vertex of the feasible
//! polytope is a basic solution supported on at most `m` columns, so for
//! the lemma-scale problems here (hundreds of variables, three rows) the
//! global optimum is found by checking every nonsingular basis. The
//! enumeration is deterministic and embarrassingly parallel.

use crate::error::{Error, Result};
use crate::par::par_map;
use nalgebra::DMatrix;

/// Minimize `c . x` subject to `eq` equalities, `ge` lower bounds, `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ge: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

const FEAS_TOL: f64 = 1e-9;

/// Solve by basis enumeration. Requires the constraint rows (with surplus
/// columns appended for `ge` rows) to have full row rank, which holds for
/// the moment-constrained problems this crate builds.
pub fn solve_min(lp: &LinearProgram) -> Result<LpSolution> {
    let nv = lp.objective.len();
    let m = lp.eq.len() + lp.ge.len();
    if m == 0 || m > 4 {
        return Err(Error::Domain(format!(
            "basis enumeration supports 1..=4 constraint rows, got {m}"
        )));
    }
    for (row, _) in lp.eq.iter().chain(lp.ge.iter()) {
        if row.len() != nv {
            return Err(Error::Domain("constraint row length mismatch".into()));
        }
    }
    // standard form with surplus columns for >= rows
    let ncols = nv + lp.ge.len();
    let mut a = vec![vec![0.0; ncols]; m];
    let mut b = vec![0.0; m];
    let mut c = lp.objective.clone();
    c.resize(ncols, 0.0);
    for (r, (row, rhs)) in lp.eq.iter().enumerate() {
        a[r][..nv].copy_from_slice(row);
        b[r] = *rhs;
    }
    for (g, (row, rhs)) in lp.ge.iter().enumerate() {
        let r = lp.eq.len() + g;
        a[r][..nv].copy_from_slice(row);
        a[r][nv + g] = -1.0;
        b[r] = *rhs;
    }

    let b_vec = nalgebra::DVector::from_vec(b.clone());
    let scale: f64 = b
        .iter()
        .map(|v| v.abs())
        .fold(1.0, f64::max);

    // one task per leading basis column; inner combinations sequential
    let leads: Vec<usize> = (0..ncols).collect();
    let best_per_lead = par_map(&leads, |&first| {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        let mut idx = vec![0usize; m];
        idx[0] = first;
        // iterate combinations first < i1 < ... < i_{m-1}
        fn visit(
            idx: &mut Vec<usize>,
            depth: usize,
            ncols: usize,
            ctx: &mut dyn FnMut(&[usize]),
        ) {
            let m = idx.len();
            if depth == m {
                ctx(idx);
                return;
            }
            let start = idx[depth - 1] + 1;
            for i in start..ncols {
                idx[depth] = i;
                visit(idx, depth + 1, ncols, ctx);
            }
        }
        let mut check = |basis: &[usize]| {
            let ab = DMatrix::from_fn(m, m, |r, ci| a[r][basis[ci]]);
            let lu = ab.lu();
            let Some(xb) = lu.solve(&b_vec) else {
                return;
            };
            // reject near-singular bases whose solve is unreliable
            let residual = DMatrix::from_fn(m, m, |r, ci| a[r][basis[ci]]) * &xb - &b_vec;
            if residual.amax() > 1e-7 * scale {
                return;
            }
            if xb.iter().any(|&v| v < -FEAS_TOL) {
                return;
            }
            let obj: f64 = basis.iter().zip(xb.iter()).map(|(&col, &v)| c[col] * v).sum();
            let better = match &best {
                None => true,
                Some((cur, _, _)) => obj < cur - 1e-12,
            };
            if better {
                best = Some((obj, basis.to_vec(), xb.iter().copied().collect()));
            }
        };
        if m == 1 {
            check(&[first]);
        } else {
            visit(&mut idx, 1, ncols, &mut check);
        }
        best
    });

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for cand in best_per_lead.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((cur, _, _)) => cand.0 < cur - 1e-12,
        };
        if better {
            best = Some(cand);
        }
    }
    let Some((objective, basis, xb)) = best else {
        return Err(Error::LpInfeasible(
            "no feasible basic solution".into(),
        ));
    };
    let mut x = vec![0.0; nv];
    for (&col, &v) in basis.iter().zip(xb.iter()) {
        if col < nv {
            x[col] = v.max(0.0);
        }
    }
    Ok(LpSolution { objective, x })
}
