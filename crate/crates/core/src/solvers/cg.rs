use alloc::vec::Vec;

use super::{
    axpy_in_place, divide, dot, norm2_f64, prepare, saturated_count, true_residual_norm,
    xpby_in_place, zero_rhs_solution, BreakdownReason, IterationRecord, IterationTrace, Solution,
    SolverConfig, SolverError, StopReason,
};
use crate::laplacian::Grid;
use crate::scalar::Scalar;

/// Vectors and scalars of standard CG after an iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct CgState<S: Scalar> {
    pub iteration: usize,
    pub x: Grid<S>,
    pub r: Grid<S>,
    pub r_old: Grid<S>,
    pub p: Grid<S>,
    pub z: Grid<S>,
    pub alpha: S,
    pub beta: S,
}

pub fn cg_solve<S: Scalar>(b: &Grid<S>, cfg: &SolverConfig) -> Result<Solution<S>, SolverError> {
    cg_solve_observed(b, cfg, |_| {})
}

/// [`cg_solve`], calling `observe` with the state after every iteration.
pub fn cg_solve_observed<S: Scalar>(
    b: &Grid<S>,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&CgState<S>),
) -> Result<Solution<S>, SolverError> {
    let (op, norm_b) = prepare(b, cfg)?;
    if norm_b == 0.0 {
        return Ok(zero_rhs_solution(b));
    }
    let fmt = b.format();
    let zero = S::zero(fmt);
    let b64 = b.to_f64_grid();

    let mut st = CgState {
        iteration: 0,
        x: Grid::zeros(b.n(), fmt)?,
        r: b.clone(),
        r_old: b.clone(),
        p: b.clone(),
        z: Grid::zeros(b.n(), fmt)?,
        alpha: zero,
        beta: zero,
    };
    let mut rr_old = dot(&st.r_old, &st.r_old);
    let mut records = Vec::new();
    let mut saturations = 0;
    let mut stop = StopReason::MaxIterations;

    for k in 1..=cfg.max_iter {
        st.iteration = k;
        if rr_old.is_zero() {
            stop = StopReason::Stagnated;
            break;
        }
        st.z = op.apply(&st.p)?;
        let zp = dot(&st.z, &st.p);
        if S::FLOATING && !zp.is_positive() {
            return Err(SolverError::Breakdown {
                iteration: k,
                reason: BreakdownReason::NotPositive,
            });
        }
        st.alpha = divide(rr_old, zp, k, "alpha")?;
        axpy_in_place(&mut st.x, st.alpha, &st.p);
        st.r = st.r_old.clone();
        axpy_in_place(&mut st.r, -st.alpha, &st.z);
        let rr = dot(&st.r, &st.r);
        st.beta = divide(rr, rr_old, k, "beta")?;
        xpby_in_place(&mut st.p, &st.r, st.beta);

        saturations += saturated_count(&[&st.x, &st.r, &st.p, &st.z], &[zp, rr, st.alpha, st.beta]);
        let res2 = norm2_f64(st.r.data());
        let relres = res2 / norm_b;
        records.push(IterationRecord {
            iter: k,
            res2,
            relres,
            true_relres: true_residual_norm(&st.x.to_f64_grid(), &b64) / norm_b,
            alpha: st.alpha.to_f64(),
            beta: st.beta.to_f64(),
            gamma: rr.to_f64(),
            delta: zp.to_f64(),
        });
        observe(&st);
        core::mem::swap(&mut st.r_old, &mut st.r);
        rr_old = rr;
        if relres <= cfg.tol {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(Solution {
        x: st.x,
        trace: IterationTrace {
            records,
            converged: stop == StopReason::Converged,
            stop,
            saturations,
            norm_b,
        },
    })
}
