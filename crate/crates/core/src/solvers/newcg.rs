use alloc::vec::Vec;

use super::{
    axpy_in_place, divide, dot, norm2_f64, prepare, saturated_count, true_residual_norm,
    xpby_in_place, zero_rhs_solution, BreakdownReason, IterationRecord, IterationTrace, Solution,
    SolverConfig, SolverError, StopReason,
};
use crate::laplacian::Grid;
use crate::scalar::Scalar;

/// Vectors and scalars of pipelined CG after an iteration. `u` holds `A w`.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelinedCgState<S: Scalar> {
    pub iteration: usize,
    pub x: Grid<S>,
    pub r: Grid<S>,
    pub w: Grid<S>,
    pub u: Grid<S>,
    pub z: Grid<S>,
    pub q: Grid<S>,
    pub p: Grid<S>,
    pub alpha: S,
    pub beta: S,
    pub gamma_new: S,
    pub gamma_old: S,
    pub delta: S,
}

pub fn newcg_solve<S: Scalar>(b: &Grid<S>, cfg: &SolverConfig) -> Result<Solution<S>, SolverError> {
    newcg_solve_observed(b, cfg, |_| {})
}

/// Pipelined CG: the two inner products and `A w` of an iteration depend
/// only on the previous iteration's vectors, so they can run concurrently.
///
/// The start-up phase (first residual, `w = A r`, first step) counts as
/// iteration 1. Updates use `r -= alpha q`, `w -= alpha z` and
/// `alpha = 1 / (delta / gamma - beta / alpha_prev)`, which keep
/// `r = b - A x` and `w = A r` in exact arithmetic.
pub fn newcg_solve_observed<S: Scalar>(
    b: &Grid<S>,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&PipelinedCgState<S>),
) -> Result<Solution<S>, SolverError> {
    let (op, norm_b) = prepare(b, cfg)?;
    if norm_b == 0.0 {
        return Ok(zero_rhs_solution(b));
    }
    let fmt = b.format();
    let zero = S::zero(fmt);
    let b64 = b.to_f64_grid();

    // Start-up.
    let x = Grid::zeros(b.n(), fmt)?;
    let mut r = b.clone();
    let ax = op.apply(&x)?;
    axpy_in_place(&mut r, S::from_f64(-1.0, fmt), &ax);
    let w = op.apply(&r)?;
    let gamma = dot(&r, &r);
    let delta = dot(&w, &r);
    let u = op.apply(&w)?;
    let mut st = PipelinedCgState {
        iteration: 1,
        z: u.clone(),
        q: w.clone(),
        p: r.clone(),
        x,
        r,
        w,
        u,
        alpha: zero,
        beta: zero,
        gamma_new: gamma,
        gamma_old: zero,
        delta,
    };

    let mut records = Vec::new();
    let mut saturations = 0;
    let mut stop = StopReason::MaxIterations;

    for k in 1..=cfg.max_iter {
        st.iteration = k;
        if k == 1 {
            if S::FLOATING && !st.delta.is_positive() {
                return Err(SolverError::Breakdown {
                    iteration: k,
                    reason: BreakdownReason::NotPositive,
                });
            }
            st.alpha = divide(st.gamma_new, st.delta, k, "alpha")?;
        } else {
            st.gamma_old = st.gamma_new;
            st.gamma_new = dot(&st.r, &st.r);
            if st.gamma_new.is_zero() {
                stop = StopReason::Stagnated;
                break;
            }
            st.delta = dot(&st.w, &st.r);
            st.u = op.apply(&st.w)?;
            st.beta = divide(st.gamma_new, st.gamma_old, k, "beta")?;
            let d_over_g = divide(st.delta, st.gamma_new, k, "alpha")?;
            let b_over_a = divide(st.beta, st.alpha, k, "alpha")?;
            let denom = d_over_g - b_over_a;
            if S::FLOATING && !denom.is_positive() {
                return Err(SolverError::Breakdown {
                    iteration: k,
                    reason: BreakdownReason::NotPositive,
                });
            }
            st.alpha = divide(S::from_f64(1.0, fmt), denom, k, "alpha")?;
            xpby_in_place(&mut st.z, &st.u, st.beta);
            xpby_in_place(&mut st.q, &st.w, st.beta);
            xpby_in_place(&mut st.p, &st.r, st.beta);
        }
        axpy_in_place(&mut st.x, st.alpha, &st.p);
        axpy_in_place(&mut st.r, -st.alpha, &st.q);
        axpy_in_place(&mut st.w, -st.alpha, &st.z);

        saturations += saturated_count(
            &[&st.x, &st.r, &st.w, &st.u, &st.z, &st.q, &st.p],
            &[st.alpha, st.beta, st.gamma_new, st.delta],
        );
        let res2 = norm2_f64(st.r.data());
        let relres = res2 / norm_b;
        records.push(IterationRecord {
            iter: k,
            res2,
            relres,
            true_relres: true_residual_norm(&st.x.to_f64_grid(), &b64) / norm_b,
            alpha: st.alpha.to_f64(),
            beta: st.beta.to_f64(),
            gamma: st.gamma_new.to_f64(),
            delta: st.delta.to_f64(),
        });
        observe(&st);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::{apply_stencil_reference, Stencil3x3};
    use crate::solvers::cg_solve;

    #[test]
    fn one_by_one() {
        let b = Grid::from_vec(1, alloc::vec![1.0], ()).unwrap();
        let sol = newcg_solve(&b, &SolverConfig::default()).unwrap();
        assert_eq!(sol.x.data(), &[0.25]);
        assert_eq!(sol.trace.iterations(), 1);
    }

    fn rhs(n: usize) -> Grid<f64> {
        Grid::from_fn(n, (), |i, j| ((i * 31 + j * 17) % 13) as f64 / 6.0 - 1.0).unwrap()
    }

    #[test]
    fn agrees_with_cg() {
        let b = rhs(8);
        let cfg = SolverConfig {
            tol: 1e-12,
            ..SolverConfig::default()
        };
        let cg = cg_solve(&b, &cfg).unwrap().trace;
        let new = newcg_solve(&b, &cfg).unwrap().trace;
        for (c, p) in cg.records.iter().zip(&new.records).take(20) {
            assert!((c.res2 - p.res2).abs() <= 1e-8 * c.res2, "{c:?} {p:?}");
        }
    }

    #[test]
    fn recurrences_track_explicit_products() {
        let b = rhs(8);
        let cfg = SolverConfig {
            tol: 1e-14,
            max_iter: 10,
            ..SolverConfig::default()
        };
        let s = Stencil3x3::laplacian(());
        let mut seen = 0;
        newcg_solve_observed(&b, &cfg, |st| {
            let close = |got: &Grid<f64>, want: &Grid<f64>| {
                let scale = want.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                got.data()
                    .iter()
                    .zip(want.data())
                    .all(|(g, w)| (g - w).abs() <= 1e-10 * scale.max(1e-300))
            };
            assert!(
                close(&st.w, &apply_stencil_reference(&st.r, &s)),
                "w, it {}",
                st.iteration
            );
            assert!(
                close(&st.q, &apply_stencil_reference(&st.p, &s)),
                "q, it {}",
                st.iteration
            );
            assert!(
                close(&st.z, &apply_stencil_reference(&st.q, &s)),
                "z, it {}",
                st.iteration
            );
            let mut res = b.clone();
            let ax = apply_stencil_reference(&st.x, &s);
            for (ri, ai) in res.data_mut().iter_mut().zip(ax.data()) {
                *ri -= ai;
            }
            assert!(close(&st.r, &res), "r, it {}", st.iteration);
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 10);
    }
}
