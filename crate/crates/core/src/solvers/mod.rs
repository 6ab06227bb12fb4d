//! Standard and pipelined conjugate gradient on the matrix-free Laplacian.
//!
//! Both solvers are generic over [`Scalar`] and apply the operator through
//! the streamed, decomposed stencil path. Inner products are accumulated
//! in row-major order, so a run does not depend on the lane layout.

mod cg;
mod newcg;

use alloc::vec::Vec;

use thiserror::Error;

use crate::dataflow::{run_stencil_stream, DataflowError};
use crate::laplacian::{
    apply_stencil_reference, merge_subgrids, pad_subgrids, DecompMode, Decomposition, Grid,
    LaplacianError, Stencil3x3,
};
use crate::math::sqrt;
use crate::scalar::Scalar;

pub use cg::{cg_solve, cg_solve_observed, CgState};
pub use newcg::{newcg_solve, newcg_solve_observed, PipelinedCgState};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error(transparent)]
    Dataflow(#[from] DataflowError),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("iteration cap must be at least 1")]
    ZeroMaxIter,
    #[error("right-hand side contains a non-finite value")]
    NonFiniteRhs,
    #[error("grids of side {0} and {1} do not match")]
    ShapeMismatch(usize, usize),
    #[error("breakdown in iteration {iteration}: {reason}")]
    Breakdown {
        iteration: usize,
        reason: BreakdownReason,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum BreakdownReason {
    #[error("(z, p) is not positive, the operator is not SPD in this arithmetic")]
    NotPositive,
    #[error("division by zero in the {0} update")]
    DivisionByZero(&'static str),
}

/// Lane layout of the operator, resolved against the grid size at solve time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub v: usize,
    pub h: usize,
    pub mode: DecompMode,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            v: 1,
            h: 1,
            mode: DecompMode::OneD,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once `||r|| / ||b|| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub layout: Layout,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            layout: Layout::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.tol.is_infinite() {
            return Err(SolverError::BadTolerance(self.tol));
        }
        if self.max_iter == 0 {
            return Err(SolverError::ZeroMaxIter);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// `(r, r)` quantized to zero while the residual is still above the
    /// tolerance; no further progress is possible in this format.
    Stagnated,
    /// The right-hand side is zero and so is the solution.
    ZeroRhs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `||r||_2` of the recurrence residual, evaluated in double.
    pub res2: f64,
    pub relres: f64,
    /// `||b - A x||_2 / ||b||_2` recomputed in double.
    pub true_relres: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub stop: StopReason,
    /// Values that hit the range limit while iterating (fixed point only).
    pub saturations: u64,
    pub norm_b: f64,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_relres(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.relres)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S: Scalar> {
    pub x: Grid<S>,
    pub trace: IterationTrace,
}

/// `A` as a stream of padded subgrids through line-buffer engines.
#[derive(Clone, Debug)]
pub struct LaplaceOperator<S: Scalar> {
    decomposition: Decomposition,
    stencil: Stencil3x3<S>,
}

impl<S: Scalar> LaplaceOperator<S> {
    pub fn new(n: usize, layout: Layout, format: S::Format) -> Result<Self, SolverError> {
        Ok(Self {
            decomposition: Decomposition::new(n, layout.v, layout.h, layout.mode)?,
            stencil: Stencil3x3::laplacian(format),
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn apply(&self, g: &Grid<S>) -> Result<Grid<S>, SolverError> {
        let frags = pad_subgrids(g, &self.decomposition)?
            .iter()
            .map(|p| run_stencil_stream(p, &self.stencil).map(|run| run.fragment))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(merge_subgrids(&frags, &self.decomposition)?)
    }
}

fn norm2_f64(v: &[impl Scalar]) -> f64 {
    sqrt(v.iter().map(|x| x.to_f64() * x.to_f64()).sum())
}

fn true_residual_norm(x: &Grid<f64>, b: &Grid<f64>) -> f64 {
    let ax = apply_stencil_reference(x, &Stencil3x3::laplacian(()));
    sqrt(
        b.data()
            .iter()
            .zip(ax.data())
            .map(|(bi, ai)| (bi - ai) * (bi - ai))
            .sum(),
    )
}

/// `||b - A x||_2 / ||b||_2` in double precision, or the plain residual norm
/// when `b` is zero.
pub fn relative_residual<S: Scalar>(x: &Grid<S>, b: &Grid<S>) -> Result<f64, SolverError> {
    if x.n() != b.n() {
        return Err(SolverError::ShapeMismatch(x.n(), b.n()));
    }
    let b64 = b.to_f64_grid();
    let res = true_residual_norm(&x.to_f64_grid(), &b64);
    let nb = norm2_f64(b64.data());
    Ok(if nb == 0.0 { res } else { res / nb })
}

fn dot<S: Scalar>(a: &Grid<S>, b: &Grid<S>) -> S {
    a.data()
        .iter()
        .zip(b.data())
        .fold(S::zero(a.format()), |acc, (&x, &y)| acc + x * y)
}

/// `y <- y + alpha * v`.
fn axpy_in_place<S: Scalar>(y: &mut Grid<S>, alpha: S, v: &Grid<S>) {
    for (yi, &vi) in y.data_mut().iter_mut().zip(v.data()) {
        *yi = *yi + alpha * vi;
    }
}

/// `y <- v + beta * y`.
fn xpby_in_place<S: Scalar>(y: &mut Grid<S>, v: &Grid<S>, beta: S) {
    for (yi, &vi) in y.data_mut().iter_mut().zip(v.data()) {
        *yi = vi + beta * *yi;
    }
}

fn saturated_count<S: Scalar>(gs: &[&Grid<S>], scalars: &[S]) -> u64 {
    let v: usize = gs
        .iter()
        .map(|g| g.data().iter().filter(|x| x.saturated()).count())
        .sum();
    (v + scalars.iter().filter(|x| x.saturated()).count()) as u64
}

fn divide<S: Scalar>(
    num: S,
    den: S,
    iteration: usize,
    what: &'static str,
) -> Result<S, SolverError> {
    num.try_div(den).ok_or(SolverError::Breakdown {
        iteration,
        reason: BreakdownReason::DivisionByZero(what),
    })
}

/// Shared set-up: validation, operator and `||b||`.
fn prepare<S: Scalar>(
    b: &Grid<S>,
    cfg: &SolverConfig,
) -> Result<(LaplaceOperator<S>, f64), SolverError> {
    cfg.validate()?;
    if b.data().iter().any(|v| !v.to_f64().is_finite()) {
        return Err(SolverError::NonFiniteRhs);
    }
    let op = LaplaceOperator::new(b.n(), cfg.layout, b.format())?;
    Ok((op, norm2_f64(b.data())))
}

fn zero_rhs_solution<S: Scalar>(b: &Grid<S>) -> Solution<S> {
    Solution {
        x: Grid::from_vec(
            b.n(),
            alloc::vec![S::zero(b.format()); b.n() * b.n()],
            b.format(),
        )
        .expect("same shape as b"),
        trace: IterationTrace {
            records: Vec::new(),
            converged: true,
            stop: StopReason::ZeroRhs,
            saturations: 0,
            norm_b: 0.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::assemble_dense;

    #[test]
    fn operator_matches_reference() {
        let g = Grid::from_fn(8, (), |i, j| (i as f64).sin() + j as f64 * 0.5).unwrap();
        let want = apply_stencil_reference(&g, &Stencil3x3::laplacian(()));
        for layout in [
            Layout::default(),
            Layout {
                v: 4,
                h: 1,
                mode: DecompMode::OneD,
            },
            Layout {
                v: 2,
                h: 4,
                mode: DecompMode::TwoDQuadruple,
            },
        ] {
            let op = LaplaceOperator::<f64>::new(8, layout, ()).unwrap();
            assert_eq!(op.apply(&g).unwrap(), want);
        }
    }

    #[test]
    fn relative_residual_cases() {
        let b = Grid::from_fn(4, (), |i, j| 1.0 + (i * 4 + j) as f64 * 0.25).unwrap();
        let zero = Grid::<f64>::zeros(4, ()).unwrap();
        assert_eq!(relative_residual(&zero, &b).unwrap(), 1.0);

        // Exact solve through the dense oracle.
        let a = assemble_dense(4).unwrap();
        let x = crate::solvers::tests::dense_solve(&a, b.data());
        let x = Grid::from_vec(4, x, ()).unwrap();
        assert!(relative_residual(&x, &b).unwrap() < 1e-12);

        assert_eq!(
            relative_residual(&Grid::<f64>::zeros(3, ()).unwrap(), &b),
            Err(SolverError::ShapeMismatch(3, 4))
        );
        // b = 0 falls back to the plain residual norm.
        let mut one = Grid::<f64>::zeros(4, ()).unwrap();
        one.set(0, 0, 1.0);
        let r = relative_residual(&one, &zero).unwrap();
        assert!((r - sqrt(16.0 + 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert_eq!(bad.validate(), Err(SolverError::BadTolerance(0.0)));
        let bad = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert_eq!(bad.validate(), Err(SolverError::ZeroMaxIter));
    }

    /// Gaussian elimination without pivoting; fine for SPD test matrices.
    pub(crate) fn dense_solve(a: &crate::laplacian::DenseMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.dim();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|p| (0..n).map(|q| a.at(p, q)).chain([b[p]]).collect())
            .collect();
        for k in 0..n {
            let pivot = m[k].clone();
            for row in &mut m[k + 1..] {
                let f = row[k] / pivot[k];
                for (x, y) in row[k..].iter_mut().zip(&pivot[k..]) {
                    *x -= f * y;
                }
            }
        }
        let mut x = alloc::vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|q| m[k][q] * x[q]).sum();
            x[k] = (m[k][n] - s) / m[k][k];
        }
        x
    }
}
