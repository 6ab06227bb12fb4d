//! The discrete problem: an `n x n` interior grid with an implicit zero
//! Dirichlet halo, the 3x3 stencil operator acting on it, and the
//! subgrid decompositions used to apply that operator in parallel lanes.

mod decomposition;
mod dense;
mod halo;

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::scalar::Scalar;

pub use decomposition::{traversal_order, DecompMode, Decomposition, Traversal};
pub use dense::{assemble_dense, DenseMatrix, MAX_DENSE_SIDE};
pub use halo::{
    apply_stencil_decomposed, apply_stencil_padded, merge_subgrids, pad_subgrids, split_subgrids,
    Fragment, PaddedSubgrid,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LaplacianError {
    #[error("grid side must be at least 1")]
    EmptyGrid,
    #[error("grid of side {n} needs {expected} values, got {got}")]
    Shape {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("dense assembly is limited to n <= {max}, got n = {n}")]
    DenseTooLarge { n: usize, max: usize },
    #[error("partition count must be at least 1")]
    ZeroPartitions,
    #[error("{parts} partitions do not divide grid side {n}")]
    NotDivisible { n: usize, parts: usize },
    #[error("1D decomposition uses horizontal strips only (h must be 1, got {h})")]
    OneDNeedsSingleColumn { h: usize },
    #[error("quadruple decomposition needs even v, h >= 2 (got v = {v}, h = {h})")]
    QuadrupleNeedsEven { v: usize, h: usize },
    #[error("subgrid index {index} out of range for {count} subgrids")]
    BadSubgrid { index: usize, count: usize },
    #[error("grid has side {grid} but the decomposition expects {decomposition}")]
    SizeMismatch { grid: usize, decomposition: usize },
    #[error("fragment for subgrid {0} is missing")]
    MissingFragment(usize),
    #[error("fragment for subgrid {0} appears more than once")]
    DuplicateFragment(usize),
    #[error(
        "fragment for subgrid {owner} has shape {rows}x{cols}, expected {exp_rows}x{exp_cols}"
    )]
    FragmentShape {
        owner: usize,
        rows: usize,
        cols: usize,
        exp_rows: usize,
        exp_cols: usize,
    },
}

/// Interior values of an `n x n` grid in row-major order. Reads outside
/// `[0, n) x [0, n)` return zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<S: Scalar> {
    n: usize,
    data: Vec<S>,
    format: S::Format,
}

impl<S: Scalar> Grid<S> {
    pub fn zeros(n: usize, format: S::Format) -> Result<Self, LaplacianError> {
        if n == 0 {
            return Err(LaplacianError::EmptyGrid);
        }
        Ok(Self {
            n,
            data: vec![S::zero(format); n * n],
            format,
        })
    }

    pub fn from_vec(n: usize, data: Vec<S>, format: S::Format) -> Result<Self, LaplacianError> {
        if n == 0 {
            return Err(LaplacianError::EmptyGrid);
        }
        if data.len() != n * n {
            return Err(LaplacianError::Shape {
                n,
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data, format })
    }

    pub fn from_fn(
        n: usize,
        format: S::Format,
        mut f: impl FnMut(usize, usize) -> S,
    ) -> Result<Self, LaplacianError> {
        let mut g = Self::zeros(n, format)?;
        for i in 0..n {
            for j in 0..n {
                g.data[i * n + j] = f(i, j);
            }
        }
        Ok(g)
    }

    /// Quantizes a double grid into this scalar kind.
    pub fn from_f64_grid(g: &Grid<f64>, format: S::Format) -> Self {
        Self {
            n: g.n,
            data: g.data.iter().map(|&x| S::from_f64(x, format)).collect(),
            format,
        }
    }

    pub fn to_f64_grid(&self) -> Grid<f64> {
        Grid {
            n: self.n,
            data: self.data.iter().map(|v| v.to_f64()).collect(),
            format: (),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn format(&self) -> S::Format {
        self.format
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    /// Value at `(i, j)`, or zero outside the domain.
    pub fn get(&self, i: isize, j: isize) -> S {
        let n = self.n as isize;
        if i < 0 || j < 0 || i >= n || j >= n {
            S::zero(self.format)
        } else {
            self.data[(i * n + j) as usize]
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

/// 3x3 stencil weights, `coeffs[di + 1][dj + 1]` multiplying `g[i + di][j + dj]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil3x3<S: Scalar> {
    pub coeffs: [[S; 3]; 3],
}

impl<S: Scalar> Stencil3x3<S> {
    /// `[[0, -1, 0], [-1, 4, -1], [0, -1, 0]]`.
    pub fn laplacian(format: S::Format) -> Self {
        let w = |x: f64| S::from_f64(x, format);
        Self {
            coeffs: [
                [w(0.0), w(-1.0), w(0.0)],
                [w(-1.0), w(4.0), w(-1.0)],
                [w(0.0), w(-1.0), w(0.0)],
            ],
        }
    }

    pub fn from_f64(coeffs: [[f64; 3]; 3], format: S::Format) -> Self {
        Self {
            coeffs: coeffs.map(|row| row.map(|c| S::from_f64(c, format))),
        }
    }

    /// Applies the stencil to a neighbourhood given by `fetch(di, dj)`.
    ///
    /// Every implementation of the operator in this crate funnels through
    /// this accumulation order (row-major over the 3x3 window, starting from
    /// zero) so that results agree bit for bit in any scalar kind.
    #[inline]
    pub fn apply_at(&self, zero: S, mut fetch: impl FnMut(isize, isize) -> S) -> S {
        let mut acc = zero;
        for (di, row) in self.coeffs.iter().enumerate() {
            for (dj, &c) in row.iter().enumerate() {
                acc = acc + c * fetch(di as isize - 1, dj as isize - 1);
            }
        }
        acc
    }
}

/// Sequential, undecomposed application of `s` to `g` with zero Dirichlet halo.
pub fn apply_stencil_reference<S: Scalar>(g: &Grid<S>, s: &Stencil3x3<S>) -> Grid<S> {
    let n = g.n;
    let zero = S::zero(g.format);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n as isize {
        for j in 0..n as isize {
            out.push(s.apply_at(zero, |di, dj| g.get(i + di, j + dj)));
        }
    }
    Grid {
        n,
        data: out,
        format: g.format,
    }
}
