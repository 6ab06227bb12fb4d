use alloc::vec;
use alloc::vec::Vec;

use super::{Decomposition, Grid, LaplacianError, Stencil3x3, Traversal};
use crate::scalar::Scalar;

/// A subgrid with a one-cell halo on every side, stored row-major in its
/// natural orientation. The stream order is given by `traversal`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedSubgrid<S: Scalar> {
    pub owner: usize,
    /// Padded row count, `sub_rows + 2`.
    pub rows: usize,
    /// Padded column count, `sub_cols + 2`.
    pub cols: usize,
    pub data: Vec<S>,
    pub traversal: Traversal,
}

impl<S: Scalar> PaddedSubgrid<S> {
    pub fn at(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn interior_rows(&self) -> usize {
        self.rows - 2
    }

    pub fn interior_cols(&self) -> usize {
        self.cols - 2
    }

    /// Local padded indices in stream order.
    pub fn stream_order(&self) -> Vec<usize> {
        self.traversal.order(self.rows, self.cols)
    }

    /// The padded values in the order they enter the stencil engine.
    pub fn stream(&self) -> impl Iterator<Item = S> + '_ {
        (0..self.rows * self.cols).map(move |k| {
            let (r, c) = self.traversal.position(k, self.rows, self.cols);
            self.at(r, c)
        })
    }
}

/// Interior values of one subgrid, row-major in natural orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment<S: Scalar> {
    pub owner: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

fn check_size<S: Scalar>(g: &Grid<S>, d: &Decomposition) -> Result<(), LaplacianError> {
    if g.n() == d.n() {
        Ok(())
    } else {
        Err(LaplacianError::SizeMismatch {
            grid: g.n(),
            decomposition: d.n(),
        })
    }
}

/// Cuts `g` into one padded subgrid per lane. Halo cells are copied from
/// neighbouring subgrids, diagonal corners included, and are zero on the
/// physical boundary.
pub fn pad_subgrids<S: Scalar>(
    g: &Grid<S>,
    d: &Decomposition,
) -> Result<Vec<PaddedSubgrid<S>>, LaplacianError> {
    check_size(g, d)?;
    let (rows, cols) = (d.sub_rows() + 2, d.sub_cols() + 2);
    Ok((0..d.factor())
        .map(|sub| {
            let (r0, c0) = d.origin(sub);
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    data.push(g.get(r0 as isize + r as isize - 1, c0 as isize + c as isize - 1));
                }
            }
            PaddedSubgrid {
                owner: sub,
                rows,
                cols,
                data,
                traversal: d.traversal(sub),
            }
        })
        .collect())
}

/// Applies `s` to the interior of a padded subgrid.
pub fn apply_stencil_padded<S: Scalar>(p: &PaddedSubgrid<S>, s: &Stencil3x3<S>) -> Fragment<S> {
    let (rows, cols) = (p.interior_rows(), p.interior_cols());
    let zero = S::zero(p.data[0].format());
    let mut data = Vec::with_capacity(rows * cols);
    for i in 1..=rows {
        for j in 1..=cols {
            data.push(s.apply_at(zero, |di, dj| {
                p.at((i as isize + di) as usize, (j as isize + dj) as usize)
            }));
        }
    }
    Fragment {
        owner: p.owner,
        rows,
        cols,
        data,
    }
}

pub fn split_subgrids<S: Scalar>(
    g: &Grid<S>,
    d: &Decomposition,
) -> Result<Vec<Fragment<S>>, LaplacianError> {
    check_size(g, d)?;
    let (rows, cols) = (d.sub_rows(), d.sub_cols());
    Ok((0..d.factor())
        .map(|sub| {
            let (r0, c0) = d.origin(sub);
            let mut data = Vec::with_capacity(rows * cols);
            for r in r0..r0 + rows {
                data.extend_from_slice(&g.data()[r * d.n() + c0..r * d.n() + c0 + cols]);
            }
            Fragment {
                owner: sub,
                rows,
                cols,
                data,
            }
        })
        .collect())
}

/// Reassembles fragments, in any order, into the global grid.
pub fn merge_subgrids<S: Scalar>(
    parts: &[Fragment<S>],
    d: &Decomposition,
) -> Result<Grid<S>, LaplacianError> {
    let (rows, cols) = (d.sub_rows(), d.sub_cols());
    let mut slot: Vec<Option<&Fragment<S>>> = vec![None; d.factor()];
    for f in parts {
        d.check_subgrid(f.owner)?;
        if f.rows != rows || f.cols != cols || f.data.len() != rows * cols {
            return Err(LaplacianError::FragmentShape {
                owner: f.owner,
                rows: f.rows,
                cols: f.cols,
                exp_rows: rows,
                exp_cols: cols,
            });
        }
        if slot[f.owner].replace(f).is_some() {
            return Err(LaplacianError::DuplicateFragment(f.owner));
        }
    }
    let n = d.n();
    let mut data: Vec<S> = Vec::new();
    let mut format = None;
    for (sub, f) in slot.iter().enumerate() {
        let f = f.ok_or(LaplacianError::MissingFragment(sub))?;
        if format.is_none() {
            let fmt = f.data[0].format();
            format = Some(fmt);
            data = vec![S::zero(fmt); n * n];
        }
        let (r0, c0) = d.origin(sub);
        for r in 0..rows {
            let dst = (r0 + r) * n + c0;
            data[dst..dst + cols].copy_from_slice(&f.data[r * cols..(r + 1) * cols]);
        }
    }
    // factor >= 1, so the loop ran at least once.
    Grid::from_vec(n, data, format.expect("non-empty decomposition"))
}

/// Pad, apply the stencil lane by lane, merge.
pub fn apply_stencil_decomposed<S: Scalar>(
    g: &Grid<S>,
    d: &Decomposition,
    s: &Stencil3x3<S>,
) -> Result<Grid<S>, LaplacianError> {
    let frags: Vec<Fragment<S>> = pad_subgrids(g, d)?
        .iter()
        .map(|p| apply_stencil_padded(p, s))
        .collect();
    merge_subgrids(&frags, d)
}
