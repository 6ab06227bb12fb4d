use alloc::vec::Vec;

use super::LaplacianError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecompMode {
    /// `v` horizontal strips, streamed row-major.
    OneD,
    /// `v x h` subgrids grouped into 2x2 quadruples whose streams start at
    /// the quadruple's central node.
    TwoDQuadruple,
}

/// Partition of an `n x n` grid into `v x h` equal subgrids, numbered
/// row-major over the subgrid lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    n: usize,
    v: usize,
    h: usize,
    mode: DecompMode,
    /// `[top-left, top-right, bottom-left, bottom-right]` subgrid indices.
    quadruples: Vec<[usize; 4]>,
}

impl Decomposition {
    pub fn new(n: usize, v: usize, h: usize, mode: DecompMode) -> Result<Self, LaplacianError> {
        if n == 0 {
            return Err(LaplacianError::EmptyGrid);
        }
        if v == 0 || h == 0 {
            return Err(LaplacianError::ZeroPartitions);
        }
        for parts in [v, h] {
            if !n.is_multiple_of(parts) {
                return Err(LaplacianError::NotDivisible { n, parts });
            }
        }
        let quadruples = match mode {
            DecompMode::OneD => {
                if h != 1 {
                    return Err(LaplacianError::OneDNeedsSingleColumn { h });
                }
                Vec::new()
            }
            DecompMode::TwoDQuadruple => {
                if v < 2 || h < 2 || !v.is_multiple_of(2) || !h.is_multiple_of(2) {
                    return Err(LaplacianError::QuadrupleNeedsEven { v, h });
                }
                let mut q = Vec::with_capacity(v * h / 4);
                for qi in 0..v / 2 {
                    for qj in 0..h / 2 {
                        let tl = 2 * qi * h + 2 * qj;
                        q.push([tl, tl + 1, tl + h, tl + h + 1]);
                    }
                }
                q
            }
        };
        Ok(Self {
            n,
            v,
            h,
            mode,
            quadruples,
        })
    }

    /// The undecomposed operator, a single lane covering the whole grid.
    pub fn single(n: usize) -> Result<Self, LaplacianError> {
        Self::new(n, 1, 1, DecompMode::OneD)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn mode(&self) -> DecompMode {
        self.mode
    }

    /// Degree of superscalarity, `v * h`.
    pub fn factor(&self) -> usize {
        self.v * self.h
    }

    pub fn sub_rows(&self) -> usize {
        self.n / self.v
    }

    pub fn sub_cols(&self) -> usize {
        self.n / self.h
    }

    pub fn quadruples(&self) -> &[[usize; 4]] {
        &self.quadruples
    }

    /// Global `(row, col)` of the top-left interior cell of subgrid `sub`.
    pub fn origin(&self, sub: usize) -> (usize, usize) {
        let (bi, bj) = (sub / self.h, sub % self.h);
        (bi * self.sub_rows(), bj * self.sub_cols())
    }

    pub fn check_subgrid(&self, sub: usize) -> Result<(), LaplacianError> {
        if sub < self.factor() {
            Ok(())
        } else {
            Err(LaplacianError::BadSubgrid {
                index: sub,
                count: self.factor(),
            })
        }
    }

    /// Stream orientation of subgrid `sub`.
    pub fn traversal(&self, sub: usize) -> Traversal {
        match self.mode {
            DecompMode::OneD => Traversal::ROW_MAJOR,
            DecompMode::TwoDQuadruple => {
                let (bi, bj) = (sub / self.h, sub % self.h);
                // Top subgrids of a quadruple walk upwards from the shared
                // centre, left ones walk leftwards.
                Traversal {
                    flip_rows: bi % 2 == 0,
                    flip_cols: bj % 2 == 0,
                }
            }
        }
    }
}

/// A reflected row-major walk over a rectangle: rows are visited bottom-up
/// when `flip_rows`, columns right-to-left when `flip_cols`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Traversal {
    pub flip_rows: bool,
    pub flip_cols: bool,
}

impl Traversal {
    pub const ROW_MAJOR: Self = Self {
        flip_rows: false,
        flip_cols: false,
    };

    /// Natural `(row, col)` of the `k`-th streamed cell.
    #[inline]
    pub fn position(self, k: usize, rows: usize, cols: usize) -> (usize, usize) {
        let (sr, sc) = (k / cols, k % cols);
        let r = if self.flip_rows { rows - 1 - sr } else { sr };
        let c = if self.flip_cols { cols - 1 - sc } else { sc };
        (r, c)
    }

    /// Stream step at which natural cell `(r, c)` is visited.
    #[inline]
    pub fn step_of(self, r: usize, c: usize, rows: usize, cols: usize) -> usize {
        let sr = if self.flip_rows { rows - 1 - r } else { r };
        let sc = if self.flip_cols { cols - 1 - c } else { c };
        sr * cols + sc
    }

    /// Local row-major indices in stream order.
    pub fn order(self, rows: usize, cols: usize) -> Vec<usize> {
        (0..rows * cols)
            .map(|k| {
                let (r, c) = self.position(k, rows, cols);
                r * cols + c
            })
            .collect()
    }
}

/// Stream order of subgrid `sub` as local row-major indices.
pub fn traversal_order(d: &Decomposition, sub: usize) -> Result<Vec<usize>, LaplacianError> {
    d.check_subgrid(sub)?;
    Ok(d.traversal(sub).order(d.sub_rows(), d.sub_cols()))
}
