use alloc::vec;
use alloc::vec::Vec;

use super::{apply_stencil_reference, Grid, LaplacianError, Stencil3x3};

/// Largest side length accepted by [`assemble_dense`].
pub const MAX_DENSE_SIDE: usize = 64;

/// Row-major square matrix. Only used as a test oracle; the solvers never
/// assemble the operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.data[p * self.dim + q]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|p| (0..p).all(|q| self.at(p, q) == self.at(q, p)))
    }
}

/// Builds the `n^2 x n^2` matrix of the five-point Laplacian by probing
/// [`apply_stencil_reference`] with unit vectors.
pub fn assemble_dense(n: usize) -> Result<DenseMatrix, LaplacianError> {
    if n == 0 {
        return Err(LaplacianError::EmptyGrid);
    }
    if n > MAX_DENSE_SIDE {
        return Err(LaplacianError::DenseTooLarge {
            n,
            max: MAX_DENSE_SIDE,
        });
    }
    let dim = n * n;
    let stencil = Stencil3x3::<f64>::laplacian(());
    let mut data = vec![0.0; dim * dim];
    let mut unit = Grid::<f64>::zeros(n, ())?;
    for q in 0..dim {
        unit.data_mut()[q] = 1.0;
        let col = apply_stencil_reference(&unit, &stencil);
        for (p, &v) in col.data().iter().enumerate() {
            data[p * dim + q] = v;
        }
        unit.data_mut()[q] = 0.0;
    }
    Ok(DenseMatrix { dim, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_cases() {
        let a = assemble_dense(1).unwrap();
        assert_eq!(a.data, vec![4.0]);
        let a = assemble_dense(2).unwrap();
        #[rustfmt::skip]
        let expected = vec![
            4.0, -1.0, -1.0, 0.0,
            -1.0, 4.0, 0.0, -1.0,
            -1.0, 0.0, 4.0, -1.0,
            0.0, -1.0, -1.0, 4.0,
        ];
        assert_eq!(a.data, expected);
    }

    #[test]
    fn symmetric_at_8() {
        assert!(assemble_dense(8).unwrap().is_symmetric());
    }

    #[test]
    fn refuses_large() {
        assert_eq!(
            assemble_dense(65),
            Err(LaplacianError::DenseTooLarge { n: 65, max: 64 })
        );
    }
}
