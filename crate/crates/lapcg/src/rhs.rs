//! Right-hand sides for experiments.
//!
//! Random grids come from Xoshiro256++ seeded through SplitMix64
//! (`rand_xoshiro`'s `seed_from_u64`). Each 64-bit output `u` becomes
//! `((u >> 11) * 2^-53) * 2 - 1`, uniform in `[-1, 1)`, and grids are
//! filled row-major.

use lapcg_core::laplacian::{apply_stencil_reference, Grid, LaplacianError, Stencil3x3};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn ones(n: usize) -> Result<Grid<f64>, LaplacianError> {
    Grid::from_vec(n, vec![1.0; n * n], ())
}

pub fn uniform_grid(n: usize, seed: u64) -> Result<Grid<f64>, LaplacianError> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    Grid::from_fn(n, (), |_, _| {
        let u = rng.next_u64() >> 11;
        u as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
    })
}

/// A random exact solution `x*` and `b = A x*`, both in double.
pub fn manufactured(n: usize, seed: u64) -> Result<(Grid<f64>, Grid<f64>), LaplacianError> {
    let x = uniform_grid(n, seed)?;
    let b = apply_stencil_reference(&x, &Stencil3x3::laplacian(()));
    Ok((x, b))
}
