//! Seeded random states and unitaries.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::dense::{c64, DenseOperator, C64};
use super::dims::SystemDims;
use super::state::PureState;
use crate::error::Result;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

pub fn random_pure<R: Rng + ?Sized>(dims: SystemDims, rng: &mut R) -> Result<PureState> {
    let n = dims.total();
    let v = DVector::from_fn(n, |_, _| gaussian(rng));
    PureState::normalized(v, dims)
}

/// Ginibre-distributed density operator of full rank.
pub fn random_density<R: Rng + ?Sized>(dims: SystemDims, rng: &mut R) -> Result<DenseOperator> {
    let n = dims.total();
    random_density_rank(dims, n, rng)
}

pub fn random_density_rank<R: Rng + ?Sized>(
    dims: SystemDims,
    rank: usize,
    rng: &mut R,
) -> Result<DenseOperator> {
    let n = dims.total();
    let g = DMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= c64(tr, 0.0);
    DenseOperator::square(m, dims)
}

/// Convex mixture of `terms` random product states across `left : right`;
/// separable, hence PPT.
pub fn random_separable<R: Rng + ?Sized>(
    left: &SystemDims,
    right: &SystemDims,
    terms: usize,
    rng: &mut R,
) -> Result<DenseOperator> {
    let dims = left.concat(right)?;
    let mut acc = DenseOperator::zeros(dims);
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let a = DenseOperator::projector(&random_pure(left.clone(), rng)?);
        let b = DenseOperator::projector(&random_pure(right.clone(), rng)?);
        acc = acc.add(&a.tensor(&b)?.scale_real(w / total))?;
    }
    Ok(acc)
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(dims: SystemDims, rng: &mut R) -> Result<DenseOperator> {
    let n = dims.total();
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    DenseOperator::square(u, dims)
}
