//! Random operators for property checks and experiments. Entries are uniform on the unit square,
//! so the distributions are full-support but not unitarily invariant.

use nalgebra::QR;
use rand::Rng;

use super::linalg::{identity, r, tr, CMat, C64};

/// Matrix with independent entries uniform on `[-1, 1] + i[-1, 1]`.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// `G G†` with `G` a `d × rank` random matrix.
pub fn random_psd<R: Rng>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let g = random_matrix(d, rank, rng);
    &g * g.adjoint()
}

/// Density matrix of the given rank.
pub fn random_density<R: Rng>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let m = random_psd(d, rank, rng);
    let t = tr(&m);
    m * r(1.0 / t)
}

/// Unitary from the QR factorisation of a random matrix.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    QR::new(random_matrix(d, d, rng)).q()
}

/// Rank-`k` orthogonal projector.
pub fn random_projector<R: Rng>(d: usize, k: usize, rng: &mut R) -> CMat {
    if k == 0 {
        return CMat::zeros(d, d);
    }
    if k >= d {
        return identity(d);
    }
    let u = random_unitary(d, rng);
    let w = u.columns(0, k);
    w * w.adjoint()
}
