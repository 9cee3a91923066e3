//! Seeded random matrix ensembles.
//!
//! Every generator takes an explicit RNG. Per-trial streams are derived with
//! [`trial_seed`]: `splitmix64(seed ^ trial)` feeds a `ChaCha8Rng`, so a trial
//! depends only on the master seed and its own index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::CMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed of trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ trial)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix of i.i.d. standard complex Gaussians (`E|g|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(s * standard_normal(rng), s * standard_normal(rng)))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase of
/// `R`'s diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = complex_gaussian(rng, n, n);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian matrix from the Gaussian unitary ensemble, unit entry variance.
pub fn gue<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = complex_gaussian(rng, n, n);
    (&g + g.adjoint()).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Complex Wishart matrix `G* G`, always positive semidefinite.
pub fn wishart<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = complex_gaussian(rng, n, n);
    g.adjoint() * g
}

/// Positive diagonal matrix with exponential bulk and one dominant spike,
/// conjugated by a Haar unitary.
pub fn spiky_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let mut diag: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let spike = rng.random_range(0..n);
    diag[spike] += n as f64 * rng.random_range(1.0..4.0);
    let u = haar_unitary(rng, n);
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    &u * d * u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_output_is_unitary() {
        let mut rng = rng_from_seed(3);
        let u = haar_unitary(&mut rng, 8);
        let err = (u.adjoint() * &u - CMatrix::identity(8, 8)).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        assert_eq!(trial_seed(7, 0), trial_seed(7, 0));
        assert_ne!(trial_seed(7, 0), trial_seed(7, 1));
        assert_ne!(trial_seed(7, 1), trial_seed(8, 0));
    }

    #[test]
    fn wishart_is_psd() {
        let mut rng = rng_from_seed(11);
        let w = wishart(&mut rng, 6);
        let eig = w.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-10));
    }
}
