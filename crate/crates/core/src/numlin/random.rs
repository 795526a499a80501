//! Seeded random test matrices. All generators draw from ChaCha8 so outputs
//! depend only on the seed, never on platform or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ComplexMatrix;

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex normal: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if let Some(u) = super::normalized(&v) {
            return u;
        }
    }
}

/// Haar-distributed unitary via QR of a Gaussian matrix with phase-corrected R.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let g = gaussian_matrix(n, n, rng);
    let qr = g.as_nalgebra().clone().qr();
    let (q, r) = qr.unpack();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Random contraction `U·diag(s)·V` with singular values uniform in `[0, 1]`.
///
/// With `touch_unit` the largest singular value is set to exactly one, which
/// produces multivalued relations under the inverse Cayley map whenever the
/// corresponding direction has eigenvalue 1.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, touch_unit: bool, rng: &mut R) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let mut s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    if touch_unit && n > 0 {
        s[0] = 1.0;
    }
    &(&u * &ComplexMatrix::from_real_diag(&s)) * &v
}

/// Random matrix with singular values uniform in `[lo, hi]`.
pub fn random_conditioned<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let s: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    &(&u * &ComplexMatrix::from_real_diag(&s)) * &v
}

/// Random normal matrix `U·diag(λ)·U^H`.
pub fn random_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let d: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng) * 2.0).collect();
    &(&u * &ComplexMatrix::from_diag(&d)) * &u.adjoint()
}
