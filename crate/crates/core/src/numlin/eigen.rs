use std::cmp::Ordering;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, NumlinError};

/// An eigenvalue together with a unit eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl EigenPair {
    /// `‖M·v − λ·v‖₂`.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let mv = m.apply(&self.vector);
        mv.iter()
            .zip(&self.vector)
            .map(|(a, b)| (a - self.value * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

const MAX_SWEEPS_PER_DIM: usize = 1000;

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<usize, NumlinError> {
    let n = m.require_square()?;
    let scale = m.frobenius_norm();
    let deviation = (m - &m.adjoint()).frobenius_norm();
    if deviation > tol * scale {
        return Err(NumlinError::NotHermitian { deviation, tol });
    }
    Ok(n)
}

fn symmetrized(m: &ComplexMatrix) -> DMatrix<Complex64> {
    let a = m.as_nalgebra();
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized before factorization once it passes the
/// `‖M − M^H‖_F ≤ tol·‖M‖_F` check; ties keep their factorization order.
pub fn hermitian_eigs(m: &ComplexMatrix, tol: f64) -> Result<Vec<EigenPair>, NumlinError> {
    let n = check_hermitian(m, tol)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(symmetrized(m), f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or(NumlinError::NoConvergence { routine: "hermitian_eigs" })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    Ok(order
        .into_iter()
        .map(|k| EigenPair {
            value: Complex64::new(eig.eigenvalues[k], 0.0),
            vector: eig.eigenvectors.column(k).iter().copied().collect(),
        })
        .collect())
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>, NumlinError> {
    let n = check_hermitian(m, tol)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = symmetrized(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn schur(m: &ComplexMatrix) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), NumlinError> {
    let n = m.require_square()?;
    let s = Schur::try_new(m.as_nalgebra().clone(), f64::EPSILON, MAX_SWEEPS_PER_DIM * n.max(1))
        .ok_or(NumlinError::NoConvergence { routine: "general_eigs" })?;
    Ok(s.unpack())
}

fn eig_order(a: &(usize, Complex64), b: &(usize, Complex64)) -> Ordering {
    a.1.re.total_cmp(&b.1.re).then(a.1.im.total_cmp(&b.1.im)).then(a.0.cmp(&b.0))
}

/// Eigenvalues of a general square matrix with multiplicity, sorted by real
/// part, then imaginary part, then position on the Schur diagonal.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, NumlinError> {
    let (_, t) = schur(m)?;
    let mut vals: Vec<(usize, Complex64)> = t.diagonal().iter().copied().enumerate().collect();
    vals.sort_by(eig_order);
    Ok(vals.into_iter().map(|(_, v)| v).collect())
}

/// Eigenpairs of a general square matrix.
///
/// Eigenvectors are obtained by back substitution on the triangular Schur
/// factor, with near-zero pivots replaced by `ε·‖T‖` so that defective and
/// repeated eigenvalues still yield small-residual unit vectors.
pub fn general_eigs(m: &ComplexMatrix) -> Result<Vec<EigenPair>, NumlinError> {
    let (q, t) = schur(m)?;
    let n = t.nrows();
    let tnorm = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);

    let mut pairs: Vec<(usize, Complex64)> = t.diagonal().iter().copied().enumerate().collect();
    pairs.sort_by(eig_order);

    let mut out = Vec::with_capacity(n);
    for (k, lambda) in pairs {
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[i] = -s / d;
            // keep the partial solution bounded
            let big = y[i..=k].iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                for z in &mut y[i..=k] {
                    *z /= big;
                }
            }
        }
        let mut x: Vec<Complex64> = (0..n).map(|r| (0..=k).map(|j| q[(r, j)] * y[j]).sum()).collect();
        let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut x {
            *z /= nrm;
        }
        out.push(EigenPair { value: lambda, vector: x });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::random::{haar_unitary, random_hermitian, seeded};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn values(pairs: &[EigenPair]) -> Vec<Complex64> {
        pairs.iter().map(|p| p.value).collect()
    }

    #[test]
    fn hermitian_diagonal() {
        let m = ComplexMatrix::from_real_diag(&[2.0, -1.0]);
        let e = hermitian_eigs(&m, 1e-10).unwrap();
        assert!((e[0].value.re + 1.0).abs() < 1e-14);
        assert!((e[1].value.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_pauli_x() {
        let m = ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let v = hermitian_eigenvalues(&m, 1e-10).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_complex_offdiagonal() {
        // (1 − λ)² = 1/4
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(1.0, 0.0)]);
        let e = hermitian_eigs(&m, 1e-10).unwrap();
        assert!((e[0].value.re - 0.5).abs() < 1e-14);
        assert!((e[1].value.re - 1.5).abs() < 1e-14);
        for p in &e {
            assert!(p.residual(&m) < 1e-14);
        }
    }

    #[test]
    fn hermitian_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(hermitian_eigs(&m, 1e-10), Err(NumlinError::NotHermitian { .. })));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigs(&r, 1e-10), Err(NumlinError::NotSquare { .. })));
    }

    #[test]
    fn general_diagonal_rotation() {
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let m = ComplexMatrix::from_diag(&[c(1.0, 0.0), w]);
        let v = values(&general_eigs(&m).unwrap());
        // ascending real part: cos(π/4) < 1
        assert!((v[0] - w).norm() < 1e-14);
        assert!((v[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn general_triangular() {
        let m = ComplexMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 2.0]);
        let e = general_eigs(&m).unwrap();
        assert!((e[0].value - c(1.0, 0.0)).norm() < 1e-13);
        assert!((e[1].value - c(2.0, 0.0)).norm() < 1e-13);
        for p in &e {
            assert!(p.residual(&m) < 1e-13);
        }
    }

    #[test]
    fn general_companion_complex_pair() {
        // z² − 2z + 2 has roots 1 ± i
        let m = ComplexMatrix::from_real_rows(2, 2, &[2.0, -2.0, 1.0, 0.0]);
        let v = values(&general_eigs(&m).unwrap());
        assert!((v[0] - c(1.0, -1.0)).norm() < 1e-13);
        assert!((v[1] - c(1.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn jordan_block_has_small_residual() {
        let m = ComplexMatrix::from_real_rows(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]);
        for p in general_eigs(&m).unwrap() {
            assert!(p.residual(&m) < 1e-9 * m.norm2());
            assert!(((p.vector.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_matrix() {
        assert!(general_eigs(&ComplexMatrix::zeros(0, 0)).unwrap().is_empty());
        assert!(hermitian_eigs(&ComplexMatrix::zeros(0, 0), 1e-10).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hermitian_reconstruction(n in 1usize..=32, seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let m = random_hermitian(n, &mut rng);
            let e = hermitian_eigs(&m, 1e-10).unwrap();
            let v = ComplexMatrix::from_columns(n, &e.iter().map(|p| p.vector.clone()).collect::<Vec<_>>());
            let lam: Vec<f64> = e.iter().map(|p| p.value.re).collect();
            prop_assert!(lam.windows(2).all(|w| w[0] <= w[1]));
            let scale = m.norm2();
            let gram = &v.adjoint() * &v;
            prop_assert!(gram.distance(&ComplexMatrix::identity(n)) <= 1e-10);
            let rec = &(&v * &ComplexMatrix::from_real_diag(&lam)) * &v.adjoint();
            prop_assert!(rec.distance(&m) <= 1e-10 * scale);
        }

        #[test]
        fn trace_equals_eigenvalue_sum(n in 1usize..=16, seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let u = haar_unitary(n, &mut rng);
            let g = &crate::numlin::random::gaussian_matrix(n, n, &mut rng) + &u;
            let e = general_eigs(&g).unwrap();
            let sum: Complex64 = e.iter().map(|p| p.value).sum();
            prop_assert!((sum - g.trace()).norm() <= 1e-9 * g.norm2());
            for p in &e {
                prop_assert!(p.residual(&g) <= 1e-9 * g.norm2());
            }
        }
    }
}
