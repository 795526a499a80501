//! Numerical range and sector classification of matrix operators.
//!
//! Sector membership is always decided through eigenvalues of rotated
//! Hermitian parts: `|arg w| ≤ φ` for every `w ∈ W(T)` holds exactly when
//! both `Re(e^{i(φ−π/2)}T)` and `Re(e^{i(π/2−φ)}T)` are positive semidefinite.
//! The vertex `0` belongs to every sector (`arg 0 := 0`).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numlin::{hermitian_eigenvalues, hermitian_eigs, inner, ComplexMatrix, NumlinError};

/// Bisection steps for the minimal semi-angle.
pub const BISECTION_STEPS: usize = 60;
pub const MIN_ANGLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OprangeError {
    #[error(transparent)]
    Numlin(#[from] NumlinError),
    #[error("angle {phi} is outside [0, π/2]")]
    InvalidAngle { phi: f64 },
    #[error("need at least {MIN_ANGLES} sweep angles, got {requested}")]
    TooFewAngles { requested: usize },
}

impl OprangeError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Numlin(e) => e.code(),
            Self::InvalidAngle { .. } => "oprange::InvalidAngle",
            Self::TooFewAngles { .. } => "oprange::TooFewAngles",
        }
    }
}

pub(crate) fn check_angle(phi: f64) -> Result<(), OprangeError> {
    if (0.0..=FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(OprangeError::InvalidAngle { phi })
    }
}

/// `(T + T^H)/2`.
pub fn real_part(t: &ComplexMatrix) -> Result<ComplexMatrix, NumlinError> {
    t.require_square()?;
    Ok((t + &t.adjoint()).scale_real(0.5))
}

/// `(T − T^H)/(2i)`.
pub fn imag_part(t: &ComplexMatrix) -> Result<ComplexMatrix, NumlinError> {
    t.require_square()?;
    Ok((t - &t.adjoint()).scale(Complex64::new(0.0, -0.5)))
}

fn rotated(t: &ComplexMatrix, angle: f64) -> ComplexMatrix {
    t.scale(Complex64::from_polar(1.0, angle))
}

fn lambda_min(h: &ComplexMatrix) -> Result<f64, NumlinError> {
    Ok(hermitian_eigenvalues(h, f64::INFINITY)?.first().copied().unwrap_or(0.0))
}

fn lambda_max(h: &ComplexMatrix) -> Result<f64, NumlinError> {
    Ok(hermitian_eigenvalues(h, f64::INFINITY)?.last().copied().unwrap_or(0.0))
}

/// Sampled boundary of the numerical range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeBoundary {
    pub angles: Vec<f64>,
    /// `(T x_θ, x_θ)` for the top eigenvector `x_θ` of `Re(e^{iθ}T)`.
    pub points: Vec<Complex64>,
    /// `λ_max(Re(e^{iθ}T))`; the half-planes `Re(e^{iθ}z) ≤ support` enclose `W(T)`.
    pub support: Vec<f64>,
}

impl RangeBoundary {
    /// CSV with columns `theta,re,im`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im\n");
        for (theta, z) in self.angles.iter().zip(&self.points) {
            out.push_str(&format!("{},{},{}\n", fmt_f64(*theta), fmt_f64(z.re), fmt_f64(z.im)));
        }
        out
    }

    /// Largest violation of the outer (supporting half-plane) approximation by `z`.
    pub fn outer_violation(&self, z: Complex64) -> f64 {
        self.angles
            .iter()
            .zip(&self.support)
            .map(|(&theta, &s)| (Complex64::from_polar(1.0, theta) * z).re - s)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Sweep `n_angles` equispaced directions θ ∈ [0, 2π) and record the extreme
/// Rayleigh quotient in each direction. The hull of `points` is an inner
/// approximation of `W(T)`; the supporting lines give an outer one.
pub fn range_boundary(t: &ComplexMatrix, n_angles: usize) -> Result<RangeBoundary, OprangeError> {
    t.require_square()?;
    if n_angles < MIN_ANGLES {
        return Err(OprangeError::TooFewAngles { requested: n_angles });
    }
    let angles: Vec<f64> = (0..n_angles).map(|k| 2.0 * PI * k as f64 / n_angles as f64).collect();
    let samples: Result<Vec<(Complex64, f64)>, NumlinError> = angles
        .par_iter()
        .map(|&theta| {
            let h = real_part(&rotated(t, theta))?;
            let eig = hermitian_eigs(&h, f64::INFINITY)?;
            match eig.last() {
                Some(top) => {
                    let q = inner(&t.apply(&top.vector), &top.vector);
                    Ok((q, top.value.re))
                }
                None => Ok((Complex64::new(0.0, 0.0), 0.0)),
            }
        })
        .collect();
    let (points, support) = samples?.into_iter().unzip();
    Ok(RangeBoundary { angles, points, support })
}

fn sector_holds(t: &ComplexMatrix, phi: f64, tol: f64) -> Result<bool, NumlinError> {
    let lower = lambda_min(&real_part(&rotated(t, phi - FRAC_PI_2))?)?;
    let upper = lambda_min(&real_part(&rotated(t, FRAC_PI_2 - phi))?)?;
    Ok(lower >= -tol && upper >= -tol)
}

/// Smallest `φ ∈ [0, π/2]` with `W(T)` inside the sector `|arg z| ≤ φ`, up to
/// `tol` on the rotated Hermitian parts. `None` when `T` is not accretive.
pub fn semi_angle(t: &ComplexMatrix, tol: f64) -> Result<Option<f64>, OprangeError> {
    t.require_square()?;
    if lambda_min(&real_part(t)?)? < -tol {
        return Ok(None);
    }
    if sector_holds(t, 0.0, tol)? {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if sector_holds(t, mid, tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub m_accretive: bool,
    pub m_dissipative: bool,
    pub m_accumulative: bool,
    pub m_sectorial: bool,
}

/// Outcome of [`classify_operator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    /// `λ_min(T_R)`.
    pub accretive_margin: f64,
    pub is_accretive: bool,
    pub semi_angle: Option<f64>,
    /// Angle the class flags were evaluated at.
    pub phi: f64,
    pub class_flags: ClassFlags,
    pub tol: f64,
}

/// Classify `T` against the sector of half-angle `φ`.
///
/// `m_dissipative` refers to `e^{iφ}T` and `m_accumulative` to `e^{−iφ}T`;
/// in finite dimension every matrix is maximal, so the `m-` flags reduce to
/// the sign tests on Hermitian and skew-Hermitian parts.
pub fn classify_operator(t: &ComplexMatrix, phi: f64, tol: f64) -> Result<SectorReport, OprangeError> {
    check_angle(phi)?;
    let margin = lambda_min(&real_part(t)?)?;
    let m_accretive = margin >= -tol;
    let m_dissipative = lambda_min(&imag_part(&rotated(t, phi))?)? >= -tol;
    let m_accumulative = lambda_max(&imag_part(&rotated(t, -phi))?)? <= tol;
    Ok(SectorReport {
        accretive_margin: margin,
        is_accretive: m_accretive,
        semi_angle: semi_angle(t, tol)?,
        phi,
        class_flags: ClassFlags {
            m_accretive,
            m_dissipative,
            m_accumulative,
            m_sectorial: m_accretive && m_dissipative && m_accumulative,
        },
        tol,
    })
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::random::{gaussian_matrix, haar_unitary, seeded, unit_vector};
    use crate::numlin::rayleigh_quotient;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jordan() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0])
    }

    #[test]
    fn parts_of_hermitian_and_skew() {
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(0.5, 0.0)]);
        assert_eq!(real_part(&h).unwrap(), h);
        assert!(imag_part(&h).unwrap().max_abs() < 1e-16);
        let ih = h.scale(c(0.0, 1.0));
        assert!(real_part(&ih).unwrap().max_abs() < 1e-16);
        assert!(imag_part(&ih).unwrap().distance(&h) < 1e-15);
    }

    #[test]
    fn parts_of_upper_triangular() {
        let t = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let tr = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(1.0, 0.0)]);
        let ti = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let (r, i) = (real_part(&t).unwrap(), imag_part(&t).unwrap());
        assert!(r.distance(&tr) < 1e-16);
        assert!(i.distance(&ti) < 1e-16);
        assert!((&r + &i.scale(c(0.0, 1.0))).distance(&t) < 1e-16);
        assert!(real_part(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn boundary_of_normal_diagonal_is_segment() {
        let t = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let b = range_boundary(&t, 720).unwrap();
        // every sample lies on the segment [1, i] and both endpoints are hit,
        // so the hull is the segment itself
        for z in &b.points {
            assert!((z.re + z.im - 1.0).abs() < 1e-6, "{z}");
            assert!(z.re > -1e-6 && z.im > -1e-6);
        }
        let hull_ends = [
            b.points.iter().copied().max_by(|a, b| a.re.total_cmp(&b.re)).unwrap(),
            b.points.iter().copied().max_by(|a, b| a.im.total_cmp(&b.im)).unwrap(),
        ];
        assert!(hausdorff_distance(&hull_ends, &[c(1.0, 0.0), c(0.0, 1.0)]) < 1e-6);
    }

    #[test]
    fn boundary_of_jordan_block_is_circle() {
        let t = jordan();
        let b = range_boundary(&t, 720).unwrap();
        for z in &b.points {
            assert!(((z - c(1.0, 0.0)).norm() - 0.5).abs() < 1e-6);
        }
        // random Rayleigh oracle never leaves the disk and comes close to its edge
        let mut rng = seeded(42);
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            let x = unit_vector(2, &mut rng);
            worst = worst.max((rayleigh_quotient(&t, &x) - c(1.0, 0.0)).norm());
        }
        assert!(worst <= 0.5 + 1e-12 && worst > 0.49);
    }

    #[test]
    fn boundary_of_zero_matrix() {
        let b = range_boundary(&ComplexMatrix::zeros(3, 3), 16).unwrap();
        assert!(b.points.iter().all(|z| z.norm() == 0.0));
        assert!(matches!(range_boundary(&jordan(), 4), Err(OprangeError::TooFewAngles { .. })));
    }

    #[test]
    fn boundary_points_are_extreme_in_their_direction() {
        let t = gaussian_matrix(6, 6, &mut seeded(5));
        let b = range_boundary(&t, 64).unwrap();
        for (k, &theta) in b.angles.iter().enumerate() {
            let rot = Complex64::from_polar(1.0, theta);
            let mine = (rot * b.points[k]).re;
            assert!((mine - b.support[k]).abs() < 1e-12);
            for z in &b.points {
                assert!((rot * z).re <= mine + 1e-12);
            }
        }
    }

    #[test]
    fn boundary_unitary_invariance() {
        let mut rng = seeded(8);
        let t = gaussian_matrix(5, 5, &mut rng);
        let u = haar_unitary(5, &mut rng);
        let similar = &(&u.adjoint() * &t) * &u;
        let b0 = range_boundary(&t, 90).unwrap();
        let b1 = range_boundary(&similar, 90).unwrap();
        assert!(hausdorff_distance(&b0.points, &b1.points) < 1e-8);
    }

    #[test]
    fn semi_angle_examples() {
        let w = Complex64::from_polar(1.0, FRAC_PI_4);
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), w]);
        assert!((semi_angle(&d, 1e-12).unwrap().unwrap() - FRAC_PI_4).abs() < 1e-8);
        assert!((semi_angle(&jordan(), 1e-12).unwrap().unwrap() - FRAC_PI_6).abs() < 1e-6);
        assert_eq!(semi_angle(&ComplexMatrix::identity(2).scale_real(-1.0), 1e-12).unwrap(), None);
        assert_eq!(semi_angle(&ComplexMatrix::zeros(2, 2), 1e-12).unwrap(), Some(0.0));
    }

    #[test]
    fn semi_angle_of_jordan_matches_sampling_oracle() {
        let mut rng = seeded(1);
        let mut max_arg: f64 = 0.0;
        for _ in 0..100_000 {
            let x = unit_vector(2, &mut rng);
            max_arg = max_arg.max(rayleigh_quotient(&jordan(), &x).arg().abs());
        }
        let phi = semi_angle(&jordan(), 1e-12).unwrap().unwrap();
        assert!(max_arg <= phi + 1e-9);
        assert!(phi - max_arg < 1e-2);
    }

    #[test]
    fn semi_angle_is_scale_invariant() {
        let t = crate::relcalc::random_sectorial_operator(6, 0.7, 3).unwrap();
        let a = semi_angle(&t, 1e-12).unwrap().unwrap();
        let b = semi_angle(&t.scale_real(17.5), 1e-12 * 17.5).unwrap().unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn classify_examples() {
        let r = classify_operator(&ComplexMatrix::identity(2), 0.0, 1e-12).unwrap();
        assert!(r.class_flags.m_sectorial && r.class_flags.m_dissipative && r.class_flags.m_accumulative);
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), Complex64::from_polar(1.0, FRAC_PI_4)]);
        let narrow = classify_operator(&d, FRAC_PI_8, 1e-12).unwrap();
        assert!(!narrow.class_flags.m_sectorial);
        assert!(narrow.class_flags.m_accretive);
        assert!(classify_operator(&d, FRAC_PI_4, 1e-12).unwrap().class_flags.m_sectorial);
        assert!(matches!(classify_operator(&d, 2.0, 1e-12), Err(OprangeError::InvalidAngle { .. })));
        let neg = classify_operator(&ComplexMatrix::identity(1).scale_real(-1.0), 0.3, 1e-12).unwrap();
        assert!(!neg.is_accretive && neg.semi_angle.is_none() && !neg.class_flags.m_sectorial);
    }

    #[test]
    fn scalar_matrices_supported() {
        let t = ComplexMatrix::from_diag(&[Complex64::from_polar(2.0, 0.3)]);
        assert!((semi_angle(&t, 1e-14).unwrap().unwrap() - 0.3).abs() < 1e-9);
        let b = range_boundary(&t, 8).unwrap();
        assert!(b.points.iter().all(|z| (z - t[(0, 0)]).norm() < 1e-15));
    }

    #[test]
    fn csv_layout() {
        let b = range_boundary(&ComplexMatrix::identity(1), 8).unwrap();
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,re,im"));
        assert_eq!(lines.count(), 8);
    }
}
