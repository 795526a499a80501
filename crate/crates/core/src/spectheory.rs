//! Resolvent factorization and eigenvalue diagnostics for sectorial matrices.
//!
//! With `S = T_R + α` the identity
//!
//! ```text
//! T + α = S · P · S,    P = S⁻¹ + i·S⁻¹ T_I S⁻¹
//! ```
//!
//! holds for every square `T` once `S` is invertible, and
//! `Re(Px, x) = (y, S y)` with `y = S⁻¹x`. For accretive `T` this gives
//! `Re(Px, x) ≥ α‖y‖²`. Note that this does not bound `Re(Px, x)` below by
//! `α` on unit vectors, so no claim about `W(P)` lying in a shifted sector is
//! checked here, only the inequality above.
//!
//! Eigenvalues of a sectorial `T` lie in the closed numerical range, which
//! yields `1 ≤ |λ|/Re λ ≤ sec φ`. That two-sided bound is what
//! [`sector_spectrum_report`] verifies; the ratio lists let callers study
//! whether the ratio also tends to one along a family.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numlin::random::{seeded, unit_vector};
use crate::numlin::{
    general_eigenvalues, general_eigs, hermitian_eigenvalues, hermitian_eigs, inner, rayleigh_quotient, schatten_norm, singular_values,
    vec_norm, ComplexMatrix, NumlinError,
};
use crate::oprange::{imag_part, real_part, semi_angle, OprangeError};

/// Default number of random probes in [`factorize`].
pub const DEFAULT_PROBES: usize = 256;
/// A shifted matrix with `s_min < SHIFT_SINGULAR_RATIO·s_max` is treated as singular.
pub const SHIFT_SINGULAR_RATIO: f64 = 1e-13;
/// The semi-angle in [`sector_spectrum_report`] is resolved with `tol·ANGLE_TOL_FACTOR`.
pub const ANGLE_TOL_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectheoryError {
    #[error(transparent)]
    Numlin(#[from] NumlinError),
    #[error(transparent)]
    Oprange(#[from] OprangeError),
    #[error("shift α = {alpha} must be positive")]
    InvalidShift { alpha: f64 },
    #[error("shifted matrix is singular at α = {alpha}")]
    SingularShift { alpha: f64 },
    #[error("operator is not sectorial (not accretive)")]
    NotSectorial,
    #[error("operator is not normal: ‖TT^H − T^H T‖ = {defect:.3e}")]
    NotNormal { defect: f64 },
}

impl SpectheoryError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Numlin(e) => e.code(),
            Self::Oprange(e) => e.code(),
            Self::InvalidShift { .. } => "spectheory::InvalidShift",
            Self::SingularShift { .. } => "spectheory::SingularShift",
            Self::NotSectorial => "spectheory::NotSectorial",
            Self::NotNormal { .. } => "spectheory::NotNormal",
        }
    }
}

fn relative_gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = a.frobenius_norm();
    let diff = (a - b).frobenius_norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn invert_shift(m: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix, SpectheoryError> {
    let s = singular_values(m)?;
    let (smax, smin) = (s.first().copied().unwrap_or(1.0), s.last().copied().unwrap_or(1.0));
    if smin <= SHIFT_SINGULAR_RATIO * smax {
        return Err(SpectheoryError::SingularShift { alpha });
    }
    m.inverse().ok_or(SpectheoryError::SingularShift { alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub alpha: f64,
    #[serde(rename = "P")]
    pub p: ComplexMatrix,
    /// `‖T + α − S P S‖_F / ‖T + α‖_F`.
    pub residual: f64,
    /// `min Re(Px, x)/‖S⁻¹x‖²` over the probes.
    pub p_min_real_quotient: f64,
    /// `‖P⁻¹‖₂`, absent when `T + α` is singular.
    pub bracket_inverse_norm: Option<f64>,
    /// `max |Re(Px, x) − (y, S y)|` over the probes.
    pub identity_gap: f64,
    /// Relative gap between `(T + α)⁻¹` and `S⁻¹ P⁻¹ S⁻¹`, absent when `T + α` is singular.
    pub resolvent_residual: Option<f64>,
    pub probes: usize,
}

/// Build `P`, check the factorization, and probe `Re(Px, x)`.
///
/// Probes are `probes` seeded random unit vectors followed by the
/// eigenvectors of the Hermitian part of `P` (which is `S⁻¹`, so these
/// include the exact minimizer of the quotient).
pub fn factorize(t: &ComplexMatrix, alpha: f64, probes: usize, seed: u64) -> Result<FactorizationReport, SpectheoryError> {
    let n = t.require_square()?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(SpectheoryError::InvalidShift { alpha });
    }
    let shift = Complex64::new(alpha, 0.0);
    let s = real_part(t)?.shifted(shift);
    let s_inv = invert_shift(&s, alpha)?;
    let t_i = imag_part(t)?;
    let p = &s_inv + &(&(&s_inv * &t_i) * &s_inv).scale(Complex64::new(0.0, 1.0));

    let t_shift = t.shifted(shift);
    let residual = relative_gap(&t_shift, &(&(&s * &p) * &s));

    let mut rng = seeded(seed);
    let mut vectors: Vec<Vec<Complex64>> = (0..probes).map(|_| unit_vector(n, &mut rng)).collect();
    vectors.extend(hermitian_eigs(&real_part(&p)?, f64::INFINITY)?.into_iter().map(|e| e.vector));

    let mut p_min = f64::INFINITY;
    let mut identity_gap: f64 = 0.0;
    for x in &vectors {
        let y = s_inv.apply(x);
        let re_px = inner(&p.apply(x), x).re;
        let ysy = inner(&y, &s.apply(&y)).re;
        identity_gap = identity_gap.max((re_px - ysy).abs());
        let ny = vec_norm(&y);
        if ny > 0.0 {
            p_min = p_min.min(re_px / (ny * ny));
        }
    }

    let (bracket_inverse_norm, resolvent_residual) = match (p.inverse(), t_shift.inverse()) {
        (Some(p_inv), Some(resolvent)) if p_inv.is_finite() && resolvent.is_finite() => {
            let rebuilt = &(&s_inv * &p_inv) * &s_inv;
            (Some(p_inv.norm2()), Some(relative_gap(&resolvent, &rebuilt)))
        }
        _ => (None, None),
    };

    Ok(FactorizationReport {
        alpha,
        p,
        residual,
        p_min_real_quotient: p_min,
        bracket_inverse_norm,
        identity_gap,
        resolvent_residual,
        probes: vectors.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenProfile {
    pub p: f64,
    pub alpha: f64,
    /// `‖(T + α)⁻¹‖_p`.
    pub lhs: f64,
    /// `‖(T_R + α)⁻¹‖_p`.
    pub rhs: f64,
}

/// Schatten norms of the two resolvents at `-α`, side by side. No constant relating them is asserted.
pub fn resolvent_schatten_profile(t: &ComplexMatrix, alpha: f64, p: f64) -> Result<SchattenProfile, SpectheoryError> {
    t.require_square()?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(SpectheoryError::InvalidShift { alpha });
    }
    let shift = Complex64::new(alpha, 0.0);
    let full = invert_shift(&t.shifted(shift), alpha)?;
    let real = invert_shift(&real_part(t)?.shifted(shift), alpha)?;
    Ok(SchattenProfile {
        p,
        alpha,
        lhs: schatten_norm(&full, p)?,
        rhs: schatten_norm(&real, p)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub semi_angle_used: f64,
    pub sector_violations: usize,
    /// `|λ|/Re λ`; 1 for eigenvalues within `tol` of the origin.
    pub ratio_stats: Vec<f64>,
    pub in_sector: Vec<bool>,
    /// `max |λ − (Tx_λ, x_λ)|` over the eigenpairs.
    pub rayleigh_gap: f64,
    pub tol: f64,
}

impl SpectrumReport {
    /// CSV with columns `re,im,ratio,in_sector`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,ratio,in_sector\n");
        for ((z, r), ok) in self.eigenvalues.iter().zip(&self.ratio_stats).zip(&self.in_sector) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::oprange::fmt_f64(z.re),
                crate::oprange::fmt_f64(z.im),
                crate::oprange::fmt_f64(*r),
                ok
            ));
        }
        out
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratio_stats.iter().copied().fold(0.0, f64::max)
    }
}

/// Eigenvalues of `T` checked against the sector of its own minimal semi-angle.
pub fn sector_spectrum_report(t: &ComplexMatrix, tol: f64) -> Result<SpectrumReport, SpectheoryError> {
    let phi = semi_angle(t, tol * ANGLE_TOL_FACTOR)?.ok_or(SpectheoryError::NotSectorial)?;
    let pairs = general_eigs(t)?;
    let tan = phi.tan();
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut ratio_stats = Vec::with_capacity(pairs.len());
    let mut in_sector = Vec::with_capacity(pairs.len());
    let mut rayleigh_gap: f64 = 0.0;
    for pair in &pairs {
        let lambda = pair.value;
        rayleigh_gap = rayleigh_gap.max((rayleigh_quotient(t, &pair.vector) - lambda).norm());
        let ok = lambda.im.abs() <= tan * lambda.re + tol;
        let ratio = if lambda.norm() <= tol {
            1.0
        } else if lambda.re > 0.0 {
            lambda.norm() / lambda.re
        } else {
            f64::INFINITY
        };
        eigenvalues.push(lambda);
        ratio_stats.push(ratio);
        in_sector.push(ok);
    }
    Ok(SpectrumReport {
        sector_violations: in_sector.iter().filter(|ok| !**ok).count(),
        eigenvalues,
        semi_angle_used: phi,
        ratio_stats,
        in_sector,
        rayleigh_gap,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalCheck {
    /// `max_n |λ_n(T_R) − Re λ_n(T)|` after sorting both ascending.
    pub max_mismatch: f64,
    /// `|λ_n(T)| / λ_n(T_R)`; `None` where `λ_n(T_R) ≤ tol`.
    pub ratio_tail: Vec<Option<f64>>,
    pub normality_defect: f64,
}

impl NormalCheck {
    /// Largest defined ratio with index `≥ from`.
    pub fn tail_max(&self, from: usize) -> Option<f64> {
        self.ratio_tail.iter().skip(from).flatten().copied().reduce(f64::max)
    }
}

/// For normal `T`, `spec(T_R) = {Re λ : λ ∈ spec(T)}` as multisets.
pub fn normal_asymptotics_check(t: &ComplexMatrix, tol: f64) -> Result<NormalCheck, SpectheoryError> {
    t.require_square()?;
    let th = t.adjoint();
    let defect = (&(t * &th) - &(&th * t)).frobenius_norm();
    let scale = t.frobenius_norm();
    if defect > tol * scale * scale {
        return Err(SpectheoryError::NotNormal { defect });
    }
    let lambdas = general_eigenvalues(t)?;
    let mut reals: Vec<f64> = lambdas.iter().map(|z| z.re).collect();
    reals.sort_by(f64::total_cmp);
    let real_spec = hermitian_eigenvalues(&real_part(t)?, f64::INFINITY)?;
    let max_mismatch = reals.iter().zip(&real_spec).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ratio_tail = lambdas
        .iter()
        .zip(&real_spec)
        .map(|(z, &mu)| (mu > tol).then(|| z.norm() / mu))
        .collect();
    Ok(NormalCheck {
        max_mismatch,
        ratio_tail,
        normality_defect: defect,
    })
}
