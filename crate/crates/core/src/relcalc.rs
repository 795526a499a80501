//! Linear relations θ ⊂ ℂⁿ ⊕ ℂⁿ and their Cayley parametrization.
//!
//! A relation is stored as a `2n × k` matrix with orthonormal columns; the
//! top `n` rows hold the `x` components and the bottom `n` rows the `x′`
//! components of the pairs `{x, x′}`. The pairing `(x′, x) = x^H x′` drives
//! every sign test: restricted to `span(basis)` it becomes the `k × k`
//! Hermitian forms `G_R` (real part) and `G_I` (imaginary part).

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::numlin::random::{haar_unitary, random_hermitian, seeded};
use crate::numlin::{hermitian_eigenvalues, orthonormal_basis, singular_values, ComplexMatrix, NumlinError, DEFAULT_RANK_TOL};

/// Cayley denominators with `s_min < SINGULAR_RATIO·max(s_max, 1)` are treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelcalcError {
    #[error(transparent)]
    Numlin(#[from] NumlinError),
    #[error("angle {phi} is outside the admissible range")]
    InvalidAngle { phi: f64 },
    #[error("basis has {rows} rows, expected 2n = {expected}")]
    BadShape { rows: usize, expected: usize },
    #[error("relation is not maximal: {reason}")]
    NotMaximal { reason: String },
    #[error("operator norm {norm:.6e} exceeds 1 + {tol:.1e}")]
    NotContraction { norm: f64, tol: f64 },
}

impl RelcalcError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Numlin(e) => e.code(),
            Self::InvalidAngle { .. } => "relcalc::InvalidAngle",
            Self::BadShape { .. } => "relcalc::BadShape",
            Self::NotMaximal { .. } => "relcalc::NotMaximal",
            Self::NotContraction { .. } => "relcalc::NotContraction",
        }
    }
}

/// Subspace of ℂⁿ ⊕ ℂⁿ in orthonormal canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    n: usize,
    basis: ComplexMatrix,
}

impl LinearRelation {
    /// Span of the columns of a `2n × m` matrix.
    pub fn from_spanning(n: usize, spanning: &ComplexMatrix) -> Result<Self, RelcalcError> {
        if spanning.rows() != 2 * n {
            return Err(RelcalcError::BadShape {
                rows: spanning.rows(),
                expected: 2 * n,
            });
        }
        Ok(Self {
            n,
            basis: orthonormal_basis(spanning, DEFAULT_RANK_TOL)?,
        })
    }

    /// Accepts `basis` as-is when its columns are already orthonormal to 1e−12.
    fn from_maybe_orthonormal(n: usize, basis: ComplexMatrix) -> Result<Self, RelcalcError> {
        if basis.rows() != 2 * n {
            return Err(RelcalcError::BadShape {
                rows: basis.rows(),
                expected: 2 * n,
            });
        }
        let gram = &basis.adjoint() * &basis;
        if gram.cols() == 0 || (&gram - &ComplexMatrix::identity(gram.cols())).max_abs() <= 1e-12 {
            Ok(Self { n, basis })
        } else {
            Self::from_spanning(n, &basis)
        }
    }

    pub fn space_dim(&self) -> usize {
        self.n
    }

    /// Dimension `k` of the subspace.
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// `x` components of the basis (`n × k`).
    pub fn domain_block(&self) -> ComplexMatrix {
        self.basis.block(0, 0, self.n, self.dim())
    }

    /// `x′` components of the basis (`n × k`).
    pub fn value_block(&self) -> ComplexMatrix {
        self.basis.block(self.n, 0, self.n, self.dim())
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * &self.basis.adjoint()
    }

    /// `‖P_self − P_other‖₂`; 0 iff the subspaces coincide.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.projector().distance(&other.projector())
    }

    /// `G_R = ½(X^H X′ + X′^H X)`, the form of `Re(x′, x)` on the span.
    pub fn real_form(&self) -> ComplexMatrix {
        let (x, xp) = (self.domain_block(), self.value_block());
        let cross = &x.adjoint() * &xp;
        (&cross + &cross.adjoint()).scale_real(0.5)
    }

    /// `G_I = (X^H X′ − X′^H X)/(2i)`, the form of `Im(x′, x)` on the span.
    pub fn imag_form(&self) -> ComplexMatrix {
        let (x, xp) = (self.domain_block(), self.value_block());
        let cross = &x.adjoint() * &xp;
        (&cross - &cross.adjoint()).scale(Complex64::new(0.0, -0.5))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationJson {
    n: usize,
    basis: ComplexMatrix,
}

impl Serialize for LinearRelation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RelationJson {
            n: self.n,
            basis: self.basis.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinearRelation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RelationJson::deserialize(deserializer)?;
        LinearRelation::from_maybe_orthonormal(raw.n, raw.basis).map_err(serde::de::Error::custom)
    }
}

/// Graph `{{x, Tx}}` of a square matrix.
pub fn relation_from_graph(t: &ComplexMatrix) -> Result<LinearRelation, RelcalcError> {
    let n = t.require_square()?;
    LinearRelation::from_spanning(n, &ComplexMatrix::vstack(&ComplexMatrix::identity(n), t))
}

/// `θ_φ = {{x, e^{iφ}x′}}`. The rotation is unitary on ℂⁿ ⊕ ℂⁿ, so the basis stays orthonormal.
pub fn rotate_relation(theta: &LinearRelation, phi: f64) -> LinearRelation {
    let n = theta.n;
    let w = Complex64::from_polar(1.0, phi);
    let mut basis = theta.basis.clone();
    for i in n..2 * n {
        for j in 0..basis.cols() {
            basis[(i, j)] *= w;
        }
    }
    LinearRelation { n, basis }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationFlags {
    pub accretive: bool,
    pub dissipative: bool,
    pub accumulative: bool,
    pub maximal: bool,
    /// `λ_min(G_R)`.
    pub accretive_margin: f64,
    /// `λ_min(G_I)`.
    pub dissipative_margin: f64,
    /// `λ_min(−G_I)`.
    pub accumulative_margin: f64,
}

fn form_min(g: &ComplexMatrix) -> Result<f64, NumlinError> {
    // an empty span satisfies every sign condition
    Ok(hermitian_eigenvalues(g, f64::INFINITY)?.first().copied().unwrap_or(0.0))
}

/// Sign tests of the restricted forms plus the dimension count `k = n`.
pub fn classify_relation(theta: &LinearRelation, tol: f64) -> Result<RelationFlags, RelcalcError> {
    let gr = theta.real_form();
    let gi = theta.imag_form();
    let accretive_margin = form_min(&gr)?;
    let dissipative_margin = form_min(&gi)?;
    let accumulative_margin = form_min(&gi.scale_real(-1.0))?;
    Ok(RelationFlags {
        accretive: accretive_margin >= -tol,
        dissipative: dissipative_margin >= -tol,
        accumulative: accumulative_margin >= -tol,
        maximal: theta.dim() == theta.n,
        accretive_margin,
        dissipative_margin,
        accumulative_margin,
    })
}

fn check_sector_angle(phi: f64) -> Result<(), RelcalcError> {
    if (0.0..=FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(RelcalcError::InvalidAngle { phi })
    }
}

/// m-sectoriality through rotations: θ m-accretive, θ_φ m-dissipative, θ_{−φ} m-accumulative.
pub fn is_m_sectorial(theta: &LinearRelation, phi: f64, tol: f64) -> Result<bool, RelcalcError> {
    check_sector_angle(phi)?;
    let base = classify_relation(theta, tol)?;
    if !(base.accretive && base.maximal) {
        return Ok(false);
    }
    let plus = classify_relation(&rotate_relation(theta, phi), tol)?;
    let minus = classify_relation(&rotate_relation(theta, -phi), tol)?;
    Ok(plus.dissipative && minus.accumulative)
}

/// m-sectoriality through the sector inequality `cos φ |Im(x′, x)| ≤ sin φ Re(x′, x)`,
/// read directly as positivity of `sin φ·G_R ± cos φ·G_I` together with
/// accretivity and `k = n`. Independent of [`rotate_relation`].
pub fn satisfies_sector_inequality(theta: &LinearRelation, phi: f64, tol: f64) -> Result<bool, RelcalcError> {
    check_sector_angle(phi)?;
    if theta.dim() != theta.n {
        return Ok(false);
    }
    let gr = theta.real_form();
    let gi = theta.imag_form();
    let (s, c) = phi.sin_cos();
    let upper = &gr.scale_real(s) - &gi.scale_real(c);
    let lower = &gr.scale_real(s) + &gi.scale_real(c);
    Ok(form_min(&gr)? >= -tol && form_min(&upper)? >= -tol && form_min(&lower)? >= -tol)
}

/// The contractions `K, V, W` attached to a relation at angle `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionTriple {
    #[serde(rename = "K")]
    pub k: ComplexMatrix,
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
    #[serde(rename = "W")]
    pub w: ComplexMatrix,
    pub angle: f64,
}

impl ContractionTriple {
    /// Operator norms `(‖K‖, ‖V‖, ‖W‖)`.
    pub fn norms(&self) -> (f64, f64, f64) {
        (self.k.norm2(), self.v.norm2(), self.w.norm2())
    }

    pub fn all_contractive(&self, tol: f64) -> bool {
        let (k, v, w) = self.norms();
        k <= 1.0 + tol && v <= 1.0 + tol && w <= 1.0 + tol
    }
}

fn solve_right(numerator: &ComplexMatrix, denominator: &ComplexMatrix, which: &str) -> Result<ComplexMatrix, RelcalcError> {
    let s = singular_values(denominator)?;
    let (smax, smin) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    let singular = || RelcalcError::NotMaximal {
        reason: format!(
            "{which} denominator is singular (s_min/s_max = {:.3e})",
            if smax > 0.0 { smin / smax } else { 0.0 }
        ),
    };
    if s.is_empty() {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    // the basis is orthonormal, so 1 is the natural scale when every s_j is tiny
    if smin < SINGULAR_RATIO * smax.max(1.0) {
        return Err(singular());
    }
    let inv = denominator.inverse().ok_or_else(singular)?;
    Ok(numerator * &inv)
}

/// Cayley transforms of θ at angle `φ`:
///
/// * `K(x + x′) = x′ − x`
/// * `V(e^{iφ}x′ + ix) = e^{iφ}x′ − ix`
/// * `W(e^{−iφ}x′ − ix) = e^{−iφ}x′ + ix`
///
/// The angle is not restricted so that the transforms can be probed below
/// the minimal semi-angle; they are contractions exactly when θ is
/// m-sectorial with that angle.
pub fn cayley_triple(theta: &LinearRelation, phi: f64) -> Result<ContractionTriple, RelcalcError> {
    if !phi.is_finite() {
        return Err(RelcalcError::InvalidAngle { phi });
    }
    if theta.dim() != theta.n {
        return Err(RelcalcError::NotMaximal {
            reason: format!("dimension {} differs from n = {}", theta.dim(), theta.n),
        });
    }
    let x = theta.domain_block();
    let xp = theta.value_block();
    let i = Complex64::new(0.0, 1.0);
    let ep = Complex64::from_polar(1.0, phi);
    let em = ep.conj();

    let k = solve_right(&(&xp - &x), &(&x + &xp), "K")?;
    let v = solve_right(&(&xp.scale(ep) - &x.scale(i)), &(&xp.scale(ep) + &x.scale(i)), "V")?;
    let w = solve_right(&(&xp.scale(em) + &x.scale(i)), &(&xp.scale(em) - &x.scale(i)), "W")?;
    Ok(ContractionTriple { k, v, w, angle: phi })
}

/// Inverse Cayley map: `θ = span [(I − K)/2; (I + K)/2]`.
pub fn relation_from_contraction(k: &ComplexMatrix, tol: f64) -> Result<LinearRelation, RelcalcError> {
    let n = k.require_square()?;
    let norm = k.norm2();
    if norm > 1.0 + tol {
        return Err(RelcalcError::NotContraction { norm, tol });
    }
    let id = ComplexMatrix::identity(n);
    let top = (&id - k).scale_real(0.5);
    let bottom = (&id + k).scale_real(0.5);
    LinearRelation::from_spanning(n, &ComplexMatrix::vstack(&top, &bottom))
}

/// `B^H (I + iX) B` with `B` having singular values in `[1/2, 2]` and `X`
/// Hermitian with `‖X‖ = tan φ`, so the semi-angle is exactly `φ`:
/// `(Tx, x) = ‖Bx‖² + i(XBx, Bx)`.
pub fn random_sectorial_operator(n: usize, phi: f64, seed: u64) -> Result<ComplexMatrix, RelcalcError> {
    if !(0.0..FRAC_PI_2).contains(&phi) {
        return Err(RelcalcError::InvalidAngle { phi });
    }
    let mut rng = seeded(seed);
    let u = haar_unitary(n, &mut rng);
    let v = haar_unitary(n, &mut rng);
    let s: Vec<f64> = (0..n).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    let b = &(&u * &ComplexMatrix::from_real_diag(&s)) * &v;

    let raw = random_hermitian(n, &mut rng);
    let raw_norm = raw.norm2();
    let x = if phi == 0.0 || raw_norm == 0.0 {
        ComplexMatrix::zeros(n, n)
    } else {
        raw.scale_real(phi.tan() / raw_norm)
    };
    let core = &ComplexMatrix::identity(n) + &x.scale(Complex64::new(0.0, 1.0));
    Ok(&(&b.adjoint() * &core) * &b)
}

/// Graph of [`random_sectorial_operator`].
pub fn random_sectorial_relation(n: usize, phi: f64, seed: u64) -> Result<LinearRelation, RelcalcError> {
    relation_from_graph(&random_sectorial_operator(n, phi, seed)?)
}
