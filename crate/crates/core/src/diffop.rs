//! First-order operator-differential expressions `l(u) = u′ + Au` on
//! `L²((a, b); ℂᵈ)`.
//!
//! The test family
//!
//! ```text
//! u_n(t) = (2(b−a))^{-1/2} · (exp(2nπi(t−a)/(b−a)) − 1) · f,   ‖f‖ = 1
//! ```
//!
//! has unit norm and vanishes at both endpoints, so it satisfies
//! `u(a) = K u(b)` for every contraction `K` at once. Its Rayleigh quotient is
//! `(Af, f) + i·nπ/(b−a)`, which leaves every sector `|arg z| ≤ φ < π/2` as
//! `n` grows whenever `Re(Af, f) > 0`.
//!
//! The ratio `|Im|/Re` uses `Re(Af, f)` as denominator, which is what the
//! quotient identity produces; `‖Af‖²` is a different number in general.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::numlin::{hermitian_eigenvalues, inner, vec_norm, ComplexMatrix, NumlinError};
use crate::oprange::{fmt_f64, real_part};

/// Quadrature grid rule: at least this many intervals per unit of `n`.
pub const POINTS_PER_MODE: usize = 64;
pub const MIN_GRID_POINTS: usize = 16;
/// Boundary contractions may exceed norm one by this much.
pub const CONTRACTION_SLACK: f64 = 1e-10;
/// Intervals used by the separable-probe quadrature in [`accretivity_equivalence_check`].
pub const PROBE_INTERVALS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffopError {
    #[error(transparent)]
    Numlin(#[from] NumlinError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("direction f must be a unit vector of length {dim}, got norm {norm} and length {len}")]
    BadDirection { dim: usize, len: usize, norm: f64 },
    #[error("mode index must be at least 1")]
    BadIndex,
    #[error("grid of {grid} points is too coarse for n = {n}; need at least {required}")]
    UnderResolved { grid: usize, n: usize, required: usize },
    #[error("Re(Af, f) = {re:.3e} is not positive; choose another direction f")]
    DegenerateDirection { re: f64 },
}

impl DiffopError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Numlin(e) => e.code(),
            Self::InvalidProblem(_) => "diffop::InvalidProblem",
            Self::BadDirection { .. } => "diffop::BadDirection",
            Self::BadIndex => "diffop::BadIndex",
            Self::UnderResolved { .. } => "diffop::UnderResolved",
            Self::DegenerateDirection { .. } => "diffop::DegenerateDirection",
        }
    }
}

/// Interval, coefficient, boundary contraction and discretization sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffOpProblem {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub coefficient: ComplexMatrix,
    /// Boundary condition `u(a) = K u(b)`.
    #[serde(rename = "K")]
    pub boundary: ComplexMatrix,
    pub grid_points: usize,
    pub basis_size: usize,
}

impl DiffOpProblem {
    pub fn new(
        a: f64,
        b: f64,
        coefficient: ComplexMatrix,
        boundary: ComplexMatrix,
        grid_points: usize,
        basis_size: usize,
    ) -> Result<Self, DiffopError> {
        let p = Self {
            a,
            b,
            coefficient,
            boundary,
            grid_points,
            basis_size,
        };
        p.validate()?;
        Ok(p)
    }

    /// Problem with `K = 0`, the default boundary contraction.
    pub fn with_coefficient(a: f64, b: f64, coefficient: ComplexMatrix) -> Result<Self, DiffopError> {
        let d = coefficient.rows();
        Self::new(a, b, coefficient, ComplexMatrix::zeros(d, d), 1024, 8)
    }

    pub fn validate(&self) -> Result<(), DiffopError> {
        let bad = |msg: String| Err(DiffopError::InvalidProblem(msg));
        if !(self.a.is_finite() && self.b.is_finite() && self.b > self.a) {
            return bad(format!("need finite a < b, got ({}, {})", self.a, self.b));
        }
        let d = self.coefficient.require_square()?;
        if d == 0 {
            return bad("coefficient must be at least 1x1".into());
        }
        if self.boundary.rows() != d || self.boundary.cols() != d {
            return bad(format!("K must be {d}x{d}"));
        }
        let kn = self.boundary.norm2();
        if kn > 1.0 + CONTRACTION_SLACK {
            return bad(format!("K has norm {kn}, not a contraction"));
        }
        if self.grid_points < MIN_GRID_POINTS {
            return bad(format!("grid_points must be ≥ {MIN_GRID_POINTS}"));
        }
        if self.basis_size < 1 {
            return bad("basis_size must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn dim(&self) -> usize {
        self.coefficient.rows()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemJson {
    a: f64,
    b: f64,
    #[serde(rename = "A")]
    coefficient: ComplexMatrix,
    #[serde(rename = "K")]
    boundary: ComplexMatrix,
    grid_points: usize,
    basis_size: usize,
}

impl<'de> Deserialize<'de> for DiffOpProblem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = ProblemJson::deserialize(deserializer)?;
        DiffOpProblem::new(r.a, r.b, r.coefficient, r.boundary, r.grid_points, r.basis_size).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Quadrature,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Quadrature => "quadrature",
        }
    }
}

/// `(L̃u_n, u_n)` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighSample {
    pub n: usize,
    pub quotient: Complex64,
    /// `|Im q| / Re q`; `None` encodes an unbounded ratio (`Re q ≤ 0`).
    pub im_re_ratio: Option<f64>,
    pub source: Source,
    /// `‖u_n‖²` as evaluated by the same method.
    pub norm_squared: f64,
    /// `max(|u_n(a)|, |u_n(b)|)`.
    pub endpoint_max: f64,
}

impl RayleighSample {
    fn new(n: usize, quotient: Complex64, source: Source, norm_squared: f64, endpoint_max: f64) -> Self {
        let im_re_ratio = (quotient.re > 0.0).then(|| quotient.im.abs() / quotient.re);
        Self {
            n,
            quotient,
            im_re_ratio,
            source,
            norm_squared,
            endpoint_max,
        }
    }

    /// `arctan(|Im q|/Re q)`: no sector of smaller half-angle contains `q`.
    pub fn angle_lower_bound(&self) -> f64 {
        self.im_re_ratio.map_or(PI / 2.0, f64::atan)
    }
}

fn check_direction(prob: &DiffOpProblem, f: &[Complex64]) -> Result<(), DiffopError> {
    let norm = vec_norm(f);
    if f.len() != prob.dim() || (norm - 1.0).abs() > 1e-10 {
        return Err(DiffopError::BadDirection {
            dim: prob.dim(),
            len: f.len(),
            norm,
        });
    }
    Ok(())
}

/// `(Af, f) + i·nπ/(b − a)`.
pub fn analytic_quotient(prob: &DiffOpProblem, f: &[Complex64], n: usize) -> Result<RayleighSample, DiffopError> {
    check_direction(prob, f)?;
    if n == 0 {
        return Err(DiffopError::BadIndex);
    }
    let af = inner(&prob.coefficient.apply(f), f);
    let q = af + Complex64::new(0.0, n as f64 * PI / prob.length());
    Ok(RayleighSample::new(n, q, Source::Analytic, 1.0, 0.0))
}

/// Composite Simpson rule on `intervals` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, intervals: usize) -> Complex64 {
    let m = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for j in 1..m {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + h * j as f64) * w;
    }
    acc * (h / 3.0)
}

/// The test mode and its derivative at `t`, as vectors in ℂᵈ.
fn mode_and_derivative(prob: &DiffOpProblem, f: &[Complex64], n: usize, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let len = prob.length();
    let c = 1.0 / (2.0 * len).sqrt();
    let omega = 2.0 * n as f64 * PI / len;
    // reduce the phase to one period so u(b) = 0 holds to roundoff in t only
    let cycles = (n as f64 * (t - prob.a) / len).fract();
    let e = Complex64::from_polar(1.0, 2.0 * PI * cycles);
    let u_scale = (e - 1.0) * c;
    let du_scale = e * Complex64::new(0.0, omega) * c;
    (f.iter().map(|z| z * u_scale).collect(), f.iter().map(|z| z * du_scale).collect())
}

/// `(u_n′ + A u_n, u_n)` by composite Simpson on `grid_points` intervals.
pub fn quadrature_quotient(prob: &DiffOpProblem, f: &[Complex64], n: usize) -> Result<RayleighSample, DiffopError> {
    quadrature_quotient_on(prob, f, n, prob.grid_points)
}

fn quadrature_quotient_on(prob: &DiffOpProblem, f: &[Complex64], n: usize, grid: usize) -> Result<RayleighSample, DiffopError> {
    check_direction(prob, f)?;
    if n == 0 {
        return Err(DiffopError::BadIndex);
    }
    let required = POINTS_PER_MODE * n;
    if grid < required {
        return Err(DiffopError::UnderResolved { grid, n, required });
    }
    let a_mat = &prob.coefficient;
    let q = simpson(
        |t| {
            let (u, du) = mode_and_derivative(prob, f, n, t);
            let au = a_mat.apply(&u);
            let lu: Vec<Complex64> = du.iter().zip(&au).map(|(x, y)| x + y).collect();
            inner(&lu, &u)
        },
        prob.a,
        prob.b,
        grid,
    );
    let norm_sq = simpson(
        |t| {
            let (u, _) = mode_and_derivative(prob, f, n, t);
            inner(&u, &u)
        },
        prob.a,
        prob.b,
        grid,
    )
    .re;
    let endpoint = |t: f64| vec_norm(&mode_and_derivative(prob, f, n, t).0);
    let endpoint_max = endpoint(prob.a).max(endpoint(prob.b));
    Ok(RayleighSample::new(n, q, Source::Quadrature, norm_sq, endpoint_max))
}

/// Smallest `n` guaranteed to push the quotient outside the sector `|arg z| ≤ φ`.
///
/// From `|Im q_n| ≥ nπ/L − |Im(Af, f)|`; reduces to `⌈tan φ·Re(Af,f)·L/π⌉ + 1`
/// when `(Af, f)` is real.
pub fn obstruction_index(af: Complex64, length: f64, phi: f64) -> usize {
    ((phi.tan() * af.re + af.im.abs()) * length / PI).ceil() as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// Analytic and quadrature sample for each `n = 1..=n_max`, in that order.
    pub samples: Vec<RayleighSample>,
    /// `φ_lb(n) = arctan(|Im q_n|/Re q_n)` from the analytic quotient.
    pub phi_lb: Vec<f64>,
    pub af: Complex64,
    /// `A = A^H ≥ 0` and `Af ≠ 0`, the exact hypothesis under which no m-sectorial extension exists.
    pub hermitian_psd_hypothesis: bool,
    /// Every test mode vanishes at both endpoints, so the bound holds for every boundary contraction `K`.
    pub boundary_independent: bool,
}

impl ObstructionReport {
    /// First `n` with `φ_lb(n) > phi`.
    pub fn first_exceeding(&self, phi: f64) -> Option<usize> {
        self.phi_lb.iter().position(|&x| x > phi).map(|i| i + 1)
    }

    /// True when the sweep rules out every extension with semi-angle `phi`.
    pub fn rules_out(&self, phi: f64) -> bool {
        self.phi_lb.last().is_some_and(|&x| x > phi)
    }

    pub fn conclusion(&self, phi: f64) -> String {
        match self.first_exceeding(phi) {
            Some(n) => format!(
                "no extension with boundary condition u(a) = Ku(b) is m-sectorial with semi-angle {phi}: mode n = {n} has arg > {phi}"
            ),
            None => format!("sweep did not exceed semi-angle {phi}; increase n_max"),
        }
    }

    /// CSV with columns `n,re,im,ratio,phi_lb,source`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im,ratio,phi_lb,source\n");
        for s in &self.samples {
            let ratio = s.im_re_ratio.map_or_else(|| "inf".to_string(), fmt_f64);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.n,
                fmt_f64(s.quotient.re),
                fmt_f64(s.quotient.im),
                ratio,
                fmt_f64(s.angle_lower_bound()),
                s.source.as_str()
            ));
        }
        out
    }
}

/// Sample `n = 1..=n_max` analytically and by quadrature. The quadrature
/// grid for mode `n` is `max(grid_points, 64·n)`.
pub fn obstruction_sweep(prob: &DiffOpProblem, f: &[Complex64], n_max: usize, tol: f64) -> Result<ObstructionReport, DiffopError> {
    check_direction(prob, f)?;
    let af = inner(&prob.coefficient.apply(f), f);
    if af.re <= tol {
        return Err(DiffopError::DegenerateDirection { re: af.re });
    }
    let pairs: Result<Vec<(RayleighSample, RayleighSample)>, DiffopError> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let grid = prob.grid_points.max(POINTS_PER_MODE * n);
            Ok((analytic_quotient(prob, f, n)?, quadrature_quotient_on(prob, f, n, grid)?))
        })
        .collect();
    let pairs = pairs?;
    let phi_lb = pairs.iter().map(|(an, _)| an.angle_lower_bound()).collect();
    let boundary_independent = pairs.iter().all(|(_, q)| q.endpoint_max <= 1e-12);
    let a = &prob.coefficient;
    let hermitian = (a - &a.adjoint()).max_abs() <= tol * a.max_abs().max(1.0);
    let psd = hermitian && hermitian_eigenvalues(&real_part(a)?, f64::INFINITY)?[0] >= -tol;
    let af_nonzero = vec_norm(&a.apply(f)) > tol;
    Ok(ObstructionReport {
        samples: pairs.into_iter().flat_map(|(x, y)| [x, y]).collect(),
        phi_lb,
        af,
        hermitian_psd_hypothesis: psd && af_nonzero,
        boundary_independent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GalerkinBasis {
    /// `√(2/L)·sin(kπ(t−a)/L)`, `k = 1..m`.
    Sine,
}

/// `√(2/L)·sin(kπ(t−a)/L)` and its derivative.
pub fn sine_mode(k: usize, a: f64, b: f64, t: f64) -> (f64, f64) {
    let len = b - a;
    let w = k as f64 * PI / len;
    let c = (2.0 / len).sqrt();
    let s = w * (t - a);
    (c * s.sin(), c * w * s.cos())
}

/// `D_{lk} = (φ_k′, φ_l)` for the sine basis: `4kl/(L(l²−k²))` when `l + k` is odd, zero otherwise.
pub fn derivative_block(m: usize, length: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |l, k| {
        let (l, k) = (l as f64 + 1.0, k as f64 + 1.0);
        let odd = (l + k) as usize % 2 == 1;
        let v = if odd { 4.0 * k * l / (length * (l * l - k * k)) } else { 0.0 };
        Complex64::new(v, 0.0)
    })
}

/// Matrix of `(l(u), v)` on the tensor basis `φ_k ⊗ e_j`, index `k·d + j`:
/// `D ⊗ I_d + I_m ⊗ A`.
pub fn galerkin_matrix(prob: &DiffOpProblem, basis: GalerkinBasis, m: usize) -> ComplexMatrix {
    let GalerkinBasis::Sine = basis;
    let d = prob.dim();
    let dk = derivative_block(m, prob.length()).kron(&ComplexMatrix::identity(d));
    &dk + &ComplexMatrix::identity(m).kron(&prob.coefficient)
}

/// Matrix of the formal adjoint `l⁺(v) = −v′ + A^H v` on the same basis: `−D ⊗ I_d + I_m ⊗ A^H`.
pub fn galerkin_adjoint_matrix(prob: &DiffOpProblem, basis: GalerkinBasis, m: usize) -> ComplexMatrix {
    let GalerkinBasis::Sine = basis;
    let d = prob.dim();
    let dk = derivative_block(m, prob.length())
        .scale_real(-1.0)
        .kron(&ComplexMatrix::identity(d));
    &dk + &ComplexMatrix::identity(m).kron(&prob.coefficient.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccretivityEquivalence {
    /// Galerkin margin equals the coefficient margin within `tol`, and both give the same accretivity verdict.
    pub forward: bool,
    /// `Re(Lu, u) = ‖φ‖²·Re(Af, f)` on every separable probe, to 1e−8.
    pub backward: bool,
    /// `λ_min` of the Hermitian part of the Galerkin matrix.
    pub galerkin_margin: f64,
    /// `λ_min(A_R)`.
    pub coefficient_margin: f64,
    pub galerkin_accretive: bool,
    pub coefficient_accretive: bool,
    /// `max |Herm(G) − I_m ⊗ A_R|`.
    pub hermitian_part_gap: f64,
    pub max_probe_gap: f64,
}

type Profile = fn(f64) -> (Complex64, Complex64);

/// Scalar profiles on `s ∈ [0, 1]` vanishing at both ends, with derivatives in `s`.
const PROFILES: [Profile; 3] = [
    |s| (Complex64::new(s * (1.0 - s), 0.0), Complex64::new(1.0 - 2.0 * s, 0.0)),
    |s| {
        let e = Complex64::from_polar(1.0, 3.0 * s);
        let sin = (PI * s).sin();
        (e * sin, e * (PI * (PI * s).cos() + Complex64::new(0.0, 3.0) * sin))
    },
    |s| (Complex64::new(s * s * (1.0 - s), 0.0), Complex64::new(2.0 * s - 3.0 * s * s, 0.0)),
];

/// Galerkin accretivity versus coefficient accretivity, plus separable-probe identities.
pub fn accretivity_equivalence_check(
    a_mat: &ComplexMatrix,
    a: f64,
    b: f64,
    m: usize,
    tol: f64,
) -> Result<AccretivityEquivalence, DiffopError> {
    if m < 2 {
        return Err(DiffopError::InvalidProblem("basis size must be ≥ 2".into()));
    }
    let prob = DiffOpProblem::with_coefficient(a, b, a_mat.clone())?;
    let d = prob.dim();
    let g = galerkin_matrix(&prob, GalerkinBasis::Sine, m);
    let herm = real_part(&g)?;
    let a_r = real_part(a_mat)?;
    let hermitian_part_gap = (&herm - &ComplexMatrix::identity(m).kron(&a_r)).max_abs();
    let galerkin_margin = hermitian_eigenvalues(&herm, f64::INFINITY)?[0];
    let coefficient_margin = hermitian_eigenvalues(&a_r, f64::INFINITY)?[0];
    let galerkin_accretive = galerkin_margin >= -tol;
    let coefficient_accretive = coefficient_margin >= -tol;
    let forward = (galerkin_margin - coefficient_margin).abs() <= tol && galerkin_accretive == coefficient_accretive;

    let len = prob.length();
    let mut directions: Vec<Vec<Complex64>> = (0..d)
        .map(|j| (0..d).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    directions.push(vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]);

    let mut max_probe_gap: f64 = 0.0;
    for profile in PROFILES {
        let norm_sq = simpson(|t| Complex64::new(profile((t - a) / len).0.norm_sqr(), 0.0), a, b, PROBE_INTERVALS).re;
        for f in &directions {
            let af = a_mat.apply(f);
            let lhs = simpson(
                |t| {
                    let (phi, dphi) = profile((t - a) / len);
                    let dphi = dphi / len;
                    let lu: Vec<Complex64> = f.iter().zip(&af).map(|(fi, afi)| fi * dphi + afi * phi).collect();
                    let u: Vec<Complex64> = f.iter().map(|fi| fi * phi).collect();
                    inner(&lu, &u)
                },
                a,
                b,
                PROBE_INTERVALS,
            )
            .re;
            let rhs = norm_sq * inner(&af, f).re;
            max_probe_gap = max_probe_gap.max((lhs - rhs).abs());
        }
    }
    Ok(AccretivityEquivalence {
        forward,
        backward: max_probe_gap <= 1e-8,
        galerkin_margin,
        coefficient_margin,
        galerkin_accretive,
        coefficient_accretive,
        hermitian_part_gap,
        max_probe_gap,
    })
}
