//! Spectral functions λ±(k), γ±(k) and the eigenvector matrices E±(k).
//!
//! Every branch is written as an explicit formula in terms of the principal
//! square root, so no path following is needed at runtime.
//!
//! Focusing: λ±² = k² + q±², cut [−iq±, iq±]. On the cut the principal side is
//! the limit from Re k > 0, where λ± = +√(q±² − (Im k)²).
//!
//! Defocusing: λ±² = k² − q±², cut (−∞, −q±] ∪ [q±, ∞). The principal side is
//! the limit from Im k > 0. Continuity from above forces λ± = −√(k² − q±²) on
//! the left ray; λ± ≈ k in the upper half plane and λ± ≈ −k in the lower one.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn sigma1() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma2() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma3() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Focusing,
    Defocusing,
}

impl Regime {
    /// Sign σ in Q = [[0, q], [σq, 0]].
    pub fn sigma(self) -> f64 {
        match self {
            Regime::Focusing => -1.0,
            Regime::Defocusing => 1.0,
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "focusing" => Ok(Regime::Focusing),
            "defocusing" => Ok(Regime::Defocusing),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Focusing => "focusing",
            Regime::Defocusing => "defocusing",
        })
    }
}

/// Which of the two boundary backgrounds a function refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Plus,
    Minus,
}

/// Side of a branch cut. Off the cut the tag is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Side {
    #[default]
    Principal,
    MinusSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub q_minus: f64,
    pub q_plus: f64,
    pub regime: Regime,
}

impl BoundaryData {
    /// Asymmetric backgrounds, q− > q+ > 0.
    pub fn new(q_minus: f64, q_plus: f64, regime: Regime) -> Result<Self> {
        if !(q_plus > 0.0 && q_minus > q_plus && q_minus.is_finite()) {
            return Err(Error::Config(format!(
                "boundary data needs q_minus > q_plus > 0, got q_minus={q_minus}, q_plus={q_plus}"
            )));
        }
        Ok(Self { q_minus, q_plus, regime })
    }

    /// Equal backgrounds. Only used as the reference path for the symmetric
    /// reduction; the contour then has no Σ0 part.
    pub fn symmetric(q0: f64, regime: Regime) -> Result<Self> {
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(Error::Config(format!("background must be positive, got {q0}")));
        }
        Ok(Self { q_minus: q0, q_plus: q0, regime })
    }

    pub fn is_symmetric(&self) -> bool {
        self.q_minus == self.q_plus
    }

    pub fn q(&self, which: Which) -> f64 {
        match which {
            Which::Plus => self.q_plus,
            Which::Minus => self.q_minus,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.regime.sigma()
    }

    /// Q± = [[0, q±], [σq±, 0]].
    pub fn background_matrix(&self, which: Which) -> Mat2 {
        let q = self.q(which);
        Mat2::new(ZERO, C64::from(q), C64::from(self.sigma() * q), ZERO)
    }

    /// Default branch-point exclusion radius, 1e-6·q+.
    pub fn default_eps_bp(&self) -> f64 {
        1e-6 * self.q_plus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub k: C64,
    pub side: Side,
}

impl SpectralPoint {
    pub fn new(k: C64, side: Side) -> Self {
        Self { k, side }
    }
    pub fn principal(k: C64) -> Self {
        Self { k, side: Side::Principal }
    }
    pub fn minus_side(k: C64) -> Self {
        Self { k, side: Side::MinusSide }
    }
}

/// True when k lies on the closed cut of the branch with amplitude q.
pub fn on_cut(k: C64, q: f64, regime: Regime) -> bool {
    match regime {
        Regime::Focusing => k.re == 0.0 && k.im.abs() <= q,
        Regime::Defocusing => k.im == 0.0 && k.re.abs() >= q,
    }
}

/// λ for background amplitude q at k on the requested side.
pub fn lambda_q(k: C64, side: Side, q: f64, regime: Regime) -> C64 {
    let principal = match regime {
        Regime::Focusing => {
            if k.re == 0.0 && k.im.abs() <= q {
                C64::new((q * q - k.im * k.im).max(0.0).sqrt(), 0.0)
            } else {
                k * (ONE + C64::from(q * q) / (k * k)).sqrt()
            }
        }
        Regime::Defocusing => {
            if k.im == 0.0 && k.re.abs() >= q {
                C64::new(k.re.signum() * (k.re * k.re - q * q).max(0.0).sqrt(), 0.0)
            } else {
                I * (C64::from(q * q) - k * k).sqrt()
            }
        }
    };
    if side == Side::MinusSide && on_cut(k, q, regime) {
        -principal
    } else {
        principal
    }
}

pub fn lambda(point: SpectralPoint, which: Which, bd: &BoundaryData) -> C64 {
    lambda_q(point.k, point.side, bd.q(which), bd.regime)
}

/// dλ/dk = k/λ, valid off the branch points.
pub fn lambda_prime(point: SpectralPoint, which: Which, bd: &BoundaryData) -> C64 {
    point.k / lambda(point, which, bd)
}

fn gamma_from(k: C64, lam: C64) -> C64 {
    2.0 * lam / (lam - k)
}

/// γ = 2λ/(λ − k), the determinant of E. Vanishes at branch points.
pub fn gamma(point: SpectralPoint, which: Which, bd: &BoundaryData) -> C64 {
    gamma_from(point.k, lambda(point, which, bd))
}

/// The defocusing-style expression −2λ/(k − λ); algebraically the same as [`gamma`].
pub fn gamma_alt(point: SpectralPoint, which: Which, bd: &BoundaryData) -> C64 {
    let lam = lambda(point, which, bd);
    -2.0 * lam / (point.k - lam)
}

/// True when |λ| < eps_bp, i.e. the point sits in a branch-point neighbourhood.
pub fn near_branch_point(point: SpectralPoint, which: Which, bd: &BoundaryData, eps_bp: f64) -> bool {
    lambda(point, which, bd).norm() < eps_bp
}

/// γ together with the near-branch-point flag; the value is always returned.
pub fn gamma_flagged(point: SpectralPoint, which: Which, bd: &BoundaryData, eps_bp: f64) -> (C64, bool) {
    (gamma(point, which, bd), near_branch_point(point, which, bd, eps_bp))
}

/// σ3Q±.
pub fn s3q(which: Which, bd: &BoundaryData) -> Mat2 {
    sigma3() * bd.background_matrix(which)
}

/// E = I + i/(k − λ)·σ3Q.
pub fn eigenmatrix(point: SpectralPoint, which: Which, bd: &BoundaryData) -> Mat2 {
    let lam = lambda(point, which, bd);
    Mat2::identity() + s3q(which, bd) * (I / (point.k - lam))
}

/// E⁻¹ through the adjugate, adj(E)/γ.
pub fn eigenmatrix_inverse(point: SpectralPoint, which: Which, bd: &BoundaryData) -> Mat2 {
    let e = eigenmatrix(point, which, bd);
    let g = gamma(point, which, bd);
    Mat2::new(e[(1, 1)], -e[(0, 1)], -e[(1, 0)], e[(0, 0)]) / g
}

/// dE/dk, using λ' = k/λ.
pub fn eigenmatrix_prime(point: SpectralPoint, which: Which, bd: &BoundaryData) -> Mat2 {
    let lam = lambda(point, which, bd);
    let d = point.k - lam;
    let dl = point.k / lam;
    s3q(which, bd) * (-I * (ONE - dl) / (d * d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValue {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub gamma_plus: C64,
    pub gamma_minus: C64,
    pub e_plus: Mat2,
    pub e_minus: Mat2,
}

pub fn branch_value(point: SpectralPoint, bd: &BoundaryData) -> BranchValue {
    BranchValue {
        lambda_plus: lambda(point, Which::Plus, bd),
        lambda_minus: lambda(point, Which::Minus, bd),
        gamma_plus: gamma(point, Which::Plus, bd),
        gamma_minus: gamma(point, Which::Minus, bd),
        e_plus: eigenmatrix(point, Which::Plus, bd),
        e_minus: eigenmatrix(point, Which::Minus, bd),
    }
}

/// Determinant of a 2×2 complex matrix.
pub fn det2(m: &Mat2) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Inverse of a 2×2 complex matrix by the adjugate formula.
pub fn inv2(m: &Mat2) -> Mat2 {
    let d = det2(m);
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / d
}

/// Wronskian det[a, b] of two column vectors.
pub fn wronskian(a: &Vec2, b: &Vec2) -> C64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat2) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// diag(e^{−iλx}, e^{iλx}) = e^{−iλxσ3}.
pub fn phase_diag(lam: C64, x: f64) -> Mat2 {
    let e = (-I * lam * x).exp();
    Mat2::new(e, ZERO, ZERO, (I * lam * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focusing_principal_at_origin() {
        let bd = BoundaryData::new(2.0, 1.0, Regime::Focusing).unwrap();
        let l = lambda(SpectralPoint::principal(ZERO), Which::Plus, &bd);
        assert_eq!(l, C64::new(1.0, 0.0));
    }

    #[test]
    fn branch_points_are_exact_zeros() {
        let bd = BoundaryData::new(2.0, 1.0, Regime::Focusing).unwrap();
        assert_eq!(lambda(SpectralPoint::principal(C64::new(0.0, 1.0)), Which::Plus, &bd), ZERO);
        let bd = BoundaryData::new(2.0, 1.0, Regime::Defocusing).unwrap();
        assert_eq!(lambda(SpectralPoint::principal(C64::new(-2.0, 0.0)), Which::Minus, &bd).norm(), 0.0);
    }
}
