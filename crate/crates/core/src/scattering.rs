//! Scattering matrix, reflection coefficients, discrete spectrum and norming
//! constants, all from Wronskians of Jost columns at a matching abscissa.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{
    eigenmatrix, gamma, inv2, lambda, wronskian, BoundaryData, Mat2, Regime, SpectralPoint, Vec2, Which, C64, I,
};
use crate::contour::{Contour, PanelSpec};
use crate::error::{Error, Result};
use crate::jost::{column_admissible, jost_column, JostOptions};
use crate::profile::PotentialProfile;

#[derive(Debug, Clone, Copy)]
pub struct ScatteringOptions {
    pub jost: JostOptions,
    pub x_match: f64,
    /// Denominator floor for ρ and ρ̃.
    pub rho_floor: f64,
    pub root_tol: f64,
    /// Allowed componentwise mismatch of the ratio φ−,1/φ+,2 at an eigenvalue.
    pub proportional_tol: f64,
    /// Focusing search box half-width in units of q−.
    pub search_factor: f64,
}

impl ScatteringOptions {
    pub fn for_boundary(bd: &BoundaryData) -> Self {
        Self {
            jost: JostOptions::for_boundary(bd),
            x_match: 0.0,
            rho_floor: 1e-12,
            root_tol: 1e-10,
            proportional_tol: 1e-6,
            search_factor: 3.0,
        }
    }
}

/// Scattering entries at one spectral point. Entries whose Jost columns are not
/// both bounded at this k are absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSample {
    pub point: SpectralPoint,
    pub s11: Option<C64>,
    pub s12: Option<C64>,
    pub s21: Option<C64>,
    pub s22: Option<C64>,
    pub rho: Option<C64>,
    pub rho_tilde: Option<C64>,
}

impl ScatteringSample {
    /// Builds the sample from whichever entries exist, filling ρ = s21/s11 and
    /// ρ̃ = s12/s22 when the denominators clear the floor.
    pub fn from_entries(point: SpectralPoint, s: [Option<C64>; 4], floor: f64) -> Self {
        let ratio = |n: Option<C64>, d: Option<C64>| match (n, d) {
            (Some(n), Some(d)) if d.norm() > floor => Some(n / d),
            _ => None,
        };
        Self { point, s11: s[0], s12: s[1], s21: s[2], s22: s[3], rho: ratio(s[2], s[0]), rho_tilde: ratio(s[1], s[3]) }
    }

    pub fn entries(&self) -> [Option<C64>; 4] {
        [self.s11, self.s12, self.s21, self.s22]
    }

    /// det S when all four entries are present.
    pub fn det(&self) -> Option<C64> {
        Some(self.s11? * self.s22? - self.s12? * self.s21?)
    }

    /// Both ρ and ρ̃ requested but a denominator fell below the floor.
    pub fn is_singularity_candidate(&self) -> bool {
        (self.s11.is_some() && self.s21.is_some() && self.rho.is_none())
            || (self.s22.is_some() && self.s12.is_some() && self.rho_tilde.is_none())
    }
}

/// φ column at x_m.
fn phi_column(profile: &PotentialProfile, point: SpectralPoint, which: Which, col: usize, opts: &ScatteringOptions) -> Result<Vec2> {
    let mu = jost_column(profile, point, which, col, opts.x_match, &opts.jost)?;
    let lam = lambda(point, which, &profile.bd);
    let ph = if col == 0 { (-I * lam * opts.x_match).exp() } else { (I * lam * opts.x_match).exp() };
    Ok(mu * ph)
}

fn check_gamma(point: SpectralPoint, bd: &BoundaryData, opts: &ScatteringOptions) -> Result<C64> {
    if lambda(point, Which::Plus, bd).norm() < opts.jost.eps_bp {
        return Err(Error::GammaNearZero(format!("{}", point.k)));
    }
    Ok(gamma(point, Which::Plus, bd))
}

/// S at `point` from the Wronskians
/// s11 = Wr(φ−,1, φ+,2)/γ+, s12 = Wr(φ−,2, φ+,2)/γ+,
/// s21 = Wr(φ+,1, φ−,1)/γ+, s22 = Wr(φ+,1, φ−,2)/γ+.
pub fn scattering_matrix(profile: &PotentialProfile, point: SpectralPoint, opts: &ScatteringOptions) -> Result<ScatteringSample> {
    let bd = &profile.bd;
    let gp = check_gamma(point, bd, opts)?;
    let col = |which, c| -> Result<Option<Vec2>> {
        if column_admissible(point, which, c, bd) {
            Ok(Some(phi_column(profile, point, which, c, opts)?))
        } else {
            Ok(None)
        }
    };
    let m1 = col(Which::Minus, 0)?;
    let m2 = col(Which::Minus, 1)?;
    let p1 = col(Which::Plus, 0)?;
    let p2 = col(Which::Plus, 1)?;
    let wr = |a: &Option<Vec2>, b: &Option<Vec2>| match (a, b) {
        (Some(a), Some(b)) => Some(wronskian(a, b) / gp),
        _ => None,
    };
    Ok(ScatteringSample::from_entries(point, [wr(&m1, &p2), wr(&m2, &p2), wr(&p1, &m1), wr(&p1, &m2)], opts.rho_floor))
}

/// s11 alone, for points where φ−,1 and φ+,2 are both bounded.
pub fn s11(profile: &PotentialProfile, point: SpectralPoint, opts: &ScatteringOptions) -> Result<C64> {
    let bd = &profile.bd;
    let gp = check_gamma(point, bd, opts)?;
    let a = phi_column(profile, point, Which::Minus, 0, opts)?;
    let b = phi_column(profile, point, Which::Plus, 1, opts)?;
    Ok(wronskian(&a, &b) / gp)
}

/// s22 alone, for points where φ+,1 and φ−,2 are both bounded.
pub fn s22(profile: &PotentialProfile, point: SpectralPoint, opts: &ScatteringOptions) -> Result<C64> {
    let bd = &profile.bd;
    let gp = check_gamma(point, bd, opts)?;
    let a = phi_column(profile, point, Which::Plus, 0, opts)?;
    let b = phi_column(profile, point, Which::Minus, 1, opts)?;
    Ok(wronskian(&a, &b) / gp)
}

/// Closed-form scattering matrix of the pure step potential, E+⁻¹E−.
pub fn step_scattering(point: SpectralPoint, bd: &BoundaryData) -> Mat2 {
    inv2(&eigenmatrix(point, Which::Plus, bd)) * eigenmatrix(point, Which::Minus, bd)
}

/// Pieces of the branch cuts on which the one-sided relations are stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSegment {
    /// Focusing (−iq+, iq+) without 0, or defocusing |k| > q−.
    Shared,
    /// Focusing (iq+, iq−), or defocusing q+ < |k| < q−.
    GapUpper,
    /// Focusing (−iq−, −iq+).
    GapLower,
}

pub fn classify_cut(k: C64, bd: &BoundaryData, eps: f64) -> Option<CutSegment> {
    let (qm, qp) = (bd.q_minus, bd.q_plus);
    let away = |v: f64| [0.0, qp, qm].iter().all(|c| (v.abs() - c).abs() >= eps);
    match bd.regime {
        Regime::Focusing => {
            if k.re != 0.0 || !away(k.im) {
                return None;
            }
            let y = k.im;
            if y.abs() < qp {
                Some(CutSegment::Shared)
            } else if y > qp && y < qm {
                Some(CutSegment::GapUpper)
            } else if y < -qp && y > -qm {
                Some(CutSegment::GapLower)
            } else {
                None
            }
        }
        Regime::Defocusing => {
            if k.im != 0.0 || !away(k.re) {
                return None;
            }
            let a = k.re.abs();
            if a > qm {
                Some(CutSegment::Shared)
            } else if a > qp {
                Some(CutSegment::GapUpper)
            } else {
                None
            }
        }
    }
}

/// Minus-side diagonal entries (s11⁻, s22⁻) predicted from principal-side data.
///
/// Focusing: on (−iq+, iq+) s11⁻ = s22·c and s22⁻ = s11·c with
/// c = (k+λ+)(k−λ−)/(−q+q−); on (iq+, iq−) s11⁻ = s12(k−λ−)/(iq−); on
/// (−iq−, −iq+) s22⁻ = s21(k−λ−)/(iq−).
/// Defocusing: on |k| > q− the same pair with c = (k+λ+)(k−λ−)/(q+q−); on
/// q+ < |k| < q− s11⁻ = s21(k+λ+)/(−iq+).
pub fn minus_side_diagonal(sample: &ScatteringSample, segment: CutSegment, bd: &BoundaryData) -> (Option<C64>, Option<C64>) {
    let k = sample.point.k;
    let p = SpectralPoint::principal(k);
    let lp = lambda(p, Which::Plus, bd);
    let lm = lambda(p, Which::Minus, bd);
    let (qm, qp) = (bd.q_minus, bd.q_plus);
    match (bd.regime, segment) {
        (Regime::Focusing, CutSegment::Shared) => {
            let c = (k + lp) * (k - lm) / (-qp * qm);
            (sample.s22.map(|v| v * c), sample.s11.map(|v| v * c))
        }
        (Regime::Focusing, CutSegment::GapUpper) => (sample.s12.map(|v| v * (k - lm) / (I * qm)), None),
        (Regime::Focusing, CutSegment::GapLower) => (None, sample.s21.map(|v| v * (k - lm) / (I * qm))),
        (Regime::Defocusing, CutSegment::Shared) => {
            let c = (k + lp) * (k - lm) / (qp * qm);
            (sample.s22.map(|v| v * c), sample.s11.map(|v| v * c))
        }
        (Regime::Defocusing, _) => (sample.s21.map(|v| v * (k + lp) / (-I * qp)), None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaDefect {
    pub k: C64,
    pub segment: CutSegment,
    pub s11: Option<f64>,
    pub s22: Option<f64>,
}

impl LemmaDefect {
    pub fn max(&self) -> f64 {
        self.s11.unwrap_or(0.0).max(self.s22.unwrap_or(0.0))
    }
}

/// Relative defect of the one-sided relations at a cut point: the minus-side
/// values come from Jost functions evaluated with the MinusSide tag, the
/// predictions from principal-side data through [`minus_side_diagonal`].
pub fn s11_minus_relation_check(profile: &PotentialProfile, k: C64, opts: &ScatteringOptions) -> Result<LemmaDefect> {
    let bd = &profile.bd;
    let segment = classify_cut(k, bd, opts.jost.eps_bp).ok_or_else(|| Error::NotOnSegment(format!("{k}")))?;
    let principal = scattering_matrix(profile, SpectralPoint::principal(k), opts)?;
    let minus = scattering_matrix(profile, SpectralPoint::minus_side(k), opts)?;
    let (p11, p22) = minus_side_diagonal(&principal, segment, bd);
    let rel = |pred: Option<C64>, got: Option<C64>| match (pred, got) {
        (Some(a), Some(b)) => Some((a - b).norm() / b.norm().max(1e-300)),
        _ => None,
    };
    Ok(LemmaDefect { k, segment, s11: rel(p11, minus.s11), s22: rel(p22, minus.s22) })
}

/// `n` interior points on every open cut segment, one list per segment.
/// Defocusing rays are cut off at |k| = q− + `ray_len`.
pub fn cut_sample_points(bd: &BoundaryData, n: usize, ray_len: f64) -> Vec<Vec<C64>> {
    let (qm, qp) = (bd.q_minus, bd.q_plus);
    let seg = |f: &dyn Fn(f64) -> C64| (0..n).map(|i| f((i as f64 + 0.5) / n as f64)).collect::<Vec<_>>();
    let mut out = Vec::new();
    match bd.regime {
        Regime::Focusing => {
            out.push(seg(&|s| C64::new(0.0, -qp + 2.0 * qp * s)));
            if qm > qp {
                out.push(seg(&|s| C64::new(0.0, qp + (qm - qp) * s)));
                out.push(seg(&|s| C64::new(0.0, -qm + (qm - qp) * s)));
            }
        }
        Regime::Defocusing => {
            out.push(seg(&|s| C64::new(qm + ray_len * s, 0.0)));
            out.push(seg(&|s| C64::new(-qm - ray_len * s, 0.0)));
            if qm > qp {
                out.push(seg(&|s| C64::new(qp + (qm - qp) * s, 0.0)));
                out.push(seg(&|s| C64::new(-qp - (qm - qp) * s, 0.0)));
            }
        }
    }
    out
}

/// Eigenvalue of the focusing conjugate pair: s22(k̄_j) = 0 with
/// φ−,2 = b̄ φ+,1 and C̄ = b̄/s22′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateEigen {
    pub k: C64,
    pub b: C64,
    pub s22_prime: C64,
    pub c: C64,
    /// |s22(k̄_j)|, the conjugate-pairing defect.
    pub s22_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEigen {
    pub k: C64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub b: C64,
    pub s11_prime: C64,
    pub c: C64,
    pub conj: Option<ConjugateEigen>,
}

/// Derivative of an analytic function by the trapezoidal rule on a circle.
fn circle_derivative(f: impl Fn(C64) -> Result<C64> + Sync, z: C64, r: f64, m: usize) -> Result<C64> {
    let vals: Vec<C64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            Ok(f(z + r * w)? / w)
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<C64>() / (m as f64 * r))
}

/// Radius of a disc around an eigenvalue on which s11 (or s22 at the
/// conjugate) stays analytic.
fn analytic_radius(k: C64, bd: &BoundaryData) -> f64 {
    match bd.regime {
        Regime::Focusing => {
            // distance to the real axis and to the cut [0, iq−]
            let y = k.im.abs();
            let cut = if y <= bd.q_minus { k.re.abs() } else { (k - C64::new(0.0, bd.q_minus * k.im.signum())).norm() };
            y.min(cut)
        }
        Regime::Defocusing => (bd.q_plus - k.re.abs()).max(0.0),
    }
}

fn ratio(a: &Vec2, b: &Vec2) -> (C64, f64) {
    // use the larger component of b for the ratio, check the other
    let i = if b[0].norm() >= b[1].norm() { 0 } else { 1 };
    let r = a[i] / b[i];
    let mismatch = (a - b * r).iter().fold(0.0f64, |m, z| m.max(z.norm())) / a.iter().fold(1e-300f64, |m, z| m.max(z.norm()));
    (r, mismatch)
}

/// Completes an eigenvalue k_j: b_j from φ−,1 = b_j φ+,2, s11′ by a Cauchy
/// circle, C_j = b_j/s11′. Focusing eigenvalues also get the conjugate data.
pub fn norming_constants(k: C64, profile: &PotentialProfile, opts: &ScatteringOptions) -> Result<DiscreteEigen> {
    let bd = &profile.bd;
    let p = SpectralPoint::principal(k);
    let a = phi_column(profile, p, Which::Minus, 0, opts)?;
    let bcol = phi_column(profile, p, Which::Plus, 1, opts)?;
    let (b, mismatch) = ratio(&a, &bcol);
    if mismatch > opts.proportional_tol {
        return Err(Error::ColumnsNotProportional { k: format!("{k}"), mismatch });
    }
    let r = (0.25 * analytic_radius(k, bd)).min(0.1 * bd.q_minus);
    let s11p = circle_derivative(|z| s11(profile, SpectralPoint::principal(z), opts), k, r, 32)?;
    if s11p.norm() < 1e-8 {
        return Err(Error::NonSimpleZero(format!("{k}")));
    }
    let conj = match bd.regime {
        Regime::Focusing => {
            let kc = k.conj();
            let pc = SpectralPoint::principal(kc);
            let a = phi_column(profile, pc, Which::Minus, 1, opts)?;
            let bcol = phi_column(profile, pc, Which::Plus, 0, opts)?;
            let (bb, mismatch) = ratio(&a, &bcol);
            if mismatch > opts.proportional_tol {
                return Err(Error::ColumnsNotProportional { k: format!("{kc}"), mismatch });
            }
            let s22p = circle_derivative(|z| s22(profile, SpectralPoint::principal(z), opts), kc, r, 32)?;
            if s22p.norm() < 1e-8 {
                return Err(Error::NonSimpleZero(format!("{kc}")));
            }
            let defect = s22(profile, pc, opts)?.norm();
            Some(ConjugateEigen { k: kc, b: bb, s22_prime: s22p, c: bb / s22p, s22_defect: defect })
        }
        Regime::Defocusing => None,
    };
    Ok(DiscreteEigen {
        k,
        lambda_plus: lambda(p, Which::Plus, bd),
        lambda_minus: lambda(p, Which::Minus, bd),
        b,
        s11_prime: s11p,
        c: b / s11p,
        conj,
    })
}

/// Accumulated argument change of f along the closed polygon, in turns.
fn winding(f: &(impl Fn(C64) -> Result<C64> + Sync), corners: &[C64]) -> Result<i64> {
    let mut total = 0.0;
    for i in 0..corners.len() {
        let (a, b) = (corners[i], corners[(i + 1) % corners.len()]);
        let m = 24;
        let pts: Vec<C64> = (0..=m).map(|j| a + (b - a) * (j as f64 / m as f64)).collect();
        let vals: Vec<C64> = pts.par_iter().map(|&z| f(z)).collect::<Result<_>>()?;
        for j in 0..m {
            total += arg_change(f, pts[j], pts[j + 1], vals[j], vals[j + 1], 0)?;
        }
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

fn arg_change(f: &impl Fn(C64) -> Result<C64>, a: C64, b: C64, fa: C64, fb: C64, depth: usize) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() < std::f64::consts::FRAC_PI_4 || depth > 14 {
        return Ok(d);
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid)?;
    Ok(arg_change(f, a, mid, fa, fm, depth + 1)? + arg_change(f, mid, b, fm, fb, depth + 1)?)
}

/// Secant iteration; returns the root when it converges inside `accept`.
fn secant(f: &impl Fn(C64) -> Result<C64>, z0: C64, z1: C64, tol: f64, accept: impl Fn(C64) -> bool) -> Result<Option<C64>> {
    let (mut a, mut b) = (z0, z1);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    for _ in 0..60 {
        if fb.norm() <= tol {
            return Ok(accept(b).then_some(b));
        }
        let den = fb - fa;
        if den.norm() == 0.0 {
            return Ok(None);
        }
        let c = b - fb * (b - a) / den;
        if !c.re.is_finite() || !c.im.is_finite() || !accept(c) {
            return Ok(None);
        }
        a = b;
        fa = fb;
        b = c;
        fb = f(b)?;
        if (b - a).norm() < 1e-15 * (1.0 + b.norm()) {
            return Ok((fb.norm() <= tol && accept(b)).then_some(b));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Cell {
    fn corners(&self) -> [C64; 4] {
        [C64::new(self.x0, self.y0), C64::new(self.x1, self.y0), C64::new(self.x1, self.y1), C64::new(self.x0, self.y1)]
    }
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
    fn contains(&self, z: C64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
    /// Split slightly off centre so that roots on a symmetry axis (purely
    /// imaginary eigenvalues) never land on a cell edge.
    fn quarters(&self) -> [Cell; 4] {
        const SPLIT: f64 = 0.4871;
        let (xm, ym) = (self.x0 + SPLIT * (self.x1 - self.x0), self.y0 + SPLIT * (self.y1 - self.y0));
        [
            Cell { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Cell { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Cell { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Cell { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }
}

/// Result of the eigenvalue search, with the argument-principle count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSearch {
    pub winding: Option<i64>,
    pub eigenvalues: Vec<DiscreteEigen>,
}

/// Zeros of s11 only, with the argument-principle count in the focusing case.
pub fn find_eigenvalues(profile: &PotentialProfile, opts: &ScatteringOptions) -> Result<(Option<i64>, Vec<C64>)> {
    match profile.bd.regime {
        Regime::Focusing => focusing_roots(profile, opts),
        Regime::Defocusing => Ok((None, defocusing_roots(profile, opts)?)),
    }
}

/// Locates the zeros of s11 and completes them with norming constants.
pub fn find_discrete_spectrum(profile: &PotentialProfile, opts: &ScatteringOptions) -> Result<SpectrumSearch> {
    let (winding, roots) = find_eigenvalues(profile, opts)?;
    let eigenvalues = roots.iter().map(|&k| norming_constants(k, profile, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SpectrumSearch { winding, eigenvalues })
}

fn focusing_roots(profile: &PotentialProfile, opts: &ScatteringOptions) -> Result<(Option<i64>, Vec<C64>)> {
    let bd = &profile.bd;
    let big = opts.search_factor * bd.q_minus;
    let tube = 1e-3 * bd.q_minus;
    let f = |z: C64| s11(profile, SpectralPoint::principal(z), opts);
    // U-shaped region around the cut [0, iq−]
    let initial = [
        Cell { x0: -big, x1: -tube, y0: tube, y1: big },
        Cell { x0: tube, x1: big, y0: tube, y1: big },
        Cell { x0: -tube, x1: tube, y0: bd.q_minus + tube, y1: big },
    ];
    let mut total = 0i64;
    let mut roots: Vec<C64> = Vec::new();
    let mut stack: Vec<(Cell, usize, Option<i64>)> = initial.iter().map(|c| (*c, 0, None)).collect();
    while let Some((cell, depth, known)) = stack.pop() {
        let w = match known {
            Some(w) => w,
            None => winding(&f, &cell.corners())?,
        };
        if depth == 0 {
            total += w;
        }
        if w < 0 {
            return Err(Error::WindingMismatch { winding: w, found: 0 });
        }
        if w == 0 {
            continue;
        }
        if w == 1 {
            let c = cell.center();
            let h = 0.01 * ((cell.x1 - cell.x0).min(cell.y1 - cell.y0));
            let found = secant(&f, c, c + C64::new(h, h), 0.1 * opts.root_tol, |z| cell.contains(z))?;
            if let Some(z) = found {
                if roots.iter().all(|r| (r - z).norm() > 1e-8) {
                    roots.push(z);
                }
                continue;
            }
        }
        if depth >= 10 {
            return Err(Error::WindingMismatch { winding: total, found: roots.len() });
        }
        for q in cell.quarters() {
            stack.push((q, depth + 1, None));
        }
    }
    if roots.len() as i64 != total {
        return Err(Error::WindingMismatch { winding: total, found: roots.len() });
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok((Some(total), roots))
}

fn defocusing_roots(profile: &PotentialProfile, opts: &ScatteringOptions) -> Result<Vec<C64>> {
    let bd = &profile.bd;
    let edge = bd.q_plus - 1e3 * opts.jost.eps_bp;
    let m = 400;
    let xs: Vec<f64> = (0..=m).map(|i| -edge + 2.0 * edge * i as f64 / m as f64).collect();
    let f = |z: C64| s11(profile, SpectralPoint::principal(z), opts);
    let vals: Vec<f64> = xs.par_iter().map(|&x| f(C64::new(x, 0.0)).map(|v| v.norm())).collect::<Result<_>>()?;
    let mut roots: Vec<C64> = Vec::new();
    for i in 1..m {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            let z0 = C64::new(xs[i], 0.0);
            let h = C64::new(0.25 * (xs[1] - xs[0]), 0.0);
            if let Some(z) = secant(&f, z0, z0 + h, 0.1 * opts.root_tol, |z| z.re.abs() < edge && z.im.abs() < 0.5)? {
                let z = C64::new(z.re, 0.0);
                if f(z)?.norm() <= opts.root_tol && roots.iter().all(|r| (r - z).norm() > 1e-8) {
                    roots.push(z);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(roots)
}

/// Scattering data sampled on a contour plus the discrete spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringData {
    pub bd: BoundaryData,
    pub t: f64,
    pub x_match: f64,
    pub k_max: f64,
    pub eps_bp: f64,
    pub panels: Vec<PanelSpec>,
    /// Node samples in panel order.
    pub nodes: Vec<ScatteringSample>,
    pub discrete: Vec<DiscreteEigen>,
    pub winding: Option<i64>,
}

impl ScatteringData {
    pub fn contour(&self) -> Contour {
        Contour::from_specs(&self.bd, &self.panels, self.k_max, self.eps_bp)
    }

    /// Offset of the first node of each panel in `nodes`.
    pub fn panel_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.panels.len() + 1);
        let mut s = 0;
        for p in &self.panels {
            off.push(s);
            s += p.n;
        }
        off.push(s);
        off
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        let expected: usize = d.panels.iter().map(|p| p.n).sum();
        if expected != d.nodes.len() {
            return Err(Error::Format(format!("scattering data lists {} nodes but its panels need {expected}", d.nodes.len())));
        }
        Ok(d)
    }
}

/// Samples S at every contour node (in parallel) and searches the discrete spectrum.
pub fn sample_contour(profile: &PotentialProfile, contour: &Contour, opts: &ScatteringOptions) -> Result<ScatteringData> {
    let points: Vec<C64> = contour.nodes().map(|(_, z)| z).collect();
    let nodes = points
        .par_iter()
        .map(|&z| scattering_matrix(profile, SpectralPoint::principal(z), opts))
        .collect::<Result<Vec<_>>>()?;
    let search = find_discrete_spectrum(profile, opts)?;
    Ok(ScatteringData {
        bd: profile.bd,
        t: 0.0,
        x_match: opts.x_match,
        k_max: contour.k_max,
        eps_bp: contour.eps_bp,
        panels: contour.specs(),
        nodes,
        discrete: search.eigenvalues,
        winding: search.winding,
    })
}
