//! Riemann–Hilbert problem: jump matrices and a Nyström solver for the
//! Plemelj integral equation with residue conditions.
//!
//! The sectionally meromorphic matrix is Ψ = [φ−,1/s11, φ+,2] above the
//! continuous spectrum and [φ+,1, φ−,2/s22] below. Writing Ψ⁻ = Ψ⁺·… the
//! connection W = (Ψ⁻)⁻¹Ψ⁺ at x = 0 depends on scattering data only.
//!
//! Two normalizations are solved for, both of the form N → I at infinity:
//! right, N = Ψ e^{iλ+xσ3} E+⁻¹, with q = q+ − 2i lim k N12; and left,
//! N = Ψ D e^{iλ−xσ3} E−⁻¹ with D = diag(s11, det S/s11) above (resp.
//! diag(det S/s22, s22) below), with q = q− − 2i lim k N12. The right one is
//! used for x ≥ 0 and the left one for x < 0, where the respective jumps stay
//! bounded. The jump of N is Ṽ = E⁻ e^{−iλ⁻xσ3} W e^{iλ⁺xσ3} (E⁺)⁻¹ with the
//! one-sided values of λ and E on either side.

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, ReciprocalConditionNum, Solve};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{
    eigenmatrix, eigenmatrix_inverse, eigenmatrix_prime, gamma, lambda, max_abs, phase_diag, BoundaryData, Mat2, Regime,
    SpectralPoint, Vec2, Which, C64, I, ONE, ZERO,
};
use crate::contour::{Contour, Panel, SegmentLabel};
use crate::error::{Error, Result};
use crate::evolution::{entry_factors, f_pm};
use crate::quadrature::{barycentric_coefficients, differentiation_matrix, gauss_legendre};
use crate::scattering::{minus_side_diagonal, CutSegment, ScatteringData, ScatteringSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Right,
    Left,
}

/// Norming constant used at the conjugate eigenvalue k̄_j (focusing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjResidue {
    /// C̄_j = b̄_j/s22′(k̄_j), both computed at k̄_j.
    Computed,
    /// C̄_j = −conj(C_j), the symmetry-reduced value.
    Symmetry,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RhpOptions {
    /// Largest phase variation allowed across one panel.
    pub phase_per_panel: f64,
    /// Panels whose data amplitude stays below this are not refined.
    pub refine_floor: f64,
    /// Panels with |Ṽ − I| below this everywhere are dropped from the system.
    pub prune_tol: f64,
    /// Closest a refined node may come to a branch point or junction, in
    /// units of q+. Refined nodes only read interpolated data, so this can be
    /// far below the sampling exclusion ε_bp.
    pub refine_exclusion: f64,
    /// Geometric refinement toward branch points: levels and ratio.
    pub grading_levels: usize,
    pub grading_ratio: f64,
    pub rcond_min: f64,
    pub residual_tol: f64,
    pub limit_tol: f64,
    /// Floor for the reflection data that enters inverted.
    pub rho_floor: f64,
    /// Fixed normalization; None picks right for x ≥ 0, left for x < 0.
    pub normalization: Option<Normalization>,
    pub conj_residue: ConjResidue,
}

impl Default for RhpOptions {
    fn default() -> Self {
        Self {
            phase_per_panel: 30.0,
            refine_floor: 1e-8,
            prune_tol: 1e-10,
            refine_exclusion: 1e-9,
            grading_levels: 2,
            grading_ratio: 0.2,
            rcond_min: 1e-13,
            residual_tol: 1e-6,
            limit_tol: 1e-6,
            rho_floor: 1e-8,
            normalization: None,
            conj_residue: ConjResidue::Computed,
        }
    }
}

fn cut_segment(label: SegmentLabel) -> Option<CutSegment> {
    match label {
        SegmentLabel::RealLine => None,
        SegmentLabel::SigmaPlusUp | SegmentLabel::SigmaPlusDown | SegmentLabel::SigmaMinusRay => Some(CutSegment::Shared),
        SegmentLabel::Sigma0Up | SegmentLabel::Sigma0Real => Some(CutSegment::GapUpper),
        SegmentLabel::Sigma0Down => Some(CutSegment::GapLower),
    }
}

/// Point on the − side of the contour at k.
fn minus_point(k: C64, label: SegmentLabel) -> SpectralPoint {
    match label {
        SegmentLabel::RealLine => SpectralPoint::principal(k),
        _ => SpectralPoint::minus_side(k),
    }
}

fn need(v: Option<C64>, what: &str, k: C64) -> Result<C64> {
    v.ok_or_else(|| Error::NearSingularRho(format!("{k} ({what} unavailable)")))
}

/// Connection matrix W = (Ψ⁻)⁻¹Ψ⁺ at x = 0 on the segment `label`.
pub fn connection_matrix(sample: &ScatteringSample, label: SegmentLabel, bd: &BoundaryData, rho_floor: f64) -> Result<Mat2> {
    let k = sample.point.k;
    let p = SpectralPoint::principal(k);
    let lp = lambda(p, Which::Plus, bd);
    let qp = bd.q_plus;
    let a = (k + lp) / (I * qp);
    let b = I * qp / (k - lp);
    let ds = gamma(p, Which::Minus, bd) / gamma(p, Which::Plus, bd);
    use SegmentLabel::*;
    Ok(match (bd.regime, label) {
        (Regime::Focusing, RealLine) => {
            let (r, rt) = (need(sample.rho, "rho", k)?, need(sample.rho_tilde, "rho_tilde", k)?);
            Mat2::new(ONE - r * rt, -rt, r, ONE)
        }
        (Regime::Focusing, SigmaPlusUp) => {
            let (r, rt) = (need(sample.rho, "rho", k)?, need(sample.rho_tilde, "rho_tilde", k)?);
            Mat2::new(a * r, a, (ONE - r * rt) * b, -rt * b)
        }
        (Regime::Focusing, SigmaPlusDown) => {
            let (r, rt) = (need(sample.rho, "rho", k)?, need(sample.rho_tilde, "rho_tilde", k)?);
            Mat2::new(-r * b, (ONE - r * rt) * b, a, rt * a)
        }
        (Regime::Focusing, Sigma0Up) => {
            let d = need(sample.s11, "s11", k)? * need(sample.s12, "s12", k)?;
            if d.norm() < rho_floor {
                return Err(Error::NearSingularRho(format!("{k}")));
            }
            Mat2::new(ONE, ZERO, -ds / d, ONE)
        }
        (Regime::Focusing, Sigma0Down) => {
            let d = need(sample.s22, "s22", k)? * need(sample.s21, "s21", k)?;
            if d.norm() < rho_floor {
                return Err(Error::NearSingularRho(format!("{k}")));
            }
            Mat2::new(ONE, -ds / d, ZERO, ONE)
        }
        (Regime::Defocusing, SigmaMinusRay) => {
            let (r, rt) = (need(sample.rho, "rho", k)?, need(sample.rho_tilde, "rho_tilde", k)?);
            let c = I * (k + lp) / qp;
            let e = I * qp / (k - lp);
            Mat2::new(r * c, c, -(ONE - r * rt) * e, rt * e)
        }
        (Regime::Defocusing, Sigma0Real) => {
            let r = need(sample.rho, "rho", k)?;
            if r.norm() < rho_floor {
                return Err(Error::NearSingularRho(format!("{k}")));
            }
            let c = (k + lp) / (-I * qp);
            Mat2::new(r * c, c, ZERO, b / r)
        }
        _ => return Err(Error::NotOnSegment(format!("{k} ({label:?} in the {} regime)", bd.regime))),
    })
}

fn is_upper(label: SegmentLabel, plus_side: bool, regime: Regime) -> bool {
    match regime {
        Regime::Defocusing => true,
        Regime::Focusing => match label {
            SegmentLabel::RealLine => plus_side,
            SegmentLabel::SigmaPlusUp | SegmentLabel::Sigma0Up => true,
            _ => false,
        },
    }
}

/// Connection matrix of the left normalization, D⁻⁻¹ W D⁺.
pub fn connection_matrix_left(
    sample: &ScatteringSample,
    label: SegmentLabel,
    bd: &BoundaryData,
    rho_floor: f64,
) -> Result<Mat2> {
    let w = connection_matrix(sample, label, bd, rho_floor)?;
    let k = sample.point.k;
    let p = SpectralPoint::principal(k);
    let m = minus_point(k, label);
    let ds_p = gamma(p, Which::Minus, bd) / gamma(p, Which::Plus, bd);
    let ds_m = gamma(m, Which::Minus, bd) / gamma(m, Which::Plus, bd);
    let (s11m, s22m) = match cut_segment(label) {
        None => (sample.s11, sample.s22),
        Some(seg) => minus_side_diagonal(sample, seg, bd),
    };
    let diag = |upper: bool, s11: Option<C64>, s22: Option<C64>, ds: C64| -> Result<(C64, C64)> {
        if upper {
            let s = need(s11, "s11", k)?;
            Ok((s, ds / s))
        } else {
            let s = need(s22, "s22", k)?;
            Ok((ds / s, s))
        }
    };
    let (p1, p2) = diag(is_upper(label, true, bd.regime), sample.s11, sample.s22, ds_p)?;
    let (m1, m2) = diag(is_upper(label, false, bd.regime), s11m, s22m, ds_m)?;
    Ok(Mat2::new(w[(0, 0)] * p1 / m1, w[(0, 1)] * p2 / m1, w[(1, 0)] * p1 / m2, w[(1, 1)] * p2 / m2))
}

/// A jump matrix at one contour point: `v` acts on the matrix Ψe^{iλ+xσ3},
/// `v_tilde` on the normalized N.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JumpMatrix {
    pub point: SpectralPoint,
    pub x: f64,
    pub t: f64,
    pub label: SegmentLabel,
    pub v: Mat2,
    pub v_tilde: Mat2,
}

fn tilde(w: &Mat2, k: C64, label: SegmentLabel, x: f64, which: Which, bd: &BoundaryData) -> Mat2 {
    let p = SpectralPoint::principal(k);
    let m = minus_point(k, label);
    let lp = lambda(p, which, bd);
    let lm = lambda(m, which, bd);
    eigenmatrix(m, which, bd) * phase_diag(lm, x) * w * phase_diag(-lp, x) * eigenmatrix_inverse(p, which, bd)
}

/// Interpolates scattering data from the panels it was sampled on.
pub struct DataInterpolator<'a> {
    pub data: &'a ScatteringData,
    pub contour: Contour,
    offsets: Vec<usize>,
    /// γ+·s_ij with the time factors removed, per node.
    regular: Vec<[Option<C64>; 4]>,
    floor: f64,
}

impl<'a> DataInterpolator<'a> {
    pub fn new(data: &'a ScatteringData, floor: f64) -> Self {
        let contour = data.contour();
        let offsets = data.panel_offsets();
        let regular = data
            .nodes
            .iter()
            .map(|s| {
                let g = gamma(s.point, Which::Plus, &data.bd);
                let f = entry_factors(s.point, &data.bd, data.t);
                let e = s.entries();
                [0, 1, 2, 3].map(|i| e[i].map(|v| v * g / f[i]))
            })
            .collect();
        Self { data, contour, offsets, regular, floor }
    }

    pub fn panel_samples(&self, panel: usize) -> &[ScatteringSample] {
        &self.data.nodes[self.offsets[panel]..self.offsets[panel + 1]]
    }

    /// Index of a data panel with this label containing z.
    pub fn find_panel(&self, z: C64, label: SegmentLabel) -> Option<usize> {
        let tol = 1e-12 * (1.0 + z.norm());
        self.contour.panels.iter().position(|p| p.spec.label == label && p.contains(z, tol))
    }

    /// Sample at z on data panel `panel`, at the data's time.
    pub fn sample(&self, panel: usize, z: C64) -> ScatteringSample {
        let pan = &self.contour.panels[panel];
        let coef = pan.interpolation(z);
        let reg = &self.regular[self.offsets[panel]..self.offsets[panel + 1]];
        let point = SpectralPoint::principal(z);
        let g = gamma(point, Which::Plus, &self.data.bd);
        let f = entry_factors(point, &self.data.bd, self.data.t);
        let entries = [0, 1, 2, 3].map(|e| {
            if reg[0][e].is_none() {
                return None;
            }
            let v: C64 = coef.iter().zip(reg).map(|(c, r)| r[e].unwrap_or(ZERO) * *c).sum();
            Some(v * f[e] / g)
        });
        ScatteringSample::from_entries(point, entries, self.floor)
    }
}

/// Jump matrix at a contour point, with scattering data interpolated from `data`.
pub fn jump_matrix(point: SpectralPoint, label: SegmentLabel, x: f64, t: f64, data: &ScatteringData) -> Result<JumpMatrix> {
    if (data.t - t).abs() > 1e-14 * (1.0 + t.abs()) {
        return Err(Error::Config(format!("scattering data is at t = {}, jump requested at t = {t}", data.t)));
    }
    let bd = &data.bd;
    let interp = DataInterpolator::new(data, 1e-12);
    let k = point.k;
    let panel = interp.find_panel(k, label).ok_or_else(|| Error::RhoInterpolationGap(format!("{k}")))?;
    let s = interp.sample(panel, k);
    let w = connection_matrix(&s, label, bd, RhpOptions::default().rho_floor)?;
    let p = SpectralPoint::principal(k);
    let m = minus_point(k, label);
    let v = phase_diag(lambda(m, Which::Plus, bd), x) * w * phase_diag(-lambda(p, Which::Plus, bd), x);
    Ok(JumpMatrix { point, x, t, label, v, v_tilde: tilde(&w, k, label, x, Which::Plus, bd) })
}

/// Pole of N at an eigenvalue: residue R = v u^T with u^T = e_c^T E(p)⁻¹ and
/// v = w·(N E)(p) e_d.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Pole {
    pub p: C64,
    pub c: usize,
    pub d: usize,
    pub w: C64,
    #[serde(skip)]
    e: Mat2,
    #[serde(skip)]
    e_prime: Mat2,
    #[serde(skip)]
    u: Vec2,
}

fn make_pole(p: C64, c: usize, d: usize, w: C64, which: Which, bd: &BoundaryData) -> Pole {
    let pt = SpectralPoint::principal(p);
    let einv = eigenmatrix_inverse(pt, which, bd);
    Pole {
        p,
        c,
        d,
        w,
        e: eigenmatrix(pt, which, bd),
        e_prime: eigenmatrix_prime(pt, which, bd),
        u: Vec2::new(einv[(c, 0)], einv[(c, 1)]),
    }
}

fn poles(data: &ScatteringData, x: f64, norm: Normalization, conj: ConjResidue) -> Vec<Pole> {
    let bd = &data.bd;
    let mut out = Vec::new();
    for e in &data.discrete {
        let pt = SpectralPoint::principal(e.k);
        match norm {
            Normalization::Right => {
                let lp = lambda(pt, Which::Plus, bd);
                out.push(make_pole(e.k, 0, 1, e.c * (2.0 * I * lp * x).exp(), Which::Plus, bd));
            }
            Normalization::Left => {
                let lm = lambda(pt, Which::Minus, bd);
                let ds = gamma(pt, Which::Minus, bd) / gamma(pt, Which::Plus, bd);
                out.push(make_pole(e.k, 1, 0, ds / (e.b * e.s11_prime) * (-2.0 * I * lm * x).exp(), Which::Minus, bd));
            }
        }
        if let Some(c) = &e.conj {
            let pc = SpectralPoint::principal(c.k);
            match norm {
                Normalization::Right => {
                    let cbar = match conj {
                        ConjResidue::Computed => c.c,
                        ConjResidue::Symmetry => -e.c.conj(),
                    };
                    let lp = lambda(pc, Which::Plus, bd);
                    out.push(make_pole(c.k, 1, 0, cbar * (-2.0 * I * lp * x).exp(), Which::Plus, bd));
                }
                Normalization::Left => {
                    let lm = lambda(pc, Which::Minus, bd);
                    let ds = gamma(pc, Which::Minus, bd) / gamma(pc, Which::Plus, bd);
                    let bs = match conj {
                        ConjResidue::Computed => c.b * c.s22_prime,
                        ConjResidue::Symmetry => -(e.b * e.s11_prime).conj(),
                    };
                    out.push(make_pole(c.k, 0, 1, ds / bs * (2.0 * I * lm * x).exp(), Which::Minus, bd));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RhDiagnostics {
    pub nodes: usize,
    pub panels: usize,
    pub pruned_panels: usize,
    pub rcond: f64,
    /// max ‖N+ − N−Ṽ‖ at the collocation nodes.
    pub jump_residual: f64,
    /// The same jump relation at points between nodes, with data and density interpolated.
    pub offnode_residual: f64,
    /// Where the off-node residual peaks.
    pub offnode_at: C64,
    /// Largest |Ṽ − I| at the truncation points ±K∞.
    pub trunc_est: f64,
    pub max_jump: f64,
}

/// Solution of the RH problem at one (x, t).
#[derive(Debug, Clone)]
pub struct RhSolution {
    pub x: f64,
    pub t: f64,
    pub normalization: Normalization,
    pub bd: BoundaryData,
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
    /// Node-to-panel map into `contour`.
    pub node_panel: Vec<usize>,
    pub contour: Contour,
    pub n_minus: Vec<Mat2>,
    pub jumps: Vec<Mat2>,
    /// f = N−(Ṽ − I), the jump N+ − N−.
    pub density: Vec<Mat2>,
    pub poles: Vec<Pole>,
    pub residues: Vec<Mat2>,
    pub diagnostics: RhDiagnostics,
}

impl RhSolution {
    /// N(k) off the contour.
    pub fn eval(&self, k: C64) -> Mat2 {
        let mut n = Mat2::identity();
        for (p, r) in self.poles.iter().zip(&self.residues) {
            n += r / (k - p.p);
        }
        let mut s = Mat2::zeros();
        for ((z, w), f) in self.nodes.iter().zip(&self.weights).zip(&self.density) {
            s += f * (w / (z - k));
        }
        n + s / (2.0 * std::f64::consts::PI * I)
    }

    /// M = N·E with the E of this normalization.
    pub fn eval_m(&self, k: C64) -> Mat2 {
        let which = self.which();
        self.eval(k) * eigenmatrix(SpectralPoint::principal(k), which, &self.bd)
    }

    fn which(&self) -> Which {
        match self.normalization {
            Normalization::Right => Which::Plus,
            Normalization::Left => Which::Minus,
        }
    }

    /// lim k N12 from the residues and the density.
    pub fn moment12(&self) -> C64 {
        let r: C64 = self.residues.iter().map(|r| r[(0, 1)]).sum();
        let s: C64 = self.density.iter().zip(&self.weights).map(|(f, w)| f[(0, 1)] * w).sum();
        r - s / (2.0 * std::f64::consts::PI * I)
    }

    pub fn background(&self) -> f64 {
        self.bd.q(self.which())
    }
}

/// Cumulative variation of the exponents in Ṽ along a panel, as pairs
/// (relative position, variation so far). Covers the x-phase of the active
/// normalization and the time phases carried by the data. Samples avoid the
/// endpoints so λ is never read on a cut. Stretches where `amp` stays below
/// `floor` add nothing, so a long panel whose data only matters near one end
/// is not cut along its whole length.
fn phase_profile(
    panel: &Panel,
    x: f64,
    t: f64,
    norm: Normalization,
    bd: &BoundaryData,
    amp: impl Fn(C64) -> f64,
    floor: f64,
) -> Vec<(f64, f64)> {
    let m = 96;
    let which = match norm {
        Normalization::Right => Which::Plus,
        Normalization::Left => Which::Minus,
    };
    let d = panel.spec.b - panel.spec.a;
    let mut out = Vec::with_capacity(m);
    let mut tv = 0.0f64;
    let mut prev: Option<([C64; 4], f64)> = None;
    for i in 0..m {
        let s = (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos()) / 2.0;
        let z = panel.spec.a + d * s;
        let p = SpectralPoint::principal(z);
        let (fp, fm) = (f_pm(p, Which::Plus, bd), f_pm(p, Which::Minus, bd));
        let th = [2.0 * lambda(p, which, bd) * x, 2.0 * fp * t, (fp + fm) * t, (fp - fm) * t];
        let a = amp(z);
        if let Some((pr, pa)) = prev {
            if a.max(pa) >= floor {
                tv += (0..4).map(|j| (th[j] - pr[j]).norm()).sum::<f64>();
            }
        }
        prev = Some((th, a));
        out.push((s, tv));
    }
    out
}

/// Geometric cuts toward clustered endpoints, where the density has its
/// branch-point singularities.
fn grading_cuts(panel: &Panel, levels: usize, ratio: f64) -> Vec<f64> {
    let mut c = Vec::new();
    for l in 1..=levels {
        let r = ratio.powi(l as i32);
        if panel.spec.clustering.left() {
            c.push(r);
        }
        if panel.spec.clustering.right() {
            c.push(1.0 - r);
        }
    }
    c
}

/// Interior cut positions that share the variation equally between pieces.
fn equidistributed_cuts(profile: &[(f64, f64)], per_piece: f64) -> Vec<f64> {
    let total = profile.last().map(|p| p.1).unwrap_or(0.0);
    let m = (total / per_piece).ceil().max(1.0) as usize;
    let mut cuts = Vec::with_capacity(m.saturating_sub(1));
    let mut j = 1;
    for i in 1..m {
        let target = total * i as f64 / m as f64;
        while j + 1 < profile.len() && profile[j].1 < target {
            j += 1;
        }
        let (s0, v0) = profile[j - 1];
        let (s1, v1) = profile[j];
        let w = if v1 > v0 { ((target - v0) / (v1 - v0)).clamp(0.0, 1.0) } else { 0.5 };
        cuts.push(s0 + w * (s1 - s0));
    }
    cuts
}

struct Assembled {
    contour: Contour,
    node_panel: Vec<usize>,
    nodes: Vec<C64>,
    weights: Vec<C64>,
    jumps: Vec<Mat2>,
    pruned: usize,
    trunc_est: f64,
}

fn node_jump(
    interp: &DataInterpolator,
    panel: &Panel,
    z: C64,
    x: f64,
    norm: Normalization,
    rho_floor: f64,
    direct: Option<&ScatteringSample>,
) -> Result<Mat2> {
    let bd = &interp.data.bd;
    let s = match direct {
        Some(s) => *s,
        None => interp.sample(panel.parent, z),
    };
    let label = panel.spec.label;
    Ok(match norm {
        Normalization::Right => tilde(&connection_matrix(&s, label, bd, rho_floor)?, z, label, x, Which::Plus, bd),
        Normalization::Left => tilde(&connection_matrix_left(&s, label, bd, rho_floor)?, z, label, x, Which::Minus, bd),
    })
}

fn assemble(interp: &DataInterpolator, x: f64, norm: Normalization, opts: &RhpOptions) -> Result<Assembled> {
    let data = interp.data;
    let bd = &data.bd;
    let base = &interp.contour;
    // jumps at the data nodes decide pruning and refinement
    let per_panel: Vec<(f64, Vec<f64>)> = base
        .panels
        .par_iter()
        .enumerate()
        .map(|(pi, pan)| {
            let samples = interp.panel_samples(pi);
            let mut amp = 0.0f64;
            for (z, s) in pan.nodes.iter().zip(samples) {
                let v = node_jump(interp, pan, *z, x, norm, opts.rho_floor, Some(s))?;
                amp = amp.max(max_abs(&(v - Mat2::identity())));
            }
            let cuts = if amp < opts.refine_floor {
                Vec::new()
            } else {
                let local = |z: C64| {
                    let s = interp.sample(pi, z);
                    node_jump(interp, pan, z, x, norm, opts.rho_floor, Some(&s))
                        .map_or(f64::INFINITY, |v| max_abs(&(v - Mat2::identity())))
                };
                let profile = phase_profile(pan, x, data.t, norm, bd, local, opts.refine_floor);
                let mut c = equidistributed_cuts(&profile, opts.phase_per_panel);
                c.extend(grading_cuts(pan, opts.grading_levels, opts.grading_ratio));
                c.sort_by(f64::total_cmp);
                c
            };
            Ok((amp, cuts))
        })
        .collect::<Result<_>>()?;
    let trunc_est = base
        .panels
        .iter()
        .zip(&per_panel)
        .filter(|(p, _)| (p.spec.a.norm() - base.k_max).abs() < 1e-9 || (p.spec.b.norm() - base.k_max).abs() < 1e-9)
        .map(|(_, (a, _))| *a)
        .fold(0.0, f64::max);
    let cuts: Vec<Vec<f64>> = per_panel.iter().map(|(_, c)| c.clone()).collect();
    let refined = base.refined_at(&cuts, opts.refine_exclusion * bd.q_plus);
    let keep: Vec<bool> = refined.panels.iter().map(|p| per_panel[p.parent].0 >= opts.prune_tol).collect();
    let pruned = keep.iter().filter(|k| !**k).count();
    let panels: Vec<Panel> = refined.panels.into_iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| p).collect();
    let contour = Contour { bd: *bd, k_max: base.k_max, eps_bp: base.eps_bp, panels };
    let mut node_panel = Vec::new();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (pi, p) in contour.panels.iter().enumerate() {
        for (z, w) in p.nodes.iter().zip(&p.weights) {
            node_panel.push(pi);
            nodes.push(*z);
            weights.push(*w);
        }
    }
    let jumps = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let pan = &contour.panels[node_panel[i]];
            let unsplit = cuts[pan.parent].is_empty();
            let direct = if unsplit {
                let j = pan.nodes.iter().position(|z| *z == nodes[i]).expect("node on its panel");
                Some(interp.panel_samples(pan.parent)[j])
            } else {
                None
            };
            node_jump(interp, pan, nodes[i], x, norm, opts.rho_floor, direct.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assembled { contour, node_panel, nodes, weights, jumps, pruned, trunc_est })
}

/// Discrete C⁻ on the union of panels: (C⁻f)_i = Σ_j C_ij f_j. Uses the
/// subtraction f(ζ) − f(ζ_i) with exact integrals of 1/(ζ − ζ_i) per panel
/// and spectral differentiation on the node's own panel.
fn cauchy_minus(contour: &Contour, nodes: &[C64], weights: &[C64]) -> Vec<C64> {
    let m = nodes.len();
    let mut offsets = Vec::with_capacity(contour.panels.len());
    let mut o = 0;
    for p in &contour.panels {
        offsets.push(o);
        o += p.len();
    }
    let mut dmats = std::collections::HashMap::new();
    for p in &contour.panels {
        dmats.entry(p.len()).or_insert_with(|| {
            let (u, w) = gauss_legendre(p.len());
            let bw = crate::quadrature::barycentric_weights(&u, &w);
            (w, differentiation_matrix(&u, &bw))
        });
    }
    let two_pi_i = 2.0 * std::f64::consts::PI * I;
    let mut c = vec![ZERO; m * m];
    c.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let zi = nodes[i];
        let (pi, ii) = {
            let mut pi = 0;
            while pi + 1 < offsets.len() && offsets[pi + 1] <= i {
                pi += 1;
            }
            (pi, i - offsets[pi])
        };
        let mut diag = ZERO;
        for j in 0..m {
            if j != i {
                let v = weights[j] / (nodes[j] - zi);
                row[j] = v;
                diag -= v;
            }
        }
        // the own-panel limit term differentiates H = f·dζ/du, which stays
        // smooth where f has inverse square-root endpoint behaviour
        let own = &contour.panels[pi];
        let (gw, d) = &dmats[&own.len()];
        let n = own.len();
        let gpi = own.gp[ii];
        for jj in 0..n {
            row[offsets[pi] + jj] += gw[ii] * d[ii * n + jj] * own.gp[jj] / gpi;
        }
        row[i] -= gw[ii] * own.gpp[ii] / gpi;
        let mut l = ZERO;
        for (qi, p) in contour.panels.iter().enumerate() {
            if qi == pi {
                l += C64::from(((p.spec.b - zi).norm() / (zi - p.spec.a).norm()).ln());
            } else {
                l += ((p.spec.b - zi) / (p.spec.a - zi)).ln();
            }
        }
        row[i] += diag + l;
        for v in row.iter_mut() {
            *v /= two_pi_i;
        }
        row[i] -= 0.5;
    });
    c
}

/// Solves the RH problem at (x, data.t).
pub fn solve_rhp(data: &ScatteringData, x: f64, opts: &RhpOptions) -> Result<RhSolution> {
    let interp = DataInterpolator::new(data, 1e-12);
    solve_with(&interp, x, opts)
}

pub fn solve_with(interp: &DataInterpolator, x: f64, opts: &RhpOptions) -> Result<RhSolution> {
    let data = interp.data;
    let bd = data.bd;
    let norm = opts.normalization.unwrap_or(if x >= 0.0 { Normalization::Right } else { Normalization::Left });
    let asm = assemble(interp, x, norm, opts)?;
    let poles = poles(data, x, norm, opts.conj_residue);
    let m = asm.nodes.len();
    let np = poles.len();
    let dim = 2 * m + np;
    let c = if m > 0 { cauchy_minus(&asm.contour, &asm.nodes, &asm.weights) } else { Vec::new() };
    let vm: Vec<Mat2> = asm.jumps.iter().map(|v| v - Mat2::identity()).collect();
    let max_jump = asm.jumps.iter().map(max_abs).fold(0.0, f64::max);
    for v in &asm.jumps {
        let d = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        if d.norm() < 1e-12 {
            return Err(Error::SingularSystem { rcond: d.norm() });
        }
    }

    let mut flat = vec![ZERO; dim * dim];
    flat.par_chunks_mut(dim.max(1)).enumerate().for_each(|(row, out)| {
        if row < 2 * m {
            let b = row / m;
            let i = row % m;
            out[row] += ONE;
            for j in 0..m {
                let cij = c[i * m + j];
                if cij == ZERO {
                    continue;
                }
                out[j] -= cij * vm[j][(0, b)];
                out[m + j] -= cij * vm[j][(1, b)];
            }
            for (pi, p) in poles.iter().enumerate() {
                out[2 * m + pi] -= p.u[b] / (asm.nodes[i] - p.p);
            }
        } else {
            let pi = row - 2 * m;
            let p = &poles[pi];
            let ed = Vec2::new(p.e[(0, p.d)], p.e[(1, p.d)]);
            let epd = Vec2::new(p.e_prime[(0, p.d)], p.e_prime[(1, p.d)]);
            out[row] += ONE - p.w * p.u.dot(&epd);
            for (qi, o) in poles.iter().enumerate() {
                if qi != pi {
                    out[2 * m + qi] -= p.w * o.u.dot(&ed) / (p.p - o.p);
                }
            }
            let two_pi_i = 2.0 * std::f64::consts::PI * I;
            for j in 0..m {
                let g = p.w * asm.weights[j] / ((asm.nodes[j] - p.p) * two_pi_i);
                // Σ_b (Ṽ−I)_{ab} (E e_d)_b for each a
                for a_ in 0..2 {
                    let s = vm[j][(a_, 0)] * ed[0] + vm[j][(a_, 1)] * ed[1];
                    out[a_ * m + j] -= g * s;
                }
            }
        }
    });

    let a = Array2::from_shape_vec((dim, dim), flat).expect("square system");
    let mut sols = Vec::with_capacity(2);
    let rcond;
    if dim > 0 {
        let lu = a.factorize_into().map_err(|e| Error::Linalg(e.to_string()))?;
        rcond = lu.rcond().map_err(|e| Error::Linalg(e.to_string()))?;
        if !(rcond >= opts.rcond_min) {
            return Err(Error::SingularSystem { rcond });
        }
        for r in 0..2 {
            let mut rhs = Array1::<C64>::zeros(dim);
            for i in 0..m {
                rhs[r * m + i] = ONE;
            }
            for (pi, p) in poles.iter().enumerate() {
                rhs[2 * m + pi] = p.w * p.e[(r, p.d)];
            }
            sols.push(lu.solve_into(rhs).map_err(|e| Error::Linalg(e.to_string()))?);
        }
    } else {
        rcond = 1.0;
        sols = vec![Array1::zeros(0), Array1::zeros(0)];
    }
    let n_minus: Vec<Mat2> = (0..m).map(|i| Mat2::new(sols[0][i], sols[0][m + i], sols[1][i], sols[1][m + i])).collect();
    let residues: Vec<Mat2> = poles
        .iter()
        .enumerate()
        .map(|(pi, p)| {
            let v = Vec2::new(sols[0][2 * m + pi], sols[1][2 * m + pi]);
            v * p.u.transpose()
        })
        .collect();
    let density: Vec<Mat2> = n_minus.iter().zip(&vm).map(|(n, v)| n * v).collect();

    let mut sol = RhSolution {
        x,
        t: data.t,
        normalization: norm,
        bd,
        nodes: asm.nodes,
        weights: asm.weights,
        node_panel: asm.node_panel,
        contour: asm.contour,
        n_minus,
        jumps: asm.jumps,
        density,
        poles,
        residues,
        diagnostics: RhDiagnostics::default(),
    };
    let jump_residual = node_residual(&sol, &c);
    let offnode = offnode_residual(&sol, interp, opts)?;
    sol.diagnostics = RhDiagnostics {
        nodes: m,
        panels: sol.contour.panels.len(),
        pruned_panels: asm.pruned,
        rcond,
        jump_residual,
        offnode_residual: offnode.0,
        offnode_at: offnode.1,
        trunc_est: asm.trunc_est,
        max_jump,
    };
    if jump_residual > opts.residual_tol {
        return Err(Error::ResidualTooLarge { residual: jump_residual, tol: opts.residual_tol });
    }
    Ok(sol)
}

/// max_i ‖N+_i − N−_iṼ_i‖ with N+ = I + residues + C⁻f + f recomputed from the density.
fn node_residual(sol: &RhSolution, c: &[C64]) -> f64 {
    let m = sol.nodes.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut np = Mat2::identity() + sol.density[i];
            for (p, r) in sol.poles.iter().zip(&sol.residues) {
                np += r / (sol.nodes[i] - p.p);
            }
            for j in 0..m {
                np += sol.density[j] * c[i * m + j];
            }
            let r = np - sol.n_minus[i] * sol.jumps[i];
            max_abs(&r) / max_abs(&sol.n_minus[i]).max(1.0)
        })
        .reduce(|| 0.0, f64::max)
}

/// Jump relation between nodes: the density interpolated on its panel against
/// N−(ζ)(Ṽ(ζ) − I) with N− from the Nyström interpolant and Ṽ from
/// interpolated data. Checked at midpoints of the interior node gaps.
fn offnode_residual(sol: &RhSolution, interp: &DataInterpolator, opts: &RhpOptions) -> Result<(f64, C64)> {
    let mut offsets = Vec::new();
    let mut o = 0;
    for p in &sol.contour.panels {
        offsets.push(o);
        o += p.len();
    }
    let two_pi_i = 2.0 * std::f64::consts::PI * I;
    let tasks: Vec<(usize, f64)> = sol
        .contour
        .panels
        .iter()
        .enumerate()
        .flat_map(|(pi, p)| {
            let n = p.len();
            (2..n.saturating_sub(3)).map(move |j| (pi, 0.5 * (p.u[j] + p.u[j + 1])))
        })
        .collect();
    let vals = tasks
        .par_iter()
        .map(|&(pi, u)| -> Result<(f64, C64)> {
            let pan = &sol.contour.panels[pi];
            let z = pan.point_at(u);
            let coef = barycentric_coefficients(&pan.u, &pan.bary, u);
            let own = &sol.density[offsets[pi]..offsets[pi] + pan.len()];
            let gz = pan.spec.clustering.map(u).1;
            let hz: Mat2 = own.iter().zip(&coef).zip(&pan.gp).map(|((f, c), g)| f * C64::from(c * g)).sum();
            let fz = hz / C64::from(gz);
            let mut acc = Mat2::zeros();
            for j in 0..sol.nodes.len() {
                acc += (sol.density[j] - fz) * (sol.weights[j] / (sol.nodes[j] - z));
            }
            let mut l = ZERO;
            for (qi, p) in sol.contour.panels.iter().enumerate() {
                if qi == pi {
                    l += C64::from(((p.spec.b - z).norm() / (z - p.spec.a).norm()).ln());
                } else {
                    l += ((p.spec.b - z) / (p.spec.a - z)).ln();
                }
            }
            let mut nm = Mat2::identity() + (acc + fz * l) / two_pi_i - fz * C64::from(0.5);
            for (p, r) in sol.poles.iter().zip(&sol.residues) {
                nm += r / (z - p.p);
            }
            let v = node_jump(interp, pan, z, sol.x, sol.normalization, opts.rho_floor, None)?;
            let r = fz - nm * (v - Mat2::identity());
            Ok((max_abs(&r) / max_abs(&nm).max(1.0), z))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold((0.0, ZERO), |a, b| if b.0 > a.0 { b } else { a }))
}
