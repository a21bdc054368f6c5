use mkdv_nzbc::branch::{gamma, inv2, max_abs, wronskian, Which};
use mkdv_nzbc::contour::{build_contour, SegmentLabel};
use mkdv_nzbc::jost::{jost_matrix, JostOptions};
use mkdv_nzbc::reconstruct::{reconstruct_grid, ReconstructOptions};
use mkdv_nzbc::rhp::{connection_matrix, connection_matrix_left, jump_matrix, solve_rhp, ConjResidue, RhpOptions};
use mkdv_nzbc::scattering::{sample_contour, scattering_matrix, ScatteringData, ScatteringOptions};
use mkdv_nzbc::{BoundaryData, Error, Mat2, PotentialProfile, Regime, SpectralPoint, Vec2, C64};

fn bd(regime: Regime) -> BoundaryData {
    BoundaryData::new(2.0, 1.0, regime).unwrap()
}

fn smooth(regime: Regime) -> PotentialProfile {
    PotentialProfile::tanh_step(bd(regime), 1.0, 0.0, None, 1e-10).unwrap()
}

fn col(m: &Mat2, j: usize) -> Vec2 {
    Vec2::new(m[(0, j)], m[(1, j)])
}

/// Ψ at x = 0 on one side, straight from the Jost solutions, and the diagonal
/// D of the left normalization.
fn psi0(p: &PotentialProfile, pt: SpectralPoint, upper: bool, opts: &JostOptions) -> (Mat2, Mat2) {
    let b = &p.bd;
    let fm = jost_matrix(p, pt, Which::Minus, 0.0, opts).unwrap();
    let fp = jost_matrix(p, pt, Which::Plus, 0.0, opts).unwrap();
    let gp = gamma(pt, Which::Plus, b);
    let ds = gamma(pt, Which::Minus, b) / gp;
    if upper {
        let s11 = wronskian(&col(&fm, 0), &col(&fp, 1)) / gp;
        (Mat2::from_columns(&[col(&fm, 0) / s11, col(&fp, 1)]), Mat2::new(s11, C64::new(0.0, 0.0), C64::new(0.0, 0.0), ds / s11))
    } else {
        let s22 = wronskian(&col(&fp, 0), &col(&fm, 1)) / gp;
        (Mat2::from_columns(&[col(&fp, 0), col(&fm, 1) / s22]), Mat2::new(ds / s22, C64::new(0.0, 0.0), C64::new(0.0, 0.0), s22))
    }
}

fn segment_points(regime: Regime) -> Vec<(SegmentLabel, C64)> {
    use SegmentLabel::*;
    let c = C64::new;
    match regime {
        Regime::Focusing => vec![
            (RealLine, c(0.7, 0.0)),
            (RealLine, c(-1.9, 0.0)),
            (SigmaPlusUp, c(0.0, 0.4)),
            (SigmaPlusDown, c(0.0, -0.6)),
            (Sigma0Up, c(0.0, 1.5)),
            (Sigma0Down, c(0.0, -1.3)),
        ],
        Regime::Defocusing => vec![
            (SigmaMinusRay, c(2.7, 0.0)),
            (SigmaMinusRay, c(-3.4, 0.0)),
            (Sigma0Real, c(1.4, 0.0)),
            (Sigma0Real, c(-1.7, 0.0)),
        ],
    }
}

fn upper_sides(label: SegmentLabel, k: C64, regime: Regime) -> (bool, bool) {
    match (regime, label) {
        (Regime::Defocusing, _) => (true, true),
        (_, SegmentLabel::RealLine) => (true, false),
        _ => (k.im > 0.0, k.im > 0.0),
    }
}

#[test]
fn connection_matrices_match_jost_solutions() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let p = smooth(regime);
        let b = p.bd;
        let mut jo = JostOptions::for_boundary(&b);
        jo.ode.rtol = 1e-12;
        jo.ode.atol = 1e-12;
        let mut so = ScatteringOptions::for_boundary(&b);
        so.jost = jo;
        for (label, k) in segment_points(regime) {
            let plus = SpectralPoint::principal(k);
            let minus = if label == SegmentLabel::RealLine { plus } else { SpectralPoint::minus_side(k) };
            let (up_p, up_m) = upper_sides(label, k, regime);
            let (pp, dp) = psi0(&p, plus, up_p, &jo);
            let (pm, dm) = psi0(&p, minus, up_m, &jo);
            let w_ref = inv2(&pm) * pp;
            let sample = scattering_matrix(&p, plus, &so).unwrap();
            let w = connection_matrix(&sample, label, &b, 1e-12).unwrap();
            let err = max_abs(&(w - w_ref)) / max_abs(&w_ref);
            assert!(err < 1e-8, "{regime} {label:?} k={k}: W mismatch {err:e}\n{w}\n{w_ref}");
            let wl_ref = inv2(&dm) * w_ref * dp;
            let wl = connection_matrix_left(&sample, label, &b, 1e-12).unwrap();
            let err = max_abs(&(wl - wl_ref)) / max_abs(&wl_ref);
            assert!(err < 1e-8, "{regime} {label:?} k={k}: W_L mismatch {err:e}");
        }
    }
}

#[test]
fn wrong_segment_is_rejected() {
    let b = bd(Regime::Defocusing);
    let p = smooth(Regime::Defocusing);
    let s = scattering_matrix(&p, SpectralPoint::principal(C64::new(2.5, 0.0)), &ScatteringOptions::for_boundary(&b)).unwrap();
    let r = connection_matrix(&s, SegmentLabel::SigmaPlusUp, &b, 1e-12);
    assert!(matches!(r, Err(Error::NotOnSegment(_))));
}

fn data(regime: Regime, n: usize) -> ScatteringData {
    let p = smooth(regime);
    sample_contour(&p, &build_contour(&p.bd, n).unwrap(), &ScatteringOptions::for_boundary(&p.bd)).unwrap()
}

#[test]
fn jump_matrix_reads_interpolated_data() {
    let d = data(Regime::Focusing, 24);
    let k = C64::new(0.0, 1.37);
    let j = jump_matrix(SpectralPoint::principal(k), SegmentLabel::Sigma0Up, 0.0, 0.0, &d).unwrap();
    let p = smooth(Regime::Focusing);
    let s = scattering_matrix(&p, SpectralPoint::principal(k), &ScatteringOptions::for_boundary(&p.bd)).unwrap();
    let w = connection_matrix(&s, SegmentLabel::Sigma0Up, &p.bd, 1e-12).unwrap();
    assert!(max_abs(&(j.v - w)) / max_abs(&w) < 1e-7, "{}\n{}", j.v, w);
    assert!(matches!(
        jump_matrix(SpectralPoint::principal(C64::new(30.0, 0.0)), SegmentLabel::RealLine, 0.0, 0.0, &d),
        Err(Error::RhoInterpolationGap(_))
    ));
    assert!(matches!(jump_matrix(SpectralPoint::principal(k), SegmentLabel::Sigma0Up, 0.0, 0.5, &d), Err(Error::Config(_))));
}

#[test]
fn roundtrip_smooth_step_few_points() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let d = data(regime, 24);
        let p = smooth(regime);
        let xs = [-4.0, -0.5, 0.0, 0.7, 4.0];
        let g = reconstruct_grid(&d, &xs, &ReconstructOptions::default());
        for pt in &g.points {
            let q = pt.q.unwrap_or_else(|| panic!("{regime} x={}: {:?}", pt.x, pt.error));
            assert!((q - p.eval(pt.x)).abs() < 1e-4, "{regime} x={}: {q} vs {}", pt.x, p.eval(pt.x));
            assert!(pt.q_imag.unwrap().abs() < 1e-8);
            assert!(pt.jump_residual.unwrap() < 1e-6);
            assert!(pt.limit_diff.unwrap() < 1e-6);
        }
    }
}

#[test]
fn symmetric_background_gives_constant() {
    let b = BoundaryData::symmetric(1.0, Regime::Focusing).unwrap();
    let p = PotentialProfile::constant(b).unwrap();
    let d = sample_contour(&p, &build_contour(&b, 12).unwrap(), &ScatteringOptions::for_boundary(&b)).unwrap();
    let s = solve_rhp(&d, 1.3, &RhpOptions::default()).unwrap();
    assert!(s.moment12().norm() < 1e-14);
}

#[test]
fn conj_residue_switch_agrees_on_bump() {
    let bump = mkdv_nzbc::profile::Bump { amplitude: 2.0, width: 1.0, center: 0.0 };
    let p = PotentialProfile::tanh_step(bd(Regime::Focusing), 1.0, 0.0, Some(bump), 1e-10).unwrap();
    let d = sample_contour(&p, &build_contour(&p.bd, 24).unwrap(), &ScatteringOptions::for_boundary(&p.bd)).unwrap();
    assert_eq!(d.discrete.len(), 2);
    for x in [-1.0, 0.4] {
        let mut o = ReconstructOptions::default();
        let a = reconstruct_grid(&d, &[x], &o).points[0].q.unwrap();
        o.rhp.conj_residue = ConjResidue::Symmetry;
        let b = reconstruct_grid(&d, &[x], &o).points[0].q.unwrap();
        assert!((a - p.eval(x)).abs() < 1e-4, "x={x}: {a} vs {}", p.eval(x));
        assert!((a - b).abs() < 1e-6, "x={x}: {a} vs {b}");
    }
}
