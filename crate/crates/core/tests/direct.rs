use mkdv_nzbc::branch::{det2, gamma, lambda, Which};
use mkdv_nzbc::contour::build_contour;
use mkdv_nzbc::jost::{symmetry_check, JostOptions};
use mkdv_nzbc::scattering::{
    find_discrete_spectrum, find_eigenvalues, norming_constants, s11_minus_relation_check, scattering_matrix, step_scattering, ScatteringOptions,
};
use mkdv_nzbc::{BoundaryData, Error, PotentialProfile, Regime, SpectralPoint, C64};

fn bd(regime: Regime) -> BoundaryData {
    BoundaryData::new(2.0, 1.0, regime).unwrap()
}

fn smooth(regime: Regime) -> PotentialProfile {
    PotentialProfile::tanh_step(bd(regime), 1.0, 0.0, None, 1e-10).unwrap()
}

#[test]
fn step_profile_matches_closed_form() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let b = bd(regime);
        let p = PotentialProfile::step(b);
        let opts = ScatteringOptions::for_boundary(&b);
        let c = build_contour(&b, 12).unwrap();
        let mut worst = 0.0f64;
        for (_, z) in c.nodes().step_by(2) {
            let pt = SpectralPoint::principal(z);
            let s = scattering_matrix(&p, pt, &opts).unwrap();
            let exact = step_scattering(pt, &b);
            for (i, v) in s.entries().iter().enumerate() {
                if let Some(v) = v {
                    worst = worst.max((v - exact[(i / 2, i % 2)]).norm());
                }
            }
        }
        assert!(worst < 1e-10, "{regime}: {worst:e}");
    }
}

#[test]
fn determinant_identity_smooth_step() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let p = smooth(regime);
        let b = p.bd;
        let opts = ScatteringOptions::for_boundary(&b);
        let c = build_contour(&b, 16).unwrap();
        let mut n = 0;
        for (_, z) in c.nodes() {
            let pt = SpectralPoint::principal(z);
            let s = scattering_matrix(&p, pt, &opts).unwrap();
            if let Some(d) = s.det() {
                let want = gamma(pt, Which::Minus, &b) / gamma(pt, Which::Plus, &b);
                assert!((d - want).norm() / want.norm() < 1e-8, "{regime} k={z}: {d} vs {want}");
                n += 1;
            }
        }
        assert!(n > 50);
    }
}

#[test]
fn step_closed_form_determinant() {
    let b = bd(Regime::Focusing);
    let pt = SpectralPoint::principal(C64::new(0.7, 0.2));
    let s = step_scattering(pt, &b);
    let want = gamma(pt, Which::Minus, &b) / gamma(pt, Which::Plus, &b);
    assert!((det2(&s) - want).norm() < 1e-13);
}

fn cut_points(b: &BoundaryData, n: usize) -> Vec<C64> {
    let (qm, qp) = (b.q_minus, b.q_plus);
    let t = |i: usize| (i as f64 + 0.5) / n as f64;
    let mut pts = Vec::new();
    match b.regime {
        Regime::Focusing => {
            for i in 0..n {
                pts.push(C64::new(0.0, -qp + 2.0 * qp * t(i)));
                pts.push(C64::new(0.0, qp + (qm - qp) * t(i)));
                pts.push(C64::new(0.0, -qm + (qm - qp) * t(i)));
            }
        }
        Regime::Defocusing => {
            for i in 0..n {
                pts.push(C64::new(qm + 4.0 * t(i), 0.0));
                pts.push(C64::new(-qm - 4.0 * t(i), 0.0));
                pts.push(C64::new(qp + (qm - qp) * t(i), 0.0));
                pts.push(C64::new(-qp - (qm - qp) * t(i), 0.0));
            }
        }
    }
    pts
}

#[test]
fn one_sided_relations_on_step() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let b = bd(regime);
        for p in [PotentialProfile::step(b), smooth(regime)] {
            let opts = ScatteringOptions::for_boundary(&b);
            for k in cut_points(&b, 50) {
                let d = s11_minus_relation_check(&p, k, &opts).unwrap();
                assert!(d.s11.is_some() || d.s22.is_some());
                assert!(d.max() < 1e-8, "{regime} k={k}: {d:?}");
            }
        }
    }
}

#[test]
fn relation_check_rejects_off_cut_points() {
    let b = bd(Regime::Focusing);
    let p = PotentialProfile::step(b);
    let r = s11_minus_relation_check(&p, C64::new(0.3, 0.5), &ScatteringOptions::for_boundary(&b));
    assert!(matches!(r, Err(Error::NotOnSegment(_))));
}

#[test]
fn cut_symmetry_of_jost_functions() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let b = bd(regime);
        let mut opts = JostOptions::for_boundary(&b);
        opts.ode.rtol = 1e-12;
        opts.ode.atol = 1e-12;
        let mut worst = 0.0f64;
        for p in [PotentialProfile::step(b), smooth(regime)] {
            for k in cut_points(&b, 50) {
                for which in [Which::Plus, Which::Minus] {
                    let on_open_cut = match regime {
                        Regime::Focusing => k.im.abs() < b.q(which),
                        Regime::Defocusing => k.re.abs() > b.q(which),
                    };
                    if !on_open_cut {
                        continue;
                    }
                    for x in [-1.5, 0.0, 2.0] {
                        let d = symmetry_check(&p, SpectralPoint::principal(k), which, x, &opts).unwrap();
                        assert!(d < 1e-8, "{regime} {which:?} k={k} x={x}: {d:e}");
                        worst = worst.max(d);
                    }
                }
            }
        }
    }
}

#[test]
fn symmetric_background_has_trivial_scattering() {
    for regime in [Regime::Focusing, Regime::Defocusing] {
        let b = BoundaryData::symmetric(1.0, regime).unwrap();
        let p = PotentialProfile::constant(b).unwrap();
        let opts = ScatteringOptions::for_boundary(&b);
        let s = scattering_matrix(&p, SpectralPoint::principal(C64::new(1.7, 0.0)), &opts).unwrap();
        assert_eq!(s.rho, Some(C64::new(0.0, 0.0)));
        assert_eq!(s.rho_tilde, Some(C64::new(0.0, 0.0)));
        let found = find_discrete_spectrum(&p, &opts).unwrap();
        assert!(found.eigenvalues.is_empty());
    }
}

#[test]
fn lambda_is_sampled_on_principal_side() {
    let b = bd(Regime::Focusing);
    let l = lambda(SpectralPoint::principal(C64::new(0.0, 0.5)), Which::Plus, &b);
    assert!(l.re > 0.0 && l.im == 0.0);
}

fn bump_profile(regime: Regime, amplitude: f64) -> PotentialProfile {
    let bump = mkdv_nzbc::profile::Bump { amplitude, width: 1.0, center: 0.0 };
    PotentialProfile::tanh_step(bd(regime), 1.0, 0.0, Some(bump), 1e-10).unwrap()
}

#[test]
fn focusing_bump_eigenvalues() {
    let p = bump_profile(Regime::Focusing, 2.0);
    let opts = ScatteringOptions::for_boundary(&p.bd);
    let found = find_discrete_spectrum(&p, &opts).unwrap();
    assert_eq!(found.winding, Some(found.eigenvalues.len() as i64));
    for e in &found.eigenvalues {
        let c = e.conj.unwrap();
        assert!(c.s22_defect < 1e-8);
        let off = norming_constants(e.k + 1e-3, &p, &opts);
        assert!(matches!(off, Err(Error::ColumnsNotProportional { .. })));
    }
}

#[test]
fn sampled_bump_keeps_its_eigenvalues() {
    for (regime, amplitude) in [(Regime::Focusing, 2.0), (Regime::Defocusing, -1.0)] {
        let p = bump_profile(regime, amplitude);
        let (x, q) = p.samples(-40.0, 40.0, 0.025);
        let s = PotentialProfile::sampled(p.bd, &x, &q, 1e-6).unwrap();
        // support shrinks to where the samples leave the background
        assert!(s.x_lo > -40.0 && s.x_hi < 40.0, "{regime}: [{}, {}]", s.x_lo, s.x_hi);
        assert_eq!(s.eval(-39.0), p.bd.q_minus);
        let opts = ScatteringOptions::for_boundary(&p.bd);
        let exact = find_eigenvalues(&p, &opts).unwrap().1;
        let sampled = find_eigenvalues(&s, &opts).unwrap().1;
        assert_eq!(exact.len(), 2, "{regime}");
        assert_eq!(sampled.len(), 2, "{regime}");
        for (a, b) in exact.iter().zip(&sampled) {
            assert!((a - b).norm() < 1e-5, "{regime}: {a} vs {b}");
        }
    }
}
