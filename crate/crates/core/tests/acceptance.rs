//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. `ACCEPTANCE_ONLY=3,7` runs a subset.

use std::sync::Mutex;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use mkdv_nzbc::branch::{gamma, Which};
use mkdv_nzbc::contour::{build_contour, build_contour_with, ContourOptions};
use mkdv_nzbc::evolution::{evolve_to, f_pm};
use mkdv_nzbc::pde_ref::{PdeOptions, PdeState};
use mkdv_nzbc::jost::{symmetry_check, JostOptions};
use mkdv_nzbc::reconstruct::{reconstruct_grid, FieldGrid, ReconstructOptions};
use mkdv_nzbc::rhp::Normalization;
use mkdv_nzbc::scattering::{
    find_eigenvalues, s11_minus_relation_check, sample_contour, scattering_matrix, step_scattering, ConjugateEigen, DiscreteEigen, ScatteringOptions,
};
use mkdv_nzbc::profile::Bump;
use mkdv_nzbc::{BoundaryData, Mat2, PotentialProfile, Regime, SpectralPoint, C64};

type Outcome = Result<(bool, String), String>;

const REGIMES: [Regime; 2] = [Regime::Focusing, Regime::Defocusing];

fn bd(regime: Regime) -> BoundaryData {
    BoundaryData::new(2.0, 1.0, regime).unwrap()
}

fn smooth(regime: Regime) -> PotentialProfile {
    PotentialProfile::tanh_step(bd(regime), 1.0, 0.0, None, 1e-10).unwrap()
}

/// `count` contour nodes spread evenly over the whole contour.
fn spread_nodes(b: &BoundaryData, count: usize) -> Result<Vec<C64>, String> {
    let all: Vec<C64> = build_contour(b, 16).map_err(|e| e.to_string())?.nodes().map(|(_, z)| z).collect();
    if all.len() < count {
        return Err(format!("contour has only {} nodes", all.len()));
    }
    Ok((0..count).map(|i| all[i * all.len() / count]).collect())
}

fn determinant_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for regime in REGIMES {
        let p = smooth(regime);
        let b = p.bd;
        let opts = ScatteringOptions::for_boundary(&b);
        // det S needs all four entries, which exist off the Σ± segments
        let all: Vec<C64> = build_contour(&b, 32).map_err(|e| e.to_string())?.nodes().map(|(_, z)| z).collect();
        let complete: Vec<_> = all
            .iter()
            .map(|&k| scattering_matrix(&p, SpectralPoint::principal(k), &opts).map_err(|e| e.to_string()))
            .filter(|s| s.as_ref().map_or(true, |s| s.det().is_some()))
            .collect::<Result<_, _>>()?;
        if complete.len() < 200 {
            return Err(format!("{regime}: only {} nodes carry a full S", complete.len()));
        }
        for i in 0..200 {
            let s = &complete[i * complete.len() / 200];
            let pt = s.point;
            let d = s.det().unwrap();
            let want = gamma(pt, Which::Minus, &b) / gamma(pt, Which::Plus, &b);
            worst = worst.max((d - want).norm() / want.norm());
            checked += 1;
        }
    }
    Ok((worst <= 1e-8, format!("max relative defect {worst:.2e} at {checked} nodes")))
}

fn step_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for regime in REGIMES {
        let b = bd(regime);
        let p = PotentialProfile::step(b);
        let opts = ScatteringOptions::for_boundary(&b);
        for k in spread_nodes(&b, 100)? {
            let pt = SpectralPoint::principal(k);
            let s = scattering_matrix(&p, pt, &opts).map_err(|e| e.to_string())?;
            let exact = step_scattering(pt, &b);
            // entries whose Jost columns are not both bounded at k are not defined
            for (i, v) in s.entries().iter().enumerate() {
                if let Some(v) = v {
                    worst = worst.max((v - exact[(i / 2, i % 2)]).norm());
                    count += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-6, format!("max entrywise error {worst:.2e}, {count} entries at 100 nodes per regime")))
}

/// `n` interior points on each cut segment.
fn cut_segments(b: &BoundaryData, n: usize) -> Vec<Vec<C64>> {
    let (qm, qp) = (b.q_minus, b.q_plus);
    let t = |i: usize| (i as f64 + 0.5) / n as f64;
    let seg = |f: &dyn Fn(f64) -> C64| (0..n).map(|i| f(t(i))).collect::<Vec<_>>();
    match b.regime {
        Regime::Focusing => vec![
            seg(&|s| C64::new(0.0, -qp + 2.0 * qp * s)),
            seg(&|s| C64::new(0.0, qp + (qm - qp) * s)),
            seg(&|s| C64::new(0.0, -qm + (qm - qp) * s)),
        ],
        Regime::Defocusing => vec![
            seg(&|s| C64::new(qm + 4.0 * s, 0.0)),
            seg(&|s| C64::new(-qm - 4.0 * s, 0.0)),
            seg(&|s| C64::new(qp + (qm - qp) * s, 0.0)),
            seg(&|s| C64::new(-qp - (qm - qp) * s, 0.0)),
        ],
    }
}

fn one_sided_relations() -> Outcome {
    let mut worst = 0.0f64;
    let mut segments = 0;
    for regime in REGIMES {
        let b = bd(regime);
        let p = PotentialProfile::step(b);
        let opts = ScatteringOptions::for_boundary(&b);
        for seg in cut_segments(&b, 50) {
            segments += 1;
            for k in seg {
                let d = s11_minus_relation_check(&p, k, &opts).map_err(|e| e.to_string())?;
                worst = worst.max(d.max());
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative defect {worst:.2e} over {segments} segments × 50 points")))
}

fn cut_symmetry() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for regime in REGIMES {
        let b = bd(regime);
        let mut opts = JostOptions::for_boundary(&b);
        opts.ode.rtol = 1e-12;
        opts.ode.atol = 1e-12;
        let p = smooth(regime);
        let pts: Vec<C64> = cut_segments(&b, 50).concat();
        // 50 points spread over all segments
        for i in 0..50 {
            let k = pts[i * pts.len() / 50];
            for which in [Which::Plus, Which::Minus] {
                let on_open_cut = match regime {
                    Regime::Focusing => k.im.abs() < b.q(which),
                    Regime::Defocusing => k.re.abs() > b.q(which),
                };
                if !on_open_cut {
                    continue;
                }
                for x in [-1.5, 0.0, 2.0] {
                    let d = symmetry_check(&p, SpectralPoint::principal(k), which, x, &opts).map_err(|e| e.to_string())?;
                    worst = worst.max(d);
                    count += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-8, format!("max defect {worst:.2e} over {count} (point, branch, x) checks")))
}

const I: C64 = C64::new(0.0, 1.0);

/// σ3Q for the focusing background q0, and E, E′ at k = iν with ν > q0,
/// written out directly: λ = i√(ν² − q0²).
fn focusing_e(q0: f64, k: C64) -> (Mat2, Mat2, C64) {
    let lam = I * (k.im * k.im - q0 * q0).sqrt() * k.im.signum();
    let s3q = Mat2::new(C64::from(0.0), C64::from(q0), C64::from(q0), C64::from(0.0));
    let d = k - lam;
    let e = Mat2::identity() + s3q * (I / d);
    let ep = s3q * (-I * (1.0 - k / lam) / (d * d));
    (e, ep, lam)
}

/// One conjugate pair {k1, k̄1} with residue conditions
/// Res M e1 at k1 = C e^{2iλx} M e2 at k1, Res M e2 at k̄1 = C̄ e^{−2iλ̄x} M e1 at k̄1,
/// M = (I + R1/(k − k1) + R2/(k − k̄1)) E, solved as 8 linear equations for R1, R2.
fn algebraic_one_soliton(q0: f64, nu: f64, c: C64, x: f64) -> C64 {
    let k1 = C64::new(0.0, nu);
    let k2 = k1.conj();
    let (e1, e1p, l1) = focusing_e(q0, k1);
    let (e2, e2p, l2) = focusing_e(q0, k2);
    let w1 = c * (2.0 * I * l1 * x).exp();
    let w2 = -c.conj() * (-2.0 * I * l2 * x).exp();
    // unknown index: R1[(r, s)] -> 2r + s, R2[(r, s)] -> 4 + 2r + s
    let mut a = DMatrix::<C64>::zeros(8, 8);
    let mut b = DVector::<C64>::zeros(8);
    let mut row = 0;
    for r in 0..2 {
        // R1 E(k1) e2 = 0
        for s in 0..2 {
            a[(row, 2 * r + s)] += e1[(s, 1)];
        }
        row += 1;
        // R1 E(k1) e1 − w1[(E(k1) + R2 E(k1)/(k1 − k2) + R1 E′(k1)) e2] = w1 E(k1) e2, row r
        for s in 0..2 {
            a[(row, 2 * r + s)] += e1[(s, 0)] - w1 * e1p[(s, 1)];
            a[(row, 4 + 2 * r + s)] -= w1 * e1[(s, 1)] / (k1 - k2);
        }
        b[row] = w1 * e1[(r, 1)];
        row += 1;
        // R2 E(k2) e1 = 0
        for s in 0..2 {
            a[(row, 4 + 2 * r + s)] += e2[(s, 0)];
        }
        row += 1;
        for s in 0..2 {
            a[(row, 4 + 2 * r + s)] += e2[(s, 1)] - w2 * e2p[(s, 0)];
            a[(row, 2 * r + s)] -= w2 * e2[(s, 0)] / (k2 - k1);
        }
        b[row] = w2 * e2[(r, 0)];
        row += 1;
    }
    let sol = a.lu().solve(&b).expect("algebraic system is singular");
    // q = q0 − 2i (R1 + R2)12
    C64::from(q0) - 2.0 * I * (sol[1] + sol[5])
}

fn reflectionless() -> Outcome {
    let q0 = 1.0;
    let nu = 1.6;
    let c = C64::new(0.7, -0.4);
    let bd = BoundaryData::symmetric(q0, Regime::Focusing).map_err(|e| e.to_string())?;
    let p = PotentialProfile::constant(bd).map_err(|e| e.to_string())?;
    let contour = build_contour(&bd, 12).map_err(|e| e.to_string())?;
    let mut data = sample_contour(&p, &contour, &ScatteringOptions::for_boundary(&bd)).map_err(|e| e.to_string())?;
    let k1 = C64::new(0.0, nu);
    let lam = I * (nu * nu - q0 * q0).sqrt();
    data.discrete = vec![DiscreteEigen {
        k: k1,
        lambda_plus: lam,
        lambda_minus: lam,
        b: C64::from(1.0),
        s11_prime: 1.0 / c,
        c,
        conj: Some(ConjugateEigen { k: k1.conj(), b: C64::from(1.0), s22_prime: -1.0 / c.conj(), c: -c.conj(), s22_defect: 0.0 }),
    }];
    let mut opts = ReconstructOptions::default();
    opts.rhp.normalization = Some(Normalization::Right);
    let xs: Vec<f64> = (0..=20).map(|i| -3.0 + 0.3 * i as f64).collect();
    let grid = reconstruct_grid(&data, &xs, &opts);
    let mut worst = 0.0f64;
    let mut bump = 0.0f64;
    for pt in &grid.points {
        let q = pt.q.ok_or_else(|| format!("x={}: {:?}", pt.x, pt.error))?;
        let want = algebraic_one_soliton(q0, nu, c, pt.x);
        worst = worst.max((C64::new(q, pt.q_imag.unwrap_or(0.0)) - want).norm());
        bump = bump.max((want.re - q0).abs());
    }
    Ok((worst <= 1e-10 && bump > 0.1, format!("max |q_RH − q_alg| = {worst:.2e} over {} points (soliton height {bump:.2})", xs.len())))
}

/// Every reconstructed grid, for the self-consistency criterion.
static GRIDS: Mutex<Vec<(String, FieldGrid)>> = Mutex::new(Vec::new());

fn keep(label: String, g: &FieldGrid) {
    GRIDS.lock().unwrap().push((label, g.clone()));
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn data_for(p: &PotentialProfile, n: usize) -> Result<mkdv_nzbc::scattering::ScatteringData, String> {
    let c = build_contour(&p.bd, n).map_err(|e| e.to_string())?;
    sample_contour(p, &c, &ScatteringOptions::for_boundary(&p.bd)).map_err(|e| e.to_string())
}

/// Max |q_grid − reference| with failed points reported as errors.
fn max_error(g: &FieldGrid, reference: impl Fn(f64) -> f64) -> Result<f64, String> {
    g.points.iter().try_fold(0.0f64, |m, pt| {
        let q = pt.q.ok_or_else(|| format!("x={}: {}", pt.x, pt.error.clone().unwrap_or_default()))?;
        Ok(m.max((q - reference(pt.x)).abs()))
    })
}

fn roundtrip() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for regime in REGIMES {
        let p = smooth(regime);
        let data = data_for(&p, 24)?;
        let g = reconstruct_grid(&data, &grid(-20.0, 20.0, 41), &ReconstructOptions::default());
        keep(format!("roundtrip {regime}"), &g);
        let err = max_error(&g, |x| p.eval(x))?;
        ok &= err <= 1e-3;
        parts.push(format!("{regime} {err:.2e}"));
    }
    Ok((ok, format!("max-norm error on 41 points in [−20, 20]: {}", parts.join(", "))))
}

/// Smoothed step evolved by the PDE on [−30, 30], h = 0.05.
fn pde_at(p: &PotentialProfile, t: f64) -> Result<PdeState, String> {
    let mut s = PdeState::from_profile(p, -30.0, 30.0, 1201).map_err(|e| e.to_string())?;
    s.evolve_to(t, &PdeOptions::default()).map_err(|e| e.to_string())?;
    Ok(s)
}

fn dynamic_cross_check() -> Outcome {
    let t = 0.1;
    let mut parts = Vec::new();
    let mut ok = true;
    for regime in REGIMES {
        let p = smooth(regime);
        let pde = pde_at(&p, t)?;
        let data = evolve_to(&data_for(&p, 24)?, t);
        // interior 80% of [−20, 20], on PDE grid points
        let g = reconstruct_grid(&data, &grid(-16.0, 16.0, 33), &ReconstructOptions::default());
        keep(format!("t = {t} {regime}"), &g);
        let err = max_error(&g, |x| pde.sample(x).unwrap())?;
        ok &= err <= 1e-3;
        parts.push(format!("{regime} {err:.2e}"));
    }
    Ok((ok, format!("max |q_RH − q_PDE| at t = {t} on 33 points in [−16, 16]: {}", parts.join(", "))))
}

/// Asymmetric data with q− = q+(1 + 1e-6) against the symmetric problem.
fn near_symmetric() -> Outcome {
    let bump = Some(Bump { amplitude: 0.5, width: 1.0, center: 0.0 });
    let xs = grid(-5.0, 5.0, 101);
    let mut o = ReconstructOptions::default();
    // the two short segments need clustered nodes all the way to their ends
    o.rhp.grading_levels = 6;
    let mut parts = Vec::new();
    let mut ok = true;
    for regime in REGIMES {
        let near = BoundaryData::new(1.0 + 1e-6, 1.0, regime).map_err(|e| e.to_string())?;
        let pn = PotentialProfile::tanh_step(near, 1.0, 0.0, bump, 1e-10).map_err(|e| e.to_string())?;
        let mut co = ContourOptions::for_boundary(&near, 24);
        co.eps_bp = 1e-13;
        let mut so = ScatteringOptions::for_boundary(&near);
        so.jost.eps_bp = 1e-13;
        let contour = build_contour_with(&near, &co).map_err(|e| e.to_string())?;
        let dn = sample_contour(&pn, &contour, &so).map_err(|e| e.to_string())?;
        let sym = BoundaryData::symmetric(1.0, regime).map_err(|e| e.to_string())?;
        let ps = PotentialProfile::tanh_step(sym, 1.0, 0.0, bump, 1e-10).map_err(|e| e.to_string())?;
        let ds = data_for(&ps, 24)?;
        let gn = reconstruct_grid(&dn, &xs, &o);
        let gs = reconstruct_grid(&ds, &xs, &o);
        keep(format!("near-symmetric {regime}"), &gn);
        keep(format!("symmetric {regime}"), &gs);
        let mut diff = 0.0f64;
        for (a, b) in gn.points.iter().zip(&gs.points) {
            match (a.q, b.q) {
                (Some(u), Some(v)) => diff = diff.max((u - v).abs()),
                _ => return Err(format!("{regime} x={}: {:?} {:?}", a.x, a.error, b.error)),
            }
        }
        ok &= diff <= 1e-5;
        parts.push(format!("{regime} {diff:.2e}"));
    }
    Ok((ok, format!("max |q_near − q_sym| on 101 points in [−5, 5]: {}", parts.join(", "))))
}

/// Discrete spectrum and reflection phase of the PDE solution at t = 0.1
/// against the evolution law.
fn isospectrality() -> Outcome {
    let t = 0.1;
    let mut parts = Vec::new();
    let mut ok = true;
    for regime in REGIMES {
        let b = bd(regime);
        // a hump binds eigenvalues in the focusing case, a dip in the defocusing gap
        let amplitude = match regime {
            Regime::Focusing => 2.0,
            Regime::Defocusing => -1.0,
        };
        let bump = Some(Bump { amplitude, width: 1.0, center: 0.0 });
        let p = PotentialProfile::tanh_step(b, 1.0, 0.0, bump, 1e-10).map_err(|e| e.to_string())?;
        // the bump sheds fast short waves: a wide domain keeps them off the
        // pinned ends, and h = 0.0125 holds the PDE error on the small
        // reflection coefficient below the phase tolerance
        let mut pde = PdeState::from_profile(&p, -60.0, 60.0, 9601).map_err(|e| e.to_string())?;
        let po = PdeOptions { drift_tol: 1e-4, ..PdeOptions::default() };
        pde.evolve_to(t, &po).map_err(|e| e.to_string())?;
        // support trimmed where |q − q±| ≤ 1e-6; coarser trimming drops
        // radiation that shows in the phase of the small ρ
        let moved = PotentialProfile::sampled(b, &pde.grid(), &pde.q, 1e-6).map_err(|e| e.to_string())?;
        let so = ScatteringOptions::for_boundary(&b);
        let before = find_eigenvalues(&p, &so).map_err(|e| e.to_string())?.1;
        let after = find_eigenvalues(&moved, &so).map_err(|e| e.to_string())?.1;
        if before.len() != after.len() {
            ok = false;
            parts.push(format!("{regime} {} eigenvalues at t = 0, {} at t = {t}", before.len(), after.len()));
            continue;
        }
        let drift = before
            .iter()
            .map(|e| after.iter().map(|a| (a - e).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let ks: Vec<f64> = match regime {
            Regime::Focusing => grid(-3.0, 3.0, 25),
            Regime::Defocusing => grid(2.2, 4.0, 10).into_iter().flat_map(|v| [v, -v]).collect(),
        };
        let (mut phase, mut used) = (0.0f64, 0);
        for k in ks {
            let pt = SpectralPoint::principal(C64::new(k, 0.0));
            let r0 = scattering_matrix(&p, pt, &so).map_err(|e| e.to_string())?.rho;
            let r1 = scattering_matrix(&moved, pt, &so).map_err(|e| e.to_string())?.rho;
            let (Some(r0), Some(r1)) = (r0, r1) else { continue };
            if r0.norm() <= 1e-3 {
                continue;
            }
            let want = (C64::new(0.0, -2.0 * t) * f_pm(pt, Which::Plus, &b)).exp();
            phase = phase.max((r1 / (r0 * want)).arg().abs());
            used += 1;
        }
        if used == 0 {
            return Err(format!("{regime}: no real k with |ρ| > 1e-3"));
        }
        ok &= drift <= 1e-4 && phase <= 1e-3;
        parts.push(format!("{regime} {} eigenvalues, max |Δk| {drift:.2e}, ρ phase {phase:.2e} over {used} k", before.len()));
    }
    Ok((ok, format!("t = {t}: {}", parts.join("; "))))
}

/// Jump residual and large-k agreement over every solve kept by the
/// criteria above; solves a small grid of its own if none ran.
fn solve_diagnostics() -> Outcome {
    let mut kept = GRIDS.lock().unwrap().clone();
    if kept.is_empty() {
        for regime in REGIMES {
            let data = data_for(&smooth(regime), 24)?;
            kept.push((format!("{regime}"), reconstruct_grid(&data, &grid(-4.0, 4.0, 5), &ReconstructOptions::default())));
        }
    }
    let (mut jump, mut limit, mut count) = (0.0f64, 0.0f64, 0);
    for (_, g) in &kept {
        for pt in g.points.iter().filter(|p| p.q.is_some()) {
            jump = jump.max(pt.jump_residual.unwrap_or(f64::INFINITY));
            limit = limit.max(pt.limit_diff.unwrap_or(f64::INFINITY));
            count += 1;
        }
    }
    let ok = count > 0 && jump <= 1e-6 && limit <= 1e-6;
    Ok((ok, format!("{count} accepted points in {} grids: max jump residual {jump:.2e}, max formula vs large-k {limit:.2e}", kept.len())))
}

fn main() {
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "determinant identity", determinant_identity),
        (2, "step oracle", step_oracle),
        (3, "one-sided cut relations", one_sided_relations),
        (4, "cut symmetry", cut_symmetry),
        (5, "near-symmetric limit", near_symmetric),
        (7, "roundtrip at t = 0", roundtrip),
        (8, "dynamic cross-validation", dynamic_cross_check),
        (9, "isospectrality", isospectrality),
        (10, "reflectionless one-eigenvalue solve", reflectionless),
        // last, so it sees every solve above
        (6, "RH solve diagnostics", solve_diagnostics),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} [{n:>2}] {name}: {detail} ({:.1} s)", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
