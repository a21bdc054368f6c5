//! The five subcommands.

use serde::Serialize;

use mkdv_nzbc::branch::{eigenmatrix, eigenmatrix_inverse, gamma, lambda, max_abs};
use mkdv_nzbc::contour::build_contour;
use mkdv_nzbc::evolution::{evolve_to, f_pm};
use mkdv_nzbc::jost::symmetry_check;
use mkdv_nzbc::profile::write_two_column;
use mkdv_nzbc::reconstruct::reconstruct_grid;
use mkdv_nzbc::scattering::{
    cut_sample_points, find_eigenvalues, s11_minus_relation_check, sample_contour, scattering_matrix, step_scattering,
};
use mkdv_nzbc::{
    BoundaryData, FieldGrid, Mat2, PdeState, PotentialProfile, ReconstructOptions, Regime, ScatteringData, ScatteringOptions,
    SpectralPoint, Which, C64,
};

use crate::config::RunConfig;
use crate::output::{t_tag, Writer};
use crate::Failure;

/// Time used by the isospectrality check in `validate`.
const ISO_T: f64 = 0.05;

fn compute_data(cfg: &RunConfig) -> Result<(PotentialProfile, ScatteringData), Failure> {
    let profile = cfg.profile()?;
    let contour = build_contour(&profile.bd, cfg.nodes)?;
    let data = sample_contour(&profile, &contour, &cfg.scattering_options(&profile.bd))?;
    Ok((profile, data))
}

fn load_data(path: &str) -> Result<ScatteringData, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{path}: not scattering data: {e}")))
}

/// Scattering data from the configured file, or computed from the profile.
fn input_data(cfg: &RunConfig, w: &Writer) -> Result<ScatteringData, Failure> {
    match &cfg.scattering_data {
        Some(p) => {
            w.log(&format!("reading scattering data from {p}"));
            load_data(p)
        }
        None => Ok(compute_data(cfg)?.1),
    }
}

fn reconstruct_options(cfg: &RunConfig) -> ReconstructOptions {
    ReconstructOptions { rhp: cfg.rhp, richardson_radii: cfg.richardson_radii.clone() }
}

/// Largest relative defect of det S = γ−/γ+ over the nodes with a full S.
fn det_defect(data: &ScatteringData) -> f64 {
    data.nodes
        .iter()
        .filter_map(|s| {
            let d = s.det()?;
            let want = gamma(s.point, Which::Minus, &data.bd) / gamma(s.point, Which::Plus, &data.bd);
            Some((d - want).norm() / want.norm())
        })
        .fold(0.0, f64::max)
}

fn relation_defect(profile: &PotentialProfile, opts: &ScatteringOptions, per_segment: usize) -> Result<f64, Failure> {
    let mut worst = 0.0f64;
    for k in cut_sample_points(&profile.bd, per_segment, 4.0).concat() {
        worst = worst.max(s11_minus_relation_check(profile, k, opts)?.max());
    }
    Ok(worst)
}

#[derive(Serialize)]
struct DirectReport {
    nodes: usize,
    det_s_max_defect: f64,
    relation_max_defect: f64,
    /// Only for the pure step, against the closed form E+⁻¹E−.
    step_oracle_max_error: Option<f64>,
    rho_max: f64,
    rho_tilde_max: f64,
    winding: Option<i64>,
    eigenvalues: Vec<C64>,
}

pub fn direct(cfg: &RunConfig, w: &mut Writer) -> Result<(), Failure> {
    let (profile, data) = compute_data(cfg)?;
    let opts = cfg.scattering_options(&profile.bd);
    let step_oracle_max_error = if profile.is_step() {
        let mut worst = 0.0f64;
        for s in &data.nodes {
            let exact = step_scattering(s.point, &profile.bd);
            for (i, v) in s.entries().iter().enumerate() {
                if let Some(v) = v {
                    worst = worst.max((v - exact[(i / 2, i % 2)]).norm());
                }
            }
        }
        Some(worst)
    } else {
        None
    };
    let abs_max = |f: fn(&mkdv_nzbc::scattering::ScatteringSample) -> Option<C64>| {
        data.nodes.iter().filter_map(f).map(|v| v.norm()).fold(0.0, f64::max)
    };
    let report = DirectReport {
        nodes: data.nodes.len(),
        det_s_max_defect: det_defect(&data),
        relation_max_defect: relation_defect(&profile, &opts, 10)?,
        step_oracle_max_error,
        rho_max: abs_max(|s| s.rho),
        rho_tilde_max: abs_max(|s| s.rho_tilde),
        winding: data.winding,
        eigenvalues: data.discrete.iter().map(|e| e.k).collect(),
    };
    w.json("scattering.json", &data)?;
    w.json("direct_report.json", &report)?;
    let xs = cfg.x_grid.values();
    let qs: Vec<f64> = xs.iter().map(|&x| profile.eval(x)).collect();
    let header = w.header().join("\n") + "\nx q";
    w.text("profile.txt", &write_two_column(&xs, &qs, &header))?;
    Ok(())
}

pub fn evolve(cfg: &RunConfig, w: &mut Writer) -> Result<(), Failure> {
    let data = input_data(cfg, w)?;
    for &t in &cfg.t {
        w.json(&format!("scattering_{}.json", t_tag(t)), &evolve_to(&data, t))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TimeSummary {
    t: f64,
    points: usize,
    failures: usize,
    max_jump_residual: f64,
    max_limit_diff: f64,
    max_abs_imag: f64,
}

#[derive(Serialize)]
struct PdeRow {
    t: f64,
    /// Max |q_RH − q_PDE| over the interior 80% of the x-grid.
    max_diff: f64,
    compared: usize,
}

#[derive(Serialize)]
struct DiagnosticsEntry<'a> {
    x: f64,
    error: &'a Option<String>,
    diagnostics: &'a Option<mkdv_nzbc::RhDiagnostics>,
}

fn summarize(g: &FieldGrid) -> TimeSummary {
    let fold = |f: fn(&mkdv_nzbc::FieldPoint) -> Option<f64>| g.points.iter().filter_map(f).map(f64::abs).fold(0.0, f64::max);
    TimeSummary {
        t: g.t,
        points: g.points.len(),
        failures: g.failures(),
        max_jump_residual: g.max_residual(),
        max_limit_diff: fold(|p| p.limit_diff),
        max_abs_imag: fold(|p| p.q_imag),
    }
}

/// Reconstructs at every configured t and writes CSV + JSON per t.
fn reconstruct_times(cfg: &RunConfig, w: &mut Writer, data: &ScatteringData) -> Result<Vec<FieldGrid>, Failure> {
    let xs = cfg.x_grid.values();
    let opts = reconstruct_options(cfg);
    let mut grids = Vec::new();
    for &t in &cfg.t {
        w.log(&format!("reconstructing at t = {t} on {} points", xs.len()));
        let g = reconstruct_grid(&evolve_to(data, t), &xs, &opts);
        let tag = t_tag(t);
        let mut header = w.header();
        header.push(format!("t {t}"));
        w.text(&format!("field_{tag}.csv"), &g.to_csv(&header))?;
        // the JSON field file leaves out the bulky solver diagnostics
        let mut lean = g.clone();
        lean.points.iter_mut().for_each(|p| p.diagnostics = None);
        w.json(&format!("field_{tag}.json"), &lean)?;
        if cfg.verbose {
            let entries: Vec<DiagnosticsEntry> =
                g.points.iter().map(|p| DiagnosticsEntry { x: p.x, error: &p.error, diagnostics: &p.diagnostics }).collect();
            w.json(&format!("rhp_diagnostics_{tag}.json"), &serde_json::json!({ "t": t, "points": entries }))?;
        }
        grids.push(g);
    }
    Ok(grids)
}

/// Compares each grid with the finite-difference solution on the interior 80%.
fn pde_compare(cfg: &RunConfig, profile: &PotentialProfile, grids: &[FieldGrid]) -> Result<Vec<PdeRow>, Failure> {
    let mut state = PdeState::from_profile(profile, cfg.pde.x_lo, cfg.pde.x_hi, cfg.pde.points)?;
    let (a, b) = (cfg.x_grid.start, cfg.x_grid.end);
    let (lo, hi) = (a + 0.1 * (b - a), b - 0.1 * (b - a));
    let mut rows = Vec::new();
    for g in grids {
        state.evolve_to(g.t, &cfg.pde_options())?;
        let mut max_diff = 0.0f64;
        let mut compared = 0;
        for p in g.points.iter().filter(|p| p.x >= lo - 1e-12 && p.x <= hi + 1e-12) {
            let (Some(q), Some(r)) = (p.q, state.sample(p.x)) else { continue };
            max_diff = max_diff.max((q - r).abs());
            compared += 1;
        }
        rows.push(PdeRow { t: g.t, max_diff, compared });
    }
    Ok(rows)
}

fn numerical_failures(grids: &[FieldGrid]) -> Result<(), Failure> {
    let n: usize = grids.iter().map(FieldGrid::failures).sum();
    if n > 0 {
        return Err(Failure::Numerical(format!("{n} grid points failed; see the field files")));
    }
    Ok(())
}

pub fn reconstruct(cfg: &RunConfig, w: &mut Writer) -> Result<(), Failure> {
    let path = cfg.scattering_data.as_ref().ok_or_else(|| Failure::Config("reconstruct needs scattering_data in the config".into()))?;
    let data = load_data(path)?;
    if cfg.t.is_empty() {
        return Ok(());
    }
    let grids = reconstruct_times(cfg, w, &data)?;
    let summary: Vec<TimeSummary> = grids.iter().map(summarize).collect();
    w.json("reconstruct_report.json", &serde_json::json!({ "times": summary }))?;
    if cfg.pde_check {
        let rows = pde_compare(cfg, &cfg.profile()?, &grids)?;
        w.json("pde_check.json", &serde_json::json!({ "rows": rows }))?;
    }
    numerical_failures(&grids)
}

#[derive(Serialize)]
struct RoundtripReport {
    pass: bool,
    /// Max |q_RH − q_profile| at t = 0, when 0 is in the t list.
    t0_max_error: Option<f64>,
    tolerance: f64,
    pde: Vec<PdeRow>,
    pde_tolerance: f64,
    times: Vec<TimeSummary>,
}

pub fn roundtrip(cfg: &RunConfig, w: &mut Writer) -> Result<(), Failure> {
    let (profile, data) = compute_data(cfg)?;
    w.json("scattering.json", &data)?;
    let grids = reconstruct_times(cfg, w, &data)?;
    let t0_max_error = grids.iter().find(|g| g.t == 0.0).map(|g| {
        g.points.iter().filter_map(|p| p.q.map(|q| (q - profile.eval(p.x)).abs())).fold(0.0, f64::max)
    });
    let pde = if cfg.pde_check {
        let later: Vec<FieldGrid> = grids.iter().filter(|g| g.t > 0.0).cloned().collect();
        pde_compare(cfg, &profile, &later)?
    } else {
        Vec::new()
    };
    let pass = t0_max_error.map_or(true, |e| e <= cfg.tolerances.roundtrip)
        && pde.iter().all(|r| r.max_diff <= cfg.tolerances.pde_agreement);
    let report = RoundtripReport {
        pass,
        t0_max_error,
        tolerance: cfg.tolerances.roundtrip,
        pde,
        pde_tolerance: cfg.tolerances.pde_agreement,
        times: grids.iter().map(summarize).collect(),
    };
    w.json("roundtrip_report.json", &report)?;
    numerical_failures(&grids)?;
    if !pass {
        return Err(Failure::Validation(format!("roundtrip outside tolerance: t0 error {:?}", report.t0_max_error)));
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: Option<f64>,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

impl Check {
    fn measured(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value: Some(value), tolerance, pass: value <= tolerance, detail: None }
    }

    fn from_result(name: &'static str, r: Result<f64, Failure>, tolerance: f64) -> Self {
        match r {
            Ok(v) => Self::measured(name, v, tolerance),
            Err(e) => Self { name, value: None, tolerance, pass: false, detail: Some(e.to_string()) },
        }
    }
}

/// λ² = k² − σq², det E = γ and E⁻¹E = I on both sides of the plane.
fn branch_defect(bd: &BoundaryData) -> f64 {
    let ks = [C64::new(0.3, 0.7), C64::new(-1.1, 0.2), C64::new(0.5, -0.9), C64::new(2.5, 0.1), C64::new(-0.2, -2.3)];
    let mut worst = 0.0f64;
    for k in ks {
        for pt in [SpectralPoint::principal(k), SpectralPoint::minus_side(k)] {
            for which in [Which::Plus, Which::Minus] {
                let l = lambda(pt, which, bd);
                let want = k * k - bd.sigma() * bd.q(which).powi(2);
                worst = worst.max((l * l - want).norm() / (1.0 + want.norm()));
                let e = eigenmatrix(pt, which, bd);
                let g = gamma(pt, which, bd);
                worst = worst.max((e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)] - g).norm() / (1.0 + g.norm()));
                worst = worst.max(max_abs(&(eigenmatrix_inverse(pt, which, bd) * e - Mat2::identity())));
            }
        }
    }
    worst
}

fn cut_symmetry_defect(cfg: &RunConfig, profile: &PotentialProfile) -> Result<f64, Failure> {
    let bd = &profile.bd;
    let opts = cfg.scattering_options(bd).jost;
    let mut worst = 0.0f64;
    for k in cut_sample_points(bd, 4, 4.0).concat() {
        for which in [Which::Plus, Which::Minus] {
            let open = match bd.regime {
                Regime::Focusing => k.im.abs() < bd.q(which),
                Regime::Defocusing => k.re.abs() > bd.q(which),
            };
            if open {
                worst = worst.max(symmetry_check(profile, SpectralPoint::principal(k), which, 0.5, &opts)?);
            }
        }
    }
    Ok(worst)
}

/// Re-scatters the PDE-evolved profile: eigenvalue drift and the worst
/// relative mismatch of ρ against the evolution law.
fn isospectral_defect(cfg: &RunConfig, profile: &PotentialProfile) -> Result<(f64, f64, usize), Failure> {
    let bd = profile.bd;
    let opts = cfg.scattering_options(&bd);
    let mut pde = PdeState::from_profile(profile, cfg.pde.x_lo, cfg.pde.x_hi, cfg.pde.points)?;
    pde.evolve_to(ISO_T, &cfg.pde_options())?;
    let moved = PotentialProfile::sampled(bd, &pde.grid(), &pde.q, cfg.pde.drift_tol.max(cfg.tau_tail))?;
    let before = find_eigenvalues(profile, &opts)?.1;
    let after = find_eigenvalues(&moved, &opts)?.1;
    if before.len() != after.len() {
        return Err(Failure::Validation(format!("{} eigenvalues at t = 0, {} at t = {ISO_T}", before.len(), after.len())));
    }
    let drift = before
        .iter()
        .map(|e| after.iter().map(|a| (a - e).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let ks: Vec<C64> = match bd.regime {
        Regime::Focusing => [-1.5, -0.5, 0.4, 1.2].iter().map(|&v| C64::new(v, 0.0)).collect(),
        Regime::Defocusing => [-3.2, -2.5, 2.5, 3.2].iter().map(|&v| C64::new(v * bd.q_minus / 2.0, 0.0)).collect(),
    };
    let mut rho = 0.0f64;
    for k in ks {
        let pt = SpectralPoint::principal(k);
        let (Some(r0), Some(r1)) = (scattering_matrix(profile, pt, &opts)?.rho, scattering_matrix(&moved, pt, &opts)?.rho) else {
            continue;
        };
        let want = r0 * (C64::new(0.0, -2.0 * ISO_T) * f_pm(pt, Which::Plus, &bd)).exp();
        rho = rho.max((r1 - want).norm() / (1.0 + r0.norm()));
    }
    Ok((drift, rho, before.len()))
}

#[derive(Serialize)]
struct ValidateReport {
    pass: bool,
    checks: Vec<Check>,
}

pub fn validate(cfg: &RunConfig, w: &mut Writer) -> Result<(), Failure> {
    let tol = &cfg.tolerances;
    let profile = cfg.profile()?;
    let data = input_data(cfg, w)?;
    let mut checks = vec![
        Check::measured("branch", branch_defect(&profile.bd), 1e-10),
        Check::measured("det_s", det_defect(&data), tol.invariant),
        Check::from_result("one_sided_relations", relation_defect(&profile, &cfg.scattering_options(&profile.bd), 10), tol.invariant),
        Check::from_result("cut_symmetry", cut_symmetry_defect(cfg, &profile), tol.invariant),
    ];
    // a few x from the grid: jump residual and large-k agreement
    let xs = cfg.x_grid.values();
    let pick: Vec<f64> = if xs.len() <= 5 { xs } else { (0..5).map(|i| xs[i * (xs.len() - 1) / 4]).collect() };
    w.log(&format!("solving the RH problem at {pick:?}"));
    let g = reconstruct_grid(&data, &pick, &reconstruct_options(cfg));
    let jump = if g.failures() > 0 {
        Err(Failure::Numerical(g.points.iter().filter_map(|p| p.error.clone()).collect::<Vec<_>>().join("; ")))
    } else {
        Ok(g.max_residual())
    };
    checks.push(Check::from_result("jump_residual", jump, cfg.rhp.residual_tol));
    let limit = g.points.iter().filter_map(|p| p.limit_diff).fold(0.0, f64::max);
    checks.push(Check::measured("limit_agreement", limit, cfg.rhp.limit_tol));
    if profile.is_step() {
        checks.push(Check {
            name: "isospectrality",
            value: None,
            tolerance: tol.isospectral,
            pass: true,
            detail: Some("skipped: the finite-difference solver needs a smooth profile".into()),
        });
    } else {
        w.log("isospectrality: evolving with the finite-difference solver");
        match isospectral_defect(cfg, &profile) {
            Ok((drift, rho, count)) => {
                let mut c = Check::measured("isospectrality", drift, tol.isospectral);
                c.detail = Some(format!("{count} eigenvalues tracked to t = {ISO_T}"));
                checks.push(c);
                checks.push(Check::measured("rho_evolution", rho, tol.pde_agreement));
            }
            Err(e) => checks.push(Check::from_result("isospectrality", Err(e), tol.isospectral)),
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    w.json("validate.json", &ValidateReport { pass, checks })?;
    if !pass {
        return Err(Failure::Validation(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(())
}
