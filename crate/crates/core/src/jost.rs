//! Normalized Jost functions μ±(x, k).
//!
//! The spectral problem φ_x = Xφ, X = ikσ3 + Q, is integrated in the form
//! μ_x = Xμ + iλ μσ3 with μ = φ e^{iλxσ3}. Factoring out the plane-wave phase
//! leaves a bounded right-hand side wherever the column itself is bounded, so
//! the adaptive integrator only has to follow the potential's structure.
//! Integration starts from the exact value E± at the point where the profile
//! becomes constant (x = 0 for the pure step).

use serde::Serialize;

use crate::branch::{eigenmatrix, lambda, phase_diag, BoundaryData, Mat2, SpectralPoint, Vec2, Which, C64, I};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::profile::PotentialProfile;

#[derive(Debug, Clone, Copy)]
pub struct JostOptions {
    pub ode: OdeOptions,
    /// Branch-point exclusion radius.
    pub eps_bp: f64,
}

impl JostOptions {
    pub fn for_boundary(bd: &BoundaryData) -> Self {
        Self { ode: OdeOptions::default(), eps_bp: bd.default_eps_bp() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JostFrame {
    pub x: f64,
    pub point: SpectralPoint,
    pub mu_plus: Option<Mat2>,
    pub mu_minus: Option<Mat2>,
}

/// Whether column `col` of φ_which stays bounded at this k: φ−,1 and φ+,2 need
/// Im λ ≥ 0, φ−,2 and φ+,1 need Im λ ≤ 0. Real λ admits both columns.
pub fn column_admissible(point: SpectralPoint, which: Which, col: usize, bd: &BoundaryData) -> bool {
    let lam = lambda(point, which, bd);
    let tol = 1e-12 * (1.0 + lam.norm());
    let needs_upper = matches!((which, col), (Which::Minus, 0) | (Which::Plus, 1));
    if needs_upper {
        lam.im >= -tol
    } else {
        lam.im <= tol
    }
}

fn start_abscissa(profile: &PotentialProfile, which: Which) -> f64 {
    let (left, right) = profile.exact_tails();
    match which {
        Which::Plus => right,
        Which::Minus => left,
    }
}

/// Column `col` (0 or 1) of μ_which at abscissa x.
pub fn jost_column(
    profile: &PotentialProfile,
    point: SpectralPoint,
    which: Which,
    col: usize,
    x: f64,
    opts: &JostOptions,
) -> Result<Vec2> {
    let bd = &profile.bd;
    let e = eigenmatrix(point, which, bd);
    let start = start_abscissa(profile, which);
    let exact = match which {
        Which::Plus => x >= start,
        Which::Minus => x <= start,
    };
    let e_col = Vec2::new(e[(0, col)], e[(1, col)]);
    if exact {
        return Ok(e_col);
    }
    let lam = lambda(point, which, bd);
    let shift = if col == 0 { I * lam } else { -I * lam };
    let k = point.k;
    let sigma = bd.sigma();
    let rhs = |xx: f64, y: &[C64; 2], dy: &mut [C64; 2]| {
        let q = profile.eval(xx);
        dy[0] = I * k * y[0] + q * y[1] + shift * y[0];
        dy[1] = sigma * q * y[0] - I * k * y[1] + shift * y[1];
    };
    let (y, _) = integrate(rhs, start, [e_col[0], e_col[1]], x, &opts.ode)
        .map_err(|u| Error::StiffnessFailure { x: u.x, k: format!("{k}") })?;
    Ok(Vec2::new(y[0], y[1]))
}

/// Full μ_which(x); both columns are integrated regardless of boundedness.
pub fn jost_matrix(profile: &PotentialProfile, point: SpectralPoint, which: Which, x: f64, opts: &JostOptions) -> Result<Mat2> {
    let c0 = jost_column(profile, point, which, 0, x, opts)?;
    let c1 = jost_column(profile, point, which, 1, x, opts)?;
    Ok(Mat2::from_columns(&[c0, c1]))
}

/// φ = μ e^{−iλxσ3}.
pub fn phi_from_mu(mu: &Mat2, lam: C64, x: f64) -> Mat2 {
    mu * phase_diag(lam, x)
}

/// μ_which on a grid of abscissae, integrating once through the sorted grid.
pub fn solve_jost(
    profile: &PotentialProfile,
    point: SpectralPoint,
    which: Which,
    grid: &[f64],
    opts: &JostOptions,
) -> Result<Vec<JostFrame>> {
    let bd = &profile.bd;
    let start = start_abscissa(profile, which);
    let e = eigenmatrix(point, which, bd);
    let lam = lambda(point, which, bd);
    let k = point.k;
    let sigma = bd.sigma();

    // visit grid points in order of increasing distance from the start
    let mut order: Vec<usize> = (0..grid.len()).collect();
    match which {
        Which::Plus => order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a])),
        Which::Minus => order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b])),
    }
    let mut out: Vec<Option<Mat2>> = vec![None; grid.len()];
    for col in 0..2 {
        let shift = if col == 0 { I * lam } else { -I * lam };
        let rhs = |xx: f64, y: &[C64; 2], dy: &mut [C64; 2]| {
            let q = profile.eval(xx);
            dy[0] = I * k * y[0] + q * y[1] + shift * y[0];
            dy[1] = sigma * q * y[0] - I * k * y[1] + shift * y[1];
        };
        let mut x_cur = start;
        let mut y = [e[(0, col)], e[(1, col)]];
        for &idx in &order {
            let xt = grid[idx];
            let inside_tail = match which {
                Which::Plus => xt >= start,
                Which::Minus => xt <= start,
            };
            let value = if inside_tail {
                [e[(0, col)], e[(1, col)]]
            } else {
                let (yn, _) = integrate(rhs, x_cur, y, xt, &opts.ode)
                    .map_err(|u| Error::StiffnessFailure { x: u.x, k: format!("{k}") })?;
                x_cur = xt;
                y = yn;
                yn
            };
            let m = out[idx].get_or_insert_with(Mat2::zeros);
            m[(0, col)] = value[0];
            m[(1, col)] = value[1];
        }
    }
    Ok(grid
        .iter()
        .zip(out)
        .map(|(&x, m)| {
            let m = m.expect("every grid point visited");
            match which {
                Which::Plus => JostFrame { x, point, mu_plus: Some(m), mu_minus: None },
                Which::Minus => JostFrame { x, point, mu_plus: None, mu_minus: Some(m) },
            }
        })
        .collect())
}

/// ‖φ_x − Xφ‖ at x by central differences of the integrated solution, with
/// spacing `h`. Used to test the solver against the spectral equation.
pub fn spectral_residual(
    profile: &PotentialProfile,
    point: SpectralPoint,
    which: Which,
    x: f64,
    h: f64,
    opts: &JostOptions,
) -> Result<f64> {
    let bd = &profile.bd;
    let lam = lambda(point, which, bd);
    let phi = |xx: f64| -> Result<Mat2> { Ok(phi_from_mu(&jost_matrix(profile, point, which, xx, opts)?, lam, xx)) };
    let (pm2, pm1, p0, pp1, pp2) = (phi(x - 2.0 * h)?, phi(x - h)?, phi(x)?, phi(x + h)?, phi(x + 2.0 * h)?);
    let deriv = (pm2 - pp2 + (pp1 - pm1) * C64::from(8.0)) / C64::from(12.0 * h);
    let q = profile.eval(x);
    let xm = Mat2::new(I * point.k, C64::from(q), C64::from(bd.sigma() * q), -I * point.k);
    let r = deriv - xm * p0;
    Ok(r.iter().fold(0.0f64, |a, z| a.max(z.norm())) / p0.iter().fold(1e-300f64, |a, z| a.max(z.norm())))
}

/// Defect of the cut symmetry φ(k) = φ̃(k)·(i/(k − λ))σ3Q for k on the open
/// cut of λ_which, where φ̃ is the opposite-side value (λ → −λ). Returns the
/// max-norm defect relative to |φ|.
pub fn symmetry_check(profile: &PotentialProfile, point: SpectralPoint, which: Which, x: f64, opts: &JostOptions) -> Result<f64> {
    let bd = &profile.bd;
    let q = bd.q(which);
    let k = point.k;
    let open_cut = match bd.regime {
        crate::branch::Regime::Focusing => k.re == 0.0 && k.im.abs() < q,
        crate::branch::Regime::Defocusing => k.im == 0.0 && k.re.abs() > q,
    };
    if !open_cut || lambda(point, which, bd).norm() < opts.eps_bp {
        return Err(Error::NotOnCut(format!("{k}")));
    }
    let p = SpectralPoint::principal(k);
    let m = SpectralPoint::minus_side(k);
    let lam = lambda(p, which, bd);
    let phi = phi_from_mu(&jost_matrix(profile, p, which, x, opts)?, lam, x);
    let phi_t = phi_from_mu(&jost_matrix(profile, m, which, x, opts)?, -lam, x);
    let rhs = phi_t * crate::branch::s3q(which, bd) * (I / (k - lam));
    let scale = phi.iter().fold(1e-300f64, |a, z| a.max(z.norm()));
    Ok((phi - rhs).iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale)
}
