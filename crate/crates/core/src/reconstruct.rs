//! Potential recovery from the RH solution, q = q_bg − 2i lim k N12(k),
//! with an independent large-k check by Richardson extrapolation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::branch::{C64, I};
use crate::error::{Error, Result};
use crate::rhp::{solve_with, DataInterpolator, RhDiagnostics, RhSolution, RhpOptions};
use crate::scattering::ScatteringData;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub rhp: RhpOptions,
    /// Radii for the large-k extrapolation, in units of q−. Empty disables it.
    pub richardson_radii: Vec<f64>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { rhp: RhpOptions::default(), richardson_radii: vec![1e2, 1e3, 1e4] }
    }
}

/// lim k N12 from k N12(iR) at three radii R, R×10, R×100, cancelling the
/// 1/R and 1/R² terms.
pub fn richardson_limit(sol: &RhSolution, radii: &[f64]) -> Option<C64> {
    if radii.len() != 3 {
        return None;
    }
    let g: Vec<C64> = radii
        .iter()
        .map(|r| {
            let k = I * (r * sol.bd.q_minus);
            k * sol.eval(k)[(0, 1)]
        })
        .collect();
    let g12 = (10.0 * g[1] - g[0]) / 9.0;
    let g23 = (10.0 * g[2] - g[1]) / 9.0;
    Some((100.0 * g23 - g12) / 99.0)
}

/// q at a single x from a solved RH problem; checks the two limits agree.
pub fn potential_from(sol: &RhSolution, opts: &ReconstructOptions) -> Result<(C64, Option<f64>)> {
    let m = sol.moment12();
    let q = C64::from(sol.background()) - 2.0 * I * m;
    let diff = richardson_limit(sol, &opts.richardson_radii).map(|l| 2.0 * (l - m).norm());
    if let Some(d) = diff {
        if d > opts.rhp.limit_tol {
            return Err(Error::LimitMismatch { diff: d });
        }
    }
    Ok((q, diff))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldPoint {
    pub x: f64,
    /// Re q; the imaginary part is kept separately as a realness check.
    pub q: Option<f64>,
    pub q_imag: Option<f64>,
    pub jump_residual: Option<f64>,
    pub offnode_residual: Option<f64>,
    pub trunc_est: Option<f64>,
    pub limit_diff: Option<f64>,
    pub nodes: usize,
    pub error: Option<String>,
    /// Full solver diagnostics, kept for verbose output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RhDiagnostics>,
}

impl FieldPoint {
    fn failed(x: f64, e: &Error) -> Self {
        Self {
            x,
            q: None,
            q_imag: None,
            jump_residual: None,
            offnode_residual: None,
            trunc_est: None,
            limit_diff: None,
            nodes: 0,
            error: Some(e.to_string()),
            diagnostics: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldGrid {
    pub t: f64,
    pub points: Vec<FieldPoint>,
}

impl FieldGrid {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().filter_map(|p| p.jump_residual).fold(0.0, f64::max)
    }

    /// CSV with columns x,q,jump_residual,trunc_est; failed points carry NaN.
    /// `comments` become leading `#` lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str("x,q,jump_residual,trunc_est\n");
        let f = |v: Option<f64>| v.map(|v| format!("{v:.17e}")).unwrap_or_else(|| "NaN".into());
        for p in &self.points {
            let _ = writeln!(s, "{:.17e},{},{},{}", p.x, f(p.q), f(p.jump_residual), f(p.trunc_est));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('x') && !l.trim().is_empty()) {
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Format(format!("short line: {line}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("{e}: {line}")))
            };
            out.push((next()?, next()?));
        }
        Ok(out)
    }
}

/// Solves the RH problem and reconstructs q at one x.
pub fn reconstruct_at(interp: &DataInterpolator, x: f64, opts: &ReconstructOptions) -> Result<(C64, RhDiagnostics, Option<f64>)> {
    let sol = solve_with(interp, x, &opts.rhp)?;
    let (q, diff) = potential_from(&sol, opts)?;
    Ok((q, sol.diagnostics, diff))
}

/// q on a grid of x values. Failures are recorded per point, not propagated.
/// Points are solved one after the other; each solve is itself parallel.
pub fn reconstruct_grid(data: &ScatteringData, xs: &[f64], opts: &ReconstructOptions) -> FieldGrid {
    let interp = DataInterpolator::new(data, 1e-12);
    let points = xs
        .iter()
        .map(|&x| match reconstruct_at(&interp, x, opts) {
            Ok((q, d, diff)) => FieldPoint {
                x,
                q: Some(q.re),
                q_imag: Some(q.im),
                jump_residual: Some(d.jump_residual),
                offnode_residual: Some(d.offnode_residual),
                trunc_est: Some(d.trunc_est),
                limit_diff: diff,
                nodes: d.nodes,
                error: None,
                diagnostics: Some(d),
            },
            Err(e) => FieldPoint::failed(x, &e),
        })
        .collect();
    FieldGrid { t: data.t, points }
}
