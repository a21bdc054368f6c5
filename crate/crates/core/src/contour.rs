//! Oriented jump contours built from Gauss–Legendre panels.
//!
//! Real segments run left to right and vertical segments run downward, so the
//! left ("+") side of every segment is the principal side of the branch cut it
//! lies on: Re k > 0 for the focusing vertical cuts, Im k > 0 on the real line.

use serde::{Deserialize, Serialize};

use crate::branch::{BoundaryData, Regime, C64};
use crate::error::{Error, Result};
use crate::quadrature::{barycentric_coefficients, barycentric_weights, gauss_legendre, Clustering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentLabel {
    RealLine,
    SigmaPlusUp,
    SigmaPlusDown,
    Sigma0Up,
    Sigma0Down,
    SigmaMinusRay,
    Sigma0Real,
}

impl SegmentLabel {
    pub fn is_vertical(self) -> bool {
        matches!(self, Self::SigmaPlusUp | Self::SigmaPlusDown | Self::Sigma0Up | Self::Sigma0Down)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub label: SegmentLabel,
    /// Start point; the panel runs from `a` to `b`.
    pub a: C64,
    pub b: C64,
    pub clustering: Clustering,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub spec: PanelSpec,
    /// Index of the panel in the contour this one was refined from.
    pub parent: usize,
    pub u: Vec<f64>,
    pub nodes: Vec<C64>,
    /// Gauss weight times dζ/du.
    pub weights: Vec<C64>,
    pub bary: Vec<f64>,
    /// g′ and g″ of the clustering map at the nodes.
    pub gp: Vec<f64>,
    pub gpp: Vec<f64>,
}

impl Panel {
    pub fn new(spec: PanelSpec, parent: usize) -> Self {
        let (u, w) = gauss_legendre(spec.n);
        let bary = barycentric_weights(&u, &w);
        let d = spec.b - spec.a;
        let mut nodes = Vec::with_capacity(spec.n);
        let mut weights = Vec::with_capacity(spec.n);
        let mut gps = Vec::with_capacity(spec.n);
        for (&ui, &wi) in u.iter().zip(&w) {
            let (g, gp) = spec.clustering.map(ui);
            nodes.push(spec.a + d * g);
            weights.push(d * (wi * gp));
            gps.push(gp);
        }
        let gpp = u.iter().map(|&ui| spec.clustering.second_derivative(ui)).collect();
        Self { spec, parent, u, nodes, weights, bary, gp: gps, gpp }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        (self.spec.b - self.spec.a).norm()
    }

    /// Relative position s ∈ [0, 1] of the projection of z onto the panel, and
    /// the distance from z to the panel's line.
    pub fn locate(&self, z: C64) -> (f64, f64) {
        let d = self.spec.b - self.spec.a;
        let r = (z - self.spec.a) / d;
        (r.re, r.im.abs() * d.norm())
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        let (s, dist) = self.locate(z);
        dist <= tol && s >= -1e-12 && s <= 1.0 + 1e-12
    }

    pub fn point_at(&self, u: f64) -> C64 {
        self.spec.a + (self.spec.b - self.spec.a) * self.spec.clustering.map(u).0
    }

    pub fn param_of(&self, z: C64) -> f64 {
        self.spec.clustering.inverse(self.locate(z).0)
    }

    /// Barycentric interpolation coefficients at the point z on the panel.
    pub fn interpolation(&self, z: C64) -> Vec<f64> {
        barycentric_coefficients(&self.u, &self.bary, self.param_of(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    pub n_per_panel: usize,
    /// Truncation K∞ in units of q−.
    pub k_max_factor: f64,
    /// Longest panel on the unbounded segments, in units of q−.
    pub max_panel_length: f64,
    pub eps_bp: f64,
}

impl ContourOptions {
    pub fn for_boundary(bd: &BoundaryData, n_per_panel: usize) -> Self {
        Self { n_per_panel, k_max_factor: 12.0, max_panel_length: 1.0, eps_bp: bd.default_eps_bp() }
    }
}

#[derive(Debug, Clone)]
pub struct Contour {
    pub bd: BoundaryData,
    pub k_max: f64,
    pub eps_bp: f64,
    pub panels: Vec<Panel>,
}

/// Standard contour with `n_per_segment` nodes per panel.
pub fn build_contour(bd: &BoundaryData, n_per_segment: usize) -> Result<Contour> {
    build_contour_with(bd, &ContourOptions::for_boundary(bd, n_per_segment))
}

fn split_line(label: SegmentLabel, a: C64, b: C64, cl_a: bool, cl_b: bool, max_len: f64, n: usize, out: &mut Vec<PanelSpec>) {
    let m = ((b - a).norm() / max_len).ceil().max(1.0) as usize;
    for i in 0..m {
        let za = a + (b - a) * (i as f64 / m as f64);
        let zb = a + (b - a) * ((i + 1) as f64 / m as f64);
        let clustering = Clustering::from_flags(i == 0 && cl_a, i + 1 == m && cl_b);
        out.push(PanelSpec { label, a: za, b: zb, clustering, n });
    }
}

pub fn build_contour_with(bd: &BoundaryData, opts: &ContourOptions) -> Result<Contour> {
    if opts.n_per_panel < 8 {
        return Err(Error::Config(format!("at least 8 nodes per segment are needed, got {}", opts.n_per_panel)));
    }
    let (qm, qp) = (bd.q_minus, bd.q_plus);
    if !bd.is_symmetric() && qm - qp < opts.eps_bp {
        return Err(Error::DegenerateSegment { gap: qm - qp, eps: opts.eps_bp });
    }
    let n = opts.n_per_panel;
    let k_max = opts.k_max_factor * qm;
    let max_len = opts.max_panel_length * qm;
    let c = |re: f64, im: f64| C64::new(re, im);
    let mut specs = Vec::new();
    match bd.regime {
        Regime::Focusing => {
            use SegmentLabel::*;
            split_line(RealLine, c(-k_max, 0.0), c(0.0, 0.0), false, true, max_len, n, &mut specs);
            split_line(RealLine, c(0.0, 0.0), c(k_max, 0.0), true, false, max_len, n, &mut specs);
            specs.push(PanelSpec { label: SigmaPlusUp, a: c(0.0, qp), b: c(0.0, 0.0), clustering: Clustering::Both, n });
            specs.push(PanelSpec { label: SigmaPlusDown, a: c(0.0, 0.0), b: c(0.0, -qp), clustering: Clustering::Both, n });
            if !bd.is_symmetric() {
                specs.push(PanelSpec { label: Sigma0Up, a: c(0.0, qm), b: c(0.0, qp), clustering: Clustering::Both, n });
                specs.push(PanelSpec { label: Sigma0Down, a: c(0.0, -qp), b: c(0.0, -qm), clustering: Clustering::Both, n });
            }
        }
        Regime::Defocusing => {
            use SegmentLabel::*;
            split_line(SigmaMinusRay, c(-k_max, 0.0), c(-qm, 0.0), false, true, max_len, n, &mut specs);
            if !bd.is_symmetric() {
                specs.push(PanelSpec { label: Sigma0Real, a: c(-qm, 0.0), b: c(-qp, 0.0), clustering: Clustering::Both, n });
                specs.push(PanelSpec { label: Sigma0Real, a: c(qp, 0.0), b: c(qm, 0.0), clustering: Clustering::Both, n });
            }
            split_line(SigmaMinusRay, c(qm, 0.0), c(k_max, 0.0), true, false, max_len, n, &mut specs);
        }
    }
    let panels = specs.into_iter().enumerate().map(|(i, s)| Panel::new(s, i)).collect();
    let contour = Contour { bd: *bd, k_max, eps_bp: opts.eps_bp, panels };
    contour.check_exclusion()?;
    Ok(contour)
}

/// Points every node must keep ε_bp away from: the branch points and, for
/// the focusing contour, the junction k = 0.
pub fn special_points(bd: &BoundaryData) -> Vec<C64> {
    let (qm, qp) = (bd.q_minus, bd.q_plus);
    match bd.regime {
        Regime::Focusing => vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, qp),
            C64::new(0.0, -qp),
            C64::new(0.0, qm),
            C64::new(0.0, -qm),
        ],
        Regime::Defocusing => vec![C64::new(qp, 0.0), C64::new(-qp, 0.0), C64::new(qm, 0.0), C64::new(-qm, 0.0)],
    }
}

impl Contour {
    pub fn node_count(&self) -> usize {
        self.panels.iter().map(Panel::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.panels.iter().enumerate().flat_map(|(p, pan)| pan.nodes.iter().map(move |&z| (p, z)))
    }

    pub fn specs(&self) -> Vec<PanelSpec> {
        self.panels.iter().map(|p| p.spec.clone()).collect()
    }

    pub fn from_specs(bd: &BoundaryData, specs: &[PanelSpec], k_max: f64, eps_bp: f64) -> Self {
        let panels = specs.iter().cloned().enumerate().map(|(i, s)| Panel::new(s, i)).collect();
        Self { bd: *bd, k_max, eps_bp, panels }
    }

    pub fn check_exclusion(&self) -> Result<()> {
        let special = special_points(&self.bd);
        for (_, z) in self.nodes() {
            if let Some(s) = special.iter().find(|s| (z - **s).norm() < self.eps_bp) {
                return Err(Error::Config(format!(
                    "contour node {z} falls within eps_bp = {:e} of {s}; use fewer nodes per panel or a smaller eps_bp",
                    self.eps_bp
                )));
            }
        }
        Ok(())
    }

    /// Splits panel p into `splits[p]` equal pieces.
    pub fn refined(&self, splits: &[usize]) -> Contour {
        let cuts: Vec<Vec<f64>> = splits.iter().map(|&m| (1..m.max(1)).map(|i| i as f64 / m as f64).collect()).collect();
        self.refined_at(&cuts, self.eps_bp)
    }

    /// Splits panel p at the relative positions `cuts[p]` (sorted, inside
    /// (0, 1)). A piece touching a clustered endpoint is kept long enough for
    /// its first node stays `min_dist` away from the endpoint.
    pub fn refined_at(&self, cuts: &[Vec<f64>], min_dist: f64) -> Contour {
        let mut panels = Vec::new();
        for (pi, (panel, inner)) in self.panels.iter().zip(cuts).enumerate() {
            let s = &panel.spec;
            if inner.is_empty() {
                let mut p = panel.clone();
                p.parent = pi;
                panels.push(p);
                continue;
            }
            let len = panel.length();
            let (u0, _) = gauss_legendre(s.n);
            // quadratic clustering is the tightest of the two end maps
            let g1 = Clustering::Left.map(u0[0]).0.min(Clustering::Both.map(u0[0]).0);
            let min_end = (1.05 * min_dist / g1 / len).min(0.5);
            let lo = if s.clustering.left() { min_end } else { 0.0 };
            let hi = if s.clustering.right() { 1.0 - min_end } else { 1.0 };
            let mut c = vec![0.0];
            c.extend(inner.iter().map(|v| v.clamp(lo, hi)).filter(|v| *v > 0.0 && *v < 1.0));
            c.push(1.0);
            c.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            let d = s.b - s.a;
            let pieces = c.len() - 1;
            for i in 0..pieces {
                let spec = PanelSpec {
                    label: s.label,
                    a: s.a + d * c[i],
                    b: s.a + d * c[i + 1],
                    clustering: Clustering::from_flags(i == 0 && s.clustering.left(), i + 1 == pieces && s.clustering.right()),
                    n: s.n,
                };
                panels.push(Panel::new(spec, pi));
            }
        }
        Contour { bd: self.bd, k_max: self.k_max, eps_bp: self.eps_bp, panels }
    }
}
