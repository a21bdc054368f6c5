//! Potential profiles q(x) with asymmetric constant tails.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::branch::BoundaryData;
use crate::error::{Error, Result};

/// Localized sech² bump added on top of a base profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// q ≡ q+ = q−; only valid for symmetric boundary data.
    Constant,
    /// q− for x < 0, q+ for x ≥ 0.
    Step,
    /// (q− + q+)/2 − (q− − q+)/2·tanh((x − center)/width).
    TanhStep {
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        bump: Option<Bump>,
    },
    /// Two-column text file (x, q) on a uniform grid.
    File { path: String },
}

#[derive(Debug, Clone)]
enum Shape {
    Constant,
    Step,
    Tanh { width: f64, center: f64, bump: Option<Bump> },
    Sampled { x0: f64, h: f64, q: Vec<f64> },
}

/// A potential with its boundary data and the finite window [x_lo, x_hi]
/// outside which it is treated as constant.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    pub bd: BoundaryData,
    shape: Shape,
    pub x_lo: f64,
    pub x_hi: f64,
}

fn tanh_q(bd: &BoundaryData, x: f64, width: f64, center: f64, bump: Option<Bump>) -> f64 {
    let mid = 0.5 * (bd.q_minus + bd.q_plus);
    let half = 0.5 * (bd.q_minus - bd.q_plus);
    let mut q = mid - half * ((x - center) / width).tanh();
    if let Some(b) = bump {
        let s = 1.0 / ((x - b.center) / b.width).cosh();
        q += b.amplitude * s * s;
    }
    q
}

impl PotentialProfile {
    pub fn constant(bd: BoundaryData) -> Result<Self> {
        if !bd.is_symmetric() {
            return Err(Error::Config("a constant profile needs q_minus = q_plus".into()));
        }
        Ok(Self { bd, shape: Shape::Constant, x_lo: -1.0, x_hi: 1.0 })
    }

    pub fn step(bd: BoundaryData) -> Self {
        Self { bd, shape: Shape::Step, x_lo: -1.0, x_hi: 1.0 }
    }

    /// Smoothed step; the window is widened until both tails sit within `tau_tail`.
    pub fn tanh_step(bd: BoundaryData, width: f64, center: f64, bump: Option<Bump>, tau_tail: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Config("tanh width must be positive".into()));
        }
        if let Some(b) = bump {
            if !(b.width > 0.0) {
                return Err(Error::Config("bump width must be positive".into()));
            }
        }
        let mut half = 1.0;
        loop {
            let lo = tanh_q(&bd, center - half, width, center, bump) - bd.q_minus;
            let hi = tanh_q(&bd, center + half, width, center, bump) - bd.q_plus;
            if lo.abs() < tau_tail && hi.abs() < tau_tail {
                break;
            }
            half += 0.5;
            if half > 1e4 {
                return Err(Error::Config("tanh profile tails never decay".into()));
            }
        }
        Ok(Self { bd, shape: Shape::Tanh { width, center, bump }, x_lo: center - half, x_hi: center + half })
    }

    /// Uniformly sampled profile; the tails are checked against `tau_tail`.
    pub fn sampled(bd: BoundaryData, x: &[f64], q: &[f64], tau_tail: f64) -> Result<Self> {
        if x.len() != q.len() || x.len() < 8 {
            return Err(Error::Format("sampled profile needs at least 8 (x, q) pairs".into()));
        }
        let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        if !(h > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
            return Err(Error::Format("sampled profile must be on a uniform increasing grid".into()));
        }
        let p = Self { bd, shape: Shape::Sampled { x0: x[0], h, q: q.to_vec() }, x_lo: x[0], x_hi: x[x.len() - 1] };
        p.check_tails(tau_tail)?;
        // beyond the outermost samples that leave the background by more than
        // tau_tail the profile is taken as exactly q±
        let n = q.len();
        let lo = q.iter().position(|v| (v - bd.q_minus).abs() > tau_tail).unwrap_or(n / 2);
        let hi = q.iter().rposition(|v| (v - bd.q_plus).abs() > tau_tail).unwrap_or(n / 2);
        let lo = lo.saturating_sub(2).min(n / 2);
        let hi = (hi + 2).min(n - 1).max(lo + 1);
        Ok(Self { x_lo: x[lo], x_hi: x[hi], ..p })
    }

    pub fn from_spec(spec: &ProfileSpec, bd: BoundaryData, tau_tail: f64) -> Result<Self> {
        match spec {
            ProfileSpec::Constant => Self::constant(bd),
            ProfileSpec::Step => Ok(Self::step(bd)),
            ProfileSpec::TanhStep { width, center, bump } => Self::tanh_step(bd, *width, *center, *bump, tau_tail),
            ProfileSpec::File { path } => Self::read_text(path, bd, tau_tail),
        }
    }

    /// Boundary value the profile approaches at −∞ (`minus = true`) or +∞.
    fn tail(&self, minus: bool) -> f64 {
        if minus {
            self.bd.q_minus
        } else {
            self.bd.q_plus
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Constant => self.bd.q_plus,
            Shape::Step => {
                if x < 0.0 {
                    self.bd.q_minus
                } else {
                    self.bd.q_plus
                }
            }
            Shape::Tanh { width, center, bump } => tanh_q(&self.bd, x, *width, *center, *bump),
            Shape::Sampled { .. } if x < self.x_lo => self.bd.q_minus,
            Shape::Sampled { .. } if x > self.x_hi => self.bd.q_plus,
            Shape::Sampled { x0, h, q } => {
                let n = q.len();
                let s = (x - x0) / h;
                if s <= 0.0 {
                    return if s < 0.0 { self.tail(true) } else { q[0] };
                }
                if s >= (n - 1) as f64 {
                    return if s > (n - 1) as f64 { self.tail(false) } else { q[n - 1] };
                }
                // local cubic Lagrange through four neighbouring samples
                let i = (s.floor() as usize).clamp(1, n - 3) - 1;
                let t = s - i as f64;
                let (f0, f1, f2, f3) = (q[i], q[i + 1], q[i + 2], q[i + 3]);
                let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
                let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
                let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
                let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
                f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
            }
        }
    }

    /// Abscissae beyond which the profile equals its boundary value exactly:
    /// q ≡ q− on (−∞, left] and q ≡ q+ on [right, ∞). Used to start the Jost
    /// integration from the exact plane-wave solution.
    pub fn exact_tails(&self) -> (f64, f64) {
        match self.shape {
            Shape::Constant => (f64::INFINITY, f64::NEG_INFINITY),
            Shape::Step => (0.0, 0.0),
            _ => (self.x_lo, self.x_hi),
        }
    }

    /// Checks |q(x_lo) − q−| and |q(x_hi) − q+| against the tail tolerance.
    pub fn check_tails(&self, tau_tail: f64) -> Result<()> {
        for (x, target) in [(self.x_lo, self.bd.q_minus), (self.x_hi, self.bd.q_plus)] {
            let defect = (self.eval(x) - target).abs();
            if defect > tau_tail {
                return Err(Error::TailNotDecayed { x, target, defect, tol: tau_tail });
            }
        }
        Ok(())
    }

    pub fn is_step(&self) -> bool {
        matches!(self.shape, Shape::Step)
    }

    /// Samples on a uniform grid of spacing close to `h` covering [a, b].
    pub fn samples(&self, a: f64, b: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
        let n = ((b - a) / h).round().max(1.0) as usize;
        let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let qs = xs.iter().map(|&x| self.eval(x)).collect();
        (xs, qs)
    }

    pub fn read_text(path: impl AsRef<Path>, bd: BoundaryData, tau_tail: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (x, q) = parse_two_column(&text)?;
        Self::sampled(bd, &x, &q, tau_tail)
    }
}

/// Parses whitespace- or comma-separated (x, q) pairs; '#' starts a comment.
pub fn parse_two_column(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Format(format!("line {}: expected two columns", lineno + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
        };
        xs.push(parse(it.next())?);
        qs.push(parse(it.next())?);
    }
    Ok((xs, qs))
}

pub fn write_two_column(x: &[f64], q: &[f64], header: &str) -> String {
    let mut out = String::new();
    for line in header.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (a, b) in x.iter().zip(q) {
        out.push_str(&format!("{a:.17e} {b:.17e}\n"));
    }
    out
}
