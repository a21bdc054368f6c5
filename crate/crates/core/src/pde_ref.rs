//! Reference finite-difference solver for q_t − 6σq²q_x + q_xxx = 0.
//!
//! Fourth-order centered differences (5-point q_x, 7-point q_xxx) in space
//! and classical RK4 in time on a uniform grid. The outer three points at
//! each end are pinned to q±; if the solution next to them moves away from
//! the background the domain is too short and the run fails.

use serde::{Deserialize, Serialize};

use crate::branch::BoundaryData;
use crate::error::{Error, Result};
use crate::profile::PotentialProfile;

/// Width of the pinned layer at each end (half the q_xxx stencil).
pub const PINNED: usize = 3;

/// RK4 covers the imaginary axis up to 2√2.
const RK4_IMAG_LIMIT: f64 = 2.828_427_124_746_19;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PdeOptions {
    /// Time step as a fraction of the linear stability bound.
    pub dt_factor: f64,
    /// Largest allowed |q − q±| on the points next to the pinned layers.
    pub drift_tol: f64,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self { dt_factor: 0.5, drift_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeState {
    pub bd: BoundaryData,
    pub x0: f64,
    pub h: f64,
    pub t: f64,
    pub q: Vec<f64>,
}

/// Spectral radius of the discrete q_xxx symbol times h³.
fn d3_symbol_max() -> f64 {
    (0..=2000)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / 2000.0;
            (13.0 / 4.0 * th.sin() - 2.0 * (2.0 * th).sin() + 0.25 * (3.0 * th).sin()).abs()
        })
        .fold(0.0, f64::max)
}

impl PdeState {
    /// Samples `profile` on n points over [x_lo, x_hi] at time t = 0.
    pub fn from_profile(profile: &PotentialProfile, x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if n < 4 * PINNED || !(x_hi > x_lo) {
            return Err(Error::Config(format!("need x_lo < x_hi and at least {} points", 4 * PINNED)));
        }
        let h = (x_hi - x_lo) / (n - 1) as f64;
        let mut q: Vec<f64> = (0..n).map(|i| profile.eval(x_lo + h * i as f64)).collect();
        for i in 0..PINNED {
            q[i] = profile.bd.q_minus;
            q[n - 1 - i] = profile.bd.q_plus;
        }
        Ok(Self { bd: profile.bd, x0: x_lo, h, t: 0.0, q })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.h * i as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.q.len()).map(|i| self.x(i)).collect()
    }

    /// Largest stable dt for this grid and amplitude.
    pub fn stability_bound(&self) -> f64 {
        let qmax = self.q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        // q_x symbol peaks near 1.372/h
        let rate = d3_symbol_max() / self.h.powi(3) + 6.0 * qmax * qmax * 1.372 / self.h;
        RK4_IMAG_LIMIT / rate
    }

    fn rhs(&self, q: &[f64], out: &mut [f64]) {
        let n = q.len();
        let h = self.h;
        let s6 = 6.0 * self.bd.sigma();
        let (c1, c3) = (1.0 / (12.0 * h), 1.0 / (8.0 * h * h * h));
        for v in out.iter_mut().take(PINNED) {
            *v = 0.0;
        }
        for v in out.iter_mut().skip(n - PINNED) {
            *v = 0.0;
        }
        for i in PINNED..n - PINNED {
            let qx = (q[i - 2] - 8.0 * q[i - 1] + 8.0 * q[i + 1] - q[i + 2]) * c1;
            let qxxx = (q[i - 3] - 8.0 * q[i - 2] + 13.0 * q[i - 1] - 13.0 * q[i + 1] + 8.0 * q[i + 2] - q[i + 3]) * c3;
            out[i] = s6 * q[i] * q[i] * qx - qxxx;
        }
    }

    /// One RK4 step of size dt.
    pub fn step(&mut self, dt: f64, opts: &PdeOptions) -> Result<()> {
        let bound = self.stability_bound();
        if !(dt > 0.0) || dt > bound {
            return Err(Error::StabilityViolation { dt, bound });
        }
        let n = self.q.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.rhs(&self.q, &mut k1);
        for i in 0..n {
            tmp[i] = self.q[i] + 0.5 * dt * k1[i];
        }
        self.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = self.q[i] + 0.5 * dt * k2[i];
        }
        self.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = self.q[i] + dt * k3[i];
        }
        self.rhs(&tmp, &mut k4);
        for i in 0..n {
            self.q[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.t += dt;
        self.check_drift(opts.drift_tol)
    }

    fn check_drift(&self, tol: f64) -> Result<()> {
        let n = self.q.len();
        let left = (PINNED..2 * PINNED).map(|i| (self.q[i] - self.bd.q_minus).abs()).fold(0.0, f64::max);
        let right = (n - 2 * PINNED..n - PINNED).map(|i| (self.q[i] - self.bd.q_plus).abs()).fold(0.0, f64::max);
        let drift = left.max(right);
        if drift > tol {
            return Err(Error::BoundaryDrift { drift });
        }
        Ok(())
    }

    /// Advances to time t with equal steps no larger than dt_factor times the
    /// stability bound at the start.
    pub fn evolve_to(&mut self, t: f64, opts: &PdeOptions) -> Result<()> {
        let span = t - self.t;
        if span < 0.0 {
            return Err(Error::Config(format!("cannot evolve backwards from t = {} to {t}", self.t)));
        }
        if span == 0.0 {
            return Ok(());
        }
        let dt_max = opts.dt_factor * self.stability_bound();
        let steps = (span / dt_max).ceil() as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            self.step(dt, opts)?;
        }
        self.t = t;
        Ok(())
    }

    /// Linear interpolation of q at x (for off-grid comparisons).
    pub fn sample(&self, x: f64) -> Option<f64> {
        let s = (x - self.x0) / self.h;
        if s < 0.0 || s > (self.q.len() - 1) as f64 {
            return None;
        }
        let i = (s.floor() as usize).min(self.q.len() - 2);
        let w = s - i as f64;
        Some(self.q[i] * (1.0 - w) + self.q[i + 1] * w)
    }
}
