//! Time evolution of scattering data through the dispersion laws f±(k).
//!
//! With S_t = R+S − SR−, R± = if±σ3, every entry picks up a pure exponential:
//! s11 ∝ e^{it(f+−f−)}, s12 ∝ e^{it(f++f−)}, s21 ∝ e^{−it(f++f−)},
//! s22 ∝ e^{−it(f+−f−)}, hence ρ ∝ e^{−2itf+} and ρ̃ ∝ e^{2itf+}.

use crate::branch::{lambda, BoundaryData, Regime, SpectralPoint, Which, C64, I};
use crate::scattering::{ConjugateEigen, DiscreteEigen, ScatteringData, ScatteringSample};

/// f±(k) = 2(q±² − 2k²)λ± (focusing), −2(q±² + 2k²)λ± (defocusing).
pub fn f_pm(point: SpectralPoint, which: Which, bd: &BoundaryData) -> C64 {
    let q2 = bd.q(which).powi(2);
    let k2 = point.k * point.k;
    let lam = lambda(point, which, bd);
    match bd.regime {
        Regime::Focusing => 2.0 * (q2 - 2.0 * k2) * lam,
        Regime::Defocusing => -2.0 * (q2 + 2.0 * k2) * lam,
    }
}

/// Multipliers for (s11, s12, s21, s22) over a time step dt.
pub fn entry_factors(point: SpectralPoint, bd: &BoundaryData, dt: f64) -> [C64; 4] {
    let fp = f_pm(point, Which::Plus, bd);
    let fm = f_pm(point, Which::Minus, bd);
    [
        (I * dt * (fp - fm)).exp(),
        (I * dt * (fp + fm)).exp(),
        (-I * dt * (fp + fm)).exp(),
        (-I * dt * (fp - fm)).exp(),
    ]
}

pub fn evolve_sample(s: &ScatteringSample, bd: &BoundaryData, dt: f64) -> ScatteringSample {
    let [e11, e12, e21, e22] = entry_factors(s.point, bd, dt);
    let fp = f_pm(s.point, Which::Plus, bd);
    ScatteringSample {
        point: s.point,
        s11: s.s11.map(|v| v * e11),
        s12: s.s12.map(|v| v * e12),
        s21: s.s21.map(|v| v * e21),
        s22: s.s22.map(|v| v * e22),
        rho: s.rho.map(|v| v * (-2.0 * I * dt * fp).exp()),
        rho_tilde: s.rho_tilde.map(|v| v * (2.0 * I * dt * fp).exp()),
    }
}

pub fn evolve_eigen(e: &DiscreteEigen, bd: &BoundaryData, dt: f64) -> DiscreteEigen {
    let p = SpectralPoint::principal(e.k);
    let [e11, e12, _, _] = entry_factors(p, bd, dt);
    let fp = f_pm(p, Which::Plus, bd);
    let conj = e.conj.as_ref().map(|c| {
        let pc = SpectralPoint::principal(c.k);
        let [_, _, c21, c22] = entry_factors(pc, bd, dt);
        let fpc = f_pm(pc, Which::Plus, bd);
        ConjugateEigen {
            k: c.k,
            // φ−,2 = b̄ φ+,1 evolves like s21⁻¹
            b: c.b / c21,
            s22_prime: c.s22_prime * c22,
            c: c.c * (2.0 * I * dt * fpc).exp(),
            s22_defect: c.s22_defect,
        }
    });
    DiscreteEigen {
        k: e.k,
        lambda_plus: e.lambda_plus,
        lambda_minus: e.lambda_minus,
        b: e.b / e12,
        s11_prime: e.s11_prime * e11,
        c: e.c * (-2.0 * I * dt * fp).exp(),
        conj,
    }
}

/// Data advanced by dt from its current time; evolve(evolve(D, t1), t2 − t1) = evolve(D, t2).
pub fn evolve(data: &ScatteringData, dt: f64) -> ScatteringData {
    let bd = &data.bd;
    let mut out = data.clone();
    out.t = data.t + dt;
    out.nodes = data.nodes.iter().map(|s| evolve_sample(s, bd, dt)).collect();
    out.discrete = data.discrete.iter().map(|e| evolve_eigen(e, bd, dt)).collect();
    out
}

/// Data at absolute time t.
pub fn evolve_to(data: &ScatteringData, t: f64) -> ScatteringData {
    evolve(data, t - data.t)
}
