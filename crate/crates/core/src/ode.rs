//! Adaptive Dormand–Prince 5(4) integrator for small complex linear systems.

use crate::branch::C64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; zero means "pick one".
    pub h0: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, max_steps: 2_000_000, h0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct StepUnderflow {
    pub x: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates y' = f(x, y) from x0 to x1 (either direction) and returns y(x1).
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    y0: [C64; N],
    x1: f64,
    opts: &OdeOptions,
) -> Result<([C64; N], OdeStats), StepUnderflow>
where
    F: Fn(f64, &[C64; N], &mut [C64; N]),
{
    let mut stats = OdeStats::default();
    if x1 == x0 {
        return Ok((y0, stats));
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = [C64::default(); N];
    f(x, &y, &mut k1);
    let mut h = if opts.h0 > 0.0 { opts.h0 } else { initial_step(&y, &k1, span, opts) };
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        ([C64::default(); N], [C64::default(); N], [C64::default(); N], [C64::default(); N], [C64::default(); N], [C64::default(); N]);
    let mut tmp = [C64::default(); N];
    let mut ynew = [C64::default(); N];
    let hmin = 1e-14 * (1.0 + x0.abs().max(x1.abs()));

    while (x1 - x) * dir > 0.0 {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(StepUnderflow { x });
        }
        let mut last = false;
        if h >= (x1 - x).abs() {
            h = (x1 - x).abs();
            last = true;
        }
        let hs = h * dir;
        for i in 0..N {
            tmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(x + C2 * hs, &tmp, &mut k2);
        for i in 0..N {
            tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(x + C3 * hs, &tmp, &mut k3);
        for i in 0..N {
            tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(x + C4 * hs, &tmp, &mut k4);
        for i in 0..N {
            tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(x + C5 * hs, &tmp, &mut k5);
        for i in 0..N {
            tmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(x + hs, &tmp, &mut k6);
        for i in 0..N {
            ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let xnew = if last { x1 } else { x + hs };
        f(xnew, &ynew, &mut k7);

        let mut err = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            stats.accepted += 1;
            x = xnew;
            y = ynew;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                h *= fac;
            }
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < hmin {
                return Err(StepUnderflow { x });
            }
        }
    }
    Ok((y, stats))
}

fn initial_step<const N: usize>(y: &[C64; N], f0: &[C64; N], span: f64, opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].norm();
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (f0[i].norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).min(0.1).max(1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = −y as a first-order complex system
        let f = |_x: f64, y: &[C64; 2], dy: &mut [C64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let (y, _) = integrate(f, 0.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 10.0, &OdeOptions::default()).unwrap();
        assert!((y[0].re - 10f64.cos()).abs() < 1e-8);
        let (yb, _) = integrate(f, 10.0, y, 0.0, &OdeOptions::default()).unwrap();
        assert!((yb[0].re - 1.0).abs() < 1e-8);
    }
}
