//! Gauss–Legendre rules, barycentric interpolation and spectral differentiation.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Barycentric weights for Gauss–Legendre nodes, (−1)^j·sqrt((1 − x_j²)·w_j).
pub fn barycentric_weights(x: &[f64], w: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(w)
        .enumerate()
        .map(|(j, (&xj, &wj))| {
            let s = ((1.0 - xj * xj) * wj).sqrt();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Interpolation coefficients l_j(u) such that p(u) = Σ l_j f_j.
pub fn barycentric_coefficients(nodes: &[f64], bw: &[f64], u: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&x| x == u) {
        let mut c = vec![0.0; nodes.len()];
        c[j] = 1.0;
        return c;
    }
    let terms: Vec<f64> = nodes.iter().zip(bw).map(|(&x, &b)| b / (u - x)).collect();
    let s: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / s).collect()
}

/// Spectral differentiation matrix on arbitrary distinct nodes, row-major.
pub fn differentiation_matrix(nodes: &[f64], bw: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Endpoint clustering map g: [−1, 1] → [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Clustering {
    None,
    Left,
    Right,
    Both,
}

impl Clustering {
    pub fn from_flags(left: bool, right: bool) -> Self {
        match (left, right) {
            (true, true) => Clustering::Both,
            (true, false) => Clustering::Left,
            (false, true) => Clustering::Right,
            (false, false) => Clustering::None,
        }
    }

    pub fn left(self) -> bool {
        matches!(self, Clustering::Left | Clustering::Both)
    }

    pub fn right(self) -> bool {
        matches!(self, Clustering::Right | Clustering::Both)
    }

    /// g(u) and g'(u).
    pub fn map(self, u: f64) -> (f64, f64) {
        match self {
            Clustering::Both => {
                let th = PI * (u + 1.0) / 2.0;
                ((1.0 - th.cos()) / 2.0, PI / 4.0 * th.sin())
            }
            Clustering::Left => (((u + 1.0) / 2.0).powi(2), (u + 1.0) / 2.0),
            Clustering::Right => (1.0 - ((1.0 - u) / 2.0).powi(2), (1.0 - u) / 2.0),
            Clustering::None => ((u + 1.0) / 2.0, 0.5),
        }
    }

    pub fn second_derivative(self, u: f64) -> f64 {
        match self {
            Clustering::Both => PI * PI / 8.0 * (PI * (u + 1.0) / 2.0).cos(),
            Clustering::Left => 0.5,
            Clustering::Right => -0.5,
            Clustering::None => 0.0,
        }
    }

    /// Inverse map s ↦ u for s ∈ [0, 1].
    pub fn inverse(self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Clustering::Both => 2.0 / PI * (1.0 - 2.0 * s).acos() - 1.0,
            Clustering::Left => 2.0 * s.sqrt() - 1.0,
            Clustering::Right => 1.0 - 2.0 * (1.0 - s).sqrt(),
            Clustering::None => 2.0 * s - 1.0,
        }
    }
}
