//! Gauss–Legendre rules on `[-1, 1]` and collapsed (Duffy) Gauss rules on the
//! reference triangle `(0,0), (1,0), (0,1)`.

use std::f64::consts::PI;

/// A rule on the reference interval `[-1, 1]`; weights sum to 2.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// A rule on the reference triangle; weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// `n`-point Gauss–Legendre nodes and weights, nodes ascending.
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
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss rule exact for polynomials of degree `exact_degree` on `[-1, 1]`.
pub fn line_rule(exact_degree: usize) -> LineRule {
    let n = exact_degree / 2 + 1;
    let (points, weights) = gauss_legendre(n);
    LineRule {
        points,
        weights,
        exact_degree: 2 * n - 1,
    }
}

/// Collapsed Gauss rule exact for polynomials of total degree
/// `exact_degree` on the reference triangle.
///
/// The map `(s, t) ↦ (s(1 − t), t)` from the unit square has Jacobian
/// `1 − t`, which raises the degree in `t` by one.
pub fn triangle_rule(exact_degree: usize) -> QuadRule {
    let n = exact_degree.div_ceil(2) + 1;
    let (g, gw) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&tj, &wj) in g.iter().zip(&gw) {
        let t = 0.5 * (tj + 1.0);
        for (&si, &wi) in g.iter().zip(&gw) {
            let s = 0.5 * (si + 1.0);
            points.push([s * (1.0 - t), t]);
            weights.push(0.25 * wi * wj * (1.0 - t));
        }
    }
    QuadRule {
        points,
        weights,
        exact_degree: 2 * n - 2,
    }
}
