use nalgebra::Vector2;

use crate::mesh::Point;

/// Dimension of `P_d` in two variables.
pub fn dim_poly(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Exponent pairs `(a, b)` with `a + b ≤ degree` in graded-lexicographic order.
pub fn graded_exponents(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(dim_poly(degree));
    for total in 0..=degree as u32 {
        for b in 0..=total {
            out.push((total - b, b));
        }
    }
    out
}

/// Scaled monomials `((x − x_T)/h_T)^a ((y − y_T)/h_T)^b` on one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBasis {
    pub degree: usize,
    pub center: Point,
    pub h: f64,
    pub exponents: Vec<(u32, u32)>,
}

/// Values, gradients and Laplacians of every basis term at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub gradients: Vec<Vector2<f64>>,
    pub laplacians: Vec<f64>,
}

impl ElementBasis {
    pub fn new(degree: usize, center: Point, h: f64) -> Self {
        Self {
            degree,
            center,
            h,
            exponents: graded_exponents(degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn powers(&self, p: &Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.h;
        let eta = (p.y - self.center.y) / self.h;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    pub fn values(&self, p: &Point) -> Vec<f64> {
        let (px, py) = self.powers(p);
        self.exponents
            .iter()
            .map(|&(a, b)| px[a as usize] * py[b as usize])
            .collect()
    }

    pub fn gradients(&self, p: &Point) -> Vec<Vector2<f64>> {
        let (px, py) = self.powers(p);
        let inv_h = 1.0 / self.h;
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as usize, b as usize);
                let dx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
                let dy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
                Vector2::new(dx, dy) * inv_h
            })
            .collect()
    }

    pub fn laplacians(&self, p: &Point) -> Vec<f64> {
        let (px, py) = self.powers(p);
        let inv_h2 = 1.0 / (self.h * self.h);
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as usize, b as usize);
                let xx = if a > 1 { (a * (a - 1)) as f64 * px[a - 2] * py[b] } else { 0.0 };
                let yy = if b > 1 { (b * (b - 1)) as f64 * px[a] * py[b - 2] } else { 0.0 };
                (xx + yy) * inv_h2
            })
            .collect()
    }

    pub fn eval(&self, p: &Point) -> BasisEval {
        BasisEval {
            values: self.values(p),
            gradients: self.gradients(p),
            laplacians: self.laplacians(p),
        }
    }
}

/// Legendre polynomials `P_0 … P_degree` in the edge parameter `t ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBasis {
    pub degree: usize,
}

impl EdgeBasis {
    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree + 1);
        out.push(1.0);
        if self.degree >= 1 {
            out.push(t);
        }
        for j in 2..=self.degree {
            let p = ((2 * j - 1) as f64 * t * out[j - 1] - (j - 1) as f64 * out[j - 2]) / j as f64;
            out.push(p);
        }
        out
    }

    /// Derivatives with respect to `t`.
    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        let p = self.values(t);
        let mut d = vec![0.0; self.degree + 1];
        // P'_{j} = P'_{j-2} + (2j − 1) P_{j−1}
        for j in 1..=self.degree {
            d[j] = (2 * j - 1) as f64 * p[j - 1] + if j >= 2 { d[j - 2] } else { 0.0 };
        }
        d
    }

    /// `∫_{-1}^{1} P_j² dt`; scale by `length / 2` for a physical edge.
    pub fn reference_mass(j: usize) -> f64 {
        2.0 / (2 * j + 1) as f64
    }
}
