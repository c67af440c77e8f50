//! Built-in invariant checks, run by `wgoc check` and the acceptance tests.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::assemble;
use crate::fe_space::{line_rule, triangle_rule, SpaceConfig};
use crate::mesh::Point;
use crate::problems::example1;
use crate::solver::solve;
use crate::wg_ops::{project_exact, project_multiplier, stabilizer_root, triangle_points};
use crate::Discretization;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, worst: f64, threshold: f64, detail: String) -> Self {
        Self {
            name,
            passed: worst <= threshold,
            worst,
            threshold,
            detail,
        }
    }
}

/// A random polynomial `Σ c_ab ξ^a η^b` with `a + b ≤ degree` in the
/// shifted and scaled coordinates `(ξ, η) = (p − center) / scale`.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub terms: Vec<(i32, i32, f64)>,
    pub center: Point,
    pub scale: f64,
}

impl Polynomial {
    /// Coefficients uniform in `[−1, 1)` in global coordinates.
    pub fn random(degree: usize, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for total in 0..=degree as i32 {
            for b in 0..=total {
                terms.push((total - b, b, rng.gen_range(-1.0..1.0)));
            }
        }
        Self {
            terms,
            center: Point::origin(),
            scale: 1.0,
        }
    }

    /// Same distribution in coordinates local to an element of the given
    /// centroid and size.
    pub fn random_local(degree: usize, center: Point, scale: f64, rng: &mut impl Rng) -> Self {
        Self {
            center,
            scale,
            ..Self::random(degree, rng)
        }
    }

    fn local(&self, p: &Point) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }

    pub fn value(&self, p: &Point) -> f64 {
        let (x, y) = self.local(p);
        self.terms.iter().map(|&(a, b, c)| c * x.powi(a) * y.powi(b)).sum()
    }

    pub fn gradient(&self, p: &Point) -> Vector2<f64> {
        let (x, y) = self.local(p);
        let g = self.terms.iter().fold(Vector2::zeros(), |acc, &(a, b, c)| {
            let dx = if a > 0 { c * a as f64 * x.powi(a - 1) * y.powi(b) } else { 0.0 };
            let dy = if b > 0 { c * b as f64 * x.powi(a) * y.powi(b - 1) } else { 0.0 };
            acc + Vector2::new(dx, dy)
        });
        g / self.scale
    }

    pub fn laplacian(&self, p: &Point) -> f64 {
        let (x, y) = self.local(p);
        let l: f64 = self
            .terms
            .iter()
            .map(|&(a, b, c)| {
                let xx = if a > 1 { (a * (a - 1)) as f64 * x.powi(a - 2) * y.powi(b) } else { 0.0 };
                let yy = if b > 1 { (b * (b - 1)) as f64 * x.powi(a) * y.powi(b - 2) } else { 0.0 };
                c * (xx + yy)
            })
            .sum();
        l / (self.scale * self.scale)
    }

    /// `Σ |c_ab| (|∂²_ξ m_ab| + |∂²_η m_ab|)`, a cancellation-free bound on
    /// `|Δθ|` that sets the scale of the commutative check.
    pub fn laplacian_magnitude(&self, p: &Point) -> f64 {
        let (x, y) = self.local(p);
        let (x, y) = (x.abs(), y.abs());
        let l: f64 = self
            .terms
            .iter()
            .map(|&(a, b, c)| {
                let xx = if a > 1 { (a * (a - 1)) as f64 * x.powi(a - 2) * y.powi(b) } else { 0.0 };
                let yy = if b > 1 { (b * (b - 1)) as f64 * x.powi(a) * y.powi(b - 2) } else { 0.0 };
                c.abs() * (xx + yy)
            })
            .sum();
        l / (self.scale * self.scale)
    }
}

/// Collapsed triangle rules and Gauss line rules integrate every monomial
/// up to their stated degree.
pub fn quadrature_exactness() -> CheckResult {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let mut worst: f64 = 0.0;
    for degree in 0..=20usize {
        let rule = triangle_rule(degree);
        for a in 0..=degree as u32 {
            for b in 0..=(degree as u32 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                worst = worst.max((q - exact).abs() / exact);
            }
        }
        let line = line_rule(degree);
        for p in 0..=degree {
            let q: f64 = line.points.iter().zip(&line.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p + 1) as f64 } else { 0.0 };
            worst = worst.max((q - exact).abs() / exact.max(1.0));
        }
    }
    CheckResult::new("quadrature exactness", worst, 1e-13, "monomials up to degree 20".into())
}

/// `Δ_w(Q_h θ) = 𝒬_h(Δθ)` for random `θ ∈ P_k` on random elements of
/// levels 1–3, with `θ` drawn in coordinates local to the element. Errors
/// are relative to the projection of [`Polynomial::laplacian_magnitude`],
/// so that random cancellation in `Δθ` does not inflate them.
pub fn commutative_property(config: SpaceConfig, samples: usize, seed: u64) -> CheckResult {
    let problem = example1();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discs: Vec<Discretization> = (1..=3)
        .map(|level| Discretization::new(level, config, &problem).expect("valid discretization"))
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let disc = &discs[rng.gen_range(0..discs.len())];
        let t = rng.gen_range(0..disc.mesh.num_triangles());
        let degree = rng.gen_range(2..=config.k);
        let g = &disc.mesh.geometry[t];
        let theta = Polynomial::random_local(degree, g.centroid, g.h, &mut rng);
        let v = project_exact(&disc.mesh, &disc.space, t, |p| theta.value(p), |p| theta.gradient(p));
        let lhs = &disc.local[t].weak_laplacian * v;
        let rhs = project_multiplier(&disc.mesh, &disc.space, t, |p| theta.laplacian(p));
        let scale = project_multiplier(&disc.mesh, &disc.space, t, |p| theta.laplacian_magnitude(p)).amax();
        let err = (&lhs - &rhs).amax() / scale.max(f64::MIN_POSITIVE);
        worst = worst.max(err);
    }
    CheckResult::new(
        "commutative property",
        worst,
        1e-10,
        format!("{samples} random polynomials, k = {}, r = {}", config.k, config.r),
    )
}

/// The assembled matrix equals its transpose entry by entry.
pub fn global_symmetry(config: SpaceConfig) -> CheckResult {
    let problem = example1();
    let mut worst: f64 = 0.0;
    for level in 1..=3 {
        let d = Discretization::new(level, config, &problem).expect("valid discretization");
        let sys = assemble(&d.mesh, &d.space, &d.local, &problem).expect("valid problem");
        worst = worst.max(sys.matrix.asymmetry());
    }
    CheckResult::new("global symmetry", worst, 0.0, "levels 1-3, max |M - M^T|".into())
}

/// Homogeneous data yields the zero solution for several α.
pub fn homogeneous_uniqueness(config: SpaceConfig) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for alpha in [1e-6, 1.0, 1e6] {
        let problem = example1().with_alpha(alpha).expect("positive alpha").homogeneous();
        for level in 1..=3 {
            let d = Discretization::new(level, config, &problem).expect("valid discretization");
            let sys = assemble(&d.mesh, &d.space, &d.local, &problem).expect("valid problem");
            match solve(&sys) {
                Ok(s) => worst = worst.max(s.u_coeffs.amax()).max(s.lambda_coeffs.amax()),
                Err(e) => {
                    worst = f64::INFINITY;
                    failures.push(format!("alpha {alpha:e} level {level}: {e}"));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        "levels 1-3, alpha in {1e-6, 1, 1e6}".to_string()
    } else {
        failures.join("; ")
    };
    CheckResult::new("homogeneous uniqueness", worst, 1e-9, detail)
}

/// `s(Q_h p, Q_h p) ≤ 1e-12 ‖p‖²` for random global `p ∈ P_r`, where `‖p‖`
/// is the L² norm on the unit square.
pub fn stabilizer_kernel(config: SpaceConfig, per_level: usize, seed: u64) -> CheckResult {
    let problem = example1();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for level in 1..=3 {
        let d = Discretization::new(level, config, &problem).expect("valid discretization");
        for _ in 0..per_level {
            let p = Polynomial::random(config.r, &mut rng);
            let s = stabilizer_energy(&d, &p);
            let norm2 = l2_norm_squared(&d, |x| p.value(x));
            worst = worst.max(s / norm2);
        }
    }
    CheckResult::new(
        "stabilizer kernel",
        worst,
        1e-12,
        format!("{per_level} random p in P_{} per level 1-3", config.r),
    )
}

/// `s(Q_h p, Q_h p)` summed over elements from local projections.
fn stabilizer_energy(d: &Discretization, p: &Polynomial) -> f64 {
    (0..d.mesh.num_triangles())
        .map(|t| {
            let v = project_exact(&d.mesh, &d.space, t, |x| p.value(x), |x| p.gradient(x));
            (stabilizer_root(&d.mesh, &d.space, t) * v).norm_squared()
        })
        .sum()
}

fn l2_norm_squared(d: &Discretization, f: impl Fn(&Point) -> f64) -> f64 {
    (0..d.mesh.num_triangles())
        .map(|t| {
            triangle_points(&d.mesh, t, &d.space.triangle_data)
                .iter()
                .map(|(p, w)| w * f(p).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Runs the whole suite with the default degrees `(k, r) = (3, 1)`.
pub fn run_all() -> Vec<CheckResult> {
    let config = SpaceConfig::new(3, 1).expect("valid degrees");
    vec![
        quadrature_exactness(),
        commutative_property(config, 100, 2024),
        global_symmetry(config),
        homogeneous_uniqueness(config),
        stabilizer_kernel(config, 50, 7),
    ]
}
