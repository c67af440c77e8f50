//! Problem data and the three built-in unit-square examples.
//!
//! All examples use `Γ_C = Γ_O = {0} × (0, 1)` and `q = c₀ = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{on_left_side, Point};
use crate::{Error, Result};

pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&Point) -> Vector2<f64> + Send + Sync>;
pub type BoundaryPredicate = Arc<dyn Fn(&Point) -> bool + Send + Sync>;

/// Closed-form state with its gradient and Laplacian.
#[derive(Clone)]
pub struct ReferenceSolution {
    pub u: ScalarField,
    pub grad_u: VectorField,
    pub laplacian_u: ScalarField,
}

impl fmt::Debug for ReferenceSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ReferenceSolution { .. }")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Exact,
    LimitAlphaToZero,
    LimitAlphaToInfinity,
    None,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub f: ScalarField,
    pub c0: ScalarField,
    /// Boundary control datum. Recorded only: the discrete scheme recovers
    /// the control as `u_n` on `Γ_C`.
    pub q: ScalarField,
    pub alpha: f64,
    pub control: BoundaryPredicate,
    pub observe: BoundaryPredicate,
    pub reference: Option<ReferenceSolution>,
    pub reference_kind: ReferenceKind,
    /// Exact multiplier, when known.
    pub multiplier: Option<ScalarField>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("reference_kind", &self.reference_kind)
            .finish_non_exhaustive()
    }
}

fn zero() -> ScalarField {
    Arc::new(|_| 0.0)
}

impl ProblemSpec {
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// Same boundary layout and α with `f = c₀ = 0` and no reference.
    pub fn homogeneous(mut self) -> Self {
        self.name = format!("{} (homogeneous)", self.name);
        self.f = zero();
        self.c0 = zero();
        self.q = zero();
        self.reference = None;
        self.reference_kind = ReferenceKind::None;
        self.multiplier = Some(zero());
        self
    }

    pub fn without_reference(mut self) -> Self {
        self.reference = None;
        self.reference_kind = ReferenceKind::None;
        self
    }

    /// Checks `α > 0` and, for exact references, `−Δu + u = f` at random
    /// interior points.
    pub fn validate(&self, seed: u64) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.reference_kind != ReferenceKind::Exact {
            return Ok(());
        }
        let reference = self
            .reference
            .as_ref()
            .ok_or_else(|| Error::Config("exact reference kind without a reference".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = Point::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
            let residual = -(reference.laplacian_u)(&p) + (reference.u)(&p) - (self.f)(&p);
            if residual.abs() > 1e-8 {
                return Err(Error::Config(format!(
                    "reference violates the state equation at ({:.3}, {:.3}): residual {residual:.3e}",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }
}

fn left_side() -> BoundaryPredicate {
    Arc::new(on_left_side)
}

/// Manufactured solution `u = (1 − cos πx) cos πy`, independent of α, with
/// multiplier `λ ≡ 0`.
pub fn example1() -> ProblemSpec {
    let u = |p: &Point| (1.0 - (PI * p.x).cos()) * (PI * p.y).cos();
    let grad = |p: &Point| {
        Vector2::new(
            PI * (PI * p.x).sin() * (PI * p.y).cos(),
            -PI * (1.0 - (PI * p.x).cos()) * (PI * p.y).sin(),
        )
    };
    let lap = |p: &Point| {
        let (cx, cy) = ((PI * p.x).cos(), (PI * p.y).cos());
        PI * PI * cx * cy - PI * PI * (1.0 - cx) * cy
    };
    ProblemSpec {
        name: "example 1".into(),
        f: Arc::new(|p| {
            let (cx, cy) = ((PI * p.x).cos(), (PI * p.y).cos());
            -(2.0 * PI * PI + 1.0) * cx * cy + (PI * PI + 1.0) * cy
        }),
        c0: zero(),
        q: zero(),
        alpha: 1.0,
        control: left_side(),
        observe: left_side(),
        reference: Some(ReferenceSolution {
            u: Arc::new(u),
            grad_u: Arc::new(grad),
            laplacian_u: Arc::new(lap),
        }),
        reference_kind: ReferenceKind::Exact,
        multiplier: Some(zero()),
    }
}

/// `f = (5π²/4 + 1) sin(πx/2) cos πy`; the solution tends to
/// `cos(π(x − 1)/2) cos πy` as `α → 0`.
pub fn example2() -> ProblemSpec {
    let u = |p: &Point| (PI * (p.x - 1.0) / 2.0).cos() * (PI * p.y).cos();
    let grad = |p: &Point| {
        let (ax, ay) = (PI * (p.x - 1.0) / 2.0, PI * p.y);
        Vector2::new(-PI / 2.0 * ax.sin() * ay.cos(), -PI * ax.cos() * ay.sin())
    };
    let lap = move |p: &Point| -(PI * PI / 4.0 + PI * PI) * u(p);
    ProblemSpec {
        name: "example 2".into(),
        f: Arc::new(|p| (5.0 * PI * PI / 4.0 + 1.0) * (PI * p.x / 2.0).sin() * (PI * p.y).cos()),
        c0: zero(),
        q: zero(),
        alpha: 1.0,
        control: left_side(),
        observe: left_side(),
        reference: Some(ReferenceSolution {
            u: Arc::new(u),
            grad_u: Arc::new(grad),
            laplacian_u: Arc::new(lap),
        }),
        reference_kind: ReferenceKind::LimitAlphaToZero,
        multiplier: None,
    }
}

/// `f = −16y⁴ + 32y³ + 176y² − 192y + 32`; the solution tends to
/// `−16y²(1 − y)²` as `α → ∞`.
pub fn example3() -> ProblemSpec {
    let u = |p: &Point| -16.0 * p.y * p.y * (1.0 - p.y) * (1.0 - p.y);
    // u = −16(y² − 2y³ + y⁴)
    let grad = |p: &Point| {
        let y = p.y;
        Vector2::new(0.0, -16.0 * (2.0 * y - 6.0 * y * y + 4.0 * y * y * y))
    };
    let lap = |p: &Point| {
        let y = p.y;
        -16.0 * (2.0 - 12.0 * y + 12.0 * y * y)
    };
    ProblemSpec {
        name: "example 3".into(),
        f: Arc::new(|p| {
            let y = p.y;
            -16.0 * y.powi(4) + 32.0 * y.powi(3) + 176.0 * y * y - 192.0 * y + 32.0
        }),
        c0: zero(),
        q: zero(),
        alpha: 1.0,
        control: left_side(),
        observe: left_side(),
        reference: Some(ReferenceSolution {
            u: Arc::new(u),
            grad_u: Arc::new(grad),
            laplacian_u: Arc::new(lap),
        }),
        reference_kind: ReferenceKind::LimitAlphaToInfinity,
        multiplier: None,
    }
}

pub fn builtin(id: u32) -> Result<ProblemSpec> {
    match id {
        1 => Ok(example1()),
        2 => Ok(example2()),
        3 => Ok(example3()),
        _ => Err(Error::Config(format!("unknown example {id}; expected 1, 2 or 3"))),
    }
}

/// Parsed run configuration: the problem plus optional discretization
/// settings carried by the same file.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub example: u32,
    pub problem: ProblemSpec,
    pub levels: Option<(u32, u32)>,
    pub degree_k: Option<usize>,
    pub degree_r: Option<usize>,
}

/// Parses `a..b` (inclusive) or a single level `a`.
pub fn parse_levels(text: &str) -> std::result::Result<(u32, u32), String> {
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|e| format!("bad level '{s}': {e}"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let a = parse(text)?;
            (a, a)
        }
    };
    if b < a {
        return Err(format!("invalid level range '{text}'"));
    }
    Ok((a, b))
}

/// Parses the `key = value` configuration format. `#` starts a comment line.
///
/// Recognized keys: `example`, `alpha`, `levels`, `degree_k`, `degree_r`,
/// `reference` (`exact`, `limit` or `none`).
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut example = None;
    let mut alpha = None;
    let mut levels = None;
    let mut degree_k = None;
    let mut degree_r = None;
    let mut reference = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found '{trimmed}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "example" => {
                let id: u32 = value.parse().map_err(|e| err(line, format!("example: {e}")))?;
                if !(1..=3).contains(&id) {
                    return Err(err(line, format!("unknown example {id}")));
                }
                example = Some((id, line));
            }
            "alpha" => {
                let a: f64 = value.parse().map_err(|e| err(line, format!("alpha: {e}")))?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(err(line, format!("alpha must be positive, got {value}")));
                }
                alpha = Some(a);
            }
            "levels" => levels = Some(parse_levels(value).map_err(|m| err(line, m))?),
            "degree_k" => degree_k = Some(value.parse().map_err(|e| err(line, format!("degree_k: {e}")))?),
            "degree_r" => degree_r = Some(value.parse().map_err(|e| err(line, format!("degree_r: {e}")))?),
            "reference" => match value {
                "exact" | "limit" | "none" => reference = Some((value.to_string(), line)),
                _ => return Err(err(line, format!("reference must be exact, limit or none, got '{value}'"))),
            },
            _ => return Err(err(line, format!("unknown key '{key}'"))),
        }
    }

    let (id, _) = example.ok_or_else(|| err(0, "missing key 'example'".into()))?;
    let mut problem = builtin(id)?;
    if let Some(a) = alpha {
        problem.alpha = a;
    }
    if let Some((kind, line)) = reference {
        let matches = match kind.as_str() {
            "none" => true,
            "exact" => problem.reference_kind == ReferenceKind::Exact,
            _ => matches!(
                problem.reference_kind,
                ReferenceKind::LimitAlphaToZero | ReferenceKind::LimitAlphaToInfinity
            ),
        };
        if !matches {
            return Err(err(line, format!("example {id} has no '{kind}' reference")));
        }
        if kind == "none" {
            problem = problem.without_reference();
        }
    }
    Ok(ProblemConfig {
        example: id,
        problem,
        levels,
        degree_k,
        degree_r,
    })
}

pub fn load_problem(text: &str) -> Result<ProblemSpec> {
    parse_config(text).map(|c| c.problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(p: &ProblemSpec, x: f64, y: f64) -> f64 {
        let r = p.reference.as_ref().unwrap();
        let pt = Point::new(x, y);
        -(r.laplacian_u)(&pt) + (r.u)(&pt) - (p.f)(&pt)
    }

    fn assert_gradient_matches_fd(p: &ProblemSpec) {
        let r = p.reference.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-6;
        for _ in 0..20 {
            let pt = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let g = (r.grad_u)(&pt);
            let dx = ((r.u)(&Point::new(pt.x + eps, pt.y)) - (r.u)(&Point::new(pt.x - eps, pt.y))) / (2.0 * eps);
            let dy = ((r.u)(&Point::new(pt.x, pt.y + eps)) - (r.u)(&Point::new(pt.x, pt.y - eps))) / (2.0 * eps);
            assert!((g.x - dx).abs() < 1e-6 && (g.y - dy).abs() < 1e-6, "{}", p.name);
        }
    }

    #[test]
    fn example1_closed_forms() {
        let p = example1();
        let r = p.reference.as_ref().unwrap();
        assert_eq!((r.u)(&Point::new(0.0, 0.3)), 0.0);
        assert!(residual(&p, 0.25, 0.5).abs() < 1e-12);
        assert!((r.grad_u)(&Point::new(1.0, 0.7)).x.abs() < 1e-14);
        assert!(p.validate(1).is_ok());
        assert_gradient_matches_fd(&p);
    }

    #[test]
    fn example2_closed_forms() {
        let p = example2();
        let r = p.reference.as_ref().unwrap();
        for y in [0.0, 0.3, 0.9] {
            assert!((r.u)(&Point::new(0.0, y)).abs() < 1e-15);
        }
        assert!(residual(&p, 0.5, 0.25).abs() < 1e-12);
        assert!(((r.grad_u)(&Point::new(0.0, 0.0)).x - PI / 2.0).abs() < 1e-14);
        assert_gradient_matches_fd(&p);
    }

    #[test]
    fn example3_closed_forms() {
        let p = example3();
        let r = p.reference.as_ref().unwrap();
        assert!(((p.f)(&Point::new(0.3, 0.5)) + 17.0).abs() < 1e-12);
        assert!(residual(&p, 0.4, 0.5).abs() < 1e-12);
        assert!(residual(&p, 0.4, 0.123).abs() < 1e-11);
        for x in [0.0, 0.5, 1.0] {
            assert_eq!((r.u)(&Point::new(x, 0.5)), -1.0);
            assert_eq!((r.grad_u)(&Point::new(x, 0.0)), Vector2::zeros());
            assert!((r.grad_u)(&Point::new(x, 1.0)).norm() < 1e-13);
        }
        assert_gradient_matches_fd(&p);
    }

    #[test]
    fn limit_references_satisfy_state_equation_too() {
        // both limits solve −Δu + u = f; only the boundary conditions differ
        for p in [example2(), example3()] {
            let mut q = p.clone();
            q.reference_kind = ReferenceKind::Exact;
            assert!(q.validate(5).is_ok(), "{}", p.name);
        }
    }

    #[test]
    fn validate_catches_inconsistent_reference() {
        let mut p = example1();
        p.f = example2().f;
        assert!(matches!(p.validate(0), Err(Error::Config(_))));
    }

    #[test]
    fn config_passthrough() {
        let c = parse_config("example=1\nalpha=1.0").unwrap();
        assert_eq!(c.example, 1);
        assert_eq!(c.problem.alpha, 1.0);
        assert_eq!(c.problem.reference_kind, ReferenceKind::Exact);

        let c = parse_config("# limit run\nexample=3\nalpha=1e9\nlevels = 3..5\ndegree_k=3\n").unwrap();
        assert_eq!(c.problem.alpha, 1e9);
        assert_eq!(c.levels, Some((3, 5)));
        assert_eq!(c.degree_k, Some(3));
        assert_eq!(c.problem.reference_kind, ReferenceKind::LimitAlphaToInfinity);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        assert!(matches!(parse_config("example=1\nalpha=-1"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("alpha=-1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("example=4"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("example=1\ncolour=red"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("example=1\nalpha=1.0.0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("example=1\nreference=limit"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("alpha=2"), Err(Error::Parse { .. })));
    }

    #[test]
    fn reference_none_strips_reference() {
        let p = load_problem("example=2\nreference=none").unwrap();
        assert!(p.reference.is_none());
        assert_eq!(p.reference_kind, ReferenceKind::None);
    }

    #[test]
    fn levels_syntax() {
        assert_eq!(parse_levels("2..4"), Ok((2, 4)));
        assert_eq!(parse_levels("3"), Ok((3, 3)));
        assert!(parse_levels("4..2").is_err());
        assert_eq!(parse_levels("0..2"), Ok((0, 2)));
        assert!(parse_levels("x..2").is_err());
    }
}
