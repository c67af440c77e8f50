//! Error norms, convergence tables and field sampling.

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::{assemble, edge_mass};
use crate::fe_space::SpaceConfig;
use crate::mesh::Point;
use crate::problems::{ProblemSpec, ReferenceSolution, ScalarField};
use crate::solver::{solve_with_tolerance, Solution, RESIDUAL_TOL};
use crate::wg_ops::{gather_local, project_multiplier, project_onto_element, project_state_global};
use crate::{Discretization, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub level: u32,
    pub k: usize,
    pub r: usize,
    pub alpha: f64,
    /// `‖|Q_h u − u_h|‖`.
    pub energy_error: f64,
    /// `‖Q₀u − u₀‖`.
    pub l2_error: f64,
    /// `‖λ_h − 𝒬_h λ‖` when the exact multiplier is known.
    pub multiplier_error: Option<f64>,
    pub residual_rel: f64,
    pub n_total: usize,
    pub seconds: f64,
}

fn require_reference(problem: &ProblemSpec) -> Result<&ReferenceSolution> {
    problem
        .reference
        .as_ref()
        .ok_or_else(|| Error::Usage(format!("{} has no reference solution", problem.name)))
}

/// Energy semi-norm `(s(v, v) + ⟨v_b, v_b⟩_{Γ_O} + α⟨v_n, v_n⟩_{Γ_C})^{1/2}`
/// of a global state vector.
pub fn energy_norm(disc: &Discretization, alpha: f64, state: &DVector<f64>) -> f64 {
    let Discretization { mesh, space, local } = disc;
    let per_element: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let v = gather_local(mesh, space, t, state);
            v.dot(&(&local[t].stabilizer * &v))
        })
        .collect();
    let mut total: f64 = per_element.iter().sum();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tags.observe {
            for (j, g) in space.dofs.trace(e).enumerate() {
                total += edge_mass(edge.length, j) * state[g] * state[g];
            }
        }
        if edge.tags.control {
            if let Some(range) = space.dofs.flux(e) {
                for (j, g) in range.enumerate() {
                    total += alpha * edge_mass(edge.length, j) * state[g] * state[g];
                }
            }
        }
    }
    total.max(0.0).sqrt()
}

/// `‖|Q_h u − u_h|‖` against the problem's reference.
pub fn energy_error(disc: &Discretization, problem: &ProblemSpec, solution: &Solution) -> Result<f64> {
    let reference = require_reference(problem)?;
    let (u, grad) = (&reference.u, &reference.grad_u);
    let projected = project_state_global(&disc.mesh, &disc.space, |p| u(p), |p| grad(p));
    Ok(energy_norm(disc, problem.alpha, &(projected - &solution.u_coeffs)))
}

/// Elementwise `‖Q₀u − u₀‖`.
pub fn l2_error(disc: &Discretization, problem: &ProblemSpec, solution: &Solution) -> Result<f64> {
    let u = &require_reference(problem)?.u;
    let Discretization { mesh, space, local } = disc;
    let per_element: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let q0 = project_onto_element(mesh, space, t, &space.state_bases[t], |p| u(p));
            let range = space.dofs.interior(t);
            let d = q0 - solution.u_coeffs.rows(range.start, range.len());
            d.dot(&(&local[t].mass_k * &d))
        })
        .collect();
    Ok(per_element.iter().sum::<f64>().max(0.0).sqrt())
}

/// `‖λ_h − 𝒬_h λ‖` for a known multiplier.
pub fn multiplier_error(disc: &Discretization, lambda: &ScalarField, solution: &Solution) -> f64 {
    let Discretization { mesh, space, local } = disc;
    let nr = space.dofs.multiplier_per_element;
    let per_element: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let q = project_multiplier(mesh, space, t, |p| lambda(p));
            let d = q - solution.lambda_coeffs.rows(t * nr, nr);
            d.dot(&(&local[t].mass_r * &d))
        })
        .collect();
    per_element.iter().sum::<f64>().max(0.0).sqrt()
}

/// Builds, solves and measures one level.
pub fn run_level(problem: &ProblemSpec, config: SpaceConfig, level: u32) -> Result<(Discretization, Solution, ErrorReport)> {
    run_level_with_tolerance(problem, config, level, RESIDUAL_TOL)
}

pub fn run_level_with_tolerance(
    problem: &ProblemSpec,
    config: SpaceConfig,
    level: u32,
    tolerance: f64,
) -> Result<(Discretization, Solution, ErrorReport)> {
    let start = Instant::now();
    let disc = Discretization::new(level, config, problem)?;
    let system = assemble(&disc.mesh, &disc.space, &disc.local, problem)?;
    let solution = solve_with_tolerance(&system, tolerance)?;
    let energy = energy_error(&disc, problem, &solution)?;
    let l2 = l2_error(&disc, problem, &solution)?;
    let multiplier = problem
        .multiplier
        .as_ref()
        .map(|lambda| multiplier_error(&disc, lambda, &solution));
    let report = ErrorReport {
        level,
        k: config.k,
        r: config.r,
        alpha: problem.alpha,
        energy_error: energy,
        l2_error: l2,
        multiplier_error: multiplier,
        residual_rel: solution.residual_rel,
        n_total: disc.space.dofs.n_total,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((disc, solution, report))
}

/// Observed order between two consecutive factor-2 refinements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    pub value: f64,
    /// Set when the ratio was unusable (equal levels or a zero error) and
    /// the order was reported as 0.
    pub degenerate: bool,
}

/// `log₂(coarse / fine)` per halving of the mesh size.
pub fn observed_order(coarse: f64, fine: f64, level_step: u32) -> Order {
    if level_step == 0 || !(coarse > 0.0 && fine > 0.0) {
        return Order {
            value: 0.0,
            degenerate: true,
        };
    }
    Order {
        value: (coarse / fine).log2() / level_step as f64,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub report: ErrorReport,
    pub energy_order: Option<Order>,
    pub l2_order: Option<Order>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    /// Orders are absent on the first row. Repeated levels give a flagged
    /// zero order.
    pub fn from_reports(reports: Vec<ErrorReport>) -> Self {
        let mut rows: Vec<TableRow> = Vec::with_capacity(reports.len());
        for report in reports {
            let (energy_order, l2_order) = match rows.last() {
                None => (None, None),
                Some(prev) => {
                    let step = report.level.saturating_sub(prev.report.level);
                    (
                        Some(observed_order(prev.report.energy_error, report.energy_error, step)),
                        Some(observed_order(prev.report.l2_error, report.l2_error, step)),
                    )
                }
            };
            rows.push(TableRow {
                report,
                energy_order,
                l2_order,
            });
        }
        Self { rows }
    }

    pub fn energy_orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.energy_order.map(|o| o.value)).collect()
    }

    pub fn l2_orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.l2_order.map(|o| o.value)).collect()
    }

    pub fn row(&self, level: u32) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.report.level == level)
    }
}

/// Runs consecutive levels and tabulates errors and orders.
pub fn convergence_study(problem: &ProblemSpec, config: SpaceConfig, levels: &[u32]) -> Result<ConvergenceTable> {
    convergence_study_with_tolerance(problem, config, levels, RESIDUAL_TOL)
}

pub fn convergence_study_with_tolerance(
    problem: &ProblemSpec,
    config: SpaceConfig,
    levels: &[u32],
    tolerance: f64,
) -> Result<ConvergenceTable> {
    if levels.len() < 2 {
        return Err(Error::Usage("a convergence study needs at least two levels".into()));
    }
    if levels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Usage(format!(
            "levels must be consecutive (uniform factor-2 refinement), got {levels:?}"
        )));
    }
    require_reference(problem)?;
    let reports = levels
        .iter()
        .map(|&level| run_level_with_tolerance(problem, config, level, tolerance).map(|(_, _, r)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_reports(reports))
}

/// Samples `u₀` at the centroids of the upward sub-triangles of an
/// `n`-fold barycentric split of every element: `n(n+1)/2` points per
/// triangle, ordered by (triangle, lattice index). `n = 1` gives the centroid.
pub fn sample_field(disc: &Discretization, solution: &Solution, samples_per_edge: usize) -> Result<Vec<[f64; 3]>> {
    if samples_per_edge == 0 {
        return Err(Error::Usage("samples per edge must be at least 1".into()));
    }
    let n = samples_per_edge as f64;
    let Discretization { mesh, space, .. } = disc;
    let mut out = Vec::with_capacity(mesh.num_triangles() * samples_per_edge * (samples_per_edge + 1) / 2);
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.corners(t);
        let range = space.dofs.interior(t);
        let coeffs = solution.u_coeffs.rows(range.start, range.len());
        for j in 0..samples_per_edge {
            for i in 0..samples_per_edge - j {
                let (s, r) = ((i as f64 + 1.0 / 3.0) / n, (j as f64 + 1.0 / 3.0) / n);
                let p: Point = a + (b - a) * s + (c - a) * r;
                let value: f64 = space.state_bases[t]
                    .values(&p)
                    .iter()
                    .zip(coeffs.iter())
                    .map(|(v, c)| v * c)
                    .sum();
                out.push([p.x, p.y, value]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{example1, example3};

    fn report(level: u32, energy: f64, l2: f64) -> ErrorReport {
        ErrorReport {
            level,
            k: 3,
            r: 1,
            alpha: 1.0,
            energy_error: energy,
            l2_error: l2,
            multiplier_error: None,
            residual_rel: 0.0,
            n_total: 0,
            seconds: 0.0,
        }
    }

    #[test]
    fn orders_from_reports() {
        let t = ConvergenceTable::from_reports(vec![report(2, 0.4, 0.16), report(3, 0.1, 0.01)]);
        assert_eq!(t.rows[0].energy_order, None);
        assert_eq!(t.energy_orders(), vec![2.0]);
        assert_eq!(t.l2_orders(), vec![4.0]);
    }

    #[test]
    fn repeated_level_gives_flagged_zero() {
        let t = ConvergenceTable::from_reports(vec![report(3, 0.1, 0.01), report(3, 0.1, 0.01)]);
        let o = t.rows[1].energy_order.unwrap();
        assert_eq!(o.value, 0.0);
        assert!(o.degenerate);
    }

    #[test]
    fn study_rejects_bad_levels() {
        let p = example1();
        let c = SpaceConfig::new(3, 1).unwrap();
        assert!(matches!(convergence_study(&p, c, &[2]), Err(Error::Usage(_))));
        assert!(matches!(convergence_study(&p, c, &[2, 4]), Err(Error::Usage(_))));
        assert!(matches!(
            convergence_study(&p.clone().without_reference(), c, &[1, 2]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn projected_reference_has_zero_error() {
        let p = example1();
        let disc = Discretization::new(3, SpaceConfig::new(3, 1).unwrap(), &p).unwrap();
        let r = p.reference.as_ref().unwrap();
        let u = project_state_global(&disc.mesh, &disc.space, |x| (r.u)(x), |x| (r.grad_u)(x));
        let nl = disc.space.dofs.n_total - disc.space.dofs.n_state;
        let s = Solution::from_parts(u, DVector::zeros(nl));
        assert!(energy_error(&disc, &p, &s).unwrap() < 1e-11);
        assert!(l2_error(&disc, &p, &s).unwrap() < 1e-12);
    }

    #[test]
    fn missing_reference_is_usage_error() {
        let p = example1().without_reference();
        let disc = Discretization::new(1, SpaceConfig::new(2, 1).unwrap(), &p).unwrap();
        let s = Solution::from_parts(DVector::zeros(disc.space.dofs.n_state), DVector::zeros(6));
        assert!(matches!(energy_error(&disc, &p, &s), Err(Error::Usage(_))));
        assert!(matches!(l2_error(&disc, &p, &s), Err(Error::Usage(_))));
    }

    #[test]
    fn sample_counts_and_zero_field() {
        let p = example1();
        let disc = Discretization::new(2, SpaceConfig::new(3, 1).unwrap(), &p).unwrap();
        let zero = Solution::from_parts(DVector::zeros(disc.space.dofs.n_state), DVector::zeros(0));
        let one = sample_field(&disc, &zero, 1).unwrap();
        assert_eq!(one.len(), disc.mesh.num_triangles());
        for (t, s) in one.iter().enumerate() {
            let c = disc.mesh.geometry[t].centroid;
            assert!((s[0] - c.x).abs() < 1e-15 && (s[1] - c.y).abs() < 1e-15);
        }
        let three = sample_field(&disc, &zero, 3).unwrap();
        assert_eq!(three.len(), 6 * disc.mesh.num_triangles());
        assert!(three.iter().all(|s| s[2] == 0.0));
        assert!(sample_field(&disc, &zero, 0).is_err());
    }

    #[test]
    fn example3_large_alpha_is_nearly_x_independent() {
        let p = example3().with_alpha(1e9).unwrap();
        let (disc, sol, rep) = run_level(&p, SpaceConfig::new(3, 1).unwrap(), 3).unwrap();
        let samples = sample_field(&disc, &sol, 2).unwrap();
        let mut by_y: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
        for s in &samples {
            by_y.entry((s[1] * 1e9).round() as i64).or_default().push(s[2]);
        }
        let spread = by_y
            .values()
            .map(|v| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min))
            .fold(0.0, f64::max);
        assert!(spread <= 10.0 * rep.l2_error, "spread {spread} vs l2 {}", rep.l2_error);
    }
}
