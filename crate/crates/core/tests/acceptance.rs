//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a required criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use wg_control::checks;
use wg_control::cli::sci3;
use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::{convergence_study, ConvergenceTable};
use wg_control::problems::{example1, example2, example3, ProblemSpec};

struct Outcome {
    id: u32,
    name: &'static str,
    required: bool,
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Collects sub-check failures for one criterion.
#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn relative(&mut self, what: &str, actual: f64, expected: f64, tol: f64) {
        let rel = (actual - expected).abs() / expected.abs();
        let line = format!("{what} {} vs {} ({:.1}%)", sci3(actual), sci3(expected), 100.0 * rel);
        if rel <= tol {
            self.notes.push(line);
        } else {
            self.failures.push(format!("{line} > {:.0}%", 100.0 * tol));
        }
    }

    fn band(&mut self, what: &str, actual: f64, expected: f64, tol: f64) {
        let line = format!("{what} {actual:.3} vs {expected:.1}");
        if (actual - expected).abs() <= tol {
            self.notes.push(line);
        } else {
            self.failures.push(format!("{line} outside ±{tol}"));
        }
    }

    fn at_least(&mut self, what: &str, actual: f64, bound: f64) {
        let line = format!("{what} {actual:.3} (>= {bound:.1})");
        if actual >= bound {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    fn finish(self, id: u32, name: &'static str, required: bool) -> Outcome {
        Outcome {
            id,
            name,
            required,
            detail: self.notes.join("; "),
            failures: self.failures,
        }
    }
}

fn space(k: usize, r: usize) -> SpaceConfig {
    SpaceConfig::new(k, r).expect("valid degrees")
}

fn study(problem: &ProblemSpec, k: usize, r: usize, levels: std::ops::RangeInclusive<u32>) -> Result<ConvergenceTable, String> {
    let levels: Vec<u32> = levels.collect();
    convergence_study(problem, space(k, r), &levels).map_err(|e| e.to_string())
}

fn with_alpha(problem: ProblemSpec, alpha: f64) -> ProblemSpec {
    problem.with_alpha(alpha).expect("positive alpha")
}

fn row_values(table: &ConvergenceTable, level: u32) -> (f64, f64, f64, f64) {
    let row = table.row(level).expect("level in table");
    (
        row.report.energy_error,
        row.energy_order.map_or(f64::NAN, |o| o.value),
        row.report.l2_error,
        row.l2_order.map_or(f64::NAN, |o| o.value),
    )
}

fn failed_study(id: u32, name: &'static str, required: bool, err: String) -> Outcome {
    Tally {
        failures: vec![format!("study failed: {err}")],
        notes: Vec::new(),
    }
    .finish(id, name, required)
}

fn example1_cubic() -> Outcome {
    let name = "reference errors, example 1, k=3 r=1";
    let start = Instant::now();
    let table = match study(&example1(), 3, 1, 1..=4) {
        Ok(t) => t,
        Err(e) => return failed_study(1, name, true, e),
    };
    let elapsed = start.elapsed();
    let energy = [0.260, 0.657e-1, 0.165e-1];
    let energy_order = [1.9, 2.0, 2.0];
    let l2 = [0.207e-2, 0.129e-3, 0.133e-4];
    let mut t = Tally::default();
    for (i, level) in (2..=4).enumerate() {
        let (e, eo, l, _) = row_values(&table, level);
        t.relative(&format!("L{level} energy"), e, energy[i], 0.05);
        t.band(&format!("L{level} energy order"), eo, energy_order[i], 0.1);
        t.relative(&format!("L{level} l2"), l, l2[i], 0.15);
    }
    if elapsed > Duration::from_secs(60) {
        t.failures.push(format!("runtime {:.1}s > 60s", elapsed.as_secs_f64()));
    } else {
        t.notes.push(format!("runtime {:.1}s", elapsed.as_secs_f64()));
    }
    t.finish(1, name, true)
}

fn example1_quartic() -> Outcome {
    let name = "reference errors, example 1, k=4 r=2";
    let table = match study(&example1(), 4, 2, 1..=4) {
        Ok(t) => t,
        Err(e) => return failed_study(2, name, true, e),
    };
    let energy = [0.309e-1, 0.391e-2, 0.540e-3];
    let energy_order = [2.9, 3.0, 2.9];
    let mut t = Tally::default();
    for (i, level) in (2..=4).enumerate() {
        let (e, eo, _, _) = row_values(&table, level);
        t.relative(&format!("L{level} energy"), e, energy[i], 0.05);
        t.band(&format!("L{level} energy order"), eo, energy_order[i], 0.1);
    }
    t.finish(2, name, true)
}

fn example2_small_alpha() -> Outcome {
    let name = "reference errors, example 2 at alpha=1e-8";
    let table = match study(&with_alpha(example2(), 1e-8), 3, 1, 2..=5) {
        Ok(t) => t,
        Err(e) => return failed_study(3, name, true, e),
    };
    let energy = [0.214e-1, 0.534e-2, 0.134e-2];
    let mut t = Tally::default();
    for (i, level) in (3..=5).enumerate() {
        let (e, eo, _, _) = row_values(&table, level);
        t.relative(&format!("L{level} energy"), e, energy[i], 0.10);
        t.band(&format!("L{level} energy order"), eo, 2.0, 0.2);
    }
    t.finish(3, name, true)
}

fn example3_large_alpha() -> Outcome {
    let name = "reference orders, example 3 at alpha=1e9";
    let table = match study(&with_alpha(example3(), 1e9), 3, 1, 2..=5) {
        Ok(t) => t,
        Err(e) => return failed_study(4, name, true, e),
    };
    let mut t = Tally::default();
    for level in 3..=5 {
        let (_, eo, _, lo) = row_values(&table, level);
        t.band(&format!("L{level} energy order"), eo, 2.0, 0.1);
        t.band(&format!("L{level} l2 order"), lo, 4.0, 0.3);
    }
    t.finish(4, name, true)
}

fn rates() -> Outcome {
    let name = "convergence rates at the finest affordable levels";
    let mut t = Tally::default();
    for (k, r, fine) in [(2usize, 1usize, 6u32), (3, 1, 5), (4, 2, 4)] {
        let table = match study(&example1(), k, r, fine - 1..=fine) {
            Ok(t) => t,
            Err(e) => return failed_study(5, name, true, e),
        };
        let (_, eo, _, lo) = row_values(&table, fine);
        t.at_least(&format!("k={k} r={r} L{} energy order", fine), eo, k as f64 - 1.0 - 0.2);
        t.at_least(&format!("k={k} r={r} L{} l2 order", fine), lo, k as f64 + 1.0 - 0.5);
    }
    t.finish(5, name, true)
}

fn from_checks(id: u32, name: &'static str, results: Vec<checks::CheckResult>) -> Outcome {
    let mut t = Tally::default();
    for r in results {
        let line = format!("{}: {:.2e} (<= {:.0e}; {})", r.name, r.worst, r.threshold, r.detail);
        if r.passed {
            t.notes.push(line);
        } else {
            t.failures.push(line);
        }
    }
    t.finish(id, name, true)
}

fn commutative() -> Outcome {
    from_checks(
        6,
        "commutative property",
        [(2, 1), (3, 1), (4, 2)]
            .into_iter()
            .map(|(k, r)| checks::commutative_property(space(k, r), 100, 2024 + k as u64))
            .collect(),
    )
}

fn well_posedness() -> Outcome {
    let config = space(3, 1);
    from_checks(
        7,
        "well-posedness",
        vec![checks::global_symmetry(config), checks::homogeneous_uniqueness(config)],
    )
}

fn kernel() -> Outcome {
    from_checks(
        8,
        "stabilizer kernel",
        [(2, 1), (3, 1), (4, 2)]
            .into_iter()
            .map(|(k, r)| checks::stabilizer_kernel(space(k, r), 50, 7 + k as u64))
            .collect(),
    )
}

fn example1_quintic() -> Outcome {
    let name = "high-order check, example 1, k=5 r=3";
    let table = match study(&example1(), 5, 3, 1..=3) {
        Ok(t) => t,
        Err(e) => return failed_study(9, name, false, e),
    };
    let (_, _, _, lo) = row_values(&table, 3);
    let mut t = Tally::default();
    t.at_least("L3 l2 order", lo, 5.5);
    if !t.failures.is_empty() {
        for row in &table.rows {
            t.failures
                .push(format!("L{} residual_rel {:.2e}", row.report.level, row.report.residual_rel));
        }
    }
    t.finish(9, name, false)
}

fn main() -> ExitCode {
    let suite: [fn() -> Outcome; 9] = [
        example1_cubic,
        example1_quartic,
        example2_small_alpha,
        example3_large_alpha,
        rates,
        commutative,
        well_posedness,
        kernel,
        example1_quintic,
    ];
    let mut required_failed = 0;
    for criterion in suite {
        let o = criterion();
        let status = if o.passed() { "PASS" } else { "FAIL" };
        let kind = if o.required { "" } else { " [report only]" };
        if o.passed() {
            println!("{status} {}: {}{kind} | {}", o.id, o.name, o.detail);
        } else {
            println!("{status} {}: {}{kind} | {}", o.id, o.name, o.failures.join("; "));
            if o.required {
                required_failed += 1;
            }
        }
    }
    if required_failed > 0 {
        println!("{required_failed} required criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
