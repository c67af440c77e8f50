//! Extreme regularization: example 2 as α → 0 and example 3 as α → ∞,
//! measured against their limit solutions.

use wg_control::cli::table_text;
use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::convergence_study;
use wg_control::problems::{example2, example3};

fn main() -> wg_control::Result<()> {
    let config = SpaceConfig::new(3, 1)?;
    for (problem, alpha) in [(example2(), 1e-8), (example3(), 1e9)] {
        let problem = problem.with_alpha(alpha)?;
        let table = convergence_study(&problem, config, &[2, 3, 4])?;
        print!("{}", table_text(&table, &format!("{}, alpha = {alpha:e}", problem.name)));
    }
    Ok(())
}
