//! Solving without a reference solution and sampling `u₀` as csv.

use wg_control::assembly::assemble;
use wg_control::cli::samples_csv;
use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::sample_field;
use wg_control::problems::example2;
use wg_control::solver::solve;
use wg_control::Discretization;

fn main() -> wg_control::Result<()> {
    let problem = example2().with_alpha(1e-2)?.without_reference();
    let disc = Discretization::new(2, SpaceConfig::new(3, 1)?, &problem)?;
    let system = assemble(&disc.mesh, &disc.space, &disc.local, &problem)?;
    let solution = solve(&system)?;
    let samples = sample_field(&disc, &solution, 2)?;
    eprintln!("{} samples", samples.len());
    print!("{}", samples_csv(&samples));
    Ok(())
}
