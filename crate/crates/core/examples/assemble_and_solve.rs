//! Assembling the saddle-point system and solving it once.

use wg_control::assembly::assemble;
use wg_control::fe_space::SpaceConfig;
use wg_control::postprocess::{energy_error, l2_error};
use wg_control::problems::example1;
use wg_control::solver::solve;
use wg_control::Discretization;

fn main() -> wg_control::Result<()> {
    let problem = example1();
    let disc = Discretization::new(3, SpaceConfig::new(3, 1)?, &problem)?;
    let system = assemble(&disc.mesh, &disc.space, &disc.local, &problem)?;
    println!(
        "unknowns: {} ({} state, {} multiplier), nonzeros: {}",
        system.order(),
        system.n_state,
        system.order() - system.n_state,
        system.matrix.nnz()
    );
    println!("max |M - M^T| = {:e}", system.matrix.asymmetry());

    let solution = solve(&system)?;
    println!("relative residual: {:.2e}", solution.residual_rel);
    println!("energy error: {:.4e}", energy_error(&disc, &problem, &solution)?);
    println!("L2 error:     {:.4e}", l2_error(&disc, &problem, &solution)?);
    Ok(())
}
