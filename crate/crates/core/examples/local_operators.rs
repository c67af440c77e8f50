//! Element-local weak Laplacian: `Δ_w(Q_h θ)` against `𝒬_h(Δθ)` for a
//! quadratic `θ` on one triangle.

use nalgebra::Vector2;
use wg_control::fe_space::SpaceConfig;
use wg_control::mesh::Point;
use wg_control::problems::example1;
use wg_control::wg_ops::{project_exact, project_multiplier};
use wg_control::Discretization;

fn main() -> wg_control::Result<()> {
    let config = SpaceConfig::new(3, 1)?;
    let disc = Discretization::new(2, config, &example1())?;
    let t = 5;

    // θ = x² + 3xy − y, Δθ = 2
    let theta = |p: &Point| p.x * p.x + 3.0 * p.x * p.y - p.y;
    let grad = |p: &Point| Vector2::new(2.0 * p.x + 3.0 * p.y, 3.0 * p.x - 1.0);
    let v = project_exact(&disc.mesh, &disc.space, t, theta, grad);
    let weak = &disc.local[t].weak_laplacian * &v;
    let exact = project_multiplier(&disc.mesh, &disc.space, t, |_| 2.0);

    println!("weak Laplacian coefficients: {:.12?}", weak.as_slice());
    println!("projected Δθ coefficients:   {:.12?}", exact.as_slice());
    println!("max difference: {:.2e}", (&weak - &exact).amax());

    let ops = &disc.local[t];
    println!(
        "local sizes: stabilizer {}x{}, coupling {}x{}",
        ops.stabilizer.nrows(),
        ops.stabilizer.ncols(),
        ops.coupling.nrows(),
        ops.coupling.ncols()
    );
    Ok(())
}
