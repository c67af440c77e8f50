//! Uniform grids of the unit square and their boundary tags.

use wg_control::mesh::{build_uniform_grid, classify_boundary, on_left_side};

fn main() -> wg_control::Result<()> {
    println!("level  cells/side  triangles  edges  h");
    for level in 0..=4 {
        let mesh = build_uniform_grid(level)?;
        println!(
            "{level:>5}  {:>10}  {:>9}  {:>5}  {:.4}",
            1usize << level,
            mesh.num_triangles(),
            mesh.num_edges(),
            mesh.mesh_size()
        );
    }

    // Control and observation both live on x = 0.
    let mesh = classify_boundary(build_uniform_grid(2)?, &on_left_side, &on_left_side);
    let (mut control, mut neumann) = (0, 0);
    for (_, edge) in mesh.boundary_edges() {
        control += edge.tags.control as usize;
        neumann += edge.tags.neumann as usize;
    }
    println!("level 2: {control} control edges, {neumann} homogeneous Neumann edges");
    Ok(())
}
