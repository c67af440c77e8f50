//! Weak Galerkin (WG) finite elements for an elliptic boundary-control problem.
//!
//! The state equation is `-Δu + u = f` on the unit square with a homogeneous
//! Neumann part `Γ_N` and a control part `Γ_C` of the boundary. The cost
//! `½‖u − c₀‖²_{Γ_O} + ½α‖∂ₙu‖²_{Γ_C}` is minimized by solving a symmetric
//! saddle-point system for the WG state `u_h = {u₀, u_b, u_n n}` and a
//! piecewise polynomial Lagrange multiplier `λ_h`.
//!
//! The pipeline is
//!
//! 1. [`mesh::build_uniform_grid`] and [`mesh::classify_boundary`],
//! 2. [`fe_space::make_space`] for bases, quadrature and the DOF map,
//! 3. [`wg_ops`] for the element-local weak Laplacian, stabilizer and coupling,
//! 4. [`assembly::assemble`] and [`solver::solve`],
//! 5. [`postprocess`] for error norms, convergence tables and field samples.
//!
//! [`Discretization`] bundles steps 1–3 for a given [`problems::ProblemSpec`].

pub mod assembly;
pub mod checks;
pub mod cli;
mod error;
pub mod fe_space;
pub mod mesh;
pub mod postprocess;
pub mod problems;
pub mod solver;
pub mod wg_ops;

pub use error::{Error, Result};

use fe_space::{make_space, SpaceConfig, WeakSpace};
use mesh::Mesh;
use problems::ProblemSpec;
use wg_ops::LocalOps;

/// A classified mesh, its weak space and the element-local operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub space: WeakSpace,
    pub local: Vec<LocalOps>,
}

impl Discretization {
    /// Builds the level-`level` grid, tags its boundary with the problem's
    /// predicates and computes every element's local operators.
    pub fn new(level: u32, config: SpaceConfig, problem: &ProblemSpec) -> Result<Self> {
        let mesh = mesh::build_uniform_grid(level)?;
        let mesh = mesh::classify_boundary(mesh, &*problem.control, &*problem.observe);
        Self::from_mesh(mesh, config)
    }

    pub fn from_mesh(mesh: Mesh, config: SpaceConfig) -> Result<Self> {
        let space = make_space(&mesh, config)?;
        let local = wg_ops::all_local_ops(&mesh, &space);
        Ok(Self { mesh, space, local })
    }
}
