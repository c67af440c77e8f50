//! Bases, quadrature and the global degree-of-freedom map of `V_h⁰ × W_h`.

pub mod basis;
pub mod quadrature;

use std::ops::Range;

pub use basis::{dim_poly, BasisEval, EdgeBasis, ElementBasis};
pub use quadrature::{line_rule, triangle_rule, LineRule, QuadRule};

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Polynomial degrees: `k` for the state, `r` for the multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceConfig {
    pub k: usize,
    pub r: usize,
}

impl SpaceConfig {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        let config = Self { k, r };
        config.validate()?;
        Ok(config)
    }

    /// `r = k − 2`, except `r = 1` for `k = 2`.
    pub fn with_default_r(k: usize) -> Result<Self> {
        Self::new(k, Self::default_r(k))
    }

    pub fn default_r(k: usize) -> usize {
        if k <= 2 {
            1
        } else {
            k - 2
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { k, r } = *self;
        if k < 2 {
            return Err(Error::Config(format!("state degree k = {k} must be at least 2")));
        }
        if r < 1 || !(r + 2 == k || r + 1 == k) {
            return Err(Error::Config(format!(
                "multiplier degree r = {r} must be k-2 or k-1 and at least 1 (k = {k})"
            )));
        }
        Ok(())
    }
}

/// Counts and offsets of the unknowns, ordered as all interior `u₀`, all
/// `u_b` by edge, all `u_n` by edge (none on `Γ_N`), then all `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub interior_per_element: usize,
    pub trace_per_edge: usize,
    pub flux_per_edge: usize,
    pub multiplier_per_element: usize,
    pub trace_offset: usize,
    pub flux_offset: usize,
    pub multiplier_offset: usize,
    /// First `u_n` DOF of each edge, `None` on `Γ_N` edges.
    pub flux_start: Vec<Option<usize>>,
    /// Number of state unknowns (`u₀`, `u_b`, `u_n`).
    pub n_state: usize,
    pub n_total: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, config: SpaceConfig) -> Self {
        let interior_per_element = dim_poly(config.k);
        let trace_per_edge = config.k + 1;
        let flux_per_edge = config.k;
        let multiplier_per_element = dim_poly(config.r);
        let (nt, ne) = (mesh.num_triangles(), mesh.num_edges());

        let trace_offset = nt * interior_per_element;
        let flux_offset = trace_offset + ne * trace_per_edge;
        let mut next = flux_offset;
        let flux_start = mesh
            .edges
            .iter()
            .map(|e| {
                if e.tags.neumann {
                    None
                } else {
                    let start = next;
                    next += flux_per_edge;
                    Some(start)
                }
            })
            .collect();
        let multiplier_offset = next;
        Self {
            interior_per_element,
            trace_per_edge,
            flux_per_edge,
            multiplier_per_element,
            trace_offset,
            flux_offset,
            multiplier_offset,
            flux_start,
            n_state: multiplier_offset,
            n_total: multiplier_offset + nt * multiplier_per_element,
        }
    }

    pub fn interior(&self, t: usize) -> Range<usize> {
        let s = t * self.interior_per_element;
        s..s + self.interior_per_element
    }

    pub fn trace(&self, e: usize) -> Range<usize> {
        let s = self.trace_offset + e * self.trace_per_edge;
        s..s + self.trace_per_edge
    }

    pub fn flux(&self, e: usize) -> Option<Range<usize>> {
        self.flux_start[e].map(|s| s..s + self.flux_per_edge)
    }

    pub fn multiplier(&self, t: usize) -> Range<usize> {
        let s = self.multiplier_offset + t * self.multiplier_per_element;
        s..s + self.multiplier_per_element
    }

    pub fn suppressed_flux_dofs(&self) -> usize {
        self.flux_start.iter().filter(|s| s.is_none()).count() * self.flux_per_edge
    }

    /// Global index and sign of each local weak coefficient of triangle `t`.
    ///
    /// The local layout is `u₀`, then `u_b` per local edge slot, then `u_n`
    /// per local edge slot; eliminated `Γ_N` fluxes map to `None`.
    pub fn local_to_global(&self, mesh: &Mesh, t: usize) -> Vec<(Option<usize>, f64)> {
        let mut out = Vec::with_capacity(
            self.interior_per_element + 3 * (self.trace_per_edge + self.flux_per_edge),
        );
        out.extend(self.interior(t).map(|i| (Some(i), 1.0)));
        for &e in &mesh.element_edges[t] {
            out.extend(self.trace(e).map(|i| (Some(i), 1.0)));
        }
        for (slot, &e) in mesh.element_edges[t].iter().enumerate() {
            let sign = mesh.edge_sign(t, slot);
            match self.flux(e) {
                Some(range) => out.extend(range.map(|i| (Some(i), sign))),
                None => out.extend((0..self.flux_per_edge).map(|_| (None, sign))),
            }
        }
        out
    }
}

/// Everything [`make_space`] produces for one mesh.
#[derive(Debug, Clone)]
pub struct WeakSpace {
    pub config: SpaceConfig,
    pub state_bases: Vec<ElementBasis>,
    pub multiplier_bases: Vec<ElementBasis>,
    pub trace_basis: EdgeBasis,
    pub flux_basis: EdgeBasis,
    /// Exact for the polynomial integrands of the local operators.
    pub triangle_exact: QuadRule,
    /// High-order rule for integrals involving data or reference solutions.
    pub triangle_data: QuadRule,
    pub line_exact: LineRule,
    pub line_data: LineRule,
    pub dofs: DofMap,
}

impl WeakSpace {
    /// Number of coefficients of one element's weak function.
    pub fn local_size(&self) -> usize {
        local_size(self.config.k)
    }
}

/// `dim P_k + 3(k+1) + 3k`.
pub fn local_size(k: usize) -> usize {
    dim_poly(k) + 3 * (k + 1) + 3 * k
}

pub fn make_space(mesh: &Mesh, config: SpaceConfig) -> Result<WeakSpace> {
    config.validate()?;
    let SpaceConfig { k, r } = config;
    let state_bases = mesh
        .geometry
        .iter()
        .map(|g| ElementBasis::new(k, g.centroid, g.h))
        .collect();
    let multiplier_bases = mesh
        .geometry
        .iter()
        .map(|g| ElementBasis::new(r, g.centroid, g.h))
        .collect();
    Ok(WeakSpace {
        config,
        state_bases,
        multiplier_bases,
        trace_basis: EdgeBasis { degree: k },
        flux_basis: EdgeBasis { degree: k - 1 },
        triangle_exact: triangle_rule(2 * k + 2),
        triangle_data: triangle_rule(2 * k + 8),
        line_exact: line_rule(2 * k + 2),
        line_data: line_rule(2 * k + 8),
        dofs: DofMap::new(mesh, config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_grid, classify_boundary, on_left_side};

    fn unit_square_mesh(level: u32) -> Mesh {
        classify_boundary(build_uniform_grid(level).unwrap(), &on_left_side, &on_left_side)
    }

    #[test]
    fn config_rules() {
        assert!(SpaceConfig::new(2, 1).is_ok());
        assert!(SpaceConfig::new(2, 0).is_err());
        assert!(SpaceConfig::new(1, 1).is_err());
        assert!(SpaceConfig::new(3, 1).is_ok());
        assert!(SpaceConfig::new(3, 2).is_ok());
        assert!(SpaceConfig::new(3, 3).is_err());
        assert!(SpaceConfig::new(5, 2).is_err());
        assert_eq!(SpaceConfig::with_default_r(2).unwrap().r, 1);
        assert_eq!(SpaceConfig::with_default_r(5).unwrap().r, 3);
        assert!(matches!(make_space(&unit_square_mesh(1), SpaceConfig { k: 4, r: 4 }), Err(Error::Config(_))));
    }

    #[test]
    fn level_zero_dof_count() {
        // 1 control edge, 3 Neumann edges, 1 interior edge
        let space = make_space(&unit_square_mesh(0), SpaceConfig::new(3, 1).unwrap()).unwrap();
        assert_eq!(space.dofs.n_total, 2 * 10 + 5 * 4 + 2 * 3 + 2 * 3);
    }

    #[test]
    fn per_category_sizes() {
        let m = unit_square_mesh(2);
        let d = DofMap::new(&m, SpaceConfig::new(2, 1).unwrap());
        assert_eq!((d.interior_per_element, d.trace_per_edge, d.flux_per_edge), (6, 3, 2));
        let d = DofMap::new(&m, SpaceConfig::new(4, 2).unwrap());
        assert_eq!(d.multiplier_per_element, 6);
    }

    #[test]
    fn count_identity_and_neumann_elimination() {
        for level in 1..=5 {
            let m = unit_square_mesh(level);
            let n_neumann = m.edges.iter().filter(|e| e.tags.neumann).count();
            for (k, r) in [(2, 1), (3, 1), (4, 2), (5, 3)] {
                let d = DofMap::new(&m, SpaceConfig { k, r });
                let (t, e) = (m.num_triangles(), m.num_edges());
                assert_eq!(
                    d.n_total,
                    t * dim_poly(k) + e * (k + 1) + (e - n_neumann) * k + t * dim_poly(r)
                );
                assert_eq!(d.suppressed_flux_dofs(), k * n_neumann);
                for (i, edge) in m.edges.iter().enumerate() {
                    assert_eq!(d.flux(i).is_none(), edge.tags.neumann);
                }
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        let m = unit_square_mesh(3);
        let c = SpaceConfig::new(3, 1).unwrap();
        assert_eq!(DofMap::new(&m, c), DofMap::new(&m, c));
    }

    #[test]
    fn local_map_signs() {
        let m = unit_square_mesh(2);
        let d = DofMap::new(&m, SpaceConfig::new(3, 1).unwrap());
        for t in 0..m.num_triangles() {
            let map = d.local_to_global(&m, t);
            assert_eq!(map.len(), local_size(3));
            let flux_part = &map[dim_poly(3) + 12..];
            for (slot, chunk) in flux_part.chunks(3).enumerate() {
                let sign = m.edge_sign(t, slot);
                assert!(chunk.iter().all(|&(_, s)| s == sign));
            }
        }
    }
}
