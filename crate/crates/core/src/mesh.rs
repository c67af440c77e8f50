//! Uniform triangulations of the unit square with edge topology and
//! boundary classification.
//!
//! Level `ℓ` splits the square into `(2^ℓ)²` cells and each cell along its
//! northwest–southeast diagonal, so level 0 is the single cell. Vertex `(i, j)` of the lattice has index
//! `j·(n+1) + i`.

use std::collections::HashMap;

use nalgebra::{Point2, Vector2};

use crate::{Error, Result};

pub type Point = Point2<f64>;

/// Coordinate tolerance for boundary tests.
pub const GEOMETRY_TOL: f64 = 1e-12;

/// Finest level the desk-scale builder accepts.
pub const MAX_LEVEL: u32 = 7;

/// One (triangle, local edge slot, sign) record of an edge.
///
/// `sign` is `+1` when the edge's global normal is the triangle's outward
/// normal and `-1` when it points inward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub triangle: usize,
    pub slot: usize,
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoundaryTags {
    pub control: bool,
    pub observe: bool,
    pub neumann: bool,
}

impl BoundaryTags {
    pub fn is_empty(&self) -> bool {
        !(self.control || self.observe || self.neumann)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Vertex indices, lower index first. The edge parameter runs from
    /// `endpoints[0]` (t = −1) to `endpoints[1]` (t = +1).
    pub endpoints: [usize; 2],
    pub global_normal: Vector2<f64>,
    pub length: f64,
    pub midpoint: Point,
    pub incident: Vec<Incidence>,
    pub tags: BoundaryTags,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.incident.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub centroid: Point,
    /// Diameter, i.e. the longest edge.
    pub h: f64,
    /// `√(2|T|)`, the leg of a right isosceles triangle of the same area.
    /// This is the length scale of the stabilizer weights; on the uniform
    /// grids it equals the cell width.
    pub scale: f64,
    pub area: f64,
    /// Outward unit normal of local edge `i`, which joins local vertices
    /// `i` and `i + 1 (mod 3)`.
    pub outward_normals: [Vector2<f64>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub level: u32,
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Global edge index of each local edge slot.
    pub element_edges: Vec<[usize; 3]>,
    pub geometry: Vec<ElementGeometry>,
}

impl Mesh {
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).perp(&(c - a))
    }

    /// Sign of the edge in `slot` of triangle `t` relative to the edge's
    /// global normal.
    pub fn edge_sign(&self, t: usize, slot: usize) -> f64 {
        let e = &self.edges[self.element_edges[t][slot]];
        e.incident
            .iter()
            .find(|inc| inc.triangle == t && inc.slot == slot)
            .map(|inc| inc.sign)
            .expect("edge incidence is consistent with element_edges")
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.geometry.iter().map(|g| g.h).fold(0.0, f64::max)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary())
    }
}

/// Builds the level-`level` grid of the unit square.
///
/// Boundary edges come back tagged Neumann only; call [`classify_boundary`]
/// to place the control and observation parts.
pub fn build_uniform_grid(level: u32) -> Result<Mesh> {
    if level > MAX_LEVEL {
        return Err(Error::Range(format!(
            "grid level {level} outside 0..={MAX_LEVEL}"
        )));
    }
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 * h, j as f64 * h));
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let sw = idx(i, j);
            let se = idx(i + 1, j);
            let nw = idx(i, j + 1);
            let ne = idx(i + 1, j + 1);
            // diagonal nw–se
            triangles.push([sw, se, nw]);
            triangles.push([se, ne, nw]);
        }
    }

    Ok(build_topology(level, vertices, triangles))
}

fn build_topology(level: u32, vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Mesh {
    let mut lookup: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut element_edges = Vec::with_capacity(triangles.len());
    let mut geometry = Vec::with_capacity(triangles.len());

    for (t, tri) in triangles.iter().enumerate() {
        let p = tri.map(|v| vertices[v]);
        let mut slots = [0usize; 3];
        let mut normals = [Vector2::zeros(); 3];
        let mut h: f64 = 0.0;
        for s in 0..3 {
            let (a, b) = (tri[s], tri[(s + 1) % 3]);
            let d = p[(s + 1) % 3] - p[s];
            let len = d.norm();
            h = h.max(len);
            // clockwise rotation of a counterclockwise edge points outward
            normals[s] = Vector2::new(d.y, -d.x) / len;

            let key = [a.min(b), a.max(b)];
            let e = *lookup.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[key[0]], vertices[key[1]]);
                let tangent = (pb - pa) / (pb - pa).norm();
                edges.push(Edge {
                    endpoints: key,
                    global_normal: Vector2::new(-tangent.y, tangent.x),
                    length: (pb - pa).norm(),
                    midpoint: Point::from((pa.coords + pb.coords) * 0.5),
                    incident: Vec::with_capacity(2),
                    tags: BoundaryTags::default(),
                });
                edges.len() - 1
            });
            slots[s] = e;
            edges[e].incident.push(Incidence {
                triangle: t,
                slot: s,
                sign: 0.0,
            });
        }
        let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
        geometry.push(ElementGeometry {
            centroid: Point::from((p[0].coords + p[1].coords + p[2].coords) / 3.0),
            h,
            scale: (2.0 * area).sqrt(),
            area,
            outward_normals: normals,
        });
        element_edges.push(slots);
    }

    for edge in &mut edges {
        if edge.incident.len() == 1 {
            // boundary edges carry the outward normal of the domain
            let inc = edge.incident[0];
            edge.global_normal = geometry[inc.triangle].outward_normals[inc.slot];
            edge.tags.neumann = true;
        }
        let normal = edge.global_normal;
        for inc in &mut edge.incident {
            let outward = geometry[inc.triangle].outward_normals[inc.slot];
            inc.sign = if outward.dot(&normal) > 0.0 { 1.0 } else { -1.0 };
        }
    }

    Mesh {
        level,
        vertices,
        triangles,
        edges,
        element_edges,
        geometry,
    }
}

/// Tags boundary edges from predicates on the edge midpoint.
///
/// `control` decides between `Γ_C` (true) and `Γ_N` (false); `observe`
/// marks `Γ_O` independently. Interior edges are left untouched.
pub fn classify_boundary<C, O>(mut mesh: Mesh, control: &C, observe: &O) -> Mesh
where
    C: Fn(&Point) -> bool + ?Sized,
    O: Fn(&Point) -> bool + ?Sized,
{
    for edge in mesh.edges.iter_mut().filter(|e| e.incident.len() == 1) {
        let on_c = control(&edge.midpoint);
        edge.tags = BoundaryTags {
            control: on_c,
            neumann: !on_c,
            observe: observe(&edge.midpoint),
        };
    }
    mesh
}

/// The left side `{0} × (0, 1)` of the unit square.
pub fn on_left_side(p: &Point) -> bool {
    p.x.abs() < GEOMETRY_TOL
}
