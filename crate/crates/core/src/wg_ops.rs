//! Element-local WG operators.
//!
//! A weak function on triangle `T` is stored as `dim P_k` interior
//! coefficients, then `k + 1` Legendre trace coefficients per local edge
//! slot, then `k` Legendre flux coefficients per slot. Flux coefficients are
//! taken in the element's outward-normal convention; the DOF map applies the
//! edge sign when scattering.

use nalgebra::{DMatrix, DVector, Vector2};
use rayon::prelude::*;

use crate::fe_space::WeakSpace;
use crate::mesh::{Mesh, Point};

/// Local matrices of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOps {
    /// `P_r` coefficients of `Δ_w v` per local weak coefficient.
    pub weak_laplacian: DMatrix<f64>,
    /// Stabilizer `s_T`, square of the local size.
    pub stabilizer: DMatrix<f64>,
    /// `b_T(v, λ)`, rows indexed by the `P_r` basis.
    pub coupling: DMatrix<f64>,
    pub mass_k: DMatrix<f64>,
    pub mass_r: DMatrix<f64>,
    /// `(φ^k_i, φ^r_j)_T`.
    pub mass_kr: DMatrix<f64>,
}

/// Geometry of one local edge slot seen from its element.
#[derive(Debug, Clone, Copy)]
pub struct EdgeSlot {
    pub edge: usize,
    /// Parameter endpoints: `t = −1` at `start`, `t = +1` at `end`.
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub outward: Vector2<f64>,
    pub sign: f64,
}

impl EdgeSlot {
    pub fn point(&self, t: f64) -> Point {
        self.start + (self.end - self.start) * (0.5 * (t + 1.0))
    }
}

pub fn edge_slots(mesh: &Mesh, t: usize) -> [EdgeSlot; 3] {
    std::array::from_fn(|slot| {
        let e = mesh.element_edges[t][slot];
        let edge = &mesh.edges[e];
        EdgeSlot {
            edge: e,
            start: mesh.vertices[edge.endpoints[0]],
            end: mesh.vertices[edge.endpoints[1]],
            length: edge.length,
            outward: mesh.geometry[t].outward_normals[slot],
            sign: mesh.edge_sign(t, slot),
        }
    })
}

/// Physical points and weights of a reference-triangle rule mapped onto `t`.
pub fn triangle_points(mesh: &Mesh, t: usize, rule: &crate::fe_space::QuadRule) -> Vec<(Point, f64)> {
    let [a, b, c] = mesh.corners(t);
    let jac = 2.0 * mesh.geometry[t].area;
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, &w)| (a + (b - a) * p[0] + (c - a) * p[1], w * jac))
        .collect()
}

struct Layout {
    nk: usize,
    trace: usize,
    flux: usize,
}

impl Layout {
    fn new(space: &WeakSpace) -> Self {
        Self {
            nk: space.state_bases[0].dim(),
            trace: space.trace_basis.dim(),
            flux: space.flux_basis.dim(),
        }
    }

    fn trace_col(&self, slot: usize, j: usize) -> usize {
        self.nk + slot * self.trace + j
    }

    fn flux_col(&self, slot: usize, j: usize) -> usize {
        self.nk + 3 * self.trace + slot * self.flux + j
    }
}

fn gram(rows: &[Vec<f64>], cols: &[Vec<f64>], weights: &[f64]) -> DMatrix<f64> {
    let (m, n) = (rows[0].len(), cols[0].len());
    let mut out = DMatrix::zeros(m, n);
    for ((r, c), &w) in rows.iter().zip(cols).zip(weights) {
        for i in 0..m {
            let wi = w * r[i];
            for j in 0..n {
                out[(i, j)] += wi * c[j];
            }
        }
    }
    out
}

/// Mass matrices `(M_k, M_r, M_kr)` of triangle `t`.
pub fn mass_matrices(mesh: &Mesh, space: &WeakSpace, t: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let pts = triangle_points(mesh, t, &space.triangle_exact);
    let vk: Vec<_> = pts.iter().map(|(p, _)| space.state_bases[t].values(p)).collect();
    let vr: Vec<_> = pts.iter().map(|(p, _)| space.multiplier_bases[t].values(p)).collect();
    let w: Vec<f64> = pts.iter().map(|&(_, w)| w).collect();
    let mk = symmetrized(gram(&vk, &vk, &w));
    let mr = symmetrized(gram(&vr, &vr, &w));
    (mk, mr, gram(&vk, &vr, &w))
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Right-hand side pairing `G` of the weak Laplacian: `G[i, c]` is
/// `(v₀, Δφ_i)_T − ⟨v_b, ∇φ_i·n⟩_∂T + ⟨v_n, φ_i⟩_∂T` for local basis function `c`.
fn weak_laplacian_pairing(mesh: &Mesh, space: &WeakSpace, t: usize) -> DMatrix<f64> {
    let layout = Layout::new(space);
    let basis_k = &space.state_bases[t];
    let basis_r = &space.multiplier_bases[t];
    let nr = basis_r.dim();
    let mut g = DMatrix::zeros(nr, space.local_size());

    for (p, w) in triangle_points(mesh, t, &space.triangle_exact) {
        let vk = basis_k.values(&p);
        let lap_r = basis_r.laplacians(&p);
        for i in 0..nr {
            if lap_r[i] == 0.0 {
                continue;
            }
            for (c, v) in vk.iter().enumerate() {
                g[(i, c)] += w * v * lap_r[i];
            }
        }
    }

    let rule = &space.line_exact;
    for (slot, es) in edge_slots(mesh, t).iter().enumerate() {
        for (&tq, &wq) in rule.points.iter().zip(&rule.weights) {
            let p = es.point(tq);
            let w = wq * 0.5 * es.length;
            let phi = basis_r.values(&p);
            let dphi_n: Vec<f64> = basis_r.gradients(&p).iter().map(|g| g.dot(&es.outward)).collect();
            let tb = space.trace_basis.values(tq);
            let fb = space.flux_basis.values(tq);
            for i in 0..nr {
                for (j, b) in tb.iter().enumerate() {
                    g[(i, layout.trace_col(slot, j))] -= w * b * dphi_n[i];
                }
                for (j, b) in fb.iter().enumerate() {
                    g[(i, layout.flux_col(slot, j))] += w * b * phi[i];
                }
            }
        }
    }
    g
}

fn solve_mass(mass: &DMatrix<f64>, rhs: DMatrix<f64>) -> DMatrix<f64> {
    let chol = mass
        .clone()
        .cholesky()
        .expect("element mass matrix of a valid basis is SPD");
    chol.solve(&rhs)
}

/// Matrix mapping local weak coefficients to the `P_r` coefficients of the
/// discrete weak Laplacian.
pub fn discrete_weak_laplacian(mesh: &Mesh, space: &WeakSpace, t: usize) -> DMatrix<f64> {
    let (_, mr, _) = mass_matrices(mesh, space, t);
    solve_mass(&mr, weak_laplacian_pairing(mesh, space, t))
}

/// Stabilizer `s_T(u, v)`:
/// `h⁻³⟨u₀ − u_b, v₀ − v_b⟩_∂T + h⁻¹⟨∇u₀·n − u_n, ∇v₀·n − v_n⟩_∂T + (u₀ − 𝒬u₀, v₀ − 𝒬v₀)_T`.
pub fn stabilizer(mesh: &Mesh, space: &WeakSpace, t: usize) -> DMatrix<f64> {
    let (_, mr, mkr) = mass_matrices(mesh, space, t);
    stabilizer_with_mass(mesh, space, t, &mr, &mkr)
}

fn stabilizer_with_mass(mesh: &Mesh, space: &WeakSpace, t: usize, mr: &DMatrix<f64>, mkr: &DMatrix<f64>) -> DMatrix<f64> {
    let root = stabilizer_root_with_mass(mesh, space, t, mr, mkr);
    symmetrized(root.tr_mul(&root))
}

/// Matrix `B` with `s_T(v, v) = ‖B v‖²`: one row per quadrature point of
/// each mismatch term, scaled by the square root of its weight.
///
/// Evaluating `‖B v‖²` avoids the cancellation of `vᵀ S v` when `s_T(v, v)`
/// is near zero.
pub fn stabilizer_root(mesh: &Mesh, space: &WeakSpace, t: usize) -> DMatrix<f64> {
    let (_, mr, mkr) = mass_matrices(mesh, space, t);
    stabilizer_root_with_mass(mesh, space, t, &mr, &mkr)
}

fn stabilizer_root_with_mass(
    mesh: &Mesh,
    space: &WeakSpace,
    t: usize,
    mr: &DMatrix<f64>,
    mkr: &DMatrix<f64>,
) -> DMatrix<f64> {
    let layout = Layout::new(space);
    let n = space.local_size();
    let basis_k = &space.state_bases[t];
    let h = mesh.geometry[t].scale;
    let (w_value, w_flux) = (h.powi(-3), 1.0 / h);
    let line = &space.line_exact;
    let tri = triangle_points(mesh, t, &space.triangle_exact);
    let mut b = DMatrix::zeros(6 * line.points.len() + tri.len(), n);
    let mut row = 0;

    for (slot, es) in edge_slots(mesh, t).iter().enumerate() {
        for (&tq, &wq) in line.points.iter().zip(&line.weights) {
            let p = es.point(tq);
            let w = wq * 0.5 * es.length;
            let (cv, cf) = ((w * w_value).sqrt(), (w * w_flux).sqrt());
            let vk = basis_k.values(&p);
            let gk = basis_k.gradients(&p);
            for i in 0..layout.nk {
                b[(row, i)] = cv * vk[i];
                b[(row + 1, i)] = cf * gk[i].dot(&es.outward);
            }
            for (j, v) in space.trace_basis.values(tq).into_iter().enumerate() {
                b[(row, layout.trace_col(slot, j))] = -cv * v;
            }
            for (j, v) in space.flux_basis.values(tq).into_iter().enumerate() {
                b[(row + 1, layout.flux_col(slot, j))] = -cf * v;
            }
            row += 2;
        }
    }

    // v₀ − 𝒬v₀ at the interior points
    let proj = solve_mass(mr, mkr.transpose());
    for (p, w) in &tri {
        let c = w.sqrt();
        let vk = basis_k.values(p);
        let vr = space.multiplier_bases[t].values(p);
        for i in 0..layout.nk {
            let q: f64 = vr.iter().enumerate().map(|(j, v)| proj[(j, i)] * v).sum();
            b[(row, i)] = c * (vk[i] - q);
        }
        row += 1;
    }
    b
}

/// `b_T(v, λ) = (−Δ_w v + v₀, λ)_T` from the weak Laplacian matrix.
pub fn coupling(mesh: &Mesh, space: &WeakSpace, t: usize, weak_laplacian: &DMatrix<f64>) -> DMatrix<f64> {
    let (_, mr, mkr) = mass_matrices(mesh, space, t);
    coupling_with_mass(&mr, &mkr, weak_laplacian)
}

fn coupling_with_mass(mr: &DMatrix<f64>, mkr: &DMatrix<f64>, weak_laplacian: &DMatrix<f64>) -> DMatrix<f64> {
    let mut b = -(mr * weak_laplacian);
    let nk = mkr.nrows();
    for i in 0..mkr.ncols() {
        for j in 0..nk {
            b[(i, j)] += mkr[(j, i)];
        }
    }
    b
}

pub fn local_ops(mesh: &Mesh, space: &WeakSpace, t: usize) -> LocalOps {
    let (mk, mr, mkr) = mass_matrices(mesh, space, t);
    let weak_laplacian = solve_mass(&mr, weak_laplacian_pairing(mesh, space, t));
    let stabilizer = stabilizer_with_mass(mesh, space, t, &mr, &mkr);
    let coupling = coupling_with_mass(&mr, &mkr, &weak_laplacian);
    LocalOps {
        weak_laplacian,
        stabilizer,
        coupling,
        mass_k: mk,
        mass_r: mr,
        mass_kr: mkr,
    }
}

/// Local operators of every element, in element order.
pub fn all_local_ops(mesh: &Mesh, space: &WeakSpace) -> Vec<LocalOps> {
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| local_ops(mesh, space, t))
        .collect()
}

/// L² projection onto the element basis of degree `basis`, using the data rule.
pub fn project_onto_element<F>(
    mesh: &Mesh,
    space: &WeakSpace,
    t: usize,
    basis: &crate::fe_space::ElementBasis,
    f: F,
) -> DVector<f64>
where
    F: Fn(&Point) -> f64,
{
    let pts = triangle_points(mesh, t, &space.triangle_data);
    let n = basis.dim();
    let mut mass = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (p, w) in &pts {
        let v = basis.values(p);
        let fv = f(p);
        for i in 0..n {
            rhs[i] += w * fv * v[i];
            for j in 0..n {
                mass[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    let chol = symmetrized(mass).cholesky().expect("element mass matrix is SPD");
    chol.solve(&rhs)
}

/// Legendre coefficients of the L² projection of `g(t)` onto `P_degree`
/// on an edge, `g` given in the edge parameter.
pub fn project_onto_edge<F>(space: &WeakSpace, degree: usize, g: F) -> DVector<f64>
where
    F: Fn(f64) -> f64,
{
    let basis = crate::fe_space::EdgeBasis { degree };
    let rule = &space.line_data;
    let mut c = DVector::zeros(degree + 1);
    for (&tq, &wq) in rule.points.iter().zip(&rule.weights) {
        let gv = g(tq);
        for (j, b) in basis.values(tq).into_iter().enumerate() {
            c[j] += wq * gv * b;
        }
    }
    for j in 0..=degree {
        c[j] /= crate::fe_space::EdgeBasis::reference_mass(j);
    }
    c
}

/// Local weak coefficients of `Q_h u = {Q₀u, Q_b u, Q_n(∇u·n)}` on `t`,
/// with the flux taken along the element's outward normals.
pub fn project_exact<U, G>(mesh: &Mesh, space: &WeakSpace, t: usize, u: U, grad: G) -> DVector<f64>
where
    U: Fn(&Point) -> f64,
    G: Fn(&Point) -> Vector2<f64>,
{
    let layout = Layout::new(space);
    let mut out = DVector::zeros(space.local_size());
    let interior = project_onto_element(mesh, space, t, &space.state_bases[t], &u);
    out.rows_mut(0, layout.nk).copy_from(&interior);
    for (slot, es) in edge_slots(mesh, t).iter().enumerate() {
        let trace = project_onto_edge(space, space.trace_basis.degree, |tq| u(&es.point(tq)));
        let flux = project_onto_edge(space, space.flux_basis.degree, |tq| {
            grad(&es.point(tq)).dot(&es.outward)
        });
        out.rows_mut(layout.trace_col(slot, 0), layout.trace).copy_from(&trace);
        out.rows_mut(layout.flux_col(slot, 0), layout.flux).copy_from(&flux);
    }
    out
}

/// `P_r` coefficients of `𝒬_h λ` on `t`.
pub fn project_multiplier<F>(mesh: &Mesh, space: &WeakSpace, t: usize, lambda: F) -> DVector<f64>
where
    F: Fn(&Point) -> f64,
{
    project_onto_element(mesh, space, t, &space.multiplier_bases[t], lambda)
}

/// Global state vector of `Q_h u` (length `n_state`), fluxes along each
/// edge's global normal; `Γ_N` fluxes are dropped with the DOFs.
pub fn project_state_global<U, G>(mesh: &Mesh, space: &WeakSpace, u: U, grad: G) -> DVector<f64>
where
    U: Fn(&Point) -> f64 + Sync,
    G: Fn(&Point) -> Vector2<f64> + Sync,
{
    let dofs = &space.dofs;
    let mut out = DVector::zeros(dofs.n_state);
    let interiors: Vec<DVector<f64>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| project_onto_element(mesh, space, t, &space.state_bases[t], &u))
        .collect();
    for (t, c) in interiors.iter().enumerate() {
        out.rows_mut(dofs.interior(t).start, c.len()).copy_from(c);
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        let (pa, pb) = (mesh.vertices[edge.endpoints[0]], mesh.vertices[edge.endpoints[1]]);
        let at = |tq: f64| pa + (pb - pa) * (0.5 * (tq + 1.0));
        let trace = project_onto_edge(space, space.trace_basis.degree, |tq| u(&at(tq)));
        out.rows_mut(dofs.trace(e).start, trace.len()).copy_from(&trace);
        if let Some(range) = dofs.flux(e) {
            let n = edge.global_normal;
            let flux = project_onto_edge(space, space.flux_basis.degree, |tq| grad(&at(tq)).dot(&n));
            out.rows_mut(range.start, flux.len()).copy_from(&flux);
        }
    }
    out
}

/// Gathers the local weak coefficients of `t` from a global state vector.
pub fn gather_local(mesh: &Mesh, space: &WeakSpace, t: usize, state: &DVector<f64>) -> DVector<f64> {
    let map = space.dofs.local_to_global(mesh, t);
    DVector::from_iterator(
        map.len(),
        map.iter().map(|&(g, sign)| g.map_or(0.0, |g| sign * state[g])),
    )
}
