//! Global saddle-point system
//!
//! ```text
//! [ A  Bᵀ ] [u_h]   [⟨c₀, v_b⟩_{Γ_O}]
//! [ B  0  ] [λ_h] = [(f, σ)        ]
//! ```
//!
//! with `A = s(·,·) + ⟨·,·⟩_{Γ_O} on u_b + α⟨·,·⟩_{Γ_C} on u_n` and
//! `B = b(·,·)`.

use nalgebra::DVector;

use crate::fe_space::{EdgeBasis, WeakSpace};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::wg_ops::{project_onto_edge, triangle_points, LocalOps};
use crate::{Error, Result};

/// Square sparse matrix in compressed-row form with sorted, unique columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Sums duplicate entries in insertion order, so the result depends only
    /// on the order triplets were pushed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(pos) => self.vals[row.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `(col, value)` of the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    /// `(row, col, value)` of every stored entry, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.cols[p], self.vals[p]))
        })
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n);
        DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|p| self.vals[p] * x[self.cols[p]])
                    .sum::<f64>()
            }),
        )
    }

    /// Largest `|M_ij − M_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        let triplets: Vec<_> = self
            .entries()
            .map(|(i, j, v)| faer::sparse::Triplet::new(i, j, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .expect("entries are unique and in range")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: SparseMatrix,
    pub rhs: DVector<f64>,
    pub alpha: f64,
    /// Number of state unknowns; the multiplier block follows.
    pub n_state: usize,
}

impl GlobalSystem {
    pub fn order(&self) -> usize {
        self.matrix.order()
    }
}

/// `⟨u, v⟩_e` of Legendre coefficient `j` on an edge of the given length.
pub fn edge_mass(length: f64, j: usize) -> f64 {
    0.5 * length * EdgeBasis::reference_mass(j)
}

/// Builds the saddle-point system of the WG scheme.
pub fn assemble(mesh: &Mesh, space: &WeakSpace, local: &[LocalOps], problem: &ProblemSpec) -> Result<GlobalSystem> {
    let alpha = problem.alpha;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("regularization alpha = {alpha} must be positive")));
    }
    if !mesh.edges.iter().any(|e| e.tags.observe) {
        return Err(Error::Config("observation boundary is empty".into()));
    }
    assert_eq!(local.len(), mesh.num_triangles());

    let dofs = &space.dofs;
    let mut triplets = Vec::new();
    for (t, ops) in local.iter().enumerate() {
        let map = dofs.local_to_global(mesh, t);
        let s = &ops.stabilizer;
        for (a, &(ga, sa)) in map.iter().enumerate() {
            let Some(ga) = ga else { continue };
            for (b, &(gb, sb)) in map.iter().enumerate() {
                let Some(gb) = gb else { continue };
                triplets.push((ga, gb, sa * sb * s[(a, b)]));
            }
        }
        for (i, gl) in dofs.multiplier(t).enumerate() {
            for (c, &(gc, sc)) in map.iter().enumerate() {
                let Some(gc) = gc else { continue };
                let v = sc * ops.coupling[(i, c)];
                triplets.push((gl, gc, v));
                triplets.push((gc, gl, v));
            }
        }
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tags.observe {
            for (j, g) in dofs.trace(e).enumerate() {
                triplets.push((g, g, edge_mass(edge.length, j)));
            }
        }
        if edge.tags.control {
            if let Some(range) = dofs.flux(e) {
                for (j, g) in range.enumerate() {
                    triplets.push((g, g, alpha * edge_mass(edge.length, j)));
                }
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(dofs.n_total, triplets);

    let mut rhs = DVector::zeros(dofs.n_total);
    for (e, edge) in mesh.edges.iter().enumerate() {
        if !edge.tags.observe {
            continue;
        }
        let (pa, pb) = (mesh.vertices[edge.endpoints[0]], mesh.vertices[edge.endpoints[1]]);
        let c0 = &problem.c0;
        let coeffs = project_onto_edge(space, space.trace_basis.degree, |tq| {
            let p = pa + (pb - pa) * (0.5 * (tq + 1.0));
            c0(&p)
        });
        for (j, g) in dofs.trace(e).enumerate() {
            rhs[g] += coeffs[j] * edge_mass(edge.length, j);
        }
    }
    for t in 0..mesh.num_triangles() {
        let basis = &space.multiplier_bases[t];
        let mut moments = vec![0.0; basis.dim()];
        for (p, w) in triangle_points(mesh, t, &space.triangle_data) {
            let fv = (problem.f)(&p);
            for (m, v) in moments.iter_mut().zip(basis.values(&p)) {
                *m += w * fv * v;
            }
        }
        for (g, m) in dofs.multiplier(t).zip(moments) {
            rhs[g] = m;
        }
    }

    Ok(GlobalSystem {
        matrix,
        rhs,
        alpha,
        n_state: dofs.n_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::SpaceConfig;
    use crate::problems::{example1, ProblemSpec};
    use crate::Discretization;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(problem: &ProblemSpec, level: u32, k: usize, r: usize) -> (Discretization, GlobalSystem) {
        let disc = Discretization::new(level, SpaceConfig::new(k, r).unwrap(), problem).unwrap();
        let sys = assemble(&disc.mesh, &disc.space, &disc.local, problem).unwrap();
        (disc, sys)
    }

    #[test]
    fn sparse_from_triplets_sums_duplicates() {
        let m = SparseMatrix::from_triplets(3, vec![(0, 1, 1.0), (2, 2, 4.0), (0, 1, 2.0), (1, 0, 3.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        let y = m.mul_vec(&DVector::from_vec(vec![1.0, 1.0, 1.0]));
        assert_eq!(y.as_slice(), &[3.0, 3.0, 4.0]);
    }

    #[test]
    fn exact_symmetry_zero_block_and_size() {
        let p = example1().with_alpha(1.0).unwrap();
        for level in 1..=3 {
            let (disc, sys) = system(&p, level, 3, 1);
            assert_eq!(sys.order(), disc.space.dofs.n_total);
            assert_eq!(sys.matrix.asymmetry(), 0.0);
            let n = sys.n_state;
            assert!(sys.matrix.entries().all(|(i, j, _)| i < n || j < n));
        }
    }

    #[test]
    fn state_block_is_psd() {
        let p = example1().with_alpha(1.0).unwrap();
        let (_, sys) = system(&p, 2, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = DVector::from_fn(sys.order(), |i, _| if i < sys.n_state { rng.gen_range(-1.0..1.0) } else { 0.0 });
            let q = x.dot(&sys.matrix.mul_vec(&x));
            assert!(q >= -1e-12 * x.norm_squared(), "{q}");
        }
    }

    #[test]
    fn homogeneous_data_gives_zero_rhs() {
        let p = example1().with_alpha(3.0).unwrap().homogeneous();
        let (_, sys) = system(&p, 2, 3, 1);
        assert_eq!(sys.rhs.amax(), 0.0);
    }

    #[test]
    fn example1_rhs_has_zero_state_block() {
        let p = example1().with_alpha(1.0).unwrap();
        let (_, sys) = system(&p, 3, 3, 1);
        assert_eq!(sys.rhs.rows(0, sys.n_state).amax(), 0.0);
        assert!(sys.rhs.rows(sys.n_state, sys.order() - sys.n_state).amax() > 0.0);
    }

    #[test]
    fn reassembly_is_bitwise_identical() {
        let p = example1().with_alpha(1.0).unwrap();
        let (_, a) = system(&p, 3, 3, 1);
        let (_, b) = system(&p, 3, 3, 1);
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_scales_only_control_flux_entries() {
        let p1 = example1().with_alpha(1.0).unwrap();
        let p2 = example1().with_alpha(8.0).unwrap();
        let (disc, a) = system(&p1, 2, 3, 1);
        let (_, b) = system(&p2, 2, 3, 1);
        let dofs = &disc.space.dofs;
        let mut penalty = std::collections::HashMap::new();
        for (e, edge) in disc.mesh.edges.iter().enumerate().filter(|(_, e)| e.tags.control) {
            for (j, g) in dofs.flux(e).unwrap().enumerate() {
                penalty.insert(g, edge_mass(edge.length, j));
            }
        }
        assert!(!penalty.is_empty());
        assert_eq!(a.matrix.nnz(), b.matrix.nnz());
        for ((i, j, va), (_, _, vb)) in a.matrix.entries().zip(b.matrix.entries()) {
            match penalty.get(&i) {
                Some(&m) if i == j => assert!((vb - va - 7.0 * m).abs() <= 1e-12 * vb.abs()),
                _ => assert_eq!(va, vb, "entry ({i}, {j}) changed"),
            }
        }
    }

    #[test]
    fn rejects_bad_alpha_and_missing_observation() {
        let p = example1();
        let disc = Discretization::new(2, SpaceConfig::new(3, 1).unwrap(), &p).unwrap();
        let mut bad = p.clone();
        bad.alpha = 0.0;
        assert!(matches!(assemble(&disc.mesh, &disc.space, &disc.local, &bad), Err(Error::Config(_))));

        let mut unobserved = p.clone();
        unobserved.observe = std::sync::Arc::new(|_| false);
        let disc = Discretization::new(2, SpaceConfig::new(3, 1).unwrap(), &unobserved).unwrap();
        assert!(matches!(
            assemble(&disc.mesh, &disc.space, &disc.local, &unobserved),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn random_state_vector_psd_over_levels() {
        let p = example1().with_alpha(1e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for level in 1..=3 {
            let (_, sys) = system(&p, level, 4, 2);
            let x = DVector::from_fn(sys.order(), |i, _| if i < sys.n_state { rng.gen_range(-1.0..1.0) } else { 0.0 });
            assert!(x.dot(&sys.matrix.mul_vec(&x)) >= -1e-12 * x.norm_squared());
        }
    }
}
