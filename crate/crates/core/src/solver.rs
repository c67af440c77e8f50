//! Direct sparse solve of the saddle-point system.
//!
//! The matrix is symmetric indefinite with a zero multiplier block, so it
//! is factored by LU with partial pivoting. Every solve is followed by a
//! few sweeps of iterative refinement and checked against its residual.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, LuSymbolicParams, NumericLu, SymbolicLu};
use faer::sparse::linalg::SupernodalThreshold;
use faer::{Conj, Mat, Par};
use nalgebra::DVector;

use crate::assembly::{GlobalSystem, SparseMatrix};
use crate::{Error, Result};

/// Residual bound for accepted solutions.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Iterative refinement sweeps after the first solve.
const REFINEMENT_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// `u₀`, `u_b`, `u_n` coefficients in DOF-map order.
    pub u_coeffs: DVector<f64>,
    pub lambda_coeffs: DVector<f64>,
    /// `‖Mx − b‖ / max(‖b‖, 1)`.
    pub residual_rel: f64,
}

impl Solution {
    pub fn from_parts(u_coeffs: DVector<f64>, lambda_coeffs: DVector<f64>) -> Self {
        Self {
            u_coeffs,
            lambda_coeffs,
            residual_rel: 0.0,
        }
    }
}

/// Left-looking sparse LU with partial pivoting after a COLAMD column
/// ordering. Storage grows with the actual fill only.
struct SparseLu {
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, f64>,
}

impl SparseLu {
    fn new(matrix: &SparseMatrix) -> Result<Self> {
        let a = matrix.to_faer();
        let params = LuSymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SIMPLICIAL,
            ..Default::default()
        };
        let symbolic = factorize_symbolic_lu(a.symbolic(), params)
            .map_err(|e| Error::Solvability(format!("sparse LU analysis failed: {e:?}")))?;
        let mut numeric = NumericLu::new();
        let mut mem = MemBuffer::try_new(symbolic.factorize_numeric_lu_scratch::<f64>(Par::Seq, Default::default()))
            .map_err(|_| Error::Solvability("sparse LU workspace allocation failed".into()))?;
        symbolic
            .factorize_numeric_lu(&mut numeric, a.as_ref(), Par::Seq, MemStack::new(&mut mem), Default::default())
            .map_err(|e| Error::Solvability(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { symbolic, numeric })
    }

    fn apply(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        LuRef::new_unchecked(&self.symbolic, &self.numeric).solve_in_place_with_conj(
            Conj::No,
            x.as_mut(),
            Par::Seq,
            MemStack::new(&mut mem),
        );
        DVector::from_fn(rhs.len(), |i, _| x[(i, 0)])
    }
}

/// A factored system, reusable across right-hand sides.
pub struct Factorization<'a> {
    system: &'a GlobalSystem,
    lu: SparseLu,
}

impl<'a> Factorization<'a> {
    pub fn new(system: &'a GlobalSystem) -> Result<Self> {
        Ok(Self {
            system,
            lu: SparseLu::new(&system.matrix)?,
        })
    }

    /// Solves `M x = rhs` with a few steps of iterative refinement and
    /// returns `x` with its relative residual.
    pub fn solve_vec(&self, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let m = &self.system.matrix;
        let scale = rhs.norm().max(1.0);
        let mut x = self.lu.apply(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solvability("factorization produced non-finite values".into()));
        }
        let mut r = rhs - m.mul_vec(&x);
        let mut res = r.norm() / scale;
        for _ in 0..REFINEMENT_STEPS {
            if res <= RESIDUAL_TOL * 1e-3 {
                break;
            }
            let candidate = &x + self.lu.apply(&r);
            let rc = rhs - m.mul_vec(&candidate);
            let rc_norm = rc.norm() / scale;
            if !(rc_norm < res) {
                break;
            }
            x = candidate;
            r = rc;
            res = rc_norm;
        }
        Ok((x, res))
    }
}

/// Solves with the default residual bound.
pub fn solve(system: &GlobalSystem) -> Result<Solution> {
    solve_with_tolerance(system, RESIDUAL_TOL)
}

pub fn solve_with_tolerance(system: &GlobalSystem, tolerance: f64) -> Result<Solution> {
    let factor = Factorization::new(system)?;
    let (x, residual_rel) = factor.solve_vec(&system.rhs)?;
    if residual_rel > tolerance {
        return Err(Error::Accuracy {
            residual: residual_rel,
            tolerance,
        });
    }
    let n = system.n_state;
    Ok(Solution {
        u_coeffs: x.rows(0, n).into_owned(),
        lambda_coeffs: x.rows(n, x.len() - n).into_owned(),
        residual_rel,
    })
}
