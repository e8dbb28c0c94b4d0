//! Sparse direct LU backend, used as the reference linear solver and as a
//! cross-check for the iterative path.

use crate::solver::{CsrMatrix, SolverError};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

/// Solve `A x = b` with a sparse LU factorization.
pub fn direct_lu_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = a.n_rows;
    assert_eq!(a.n_cols, n, "direct solve needs a square matrix");
    assert_eq!(b.len(), n);
    let mut triplets = Vec::with_capacity(a.nnz());
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push(Triplet::new(r, c, v));
        }
    }
    let mat: SparseColMat<usize, f64> = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| SolverError::Direct(format!("assembling sparse matrix: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| SolverError::Direct(format!("LU factorization: {e:?}")))?;
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let sol = lu.solve(&rhs);
    Ok((0..n).map(|i| sol[(i, 0)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ilut::tests::{dense_solve, random_dominant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_elimination() {
        let n = 90;
        let a = random_dominant(n, 5, 0xd1ec);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = direct_lu_solve(&a, &b).unwrap();
        let oracle = dense_solve(&a, &b);
        let err: f64 = x.iter().zip(&oracle).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let scale: f64 = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / scale < 1e-11, "relative error {:e}", err / scale);
    }

    #[test]
    fn handles_indefinite_saddle_matrices() {
        // [[2, 1, 1], [1, 2, 1], [1, 1, 0]]: a saddle pattern with a zero
        // diagonal entry that plain (unpivoted) elimination orders badly.
        let mut m = CsrMatrix::from_pattern(
            3,
            3,
            vec![vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]],
        );
        for (r, c, v) in [
            (0, 0, 2.0),
            (0, 1, 1.0),
            (0, 2, 1.0),
            (1, 0, 1.0),
            (1, 1, 2.0),
            (1, 2, 1.0),
            (2, 0, 1.0),
            (2, 1, 1.0),
            (2, 2, 0.0),
        ] {
            m.add(r, c, v);
        }
        let b = vec![4.0, 4.0, 2.0];
        let x = direct_lu_solve(&m, &b).unwrap();
        // Exact solution: x = [1, 1, 1].
        for xi in &x {
            assert!((xi - 1.0).abs() < 1e-12);
        }
    }
}
