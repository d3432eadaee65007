use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Cholesky factorization with a single jittered retry.
pub fn cholesky(mat: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let k = mat.nrows();
    if let Some(c) = mat.clone().cholesky() {
        return Ok(c);
    }
    let scale = (mat.trace() / k.max(1) as f64).abs().max(1.0);
    let mut jittered = mat;
    for i in 0..k {
        jittered[(i, i)] += 1e-10 * scale;
    }
    jittered
        .cholesky()
        .ok_or_else(|| Error::Factorization(format!("{what} ({k}x{k}) is not positive definite")))
}

/// Solve `L^T x = b` for lower-triangular `L`.
pub fn solve_upper_transpose(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.tr_solve_lower_triangular(b).expect("triangular factor has a positive diagonal")
}

pub fn solve_lower(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b).expect("triangular factor has a positive diagonal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_rescues_semidefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(cholesky(m, "test").is_ok());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(cholesky(bad, "test"), Err(Error::Factorization(_))));
    }
}
