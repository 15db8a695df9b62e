//! Dense solver for `A^T P + P A + Q = 0`.

use nalgebra::DMatrix;

use super::ControlError;

/// Largest real part of the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    a.is_square() && a.nrows() > 0 && spectral_abscissa(a) < 0.0
}

fn is_symmetric_positive_definite(m: &DMatrix<f64>) -> bool {
    let asym = (m - m.transpose()).abs().max();
    let scale = m.abs().max().max(1.0);
    asym <= 1e-12 * scale && m.clone().cholesky().is_some()
}

/// Solves the continuous Lyapunov equation through its Kronecker form
/// `(I (x) A^T + A^T (x) I) vec(P) = -vec(Q)`.
///
/// The result is symmetrized and checked for positive definiteness.
pub fn solve_lyapunov(a_m: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, ControlError> {
    let n = a_m.nrows();
    if !a_m.is_square() || q.shape() != (n, n) || n == 0 {
        return Err(ControlError::DimensionMismatch(format!(
            "A_m is {:?} and Q is {:?}",
            a_m.shape(),
            q.shape()
        )));
    }
    if !is_hurwitz(a_m) {
        return Err(ControlError::NotHurwitz {
            abscissa: spectral_abscissa(a_m),
        });
    }
    if !is_symmetric_positive_definite(q) {
        return Err(ControlError::InvalidParams(
            "Q must be symmetric positive definite".into(),
        ));
    }
    let at = a_m.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let lhs = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let vec_p = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| ControlError::InvalidParams("Lyapunov operator is singular".into()))?;
    let p = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    if p.clone().cholesky().is_none() {
        return Err(ControlError::InvalidParams(
            "Lyapunov solution is not positive definite".into(),
        ));
    }
    Ok(p)
}

/// `||A^T P + P A + Q||_inf` (maximum absolute row sum).
pub fn lyapunov_residual(a_m: &DMatrix<f64>, p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let r = a_m.transpose() * p + p * a_m + q;
    r.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
