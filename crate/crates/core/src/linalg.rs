//! Small dense helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Relative pivot threshold: a pivot below `PIVOT_RTOL * max row norm` marks
/// the matrix as singular.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Solves `a x = b` by LU with partial pivoting. Returns `None` when a pivot
/// falls below [`PIVOT_RTOL`] times the largest row ∞-norm of `a`.
pub fn lu_solve<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>> {
    lu_solve_rtol(a, b, PIVOT_RTOL)
}

/// [`lu_solve`] with a caller-chosen relative pivot threshold. The result is
/// also rejected when it is not finite.
pub fn lu_solve_rtol<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    b: &DVector<T>,
    rtol: f64,
) -> Option<DVector<T>> {
    let scale = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.clone().abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let lu = a.clone().lu();
    let u = lu.u();
    if u.diagonal().iter().any(|p| p.clone().abs() <= rtol * scale) {
        return None;
    }
    lu.solve(b).filter(|x| x.iter().all(|v| v.clone().abs().is_finite()))
}

/// Infinity norm of a slice of scalars.
pub fn inf_norm<T: ComplexField<RealField = f64>>(v: &[T]) -> f64 {
    v.iter().map(|x| x.clone().abs()).fold(0.0, f64::max)
}
