//! Damped Newton–Raphson for square real polynomial systems.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{inf_norm, lu_solve};
use crate::network::Network;
use crate::poly::PolySystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Residual ∞-norm accepted as converged.
    pub tol: f64,
    /// Fixed step multiplier in `(0, 1]`.
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 50,
            tol: 1e-10,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewtonError {
    #[error("invalid Newton options: {0}")]
    InvalidOptions(&'static str),
    #[error("system is not square ({equations} equations, {unknowns} unknowns)")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("start vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSolution {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Residual ∞-norm before each iteration, ending with the final one.
    pub history: Vec<f64>,
}

pub fn newton_solve(
    sys: &PolySystem<f64>,
    start: &[f64],
    opts: &NewtonOptions,
) -> Result<NewtonSolution, NewtonError> {
    if !(opts.tol > 0.0) {
        return Err(NewtonError::InvalidOptions("tol must be positive"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(NewtonError::InvalidOptions("damping must lie in (0, 1]"));
    }
    if !sys.is_square() {
        return Err(NewtonError::NotSquare {
            equations: sys.len(),
            unknowns: sys.nvars(),
        });
    }
    let n = sys.nvars();
    if start.len() != n {
        return Err(NewtonError::DimensionMismatch { expected: n, got: start.len() });
    }
    let compiled = sys.compile();
    let mut x = start.to_vec();
    let mut history = Vec::new();
    for iteration in 0..=opts.max_iter {
        let (f, jac) = compiled.eval_real_with_jacobian(&x);
        let r = inf_norm(&f);
        history.push(r);
        if !r.is_finite() {
            return Err(NewtonError::Diverged { iterations: iteration, residual: r });
        }
        if r <= opts.tol {
            return Ok(NewtonSolution {
                solution: x,
                iterations: iteration,
                residual: r,
                history,
            });
        }
        if iteration == opts.max_iter {
            return Err(NewtonError::Diverged { iterations: iteration, residual: r });
        }
        let j = DMatrix::from_fn(n, n, |a, b| jac[a][b]);
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let dx = lu_solve(&j, &rhs).ok_or(NewtonError::SingularJacobian { iteration })?;
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi += opts.damping * d;
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// `Vd = 1, Vq = 0` for every non-slack bus, in the variable order of
/// [`crate::network::powerflow_system`].
pub fn flat_start(net: &Network) -> Vec<f64> {
    let m = net.nbuses() - 1;
    let mut x = vec![1.0; m];
    x.resize(2 * m, 0.0);
    x
}
