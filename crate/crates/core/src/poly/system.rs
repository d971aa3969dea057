use std::sync::Arc;

use num_complex::Complex64;

use super::coeff::Coeff;
use super::polynomial::{Polynomial, PowerTable, Ring};
use super::PolyError;

/// A list of polynomials over one ring; `f(x) = 0` with `x` the ring variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem<C: Coeff> {
    ring: Arc<Ring>,
    polys: Vec<Polynomial<C>>,
}

impl<C: Coeff> PolySystem<C> {
    pub fn new(ring: &Arc<Ring>, polys: Vec<Polynomial<C>>) -> Result<Self, PolyError> {
        if polys.iter().any(|p| p.ring() != ring) {
            return Err(PolyError::RingMismatch);
        }
        Ok(PolySystem {
            ring: ring.clone(),
            polys,
        })
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn polys(&self) -> &[Polynomial<C>] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.ring.nvars()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.ring.nvars()
    }

    /// Total degree of each equation (zero polynomials count as degree 0).
    pub fn degrees(&self) -> Vec<u32> {
        self.polys
            .iter()
            .map(|p| p.total_degree().unwrap_or(0))
            .collect()
    }

    /// `jacobian[i][j] = ∂f_i/∂x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial<C>>> {
        self.polys
            .iter()
            .map(|p| (0..self.nvars()).map(|j| p.derivative(j)).collect())
            .collect()
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
        self.polys.iter().map(|p| p.eval(point)).collect()
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> PolySystem<D> {
        PolySystem {
            ring: self.ring.clone(),
            polys: self.polys.iter().map(|p| p.map_coeffs(f)).collect(),
        }
    }

    /// Flattened form for repeated numerical evaluation.
    pub fn compile(&self) -> CompiledSystem {
        CompiledSystem::new(self)
    }
}

/// A system and its Jacobian stored as flat coefficient/exponent tables over
/// complex numbers; used in the inner loops of Newton and path tracking.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    max_exp: Vec<u32>,
    polys: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(Complex64, super::Monomial)>,
}

impl CompiledPoly {
    fn new<C: Coeff>(p: &Polynomial<C>) -> Self {
        CompiledPoly {
            terms: p
                .terms()
                .iter()
                .map(|(m, c)| (c.to_complex(), m.clone()))
                .collect(),
        }
    }

    fn eval(&self, pw: &PowerTable) -> Complex64 {
        self.terms.iter().map(|(c, m)| c * pw.monomial(m)).sum()
    }
}

impl CompiledSystem {
    fn new<C: Coeff>(sys: &PolySystem<C>) -> Self {
        let mut max_exp = vec![0u32; sys.nvars()];
        for p in &sys.polys {
            for (m, _) in p.terms() {
                for (v, &e) in m.exponents().iter().enumerate() {
                    max_exp[v] = max_exp[v].max(e);
                }
            }
        }
        CompiledSystem {
            nvars: sys.nvars(),
            max_exp,
            polys: sys.polys.iter().map(CompiledPoly::new).collect(),
            jac: sys
                .jacobian()
                .iter()
                .map(|row| row.iter().map(CompiledPoly::new).collect())
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    fn table(&self, x: &[Complex64]) -> PowerTable {
        PowerTable::with_max(x, &self.max_exp)
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let pw = self.table(x);
        self.polys.iter().map(|p| p.eval(&pw)).collect()
    }

    /// Values and Jacobian (row-major) at `x`.
    pub fn eval_with_jacobian(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let pw = self.table(x);
        let f = self.polys.iter().map(|p| p.eval(&pw)).collect();
        let j = self
            .jac
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&pw)).collect())
            .collect();
        (f, j)
    }

    pub fn eval_real(&self, x: &[f64]) -> Vec<f64> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&xc).into_iter().map(|v| v.re).collect()
    }

    pub fn eval_real_with_jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (f, j) = self.eval_with_jacobian(&xc);
        (
            f.into_iter().map(|v| v.re).collect(),
            j.into_iter()
                .map(|r| r.into_iter().map(|v| v.re).collect())
                .collect(),
        )
    }
}
