//! Dense semidefinite programming.
//!
//! Problems are posed over *lifted variables* `y` ([`SdpProblem`]): every
//! block is an affine symmetric matrix `G_0 + sum_i y_i G_i` that must be
//! positive semidefinite, variable 0 is the constant `1`, and extra linear
//! equations on `y` may be attached. [`solve`] eliminates the equations
//! (null-space presolve), converts to SDPA form ([`SdpaData`]) and runs a
//! primal–dual interior-point method ([`solve_sdpa`]): HKM search direction
//! with Mehrotra's predictor–corrector.
//!
//! SDPA form, as in the `.dat-s` files this module reads and writes:
//!
//! ```text
//! (P)  min  c^T x   s.t.  X = sum_i x_i F_i - F_0 >= 0
//! (D)  max  F_0 . Y s.t.  F_i . Y = c_i,  Y >= 0
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("problem too large for the embedded solver: total block dimension {dim} exceeds {limit}; use --export and an external SDPA solver")]
    OverSize { dim: usize, limit: usize },
    #[error("SDPA parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("linear equations on the lifted variables are inconsistent (residual {0:.3e})")]
    InconsistentEqualities(f64),
}

/// One non-zero of an SDPA constraint matrix. Indices are 0-based here and
/// 1-based in files; only the upper triangle (`i <= j`) is stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpaEntry {
    pub matno: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaData {
    /// Negative sizes mark diagonal blocks.
    pub block_sizes: Vec<isize>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

impl SdpaData {
    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_sizes.iter().map(|s| s.unsigned_abs()).sum()
    }

    pub fn to_sdpa_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.m());
        let _ = writeln!(out, "{}", self.block_sizes.len());
        let sizes: Vec<String> = self.block_sizes.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{}", sizes.join(" "));
        let c: Vec<String> = self.c.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", c.join(" "));
        for e in &self.entries {
            let _ = writeln!(out, "{} {} {} {} {}", e.matno, e.block + 1, e.i + 1, e.j + 1, fmt_f64(e.value));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SdpError> {
        let clean = |s: &str| -> String { s.chars().map(|ch| if "{}(),".contains(ch) { ' ' } else { ch }).collect() };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('"') && !t.starts_with('*')
            })
            .map(|(k, l)| (k + 1, clean(l)));
        let mut next = |what: &str| {
            lines.next().ok_or(SdpError::Parse {
                line: 0,
                msg: format!("missing {what}"),
            })
        };
        let perr = |line: usize, msg: String| SdpError::Parse { line, msg };
        let first_token = |(k, l): (usize, String)| -> Result<(usize, String), SdpError> {
            let t = l.split_whitespace().next().ok_or_else(|| perr(k, "empty line".into()))?;
            Ok((k, t.to_string()))
        };
        let (k, t) = first_token(next("constraint count")?)?;
        let m: usize = t.parse().map_err(|_| perr(k, format!("bad constraint count `{t}`")))?;
        let (k, t) = first_token(next("block count")?)?;
        let nb: usize = t.parse().map_err(|_| perr(k, format!("bad block count `{t}`")))?;
        let (k, l) = next("block sizes")?;
        let block_sizes: Vec<isize> = l
            .split_whitespace()
            .take(nb)
            .map(|t| t.parse::<isize>().map_err(|_| perr(k, format!("bad block size `{t}`"))))
            .collect::<Result<_, _>>()?;
        if block_sizes.len() != nb || block_sizes.contains(&0) {
            return Err(perr(k, format!("expected {nb} non-zero block sizes")));
        }
        let (k, l) = next("objective vector")?;
        let c: Vec<f64> = l
            .split_whitespace()
            .take(m)
            .map(|t| t.parse::<f64>().map_err(|_| perr(k, format!("bad number `{t}`"))))
            .collect::<Result<_, _>>()?;
        if c.len() != m {
            return Err(perr(k, format!("expected {m} objective coefficients")));
        }
        let mut entries = Vec::new();
        for (k, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() < 5 {
                return Err(perr(k, "entry needs `matno block i j value`".into()));
            }
            let int = |t: &str| t.parse::<usize>().map_err(|_| perr(k, format!("bad index `{t}`")));
            let (matno, block, i, j) = (int(toks[0])?, int(toks[1])?, int(toks[2])?, int(toks[3])?);
            let value: f64 = toks[4].parse().map_err(|_| perr(k, format!("bad value `{}`", toks[4])))?;
            if matno > m || block == 0 || block > nb {
                return Err(perr(k, "matrix or block number out of range".into()));
            }
            let size = block_sizes[block - 1].unsigned_abs();
            if i == 0 || j == 0 || i > size || j > size {
                return Err(perr(k, "row/column out of range".into()));
            }
            if block_sizes[block - 1] < 0 && i != j {
                return Err(perr(k, "off-diagonal entry in a diagonal block".into()));
            }
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            entries.push(SdpaEntry {
                matno,
                block: block - 1,
                i: i - 1,
                j: j - 1,
                value,
            });
        }
        Ok(SdpaData { block_sizes, c, entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SdpError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SdpError> {
        std::fs::write(path, self.to_sdpa_string())?;
        Ok(())
    }
}

/// Shortest representation that round-trips.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Fraction of the step to the boundary of the cone.
    pub step_fraction: f64,
    /// Relative gap and infeasibility tolerance.
    pub tol: f64,
    /// Largest total block dimension accepted.
    pub max_dim: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iter: 200,
            step_fraction: 0.9,
            tol: 1e-8,
            max_dim: 1500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Primal variables (the lifted variables when coming from [`solve`]).
    pub x: Vec<f64>,
    /// `X = sum x_i F_i - F_0`, one matrix per block.
    pub primal_blocks: Vec<DMatrix<f64>>,
    pub dual_blocks: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Diagnostic for non-optimal exits.
    pub message: Option<String>,
}

impl SdpSolution {
    /// `|p - d| / (1 + |p|)`.
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs() / (1.0 + self.primal_objective.abs())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.primal_blocks.iter().map(min_eig).fold(f64::INFINITY, f64::min)
    }
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Worst 2×2 principal-minor violation `min_{i<k} W_ii W_kk - W_ik^2`.
/// Infinite for matrices smaller than 2×2.
pub fn socp_minor_residual(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for k in i + 1..n {
            worst = worst.min(w[(i, i)] * w[(k, k)] - w[(i, k)] * w[(i, k)]);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Interior-point method. Internally the SDPA problem is read as the standard
// pair  (P') min <C,X> s.t. <A_i,X> = b_i, X >= 0  and
//       (D') max b^T y s.t. sum y_i A_i + S = C, S >= 0
// with A_i = -F_i, C = -F_0, b = -c, so that SDPA's x is y, its X is S and
// its Y is X.

type Blocks = Vec<DMatrix<f64>>;

struct Sparse {
    /// Per constraint: (block, i, j, value), i <= j.
    a: Vec<Vec<(usize, usize, usize, f64)>>,
    c: Blocks,
    b: DVector<f64>,
    sizes: Vec<usize>,
    row_scale: Vec<f64>,
}

fn zeros(sizes: &[usize]) -> Blocks {
    sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect()
}

fn eye(sizes: &[usize], s: f64) -> Blocks {
    sizes.iter().map(|&n| DMatrix::identity(n, n) * s).collect()
}

fn dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &Blocks) -> f64 {
    dot(a, a).sqrt()
}

impl Sparse {
    fn from_sdpa(d: &SdpaData) -> Self {
        let sizes: Vec<usize> = d.block_sizes.iter().map(|s| s.unsigned_abs()).collect();
        let mut a = vec![Vec::new(); d.m()];
        let mut c = zeros(&sizes);
        for e in &d.entries {
            if e.value == 0.0 {
                continue;
            }
            if e.matno == 0 {
                c[e.block][(e.i, e.j)] -= e.value;
                if e.i != e.j {
                    c[e.block][(e.j, e.i)] -= e.value;
                }
            } else {
                a[e.matno - 1].push((e.block, e.i, e.j, -e.value));
            }
        }
        let mut b = DVector::from_iterator(d.m(), d.c.iter().map(|v| -v));
        // Unit-norm constraint matrices; y is unscaled by `row_scale` at the end.
        let mut row_scale = vec![1.0; d.m()];
        for (i, ai) in a.iter_mut().enumerate() {
            let nrm = ai.iter().map(|&(_, r, c, v)| if r == c { v * v } else { 2.0 * v * v }).sum::<f64>().sqrt();
            if nrm > 0.0 {
                row_scale[i] = nrm;
                for e in ai.iter_mut() {
                    e.3 /= nrm;
                }
                b[i] /= nrm;
            }
        }
        Sparse { a, c, b, sizes, row_scale }
    }

    /// `<A_i, G>` for all i (G need not be symmetric).
    fn apply(&self, g: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.a.len(),
            self.a.iter().map(|ai| {
                ai.iter()
                    .map(|&(k, i, j, v)| if i == j { v * g[k][(i, i)] } else { v * (g[k][(i, j)] + g[k][(j, i)]) })
                    .sum::<f64>()
            }),
        )
    }

    /// `sum y_i A_i`.
    fn adjoint(&self, y: &DVector<f64>) -> Blocks {
        let mut out = zeros(&self.sizes);
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for &(k, i, j, v) in ai {
                out[k][(i, j)] += yi * v;
                if i != j {
                    out[k][(j, i)] += yi * v;
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = tr(A_i X A_j S^-1)`.
    fn schur(&self, x: &Blocks, sinv: &Blocks) -> DMatrix<f64> {
        let m = self.a.len();
        // Entries of all constraints, grouped by block.
        let mut by_block: Vec<Vec<(usize, usize, usize, f64)>> = vec![Vec::new(); self.sizes.len()];
        for (i, ai) in self.a.iter().enumerate() {
            for &(k, r, c, v) in ai {
                by_block[k].push((i, r, c, v));
            }
        }
        let mut big = DMatrix::zeros(m, m);
        let mut g: Blocks = zeros(&self.sizes);
        for j in 0..m {
            // G = X A_j S^-1, built from outer products of columns/rows.
            let mut touched: Vec<usize> = self.a[j].iter().map(|e| e.0).collect();
            touched.sort_unstable();
            touched.dedup();
            for &k in &touched {
                g[k].fill(0.0);
            }
            for &(k, r, c, v) in &self.a[j] {
                let xr = x[k].column(r);
                let sc = sinv[k].row(c);
                g[k].ger(v, &xr, &sc.transpose(), 1.0);
                if r != c {
                    let xc = x[k].column(c);
                    let sr = sinv[k].row(r);
                    g[k].ger(v, &xc, &sr.transpose(), 1.0);
                }
            }
            for &k in &touched {
                let gk = &g[k];
                for &(i, r, c, v) in &by_block[k] {
                    big[(i, j)] += if r == c { v * gk[(r, r)] } else { v * (gk[(r, c)] + gk[(c, r)]) };
                }
            }
        }
        // Symmetrize away rounding.
        let t = big.transpose();
        (big + t) * 0.5
    }
}

fn cholesky_inv(blocks: &Blocks) -> Option<Blocks> {
    blocks
        .iter()
        .map(|b| {
            if b.nrows() == 0 {
                return Some(b.clone());
            }
            nalgebra::Cholesky::new(b.clone()).map(|c| c.inverse())
        })
        .collect()
}

/// Largest step `alpha` with `X + alpha dX >= 0` (infinite if unbounded).
fn max_step(x: &Blocks, dx: &Blocks) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let l = nalgebra::Cholesky::new(xb.clone())?.l();
        let li = l.clone().try_inverse()?;
        let w = &li * db * li.transpose();
        let w = (&w + w.transpose()) * 0.5;
        let lam = SymmetricEigen::new(w).eigenvalues.min();
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    Some(alpha)
}

fn symmetrize(b: &mut Blocks) {
    for m in b.iter_mut() {
        let t = m.transpose();
        *m = (&*m + t) * 0.5;
    }
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = nalgebra::Cholesky::new(m.clone()) {
        let mut x = ch.solve(rhs);
        // One step of iterative refinement.
        x += ch.solve(&(rhs - m * &x));
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let x = m.clone().lu().solve(rhs)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Iterations without halving the error before the method gives up.
const STALL_ITERS: usize = 15;
/// Relative duality gap and dual residual accepted from a stalled run whose
/// primal blocks are consistent to `tol`.
const ACCEPT_GAP: f64 = 1e-7;

/// Solves an SDPA-form problem with the embedded interior-point method.
pub fn solve_sdpa(data: &SdpaData, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    let dim = data.total_dim();
    if dim > opts.max_dim {
        return Err(SdpError::OverSize { dim, limit: opts.max_dim });
    }
    if !(opts.step_fraction > 0.0 && opts.step_fraction < 1.0) || opts.tol <= 0.0 {
        return Err(SdpError::Invalid("step fraction must lie in (0,1) and tol be positive".into()));
    }
    let p = Sparse::from_sdpa(data);
    let m = data.m();
    let n_total = dim.max(1) as f64;

    // Starting point: scaled identities (SDPT3-style magnitudes).
    let norm_a: Vec<f64> = p.a.iter().map(|ai| ai.iter().map(|e| e.3 * e.3).sum::<f64>().sqrt()).collect();
    let mut xi = 1.0f64;
    for (i, na) in norm_a.iter().enumerate() {
        xi = xi.max((1.0 + p.b[i].abs()) / (1.0 + na));
    }
    let xi = 10.0 * xi * n_total.sqrt();
    let eta = 10.0 * (1.0f64).max(fro(&p.c)).max(norm_a.iter().cloned().fold(0.0, f64::max)) * n_total.sqrt().max(1.0);
    let mut x = eye(&p.sizes, xi);
    let mut s = eye(&p.sizes, eta);
    let mut y = DVector::zeros(m);

    let bnorm = p.b.norm();
    let cnorm = fro(&p.c);
    let mut status = SdpStatus::MaxIter;
    let mut message = None;
    let mut iterations = 0;
    // Best iterate seen, by its worst relative error measure.
    let mut best: Option<(f64, [f64; 3], Blocks, Blocks, DVector<f64>)> = None;
    let mut best_iter = 0usize;
    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = p.apply(&x);
        let rp = &p.b - &ax;
        let aty = p.adjoint(&y);
        let rd: Blocks = p.c.iter().zip(&s).zip(&aty).map(|((c, s), a)| c - s - a).collect();
        let pobj = dot(&p.c, &x);
        let dobj = p.b.dot(&y);
        let gap = dot(&x, &s);
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = fro(&rd) / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if relgap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol && gap / (1.0 + pobj.abs()) <= 10.0 * opts.tol {
            status = SdpStatus::Optimal;
            best = None;
            break;
        }
        let err = relgap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|b| err < b.0) {
            if best.as_ref().is_none_or(|b| err < 0.5 * b.0) {
                best_iter = iter;
            }
            best = Some((err, [relgap, pinf, dinf], x.clone(), s.clone(), y.clone()));
        }
        if iter >= best_iter + STALL_ITERS {
            message = Some(format!("no progress in {STALL_ITERS} iterations"));
            break;
        }
        if iter == opts.max_iter {
            message = Some(format!("no convergence within {} iterations", opts.max_iter));
            break;
        }
        let Some(sinv) = cholesky_inv(&s) else {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("slack matrix lost definiteness at iteration {iter}"));
            break;
        };
        let mu = gap / n_total;
        let big = p.schur(&x, &sinv);
        // X Rd S^-1, shared by predictor and corrector.
        let xrds: Blocks = x.iter().zip(&rd).zip(&sinv).map(|((x, r), si)| x * r * si).collect();
        let a_xrds = p.apply(&xrds);
        let a_sinv = p.apply(&sinv);

        let direction = |sigma_mu: f64, extra: Option<&Blocks>| -> Option<(DVector<f64>, Blocks, Blocks)> {
            let mut rhs = &p.b - &a_sinv * sigma_mu + &a_xrds;
            if let Some(e) = extra {
                rhs += p.apply(e);
            }
            let dy = solve_spd(&big, &rhs)?;
            let atdy = p.adjoint(&dy);
            let ds: Blocks = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
            let mut dx: Blocks = (0..x.len())
                .map(|k| {
                    let mut t = &sinv[k] * sigma_mu - &x[k] - &x[k] * &ds[k] * &sinv[k];
                    if let Some(e) = extra {
                        t -= &e[k];
                    }
                    t
                })
                .collect();
            symmetrize(&mut dx);
            Some((dy, dx, ds))
        };
        let steps = |dx: &Blocks, ds: &Blocks| -> Option<(f64, f64)> {
            let ap = (opts.step_fraction * max_step(&x, dx)?).min(1.0);
            let ad = (opts.step_fraction * max_step(&s, ds)?).min(1.0);
            Some((ap, ad))
        };

        let Some((_, dxp, dsp)) = direction(0.0, None) else {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("Schur complement singular at iteration {iter}"));
            break;
        };
        let Some((ap, ad)) = steps(&dxp, &dsp) else {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("iterate left the cone at iteration {iter}"));
            break;
        };
        let xn: Blocks = x.iter().zip(&dxp).map(|(a, d)| a + d * ap).collect();
        let sn: Blocks = s.iter().zip(&dsp).map(|(a, d)| a + d * ad).collect();
        let sigma = (dot(&xn, &sn) / gap).clamp(0.0, 1.0).powi(3);
        // Second-order term dX_p dS_p S^-1.
        let corr: Blocks = (0..x.len()).map(|k| &dxp[k] * &dsp[k] * &sinv[k]).collect();
        let Some((dy, dx, ds)) = direction(sigma * mu, Some(&corr)) else {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("Schur complement singular at iteration {iter}"));
            break;
        };
        let Some((ap, ad)) = steps(&dx, &ds) else {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("iterate left the cone at iteration {iter}"));
            break;
        };
        // Back off until both iterates factor (guards against rounding at
        // the boundary).
        let advance = |base: &Blocks, d: &Blocks, mut a: f64| -> (Blocks, f64) {
            for _ in 0..40 {
                let nb: Blocks = base.iter().zip(d).map(|(b, d)| b + d * a).collect();
                if nb.iter().all(|m| m.nrows() == 0 || nalgebra::Cholesky::new(m.clone()).is_some()) {
                    return (nb, a);
                }
                a *= 0.8;
            }
            (base.clone(), 0.0)
        };
        let (xn, ap) = advance(&x, &dx, ap);
        let (sn, ad) = advance(&s, &ds, ad);
        x = xn;
        s = sn;
        y += dy * ad;
        if !(ap > 1e-12 || ad > 1e-12) {
            status = SdpStatus::NumericalFailure;
            message = Some(format!("step length collapsed at iteration {iter}"));
            break;
        }
    }
    if let Some((err, [relgap, pinf, dinf], bx, bs, by)) = best {
        // Fall back to the most accurate iterate when the method stalled.
        x = bx;
        s = bs;
        y = by;
        if relgap <= ACCEPT_GAP && pinf <= ACCEPT_GAP && dinf <= opts.tol {
            status = SdpStatus::Optimal;
        }
        if let Some(m) = message.as_mut() {
            m.push_str(&format!(
                "; returning best iterate (relative error {err:.2e}: gap {relgap:.1e}, primal {dinf:.1e}, dual {pinf:.1e})"
            ));
        }
    }
    // SDPA reading: x = y, X = S, Y = X.
    let primal_objective = -p.b.dot(&y);
    for (yi, sc) in y.iter_mut().zip(&p.row_scale) {
        *yi /= sc;
    }
    let dual_objective = -dot(&p.c, &x);

    Ok(SdpSolution {
        x: y.iter().cloned().collect(),
        primal_blocks: s,
        dual_blocks: x,
        primal_objective,
        dual_objective,
        status,
        iterations,
        message,
    })
}

// ---------------------------------------------------------------------------
// Lifted-variable problems

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum BlockKind {
    Psd,
    /// A 2×2 principal-minor condition, handled as a small PSD block.
    SocpMinor,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SdpBlock {
    pub label: String,
    pub size: usize,
    pub kind: BlockKind,
}

/// Coefficient of lifted variable `var` at `(row, col)` of `block`
/// (`row <= col`; the matrix is symmetric).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub var: usize,
    pub coef: f64,
}

/// `minimize sum objective  s.t.  every block >= 0, every equation = 0`,
/// over lifted variables `y` with `y[0] = 1`.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    pub var_labels: Vec<String>,
    pub blocks: Vec<SdpBlock>,
    pub entries: Vec<BlockEntry>,
    pub objective: Vec<(usize, f64)>,
    /// Linear forms `sum coef * y[var]` constrained to zero.
    pub equations: Vec<Vec<(usize, f64)>>,
}

impl SdpProblem {
    pub fn nvars(&self) -> usize {
        self.var_labels.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// Block `k` evaluated at `y`.
    pub fn block_matrix(&self, k: usize, y: &[f64]) -> DMatrix<f64> {
        let n = self.blocks[k].size;
        let mut m = DMatrix::zeros(n, n);
        for e in self.entries.iter().filter(|e| e.block == k) {
            m[(e.row, e.col)] += e.coef * y[e.var];
            if e.row != e.col {
                m[(e.col, e.row)] += e.coef * y[e.var];
            }
        }
        m
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * y[v]).sum()
    }

    /// Largest violation of the linear equations at `y`.
    pub fn equation_residual(&self, y: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|eq| eq.iter().map(|&(v, c)| c * y[v]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all blocks at `y`.
    pub fn min_block_eigenvalue(&self, y: &[f64]) -> f64 {
        (0..self.blocks.len())
            .map(|k| min_eig(&self.block_matrix(k, y)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Eliminates the equations: `y[1..] = y_p + N z`. Returns the SDPA data
    /// in the free variables `z` together with the map back.
    pub fn presolve(&self) -> Result<Presolved, SdpError> {
        let nv = self.nvars();
        if nv == 0 {
            return Err(SdpError::Invalid("no lifted variables".into()));
        }
        let m = nv - 1;
        let (yp, null) = if self.equations.is_empty() {
            (DVector::zeros(m), DMatrix::identity(m, m))
        } else {
            let k = self.equations.len();
            let mut e = DMatrix::zeros(k, m);
            let mut rhs = DVector::zeros(k);
            for (r, eq) in self.equations.iter().enumerate() {
                for &(v, c) in eq {
                    if v == 0 {
                        rhs[r] -= c;
                    } else {
                        e[(r, v - 1)] += c;
                    }
                }
            }
            nullspace_affine(&e, &rhs)?
        };
        // Affine block data: G_0 + sum_i y_i G_i with y_i = yp_i + N_i. z.
        let mut by_var: Vec<Vec<&BlockEntry>> = vec![Vec::new(); nv];
        for e in &self.entries {
            by_var[e.var].push(e);
        }
        let mut f0: HashMap<(usize, usize, usize), f64> = HashMap::new();
        let add = |map: &mut HashMap<(usize, usize, usize), f64>, e: &BlockEntry, s: f64| {
            if s != 0.0 {
                *map.entry((e.block, e.row, e.col)).or_insert(0.0) += s * e.coef;
            }
        };
        for e in &by_var[0] {
            add(&mut f0, e, 1.0);
        }
        for i in 0..m {
            for e in &by_var[i + 1] {
                add(&mut f0, e, yp[i]);
            }
        }
        let nz = null.ncols();
        let mut fz: Vec<HashMap<(usize, usize, usize), f64>> = vec![HashMap::new(); nz];
        for i in 0..m {
            for j in 0..nz {
                let w = null[(i, j)];
                if w.abs() < 1e-15 {
                    continue;
                }
                for e in &by_var[i + 1] {
                    add(&mut fz[j], e, w);
                }
            }
        }
        let mut cfull = DVector::zeros(m);
        let mut offset = 0.0;
        for &(v, c) in &self.objective {
            if v == 0 {
                offset += c;
            } else {
                cfull[v - 1] += c;
            }
        }
        offset += cfull.dot(&yp);
        let mut cz = null.transpose() * &cfull;
        // Directions that touch no block are either irrelevant or unbounded.
        let live: Vec<usize> = (0..nz).filter(|&j| fz[j].values().any(|x| x.abs() > 1e-14)).collect();
        if let Some(j) = (0..nz).find(|j| !live.contains(j) && cz[*j].abs() > 1e-12) {
            return Err(SdpError::Invalid(format!("objective is unbounded along free direction {j}")));
        }
        let null = if live.len() == nz {
            null
        } else {
            fz = live.iter().map(|&j| std::mem::take(&mut fz[j])).collect();
            cz = DVector::from_iterator(live.len(), live.iter().map(|&j| cz[j]));
            null.select_columns(&live)
        };
        let mut entries = Vec::new();
        let sorted = |map: &HashMap<(usize, usize, usize), f64>| {
            let mut v: Vec<_> = map.iter().filter(|(_, &x)| x.abs() > 1e-14).map(|(&k, &x)| (k, x)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        for ((block, i, j), v) in sorted(&f0) {
            // SDPA: X = sum x F - F_0.
            entries.push(SdpaEntry { matno: 0, block, i, j, value: -v });
        }
        for (jz, map) in fz.iter().enumerate() {
            for ((block, i, j), v) in sorted(map) {
                entries.push(SdpaEntry { matno: jz + 1, block, i, j, value: v });
            }
        }
        let data = SdpaData {
            block_sizes: self.blocks.iter().map(|b| b.size as isize).collect(),
            c: cz.iter().cloned().collect(),
            entries,
        };
        Ok(Presolved {
            data,
            particular: yp,
            null,
            objective_offset: offset,
        })
    }
}

/// Output of [`SdpProblem::presolve`].
#[derive(Clone, Debug)]
pub struct Presolved {
    pub data: SdpaData,
    pub particular: DVector<f64>,
    pub null: DMatrix<f64>,
    /// Objective contribution of the constant and particular part.
    pub objective_offset: f64,
}

impl Presolved {
    /// Full lifted vector (with `y[0] = 1`) from the free variables.
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let y = &self.particular + &self.null * DVector::from_column_slice(z);
        std::iter::once(1.0).chain(y.iter().cloned()).collect()
    }
}

/// Particular solution and null-space basis of `E y = r` by reduced row
/// echelon form with full pivoting: pivot variables are expressed through
/// the free ones, which keeps the basis as sparse as the equations.
fn nullspace_affine(e: &DMatrix<f64>, r: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), SdpError> {
    let (k, m) = e.shape();
    let mut a = e.clone();
    let mut rhs = r.clone();
    let scale = a.amax().max(1e-300);
    let tol = 1e-11 * scale;
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut used_row = vec![false; k];
    let mut is_pivot = vec![false; m];
    loop {
        // Largest remaining entry.
        let mut best = (0.0, 0, 0);
        for i in (0..k).filter(|&i| !used_row[i]) {
            for j in (0..m).filter(|&j| !is_pivot[j]) {
                if a[(i, j)].abs() > best.0 {
                    best = (a[(i, j)].abs(), i, j);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        let (_, pr, pc) = best;
        let pv = a[(pr, pc)];
        for j in 0..m {
            a[(pr, j)] /= pv;
        }
        rhs[pr] /= pv;
        a[(pr, pc)] = 1.0;
        for i in 0..k {
            if i == pr {
                continue;
            }
            let f = a[(i, pc)];
            if f == 0.0 {
                continue;
            }
            for j in 0..m {
                let v = a[(pr, j)];
                if v != 0.0 {
                    a[(i, j)] -= f * v;
                }
            }
            a[(i, pc)] = 0.0;
            rhs[i] -= f * rhs[pr];
        }
        used_row[pr] = true;
        is_pivot[pc] = true;
        pivots.push((pr, pc));
    }
    // Rows without a pivot must read 0 = 0.
    let resid = (0..k).filter(|&i| !used_row[i]).map(|i| rhs[i].abs()).fold(0.0, f64::max);
    if resid > 1e-8 * (1.0 + r.amax()) {
        return Err(SdpError::InconsistentEqualities(resid));
    }
    let free: Vec<usize> = (0..m).filter(|&j| !is_pivot[j]).collect();
    let mut yp = DVector::zeros(m);
    let mut null = DMatrix::zeros(m, free.len());
    for (col, &f) in free.iter().enumerate() {
        null[(f, col)] = 1.0;
    }
    for &(pr, pc) in &pivots {
        yp[pc] = rhs[pr];
        for (col, &f) in free.iter().enumerate() {
            let v = a[(pr, f)];
            if v.abs() > 1e-15 {
                null[(pc, col)] = -v;
            }
        }
    }
    Ok((yp, null))
}

/// Solves a lifted-variable problem. `x` of the result is the full lifted
/// vector (`x[0] = 1`) and the objectives include the constant offset.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    let dim = problem.total_dim();
    if dim > opts.max_dim {
        return Err(SdpError::OverSize { dim, limit: opts.max_dim });
    }
    let pre = problem.presolve()?;
    let mut sol = solve_sdpa(&pre.data, opts)?;
    sol.x = pre.lift(&sol.x);
    sol.primal_objective += pre.objective_offset;
    sol.dual_objective += pre.objective_offset;
    Ok(sol)
}
