//! Total-degree homotopy continuation.
//!
//! The target `f` is deformed from the start system
//! `g_i(x) = a_i x_i^{d_i} - b_i` through
//!
//! ```text
//! H(x, t) = (1 - t) f(x) + eta * t * g(x),   t: 1 -> 0
//! ```
//!
//! with `a_i`, `b_i` and `eta` random unit-modulus complex numbers drawn from a
//! seeded generator. Each start root is tracked with an Euler predictor on
//! `H_x dx/dt = -H_t` and a short Newton corrector. Below `t = 0.01` the step
//! is taken in `s = -ln t`, which lets paths that run off to infinity do so
//! smoothly until the divergence bound catches them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{inf_norm, lu_solve, lu_solve_rtol};
use crate::network::{powerflow_system, Network};

/// Pivot threshold inside the tracker. Paths heading to infinity become badly
/// scaled in affine coordinates (pivot ratios far below machine epsilon)
/// long before they reach the divergence bound, so only exactly zero pivots
/// or non-finite solves stop a step; corrector convergence decides the rest.
const TRACK_PIVOT_RTOL: f64 = 0.0;
use crate::poly::{Coeff, CompiledSystem, PolySystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("system is not square ({equations} equations, {unknowns} unknowns)")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("equation {0} is constant; total-degree homotopy needs degree >= 1")]
    ConstantEquation(usize),
    #[error("binomial bound needs at least 2 buses, got {0}")]
    TooFewBuses(usize),
    #[error("start root dimension {got} does not match system size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

/// Classical Bézout bound: the product of the equation degrees.
pub fn cbb<C: Coeff>(sys: &PolySystem<C>) -> u128 {
    sys.degrees().iter().map(|&d| d as u128).product()
}

/// `C(2n - 2, n - 1)`, the bound on isolated power-flow solutions of an
/// `n`-bus network.
pub fn binomial_bound(n_buses: usize) -> Result<u128, HomotopyError> {
    if n_buses < 2 {
        return Err(HomotopyError::TooFewBuses(n_buses));
    }
    let (n, k) = (2 * n_buses as u128 - 2, n_buses as u128 - 1);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    Ok(c)
}

/// `g_i(x) = a_i x_i^{d_i} - b_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StartSystem {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub degrees: Vec<u32>,
}

impl StartSystem {
    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|i| self.a[i] * x[i].powu(self.degrees[i]) - self.b[i])
            .collect()
    }

    /// Diagonal of the Jacobian.
    pub fn eval_diag_jacobian(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|i| {
                let d = self.degrees[i];
                self.a[i] * d as f64 * x[i].powu(d - 1)
            })
            .collect()
    }

    /// All `prod d_i` roots, last coordinate varying fastest.
    pub fn roots(&self) -> Vec<Vec<Complex64>> {
        let per_coord: Vec<Vec<Complex64>> = (0..self.degrees.len())
            .map(|i| {
                let d = self.degrees[i];
                let base = (self.b[i] / self.a[i]).powf(1.0 / d as f64);
                (0..d)
                    .map(|k| base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<Complex64>> = vec![vec![]];
        for choices in &per_coord {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |&c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

fn unit_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

fn check_square<C: Coeff>(target: &PolySystem<C>) -> Result<(), HomotopyError> {
    if !target.is_square() {
        return Err(HomotopyError::NotSquare {
            equations: target.len(),
            unknowns: target.nvars(),
        });
    }
    if let Some(i) = target.degrees().iter().position(|&d| d == 0) {
        return Err(HomotopyError::ConstantEquation(i));
    }
    Ok(())
}

/// Random start system matched to the target's degrees, with all its roots.
pub fn make_start_system<C: Coeff>(
    target: &PolySystem<C>,
    seed: u64,
) -> Result<(StartSystem, Vec<Vec<Complex64>>), HomotopyError> {
    check_square(target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = target.degrees();
    let a = (0..degrees.len()).map(|_| unit_complex(&mut rng)).collect();
    let b = (0..degrees.len()).map(|_| unit_complex(&mut rng)).collect();
    let start = StartSystem { a, b, degrees };
    let roots = start.roots();
    Ok((start, roots))
}

/// The `eta` multiplier for a seed; drawn from a stream independent of the
/// start-system coefficients.
pub fn draw_eta(seed: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    unit_complex(&mut rng)
}

pub struct Homotopy {
    target: CompiledSystem,
    start: StartSystem,
    eta: Complex64,
}

impl Homotopy {
    pub fn new<C: Coeff>(target: &PolySystem<C>, start: StartSystem, eta: Complex64) -> Result<Self, HomotopyError> {
        check_square(target)?;
        if start.degrees.len() != target.nvars() {
            return Err(HomotopyError::DimensionMismatch {
                expected: target.nvars(),
                got: start.degrees.len(),
            });
        }
        Ok(Homotopy {
            target: target.compile(),
            start,
            eta,
        })
    }

    pub fn nvars(&self) -> usize {
        self.target.nvars()
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    /// `H(x, t)`, `H_x` and `H_t`.
    fn eval(&self, x: &[Complex64], t: f64) -> (Vec<Complex64>, DMatrix<Complex64>, Vec<Complex64>) {
        let n = x.len();
        let (f, jf) = self.target.eval_with_jacobian(x);
        let g = self.start.eval(x);
        let jg = self.start.eval_diag_jacobian(x);
        let et = self.eta * t;
        let h = (0..n).map(|i| f[i] * (1.0 - t) + et * g[i]).collect();
        let hx = DMatrix::from_fn(n, n, |i, j| {
            let mut v = jf[i][j] * (1.0 - t);
            if i == j {
                v += et * jg[i];
            }
            v
        });
        let ht = (0..n).map(|i| self.eta * g[i] - f[i]).collect();
        (h, hx, ht)
    }

    fn tangent(&self, x: &[Complex64], t: f64) -> Option<DVector<Complex64>> {
        let (_, hx, ht) = self.eval(x, t);
        let rhs = DVector::from_iterator(x.len(), ht.iter().map(|v| -v));
        lu_solve_rtol(&hx, &rhs, TRACK_PIVOT_RTOL)
    }

    /// Newton at fixed `t`; succeeds when an update is below `tol * (1 + |x|)`.
    ///
    /// The tolerance is floored at `100 ε κ(H_x)`, the accuracy a linear solve
    /// can actually deliver. Paths running off to infinity are increasingly
    /// ill-conditioned in affine coordinates, and a fixed relative tolerance
    /// would stall them long before the divergence bound.
    fn correct(&self, x: &mut [Complex64], t: f64, iters: usize, tol: f64) -> bool {
        let mut tol_eff = tol;
        for k in 0..iters {
            let (h, hx, _) = self.eval(x, t);
            if k == 0 {
                tol_eff = tol.max(100.0 * f64::EPSILON * condition(&hx));
            }
            let rhs = DVector::from_iterator(x.len(), h.iter().map(|v| -v));
            let Some(dx) = lu_solve_rtol(&hx, &rhs, TRACK_PIVOT_RTOL) else {
                return false;
            };
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi += d;
            }
            let step = dx.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !step.is_finite() {
                return false;
            }
            if step <= tol_eff * (1.0 + inf_norm(x)) {
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerOptions {
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_init: f64,
    /// Newton iterations allowed per corrector call.
    pub corrector_iters: usize,
    /// Relative corrector tolerance before the endgame.
    pub corrector_tol: f64,
    /// Relative corrector tolerance inside the endgame.
    pub endgame_tol: f64,
    /// `t` below which steps are taken in `-ln t`.
    pub endgame_start: f64,
    /// Tracking stops at this `t`, followed by Newton on the target.
    pub t_final: f64,
    /// Iterates with ∞-norm above this count as diverged.
    pub divergence_bound: f64,
    /// Residual ∞-norm required of a converged endpoint.
    pub end_tol: f64,
    /// Jacobian condition number above which an endpoint is flagged singular.
    pub singular_cond: f64,
    pub max_steps: usize,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            dt_min: 1e-7,
            dt_max: 0.1,
            dt_init: 0.01,
            corrector_iters: 3,
            corrector_tol: 1e-9,
            endgame_tol: 1e-12,
            endgame_start: 0.01,
            t_final: 1e-30,
            divergence_bound: 1e8,
            end_tol: 1e-10,
            singular_cond: 1e12,
            max_steps: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Converged,
    Diverged,
    TrackingFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathResult {
    pub start_index: usize,
    #[serde(skip)]
    pub endpoint: Vec<Complex64>,
    pub status: PathStatus,
    /// ∞-norm of the target at the endpoint.
    pub residual: f64,
    pub steps: usize,
    /// Value of `t` where tracking stopped (`t_final` for completed paths).
    pub t: f64,
    /// Jacobian condition at the endpoint exceeded the singular threshold.
    pub singular: bool,
}

pub fn track_path(h: &Homotopy, start_index: usize, start_root: &[Complex64], opts: &TrackerOptions) -> PathResult {
    let mut x = start_root.to_vec();
    let mut t = 1.0f64;
    let mut step = opts.dt_init;
    let mut log_step = opts.dt_init;
    let mut streak = 0usize;
    let mut steps = 0usize;
    let finish = |x: Vec<Complex64>, status, steps, t| {
        let residual = inf_norm(&h.target.eval(&x));
        PathResult {
            start_index,
            endpoint: x,
            status,
            residual,
            steps,
            t,
            singular: false,
        }
    };
    while t > opts.t_final {
        if inf_norm(&x) > opts.divergence_bound {
            return finish(x, PathStatus::Diverged, steps, t);
        }
        if steps >= opts.max_steps {
            return finish(x, PathStatus::TrackingFailed, steps, t);
        }
        steps += 1;
        let in_endgame = t <= opts.endgame_start * (1.0 + 1e-12);
        let (t_new, tol) = if in_endgame {
            ((t * (-log_step).exp()).max(opts.t_final), opts.endgame_tol)
        } else {
            ((t - step).max(opts.endgame_start), opts.corrector_tol)
        };
        let mut xp = x.clone();
        let ok = match h.tangent(&x, t) {
            Some(dx) => {
                for (xi, d) in xp.iter_mut().zip(dx.iter()) {
                    *xi += d * (t_new - t);
                }
                h.correct(&mut xp, t_new, opts.corrector_iters, tol)
            }
            None => false,
        };
        let size = if in_endgame { &mut log_step } else { &mut step };
        if ok {
            x = xp;
            t = t_new;
            streak += 1;
            if streak >= 4 {
                *size = (*size * 1.5).min(opts.dt_max);
                streak = 0;
            }
        } else {
            streak = 0;
            *size *= 0.5;
            if *size < opts.dt_min {
                return finish(x, PathStatus::TrackingFailed, steps, t);
            }
        }
    }
    if inf_norm(&x) > opts.divergence_bound {
        return finish(x, PathStatus::Diverged, steps, t);
    }
    // Polish on the target itself.
    let n = x.len();
    let mut singular = false;
    for _ in 0..10 {
        let (f, j) = h.target.eval_with_jacobian(&x);
        if inf_norm(&f) <= opts.end_tol * 1e-3 {
            break;
        }
        let jm = DMatrix::from_fn(n, n, |a, b| j[a][b]);
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        match lu_solve(&jm, &rhs) {
            Some(dx) => {
                for (xi, d) in x.iter_mut().zip(dx.iter()) {
                    *xi += d;
                }
            }
            None => {
                singular = true;
                break;
            }
        }
    }
    let (f, j) = h.target.eval_with_jacobian(&x);
    let residual = inf_norm(&f);
    if !singular {
        singular = condition(&DMatrix::from_fn(n, n, |a, b| j[a][b])) > opts.singular_cond;
    }
    let status = if residual <= opts.end_tol && x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        PathStatus::Converged
    } else {
        PathStatus::TrackingFailed
    };
    PathResult {
        start_index,
        endpoint: x,
        status,
        residual,
        steps,
        t,
        singular,
    }
}

/// 2-norm condition number via singular values.
fn condition(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tracker: TrackerOptions,
    /// Endpoints closer than this (∞-norm) are the same solution.
    pub dedupe_tol: f64,
    /// Relative imaginary-part threshold for real solutions.
    pub real_tol: f64,
    /// Worker threads for path tracking; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tracker: TrackerOptions::default(),
            dedupe_tol: 1e-6,
            real_tol: 1e-6,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    #[serde(skip)]
    pub point: Vec<Complex64>,
    pub residual: f64,
    pub is_real: bool,
    pub singular: bool,
    /// Number of paths that ended here.
    pub arrivals: usize,
}

impl Solution {
    pub fn real_part(&self) -> Vec<f64> {
        self.point.iter().map(|v| v.re).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub cbb: u128,
    /// Only known for power-flow systems.
    pub binomial: Option<u128>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub paths_tracked: usize,
    pub converged: usize,
    pub diverged: usize,
    pub tracking_failed: usize,
    pub singular: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionSet {
    pub complex_solutions: Vec<Solution>,
    /// Real parts of the solutions classified as real.
    pub real_solutions: Vec<Vec<f64>>,
    pub bounds: Bounds,
    pub diagnostics: Diagnostics,
    pub seed: u64,
    #[serde(skip)]
    pub paths: Vec<PathResult>,
}

impl SolutionSet {
    pub fn n_found(&self) -> usize {
        self.complex_solutions.len()
    }
}

/// Tracks every start root and collects the distinct finite endpoints.
pub fn solve_all<C: Coeff>(target: &PolySystem<C>, seed: u64, opts: &SolveOptions) -> Result<SolutionSet, HomotopyError> {
    let (start, roots) = make_start_system(target, seed)?;
    let h = Homotopy::new(target, start, draw_eta(seed))?;
    let run = || -> Vec<PathResult> {
        roots
            .par_iter()
            .enumerate()
            .map(|(i, r)| track_path(&h, i, r, &opts.tracker))
            .collect()
    };
    let paths = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HomotopyError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut diag = Diagnostics {
        paths_tracked: paths.len(),
        ..Default::default()
    };
    for p in &paths {
        match p.status {
            PathStatus::Converged => diag.converged += 1,
            PathStatus::Diverged => diag.diverged += 1,
            PathStatus::TrackingFailed => diag.tracking_failed += 1,
        }
        if p.singular {
            diag.singular += 1;
        }
    }

    let mut ends: Vec<&PathResult> = paths.iter().filter(|p| p.status == PathStatus::Converged).collect();
    ends.sort_by(|a, b| canonical_key(&a.endpoint).partial_cmp(&canonical_key(&b.endpoint)).unwrap());
    let mut sols: Vec<Solution> = Vec::new();
    for p in ends {
        if let Some(s) = sols.iter_mut().find(|s| dist(&s.point, &p.endpoint) < opts.dedupe_tol) {
            s.arrivals += 1;
            continue;
        }
        let norm = inf_norm(&p.endpoint);
        let max_im = p.endpoint.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        sols.push(Solution {
            point: p.endpoint.clone(),
            residual: p.residual,
            is_real: max_im < opts.real_tol * (1.0 + norm),
            singular: p.singular,
            arrivals: 1,
        });
    }
    let real_solutions = sols.iter().filter(|s| s.is_real).map(|s| s.real_part()).collect();
    Ok(SolutionSet {
        complex_solutions: sols,
        real_solutions,
        bounds: Bounds {
            cbb: cbb(target),
            binomial: None,
        },
        diagnostics: diag,
        seed,
        paths,
    })
}

/// [`solve_all`] on the power-flow equations of `net`, with the binomial
/// bound attached.
pub fn solve_powerflow(net: &Network, seed: u64, opts: &SolveOptions) -> Result<SolutionSet, HomotopyError> {
    let mut set = solve_all(&powerflow_system(net), seed, opts)?;
    set.bounds.binomial = Some(binomial_bound(net.nbuses())?);
    Ok(set)
}

/// Lexicographic key over (Re, Im) rounded to 1e-8, so that the merge order
/// does not depend on which thread finished first.
fn canonical_key(x: &[Complex64]) -> Vec<f64> {
    let r = |v: f64| (v * 1e8).round() / 1e8;
    x.iter().flat_map(|v| [r(v.re), r(v.im)]).collect()
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
