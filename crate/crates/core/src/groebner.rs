//! Gröbner bases over the rationals.
//!
//! [`buchberger`] computes the reduced basis of an [`Ideal`] with the normal
//! selection strategy and the Gebauer–Möller pair update (which applies both
//! of Buchberger's criteria). Under a lex order the basis is triangular:
//! [`eliminate`] picks out the generators free of the leading variables and
//! [`triangular_solve`] back-substitutes numerically, level by level, using
//! [`univariate_roots`].
//!
//! The module also builds the two-bus equivalencing and saddle-node
//! bifurcation ideals and samples the curves they define.

use std::cmp::Ordering;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::poly::{rational_to_f64, Coeff, Monomial, MonomialOrder, PolyError, Polynomial, QPoly, Rational, Ring};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroebnerError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("ideal has no generators")]
    EmptyIdeal,
    #[error("pair budget of {budget} exhausted; basis is incomplete")]
    BudgetExceeded { budget: usize, partial: Box<GroebnerBasis> },
    #[error("operation requires a lex order")]
    NotLex,
    #[error("ideal is not zero-dimensional (variable `{0}` is free)")]
    NotZeroDimensional(String),
    #[error("polynomial has degree 0; nothing to solve")]
    ConstantPolynomial,
}

/// Generators and the monomial order they are to be processed under.
#[derive(Clone, Debug, PartialEq)]
pub struct Ideal {
    pub ring: Arc<Ring>,
    pub generators: Vec<QPoly>,
    pub order: MonomialOrder,
}

impl Ideal {
    /// Zero generators are dropped.
    pub fn new(ring: &Arc<Ring>, generators: Vec<QPoly>, order: MonomialOrder) -> Result<Self, GroebnerError> {
        if order.nvars() != ring.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: ring.nvars(),
                got: order.nvars(),
            }
            .into());
        }
        if generators.iter().any(|g| g.ring() != ring) {
            return Err(PolyError::RingMismatch.into());
        }
        Ok(Ideal {
            ring: ring.clone(),
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
            order,
        })
    }

    /// Fixes the named variables to rational values and drops them from the
    /// ring; the order on the remaining variables is inherited.
    pub fn specialize(&self, values: &[(&str, Rational)]) -> Result<Ideal, GroebnerError> {
        let mut fixed: Vec<Option<Rational>> = vec![None; self.ring.nvars()];
        for (name, v) in values {
            let i = self
                .ring
                .index_of(name)
                .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
            fixed[i] = Some(v.clone());
        }
        let keep: Vec<usize> = (0..self.ring.nvars()).filter(|&i| fixed[i].is_none()).collect();
        let names: Vec<&str> = keep.iter().map(|&i| self.ring.name(i)).collect();
        let ring = Ring::new(&names)?;
        let new_index = |old: usize| keep.iter().position(|&k| k == old).unwrap();
        let mut gens = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let mut p = g.clone();
            for (i, v) in fixed.iter().enumerate() {
                if let Some(v) = v {
                    p = p.substitute(i, v);
                }
            }
            let terms = p.terms().iter().map(|(m, c)| {
                let e: Vec<u32> = keep.iter().map(|&k| m.0[k]).collect();
                (Monomial(e), c.clone())
            });
            gens.push(Polynomial::from_terms(&ring, terms));
        }
        let prec: Vec<usize> = self
            .order
            .precedence()
            .iter()
            .filter(|&&v| fixed[v].is_none())
            .map(|&v| new_index(v))
            .collect();
        let order = if self.order.is_lex() {
            MonomialOrder::lex(prec)?
        } else {
            MonomialOrder::graded_lex(prec)?
        };
        Ideal::new(&ring, gens, order)
    }
}

/// A reduced, monic Gröbner basis, sorted by ascending leading monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct GroebnerBasis {
    pub ring: Arc<Ring>,
    pub basis: Vec<QPoly>,
    pub order: MonomialOrder,
    /// False when the pair budget ran out (the list is then only a partial
    /// basis and is not reduced).
    pub complete: bool,
    pub pairs_processed: usize,
    pub zero_reductions: usize,
}

impl GroebnerBasis {
    /// True when the basis is `{1}`.
    pub fn is_unit(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].total_degree() == Some(0)
    }

    /// Remainder of `p` on division by the basis.
    pub fn reduce(&self, p: &QPoly) -> Result<QPoly, GroebnerError> {
        Ok(p.divide(&self.basis, &self.order)?.1)
    }

    pub fn contains(&self, p: &QPoly) -> Result<bool, GroebnerError> {
        Ok(self.reduce(p)?.is_zero())
    }

    /// Text rendering, one generator per line, terms in the basis order.
    pub fn to_text(&self) -> String {
        self.basis
            .iter()
            .map(|g| g.to_text_with(&self.order))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuchbergerOptions {
    /// Maximum number of S-pairs to reduce.
    pub max_pairs: usize,
}

impl Default for BuchbergerOptions {
    fn default() -> Self {
        BuchbergerOptions { max_pairs: 1_000_000 }
    }
}

/// `S(p, q) = (L / lt(p)) p - (L / lt(q)) q` with `L` the lcm of the leading
/// monomials.
pub fn s_polynomial<C: Coeff>(p: &Polynomial<C>, q: &Polynomial<C>, ord: &MonomialOrder) -> Result<Polynomial<C>, GroebnerError> {
    let (mp, cp) = p.leading_term(ord)?;
    let (mq, cq) = q.leading_term(ord)?;
    let l = mp.lcm(&mq);
    let a = p.mul_term(&l.checked_div(&mp).unwrap(), &cp.inv());
    let b = q.mul_term(&l.checked_div(&mq).unwrap(), &cq.inv());
    Ok(a.try_sub(&b)?)
}

// ---------------------------------------------------------------------------
// Internal representation: exponents permuted into precedence order, terms in
// descending order, so lex comparison is plain slice comparison.

type Exp = Vec<u32>;

#[derive(Clone, Copy)]
struct Ord2 {
    graded: bool,
}

impl Ord2 {
    fn cmp(self, a: &[u32], b: &[u32]) -> Ordering {
        if self.graded {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| a.cmp(b))
        } else {
            a.cmp(b)
        }
    }
}

#[derive(Clone, Debug)]
struct GPoly {
    /// Descending; the leading term is first.
    terms: Vec<(Exp, Rational)>,
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn sub_exp(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_exp(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl GPoly {
    fn lm(&self) -> &Exp {
        &self.terms[0].0
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn make_monic(&mut self) {
        let inv = self.terms[0].1.recip();
        if !Coeff::is_one(&inv) {
            for (_, c) in &mut self.terms {
                *c *= &inv;
            }
        }
    }

    /// `self - c * x^shift * g` where `g` is monic.
    fn sub_mul(&self, c: &Rational, shift: &[u32], g: &GPoly, ord: Ord2) -> GPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut i = 0;
        let mut j = 0;
        let shifted: Vec<Exp> = g.terms.iter().map(|(e, _)| add_exp(e, shift)).collect();
        while i < self.terms.len() || j < g.terms.len() {
            let o = if i == self.terms.len() {
                Ordering::Less
            } else if j == g.terms.len() {
                Ordering::Greater
            } else {
                ord.cmp(&self.terms[i].0, &shifted[j])
            };
            match o {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((shifted[j].clone(), -(c * &g.terms[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = &self.terms[i].1 - c * &g.terms[j].1;
                    if !Coeff::is_zero(&v) {
                        out.push((self.terms[i].0.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        GPoly { terms: out }
    }
}

struct Converter {
    /// `perm[k]` = ring variable at precedence position `k`.
    perm: Vec<usize>,
    ord: Ord2,
}

impl Converter {
    fn new(order: &MonomialOrder) -> Self {
        Converter {
            perm: order.precedence().to_vec(),
            ord: Ord2 { graded: !order.is_lex() },
        }
    }

    fn to_internal(&self, p: &QPoly) -> GPoly {
        let mut terms: Vec<(Exp, Rational)> = p
            .terms()
            .iter()
            .map(|(m, c)| (self.perm.iter().map(|&v| m.0[v]).collect(), c.clone()))
            .collect();
        terms.sort_by(|a, b| self.ord.cmp(&b.0, &a.0));
        GPoly { terms }
    }

    fn to_external(&self, ring: &Arc<Ring>, p: &GPoly) -> QPoly {
        let n = self.perm.len();
        let terms = p.terms.iter().map(|(e, c)| {
            let mut m = vec![0u32; n];
            for (k, &v) in self.perm.iter().enumerate() {
                m[v] = e[k];
            }
            (Monomial(m), c.clone())
        });
        Polynomial::from_terms(ring, terms)
    }
}

/// Full reduction of `p` by the polynomials `basis[i]` for `i` in `active`.
fn normal_form(p: GPoly, store: &[GPoly], active: &[usize], ord: Ord2) -> GPoly {
    let mut p = p;
    let mut done: Vec<(Exp, Rational)> = Vec::new();
    while !p.is_zero() {
        let (lm, lc) = (&p.terms[0].0, &p.terms[0].1);
        let hit = active.iter().find(|&&i| divides(store[i].lm(), lm));
        match hit {
            Some(&i) => {
                let shift = sub_exp(lm, store[i].lm());
                let c = lc.clone();
                p = p.sub_mul(&c, &shift, &store[i], ord);
            }
            None => {
                done.push(p.terms.remove(0));
            }
        }
    }
    GPoly { terms: done }
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Exp,
}

/// Gebauer–Möller update: adds `h` (index into `store`) to the basis `g`,
/// pruning pairs with the chain and coprime criteria.
fn update(store: &[GPoly], g: &mut Vec<usize>, pairs: &mut Vec<Pair>, h: usize) {
    let lh = store[h].lm().clone();
    let mut c: Vec<(usize, Exp)> = g.iter().map(|&k| (k, lcm(&lh, store[k].lm()))).collect();
    let mut d: Vec<(usize, Exp)> = Vec::new();
    while let Some((k, l)) = c.pop() {
        let keep = coprime(&lh, store[k].lm())
            || (!c.iter().any(|(_, l2)| divides(l2, &l)) && !d.iter().any(|(_, l2)| divides(l2, &l)));
        if keep {
            d.push((k, l));
        }
    }
    let e: Vec<(usize, Exp)> = d.into_iter().filter(|(k, _)| !coprime(&lh, store[*k].lm())).collect();
    pairs.retain(|p| {
        !divides(&lh, &p.lcm)
            || lcm(store[p.i].lm(), &lh) == p.lcm
            || lcm(&lh, store[p.j].lm()) == p.lcm
    });
    pairs.extend(e.into_iter().map(|(k, l)| Pair { i: k, j: h, lcm: l }));
    g.retain(|&k| !divides(&lh, store[k].lm()));
    g.push(h);
}

/// Reduced Gröbner basis of `ideal`.
pub fn buchberger(ideal: &Ideal, opts: &BuchbergerOptions) -> Result<GroebnerBasis, GroebnerError> {
    if ideal.generators.is_empty() {
        return Err(GroebnerError::EmptyIdeal);
    }
    let conv = Converter::new(&ideal.order);
    let ord = conv.ord;
    let mut store: Vec<GPoly> = Vec::new();
    let mut g: Vec<usize> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    for f in &ideal.generators {
        let h = normal_form(conv.to_internal(f), &store, &g, ord);
        if h.is_zero() {
            continue;
        }
        let mut h = h;
        h.make_monic();
        store.push(h);
        update(&store, &mut g, &mut pairs, store.len() - 1);
    }
    let mut processed = 0usize;
    let mut zeros = 0usize;
    while !pairs.is_empty() {
        if processed >= opts.max_pairs {
            let partial = GroebnerBasis {
                ring: ideal.ring.clone(),
                basis: g.iter().map(|&i| conv.to_external(&ideal.ring, &store[i])).collect(),
                order: ideal.order.clone(),
                complete: false,
                pairs_processed: processed,
                zero_reductions: zeros,
            };
            return Err(GroebnerError::BudgetExceeded {
                budget: opts.max_pairs,
                partial: Box::new(partial),
            });
        }
        // Normal strategy: smallest lcm first; ties by creation order.
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                ord.cmp(&pairs[a].lcm, &pairs[b].lcm)
                    .then_with(|| (pairs[a].j, pairs[a].i).cmp(&(pairs[b].j, pairs[b].i)))
            })
            .unwrap();
        let pair = pairs.swap_remove(best);
        processed += 1;
        let (p, q) = (&store[pair.i], &store[pair.j]);
        let sp = GPoly { terms: vec![] }
            .sub_mul(&-<Rational as Coeff>::one(), &sub_exp(&pair.lcm, p.lm()), p, ord)
            .sub_mul(&<Rational as Coeff>::one(), &sub_exp(&pair.lcm, q.lm()), q, ord);
        let h = normal_form(sp, &store, &g, ord);
        if h.is_zero() {
            zeros += 1;
            continue;
        }
        let mut h = h;
        h.make_monic();
        store.push(h);
        update(&store, &mut g, &mut pairs, store.len() - 1);
    }
    // Interreduce: g is already minimal (update drops elements whose leading
    // monomial is divisible by a newer one); tail-reduce each against the rest.
    let mut reduced: Vec<GPoly> = Vec::with_capacity(g.len());
    for (k, &i) in g.iter().enumerate() {
        let others: Vec<usize> = g.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, &j)| j).collect();
        let mut p = store[i].clone();
        let head = p.terms.remove(0);
        let tail = normal_form(p, &store, &others, ord);
        let mut terms = vec![head];
        terms.extend(tail.terms);
        reduced.push(GPoly { terms });
    }
    reduced.sort_by(|a, b| ord.cmp(a.lm(), b.lm()));
    Ok(GroebnerBasis {
        ring: ideal.ring.clone(),
        basis: reduced.iter().map(|p| conv.to_external(&ideal.ring, p)).collect(),
        order: ideal.order.clone(),
        complete: true,
        pairs_processed: processed,
        zero_reductions: zeros,
    })
}

/// Basis elements involving only the `keep_last_k` lowest variables of the
/// lex order (the elimination ideal).
pub fn eliminate(gb: &GroebnerBasis, keep_last_k: usize) -> Result<Vec<QPoly>, GroebnerError> {
    if !gb.order.is_lex() {
        return Err(GroebnerError::NotLex);
    }
    let prec = gb.order.precedence();
    let k = keep_last_k.min(prec.len());
    let dropped = &prec[..prec.len() - k];
    Ok(gb
        .basis
        .iter()
        .filter(|p| p.terms().iter().all(|(m, _)| dropped.iter().all(|&v| m.0[v] == 0)))
        .cloned()
        .collect())
}

// ---------------------------------------------------------------------------
// Univariate roots

/// Roots of `sum coeffs[k] x^k` (lowest degree first) from the eigenvalues of
/// the balanced companion matrix, polished by Newton's method.
pub fn roots_of_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * scale {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    // Zero roots factor out exactly.
    let zeros = c.iter().take_while(|v| v.norm() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let c = &c[zeros..];
    let d = c.len() - 1;
    if d == 1 {
        roots.push(-c[0] / c[1]);
    } else if d > 1 {
        let lead = c[d];
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for i in 1..d {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..d {
            m[(i, d - 1)] = -c[i] / lead;
        }
        balance(&mut m);
        let eig = m
            .clone()
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular");
        roots.extend(eig.iter().map(|&z| polish(c, z)));
    }
    roots
}

/// Parlett–Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let rr = r;
            while cc < rr / radix {
                f *= radix;
                cc *= radix * radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix * radix;
            }
            if (cc + rr) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Newton polish; keeps an update only while it reduces |p(z)|.
fn polish(c: &[Complex64], z0: Complex64) -> Complex64 {
    let mut z = z0;
    let (mut pz, _) = horner(c, z);
    for _ in 0..20 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let zn = z - p / dp;
        let (pn, _) = horner(c, zn);
        if pn.norm() < pz.norm() {
            z = zn;
            pz = pn;
            if (p / dp).norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        } else {
            break;
        }
    }
    z
}

/// All complex roots (with multiplicity) of a polynomial in one variable.
pub fn univariate_roots<C: Coeff>(p: &Polynomial<C>) -> Result<Vec<Complex64>, GroebnerError> {
    let vars = p.variables();
    match vars.len() {
        0 => Err(GroebnerError::ConstantPolynomial),
        1 => {
            let coeffs: Vec<Complex64> = p.univariate_coeffs(vars[0])?.iter().map(|c| c.to_complex()).collect();
            Ok(roots_of_coeffs(&coeffs))
        }
        _ => Err(PolyError::NotUnivariate.into()),
    }
}

// ---------------------------------------------------------------------------
// Triangular back-substitution

#[derive(Clone, Debug, PartialEq)]
pub struct TriangularSolveResult {
    /// Solutions in ring variable order.
    pub solutions: Vec<Vec<Complex64>>,
    /// Degree of the univariate polynomial solved at each level, from the
    /// lowest lex variable up (maximum over branches).
    pub level_degrees: Vec<usize>,
}

impl TriangularSolveResult {
    /// Solutions whose imaginary parts are below `tol * (1 + |x|)`.
    pub fn real_solutions(&self, tol: f64) -> Vec<Vec<f64>> {
        self.solutions
            .iter()
            .filter(|s| {
                let n = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
                s.iter().all(|v| v.im.abs() < tol * (1.0 + n))
            })
            .map(|s| s.iter().map(|v| v.re).collect())
            .collect()
    }
}

fn eval_partial(p: &QPoly, var: usize, known: &[Option<Complex64>]) -> Vec<Complex64> {
    let deg = p.degree_in(var) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (m, c) in p.terms() {
        let mut v = Complex64::new(rational_to_f64(c), 0.0);
        for (k, &e) in m.0.iter().enumerate() {
            if k != var && e > 0 {
                v *= known[k].expect("lower variables are known").powu(e);
            }
        }
        out[m.0[var] as usize] += v;
    }
    out
}

fn coeff_scale(p: &QPoly, known: &[Option<Complex64>]) -> f64 {
    // Magnitude of the largest term at the current point, for relative tests.
    p.terms()
        .iter()
        .map(|(m, c)| {
            let mut v = rational_to_f64(c).abs();
            for (k, &e) in m.0.iter().enumerate() {
                if let Some(x) = known[k] {
                    v *= x.norm().max(1.0).powi(e as i32);
                }
            }
            v
        })
        .fold(0.0, f64::max)
}

/// All complex solutions of a zero-dimensional ideal from its lex basis.
pub fn triangular_solve(gb: &GroebnerBasis) -> Result<TriangularSolveResult, GroebnerError> {
    if !gb.order.is_lex() {
        return Err(GroebnerError::NotLex);
    }
    let n = gb.ring.nvars();
    if gb.is_unit() {
        return Ok(TriangularSolveResult {
            solutions: vec![],
            level_degrees: vec![],
        });
    }
    // Zero-dimensionality: every variable is the only one in some leading monomial.
    for v in 0..n {
        let pure = gb.basis.iter().any(|p| {
            let lm = p.leading_monomial(&gb.order).unwrap();
            lm.0[v] > 0 && lm.0.iter().enumerate().all(|(k, &e)| k == v || e == 0)
        });
        if !pure {
            return Err(GroebnerError::NotZeroDimensional(gb.ring.name(v).to_string()));
        }
    }
    let levels: Vec<usize> = gb.order.precedence().iter().rev().cloned().collect();
    // Basis elements whose highest variable (in precedence) is levels[l].
    let mut by_level: Vec<Vec<&QPoly>> = vec![Vec::new(); n];
    for p in &gb.basis {
        let top = levels.iter().rposition(|&v| p.degree_in(v) > 0).unwrap_or(0);
        by_level[top].push(p);
    }
    let mut level_degrees = vec![0usize; n];
    let mut partial: Vec<Vec<Option<Complex64>>> = vec![vec![None; n]];
    for (l, &var) in levels.iter().enumerate() {
        let mut next = Vec::new();
        for known in &partial {
            let polys: Vec<(Vec<Complex64>, f64)> = by_level[l]
                .iter()
                .map(|p| (eval_partial(p, var, known), coeff_scale(p, known)))
                .collect();
            // Pick the lowest-degree polynomial that does not vanish here.
            let effective = |c: &[Complex64], s: f64| c.iter().rposition(|v| v.norm() > 1e-10 * s.max(1e-300));
            let Some((coeffs, _)) = polys
                .iter()
                .filter_map(|(c, s)| effective(c, *s).filter(|&d| d > 0).map(|d| (&c[..=d], d)))
                .min_by_key(|&(_, d)| d)
            else {
                // Nothing constrains this variable on this branch.
                if polys.iter().all(|(c, s)| effective(c, *s).is_none()) {
                    return Err(GroebnerError::NotZeroDimensional(gb.ring.name(var).to_string()));
                }
                continue; // a non-zero constant: inconsistent branch
            };
            level_degrees[l] = level_degrees[l].max(coeffs.len() - 1);
            for z in roots_of_coeffs(coeffs) {
                let ok = polys.iter().all(|(c, s)| {
                    let (v, _) = horner(c, z);
                    v.norm() <= 1e-6 * s.max(1.0) * (1.0 + z.norm()).powi(c.len() as i32)
                });
                if ok {
                    let mut k = known.clone();
                    k[var] = Some(z);
                    next.push(k);
                }
            }
        }
        partial = next;
    }
    let mut solutions: Vec<Vec<Complex64>> = Vec::new();
    for s in partial {
        let s: Vec<Complex64> = s.into_iter().map(|v| v.unwrap()).collect();
        if !solutions
            .iter()
            .any(|t| t.iter().zip(&s).all(|(a, b)| (a - b).norm() < 1e-8 * (1.0 + a.norm())))
        {
            solutions.push(s);
        }
    }
    Ok(TriangularSolveResult {
        solutions,
        level_degrees,
    })
}

// ---------------------------------------------------------------------------
// Inequalities and the two-bus builders

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// `p >= bound`
    AtLeast,
    /// `p <= bound`
    AtMost,
}

/// Appends `p - bound - s^2` (or `bound - p - s^2`) with a fresh variable
/// `s`, placed first in the order so it is eliminated first.
pub fn add_slack_inequality(ideal: &Ideal, p: &QPoly, bound: &Rational, sense: Sense) -> Result<Ideal, GroebnerError> {
    let mut name = "s".to_string();
    let mut k = 1;
    while ideal.ring.index_of(&name).is_some() {
        name = format!("s{k}");
        k += 1;
    }
    let mut names: Vec<String> = ideal.ring.names().to_vec();
    names.push(name);
    let ring = Ring::new(&names)?;
    let s = QPoly::var(&ring, names.len() - 1);
    let pe = p.embed(&ring)?;
    let b = QPoly::constant(&ring, bound.clone());
    let slack = &s * &s;
    let g = match sense {
        Sense::AtLeast => &(&pe - &b) - &slack,
        Sense::AtMost => &(&b - &pe) - &slack,
    };
    let mut gens: Vec<QPoly> = ideal.generators.iter().map(|f| f.embed(&ring)).collect::<Result<_, _>>()?;
    gens.push(g);
    Ideal::new(&ring, gens, ideal.order.with_leading_var())
}

/// Variable names of the two-bus equivalencing system, highest lex
/// precedence first: currents, load-bus voltage, sending-end powers, then
/// the parameters `V`, `PL`, `QL`.
pub const TWO_BUS_VARS: [&str; 9] = ["id", "iq", "Vd", "Vq", "Q", "P", "V", "PL", "QL"];

/// Two-bus equivalencing system: bus 1 at voltage `V` feeds a PQ load
/// `PL + j QL` through `r + j x`. Current `id + j iq` flows into the line,
/// `P + j Q` is drawn at bus 1, `Vd + j Vq` is the load-bus voltage and the
/// load power is `(Vd + j Vq) * conj(id + j iq)`.
pub fn two_bus_ideal(r: &Rational, x: &Rational) -> Ideal {
    let ring = Ring::new(&TWO_BUS_VARS).unwrap();
    let v = |n: &str| QPoly::var_named(&ring, n);
    let (id, iq, vd, vq, qq, p, vv, pl, ql) = (v("id"), v("iq"), v("Vd"), v("Vq"), v("Q"), v("P"), v("V"), v("PL"), v("QL"));
    let rr = QPoly::constant(&ring, r.clone());
    let xx = QPoly::constant(&ring, x.clone());
    let gens = vec![
        &p - &(&vv * &id),
        &qq + &(&vv * &iq),
        &vd - &(&(&vv - &(&rr * &id)) + &(&xx * &iq)),
        &vq - &(&(-&(&rr * &iq)) - &(&xx * &id)),
        &pl - &(&(&vd * &id) + &(&vq * &iq)),
        &ql - &(&(&vq * &id) - &(&vd * &iq)),
    ];
    let order = MonomialOrder::lex((0..ring.nvars()).collect()).unwrap();
    Ideal::new(&ring, gens, order).unwrap()
}

/// Appends saddle-node conditions `J^T z = 0`, `z^T z = 1` to a square
/// system in `unknowns`, with `z` inserted right after the unknowns in the
/// lex order (before the parameters).
pub fn bifurcation_ideal(base: &Ideal, unknowns: &[&str]) -> Result<Ideal, GroebnerError> {
    let m = base.generators.len();
    let zs: Vec<String> = (1..=m).map(|i| format!("z{i}")).collect();
    let prec = base.order.precedence();
    let unknown_idx: Vec<usize> = unknowns
        .iter()
        .map(|u| base.ring.index_of(u).ok_or_else(|| PolyError::UnknownVariable(u.to_string())))
        .collect::<Result<_, _>>()?;
    // New variable list: old variables in precedence order with z inserted
    // after the last unknown.
    let last_unknown = prec.iter().rposition(|v| unknown_idx.contains(v)).unwrap_or(0);
    let mut names: Vec<String> = Vec::new();
    for (k, &v) in prec.iter().enumerate() {
        names.push(base.ring.name(v).to_string());
        if k == last_unknown {
            names.extend(zs.iter().cloned());
        }
    }
    let ring = Ring::new(&names)?;
    let remap = |p: &QPoly| -> QPoly {
        let terms = p.terms().iter().map(|(mono, c)| {
            let mut e = vec![0u32; names.len()];
            for (old, &x) in mono.0.iter().enumerate() {
                e[ring.index_of(base.ring.name(old)).unwrap()] = x;
            }
            (Monomial(e), c.clone())
        });
        Polynomial::from_terms(&ring, terms)
    };
    let mut gens: Vec<QPoly> = base.generators.iter().map(remap).collect();
    let z: Vec<QPoly> = zs.iter().map(|n| QPoly::var_named(&ring, n)).collect();
    for u in &unknown_idx {
        let mut row = QPoly::zero(&ring);
        for (i, f) in base.generators.iter().enumerate() {
            row = &row + &(&remap(&f.derivative(*u)) * &z[i]);
        }
        gens.push(row);
    }
    let mut norm = QPoly::constant(&ring, -<Rational as Coeff>::one());
    for zi in &z {
        norm = &norm + &(zi * zi);
    }
    gens.push(norm);
    let order = MonomialOrder::lex((0..ring.nvars()).collect())?;
    Ideal::new(&ring, gens, order)
}

/// The two-bus saddle-node bifurcation ideal (equivalencing system plus
/// `J^T z = 0`, `|z| = 1`).
pub fn two_bus_bifurcation_ideal(r: &Rational, x: &Rational) -> Ideal {
    bifurcation_ideal(&two_bus_ideal(r, x), &TWO_BUS_VARS[..6]).expect("fixed variable names")
}

/// Generator of the elimination ideal in `(V, PL, QL)` of the two-bus
/// bifurcation system: the loadability boundary.
pub fn loadability_polynomial(r: &Rational, x: &Rational) -> Result<QPoly, GroebnerError> {
    let gb = buchberger(&two_bus_bifurcation_ideal(r, x), &BuchbergerOptions::default())?;
    let elim = eliminate(&gb, 3)?;
    elim.into_iter()
        .min_by_key(|p| (p.total_degree(), p.nterms()))
        .ok_or(GroebnerError::NotZeroDimensional("V".into()))
}

/// Real points `(PL, QL)` on the curve `curve(V, PL, QL) = 0` at fixed `V`,
/// for `npoints` values of `PL` evenly spaced in `[pl_min, pl_max]`.
pub fn sample_curve(curve: &QPoly, v: f64, pl_min: f64, pl_max: f64, npoints: usize) -> Result<Vec<(f64, f64)>, GroebnerError> {
    let [iv, ip, iq] = var_indices(curve, ["V", "PL", "QL"])?;
    let fc: Polynomial<f64> = curve.map_coeffs(rational_to_f64);
    let mut out = Vec::new();
    for pl in linspace(pl_min, pl_max, npoints) {
        let uni = fc.substitute(iv, &v).substitute(ip, &pl);
        out.extend(real_roots(&uni, iq)?.into_iter().map(|qv| (pl, qv)));
    }
    Ok(out)
}

/// Generator of the elimination ideal in `(P, V, PL, QL)` of the two-bus
/// system: the implicit relation between source voltage and the active
/// power it delivers to a fixed load.
pub fn load_equivalent_polynomial(r: &Rational, x: &Rational) -> Result<QPoly, GroebnerError> {
    let gb = buchberger(&two_bus_ideal(r, x), &BuchbergerOptions::default())?;
    let ip = gb.ring.index_of("P").expect("fixed variable names");
    eliminate(&gb, 4)?
        .into_iter()
        .filter(|p| p.terms().iter().any(|(m, _)| m.0[ip] > 0))
        .min_by_key(|p| (p.total_degree(), p.nterms()))
        .ok_or(GroebnerError::NotZeroDimensional("P".into()))
}

/// Real points `(V, P)` on `curve(P, V, PL, QL) = 0` at a fixed load, for
/// `npoints` values of `V` evenly spaced in `[v_min, v_max]`.
pub fn sample_load_equivalent(curve: &QPoly, pl: f64, ql: f64, v_min: f64, v_max: f64, npoints: usize) -> Result<Vec<(f64, f64)>, GroebnerError> {
    let [ipp, iv, ipl, iql] = var_indices(curve, ["P", "V", "PL", "QL"])?;
    let fc: Polynomial<f64> = curve.map_coeffs(rational_to_f64).substitute(ipl, &pl).substitute(iql, &ql);
    let mut out = Vec::new();
    for v in linspace(v_min, v_max, npoints) {
        out.extend(real_roots(&fc.substitute(iv, &v), ipp)?.into_iter().map(|p| (v, p)));
    }
    Ok(out)
}

fn var_indices<const N: usize>(p: &QPoly, names: [&str; N]) -> Result<[usize; N], GroebnerError> {
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = p.ring().index_of(name).ok_or_else(|| PolyError::UnknownVariable(name.into()))?;
    }
    Ok(out)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

/// Distinct real roots, ascending, of a polynomial univariate in `var`.
fn real_roots(p: &Polynomial<f64>, var: usize) -> Result<Vec<f64>, GroebnerError> {
    let coeffs: Vec<Complex64> = p.univariate_coeffs(var)?.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut xs: Vec<f64> = roots_of_coeffs(&coeffs)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| polish_real(&coeffs, z.re))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(xs)
}

fn polish_real(c: &[Complex64], x0: f64) -> f64 {
    polish(c, Complex64::new(x0, 0.0)).re
}
