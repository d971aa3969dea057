use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::coeff::{Coeff, Rational};
use super::monomial::{Monomial, MonomialOrder};
use super::ordered::OrderedPoly;
use super::PolyError;

/// Ordered list of variable names shared by every polynomial of a ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    names: Vec<String>,
}

impl Ring {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Ring>, PolyError> {
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !is_valid_identifier(n) {
                return Err(PolyError::InvalidVariable(n.to_string()));
            }
            if out.iter().any(|o| o == n) {
                return Err(PolyError::DuplicateVariable(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(Arc::new(Ring { names: out }))
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Resolves a list of names into a lex precedence (first = highest).
    pub fn lex_order<S: AsRef<str>>(&self, names: &[S]) -> Result<MonomialOrder, PolyError> {
        MonomialOrder::lex(self.resolve(names)?)
    }

    pub fn graded_lex_order<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<MonomialOrder, PolyError> {
        MonomialOrder::graded_lex(self.resolve(names)?)
    }

    fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, PolyError> {
        names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref())
                    .ok_or_else(|| PolyError::UnknownVariable(n.as_ref().to_string()))
            })
            .collect()
    }
}

pub(crate) fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Sparse multivariate polynomial.
///
/// Terms are kept sorted by exponent vector with no zero coefficients and no
/// repeated monomials, so structural equality is polynomial equality.
#[derive(Clone, Debug)]
pub struct Polynomial<C: Coeff> {
    ring: Arc<Ring>,
    terms: Vec<(Monomial, C)>,
}

impl<C: Coeff> PartialEq for Polynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Polynomial {
            ring: ring.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: &Arc<Ring>, c: C) -> Self {
        Self::from_terms(ring, [(Monomial::one(ring.nvars()), c)])
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::constant(ring, C::one())
    }

    pub fn var(ring: &Arc<Ring>, index: usize) -> Self {
        Self::from_terms(ring, [(Monomial::var(ring.nvars(), index), C::one())])
    }

    /// Variable by name; panics on an unknown name (intended for fixtures).
    pub fn var_named(ring: &Arc<Ring>, name: &str) -> Self {
        let i = ring
            .index_of(name)
            .unwrap_or_else(|| panic!("unknown variable {name}"));
        Self::var(ring, i)
    }

    /// Builds a canonical polynomial, summing repeated monomials.
    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), ring.nvars(), "monomial arity does not match ring");
            match acc.get_mut(&m) {
                Some(e) => *e = e.add(&c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Polynomial {
            ring: ring.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, C)> {
        self.terms
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.degree()).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.0[var]).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        match self.terms.binary_search_by(|(t, _)| t.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => C::zero(),
        }
    }

    /// Constant term.
    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one(self.ring.nvars()))
    }

    /// Indices of variables occurring with nonzero exponent.
    pub fn variables(&self) -> Vec<usize> {
        let mut used = vec![false; self.ring.nvars()];
        for (m, _) in &self.terms {
            for v in m.support() {
                used[v] = true;
            }
        }
        used.iter()
            .enumerate()
            .filter(|(_, u)| **u)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_ring(&self, other: &Self) -> Result<(), PolyError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(PolyError::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, |c| c.clone()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, |c| c.neg()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(e) => *e = e.add(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    // self + map(other); both term lists sorted, so a linear merge suffices.
    fn merge(&self, other: &Self, map: impl Fn(&C) -> C) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, _) => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let (m, c) = &other.terms[j];
                    out.push((m.clone(), map(c)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = self.terms[i].1.add(&map(&other.terms[j].1));
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: out,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a.mul(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    /// Multiplies by the monomial `c·x^m`.
    pub fn mul_term(&self, m: &Monomial, c: &C) -> Self {
        Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, a)| (t.mul(m), a.mul(c)))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Polynomial::one(&self.ring);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Largest term under `ord`.
    pub fn leading_term(&self, ord: &MonomialOrder) -> Result<(Monomial, C), PolyError> {
        self.terms
            .iter()
            .max_by(|a, b| ord.cmp(&a.0, &b.0))
            .cloned()
            .ok_or(PolyError::ZeroPolynomial)
    }

    pub fn leading_monomial(&self, ord: &MonomialOrder) -> Result<Monomial, PolyError> {
        self.leading_term(ord).map(|(m, _)| m)
    }

    /// Scales so the leading coefficient under `ord` is one.
    pub fn monic(&self, ord: &MonomialOrder) -> Result<Self, PolyError> {
        let (_, lc) = self.leading_term(ord)?;
        Ok(self.scale(&lc.inv()))
    }

    /// Multivariate long division of `self` by `divisors` under `ord`.
    ///
    /// Returns `(quotients, remainder)` with
    /// `self = Σ quotients[i]·divisors[i] + remainder`, and no term of the
    /// remainder divisible by any divisor's leading monomial. The first
    /// divisor (in list order) whose leading monomial divides the current
    /// leading term is always used, which makes the result unique.
    pub fn divide(
        &self,
        divisors: &[Polynomial<C>],
        ord: &MonomialOrder,
    ) -> Result<(Vec<Polynomial<C>>, Polynomial<C>), PolyError> {
        if ord.nvars() != self.ring.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.ring.nvars(),
                got: ord.nvars(),
            });
        }
        let mut ordered_divs = Vec::with_capacity(divisors.len());
        for d in divisors {
            self.check_ring(d)?;
            if d.is_zero() {
                return Err(PolyError::ZeroPolynomial);
            }
            ordered_divs.push(OrderedPoly::from_poly(d, ord));
        }
        let mut p = OrderedPoly::from_poly(self, ord);
        let mut quotients: Vec<Vec<(Monomial, C)>> = vec![Vec::new(); divisors.len()];
        let mut remainder: Vec<(Monomial, C)> = Vec::new();
        while let Some((lm, lc)) = p.leading() {
            let hit = ordered_divs
                .iter()
                .position(|d| d.leading().map(|(m, _)| m.divides(lm)).unwrap_or(false));
            match hit {
                Some(i) => {
                    let (dm, dc) = ordered_divs[i].leading().unwrap();
                    let shift = lm.checked_div(dm).unwrap();
                    let c = lc.div(dc);
                    p.sub_scaled_shifted(&ordered_divs[i], &shift, &c, ord);
                    quotients[i].push((shift, c));
                }
                None => remainder.push(p.pop_leading().unwrap()),
            }
        }
        let ring = &self.ring;
        Ok((
            quotients
                .into_iter()
                .map(|q| Polynomial::from_terms(ring, q))
                .collect(),
            Polynomial::from_terms(ring, remainder),
        ))
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.0[var] > 0).map(|(m, c)| {
            let e = m.0[var];
            let mut d = m.clone();
            d.0[var] -= 1;
            (d, c.mul(&C::from_i64(e as i64)))
        });
        Polynomial::from_terms(&self.ring, terms)
    }

    /// Evaluates at a complex point.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        self.check_point(point.len())?;
        let powers = PowerTable::new(point, &self.terms);
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| c.to_complex() * powers.monomial(m))
            .sum())
    }

    /// Exact evaluation in the coefficient field.
    pub fn eval_exact(&self, point: &[C]) -> Result<C, PolyError> {
        self.check_point(point.len())?;
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&point[v]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    fn check_point(&self, len: usize) -> Result<(), PolyError> {
        if len != self.ring.nvars() {
            Err(PolyError::DimensionMismatch {
                expected: self.ring.nvars(),
                got: len,
            })
        } else {
            Ok(())
        }
    }

    /// Replaces variable `var` by the constant `value`; the ring is unchanged.
    pub fn substitute(&self, var: usize, value: &C) -> Self {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut t = c.clone();
            for _ in 0..m.0[var] {
                t = t.mul(value);
            }
            let mut mm = m.clone();
            mm.0[var] = 0;
            (mm, t)
        });
        Polynomial::from_terms(&self.ring, terms)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(&self.ring, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Re-expresses the polynomial in `target`, whose first variables are this
    /// ring's variables in the same order.
    pub fn embed(&self, target: &Arc<Ring>) -> Result<Self, PolyError> {
        let n = self.ring.nvars();
        if target.nvars() < n || target.names()[..n] != self.ring.names()[..] {
            return Err(PolyError::RingMismatch);
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = m.0.clone();
            e.resize(target.nvars(), 0);
            (Monomial(e), c.clone())
        });
        Ok(Polynomial::from_terms(target, terms))
    }

    /// Coefficients of a polynomial in a single variable `var`, lowest degree
    /// first; errors if any other variable occurs.
    pub fn univariate_coeffs(&self, var: usize) -> Result<Vec<C>, PolyError> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![C::zero(); deg + 1];
        for (m, c) in &self.terms {
            if m.0.iter().enumerate().any(|(v, &e)| v != var && e > 0) {
                return Err(PolyError::NotUnivariate);
            }
            out[m.0[var] as usize] = c.clone();
        }
        Ok(out)
    }

    /// Terms listed from largest to smallest under `ord`.
    pub fn sorted_terms(&self, ord: &MonomialOrder) -> Vec<(Monomial, C)> {
        let mut t = self.terms.clone();
        t.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        t
    }

    /// Text form under the ring's natural graded-lex order.
    pub fn to_text(&self) -> String {
        self.to_text_with(&MonomialOrder::graded_lex_natural(self.ring.nvars()))
    }

    pub fn to_text_with(&self, ord: &MonomialOrder) -> String {
        super::text::render(self, ord)
    }
}

impl Polynomial<Rational> {
    /// Divides out the content and fixes the sign so the leading coefficient
    /// (under `ord`) is positive with integer, coprime coefficients.
    pub fn primitive(&self, ord: &MonomialOrder) -> Result<Self, PolyError> {
        use num_integer::Integer;
        use num_traits::{One, Signed};
        let (_, lc) = self.leading_term(ord)?;
        let mut lcm_den = num_bigint::BigInt::one();
        for (_, c) in &self.terms {
            lcm_den = lcm_den.lcm(c.denom());
        }
        let ints: Vec<num_bigint::BigInt> = self
            .terms
            .iter()
            .map(|(_, c)| (c * Rational::from_integer(lcm_den.clone())).to_integer())
            .collect();
        let mut g = num_bigint::BigInt::from(0);
        for v in &ints {
            g = g.gcd(v);
        }
        let sign = if Signed::is_negative(&lc) { -1 } else { 1 };
        let div = Rational::from_integer(g * sign);
        Ok(Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .zip(ints)
                .map(|((m, _), v)| (m.clone(), Rational::from_integer(v) / &div))
                .collect(),
        })
    }
}

impl<C: Coeff> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Cached powers `x_v^k` for fast monomial evaluation.
pub(crate) struct PowerTable {
    pows: Vec<Vec<Complex64>>,
}

impl PowerTable {
    pub(crate) fn new<C: Coeff>(point: &[Complex64], terms: &[(Monomial, C)]) -> Self {
        let mut maxe = vec![0u32; point.len()];
        for (m, _) in terms {
            for (v, &e) in m.0.iter().enumerate() {
                maxe[v] = maxe[v].max(e);
            }
        }
        Self::with_max(point, &maxe)
    }

    pub(crate) fn with_max(point: &[Complex64], maxe: &[u32]) -> Self {
        let pows = point
            .iter()
            .zip(maxe)
            .map(|(&x, &e)| {
                let mut p = Vec::with_capacity(e as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                p.push(acc);
                for _ in 0..e {
                    acc *= x;
                    p.push(acc);
                }
                p
            })
            .collect();
        PowerTable { pows }
    }

    pub(crate) fn monomial(&self, m: &Monomial) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (v, &e) in m.0.iter().enumerate() {
            if e > 0 {
                acc *= self.pows[v][e as usize];
            }
        }
        acc
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl<'a, C: Coeff> $tr<&'a Polynomial<C>> for &'a Polynomial<C> {
            type Output = Polynomial<C>;
            /// Panics when the operands live in different rings; use the
            /// `try_*` methods to get an error instead.
            fn $method(self, rhs: &'a Polynomial<C>) -> Polynomial<C> {
                self.$try(rhs).expect("polynomial ring mismatch")
            }
        }
        impl<C: Coeff> $tr<Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                self.$try(&rhs).expect("polynomial ring mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.scale(&C::one().neg())
    }
}

impl<C: Coeff> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}
