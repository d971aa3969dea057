//! Working representation for division-style algorithms: terms sorted
//! ascending under a fixed monomial order, so the leading term is the last
//! element and `p -= c·x^m·q` is a single merge.

use std::cmp::Ordering;

use super::coeff::Coeff;
use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::Polynomial;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct OrderedPoly<C: Coeff> {
    pub(crate) terms: Vec<(Monomial, C)>,
}

impl<C: Coeff> OrderedPoly<C> {
    pub(crate) fn from_poly(p: &Polynomial<C>, ord: &MonomialOrder) -> Self {
        let mut terms = p.terms().to_vec();
        terms.sort_by(|a, b| ord.cmp(&a.0, &b.0));
        OrderedPoly { terms }
    }

    pub(crate) fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.last().map(|(m, c)| (m, c))
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(Monomial, C)> {
        self.terms.pop()
    }

    /// `self -= c · x^shift · other`
    pub(crate) fn sub_scaled_shifted(
        &mut self,
        other: &OrderedPoly<C>,
        shift: &Monomial,
        c: &C,
        ord: &MonomialOrder,
    ) {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = std::mem::take(&mut self.terms).into_iter().peekable();
        let mut b = other
            .terms
            .iter()
            .map(|(m, k)| (m.mul(shift), k.mul(c)))
            .peekable();
        loop {
            let o = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => ord.cmp(&x.0, &y.0),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => break,
            };
            match o {
                Ordering::Less => out.push(a.next().unwrap()),
                Ordering::Greater => {
                    let (m, k) = b.next().unwrap();
                    out.push((m, k.neg()));
                }
                Ordering::Equal => {
                    let (m, x) = a.next().unwrap();
                    let (_, y) = b.next().unwrap();
                    let v = x.sub(&y);
                    if !v.is_zero() {
                        out.push((m, v));
                    }
                }
            }
        }
        self.terms = out;
    }
}
