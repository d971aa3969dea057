use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::PolyError;

/// Exponent vector `α` of a monomial `x^α`; one entry per ring variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: impl Into<Vec<u32>>) -> Self {
        Monomial(e.into())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self | other`
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        if other.divides(self) {
            Some(Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
        } else {
            None
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// No variable appears in both monomials.
    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of variables with nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i)
    }
}

/// Monomial order with an explicit variable precedence.
///
/// `precedence[0]` is the highest-ranked variable: under lex, any monomial
/// containing it beats every monomial that does not. Lex elimination keeps the
/// trailing entries of the precedence list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialOrder {
    Lex { precedence: Vec<usize> },
    GradedLex { precedence: Vec<usize> },
}

impl MonomialOrder {
    pub fn lex(precedence: Vec<usize>) -> Result<Self, PolyError> {
        check_permutation(&precedence)?;
        Ok(MonomialOrder::Lex { precedence })
    }

    pub fn graded_lex(precedence: Vec<usize>) -> Result<Self, PolyError> {
        check_permutation(&precedence)?;
        Ok(MonomialOrder::GradedLex { precedence })
    }

    /// Lex with `x_0 ≻ x_1 ≻ … ≻ x_{n-1}`.
    pub fn lex_natural(nvars: usize) -> Self {
        MonomialOrder::Lex {
            precedence: (0..nvars).collect(),
        }
    }

    pub fn graded_lex_natural(nvars: usize) -> Self {
        MonomialOrder::GradedLex {
            precedence: (0..nvars).collect(),
        }
    }

    pub fn precedence(&self) -> &[usize] {
        match self {
            MonomialOrder::Lex { precedence } | MonomialOrder::GradedLex { precedence } => {
                precedence
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.precedence().len()
    }

    pub fn is_lex(&self) -> bool {
        matches!(self, MonomialOrder::Lex { .. })
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Lex { precedence } => lex_cmp(precedence, a, b),
            MonomialOrder::GradedLex { precedence } => a
                .degree()
                .cmp(&b.degree())
                .then_with(|| lex_cmp(precedence, a, b)),
        }
    }

    /// Same order with an extra variable (index `nvars`) placed first.
    pub fn with_leading_var(&self) -> Self {
        let n = self.nvars();
        let mut p = Vec::with_capacity(n + 1);
        p.push(n);
        p.extend_from_slice(self.precedence());
        match self {
            MonomialOrder::Lex { .. } => MonomialOrder::Lex { precedence: p },
            MonomialOrder::GradedLex { .. } => MonomialOrder::GradedLex { precedence: p },
        }
    }
}

fn lex_cmp(precedence: &[usize], a: &Monomial, b: &Monomial) -> Ordering {
    for &v in precedence {
        match a.0[v].cmp(&b.0[v]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn check_permutation(p: &[usize]) -> Result<(), PolyError> {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return Err(PolyError::InvalidOrder(format!(
                "precedence {p:?} is not a permutation of 0..{}",
                p.len()
            )));
        }
        seen[v] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u32]) -> Monomial {
        Monomial(e.to_vec())
    }

    #[test]
    fn lex_prefers_high_variable() {
        // x2 ≻ x1: precedence [1, 0] over (x1, x2)
        let ord = MonomialOrder::lex(vec![1, 0]).unwrap();
        assert_eq!(ord.cmp(&m(&[0, 2]), &m(&[1, 1])), Ordering::Greater);
        assert_eq!(ord.cmp(&m(&[3, 0]), &m(&[1, 1])), Ordering::Less);
        assert_eq!(ord.cmp(&m(&[0, 0]), &m(&[1, 0])), Ordering::Less);
    }

    #[test]
    fn graded_lex_compares_degree_first() {
        let ord = MonomialOrder::graded_lex(vec![1, 0]).unwrap();
        assert_eq!(ord.cmp(&m(&[3, 0]), &m(&[1, 1])), Ordering::Greater);
        assert_eq!(ord.cmp(&m(&[0, 2]), &m(&[1, 1])), Ordering::Greater);
    }

    #[test]
    fn rejects_non_permutation() {
        assert!(MonomialOrder::lex(vec![0, 0]).is_err());
        assert!(MonomialOrder::lex(vec![0, 2]).is_err());
    }

    #[test]
    fn divisibility_and_lcm() {
        assert!(m(&[1, 0]).divides(&m(&[2, 1])));
        assert!(!m(&[0, 2]).divides(&m(&[2, 1])));
        assert_eq!(m(&[2, 1]).checked_div(&m(&[1, 1])), Some(m(&[1, 0])));
        assert_eq!(m(&[2, 0]).lcm(&m(&[1, 3])), m(&[2, 3]));
        assert!(m(&[2, 0]).is_coprime(&m(&[0, 3])));
    }
}
