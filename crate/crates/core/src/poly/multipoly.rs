use std::collections::BTreeMap;
use std::fmt;

use super::Monomial;
use crate::Real;

/// Sparse multivariate polynomial with real coefficients.
///
/// Coefficients whose magnitude falls below the zero threshold relative to
/// the operands that produced them are never stored, so the zero polynomial
/// has no terms.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<T> {
    n_vars: usize,
    terms: BTreeMap<Monomial, T>,
}

/// Accumulates scaled polynomials and prunes once at the end, relative to the
/// largest operand coefficient seen.
pub(crate) struct Accumulator<T> {
    n_vars: usize,
    terms: BTreeMap<Monomial, T>,
    scale: T,
}

impl<T: Real> Accumulator<T> {
    pub(crate) fn new(n_vars: usize) -> Self {
        Accumulator {
            n_vars,
            terms: BTreeMap::new(),
            scale: T::zero(),
        }
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, coef: T) {
        debug_assert_eq!(mono.n_vars(), self.n_vars);
        self.scale = self.scale.max(coef.magnitude());
        *self.terms.entry(mono).or_insert_with(T::zero) += coef;
    }

    pub(crate) fn add_scaled(&mut self, p: &MultiPoly<T>, factor: T) {
        debug_assert_eq!(p.n_vars, self.n_vars);
        if factor == T::zero() {
            return;
        }
        for (mono, &c) in &p.terms {
            self.add_term(mono.clone(), c * factor);
        }
    }

    pub(crate) fn finish(self) -> MultiPoly<T> {
        let threshold = self.scale * T::lit(T::ZERO_DROP);
        let terms = self
            .terms
            .into_iter()
            .filter(|(_, c)| c.magnitude() > threshold)
            .collect();
        MultiPoly {
            n_vars: self.n_vars,
            terms,
        }
    }
}

impl<T: Real> MultiPoly<T> {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: T) -> Self {
        Self::from_terms(n_vars, [(Monomial::one(n_vars), c)])
    }

    /// The coordinate function `x_{var}` (zero-based), scaled by `c`.
    pub fn linear(n_vars: usize, var: usize, c: T) -> Self {
        Self::from_terms(n_vars, [(Monomial::var(n_vars, var), c)])
    }

    /// Builds a polynomial, collecting like terms.
    ///
    /// Panics if an exponent vector does not have length `n_vars`.
    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut acc = Accumulator::new(n_vars);
        for (mono, c) in terms {
            assert_eq!(mono.n_vars(), n_vars, "exponent vector length");
            acc.add_term(mono, c);
        }
        acc.finish()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, T)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, mono: &Monomial) -> T {
        self.terms.get(mono).copied().unwrap_or_else(T::zero)
    }

    pub fn max_coef(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, c| acc.max(c.magnitude()))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.n_vars);
        self.terms.iter().fold(T::zero(), |acc, (m, &c)| acc + c * m.eval(x))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "polynomial arity");
        let mut acc = Accumulator::new(self.n_vars);
        acc.add_scaled(self, T::one());
        acc.add_scaled(other, sign);
        acc.finish()
    }

    pub fn scale(&self, c: T) -> Self {
        let mut acc = Accumulator::new(self.n_vars);
        acc.add_scaled(self, c);
        acc.finish()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "polynomial arity");
        let mut acc = Accumulator::new(self.n_vars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                acc.add_term(ma.mul(mb), ca * cb);
            }
        }
        acc.scale = self.max_coef() * other.max_coef();
        acc.finish()
    }

    /// Formal partial derivative with respect to variable `var` (zero-based).
    pub fn derivative(&self, var: usize) -> Self {
        let mut acc = Accumulator::new(self.n_vars);
        for (m, &c) in &self.terms {
            if let Some((k, d)) = m.derivative(var) {
                acc.add_term(d, c * T::lit(k as f64));
            }
        }
        acc.finish()
    }

    /// Keeps only the terms of total degree `>= min_degree`.
    pub fn truncate_below(&self, min_degree: u32) -> Self {
        MultiPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() >= min_degree)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> MultiPoly<U> {
        MultiPoly::from_terms(
            self.n_vars,
            self.terms.iter().map(|(m, &c)| (m.clone(), U::lit(c.as_f64()))),
        )
    }
}

impl<T: Real> fmt::Display for MultiPoly<T> {
    /// Highest-degree terms first, e.g. `2*x2^2 + x1 - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, &c)) in self.terms.iter().rev().enumerate() {
            let neg = c < T::zero();
            let mag = c.magnitude();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_constant() {
                write!(f, "{mag}")?;
            } else if mag == T::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}
