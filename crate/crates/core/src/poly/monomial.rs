use std::cmp::Ordering;
use std::fmt;

use crate::Real;

/// An exponent vector `x1^e1 * ... * xn^en`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vectors compared lexicographically (so `x1 > x2 > ... > xn`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    /// The monomial `x_{var}` (zero-based index).
    pub fn var(n_vars: usize, var: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[var] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn n_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Index of the variable if this is a degree-one monomial.
    pub fn linear_var(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.0.iter().position(|&e| e == 1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Formal partial derivative: `(factor, monomial)`, or `None` if it vanishes.
    pub fn derivative(&self, var: usize) -> Option<(u32, Monomial)> {
        let e = self.0[var];
        if e == 0 {
            return None;
        }
        let mut d = self.0.clone();
        d[var] -= 1;
        Some((e, Monomial(d)))
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(T::one(), |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            match e {
                1 => write!(f, "x{}", i + 1)?,
                _ => write!(f, "x{}^{}", i + 1, e)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let y2 = Monomial::new(vec![0, 2]);
        let y3 = Monomial::new(vec![0, 3]);
        let xy = Monomial::new(vec![1, 1]);
        let x2 = Monomial::new(vec![2, 0]);
        let mut v = vec![y3.clone(), x2.clone(), y2.clone(), xy.clone()];
        v.sort();
        assert_eq!(v, vec![y2, xy, x2, y3]);
        assert!(Monomial::one(2) < Monomial::var(2, 1));
        assert!(Monomial::var(2, 1) < Monomial::var(2, 0));
    }

    #[test]
    fn derivative_and_eval() {
        let m = Monomial::new(vec![2, 3]);
        let (k, d) = m.derivative(1).unwrap();
        assert_eq!(k, 3);
        assert_eq!(d.exps(), &[2, 2]);
        assert!(Monomial::new(vec![0, 3]).derivative(0).is_none());
        assert_eq!(m.eval(&[2.0, -1.0]), -4.0);
        assert_eq!(m.to_string(), "x1^2*x2^3");
    }
}
