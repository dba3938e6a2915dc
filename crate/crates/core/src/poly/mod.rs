//! Sparse multivariate polynomials and polynomial observable maps.

mod map;
mod monomial;
mod multipoly;

pub use map::{IndependentSubset, ObservableMap, PolyMatrix};
pub use monomial::Monomial;
pub use multipoly::MultiPoly;

use crate::Real;

/// Anything that exposes a flat set of polynomial entries.
pub trait PolyEntries<T> {
    fn polys(&self) -> &[MultiPoly<T>];
}

impl<T> PolyEntries<T> for ObservableMap<T>
where
    T: Real,
{
    fn polys(&self) -> &[MultiPoly<T>] {
        self.entries()
    }
}

impl<T> PolyEntries<T> for PolyMatrix<T>
where
    T: Real,
{
    fn polys(&self) -> &[MultiPoly<T>] {
        self.entries()
    }
}

/// True iff every coefficient of every entry of `q` satisfies
/// `|c| <= tol * (1 + input_scale)`, where `input_scale` is the largest
/// coefficient magnitude among the operands that produced `q`.
pub fn poly_identity_zero<T: Real, Q: PolyEntries<T> + ?Sized>(q: &Q, tol: T, input_scale: T) -> bool {
    let bound = tol * (T::one() + input_scale);
    q.polys().iter().all(|p| p.terms().all(|(_, c)| c.magnitude() <= bound))
}
