//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// A real floating-point scalar (`f32` or `f64`).
///
/// The associated constants carry the precision-dependent default
/// thresholds; they are expressed as `f64` and converted on use.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Default {
    /// Relative magnitude below which a polynomial coefficient is dropped.
    const ZERO_DROP: f64;
    /// Default relative tolerance for numerical rank decisions.
    const RANK_TOL: f64;
    /// Default relative tolerance for polynomial identities.
    const POLY_TOL: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn magnitude(self) -> Self {
        Signed::abs(&self)
    }

    fn finite(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f64 {
    const ZERO_DROP: f64 = 1e-12;
    const RANK_TOL: f64 = 1e-9;
    const POLY_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const ZERO_DROP: f64 = 1e-6;
    const RANK_TOL: f64 = 1e-4;
    const POLY_TOL: f64 = 1e-4;
}

/// Rank and polynomial-identity tolerances, both relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rank: T,
    pub poly: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rank: T::lit(T::RANK_TOL),
            poly: T::lit(T::POLY_TOL),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn new(rank: T, poly: T) -> Self {
        Tolerances { rank, poly }
    }
}
