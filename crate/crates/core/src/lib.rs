//! Finite-dimensional Koopman embeddings ("super-linearizations") of
//! polynomial control systems `x' = f(x) + u g`.
//!
//! A super-linearization lifts the state to `z = (x, p(x))` for a polynomial
//! observable map `p` so that the lifted dynamics are affine:
//!
//! ```text
//! d/dt [x]   [A G] [x]   [B]     [D]
//!      [z] = [H M] [z] + [C] u + [E]
//! ```
//!
//! The crate validates such embeddings symbolically and by co-simulation,
//! transforms them (conjugation, affine shifts, rank expansion, merging of
//! dependent visible observables, observability pruning) and computes the
//! minimal number of visible observables over all embeddings of a system.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod embedding;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod poly;
mod scalar;
pub mod transform;
pub mod verify;

pub use embedding::{
    classify, induced_control_system, same_system, validate, Classification, ControlSystem, SuperLinearization,
    ValidationReport,
};
pub use error::{Error, Result};
pub use scalar::{Real, Tolerances};
pub use transform::{minimal_visible_count, realize_minimal_visible, to_reduced_visible_form, ReductionReport};

pub type Poly = poly::MultiPoly<f64>;
pub type Observables = poly::ObservableMap<f64>;
pub type Embedding = embedding::SuperLinearization<f64>;
pub type System = embedding::ControlSystem<f64>;
pub type Embedding32 = embedding::SuperLinearization<f32>;
pub type Observables32 = poly::ObservableMap<f32>;
