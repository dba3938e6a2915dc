//! Small hand-built embeddings used by tests, examples and the CLI golden
//! suite. States are ordered `(x, y)`.

use nalgebra::{DMatrix, DVector};

use crate::poly::{Monomial, MultiPoly, ObservableMap};
use crate::Embedding;

fn y_pow(k: u32) -> MultiPoly<f64> {
    MultiPoly::from_terms(2, [(Monomial::new(vec![0, k]), 1.0)])
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn vec(data: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(data)
}

/// `x' = -x + y^2 + u`, `y' = -y`, lifted by `p = (y^2)`.
pub fn ex1() -> Embedding {
    Embedding::new(
        mat(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
        mat(2, 1, &[1.0, 0.0]),
        mat(1, 2, &[0.0, 0.0]),
        mat(1, 1, &[-2.0]),
        vec(&[1.0, 0.0]),
        vec(&[0.0]),
        vec(&[0.0, 0.0]),
        vec(&[0.0]),
        ObservableMap::new(2, vec![y_pow(2)]).unwrap(),
    )
    .unwrap()
}

/// [`ex1`] with `M = [-3]`, which violates the lifted dynamics by `y^2`.
pub fn ex1_broken() -> Embedding {
    let mut l = ex1();
    l.m = mat(1, 1, &[-3.0]);
    l
}

/// [`ex1`] with a decoupled, unobservable extra observable `y^3`.
pub fn ex1_plus() -> Embedding {
    Embedding::new(
        mat(2, 2, &[-1.0, 0.0, 0.0, -1.0]),
        mat(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        DMatrix::zeros(2, 2),
        mat(2, 2, &[-2.0, 0.0, 0.0, -3.0]),
        vec(&[1.0, 0.0]),
        vec(&[0.0, 0.0]),
        vec(&[0.0, 0.0]),
        vec(&[0.0, 0.0]),
        ObservableMap::new(2, vec![y_pow(2), y_pow(3)]).unwrap(),
    )
    .unwrap()
}

/// [`ex1`] with its observable shifted to `y^2 + y + 1`.
pub fn ex1_shifted() -> Embedding {
    let p = y_pow(2)
        .add(&MultiPoly::linear(2, 1, 1.0))
        .add(&MultiPoly::constant(2, 1.0));
    Embedding::new(
        mat(2, 2, &[-1.0, -1.0, 0.0, -1.0]),
        mat(2, 1, &[1.0, 0.0]),
        mat(1, 2, &[0.0, 1.0]),
        mat(1, 1, &[-2.0]),
        vec(&[1.0, 0.0]),
        vec(&[0.0]),
        vec(&[-1.0, 0.0]),
        vec(&[2.0]),
        ObservableMap::new(2, vec![p]).unwrap(),
    )
    .unwrap()
}

/// `x' = -x + y + y^2 + y^3`, `y' = y`, lifted by `(y^2, y^3)`.
pub fn ex2a() -> Embedding {
    Embedding::new(
        mat(2, 2, &[-1.0, 1.0, 0.0, 1.0]),
        mat(2, 2, &[1.0, 1.0, 0.0, 0.0]),
        DMatrix::zeros(2, 2),
        mat(2, 2, &[2.0, 0.0, 0.0, 3.0]),
        DVector::zeros(2),
        DVector::zeros(2),
        DVector::zeros(2),
        DVector::zeros(2),
        ObservableMap::new(2, vec![y_pow(2), y_pow(3)]).unwrap(),
    )
    .unwrap()
}

/// The same system as [`ex2a`] lifted by `(y^2 + y^3, y^2, y^3)`.
pub fn ex2b() -> Embedding {
    Embedding::new(
        mat(2, 2, &[-1.0, 1.0, 0.0, 1.0]),
        mat(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        DMatrix::zeros(3, 2),
        mat(3, 3, &[0.0, 2.0, 3.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]),
        DVector::zeros(2),
        DVector::zeros(3),
        DVector::zeros(2),
        DVector::zeros(3),
        ObservableMap::new(2, vec![y_pow(2).add(&y_pow(3)), y_pow(2), y_pow(3)]).unwrap(),
    )
    .unwrap()
}

/// An already-linear system with no observables.
pub fn linear_only() -> Embedding {
    Embedding::linear(mat(2, 2, &[-1.0, 2.0, 0.0, -3.0]), vec(&[1.0, 0.0]), vec(&[0.5, 0.0])).unwrap()
}

/// Every valid fixture, by name.
pub fn all() -> Vec<(&'static str, Embedding)> {
    vec![
        ("ex1", ex1()),
        ("ex1_plus", ex1_plus()),
        ("ex1_shifted", ex1_shifted()),
        ("ex2a", ex2a()),
        ("ex2b", ex2b()),
        ("linear_only", linear_only()),
    ]
}
