use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::multipoly::Accumulator;
use super::{poly_identity_zero, Monomial, MultiPoly};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, numerical_rank};
use crate::Real;

/// A polynomial map `p: R^n -> R^m`, stored as its `m` component polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableMap<T> {
    n: usize,
    entries: Vec<MultiPoly<T>>,
}

/// Outcome of [`ObservableMap::independent_subset`].
#[derive(Clone, Debug, PartialEq)]
pub struct IndependentSubset<T: Real> {
    /// Indices of a maximal linearly independent subset, ascending.
    pub idx: Vec<usize>,
    /// Indices of the remaining entries, ascending.
    pub rest: Vec<usize>,
    /// `p[rest] = q * p[idx]`, shape `rest.len() x idx.len()`.
    pub q: DMatrix<T>,
}

impl<T: Real> ObservableMap<T> {
    pub fn new(n: usize, entries: Vec<MultiPoly<T>>) -> Result<Self> {
        if let Some((j, p)) = entries.iter().enumerate().find(|(_, p)| p.n_vars() != n) {
            return Err(Error::dims(format!("observable {j} arity"), n, p.n_vars()));
        }
        Ok(ObservableMap { n, entries })
    }

    pub fn empty(n: usize) -> Self {
        ObservableMap { n, entries: Vec::new() }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        ObservableMap {
            n,
            entries: vec![MultiPoly::zero(n); m],
        }
    }

    /// The linear map `x -> R x`.
    pub fn linear(r: &DMatrix<T>) -> Self {
        let n = r.ncols();
        let entries = (0..r.nrows())
            .map(|i| MultiPoly::from_terms(n, (0..n).map(|k| (Monomial::var(n, k), r[(i, k)]))))
            .collect();
        ObservableMap { n, entries }
    }

    /// The constant map `x -> s`.
    pub fn constant(n: usize, s: &DVector<T>) -> Self {
        ObservableMap {
            n,
            entries: s.iter().map(|&c| MultiPoly::constant(n, c)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[MultiPoly<T>] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &MultiPoly<T> {
        &self.entries[j]
    }

    pub fn into_entries(self) -> Vec<MultiPoly<T>> {
        self.entries
    }

    pub fn max_coef(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, p| acc.max(p.max_coef()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(MultiPoly::is_zero)
    }

    pub fn eval(&self, x: &[T]) -> Result<DVector<T>> {
        if x.len() != self.n {
            return Err(Error::dims("evaluation point", self.n, x.len()));
        }
        Ok(DVector::from_iterator(
            self.entries.len(),
            self.entries.iter().map(|p| p.eval(x)),
        ))
    }

    /// `m x n` matrix of formal partial derivatives.
    pub fn jacobian(&self) -> PolyMatrix<T> {
        let entries = self
            .entries
            .iter()
            .flat_map(|p| (0..self.n).map(move |i| p.derivative(i)))
            .collect();
        PolyMatrix {
            rows: self.entries.len(),
            cols: self.n,
            n_vars: self.n,
            entries,
        }
    }

    /// Entry `i` of the result is `sum_j W[i,j] p_j`.
    pub fn linear_combination(&self, w: &DMatrix<T>) -> Result<Self> {
        if w.ncols() != self.m() {
            return Err(Error::dims("combination matrix columns", self.m(), w.ncols()));
        }
        let entries = (0..w.nrows())
            .map(|i| {
                let mut acc = Accumulator::new(self.n);
                for (j, p) in self.entries.iter().enumerate() {
                    acc.add_scaled(p, w[(i, j)]);
                }
                acc.finish()
            })
            .collect();
        Ok(ObservableMap { n: self.n, entries })
    }

    /// `x -> p(x) + R x + S`.
    pub fn affine_shift(&self, r: &DMatrix<T>, s: &DVector<T>) -> Result<Self> {
        if r.shape() != (self.m(), self.n) {
            return Err(Error::dims(
                "R",
                format!("{}x{}", self.m(), self.n),
                format!("{}x{}", r.nrows(), r.ncols()),
            ));
        }
        if s.len() != self.m() {
            return Err(Error::dims("S", self.m(), s.len()));
        }
        let lin = ObservableMap::linear(r);
        let entries = self
            .entries
            .iter()
            .zip(lin.entries)
            .zip(s.iter())
            .map(|((p, l), &c)| {
                let mut acc = Accumulator::new(self.n);
                acc.add_scaled(p, T::one());
                acc.add_scaled(&l, T::one());
                acc.add_term(Monomial::one(self.n), c);
                acc.finish()
            })
            .collect();
        Ok(ObservableMap { n: self.n, entries })
    }

    /// Splits `p = p0 + R x + S` where `p0` has only terms of degree two or more.
    pub fn split_affine(&self) -> (Self, DMatrix<T>, DVector<T>) {
        let m = self.m();
        let mut r = DMatrix::zeros(m, self.n);
        let mut s = DVector::zeros(m);
        for (j, p) in self.entries.iter().enumerate() {
            for (mono, c) in p.terms() {
                if mono.is_constant() {
                    s[j] = c;
                } else if let Some(i) = mono.linear_var() {
                    r[(j, i)] = c;
                }
            }
        }
        let p0 = ObservableMap {
            n: self.n,
            entries: self.entries.iter().map(|p| p.truncate_below(2)).collect(),
        };
        (p0, r, s)
    }

    /// Monomial basis (sorted union of all monomials) and the coefficient
    /// matrix `K` with `K[a, j]` the coefficient of `basis[a]` in `p_j`.
    pub fn coefficient_matrix(&self) -> (Vec<Monomial>, DMatrix<T>) {
        let basis: Vec<Monomial> = self
            .entries
            .iter()
            .flat_map(|p| p.terms().map(|(mono, _)| mono.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut k = DMatrix::zeros(basis.len(), self.m());
        for (a, mono) in basis.iter().enumerate() {
            for (j, p) in self.entries.iter().enumerate() {
                k[(a, j)] = p.coeff(mono);
            }
        }
        (basis, k)
    }

    /// Greedy maximal linearly independent subset, scanning entries in
    /// increasing index order.
    ///
    /// An entry joins `idx` unless the coefficient matrix of `idx + [j]` has
    /// rank `idx.len()` *and* the least-squares fit of `p_j` on `p[idx]`
    /// leaves an identically-zero residual at `poly_tol`.
    pub fn independent_subset(&self, rank_tol: T, poly_tol: T) -> IndependentSubset<T> {
        let (_, k) = self.coefficient_matrix();
        let mut idx: Vec<usize> = Vec::new();
        let mut fits: Vec<(usize, Vec<(usize, T)>)> = Vec::new();

        for j in 0..self.m() {
            let cand: Vec<usize> = idx.iter().copied().chain([j]).collect();
            let dependent = numerical_rank(&k.select_columns(&cand), rank_tol) == idx.len() && {
                let kb = k.select_columns(&idx);
                let x = least_squares(&kb, &k.columns(j, 1).into_owned(), rank_tol);
                let mut acc = Accumulator::new(self.n);
                acc.add_scaled(&self.entries[j], T::one());
                for (l, &i) in idx.iter().enumerate() {
                    acc.add_scaled(&self.entries[i], -x[(l, 0)]);
                }
                let residual = ObservableMap {
                    n: self.n,
                    entries: vec![acc.finish()],
                };
                let scale = self.entries[j].max_coef();
                if poly_identity_zero(&residual, poly_tol, scale) {
                    fits.push((j, idx.iter().enumerate().map(|(l, &i)| (i, x[(l, 0)])).collect()));
                    true
                } else {
                    false
                }
            };
            if !dependent {
                idx.push(j);
            }
        }

        let mut q = DMatrix::zeros(fits.len(), idx.len());
        for (row, (_, coefs)) in fits.iter().enumerate() {
            for &(i, c) in coefs {
                let col = idx.iter().position(|&x| x == i).expect("fit uses selected entries");
                q[(row, col)] = c;
            }
        }
        IndependentSubset {
            idx,
            rest: fits.into_iter().map(|(j, _)| j).collect(),
            q,
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        ObservableMap {
            n: self.n,
            entries: indices.iter().map(|&j| self.entries[j].clone()).collect(),
        }
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::dims("observable map arity", self.n, other.n));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(ObservableMap { n: self.n, entries })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, MultiPoly::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, MultiPoly::sub)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&MultiPoly<T>, &MultiPoly<T>) -> MultiPoly<T>) -> Result<Self> {
        if other.n != self.n || other.m() != self.m() {
            return Err(Error::dims(
                "observable map shape",
                format!("{}->{}", self.n, self.m()),
                format!("{}->{}", other.n, other.m()),
            ));
        }
        Ok(ObservableMap {
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn cast<U: Real>(&self) -> ObservableMap<U> {
        ObservableMap {
            n: self.n,
            entries: self.entries.iter().map(MultiPoly::cast).collect(),
        }
    }
}

/// Row-major matrix of polynomials over a common set of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<T> {
    rows: usize,
    cols: usize,
    n_vars: usize,
    entries: Vec<MultiPoly<T>>,
}

impl<T: Real> PolyMatrix<T> {
    pub fn new(rows: usize, cols: usize, n_vars: usize, entries: Vec<MultiPoly<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dims("polynomial matrix entries", rows * cols, entries.len()));
        }
        if let Some(p) = entries.iter().find(|p| p.n_vars() != n_vars) {
            return Err(Error::dims("polynomial matrix arity", n_vars, p.n_vars()));
        }
        Ok(PolyMatrix {
            rows,
            cols,
            n_vars,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly<T> {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[MultiPoly<T>] {
        &self.entries
    }

    pub fn max_coef(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, p| acc.max(p.max_coef()))
    }

    /// Matrix-vector product with a column of polynomials.
    pub fn apply(&self, v: &ObservableMap<T>) -> Result<ObservableMap<T>> {
        if v.m() != self.cols {
            return Err(Error::dims("polynomial matrix product", self.cols, v.m()));
        }
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = Accumulator::new(self.n_vars);
                for k in 0..self.cols {
                    let prod = self.get(i, k).mul(v.entry(k));
                    acc.add_scaled(&prod, T::one());
                }
                acc.finish()
            })
            .collect();
        ObservableMap::new(self.n_vars, entries)
    }

    /// Product with a constant vector.
    pub fn apply_vector(&self, b: &DVector<T>) -> Result<ObservableMap<T>> {
        if b.len() != self.cols {
            return Err(Error::dims("polynomial matrix product", self.cols, b.len()));
        }
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = Accumulator::new(self.n_vars);
                for k in 0..self.cols {
                    acc.add_scaled(self.get(i, k), b[k]);
                }
                acc.finish()
            })
            .collect();
        ObservableMap::new(self.n_vars, entries)
    }

    /// `W * self` for a constant matrix `W`.
    pub fn left_mul(&self, w: &DMatrix<T>) -> Result<Self> {
        if w.ncols() != self.rows {
            return Err(Error::dims("left factor columns", self.rows, w.ncols()));
        }
        let mut entries = Vec::with_capacity(w.nrows() * self.cols);
        for i in 0..w.nrows() {
            for j in 0..self.cols {
                let mut acc = Accumulator::new(self.n_vars);
                for k in 0..self.rows {
                    acc.add_scaled(self.get(k, j), w[(i, k)]);
                }
                entries.push(acc.finish());
            }
        }
        Ok(PolyMatrix {
            rows: w.nrows(),
            cols: self.cols,
            n_vars: self.n_vars,
            entries,
        })
    }
}
