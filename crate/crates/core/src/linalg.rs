//! Small dense linear algebra: numerical rank, rank factorization, the
//! observability matrix and an orthogonal observable staircase form.
//!
//! Matrices here are at most a few tens of rows, so every routine favours
//! determinism and clarity over speed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Real;

/// `G = V W` with `V` of full column rank and `W` of full row rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RankFactorization<T: Real> {
    pub v: DMatrix<T>,
    pub w: DMatrix<T>,
    pub rank: usize,
}

/// Orthogonal change of coordinates splitting off the unobservable part of
/// `(M, G)`:
///
/// ```text
/// P M P^T = [ M1 M2 ]      G P^T = [ 0  G1 ]
///           [ 0  M3 ]
/// ```
///
/// with `M3` of size `rank x rank`. `P` is orthogonal, so `P^-1 = P^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableStaircase<T: Real> {
    pub p: DMatrix<T>,
    pub rank: usize,
    pub m1: DMatrix<T>,
    pub m2: DMatrix<T>,
    pub m3: DMatrix<T>,
    pub g1: DMatrix<T>,
}

pub fn max_abs<T: Real>(x: &DMatrix<T>) -> T {
    x.iter().fold(T::zero(), |acc, v| acc.max(v.magnitude()))
}

/// Singular values in descending order. Empty for a matrix with a zero dimension.
pub fn singular_values<T: Real>(x: &DMatrix<T>) -> DVector<T> {
    if x.is_empty() {
        return DVector::zeros(0);
    }
    let mut sv = x.clone().singular_values();
    sv.as_mut_slice()
        .sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Number of singular values strictly above `tol` times the largest one.
pub fn numerical_rank<T: Real>(x: &DMatrix<T>, tol: T) -> usize {
    let sv = singular_values(x);
    match sv.iter().next() {
        Some(&smax) if smax > T::zero() => sv.iter().filter(|&&s| s > tol * smax).count(),
        _ => 0,
    }
}

/// Householder QR with column pivoting: `A[:, perm] = Q R`.
///
/// The pivot at each step is the remaining column of largest norm; ties go
/// to the lowest column index. Diagonal entries of `R` are made non-negative.
fn pivoted_qr<T: Real>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>, Vec<usize>) {
    let (rows, cols) = a.shape();
    let mut r = a.clone();
    let mut q = DMatrix::<T>::identity(rows, rows);
    let mut perm: Vec<usize> = (0..cols).collect();

    for k in 0..rows.min(cols) {
        let mut best = k;
        let mut best_norm = T::zero();
        for j in k..cols {
            let norm = r.view((k, j), (rows - k, 1)).norm_squared();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        if best_norm == T::zero() {
            break;
        }
        if best != k {
            r.swap_columns(k, best);
            perm.swap(k, best);
        }

        let x: DVector<T> = r.view((k, k), (rows - k, 1)).column(0).into_owned();
        let alpha = x.norm();
        let mut v = x;
        let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
        v[0] += sign * alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        // R[k.., :] -= 2 v (v^T R[k.., :]) / (v^T v)
        for j in 0..cols {
            let dot = (0..rows - k).fold(T::zero(), |acc, i| acc + v[i] * r[(k + i, j)]);
            let f = two * dot / vnorm2;
            for i in 0..rows - k {
                r[(k + i, j)] -= f * v[i];
            }
        }
        // Q[:, k..] -= 2 (Q[:, k..] v) v^T / (v^T v)
        for i in 0..rows {
            let dot = (0..rows - k).fold(T::zero(), |acc, l| acc + q[(i, k + l)] * v[l]);
            let f = two * dot / vnorm2;
            for l in 0..rows - k {
                q[(i, k + l)] -= f * v[l];
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = T::zero();
        }
    }

    for k in 0..rows.min(cols) {
        if r[(k, k)] < T::zero() {
            for j in 0..cols {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..rows {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    (q, r, perm)
}

/// Factors `G = V W` through a column-pivoted QR truncated at the numerical
/// rank. `V` has orthonormal columns.
pub fn rank_factorization<T: Real>(g: &DMatrix<T>, tol: T) -> RankFactorization<T> {
    let (n, m) = g.shape();
    let rank = numerical_rank(g, tol);
    if rank == 0 {
        return RankFactorization {
            v: DMatrix::zeros(n, 0),
            w: DMatrix::zeros(0, m),
            rank: 0,
        };
    }
    let (q, r, perm) = pivoted_qr(g);
    let v = q.columns(0, rank).into_owned();
    let mut w = DMatrix::zeros(rank, m);
    for (k, &col) in perm.iter().enumerate() {
        for i in 0..rank {
            w[(i, col)] = r[(i, k)];
        }
    }
    RankFactorization { v, w, rank }
}

/// Stack of `G, GM, ..., GM^{m-1}`, an `(n*m) x m` matrix.
pub fn observability_matrix<T: Real>(m: &DMatrix<T>, g: &DMatrix<T>) -> Result<DMatrix<T>> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::dims("M", format!("{k}x{k}"), format!("{}x{}", k, m.ncols())));
    }
    if g.ncols() != k {
        return Err(Error::dims("G columns", k, g.ncols()));
    }
    let n = g.nrows();
    let mut out = DMatrix::zeros(n * k, k);
    let mut block = g.clone();
    for i in 0..k {
        out.view_mut((i * n, 0), (n, k)).copy_from(&block);
        block = &block * m;
    }
    Ok(out)
}

/// Flips the sign of `v` so that its largest-magnitude entry is positive.
fn orient<T: Real>(v: &mut DVector<T>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].magnitude() > v[best].magnitude() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < T::zero() {
        v.neg_mut();
    }
}

/// Orthonormal bases `(null, row)` of the null space and row space of `x`,
/// split at `tol` relative to the largest singular value. Row-space vectors
/// come in order of decreasing singular value.
fn null_and_row_space<T: Real>(x: &DMatrix<T>, tol: T) -> (Vec<DVector<T>>, Vec<DVector<T>>) {
    let smax = singular_values(x).iter().copied().fold(T::zero(), T::max);
    split_right_basis(x, tol * smax)
}

/// Right singular vectors of `x`, split into those with singular value at
/// most `cut` and those above it.
fn split_right_basis<T: Real>(x: &DMatrix<T>, cut: T) -> (Vec<DVector<T>>, Vec<DVector<T>>) {
    let cols = x.ncols();
    if cols == 0 {
        return (Vec::new(), Vec::new());
    }
    // Pad to at least square so the SVD returns a full right basis.
    let rows = x.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), x.shape()).copy_from(x);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut null = Vec::new();
    let mut row = Vec::new();
    for &i in &order {
        let mut v: DVector<T> = vt.row(i).transpose();
        orient(&mut v);
        if svd.singular_values[i] > cut && svd.singular_values[i] > T::zero() {
            row.push(v);
        } else {
            null.push(v);
        }
    }
    (null, row)
}

/// Orthonormal basis (as rows) of the row space of the observability
/// matrix, built one Krylov block at a time: `G`, then `Q_j M` for the
/// orthonormal directions `Q_j` found in the previous block. The first block
/// is thresholded against `|G|`, later ones against `|M|`, so widely spread
/// powers of `M` do not swamp small but genuine directions the way an SVD of
/// the raw stack would.
pub fn observable_subspace<T: Real>(m: &DMatrix<T>, g: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::dims("M", format!("{k}x{k}"), format!("{}x{}", k, m.ncols())));
    }
    if g.ncols() != k {
        return Err(Error::dims("G columns", k, g.ncols()));
    }
    let norm2 = |x: &DMatrix<T>| singular_values(x).iter().copied().fold(T::zero(), T::max);
    let m_scale = norm2(m);
    let mut scale = norm2(g);
    let mut basis: Vec<DVector<T>> = Vec::new();
    let mut block = g.clone();
    while basis.len() < k && block.nrows() > 0 && scale > T::zero() {
        let mut rest = block.clone();
        // Two passes of Gram-Schmidt against the basis found so far.
        for _ in 0..2 {
            for mut r in rest.row_iter_mut() {
                for q in &basis {
                    let c = r.dot(&q.transpose());
                    r -= q.transpose() * c;
                }
            }
        }
        let (_, fresh) = split_right_basis(&rest, tol * scale);
        if fresh.is_empty() {
            break;
        }
        let mut next = DMatrix::zeros(fresh.len(), k);
        for (i, mut v) in fresh.into_iter().enumerate() {
            for q in &basis {
                let c = v.dot(q);
                v -= q * c;
            }
            let norm = v.norm();
            v /= norm;
            next.set_row(i, &v.transpose());
            basis.push(v);
            if basis.len() == k {
                break;
            }
        }
        block = next * m;
        scale = m_scale;
    }
    let mut out = DMatrix::zeros(basis.len(), k);
    for (i, v) in basis.iter().enumerate() {
        out.set_row(i, &v.transpose());
    }
    Ok(out)
}

/// Orthogonal observable staircase of `(M, G)`: the rows of `P` are an
/// orthonormal basis of the unobservable subspace followed by one of the
/// row space of the observability matrix (see [`observable_subspace`]).
pub fn observable_staircase<T: Real>(m: &DMatrix<T>, g: &DMatrix<T>, tol: T) -> Result<ObservableStaircase<T>> {
    let obs = observable_subspace(m, g, tol)?;
    let k = m.nrows();
    let n = g.nrows();
    let (null, row) = null_and_row_space(&obs, tol);
    let rank = row.len();
    let mut p = DMatrix::zeros(k, k);
    for (i, v) in null.iter().chain(row.iter()).enumerate() {
        p.set_row(i, &v.transpose());
    }
    let pt = p.transpose();
    let mp = &p * m * &pt;
    let gp = g * &pt;
    let u = k - rank;
    Ok(ObservableStaircase {
        m1: mp.view((0, 0), (u, u)).into_owned(),
        m2: mp.view((0, u), (u, rank)).into_owned(),
        m3: mp.view((u, u), (rank, rank)).into_owned(),
        g1: gp.view((0, u), (n, rank)).into_owned(),
        p,
        rank,
    })
}

/// Minimum-norm least-squares solution of `A X = B`, discarding singular
/// values at or below `tol` relative to the largest.
pub fn least_squares<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: T) -> DMatrix<T> {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.nrows(), "least_squares row count");
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, b.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |acc, &s| acc.max(s));
    svd.solve(b, tol * smax)
        .unwrap_or_else(|_| DMatrix::zeros(cols, b.ncols()))
}

/// Inverse of a square matrix that is non-singular at `tol`.
pub fn invert<T: Real>(p: &DMatrix<T>, tol: T, name: &'static str) -> Result<DMatrix<T>> {
    if !p.is_square() {
        return Err(Error::dims(
            name,
            "square matrix",
            format!("{}x{}", p.nrows(), p.ncols()),
        ));
    }
    if p.nrows() == 0 {
        return Ok(p.clone());
    }
    if numerical_rank(p, tol) < p.nrows() {
        return Err(Error::Singular(name));
    }
    p.clone().try_inverse().ok_or(Error::Singular(name))
}

/// 2-norm condition number; infinite for a singular or empty matrix.
pub fn condition_number<T: Real>(x: &DMatrix<T>) -> T {
    let sv = singular_values(x);
    match (sv.iter().next(), sv.iter().last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        _ => T::lit(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn rank_examples() {
        // [[1,1],[0,0]] row-reduces to a single pivot.
        assert_eq!(numerical_rank(&mat(2, 2, &[1.0, 1.0, 0.0, 0.0]), 1e-9), 1);
        assert_eq!(numerical_rank(&DMatrix::<f64>::identity(4, 4), 1e-9), 4);
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(3, 2), 1e-9), 0);
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(0, 2), 1e-9), 0);
    }

    #[test]
    fn rank_factorization_examples() {
        let g = mat(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let f = rank_factorization(&g, 1e-9);
        assert_eq!(f.rank, 1);
        assert_eq!(f.v, mat(2, 1, &[1.0, 0.0]));
        assert_eq!(f.w, mat(1, 2, &[1.0, 1.0]));
        assert_relative_eq!(&f.v * &f.w, g, epsilon = 1e-15);

        let i3 = DMatrix::<f64>::identity(3, 3);
        let f = rank_factorization(&i3, 1e-9);
        assert_eq!(f.rank, 3);
        assert_relative_eq!(&f.v * &f.w, i3, epsilon = 1e-15);

        let f = rank_factorization(&DMatrix::<f64>::zeros(2, 3), 1e-9);
        assert_eq!(f.rank, 0);
        assert_eq!(f.v.shape(), (2, 0));
        assert_eq!(f.w.shape(), (0, 3));
    }

    #[test]
    fn observability_examples() {
        let o = observability_matrix(&mat(1, 1, &[-2.0]), &mat(2, 1, &[1.0, 0.0])).unwrap();
        assert_eq!(o, mat(2, 1, &[1.0, 0.0]));

        // EX2b blocks: G, GM, GM^2 hand-computed.
        let m = mat(3, 3, &[0.0, 2.0, 3.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let g = mat(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let o = observability_matrix(&m, &g).unwrap();
        assert_eq!(o.nrows(), 6);
        assert_eq!(o.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        assert_eq!(o.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 2.0, 3.0]);
        assert_eq!(o.row(4).iter().copied().collect::<Vec<_>>(), vec![0.0, 4.0, 9.0]);
        assert_eq!(numerical_rank(&o, 1e-9), 3);

        let o = observability_matrix(&DMatrix::<f64>::identity(2, 2), &DMatrix::zeros(3, 2)).unwrap();
        assert_eq!(o, DMatrix::zeros(6, 2));

        assert!(observability_matrix(&DMatrix::<f64>::zeros(2, 3), &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn staircase_splits_unobservable_part() {
        let m = mat(2, 2, &[-2.0, 0.0, 0.0, -3.0]);
        let g = mat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let s = observable_staircase(&m, &g, 1e-9).unwrap();
        assert_eq!(s.rank, 1);
        assert_relative_eq!(s.m3, mat(1, 1, &[-2.0]), epsilon = 1e-12);
        assert_relative_eq!(s.g1, mat(2, 1, &[1.0, 0.0]), epsilon = 1e-12);
        assert_relative_eq!(s.m1, mat(1, 1, &[-3.0]), epsilon = 1e-12);
    }

    #[test]
    fn staircase_full_rank_keeps_everything() {
        let m = mat(3, 3, &[0.0, 2.0, 3.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let g = mat(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let s = observable_staircase(&m, &g, 1e-9).unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(numerical_rank(&s.g1, 1e-9), 1);
        assert_relative_eq!(&s.p * s.p.transpose(), DMatrix::identity(3, 3), epsilon = 1e-12);
        assert_relative_eq!(&s.p.transpose() * &s.m3 * &s.p, m, epsilon = 1e-12);
    }

    #[test]
    fn least_squares_and_inverse() {
        let a = mat(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = mat(3, 1, &[1.0, 2.0, 3.0]);
        let x = least_squares(&a, &b, 1e-12);
        assert_relative_eq!(x, mat(2, 1, &[1.0, 2.0]), epsilon = 1e-12);
        assert!(matches!(
            invert(&mat(2, 2, &[1.0, 2.0, 2.0, 4.0]), 1e-9, "P"),
            Err(Error::Singular("P"))
        ));
        let p = mat(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        assert_relative_eq!(
            invert(&p, 1e-9, "P").unwrap() * &p,
            DMatrix::identity(2, 2),
            epsilon = 1e-12
        );
    }
}
