//! Constructions mapping one super-linearization of a system to another,
//! and the reduction to reduced visible form that yields the minimal number
//! of visible observables.

use nalgebra::{DMatrix, DVector};

use crate::embedding::{classify, classify_g, ensure_valid, is_reduced_visible_form, SuperLinearization};
use crate::error::{Error, Result};
use crate::linalg::{invert, numerical_rank, observable_staircase, rank_factorization};
use crate::{Real, Tolerances};

/// One step of a reduction pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub name: String,
    pub dims_in: (usize, usize),
    pub dims_out: (usize, usize),
    pub rank_before: usize,
    pub rank_after: usize,
    /// `(m_v, m_h)` before the step.
    pub counts_before: (usize, usize),
    /// `(m_v, m_h)` after the step.
    pub counts_after: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub steps: Vec<StepRecord>,
    pub m_v_star: usize,
}

/// Change of observable coordinates `p -> P p`.
pub fn conjugate<T: Real>(
    l: &SuperLinearization<T>,
    p: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<SuperLinearization<T>> {
    if p.shape() != (l.m_obs(), l.m_obs()) {
        return Err(Error::dims(
            "P",
            format!("{0}x{0}", l.m_obs()),
            format!("{}x{}", p.nrows(), p.ncols()),
        ));
    }
    let p_inv = invert(p, tol.rank, "P")?;
    conjugate_with_inverse(l, p, &p_inv)
}

fn conjugate_with_inverse<T: Real>(
    l: &SuperLinearization<T>,
    p: &DMatrix<T>,
    p_inv: &DMatrix<T>,
) -> Result<SuperLinearization<T>> {
    Ok(SuperLinearization {
        a: l.a.clone(),
        g: &l.g * p_inv,
        h: p * &l.h,
        m: p * &l.m * p_inv,
        b: l.b.clone(),
        c: p * &l.c,
        d: l.d.clone(),
        e: p * &l.e,
        p: l.p.linear_combination(p)?,
    })
}

/// Replaces the observables by `p + R x + S`, adjusting the blocks so the
/// embedding still reproduces the same system.
pub fn shift_observables<T: Real>(
    l: &SuperLinearization<T>,
    r: &DMatrix<T>,
    s: &DVector<T>,
) -> Result<SuperLinearization<T>> {
    let p = l.p.affine_shift(r, s)?;
    let rg = r * &l.g;
    Ok(SuperLinearization {
        a: &l.a - &l.g * r,
        g: l.g.clone(),
        h: &l.h - &l.m * r + r * &l.a - &rg * r,
        m: &l.m + &rg,
        b: l.b.clone(),
        c: &l.c + r * &l.b,
        d: &l.d - &l.g * s,
        e: &l.e - &l.m * s + r * &l.d - &rg * s,
        p,
    })
}

/// Removes every constant and linear term from the observables.
pub fn strip_affine_terms<T: Real>(l: &SuperLinearization<T>) -> Result<SuperLinearization<T>> {
    let (_, r, s) = l.p.split_affine();
    if r.iter().all(|v| *v == T::zero()) && s.iter().all(|v| *v == T::zero()) {
        return Ok(l.clone());
    }
    let mut out = shift_observables(l, &-r, &-s)?;
    // The degree-0/1 terms cancel exactly; drop any residue below threshold.
    let (p0, _, _) = out.p.split_affine();
    out.p = p0;
    Ok(out)
}

/// Appends the observables `W p` for a rank factorization `G = V W`, making
/// them the only visible ones: the new G-matrix is `[0 V]`.
pub fn expand_rank_visible<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> Result<SuperLinearization<T>> {
    let rf = rank_factorization(&l.g, tol.rank);
    let (n, m, r) = (l.n(), l.m_obs(), rf.rank);
    let (v, w) = (rf.v, rf.w);

    let mut g = DMatrix::zeros(n, m + r);
    g.view_mut((0, m), (n, r)).copy_from(&v);

    let mut h = DMatrix::zeros(m + r, n);
    h.view_mut((0, 0), (m, n)).copy_from(&l.h);
    h.view_mut((m, 0), (r, n)).copy_from(&(&w * &l.h));

    let mut mm = DMatrix::zeros(m + r, m + r);
    mm.view_mut((0, 0), (m, m)).copy_from(&l.m);
    mm.view_mut((m, 0), (r, m)).copy_from(&(&w * &l.m));

    let stack = |top: &DVector<T>| {
        let mut out = DVector::zeros(m + r);
        out.rows_mut(0, m).copy_from(top);
        out.rows_mut(m, r).copy_from(&(&w * top));
        out
    };

    Ok(SuperLinearization {
        a: l.a.clone(),
        g,
        h,
        m: mm,
        b: l.b.clone(),
        c: stack(&l.c),
        d: l.d.clone(),
        e: stack(&l.e),
        p: l.p.concat(&l.p.linear_combination(&w)?)?,
    })
}

fn permutation_matrix<T: Real>(order: &[usize]) -> DMatrix<T> {
    let k = order.len();
    let mut p = DMatrix::zeros(k, k);
    for (i, &j) in order.iter().enumerate() {
        p[(i, j)] = T::one();
    }
    p
}

/// Drops visible observables that are linear combinations of other visible
/// observables.
///
/// Requires the G-matrix rank to equal the number of visible observables;
/// [`expand_rank_visible`] establishes that.
pub fn merge_dependent_visible<T: Real>(
    l: &SuperLinearization<T>,
    tol: &Tolerances<T>,
) -> Result<SuperLinearization<T>> {
    let cls = classify(l, tol);
    let rank = numerical_rank(&l.g, tol.rank);
    if rank != cls.m_v() {
        return Err(Error::Precondition(format!(
            "merge needs rank G = m_v, found rank {rank} with {} visible observables",
            cls.m_v()
        )));
    }
    let sub = l.p.select(&cls.visible).independent_subset(tol.rank, tol.poly);
    let indep: Vec<usize> = sub.idx.iter().map(|&i| cls.visible[i]).collect();
    let dep: Vec<usize> = sub.rest.iter().map(|&i| cls.visible[i]).collect();
    if dep.is_empty() {
        return Ok(l.clone());
    }

    // Observables reordered as (hidden, independent visible, dependent visible).
    let order: Vec<usize> = cls.hidden.iter().chain(&indep).chain(&dep).copied().collect();
    let perm = permutation_matrix::<T>(&order);
    let lp = conjugate_with_inverse(l, &perm, &perm.transpose())?;

    let m = l.m_obs();
    let kept = cls.m_h() + indep.len();
    // V = [I; 0 Q] maps the kept observables onto all of them.
    let mut v = DMatrix::zeros(m, kept);
    v.view_mut((0, 0), (kept, kept)).fill_with_identity();
    v.view_mut((kept, cls.m_h()), (dep.len(), indep.len()))
        .copy_from(&sub.q);
    let keep: Vec<usize> = (0..kept).collect();

    Ok(SuperLinearization {
        a: lp.a.clone(),
        g: &lp.g * &v,
        h: lp.h.select_rows(&keep),
        m: (&lp.m * &v).select_rows(&keep),
        b: lp.b.clone(),
        c: lp.c.select_rows(&keep),
        d: lp.d.clone(),
        e: lp.e.select_rows(&keep),
        p: lp.p.select(&keep),
    })
}

/// Keeps only the observables seen through the observability matrix of
/// `(M, G)`, via an orthogonal staircase change of coordinates.
pub fn prune_unobservable<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> Result<SuperLinearization<T>> {
    let st = observable_staircase(&l.m, &l.g, tol.rank)?;
    let m = l.m_obs();
    if st.rank == m {
        return Ok(l.clone());
    }
    let lp = conjugate_with_inverse(l, &st.p, &st.p.transpose())?;
    let keep: Vec<usize> = (m - st.rank..m).collect();
    Ok(SuperLinearization {
        a: lp.a,
        g: st.g1,
        h: lp.h.select_rows(&keep),
        m: st.m3,
        b: lp.b,
        c: lp.c.select_rows(&keep),
        d: lp.d,
        e: lp.e.select_rows(&keep),
        p: lp.p.select(&keep),
    })
}

fn record<T: Real>(
    name: &str,
    before: &SuperLinearization<T>,
    after: &SuperLinearization<T>,
    tol: &Tolerances<T>,
) -> StepRecord {
    let counts = |l: &SuperLinearization<T>| {
        let c = classify_g(&l.g, tol.rank);
        (c.m_v(), c.m_h())
    };
    StepRecord {
        name: name.to_string(),
        dims_in: (before.n(), before.m_obs()),
        dims_out: (after.n(), after.m_obs()),
        rank_before: numerical_rank(&before.g, tol.rank),
        rank_after: numerical_rank(&after.g, tol.rank),
        counts_before: counts(before),
        counts_after: counts(after),
    }
}

/// Strips affine terms, expands to `rank G` visible observables and merges
/// dependent visible ones. The result has no constant or linear observable
/// terms and linearly independent visible observables.
pub fn to_reduced_visible_form<T: Real>(
    l: &SuperLinearization<T>,
    tol: &Tolerances<T>,
) -> Result<(SuperLinearization<T>, ReductionReport)> {
    ensure_valid(l, tol)?;
    let stripped = strip_affine_terms(l)?;
    let expanded = expand_rank_visible(&stripped, tol)?;
    let merged = merge_dependent_visible(&expanded, tol)?;

    let steps = vec![
        record("strip_affine_terms", l, &stripped, tol),
        record("expand_rank_visible", &stripped, &expanded, tol),
        record("merge_dependent_visible", &expanded, &merged, tol),
    ];
    if steps.iter().any(|s| s.rank_after > s.rank_before) {
        return Err(Error::Invalid("rank of G increased during reduction".into()));
    }
    if !is_reduced_visible_form(&merged, tol) {
        return Err(Error::Invalid("reduction did not reach reduced visible form".into()));
    }
    let m_v_star = numerical_rank(&merged.g, tol.rank);
    Ok((merged, ReductionReport { steps, m_v_star }))
}

/// The least number of visible observables over all super-linearizations of
/// the system that `l` embeds.
pub fn minimal_visible_count<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> Result<usize> {
    Ok(to_reduced_visible_form(l, tol)?.1.m_v_star)
}

/// An embedding of the same system with exactly the minimal number of visible
/// observables. Returns `l` itself when it is already minimal.
pub fn realize_minimal_visible<T: Real>(
    l: &SuperLinearization<T>,
    tol: &Tolerances<T>,
) -> Result<SuperLinearization<T>> {
    let (reduced, report) = to_reduced_visible_form(l, tol)?;
    if classify(l, tol).m_v() == report.m_v_star {
        return Ok(l.clone());
    }
    if classify(&reduced, tol).m_v() == report.m_v_star {
        return Ok(reduced);
    }
    expand_rank_visible(&reduced, tol)
}
