use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{ensure_valid, SuperLinearization};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, numerical_rank};
use crate::poly::{Monomial, MultiPoly, ObservableMap};
use crate::transform::{conjugate, shift_observables};
use crate::{Real, Tolerances};

/// Shape of a random instance. States are ordered `(x, y)` with `n_x`
/// driven states and `n_y` states obeying `y' = diag(lambda) y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceSpec {
    pub n_x: usize,
    pub n_y: usize,
    pub m: usize,
    pub degree_max: u32,
    pub target_rank: usize,
    pub scramble: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance<T: Real> {
    pub embedding: SuperLinearization<T>,
    pub true_m_v_star: usize,
    pub seed: u64,
}

const MAX_COND: f64 = 50.0;

/// All exponent vectors in `n_y` variables with total degree in `2..=deg`,
/// ascending in graded-lex order.
fn monomials(n_y: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(prefix, left - 1, budget - e, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    rec(&mut Vec::new(), n_y, deg, &mut all);
    let mut out: Vec<Vec<u32>> = all.into_iter().filter(|e| e.iter().sum::<u32>() >= 2).collect();
    out.sort_by(|a, b| Monomial::new(a.clone()).cmp(&Monomial::new(b.clone())));
    out
}

fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i32, hi: i32) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..=hi) as f64)
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

fn check_spec(spec: &InstanceSpec) -> Result<usize> {
    let InstanceSpec {
        n_x,
        n_y,
        m,
        degree_max,
        target_rank,
        ..
    } = *spec;
    if n_x == 0 || n_y == 0 {
        return Err(Error::Infeasible("need n_x >= 1 and n_y >= 1".into()));
    }
    if degree_max < 2 {
        return Err(Error::Infeasible("degree_max must be at least 2".into()));
    }
    if target_rank == 0 || target_rank > m.min(n_x + n_y) {
        return Err(Error::Infeasible(format!(
            "target_rank must lie in 1..={}",
            m.min(n_x + n_y)
        )));
    }
    if target_rank > n_x {
        return Err(Error::Infeasible(format!(
            "target_rank {target_rank} exceeds n_x = {n_x}: rows of G feeding y must vanish to keep y' linear"
        )));
    }
    let available = monomials(n_y, degree_max).len();
    if available < m {
        return Err(Error::Infeasible(format!(
            "only {available} distinct monomials of degree 2..={degree_max} in {n_y} variables, need {m}"
        )));
    }
    Ok(available)
}

/// Builds a random valid super-linearization whose minimal visible count is
/// known by construction.
///
/// The observables are distinct monomials `y^a` with `2 <= |a| <= degree_max`,
/// so `p_j' = (a_j . lambda) p_j` and the unscrambled instance is already in
/// reduced visible form with `rank G = target_rank`. Scrambling applies a
/// random well-conditioned change of observable coordinates followed by a
/// random affine shift of the observables; both keep the projected system.
pub fn generate_instance<T: Real>(spec: &InstanceSpec, seed: u64) -> Result<GeneratedInstance<T>> {
    check_spec(spec)?;
    let InstanceSpec {
        n_x,
        n_y,
        m,
        degree_max,
        target_rank,
        scramble,
    } = *spec;
    let n = n_x + n_y;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    const EIGS: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
    let lambda: Vec<f64> = (0..n_y).map(|_| EIGS[rng.random_range(0..EIGS.len())]).collect();

    let pool = monomials(n_y, degree_max);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), m).into_vec();
    picked.sort_unstable();
    let exps: Vec<&Vec<u32>> = picked.iter().map(|&i| &pool[i]).collect();

    let entries = exps
        .iter()
        .map(|e| {
            let mut full = vec![0; n_x];
            full.extend_from_slice(e);
            MultiPoly::from_terms(n, [(Monomial::new(full), T::one())])
        })
        .collect();
    let p = ObservableMap::new(n, entries)?;

    let mut mm = DMatrix::zeros(m, m);
    for (j, e) in exps.iter().enumerate() {
        mm[(j, j)] = e.iter().zip(&lambda).map(|(&k, &l)| k as f64 * l).sum::<f64>();
    }

    let g_x = loop {
        let cand = int_matrix(&mut rng, n_x, target_rank, -2, 2) * int_matrix(&mut rng, target_rank, m, -2, 2);
        if numerical_rank(&cand, 1e-9) == target_rank {
            break cand;
        }
    };
    let mut g = DMatrix::zeros(n, m);
    g.view_mut((0, 0), (n_x, m)).copy_from(&g_x);

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (n_x, n))
        .copy_from(&int_matrix(&mut rng, n_x, n, -2, 2));
    for (i, &l) in lambda.iter().enumerate() {
        a[(n_x + i, n_x + i)] = l;
    }
    let mut b = DVector::zeros(n);
    let mut d = DVector::zeros(n);
    b.rows_mut(0, n_x)
        .copy_from(&int_matrix(&mut rng, n_x, 1, -2, 2).column(0));
    d.rows_mut(0, n_x)
        .copy_from(&int_matrix(&mut rng, n_x, 1, -2, 2).column(0));

    let cast_m = |x: &DMatrix<f64>| x.map(T::lit);
    let cast_v = |x: &DVector<f64>| x.map(T::lit);
    let mut l = SuperLinearization::new(
        cast_m(&a),
        cast_m(&g),
        DMatrix::zeros(m, n),
        cast_m(&mm),
        cast_v(&b),
        DVector::zeros(m),
        cast_v(&d),
        DVector::zeros(m),
        p,
    )?;

    let tol = Tolerances::default();
    if scramble {
        let pmat = loop {
            let cand = uniform_matrix(&mut rng, m, m);
            if condition_number(&cand) <= MAX_COND {
                break cand;
            }
        };
        let r = uniform_matrix(&mut rng, m, n);
        let s = DVector::from_fn(m, |_, _| rng.random_range(-1.0..=1.0));
        l = conjugate(&l, &cast_m(&pmat), &tol)?;
        l = shift_observables(&l, &cast_m(&r), &cast_v(&s))?;
    }
    ensure_valid(&l, &tol)?;
    Ok(GeneratedInstance {
        embedding: l,
        true_m_v_star: target_rank,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{classify, same_system, validate};
    use crate::transform::minimal_visible_count;

    fn spec(n_x: usize, n_y: usize, m: usize, deg: u32, rank: usize, scramble: bool) -> InstanceSpec {
        InstanceSpec {
            n_x,
            n_y,
            m,
            degree_max: deg,
            target_rank: rank,
            scramble,
        }
    }

    #[test]
    fn monomial_pool() {
        assert_eq!(monomials(1, 3), vec![vec![2], vec![3]]);
        assert_eq!(monomials(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(monomials(2, 3).len(), 7);
    }

    #[test]
    fn ex1_shaped() {
        for seed in 0..5 {
            let inst = generate_instance::<f64>(&spec(1, 1, 1, 2, 1, false), seed).unwrap();
            let l = &inst.embedding;
            assert_eq!((l.n(), l.m_obs()), (2, 1));
            assert_eq!(l.p.entry(0).terms().next().unwrap().0.exps(), &[0, 2]);
            assert_eq!(l.g[(1, 0)], 0.0);
            assert_eq!(classify(l, &Tolerances::default()).m_v(), 1);
        }
    }

    #[test]
    fn ex2a_shaped() {
        let inst = generate_instance::<f64>(&spec(1, 1, 2, 3, 1, false), 7).unwrap();
        let l = &inst.embedding;
        let degs: Vec<u32> = l.p.entries().iter().map(|p| p.degree().unwrap()).collect();
        assert_eq!(degs, vec![2, 3]);
        let lambda = l.a[(1, 1)];
        assert_eq!(
            l.m,
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0 * lambda, 3.0 * lambda]))
        );
    }

    #[test]
    fn scrambled_keeps_system_and_count() {
        let tol = Tolerances::default();
        for seed in 0..10 {
            let base = generate_instance::<f64>(&spec(3, 2, 4, 3, 2, false), seed).unwrap();
            let scr = generate_instance::<f64>(&spec(3, 2, 4, 3, 2, true), seed).unwrap();
            assert!(validate(&scr.embedding, &tol).passed());
            assert!(same_system(&base.embedding, &scr.embedding, &tol));
            assert_eq!(minimal_visible_count(&scr.embedding, &tol).unwrap(), 2);
            assert_eq!(minimal_visible_count(&base.embedding, &tol).unwrap(), 2);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_instance::<f64>(&spec(2, 2, 3, 3, 2, true), 42).unwrap();
        let b = generate_instance::<f64>(&spec(2, 2, 3, 3, 2, true), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_specs() {
        let err = |s: InstanceSpec| matches!(generate_instance::<f64>(&s, 0), Err(Error::Infeasible(_)));
        assert!(err(spec(1, 1, 3, 3, 1, false)));
        assert!(err(spec(1, 1, 1, 1, 1, false)));
        assert!(err(spec(1, 1, 1, 2, 0, false)));
        assert!(err(spec(1, 2, 3, 2, 2, false)));
    }
}
