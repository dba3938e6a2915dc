//! The super-linearization data model, its symbolic validation, the induced
//! control system and visible/hidden classification.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, numerical_rank};
use crate::poly::{poly_identity_zero, ObservableMap};
use crate::{Real, Tolerances};

/// An affine lifted system together with the observables that lift the state:
///
/// ```text
/// x' = A x + G z + B u + D
/// z' = H x + M z + C u + E,      z(0) = p(x(0))
/// ```
///
/// `A: n x n`, `G: n x m`, `H: m x n`, `M: m x m`, `B, D: n`, `C, E: m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperLinearization<T: Real> {
    pub a: DMatrix<T>,
    pub g: DMatrix<T>,
    pub h: DMatrix<T>,
    pub m: DMatrix<T>,
    pub b: DVector<T>,
    pub c: DVector<T>,
    pub d: DVector<T>,
    pub e: DVector<T>,
    pub p: ObservableMap<T>,
}

/// A polynomial control-affine system `x' = f(x) + u g` with constant `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSystem<T: Real> {
    pub f: ObservableMap<T>,
    pub g: DVector<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub visible: Vec<usize>,
    pub hidden: Vec<usize>,
}

impl Classification {
    pub fn m_v(&self) -> usize {
        self.visible.len()
    }

    pub fn m_h(&self) -> usize {
        self.hidden.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check<T> {
    pub name: String,
    pub passed: bool,
    /// Largest residual coefficient magnitude (zero for the shape check).
    pub residual: T,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T: Real> {
    pub checks: Vec<Check<T>>,
    /// `G (dp/dx)(Ax + Gp + D) - G (Hx + Mp + E)`, when shapes conform.
    pub pde1_residual: Option<ObservableMap<T>>,
    /// `G (dp/dx) B - G C`, when shapes conform.
    pub pde2_residual: Option<ObservableMap<T>>,
}

impl<T: Real> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check<T>> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub const SHAPE_CHECK: &str = "shape";
pub const PDE1_CHECK: &str = "PDE-1";
pub const PDE2_CHECK: &str = "PDE-2";

impl<T: Real> SuperLinearization<T> {
    /// Builds a super-linearization, rejecting non-conforming block shapes.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<T>,
        g: DMatrix<T>,
        h: DMatrix<T>,
        m: DMatrix<T>,
        b: DVector<T>,
        c: DVector<T>,
        d: DVector<T>,
        e: DVector<T>,
        p: ObservableMap<T>,
    ) -> Result<Self> {
        let l = SuperLinearization {
            a,
            g,
            h,
            m,
            b,
            c,
            d,
            e,
            p,
        };
        match l.shape_errors().into_iter().next() {
            None => Ok(l),
            Some((field, message)) => Err(Error::shape(field, message)),
        }
    }

    /// Embedding with no observables of the linear system `x' = Ax + Bu + D`.
    pub fn linear(a: DMatrix<T>, b: DVector<T>, d: DVector<T>) -> Result<Self> {
        let n = a.nrows();
        Self::new(
            a,
            DMatrix::zeros(n, 0),
            DMatrix::zeros(0, n),
            DMatrix::zeros(0, 0),
            b,
            DVector::zeros(0),
            d,
            DVector::zeros(0),
            ObservableMap::empty(n),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m_obs(&self) -> usize {
        self.p.m()
    }

    /// Every block whose shape disagrees with `n = A.rows`, `m = p.len()`.
    pub fn shape_errors(&self) -> Vec<(&'static str, String)> {
        let n = self.a.nrows();
        let m = self.p.m();
        let mut errs = Vec::new();
        let mut want = |field: &'static str, got: (usize, usize), rows: usize, cols: usize| {
            if got != (rows, cols) {
                errs.push((field, format!("expected {rows}x{cols}, found {}x{}", got.0, got.1)));
            }
        };
        want("A", self.a.shape(), n, n);
        want("G", self.g.shape(), n, m);
        want("H", self.h.shape(), m, n);
        want("M", self.m.shape(), m, m);
        want("B", self.b.shape(), n, 1);
        want("C", self.c.shape(), m, 1);
        want("D", self.d.shape(), n, 1);
        want("E", self.e.shape(), m, 1);
        if self.p.n() != n {
            errs.push((
                "observables",
                format!("expected maps over {n} variables, found {}", self.p.n()),
            ));
        }
        errs
    }

    /// `(A_l, B_l, D_l)` of the lifted affine system in `n + m` dimensions.
    pub fn lifted(&self) -> (DMatrix<T>, DVector<T>, DVector<T>) {
        let n = self.n();
        let m = self.m_obs();
        let mut al = DMatrix::zeros(n + m, n + m);
        al.view_mut((0, 0), (n, n)).copy_from(&self.a);
        al.view_mut((0, n), (n, m)).copy_from(&self.g);
        al.view_mut((n, 0), (m, n)).copy_from(&self.h);
        al.view_mut((n, n), (m, m)).copy_from(&self.m);
        let mut bl = DVector::zeros(n + m);
        bl.rows_mut(0, n).copy_from(&self.b);
        bl.rows_mut(n, m).copy_from(&self.c);
        let mut dl = DVector::zeros(n + m);
        dl.rows_mut(0, n).copy_from(&self.d);
        dl.rows_mut(n, m).copy_from(&self.e);
        (al, bl, dl)
    }

    /// The lifting `x -> (x, p(x))`.
    pub fn lift(&self, x: &[T]) -> Result<DVector<T>> {
        let px = self.p.eval(x)?;
        Ok(DVector::from_iterator(
            x.len() + px.len(),
            x.iter().copied().chain(px.iter().copied()),
        ))
    }

    pub fn cast<U: Real>(&self) -> SuperLinearization<U> {
        let cm = |x: &DMatrix<T>| x.map(|v| U::lit(v.as_f64()));
        let cv = |x: &DVector<T>| x.map(|v| U::lit(v.as_f64()));
        SuperLinearization {
            a: cm(&self.a),
            g: cm(&self.g),
            h: cm(&self.h),
            m: cm(&self.m),
            b: cv(&self.b),
            c: cv(&self.c),
            d: cv(&self.d),
            e: cv(&self.e),
            p: self.p.cast(),
        }
    }

    /// Largest magnitude among all block entries.
    pub fn max_block_entry(&self) -> T {
        [&self.a, &self.g, &self.h, &self.m]
            .into_iter()
            .map(max_abs)
            .chain([&self.b, &self.c, &self.d, &self.e].into_iter().map(|v| v.amax()))
            .fold(T::zero(), |acc, v| acc.max(v))
    }
}

impl<T: Real> ControlSystem<T> {
    pub fn new(f: ObservableMap<T>, g: DVector<T>) -> Result<Self> {
        if f.m() != f.n() {
            return Err(Error::dims(
                "drift f",
                format!("{0}->{0}", f.n()),
                format!("{}->{}", f.n(), f.m()),
            ));
        }
        if g.len() != f.n() {
            return Err(Error::dims("input vector g", f.n(), g.len()));
        }
        Ok(ControlSystem { f, g })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// `f(x) + u g`.
    pub fn rhs(&self, x: &[T], u: T) -> Result<DVector<T>> {
        Ok(self.f.eval(x)? + &self.g * u)
    }
}

fn affine_part<T: Real>(a: &DMatrix<T>, m_part: ObservableMap<T>, d: &DVector<T>) -> Result<ObservableMap<T>> {
    // a x + m_part + d
    ObservableMap::linear(a)
        .add(&m_part)?
        .add(&ObservableMap::constant(a.ncols(), d))
}

/// Checks block shapes and both polynomial identities
/// `G (dp/dx)(Ax + Gp + D) = G (Hx + Mp + E)` and `G (dp/dx) B = G C`.
pub fn validate<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> ValidationReport<T> {
    let shape_errs = l.shape_errors();
    let shape_ok = shape_errs.is_empty();
    let mut checks = vec![Check {
        name: SHAPE_CHECK.to_string(),
        passed: shape_ok,
        residual: T::zero(),
        detail: shape_errs
            .iter()
            .map(|(f, m)| format!("{f}: {m}"))
            .collect::<Vec<_>>()
            .join("; "),
    }];
    if !shape_ok {
        for name in [PDE1_CHECK, PDE2_CHECK] {
            checks.push(Check {
                name: name.to_string(),
                passed: false,
                residual: T::lit(f64::INFINITY),
                detail: "skipped: block shapes do not conform".to_string(),
            });
        }
        return ValidationReport {
            checks,
            pde1_residual: None,
            pde2_residual: None,
        };
    }

    let pde = |lhs: ObservableMap<T>, rhs: ObservableMap<T>, name: &str| {
        let scale = lhs.max_coef().max(rhs.max_coef());
        let resid = lhs.sub(&rhs).expect("conforming shapes");
        let passed = poly_identity_zero(&resid, tol.poly, scale);
        let detail = if passed {
            String::new()
        } else {
            resid
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(i, p)| format!("row {}: {p}", i + 1))
                .collect::<Vec<_>>()
                .join("; ")
        };
        let check = Check {
            name: name.to_string(),
            passed,
            residual: resid.max_coef(),
            detail,
        };
        (check, resid)
    };

    let jac = l.p.jacobian();
    let gp = l.p.linear_combination(&l.g).expect("conforming shapes");
    let f = affine_part(&l.a, gp, &l.d).expect("conforming shapes");
    let mp = l.p.linear_combination(&l.m).expect("conforming shapes");
    let lifted_rhs = affine_part(&l.h, mp, &l.e).expect("conforming shapes");
    let lhs1 = jac
        .apply(&f)
        .and_then(|v| v.linear_combination(&l.g))
        .expect("conforming shapes");
    let rhs1 = lifted_rhs.linear_combination(&l.g).expect("conforming shapes");
    let (c1, r1) = pde(lhs1, rhs1, PDE1_CHECK);

    let lhs2 = jac
        .apply_vector(&l.b)
        .and_then(|v| v.linear_combination(&l.g))
        .expect("conforming shapes");
    let rhs2 = ObservableMap::constant(l.n(), &(&l.g * &l.c));
    let (c2, r2) = pde(lhs2, rhs2, PDE2_CHECK);

    checks.push(c1);
    checks.push(c2);
    ValidationReport {
        checks,
        pde1_residual: Some(r1),
        pde2_residual: Some(r2),
    }
}

/// Validates and converts a failing report into an error.
pub fn ensure_valid<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> Result<()> {
    let report = validate(l, tol);
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "failed checks: {}",
            report.failures().join(", ")
        )))
    }
}

/// The projected system `x' = Ax + G p(x) + D + u B`.
pub fn induced_control_system<T: Real>(l: &SuperLinearization<T>) -> Result<ControlSystem<T>> {
    let gp = l.p.linear_combination(&l.g)?;
    let f = affine_part(&l.a, gp, &l.d)?;
    ControlSystem::new(f, l.b.clone())
}

/// Column `j` is visible iff some `|G[i,j]|` exceeds `tol.rank * max|G|`.
pub fn classify<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> Classification {
    classify_g(&l.g, tol.rank)
}

pub(crate) fn classify_g<T: Real>(g: &DMatrix<T>, rank_tol: T) -> Classification {
    let threshold = rank_tol * max_abs(g);
    let (visible, hidden) = (0..g.ncols()).partition(|&j| g.column(j).iter().any(|v| v.magnitude() > threshold));
    Classification { visible, hidden }
}

pub fn g_rank<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> usize {
    numerical_rank(&l.g, tol.rank)
}

/// Whether two systems agree coefficient-by-coefficient in their drift and
/// input vector, up to `tol.poly`.
pub fn same_control_system<T: Real>(s1: &ControlSystem<T>, s2: &ControlSystem<T>, tol: &Tolerances<T>) -> bool {
    if s1.n() != s2.n() {
        return false;
    }
    let scale = s1.f.max_coef().max(s2.f.max_coef());
    let drift = s1.f.sub(&s2.f).expect("same arity");
    let gscale = s1.g.amax().max(s2.g.amax());
    let input_ok = (&s1.g - &s2.g).amax() <= tol.poly * (T::one() + gscale);
    input_ok && poly_identity_zero(&drift, tol.poly, scale)
}

/// Whether both embeddings project to the same control system.
pub fn same_system<T: Real>(l1: &SuperLinearization<T>, l2: &SuperLinearization<T>, tol: &Tolerances<T>) -> bool {
    match (induced_control_system(l1), induced_control_system(l2)) {
        (Ok(s1), Ok(s2)) => same_control_system(&s1, &s2, tol),
        _ => false,
    }
}

/// No constant or linear terms in any observable, and linearly independent
/// visible observables.
pub fn is_reduced_visible_form<T: Real>(l: &SuperLinearization<T>, tol: &Tolerances<T>) -> bool {
    let (_, r, s) = l.p.split_affine();
    let bound = tol.poly * (T::one() + l.p.max_coef());
    if max_abs(&r) > bound || s.amax() > bound {
        return false;
    }
    let cls = classify(l, tol);
    let visible = l.p.select(&cls.visible);
    visible.independent_subset(tol.rank, tol.poly).idx.len() == cls.m_v()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::poly::{Monomial, MultiPoly};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn fixtures_validate() {
        for (name, l) in fixtures::all() {
            let report = validate(&l, &tol());
            assert!(report.passed(), "{name}: {:?}", report.failures());
            for c in &report.checks {
                assert!(c.residual <= 1e-12, "{name} {}", c.name);
            }
        }
    }

    #[test]
    fn broken_ex1_has_y_squared_residual() {
        let report = validate(&fixtures::ex1_broken(), &tol());
        assert!(!report.passed());
        assert_eq!(report.failures(), vec![PDE1_CHECK]);
        let resid = report.pde1_residual.unwrap();
        // G (dp/dx) f = (-2y^2, 0) against G (M p) = (-3y^2, 0).
        let y2 = MultiPoly::from_terms(2, [(Monomial::new(vec![0, 2]), 1.0)]);
        assert_eq!(resid.entry(0), &y2);
        assert!(resid.entry(1).is_zero());
    }

    #[test]
    fn shape_mismatch_is_a_failed_check() {
        let mut l = fixtures::ex1();
        l.g = DMatrix::zeros(2, 2);
        let report = validate(&l, &tol());
        assert!(!report.check(SHAPE_CHECK).unwrap().passed);
        assert!(report.check(SHAPE_CHECK).unwrap().detail.contains('G'));
        assert!(report.pde1_residual.is_none());
    }

    #[test]
    fn induced_systems() {
        let x = |c: f64| MultiPoly::linear(2, 0, c);
        let y = |c: f64| MultiPoly::linear(2, 1, c);
        let yk = |k: u32| MultiPoly::from_terms(2, [(Monomial::new(vec![0, k]), 1.0)]);

        let s = induced_control_system(&fixtures::ex1()).unwrap();
        assert_eq!(s.f.entry(0), &x(-1.0).add(&yk(2)));
        assert_eq!(s.f.entry(1), &y(-1.0));
        assert_eq!(s.g.as_slice(), &[1.0, 0.0]);

        let s = induced_control_system(&fixtures::ex2a()).unwrap();
        assert_eq!(s.f.entry(0), &x(-1.0).add(&y(1.0)).add(&yk(2)).add(&yk(3)));
        assert_eq!(s.f.entry(1), &y(1.0));
        assert_eq!(s.g.as_slice(), &[0.0, 0.0]);

        let s2 = induced_control_system(&fixtures::ex2b()).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn classification_examples() {
        let c = classify(&fixtures::ex1(), &tol());
        assert_eq!((c.visible.clone(), c.m_v(), c.m_h()), (vec![0], 1, 0));
        let c = classify(&fixtures::ex2a(), &tol());
        assert_eq!(c.visible, vec![0, 1]);
        let c = classify(&fixtures::ex2b(), &tol());
        assert_eq!((c.visible, c.hidden), (vec![0], vec![1, 2]));
        let c = classify(&fixtures::linear_only(), &tol());
        assert!(c.visible.is_empty() && c.hidden.is_empty());
    }

    #[test]
    fn visible_count_bounds_rank() {
        for (name, l) in fixtures::all() {
            assert!(classify(&l, &tol()).m_v() >= g_rank(&l, &tol()), "{name}");
        }
    }

    #[test]
    fn same_system_examples() {
        assert!(same_system(&fixtures::ex2a(), &fixtures::ex2b(), &tol()));
        assert!(!same_system(&fixtures::ex1(), &fixtures::ex2a(), &tol()));
        assert!(same_system(&fixtures::ex1(), &fixtures::ex1(), &tol()));
        assert!(same_system(&fixtures::ex1(), &fixtures::ex1_shifted(), &tol()));
        assert!(same_system(&fixtures::ex1(), &fixtures::ex1_plus(), &tol()));
    }

    #[test]
    fn reduced_form_detection() {
        assert!(is_reduced_visible_form(&fixtures::ex1(), &tol()));
        assert!(is_reduced_visible_form(&fixtures::ex2b(), &tol()));
        assert!(!is_reduced_visible_form(&fixtures::ex1_shifted(), &tol()));
    }

    #[test]
    fn lifted_blocks() {
        let (al, bl, dl) = fixtures::ex1().lifted();
        assert_eq!(
            al,
            DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, -2.0])
        );
        assert_eq!(bl.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(dl, DVector::zeros(3));
        assert_eq!(fixtures::ex1().lift(&[3.0, 2.0]).unwrap().as_slice(), &[3.0, 2.0, 4.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let l: SuperLinearization<f32> = fixtures::ex2b().cast();
        assert!(validate(&l, &Tolerances::default()).passed());
        assert_eq!(classify(&l, &Tolerances::default()).visible, vec![0]);
    }
}
