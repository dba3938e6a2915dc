use nalgebra::DVector;

use crate::embedding::{induced_control_system, ControlSystem, SuperLinearization};
use crate::error::{Error, Result};
use crate::Real;

/// Piecewise-constant control on right-open intervals: `values[i]` applies
/// on `[breakpoints[i], breakpoints[i+1])`, the last value thereafter and
/// the first value before `breakpoints[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> ControlSignal<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Signal(format!(
                "need one value per breakpoint, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Signal("breakpoints must be strictly ascending".into()));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.finite()) {
            return Err(Error::Signal("breakpoints and values must be finite".into()));
        }
        Ok(ControlSignal { breakpoints, values })
    }

    pub fn constant(v: T) -> Self {
        ControlSignal {
            breakpoints: vec![T::zero()],
            values: vec![v],
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value_at(&self, t: T) -> T {
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.values[i.saturating_sub(1)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<DVector<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DVector<T>> {
        self.states.last()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosimReport<T> {
    /// `max_t |x_lifted(t) - x(t)|_inf`.
    pub max_state_gap: T,
    /// `max_t |G p(x(t)) - G z(t)|_inf`.
    pub max_gp_gap: T,
    pub step: T,
    pub horizon: T,
    /// Time of the last finite state when either trajectory escaped.
    pub truncated_at: Option<T>,
}

/// Full co-simulation output: the report plus both trajectories on the
/// shared grid (the lifted one in `n + m` dimensions).
#[derive(Clone, Debug, PartialEq)]
pub struct Cosimulation<T: Real> {
    pub report: CosimReport<T>,
    pub nonlinear: Trajectory<T>,
    pub lifted: Trajectory<T>,
}

/// Uniform grid of step `h` on `[0, horizon]` with control breakpoints
/// inserted and the final step shortened to land on `horizon`.
pub fn time_grid<T: Real>(horizon: T, h: T, u: &ControlSignal<T>) -> Result<Vec<T>> {
    if !(horizon > T::zero() && h > T::zero() && h <= horizon) || !horizon.finite() {
        return Err(Error::Precondition(format!(
            "need 0 < h <= T, got h = {h}, T = {horizon}"
        )));
    }
    let merge_eps = h * T::lit(1e-9);
    let steps = (horizon / h).as_f64().ceil() as usize;
    let mut grid: Vec<T> = (0..steps)
        .map(|k| h * T::lit(k as f64))
        .filter(|&t| t < horizon)
        .chain(
            u.breakpoints()
                .iter()
                .copied()
                .filter(|&b| b > T::zero() && b < horizon),
        )
        .chain([horizon])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup_by(|b, a| *b - *a <= merge_eps);
    if let Some(last) = grid.last_mut() {
        *last = horizon;
    }
    Ok(grid)
}

/// Classical RK4 over `grid`, holding `u` at its value at the start of each
/// step. Stops at the first non-finite state and returns the time of the
/// last finite one.
fn rk4<T: Real, F>(rhs: F, z0: DVector<T>, grid: &[T], u: &ControlSignal<T>) -> Result<(Trajectory<T>, Option<T>)>
where
    F: Fn(&DVector<T>, T) -> Result<DVector<T>>,
{
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let two = T::lit(2.0);
    let mut times = vec![grid[0]];
    let mut states = vec![z0];
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let uk = u.value_at(t0);
        let z = states.last().expect("non-empty");
        let k1 = rhs(z, uk)?;
        let k2 = rhs(&(z + &k1 * (h * half)), uk)?;
        let k3 = rhs(&(z + &k2 * (h * half)), uk)?;
        let k4 = rhs(&(z + &k3 * h), uk)?;
        let next = z + (k1 + k2 * two + k3 * two + k4) * (h * sixth);
        if next.iter().any(|v| !v.finite()) {
            return Ok((Trajectory { times, states }, Some(t0)));
        }
        times.push(t1);
        states.push(next);
    }
    Ok((Trajectory { times, states }, None))
}

fn nonlinear_run<T: Real>(
    sys: &ControlSystem<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    grid: &[T],
) -> Result<(Trajectory<T>, Option<T>)> {
    if x0.len() != sys.n() {
        return Err(Error::dims("initial state", sys.n(), x0.len()));
    }
    rk4(
        |x, uk| sys.rhs(x.as_slice(), uk),
        DVector::from_column_slice(x0),
        grid,
        u,
    )
}

fn linear_run<T: Real>(
    l: &SuperLinearization<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    grid: &[T],
) -> Result<(Trajectory<T>, Option<T>)> {
    if x0.len() != l.n() {
        return Err(Error::dims("initial state", l.n(), x0.len()));
    }
    let (al, bl, dl) = l.lifted();
    let z0 = l.lift(x0)?;
    rk4(|z, uk| Ok(&al * z + &bl * uk + &dl), z0, grid, u)
}

fn escaped<T: Real>(run: (Trajectory<T>, Option<T>)) -> Result<Trajectory<T>> {
    match run {
        (traj, None) => Ok(traj),
        (_, Some(t)) => Err(Error::FiniteEscape { time: t.as_f64() }),
    }
}

/// Integrates `x' = f(x) + u(t) g` from `x0` over `[0, horizon]`.
pub fn integrate_nonlinear<T: Real>(
    sys: &ControlSystem<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    horizon: T,
    h: T,
) -> Result<Trajectory<T>> {
    let grid = time_grid(horizon, h, u)?;
    escaped(nonlinear_run(sys, x0, u, &grid)?)
}

/// Integrates the lifted affine system from `(x0, p(x0))`.
pub fn integrate_linear<T: Real>(
    l: &SuperLinearization<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    horizon: T,
    h: T,
) -> Result<Trajectory<T>> {
    let grid = time_grid(horizon, h, u)?;
    escaped(linear_run(l, x0, u, &grid)?)
}

/// Runs both integrations on one grid and keeps the trajectories.
pub fn cosimulate_full<T: Real>(
    l: &SuperLinearization<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    horizon: T,
    h: T,
) -> Result<Cosimulation<T>> {
    let grid = time_grid(horizon, h, u)?;
    let sys = induced_control_system(l)?;
    let (nonlinear, esc_x) = nonlinear_run(&sys, x0, u, &grid)?;
    let (lifted, esc_z) = linear_run(l, x0, u, &grid)?;

    let n = l.n();
    let m = l.m_obs();
    let len = nonlinear.len().min(lifted.len());
    let mut max_state_gap = T::zero();
    let mut max_gp_gap = T::zero();
    for k in 0..len {
        let x = &nonlinear.states[k];
        let z = &lifted.states[k];
        max_state_gap = max_state_gap.max((z.rows(0, n) - x).amax());
        let gp = &l.g * l.p.eval(x.as_slice())?;
        let gz = &l.g * z.rows(n, m);
        max_gp_gap = max_gp_gap.max((gp - gz).amax());
    }
    let truncated_at = match (esc_x, esc_z) {
        (None, None) => None,
        _ => Some(grid[len - 1]),
    };
    Ok(Cosimulation {
        report: CosimReport {
            max_state_gap,
            max_gp_gap,
            step: h,
            horizon,
            truncated_at,
        },
        nonlinear,
        lifted,
    })
}

/// Compares the nonlinear flow with the projected lifted flow.
pub fn cosimulate<T: Real>(
    l: &SuperLinearization<T>,
    x0: &[T],
    u: &ControlSignal<T>,
    horizon: T,
    h: T,
) -> Result<CosimReport<T>> {
    Ok(cosimulate_full(l, x0, u, horizon, h)?.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::poly::ObservableMap;

    fn closed_form_ex1(t: f64) -> (f64, f64, f64) {
        // x = 2e^-t - e^-2t, y = e^-t, y^2 = e^-2t from x0 = (1, 1), u = 0.
        ((2.0 * (-t).exp() - (-2.0 * t).exp()), (-t).exp(), (-2.0 * t).exp())
    }

    #[test]
    fn signal_lookup() {
        let u = ControlSignal::new(vec![0.0, 0.5], vec![1.0, -1.0]).unwrap();
        assert_eq!(u.value_at(0.0), 1.0);
        assert_eq!(u.value_at(0.4999), 1.0);
        assert_eq!(u.value_at(0.5), -1.0);
        assert_eq!(u.value_at(7.0), -1.0);
        assert_eq!(u.value_at(-1.0), 1.0);
        assert!(ControlSignal::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ControlSignal::new(vec![0.0], vec![f64::NAN]).is_err());
        assert!(ControlSignal::<f64>::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn grid_includes_breakpoints_and_end() {
        let u = ControlSignal::new(vec![0.0, 0.25], vec![1.0, 0.0]).unwrap();
        let g = time_grid(1.0, 0.3, &u).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], 0.25);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = time_grid(1.0, 1.0, &ControlSignal::constant(0.0)).unwrap();
        assert_eq!(g, vec![0.0, 1.0]);
        assert!(time_grid(1.0, 2.0, &ControlSignal::constant(0.0)).is_err());
        assert!(time_grid(0.0, 0.1, &ControlSignal::constant(0.0)).is_err());
    }

    #[test]
    fn ex1_matches_closed_form() {
        let sys = induced_control_system(&fixtures::ex1()).unwrap();
        let traj = integrate_nonlinear(&sys, &[1.0, 1.0], &ControlSignal::constant(0.0), 1.0, 1e-3).unwrap();
        let (x, y, _) = closed_form_ex1(1.0);
        let end = traj.last().unwrap();
        assert!((end[0] - x).abs() < 1e-8);
        assert!((end[1] - y).abs() < 1e-8);
        assert_eq!(traj.len(), 1001);

        let lifted = integrate_linear(&fixtures::ex1(), &[1.0, 1.0], &ControlSignal::constant(0.0), 1.0, 1e-3).unwrap();
        let (x, y, z) = closed_form_ex1(1.0);
        let end = lifted.last().unwrap();
        assert!((end[0] - x).abs() < 1e-8);
        assert!((end[1] - y).abs() < 1e-8);
        assert!((end[2] - z).abs() < 1e-8);
    }

    #[test]
    fn zero_drift_stays_put() {
        let sys = ControlSystem::new(ObservableMap::zeros(2, 2), DVector::zeros(2)).unwrap();
        let traj = integrate_nonlinear(&sys, &[0.3, -0.7], &ControlSignal::constant(0.0), 0.5, 0.5).unwrap();
        assert_eq!(traj.states, vec![DVector::from_vec(vec![0.3, -0.7]); 2]);
    }

    #[test]
    fn equilibrium_at_origin() {
        let sys = induced_control_system(&fixtures::ex2a()).unwrap();
        let traj = integrate_nonlinear(&sys, &[0.0, 0.0], &ControlSignal::constant(0.0), 1.0, 1e-2).unwrap();
        assert!(traj.states.iter().all(|x| x.amax() == 0.0));
        let lifted =
            integrate_linear(&fixtures::ex2a(), &[0.0, 0.0], &ControlSignal::constant(0.0), 1.0, 1e-2).unwrap();
        assert!(lifted.states.iter().all(|z| z.amax() == 0.0));
    }

    #[test]
    fn ex2b_hidden_relation_is_invariant() {
        let traj = integrate_linear(&fixtures::ex2b(), &[0.0, 1.0], &ControlSignal::constant(0.0), 1.0, 1e-3).unwrap();
        assert_eq!(traj.states[0].as_slice(), &[0.0, 1.0, 2.0, 1.0, 1.0]);
        for z in &traj.states {
            assert!((z[2] - z[3] - z[4]).abs() < 1e-8);
        }
    }

    #[test]
    fn cosim_examples() {
        let u = ControlSignal::new(vec![0.0, 0.5], vec![1.0, -1.0]).unwrap();
        let r = cosimulate(&fixtures::ex1(), &[1.0, 1.0], &u, 2.0, 1e-3).unwrap();
        assert!(r.max_state_gap <= 1e-6);
        assert!(r.truncated_at.is_none());

        let r = cosimulate(
            &fixtures::ex2b(),
            &[0.5, -0.5],
            &ControlSignal::constant(0.0),
            1.0,
            1e-3,
        )
        .unwrap();
        assert!(r.max_gp_gap <= 1e-6);

        let r = cosimulate(
            &fixtures::ex2b(),
            &[0.9, -0.4],
            &ControlSignal::constant(0.0),
            1e-3,
            1e-3,
        )
        .unwrap();
        assert!(r.max_state_gap <= 1e-12 && r.max_gp_gap <= 1e-12);
    }

    #[test]
    fn finite_escape_is_reported() {
        // y' = y^2 escapes at t = 1 from y = 1.
        let mut l = fixtures::ex1();
        l.a = nalgebra::DMatrix::zeros(2, 2);
        l.g = nalgebra::DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let sys = induced_control_system(&l).unwrap();
        let err = integrate_nonlinear(&sys, &[0.0, 1.0], &ControlSignal::constant(0.0), 5.0, 0.01);
        assert!(matches!(err, Err(Error::FiniteEscape { .. })));
        let r = cosimulate(&l, &[0.0, 1.0], &ControlSignal::constant(0.0), 5.0, 0.01).unwrap();
        let t = r.truncated_at.expect("escape detected");
        assert!(t > 0.9 && t < 5.0);
    }
}
