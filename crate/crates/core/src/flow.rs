//! Bi-characteristic flow: dX/dt = (H_p, −H_x) with optional variational
//! (Jacobian) equations, integrated with the classical fourth-order scheme on
//! a fixed step shared by every downstream quantity.

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::{RMat, RVec};
use crate::scalar::Real;

/// Point X = (x, p) in 2n-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub x: RVec<T>,
    pub p: RVec<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: RVec<T>, p: RVec<T>) -> Self {
        assert_eq!(x.n, p.n);
        PhasePoint { x, p }
    }

    pub fn new_1d(x: T, p: T) -> Self {
        PhasePoint { x: RVec::from_slice(&[x]), p: RVec::from_slice(&[p]) }
    }

    pub fn dim(&self) -> usize {
        self.x.n
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }

    fn scaled_add(&mut self, c: T, other: &Self) {
        self.x.scaled_add(c, &other.x);
        self.p.scaled_add(c, &other.p);
    }
}

/// Time samples of a flow trajectory on the uniform step grid.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    /// Signed step (negative when flowing backwards in time).
    pub dt: T,
    pub points: Vec<PhasePoint<T>>,
    /// ∂X(t)/∂X₀ per sample when the variational equations were integrated.
    pub jacobians: Option<Vec<RMat<T>>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn initial(&self) -> &PhasePoint<T> {
        &self.points[0]
    }

    pub fn last(&self) -> &PhasePoint<T> {
        self.points.last().expect("non-empty trajectory")
    }

    pub fn time(&self, i: usize) -> T {
        self.dt * T::of(i as f64)
    }

    /// Index of a requested time on the step grid.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let steps = (t / self.dt).as_f64();
        let i = steps.round();
        if (steps - i).abs() > 1e-6 || i < 0.0 || i as usize >= self.len() {
            return Err(Error::TimeOffGrid { t: t.as_f64(), dt: self.dt.as_f64() });
        }
        Ok(i as usize)
    }
}

/// Number of steps for the span `T` at step `dt`; `T` must sit on the grid.
pub fn step_count<T: Real>(total: T, dt: T) -> Result<usize> {
    if dt <= T::zero() {
        return Err(Error::Config("dt must be positive".into()));
    }
    let ratio = (total.abs() / dt).as_f64();
    let m = ratio.round();
    if (ratio - m).abs() > 1e-6 {
        return Err(Error::TimeOffGrid { t: total.as_f64(), dt: dt.as_f64() });
    }
    Ok(m as usize)
}

fn velocity<T: Real>(model: &HamiltonianModel<T>, state: &PhasePoint<T>) -> PhasePoint<T> {
    let grad_v = model.v_gradient(&state.x);
    let mut dp = RVec::zeros(state.dim());
    dp.scaled_add(-T::one(), &grad_v);
    PhasePoint { x: state.p, p: dp }
}

/// dJ/dt = DV(X)·J with DV = [[0, I], [−V_xx, 0]] in (x, p) block form.
fn variational_rhs<T: Real>(model: &HamiltonianModel<T>, state: &PhasePoint<T>, jac: &RMat<T>) -> RMat<T> {
    let n = state.dim();
    let vxx = model.v_hessian(&state.x);
    let mut out = RMat::zeros(2 * n);
    for col in 0..2 * n {
        for i in 0..n {
            // top block: d(x-rows)/dt = p-rows of J
            out[(i, col)] = jac[(n + i, col)];
            // bottom block: d(p-rows)/dt = -Vxx * x-rows
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + vxx[(i, k)] * jac[(k, col)];
            }
            out[(n + i, col)] = -acc;
        }
    }
    out
}

fn rk4_step<T: Real>(
    model: &HamiltonianModel<T>,
    state: &PhasePoint<T>,
    jac: Option<&RMat<T>>,
    dt: T,
) -> (PhasePoint<T>, Option<RMat<T>>) {
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);

    let k1 = velocity(model, state);
    let j1 = jac.map(|j| variational_rhs(model, state, j));

    let mut s2 = *state;
    s2.scaled_add(dt * half, &k1);
    let j2_in = match (jac, &j1) {
        (Some(j), Some(dj)) => {
            let mut m = *j;
            m.scaled_add(dt * half, dj);
            Some(m)
        }
        _ => None,
    };
    let k2 = velocity(model, &s2);
    let j2 = j2_in.as_ref().map(|j| variational_rhs(model, &s2, j));

    let mut s3 = *state;
    s3.scaled_add(dt * half, &k2);
    let j3_in = match (jac, &j2) {
        (Some(j), Some(dj)) => {
            let mut m = *j;
            m.scaled_add(dt * half, dj);
            Some(m)
        }
        _ => None,
    };
    let k3 = velocity(model, &s3);
    let j3 = j3_in.as_ref().map(|j| variational_rhs(model, &s3, j));

    let mut s4 = *state;
    s4.scaled_add(dt, &k3);
    let j4_in = match (jac, &j3) {
        (Some(j), Some(dj)) => {
            let mut m = *j;
            m.scaled_add(dt, dj);
            Some(m)
        }
        _ => None,
    };
    let k4 = velocity(model, &s4);
    let j4 = j4_in.as_ref().map(|j| variational_rhs(model, &s4, j));

    let mut out = *state;
    out.scaled_add(dt * sixth, &k1);
    out.scaled_add(dt * sixth * T::of(2.0), &k2);
    out.scaled_add(dt * sixth * T::of(2.0), &k3);
    out.scaled_add(dt * sixth, &k4);

    let out_jac = jac.map(|j| {
        let mut m = *j;
        m.scaled_add(dt * sixth, &j1.unwrap());
        m.scaled_add(dt * sixth * T::of(2.0), &j2.unwrap());
        m.scaled_add(dt * sixth * T::of(2.0), &j3.unwrap());
        m.scaled_add(dt * sixth, &j4.unwrap());
        m
    });

    (out, out_jac)
}

fn integrate<T: Real>(
    model: &HamiltonianModel<T>,
    start: &PhasePoint<T>,
    total: T,
    dt: T,
    with_jacobian: bool,
) -> Result<Trajectory<T>> {
    if start.dim() != model.dimension() {
        return Err(Error::DimensionMismatch { expected: model.dimension(), got: start.dim() });
    }
    if !start.is_finite() {
        return Err(Error::IntegrationDiverged { t_last: 0.0 });
    }
    let steps = step_count(total, dt)?;
    let step = if total < T::zero() { -dt } else { dt };

    let mut points = Vec::with_capacity(steps + 1);
    let mut jacs = with_jacobian.then(|| Vec::with_capacity(steps + 1));

    let mut state = *start;
    let mut jac = with_jacobian.then(|| RMat::identity(2 * start.dim()));
    points.push(state);
    if let (Some(js), Some(j)) = (jacs.as_mut(), jac.as_ref()) {
        js.push(*j);
    }

    for i in 0..steps {
        let (next, next_jac) = rk4_step(model, &state, jac.as_ref(), step);
        if !next.is_finite() || next_jac.as_ref().map_or(false, |j| !j.is_finite()) {
            return Err(Error::IntegrationDiverged { t_last: (step * T::of(i as f64)).as_f64() });
        }
        state = next;
        jac = next_jac;
        points.push(state);
        if let (Some(js), Some(j)) = (jacs.as_mut(), jac.as_ref()) {
            js.push(*j);
        }
    }

    Ok(Trajectory { dt: step, points, jacobians: jacs })
}

/// Particle-trajectory map X(t, X₀) sampled on the step grid.
pub fn flow_map<T: Real>(
    model: &HamiltonianModel<T>,
    start: &PhasePoint<T>,
    total: T,
    dt: T,
) -> Result<Trajectory<T>> {
    integrate(model, start, total, dt, false)
}

/// Flow together with ∂X(t)/∂X₀ from the variational equations.
pub fn flow_jacobian<T: Real>(
    model: &HamiltonianModel<T>,
    start: &PhasePoint<T>,
    total: T,
    dt: T,
) -> Result<Trajectory<T>> {
    integrate(model, start, total, dt, true)
}
