//! Eulerian phase-space solver: fields obeying L[f] = rhs on a uniform
//! 2-dimensional phase-space box (n = 1), filled by semi-Lagrangian backward
//! characteristic tracing. One global trace per output time; no CFL
//! constraint and no time marching of the grid. Foot points leaving the box
//! are an error, never an extrapolation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::PhasePoint;
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::RVec;
use crate::poly::RealPoly;
use crate::scalar::{c_im, Cplx, Real};
use crate::superposition::AmplitudeProfile;
use crate::wavefield::Axis;

/// Scalar complex field on a uniform (x, p) grid.
#[derive(Debug, Clone)]
pub struct PhaseGridField<T: Real> {
    pub x_axis: Axis<T>,
    pub p_axis: Axis<T>,
    values: Vec<Cplx<T>>,
    pub t: T,
}

impl<T: Real> PhaseGridField<T> {
    pub fn zeros(x_axis: Axis<T>, p_axis: Axis<T>, t: T) -> Self {
        assert!(x_axis.count >= 4 && p_axis.count >= 4);
        PhaseGridField { x_axis, p_axis, values: vec![Cplx::new(T::zero(), T::zero()); x_axis.count * p_axis.count], t }
    }

    pub fn fill(x_axis: Axis<T>, p_axis: Axis<T>, t: T, f: impl Fn(T, T) -> Cplx<T>) -> Self {
        let mut field = Self::zeros(x_axis, p_axis, t);
        for i in 0..x_axis.count {
            for j in 0..p_axis.count {
                field.values[i * p_axis.count + j] = f(x_axis.coord(i), p_axis.coord(j));
            }
        }
        field
    }

    pub fn value(&self, i: usize, j: usize) -> Cplx<T> {
        self.values[i * self.p_axis.count + j]
    }

    pub fn values(&self) -> &[Cplx<T>] {
        &self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.x_axis.count == other.x_axis.count
            && self.p_axis.count == other.p_axis.count
            && (self.x_axis.min - other.x_axis.min).abs() < T::of(1e-12)
            && (self.p_axis.min - other.p_axis.min).abs() < T::of(1e-12)
    }
}

fn cubic_weights<T: Real>(u: T) -> [T; 4] {
    let sixth = T::of(1.0 / 6.0);
    let half = T::of(0.5);
    let um1 = u - T::one();
    let um2 = u - T::of(2.0);
    let up1 = u + T::one();
    [
        -u * um1 * um2 * sixth,
        up1 * um1 * um2 * half,
        -up1 * u * um2 * half,
        up1 * u * um1 * sixth,
    ]
}

fn axis_stencil<T: Real>(axis: &Axis<T>, q: T) -> Option<(usize, T)> {
    let rel = (q - axis.min) / axis.step;
    let max = T::of((axis.count - 1) as f64);
    if rel < -T::of(1e-9) || rel > max + T::of(1e-9) {
        return None;
    }
    let cell = rel.floor().max(T::zero()).min(max - T::one());
    let base = (cell.as_f64() as usize).saturating_sub(1).min(axis.count - 4);
    let u = rel - T::of(base as f64) - T::one();
    Some((base, u))
}

/// Tensor-product cubic interpolation; exact on cubic polynomials.
pub fn sample<T: Real>(field: &PhaseGridField<T>, point: &PhasePoint<T>) -> Result<Cplx<T>> {
    let (bx, ux) = axis_stencil(&field.x_axis, point.x[0])
        .ok_or_else(|| Error::OutsideBox(vec![point.x[0].as_f64(), point.p[0].as_f64()]))?;
    let (bp, up) = axis_stencil(&field.p_axis, point.p[0])
        .ok_or_else(|| Error::OutsideBox(vec![point.x[0].as_f64(), point.p[0].as_f64()]))?;
    let wx = cubic_weights(ux);
    let wp = cubic_weights(up);
    let mut acc = Cplx::new(T::zero(), T::zero());
    for a in 0..4 {
        for b in 0..4 {
            acc = acc + field.value(bx + a, bp + b).scale(wx[a] * wp[b]);
        }
    }
    Ok(acc)
}

/// Backward characteristic foot point of (t, X) under the Hamiltonian flow.
fn trace_back<T: Real>(model: &HamiltonianModel<T>, x: T, p: T, steps: usize, dt: T) -> (T, T) {
    let mut x = x;
    let mut p = p;
    let step = -dt;
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let f = |x: T, p: T| -> (T, T) { (p, -model.v_gradient(&RVec::from_slice(&[x]))[0]) };
    for _ in 0..steps {
        let (k1x, k1p) = f(x, p);
        let (k2x, k2p) = f(x + step * half * k1x, p + step * half * k1p);
        let (k3x, k3p) = f(x + step * half * k2x, p + step * half * k2p);
        let (k4x, k4p) = f(x + step * k3x, p + step * k3p);
        x = x + step * sixth * (k1x + T::of(2.0) * (k2x + k3x) + k4x);
        p = p + step * sixth * (k1p + T::of(2.0) * (k2p + k3p) + k4p);
    }
    (x, p)
}

/// Right-hand-side family for [`advect`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvectKind {
    /// L[f] = 0: pure transport of the initial data (φ components, w).
    Transport,
    /// L[S̃] = p·H_p − H = |p|²/2 − V(x).
    ActionSource,
    /// The (g̃_x, g̃_p) linear system; takes two fields.
    GSystem,
    /// Amplitude transport dÃ/dt = −(Ã/2)tr(M̃); takes (g_x, g_p, Ã).
    Amplitude,
}

fn arity(kind: AdvectKind) -> usize {
    match kind {
        AdvectKind::Transport | AdvectKind::ActionSource => 1,
        AdvectKind::GSystem => 2,
        AdvectKind::Amplitude => 3,
    }
}

/// Semi-Lagrangian solve on the output axes: traces each output node back to
/// 0, interpolates the initial fields at the foot, and integrates the
/// selected source/linear system forward along the characteristic. The
/// initial grid must be padded so every foot stays inside it.
pub fn advect<T: Real>(
    model: &HamiltonianModel<T>,
    initial: &[&PhaseGridField<T>],
    kind: AdvectKind,
    out_x: Axis<T>,
    out_p: Axis<T>,
    t: T,
    dt: T,
) -> Result<Vec<PhaseGridField<T>>> {
    if model.dimension() != 1 {
        return Err(Error::UnsupportedDimension(model.dimension()));
    }
    if initial.len() != arity(kind) {
        return Err(Error::Config(format!(
            "advect kind {:?} needs {} input fields, got {}",
            kind,
            arity(kind),
            initial.len()
        )));
    }
    for f in initial.iter().skip(1) {
        if !f.same_grid(initial[0]) {
            return Err(Error::GridMismatch);
        }
    }
    let steps = crate::flow::step_count(t, dt)?;
    let grid = initial[0];
    let nx = out_x.count;
    let np = out_p.count;

    let results: Result<Vec<Vec<Cplx<T>>>> = (0..nx * np)
        .into_par_iter()
        .map(|flat| {
            let i = flat / np;
            let j = flat % np;
            let xq = out_x.coord(i);
            let pq = out_p.coord(j);
            let (fx, fp) = trace_back(model, xq, pq, steps, dt);
            let foot = PhasePoint::new_1d(fx, fp);
            if axis_stencil(&grid.x_axis, fx).is_none() || axis_stencil(&grid.p_axis, fp).is_none() {
                return Err(Error::OutOfDomain { node: vec![i, j], foot: vec![fx.as_f64(), fp.as_f64()] });
            }
            let init: Result<Vec<Cplx<T>>> = initial.iter().map(|f| sample(f, &foot)).collect();
            let init = init?;
            Ok(integrate_forward(model, kind, fx, fp, &init, steps, dt))
        })
        .collect();
    let results = results?;

    let outputs = arity(kind);
    let mut fields = Vec::with_capacity(outputs);
    for out_idx in 0..outputs {
        let mut f = PhaseGridField::zeros(out_x, out_p, t);
        for (flat, row) in results.iter().enumerate() {
            f.values[flat] = row[out_idx];
        }
        fields.push(f);
    }
    Ok(fields)
}

fn integrate_forward<T: Real>(
    model: &HamiltonianModel<T>,
    kind: AdvectKind,
    fx: T,
    fp: T,
    init: &[Cplx<T>],
    steps: usize,
    dt: T,
) -> Vec<Cplx<T>> {
    match kind {
        AdvectKind::Transport => vec![init[0]],
        AdvectKind::ActionSource => {
            let (s, _, _) = forward_beam_state(model, fx, fp, init[0], None, steps, dt);
            vec![s]
        }
        AdvectKind::GSystem => {
            let (_, gx, gp) =
                forward_beam_state(model, fx, fp, Cplx::new(T::zero(), T::zero()), Some((init[0], init[1])), steps, dt);
            vec![gx, gp]
        }
        AdvectKind::Amplitude => {
            let (gx, gp, a) = forward_amplitude(model, fx, fp, init[0], init[1], init[2], steps, dt);
            vec![gx, gp, a]
        }
    }
}

/// Forward RK4 of (x, p, S, g_x, g_p) along one characteristic.
fn forward_beam_state<T: Real>(
    model: &HamiltonianModel<T>,
    fx: T,
    fp: T,
    s0: Cplx<T>,
    g0: Option<(Cplx<T>, Cplx<T>)>,
    steps: usize,
    dt: T,
) -> (Cplx<T>, Cplx<T>, Cplx<T>) {
    let zero = Cplx::new(T::zero(), T::zero());
    let (gx0, gp0) = g0.unwrap_or((zero, zero));
    let mut state = [Cplx::new(fx, T::zero()), Cplx::new(fp, T::zero()), s0, gx0, gp0];
    let f = |st: &[Cplx<T>; 5]| -> [Cplx<T>; 5] {
        let x = st[0].re;
        let p = st[1].re;
        let xv = RVec::from_slice(&[x]);
        let vpp = model.v_hessian(&xv)[(0, 0)];
        [
            st[1],
            Cplx::new(-model.v_gradient(&xv)[0], T::zero()),
            Cplx::new(p * p * T::of(0.5) - model.v_value(&xv), T::zero()),
            st[4].scale(vpp),
            -st[3],
        ]
    };
    rk4_array(&mut state, f, steps, dt);
    (state[2], state[3], state[4])
}

/// Forward RK4 of (x, p, g_x, g_p, Ã) with dÃ/dt = −(Ã/2)·M̃, M̃ = −g_x/g_p.
fn forward_amplitude<T: Real>(
    model: &HamiltonianModel<T>,
    fx: T,
    fp: T,
    gx0: Cplx<T>,
    gp0: Cplx<T>,
    a0: Cplx<T>,
    steps: usize,
    dt: T,
) -> (Cplx<T>, Cplx<T>, Cplx<T>) {
    let mut state = [Cplx::new(fx, T::zero()), Cplx::new(fp, T::zero()), gx0, gp0, a0];
    let f = |st: &[Cplx<T>; 5]| -> [Cplx<T>; 5] {
        let x = st[0].re;
        let xv = RVec::from_slice(&[x]);
        let vpp = model.v_hessian(&xv)[(0, 0)];
        let m = -st[2] * st[3].inv();
        [
            st[1],
            Cplx::new(-model.v_gradient(&xv)[0], T::zero()),
            st[3].scale(vpp),
            -st[2],
            -st[4] * m.scale(T::of(0.5)),
        ]
    };
    rk4_array(&mut state, f, steps, dt);
    (state[2], state[3], state[4])
}

fn rk4_array<T: Real, const N: usize>(
    state: &mut [Cplx<T>; N],
    f: impl Fn(&[Cplx<T>; N]) -> [Cplx<T>; N],
    steps: usize,
    dt: T,
) {
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    for _ in 0..steps {
        let k1 = f(state);
        let mut s2 = *state;
        for i in 0..N {
            s2[i] = s2[i] + k1[i].scale(dt * half);
        }
        let k2 = f(&s2);
        let mut s3 = *state;
        for i in 0..N {
            s3[i] = s3[i] + k2[i].scale(dt * half);
        }
        let k3 = f(&s3);
        let mut s4 = *state;
        for i in 0..N {
            s4[i] = s4[i] + k3[i].scale(dt);
        }
        let k4 = f(&s4);
        for i in 0..N {
            state[i] = state[i]
                + (k1[i] + (k2[i] + k3[i]).scale(T::of(2.0)) + k4[i]).scale(dt * sixth);
        }
    }
}

/// All first-order Eulerian beam fields on one grid at one time.
#[derive(Debug, Clone)]
pub struct EulerianBeamTable<T: Real> {
    pub s: PhaseGridField<T>,
    pub w: PhaseGridField<T>,
    pub gx: PhaseGridField<T>,
    pub gp: PhaseGridField<T>,
    pub m: PhaseGridField<T>,
    pub a: PhaseGridField<T>,
}

/// One backward-traced pass filling S̃, w, g̃_x, g̃_p, M̃ = −g̃_x/g̃_p, and Ã
/// consistently. Initial data are the nodal closures of (S_in, A_in) sampled
/// on the grid and interpolated at the foot points.
pub fn eulerian_beam_table<T: Real>(
    model: &HamiltonianModel<T>,
    s_in: &RealPoly<T>,
    a_in: &AmplitudeProfile<T>,
    beta: T,
    x_axis: Axis<T>,
    p_axis: Axis<T>,
    t: T,
    dt: T,
) -> Result<EulerianBeamTable<T>> {
    if model.dimension() != 1 {
        return Err(Error::UnsupportedDimension(model.dimension()));
    }
    let steps = crate::flow::step_count(t, dt)?;
    let ib = c_im(T::one() / beta);
    let zero_t = T::zero();

    // pad the initial grid by the corner-ray excursion so feet stay inside
    let (mx, mp) = max_corner_excursion(model, &x_axis, &p_axis, t, dt)?;
    let pad_axis = |axis: Axis<T>, margin: T| -> Axis<T> {
        let extra = ((margin / axis.step).as_f64().ceil() as usize) + 4;
        Axis { min: axis.min - axis.step * T::of(extra as f64), step: axis.step, count: axis.count + 2 * extra }
    };
    let init_x = pad_axis(x_axis, mx);
    let init_p = pad_axis(p_axis, mp);

    let s0 = PhaseGridField::fill(init_x, init_p, zero_t, |x, _| Cplx::new(s_in.eval(&[x]), T::zero()));
    let w0 = PhaseGridField::fill(init_x, init_p, zero_t, |x, p| {
        Cplx::new(p - s_in.derivative(0).eval(&[x]), T::zero())
    });
    let gx0 = PhaseGridField::fill(init_x, init_p, zero_t, |x, _| {
        Cplx::new(T::one(), T::zero())
            - ib.scale(s_in.derivative(0).derivative(0).eval(&[x]))
    });
    let gp0 = PhaseGridField::fill(init_x, init_p, zero_t, |_, _| ib);
    let a0 = PhaseGridField::fill(init_x, init_p, zero_t, |x, _| {
        Cplx::new(a_in.value(&RVec::from_slice(&[x])), T::zero())
    });

    let nx = x_axis.count;
    let np = p_axis.count;
    let rows: Result<Vec<[Cplx<T>; 6]>> = (0..nx * np)
        .into_par_iter()
        .map(|flat| {
            let i = flat / np;
            let j = flat % np;
            let xq = x_axis.coord(i);
            let pq = p_axis.coord(j);
            let (fx, fp) = trace_back(model, xq, pq, steps, dt);
            let foot = PhasePoint::new_1d(fx, fp);
            if axis_stencil(&init_x, fx).is_none() || axis_stencil(&init_p, fp).is_none() {
                return Err(Error::OutOfDomain { node: vec![i, j], foot: vec![fx.as_f64(), fp.as_f64()] });
            }
            let s_init = sample(&s0, &foot)?;
            let w_val = sample(&w0, &foot)?;
            let gx_init = sample(&gx0, &foot)?;
            let gp_init = sample(&gp0, &foot)?;
            let a_init = sample(&a0, &foot)?;

            let (s_val, _, _) = forward_beam_state(model, fx, fp, s_init, None, steps, dt);
            let (gx_val, gp_val, a_val) =
                forward_amplitude(model, fx, fp, gx_init, gp_init, a_init, steps, dt);
            let m_val = -gx_val * gp_val.inv();
            Ok([s_val, w_val, gx_val, gp_val, m_val, a_val])
        })
        .collect();
    let rows = rows?;

    let mut out = EulerianBeamTable {
        s: PhaseGridField::zeros(x_axis, p_axis, t),
        w: PhaseGridField::zeros(x_axis, p_axis, t),
        gx: PhaseGridField::zeros(x_axis, p_axis, t),
        gp: PhaseGridField::zeros(x_axis, p_axis, t),
        m: PhaseGridField::zeros(x_axis, p_axis, t),
        a: PhaseGridField::zeros(x_axis, p_axis, t),
    };
    for (flat, row) in rows.iter().enumerate() {
        out.s.values[flat] = row[0];
        out.w.values[flat] = row[1];
        out.gx.values[flat] = row[2];
        out.gp.values[flat] = row[3];
        out.m.values[flat] = row[4];
        out.a.values[flat] = row[5];
    }
    Ok(out)
}

/// Maximum phase-space excursion of the box corners over [0, t]; the grid
/// must be padded by at least this much for backward feet to stay inside.
pub fn max_corner_excursion<T: Real>(
    model: &HamiltonianModel<T>,
    x_axis: &Axis<T>,
    p_axis: &Axis<T>,
    t: T,
    dt: T,
) -> Result<(T, T)> {
    let mut worst = (T::zero(), T::zero());
    for &x in &[x_axis.min, x_axis.max()] {
        for &p in &[p_axis.min, p_axis.max()] {
            let traj = crate::flow::flow_map(model, &PhasePoint::new_1d(x, p), -t, dt)?;
            for pt in &traj.points {
                worst.0 = worst.0.max((pt.x[0] - x).abs());
                worst.1 = worst.1.max((pt.p[0] - p).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;
    use num_complex::Complex64 as C64;

    fn axis(min: f64, max: f64, count: usize) -> Axis<f64> {
        Axis::covering(min, max, count)
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let f = PhaseGridField::fill(axis(-2.0, 2.0, 21), axis(-2.0, 2.0, 21), 0.0, |x, p| {
            C64::new(x * x * x - 2.0 * x * p + p * p * p, x * p)
        });
        for &(x, p) in &[(0.31, 0.77), (-1.13, 0.42), (1.99, -1.99), (0.0, 0.0)] {
            let got = sample(&f, &PhasePoint::new_1d(x, p)).unwrap();
            let want = C64::new(x * x * x - 2.0 * x * p + p * p * p, x * p);
            assert!((got - want).norm() < 1e-12, "at ({x},{p}): {got} vs {want}");
        }
    }

    #[test]
    fn bilinear_sample_example() {
        let f = PhaseGridField::fill(axis(0.0, 1.0, 11), axis(0.0, 1.0, 11), 0.0, |x, p| {
            C64::new(x * p, 0.0)
        });
        let got = sample(&f, &PhasePoint::new_1d(0.3, 0.7)).unwrap();
        assert!((got.re - 0.21).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_fourth_order() {
        let err = |count: usize| -> f64 {
            let f = PhaseGridField::fill(axis(-2.0, 2.0, count), axis(-2.0, 2.0, 5), 0.0, |x, _| {
                C64::new(x.sin(), 0.0)
            });
            let mut worst: f64 = 0.0;
            for i in 0..200 {
                let x = -1.9 + 3.8 * (i as f64 + 0.5) / 200.0;
                let got = sample(&f, &PhasePoint::new_1d(x, 0.0)).unwrap();
                worst = worst.max((got.re - x.sin()).abs());
            }
            worst
        };
        let ratio = err(65) / err(129);
        assert!(ratio > 11.0 && ratio < 22.0, "h-halving error ratio {ratio}");
    }

    #[test]
    fn transport_examples() {
        // w(0) = p − x for S_in = x²/2, free flow: w(t, x, p) = p(1+t) − x
        let model = HamiltonianModel::free_particle(1, 4);
        let w0 = PhaseGridField::fill(axis(-8.0, 8.0, 129), axis(-8.0, 8.0, 129), 0.0, |x, p| {
            C64::new(p - x, 0.0)
        });
        let out = advect(
            &model, &[&w0], AdvectKind::Transport, axis(-2.0, 2.0, 33), axis(-2.0, 2.0, 33), 1.0, 1e-2,
        )
        .unwrap();
        let got = sample(&out[0], &PhasePoint::new_1d(1.0, 1.0)).unwrap();
        assert!((got.re - 1.0).abs() < 1e-9, "w = {got}");

        // φ(0, X) = X under harmonic rotation: foot of (1, 0) at t = π/2 is (0, 1)
        let model = HamiltonianModel::monomial_1d(0.5, 2, 4);
        let t = std::f64::consts::FRAC_PI_2;
        let phi1 = PhaseGridField::fill(axis(-4.0, 4.0, 81), axis(-4.0, 4.0, 81), 0.0, |x, _| {
            C64::new(x, 0.0)
        });
        let phi2 = PhaseGridField::fill(axis(-4.0, 4.0, 81), axis(-4.0, 4.0, 81), 0.0, |_, p| {
            C64::new(p, 0.0)
        });
        let o1 = advect(
            &model, &[&phi1], AdvectKind::Transport, axis(-2.0, 2.0, 41), axis(-2.0, 2.0, 41), t, t / 500.0,
        )
        .unwrap();
        let o2 = advect(
            &model, &[&phi2], AdvectKind::Transport, axis(-2.0, 2.0, 41), axis(-2.0, 2.0, 41), t, t / 500.0,
        )
        .unwrap();
        let g1 = sample(&o1[0], &PhasePoint::new_1d(1.0, 0.0)).unwrap();
        let g2 = sample(&o2[0], &PhasePoint::new_1d(1.0, 0.0)).unwrap();
        assert!(g1.re.abs() < 1e-7, "phi1 = {g1}");
        assert!((g2.re - 1.0).abs() < 1e-7, "phi2 = {g2}");
    }

    #[test]
    fn action_source_free_flow() {
        // S_in = 0, free flow: S̃(t, x, p) = t p²/2
        let model = HamiltonianModel::free_particle(1, 4);
        let s0 = PhaseGridField::fill(axis(-6.0, 6.0, 97), axis(-6.0, 6.0, 97), 0.0, |_, _| {
            C64::new(0.0, 0.0)
        });
        let out = advect(
            &model, &[&s0], AdvectKind::ActionSource, axis(-2.0, 2.0, 33), axis(-2.0, 2.0, 33), 1.0, 1e-2,
        )
        .unwrap();
        let got = sample(&out[0], &PhasePoint::new_1d(0.0, 1.0)).unwrap();
        assert!((got.re - 0.5).abs() < 1e-6, "S = {got}");
    }

    #[test]
    fn table_matches_initial_closures_at_t0() {
        let model = HamiltonianModel::monomial_1d(0.25, 4, 6);
        let s_in = RealPoly::from_terms(1, [(MultiIndex([2, 0]), 0.5)]);
        let a_in = AmplitudeProfile::Gaussian { a: 1.0, center: RVec::from_slice(&[0.0]) };
        let tbl = eulerian_beam_table(&model, &s_in, &a_in, 1.0, axis(-3.0, 3.0, 33), axis(-3.0, 3.0, 33), 0.0, 1e-2)
            .unwrap();
        for i in [0usize, 7, 16, 32] {
            for j in [0usize, 9, 21, 32] {
                let x = tbl.s.x_axis.coord(i);
                let p = tbl.s.p_axis.coord(j);
                assert!((tbl.s.value(i, j).re - 0.5 * x * x).abs() < 1e-12);
                assert!((tbl.w.value(i, j).re - (p - x)).abs() < 1e-12);
                assert!((tbl.a.value(i, j).re - (-x * x).exp()).abs() < 1e-12);
                assert!((tbl.m.value(i, j) - C64::new(1.0, 1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eulerian_lagrangian_consistency_and_w_conservation() {
        let model = HamiltonianModel::monomial_1d(0.5, 2, 6);
        let s_in = RealPoly::from_terms(1, [(MultiIndex([2, 0]), 0.3), (MultiIndex([1, 0]), 0.1)]);
        let a_in = AmplitudeProfile::Gaussian { a: 1.0, center: RVec::from_slice(&[0.0]) };
        let t = 0.5;
        let dt = 1e-3;
        let tbl = eulerian_beam_table(&model, &s_in, &a_in, 1.0, axis(-2.0, 2.0, 161), axis(-2.0, 2.0, 161), t, dt)
            .unwrap();
        for &x0 in &[-0.6, 0.0, 0.8] {
            let seed = crate::superposition::initial_beam_data(&s_in, &a_in, &RVec::from_slice(&[x0]), 1, 1.0)
                .unwrap();
            let rec = crate::jets::integrate_beam(&model, &seed, t, dt).unwrap();
            let end = rec.samples.last().unwrap();
            let probe = end.point;
            let s_grid = sample(&tbl.s, &probe).unwrap();
            let m_grid = sample(&tbl.m, &probe).unwrap();
            let a_grid = sample(&tbl.a, &probe).unwrap();
            let w_grid = sample(&tbl.w, &probe).unwrap();
            assert!((s_grid.re - end.s).abs() < 1e-6, "S {} vs {}", s_grid.re, end.s);
            assert!((m_grid - end.m[(0, 0)]).norm() < 1e-5, "M {m_grid} vs {}", end.m[(0, 0)]);
            assert!((a_grid - end.amplitude()).norm() < 1e-6);
            assert!(w_grid.norm() < 1e-6, "w on the manifold should vanish, got {w_grid}");
        }
        // Im(M̃) > 0 wherever the trace stayed in the box
        for v in tbl.m.values() {
            assert!(v.im > 0.0);
        }
    }

    #[test]
    fn out_of_domain_foot_is_an_error() {
        let model = HamiltonianModel::free_particle(1, 4);
        let f = PhaseGridField::fill(axis(-1.0, 1.0, 9), axis(-1.0, 1.0, 9), 0.0, |x, _| C64::new(x, 0.0));
        let err = advect(
            &model, &[&f], AdvectKind::Transport, axis(-1.0, 1.0, 9), axis(-1.0, 1.0, 9), 1.0, 1e-2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }), "{err}");
    }

    #[test]
    fn corner_excursion_free_flow() {
        let model = HamiltonianModel::free_particle(1, 4);
        let (dx, dp) = max_corner_excursion(&model, &axis(-1.0, 1.0, 9), &axis(-2.0, 2.0, 9), 1.0, 1e-2).unwrap();
        assert!((dx - 2.0).abs() < 1e-9); // |p|·t for the fastest corner
        assert!(dp.abs() < 1e-12);
    }
}
