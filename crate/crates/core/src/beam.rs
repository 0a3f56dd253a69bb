//! First-order beam ingredients along a ray: action S, complex Hessian M from
//! the level-set linear system, the conserved B-matrix, and the leading
//! amplitude. The Hessian comes from the globally well-posed (g_x, g_p)
//! system; direct Riccati integration is kept as a cross-check oracle.

use crate::error::{Error, Result};
use crate::flow::{PhasePoint, Trajectory};
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::{CMat, RVec};
use crate::scalar::{Cplx, Real};

/// Condition-number threshold above which g_p counts as numerically singular.
pub fn singular_cond_threshold<T: Real>() -> T {
    T::of(1e12)
}

/// Per-sample beam state. Higher-order tables are empty below their order.
#[derive(Debug, Clone)]
pub struct BeamSample<T: Real> {
    pub point: PhasePoint<T>,
    /// Action S(t).
    pub s: T,
    pub gx: CMat<T>,
    pub gp: CMat<T>,
    /// Symmetrized −g_x·g_p⁻¹.
    pub m: CMat<T>,
    /// Phase jets m_α, outer index r−3 for order r = 3..k+1, inner by rank.
    pub jets: Vec<Vec<Cplx<T>>>,
    /// Amplitude table ∂^α A_l, outer index l, inner flat over |α| ≤ k−1−2l.
    pub amps: Vec<Vec<Cplx<T>>>,
}

impl<T: Real> BeamSample<T> {
    /// Leading amplitude A = A₀ on the ray.
    pub fn amplitude(&self) -> Cplx<T> {
        self.amps[0][0]
    }
}

/// All per-beam quantities sampled along one bi-characteristic.
#[derive(Debug, Clone)]
pub struct BeamRecord<T: Real> {
    pub k: usize,
    pub beta: T,
    pub x0: RVec<T>,
    pub dt: T,
    pub samples: Vec<BeamSample<T>>,
}

impl<T: Real> BeamRecord<T> {
    pub fn dim(&self) -> usize {
        self.x0.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        self.dt * T::of(i as f64)
    }

    pub fn index_of(&self, t: T) -> Result<usize> {
        let steps = (t / self.dt).as_f64();
        let i = steps.round();
        if (steps - i).abs() > 1e-6 || i < 0.0 || i as usize >= self.len() {
            return Err(Error::TimeOffGrid { t: t.as_f64(), dt: self.dt.as_f64() });
        }
        Ok(i as usize)
    }

    pub fn ray(&self) -> Trajectory<T> {
        Trajectory { dt: self.dt, points: self.samples.iter().map(|s| s.point).collect(), jacobians: None }
    }
}

/// M = −g_x·g_p⁻¹, symmetrized. Fails on singular g_p or asymmetry above 1e−6.
pub fn hessian_from_levelset<T: Real>(gx: &CMat<T>, gp: &CMat<T>) -> Result<CMat<T>> {
    let (gp_inv, cond) = gp.inverse().ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
    if cond > singular_cond_threshold::<T>() {
        return Err(Error::SingularMatrix { cond: cond.as_f64() });
    }
    let m = gx.mul(&gp_inv).neg();
    let asym = m.asymmetry();
    if asym > T::of(1e-6) {
        return Err(Error::ConsistencyViolation(format!(
            "level-set Hessian asymmetry {:.3e} exceeds 1e-6",
            asym.as_f64()
        )));
    }
    Ok(m.symmetrize())
}

/// Conserved B = ḡ_pᵀ g_x − ḡ_xᵀ g_p.
pub fn b_matrix<T: Real>(gx: &CMat<T>, gp: &CMat<T>) -> CMat<T> {
    gp.conj().transpose().mul(gx).sub(&gx.conj().transpose().mul(gp))
}

/// Direct integration of dM/dt + V_xx + M² = 0 along the given ray.
///
/// Cross-check oracle for [`hessian_from_levelset`]; integrates the ray and
/// the Riccati equation jointly so stage values stay fourth-order accurate.
pub fn riccati_reference<T: Real>(
    model: &HamiltonianModel<T>,
    ray: &Trajectory<T>,
    m_in: &CMat<T>,
    dt: T,
) -> Result<Vec<CMat<T>>> {
    let n = model.dimension();
    let eigs = crate::linalg::sym_eigenvalues(&m_in.imag_part());
    if eigs[0] <= T::zero() {
        return Err(Error::ConsistencyViolation("Im(M_in) must be positive definite".into()));
    }
    let steps = ray.len() - 1;
    let step = if ray.dt < T::zero() { -dt } else { dt };

    let rhs = |state: &PhasePoint<T>, m: &CMat<T>| -> (PhasePoint<T>, CMat<T>) {
        let grad_v = model.v_gradient(&state.x);
        let mut dp = RVec::zeros(n);
        dp.scaled_add(-T::one(), &grad_v);
        let vxx = CMat::from_real(&model.v_hessian(&state.x));
        let dm = vxx.add(&m.mul(m)).neg();
        (PhasePoint { x: state.p, p: dp }, dm)
    };

    let mut state = *ray.initial();
    let mut m = *m_in;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(m);
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    for i in 0..steps {
        let (kx1, km1) = rhs(&state, &m);
        let mut s2 = state;
        s2.x.scaled_add(step * half, &kx1.x);
        s2.p.scaled_add(step * half, &kx1.p);
        let mut m2 = m;
        m2.scaled_add(step * half, &km1);
        let (kx2, km2) = rhs(&s2, &m2);

        let mut s3 = state;
        s3.x.scaled_add(step * half, &kx2.x);
        s3.p.scaled_add(step * half, &kx2.p);
        let mut m3 = m;
        m3.scaled_add(step * half, &km2);
        let (kx3, km3) = rhs(&s3, &m3);

        let mut s4 = state;
        s4.x.scaled_add(step, &kx3.x);
        s4.p.scaled_add(step, &kx3.p);
        let mut m4 = m;
        m4.scaled_add(step, &km3);
        let (kx4, km4) = rhs(&s4, &m4);

        state.x.scaled_add(step * sixth, &kx1.x);
        state.x.scaled_add(step * sixth * T::of(2.0), &kx2.x);
        state.x.scaled_add(step * sixth * T::of(2.0), &kx3.x);
        state.x.scaled_add(step * sixth, &kx4.x);
        state.p.scaled_add(step * sixth, &kx1.p);
        state.p.scaled_add(step * sixth * T::of(2.0), &kx2.p);
        state.p.scaled_add(step * sixth * T::of(2.0), &kx3.p);
        state.p.scaled_add(step * sixth, &kx4.p);

        m.scaled_add(step * sixth, &km1);
        m.scaled_add(step * sixth * T::of(2.0), &km2);
        m.scaled_add(step * sixth * T::of(2.0), &km3);
        m.scaled_add(step * sixth, &km4);

        if !m.is_finite() || !state.is_finite() {
            return Err(Error::IntegrationDiverged { t_last: (step * T::of(i as f64)).as_f64() });
        }
        out.push(m);
    }
    Ok(out)
}

/// k=1 beam along the ray from (x₀, ∇S_in(x₀)) with M_in = ∂²S_in(x₀) + iβI
/// and leading amplitude a0 at t = 0.
pub fn integrate_beam_first_order<T: Real>(
    model: &HamiltonianModel<T>,
    x0: &RVec<T>,
    s_in: &crate::poly::RealPoly<T>,
    a0: Cplx<T>,
    beta: T,
    total: T,
    dt: T,
) -> Result<BeamRecord<T>> {
    let seed = crate::jets::BeamSeed::from_polynomial_data(x0, s_in, &[a0], 1, beta)?;
    crate::jets::integrate_beam(model, &seed, total, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RealPoly;
    use num_complex::Complex64 as C64;

    fn zero_phase() -> RealPoly<f64> {
        RealPoly::zero(1)
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn free_particle_hessian_closed_form() {
        // M(t) = i/(1 - i t) = (t + i)/(1 + t^2); frozen oracle at t = 1.
        let model = HamiltonianModel::free_particle(1, 4);
        let rec =
            integrate_beam_first_order(&model, &RVec::from_slice(&[0.0]), &zero_phase(), one(), 1.0, 1.0, 1e-3)
                .unwrap();
        let m = rec.samples.last().unwrap().m[(0, 0)];
        assert!((m - C64::new(0.5, 0.5)).norm() < 1e-8, "M(1) = {m}");
        // Im M(t) = 1/(1+t^2) along the whole record
        for (i, s) in rec.samples.iter().enumerate() {
            let t = rec.time(i);
            assert!((s.m[(0, 0)].im - 1.0 / (1.0 + t * t)).abs() < 1e-8);
        }
    }

    #[test]
    fn free_particle_amplitude_closed_form() {
        // A(t) = (1+t^2)^(-1/4) e^(-i arctan(t)/2); at t = 1: 2^(-1/4) e^(-i pi/8)
        let model = HamiltonianModel::free_particle(1, 4);
        let rec =
            integrate_beam_first_order(&model, &RVec::from_slice(&[0.0]), &zero_phase(), one(), 1.0, 1.0, 1e-3)
                .unwrap();
        let a = rec.samples.last().unwrap().amplitude();
        let expected = C64::from_polar(2f64.powf(-0.25), -std::f64::consts::PI / 8.0);
        assert!((a - expected).norm() < 1e-8, "A(1) = {a}, expected {expected}");
    }

    #[test]
    fn harmonic_action_closed_form() {
        // S(t) = -sin(2t)/4 for x0 = 1, p0 = 0; at t = pi/4 -> -1/4.
        let model = HamiltonianModel::monomial_1d(0.5, 2, 4);
        let t_end = std::f64::consts::FRAC_PI_4;
        let rec = integrate_beam_first_order(
            &model,
            &RVec::from_slice(&[1.0]),
            &zero_phase(),
            one(),
            1.0,
            t_end,
            t_end / 1000.0,
        )
        .unwrap();
        let s = rec.samples.last().unwrap().s;
        assert!((s + 0.25).abs() < 1e-8, "S = {s}");
    }

    #[test]
    fn hessian_from_levelset_cases() {
        // g_x = -iI, g_p = I -> iI
        let n = 1;
        let gx = CMat::scaled_identity(n, C64::new(0.0, -1.0));
        let gp = CMat::identity(n);
        let m = hessian_from_levelset(&gx, &gp).unwrap();
        assert!((m[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);

        // free particle with g = phi1 + i phi2: g_x = 1, g_p = i - t
        let t = 1.0;
        let gx = CMat::scaled_identity(1, C64::new(1.0, 0.0));
        let gp = CMat::scaled_identity(1, C64::new(-t, 1.0));
        let m = hessian_from_levelset(&gx, &gp).unwrap();
        assert!((m[(0, 0)] - C64::new(0.5, 0.5)).norm() < 1e-15);

        // block diagonal n = 2
        let mut gx = CMat::zeros(2);
        gx[(0, 0)] = C64::new(0.0, -1.0);
        gx[(1, 1)] = C64::new(0.0, -2.0);
        let gp = CMat::identity(2);
        let m = hessian_from_levelset(&gx, &gp).unwrap();
        assert!((m[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn hessian_rejects_singular_gp() {
        let gx = CMat::<f64>::identity(1);
        let gp = CMat::<f64>::zeros(1);
        assert!(matches!(hessian_from_levelset(&gx, &gp), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn hessian_rejects_asymmetry() {
        let mut gx = CMat::<f64>::zeros(2);
        gx[(0, 1)] = C64::new(1.0, 0.0);
        let gp = CMat::identity(2);
        assert!(matches!(hessian_from_levelset(&gx, &gp), Err(Error::ConsistencyViolation(_))));
    }

    #[test]
    fn b_matrix_cases() {
        // S_in = 0, beta = 1 convention: g_x = I, g_p = iI -> B = -2iI
        let gx = CMat::<f64>::identity(1);
        let gp = CMat::scaled_identity(1, C64::new(0.0, 1.0));
        let b = b_matrix(&gx, &gp);
        assert!((b[(0, 0)] - C64::new(0.0, -2.0)).norm() < 1e-15);

        // real equal matrices -> 0
        let b = b_matrix(&CMat::<f64>::identity(2), &CMat::identity(2));
        assert!(b.max_abs() < 1e-15);
    }

    #[test]
    fn b_matrix_conserved_along_free_beam() {
        let model = HamiltonianModel::free_particle(1, 4);
        let rec =
            integrate_beam_first_order(&model, &RVec::from_slice(&[0.0]), &zero_phase(), one(), 1.0, 1.0, 1e-3)
                .unwrap();
        let b0 = b_matrix(&rec.samples[0].gx, &rec.samples[0].gp);
        let b1 = b_matrix(&rec.samples.last().unwrap().gx, &rec.samples.last().unwrap().gp);
        assert!(b1.sub(&b0).max_abs() < 1e-10);
    }

    #[test]
    fn riccati_free_particle_closed_form() {
        let model = HamiltonianModel::free_particle(1, 4);
        let ray = crate::flow::flow_map(&model, &PhasePoint::new_1d(0.0, 0.0), 1.0, 1e-3).unwrap();
        let m_in = CMat::scaled_identity(1, C64::new(0.0, 1.0));
        let ms = riccati_reference(&model, &ray, &m_in, 1e-3).unwrap();
        let m_end = ms.last().unwrap()[(0, 0)];
        assert!((m_end - C64::new(0.5, 0.5)).norm() < 1e-10);
    }

    #[test]
    fn riccati_harmonic_linear_fractional() {
        // M(t) = (M0 cos t - sin t) / (cos t + M0 sin t); |M| = 1 for M0 = i.
        let model = HamiltonianModel::monomial_1d(0.5, 2, 4);
        let ray = crate::flow::flow_map(&model, &PhasePoint::new_1d(1.0, 0.0), 1.0, 1e-3).unwrap();
        let m0 = C64::new(0.0, 1.0);
        let ms = riccati_reference(&model, &ray, &CMat::scaled_identity(1, m0), 1e-3).unwrap();
        for (i, m) in ms.iter().enumerate() {
            let t = 1e-3 * i as f64;
            let expected = (m0 * t.cos() - t.sin()) / (t.cos() + m0 * t.sin());
            assert!((m[(0, 0)] - expected).norm() < 1e-8);
            assert!((m[(0, 0)].norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn riccati_zero_horizon_is_identity() {
        let model = HamiltonianModel::monomial_1d(0.25, 4, 6);
        let ray = crate::flow::flow_map(&model, &PhasePoint::new_1d(1.0, 0.0), 0.0, 1e-3).unwrap();
        let m_in = CMat::scaled_identity(1, C64::new(0.3, 2.0));
        let ms = riccati_reference(&model, &ray, &m_in, 1e-3).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0], m_in);
    }
}

#[cfg(test)]
mod conservation_tests {
    use super::*;
    use crate::index::MultiIndex;
    use crate::poly::RealPoly;
    use num_complex::Complex64 as C64;

    /// |A|²·|det g_p| is a transported constant (the phase-space density
    /// carried by each beam).
    #[test]
    fn amplitude_hessian_coupling_is_conserved() {
        for model in [
            HamiltonianModel::free_particle(1, 6),
            HamiltonianModel::monomial_1d(0.5, 2, 6),
            HamiltonianModel::monomial_1d(0.25, 4, 6),
        ] {
            let s_in = RealPoly::from_terms(1, [(MultiIndex([2, 0]), 0.3)]);
            let rec = integrate_beam_first_order(
                &model,
                &RVec::from_slice(&[0.9]),
                &s_in,
                C64::new(1.0, 0.0),
                1.0,
                2.0,
                1e-3,
            )
            .unwrap();
            let f0 = rec.samples[0].amplitude().norm_sqr() * rec.samples[0].gp.det().norm();
            for s in &rec.samples {
                let f = s.amplitude().norm_sqr() * s.gp.det().norm();
                assert!((f - f0).abs() < 1e-7, "density drift {:.3e}", (f - f0).abs());
            }
        }
    }

    /// The raw level-set Hessian is symmetric to 1e-9 before symmetrization.
    #[test]
    fn n2_hessian_asymmetry_stays_tiny() {
        let v = RealPoly::from_terms(
            2,
            [(MultiIndex([4, 0]), 0.25), (MultiIndex([0, 4]), 0.25), (MultiIndex([2, 2]), 0.2)],
        );
        let model = HamiltonianModel::new(2, v, 6);
        let s_in = RealPoly::from_terms(2, [(MultiIndex([2, 0]), 0.2), (MultiIndex([1, 1]), -0.1)]);
        let seed = crate::jets::BeamSeed::from_polynomial_data(
            &RVec::from_slice(&[0.8, -0.5]),
            &s_in,
            &[C64::new(1.0, 0.0)],
            1,
            1.0,
        )
        .unwrap();
        let rec = crate::jets::integrate_beam(&model, &seed, 2.0, 1e-3).unwrap();
        for s in rec.samples.iter().step_by(100) {
            let (inv, _) = s.gp.inverse().unwrap();
            let raw = s.gx.mul(&inv).neg();
            assert!(raw.asymmetry() < 1e-9, "asymmetry {:.3e}", raw.asymmetry());
        }
    }
}
