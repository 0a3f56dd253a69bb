//! Higher-order beam hierarchy: Taylor coefficients of the phase m_α for
//! |α| = 3..k+1 and the amplitude table ∂^α A_l, evolved along rays.
//!
//! The coupled systems are generated programmatically from the Schrödinger
//! structure. Writing G = Φ_t + |∇Φ|²/2 + V and forcing ∂^α G = 0 on the ray
//! gives, after the advection terms p·m_{α+e_j} cancel,
//!
//!   dm_α/dt = −Σ_i α_i Σ_j M_{ij} m_{α−e_i+e_j}
//!             − ½ Σ_{2≤|η|≤|α|−2, η≤α} C(α,η) Σ_j m_{η+e_j} m_{α−η+e_j}
//!             − ∂^α V(x(t)),
//!
//! and the transport operator restricted to the ray acts as
//! L|_γ = d/dt + ½tr M, with its α-differentiated coefficients built from the
//! same jets. Everything of order r couples linearly through M; lower orders
//! enter as data, so the hierarchy is solved order by order.

use crate::beam::{BeamRecord, BeamSample};
use crate::error::{Error, Result};
use crate::flow::{PhasePoint, Trajectory};
use crate::hamiltonian::HamiltonianModel;
use crate::index::MultiIndex;
use crate::linalg::{CMat, RVec};
use crate::poly::RealPoly;
use crate::scalar::{c_im, Cplx, Real};

/// Number of amplitude levels N = ⌊(k−1)/2⌋ + 1.
pub fn amplitude_levels(k: usize) -> usize {
    (k - 1) / 2 + 1
}

/// Highest stored derivative order of A_l: k − 1 − 2l.
pub fn amplitude_max_order(k: usize, level: usize) -> usize {
    k - 1 - 2 * level
}

/// Flat enumeration of multi-indices with |α| ≤ max_order.
#[derive(Debug, Clone)]
pub struct AmpLayout {
    pub n: usize,
    pub max_order: usize,
    indices: Vec<MultiIndex>,
}

impl AmpLayout {
    pub fn new(n: usize, max_order: usize) -> Self {
        let mut indices = Vec::new();
        for r in 0..=max_order as u32 {
            indices.extend(MultiIndex::of_order(n, r));
        }
        AmpLayout { n, max_order, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.order() as usize > self.max_order {
            return None;
        }
        let mut offset = 0;
        for r in 0..alpha.order() {
            offset += MultiIndex::of_order(self.n, r).len();
        }
        Some(offset + alpha.rank(self.n))
    }
}

/// Reference to a phase derivative of order ≥ 2: either a Hessian entry or a
/// stored jet coefficient.
#[derive(Debug, Clone, Copy)]
enum MRef {
    Hess(usize, usize),
    Jet { order: usize, rank: usize },
}

fn m_ref(n: usize, kappa: &MultiIndex) -> MRef {
    let r = kappa.order() as usize;
    debug_assert!(r >= 2);
    if r == 2 {
        // kappa = e_i + e_j
        let (i, j) = if n == 1 {
            (0, 0)
        } else {
            match (kappa.get(0), kappa.get(1)) {
                (2, 0) => (0, 0),
                (1, 1) => (0, 1),
                (0, 2) => (1, 1),
                _ => unreachable!(),
            }
        };
        MRef::Hess(i, j)
    } else {
        MRef::Jet { order: r, rank: kappa.rank(n) }
    }
}

#[derive(Debug, Clone)]
struct JetLinearTerm {
    i: usize,
    j: usize,
    weight: f64,
    target_rank: usize,
}

#[derive(Debug, Clone)]
struct JetBilinearTerm {
    weight: f64,
    left: MRef,
    right: MRef,
}

#[derive(Debug, Clone)]
struct JetEquation {
    alpha: MultiIndex,
    linear: Vec<JetLinearTerm>,
    bilinear: Vec<JetBilinearTerm>,
}

/// Closed-form coefficient generator for one jet order r.
#[derive(Debug, Clone)]
pub struct JetOrderSystem {
    pub order: usize,
    equations: Vec<JetEquation>,
}

/// Coefficient generator for all jet orders 3..k+1 of a k-th order beam.
#[derive(Debug, Clone)]
pub struct PhaseJetSystem {
    pub n: usize,
    pub k: usize,
    orders: Vec<JetOrderSystem>,
}

impl PhaseJetSystem {
    /// Evaluates dm_α/dt for every stored order, given the Hessian, the jets,
    /// and a callback for ∂^α V at the current ray point.
    pub fn rhs_values<T: Real>(
        &self,
        m: &CMat<T>,
        jets: &[Vec<Cplx<T>>],
        v_deriv: impl Fn(&MultiIndex) -> T,
    ) -> Vec<Vec<Cplx<T>>> {
        let mut out = Vec::with_capacity(self.orders.len());
        for sys in &self.orders {
            let ri = sys.order - 3;
            let mut row = Vec::with_capacity(sys.equations.len());
            for eq in &sys.equations {
                let mut acc = Cplx::new(T::zero(), T::zero());
                for term in &eq.linear {
                    acc = acc
                        - (m[(term.i, term.j)] * jets[ri][term.target_rank])
                            .scale(T::of(term.weight));
                }
                for term in &eq.bilinear {
                    let lv = resolve(m, jets, term.left);
                    let rv = resolve(m, jets, term.right);
                    acc = acc + (lv * rv).scale(T::of(term.weight));
                }
                acc = acc - Cplx::new(v_deriv(&eq.alpha), T::zero());
                row.push(acc);
            }
            out.push(row);
        }
        out
    }
}

/// Builds the order-by-order jet systems for the given model dimension.
pub fn derive_phase_jet_system<T: Real>(
    model: &HamiltonianModel<T>,
    k: usize,
) -> Result<PhaseJetSystem> {
    if k == 0 || k > 3 {
        return Err(Error::UnsupportedOrder(k));
    }
    if model.max_derivative_order() < k + 2 {
        return Err(Error::OrderExceeded { order: k + 2, max: model.max_derivative_order() });
    }
    let n = model.dimension();
    let mut orders = Vec::new();
    for r in 3..=(k + 1) as u32 {
        let mut equations = Vec::new();
        for alpha in MultiIndex::of_order(n, r) {
            let mut linear = Vec::new();
            for i in 0..n {
                let ai = alpha.get(i);
                if ai == 0 {
                    continue;
                }
                let lowered = alpha.checked_sub(&MultiIndex::unit(i)).unwrap();
                for j in 0..n {
                    let target = lowered.add_unit(j);
                    linear.push(JetLinearTerm {
                        i,
                        j,
                        weight: ai as f64,
                        target_rank: target.rank(n),
                    });
                }
            }
            let mut bilinear = Vec::new();
            for eta in alpha.sub_indices() {
                let eo = eta.order();
                if eo < 2 || eo > r.saturating_sub(2) {
                    continue;
                }
                let rem = alpha.checked_sub(&eta).unwrap();
                let w = -0.5 * alpha.binomial(&eta) as f64;
                for j in 0..n {
                    bilinear.push(JetBilinearTerm {
                        weight: w,
                        left: m_ref(n, &eta.add_unit(j)),
                        right: m_ref(n, &rem.add_unit(j)),
                    });
                }
            }
            equations.push(JetEquation { alpha, linear, bilinear });
        }
        orders.push(JetOrderSystem { order: r as usize, equations });
    }
    Ok(PhaseJetSystem { n, k, orders })
}

#[derive(Debug, Clone)]
struct AmpCouplingTerm {
    weight: f64,
    m: MRef,
    /// Flat position of the coupled derivative within the same level.
    a_pos: usize,
}

#[derive(Debug, Clone)]
struct AmpEquation {
    coupling: Vec<AmpCouplingTerm>,
    /// Flat positions of Δ-source entries in level l−1 (empty for level 0).
    laplace: Vec<usize>,
}

#[derive(Debug, Clone)]
struct AmplitudeSystem {
    equations: Vec<Vec<AmpEquation>>,
}

fn derive_amplitude_system(n: usize, k: usize) -> AmplitudeSystem {
    let levels = amplitude_levels(k);
    let layouts: Vec<AmpLayout> =
        (0..levels).map(|l| AmpLayout::new(n, amplitude_max_order(k, l))).collect();
    let mut equations = Vec::new();
    for l in 0..levels {
        let layout = &layouts[l];

        let mut eqs = Vec::new();
        for alpha in layout.indices() {
            let mut coupling = Vec::new();
            for eta in alpha.sub_indices() {
                if eta == *alpha {
                    continue;
                }
                let rem = alpha.checked_sub(&eta).unwrap();
                let b = alpha.binomial(&eta) as f64;
                for j in 0..n {
                    coupling.push(AmpCouplingTerm {
                        weight: -b,
                        m: m_ref(n, &rem.add_unit(j)),
                        a_pos: layout.position(&eta.add_unit(j)).expect("within level"),
                    });
                    coupling.push(AmpCouplingTerm {
                        weight: -0.5 * b,
                        m: m_ref(n, &rem.add_unit(j).add_unit(j)),
                        a_pos: layout.position(&eta).expect("within level"),
                    });
                }
            }
            let mut laplace = Vec::new();
            if l >= 1 {
                for j in 0..n {
                    let idx = alpha.add_unit(j).add_unit(j);
                    laplace.push(layouts[l - 1].position(&idx).expect("within lower level"));
                }
            }
            eqs.push(AmpEquation { coupling, laplace });
        }
        equations.push(eqs);
    }
    AmplitudeSystem { equations }
}

/// Initial data for one beam: everything the integrator needs at t = 0.
#[derive(Debug, Clone)]
pub struct BeamSeed<T: Real> {
    pub x0: RVec<T>,
    pub p0: RVec<T>,
    pub s0: T,
    pub k: usize,
    pub beta: T,
    pub gx0: CMat<T>,
    pub gp0: CMat<T>,
    pub m_in: CMat<T>,
    /// m_α(0) per order 3..k+1, by rank.
    pub jets0: Vec<Vec<Cplx<T>>>,
    /// ∂^α A_l(0) per level, flat layout.
    pub amps0: Vec<Vec<Cplx<T>>>,
}

impl<T: Real> BeamSeed<T> {
    /// Seed from polynomial initial phase and the flat table of initial
    /// amplitude derivatives (level 0, layout order).
    pub fn from_polynomial_data(
        x0: &RVec<T>,
        s_in: &RealPoly<T>,
        a0_derivs: &[Cplx<T>],
        k: usize,
        beta: T,
    ) -> Result<Self> {
        if k == 0 || k > 3 {
            return Err(Error::UnsupportedOrder(k));
        }
        if beta <= T::zero() {
            return Err(Error::Config("beta must be positive".into()));
        }
        let n = x0.n;
        if s_in.nvars() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s_in.nvars() });
        }
        let xs = x0.as_slice();
        let s0 = s_in.eval(xs);
        let mut p0 = RVec::zeros(n);
        for j in 0..n {
            p0[j] = s_in.derivative(j).eval(xs);
        }
        let mut hess = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let alpha = MultiIndex::unit(i).add_unit(j);
                hess[(i, j)] = Cplx::new(s_in.derivative_multi(&alpha).eval(xs), T::zero());
            }
        }
        let i_over_beta = c_im(T::one() / beta);
        // g = φ₁ + (i/β)φ₂ with (φ₁, φ₂)(0, X) = (x, p − ∇S_in(x))
        let gx0 = CMat::identity(n).sub(&hess.scale_c(i_over_beta));
        let gp0 = CMat::scaled_identity(n, i_over_beta);
        let m_in = hess.add(&CMat::scaled_identity(n, c_im(beta)));

        let mut jets0 = Vec::new();
        for r in 3..=(k + 1) as u32 {
            let row: Vec<Cplx<T>> = MultiIndex::of_order(n, r)
                .iter()
                .map(|a| Cplx::new(s_in.derivative_multi(a).eval(xs), T::zero()))
                .collect();
            jets0.push(row);
        }

        let levels = amplitude_levels(k);
        let layout0 = AmpLayout::new(n, amplitude_max_order(k, 0));
        if a0_derivs.len() != layout0.len() {
            return Err(Error::Config(format!(
                "initial amplitude table needs {} entries, got {}",
                layout0.len(),
                a0_derivs.len()
            )));
        }
        let mut amps0 = vec![a0_derivs.to_vec()];
        for l in 1..levels {
            amps0.push(vec![Cplx::new(T::zero(), T::zero()); AmpLayout::new(n, amplitude_max_order(k, l)).len()]);
        }

        Ok(BeamSeed { x0: *x0, p0, s0, k, beta, gx0, gp0, m_in, jets0, amps0 })
    }
}

/// Full integration state for one beam.
#[derive(Debug, Clone)]
struct BeamState<T: Real> {
    x: RVec<T>,
    p: RVec<T>,
    s: T,
    gx: CMat<T>,
    gp: CMat<T>,
    jets: Vec<Vec<Cplx<T>>>,
    amps: Vec<Vec<Cplx<T>>>,
}

impl<T: Real> BeamState<T> {
    fn scaled_add(&mut self, c: T, other: &Self) {
        self.x.scaled_add(c, &other.x);
        self.p.scaled_add(c, &other.p);
        self.s = self.s + c * other.s;
        self.gx.scaled_add(c, &other.gx);
        self.gp.scaled_add(c, &other.gp);
        for (mine, theirs) in self.jets.iter_mut().zip(&other.jets) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = *a + b.scale(c);
            }
        }
        for (mine, theirs) in self.amps.iter_mut().zip(&other.amps) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = *a + b.scale(c);
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.p.is_finite()
            && self.s.is_finite()
            && self.gx.is_finite()
            && self.gp.is_finite()
            && self.jets.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
            && self.amps.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn resolve<T: Real>(m: &CMat<T>, jets: &[Vec<Cplx<T>>], r: MRef) -> Cplx<T> {
    match r {
        MRef::Hess(i, j) => m[(i, j)],
        MRef::Jet { order, rank } => jets[order - 3][rank],
    }
}

struct BeamOde<'a, T: Real> {
    model: &'a HamiltonianModel<T>,
    jet_sys: PhaseJetSystem,
    amp_sys: AmplitudeSystem,
}

impl<'a, T: Real> BeamOde<'a, T> {
    fn new(model: &'a HamiltonianModel<T>, k: usize) -> Result<Self> {
        let jet_sys = derive_phase_jet_system(model, k)?;
        let amp_sys = derive_amplitude_system(model.dimension(), k);
        Ok(BeamOde { model, jet_sys, amp_sys })
    }

    fn rhs(&self, state: &BeamState<T>) -> Result<BeamState<T>> {
        let n = self.model.dimension();
        let grad_v = self.model.v_gradient(&state.x);
        let vxx = self.model.v_hessian(&state.x);

        let mut dp = RVec::zeros(n);
        dp.scaled_add(-T::one(), &grad_v);
        let ds = state.p.norm_sq() * T::of(0.5) - self.model.v_value(&state.x);
        let dgx = CMat::from_real(&vxx).mul(&state.gp);
        let dgp = state.gx.neg();

        let (gp_inv, cond) = state
            .gp
            .inverse()
            .ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
        if cond > crate::beam::singular_cond_threshold::<T>() {
            return Err(Error::SingularMatrix { cond: cond.as_f64() });
        }
        let m = state.gx.mul(&gp_inv).neg().symmetrize();

        let djets =
            self.jet_sys.rhs_values(&m, &state.jets, |a| self.model.v_derivative_at(a, &state.x));

        let half_tr_m = m.trace().scale(T::of(0.5));
        let mut damps: Vec<Vec<Cplx<T>>> = Vec::with_capacity(state.amps.len());
        for (l, eqs) in self.amp_sys.equations.iter().enumerate() {
            let mut row = Vec::with_capacity(eqs.len());
            for (pos, eq) in eqs.iter().enumerate() {
                let mut acc = -half_tr_m * state.amps[l][pos];
                for term in &eq.coupling {
                    let mv = resolve(&m, &state.jets, term.m);
                    acc = acc + (mv * state.amps[l][term.a_pos]).scale(T::of(term.weight));
                }
                for &src in &eq.laplace {
                    acc = acc + (c_im(T::of(0.5)) * state.amps[l - 1][src]);
                }
                row.push(acc);
            }
            damps.push(row);
        }

        Ok(BeamState { x: state.p, p: dp, s: ds, gx: dgx, gp: dgp, jets: djets, amps: damps })
    }

    fn rk4_step(&self, state: &BeamState<T>, dt: T) -> Result<BeamState<T>> {
        let half = T::of(0.5);
        let sixth = T::of(1.0 / 6.0);
        let k1 = self.rhs(state)?;
        let mut s2 = state.clone();
        s2.scaled_add(dt * half, &k1);
        let k2 = self.rhs(&s2)?;
        let mut s3 = state.clone();
        s3.scaled_add(dt * half, &k2);
        let k3 = self.rhs(&s3)?;
        let mut s4 = state.clone();
        s4.scaled_add(dt, &k3);
        let k4 = self.rhs(&s4)?;
        let mut out = state.clone();
        out.scaled_add(dt * sixth, &k1);
        out.scaled_add(dt * sixth * T::of(2.0), &k2);
        out.scaled_add(dt * sixth * T::of(2.0), &k3);
        out.scaled_add(dt * sixth, &k4);
        Ok(out)
    }
}

fn sample_from_state<T: Real>(state: &BeamState<T>) -> Result<BeamSample<T>> {
    let m = crate::beam::hessian_from_levelset(&state.gx, &state.gp)?;
    Ok(BeamSample {
        point: PhasePoint::new(state.x, state.p),
        s: state.s,
        gx: state.gx,
        gp: state.gp,
        m,
        jets: state.jets.clone(),
        amps: state.amps.clone(),
    })
}

/// Integrates the complete k-th order beam hierarchy from the seed.
pub fn integrate_beam<T: Real>(
    model: &HamiltonianModel<T>,
    seed: &BeamSeed<T>,
    total: T,
    dt: T,
) -> Result<BeamRecord<T>> {
    if model.dimension() != seed.x0.n {
        return Err(Error::DimensionMismatch { expected: model.dimension(), got: seed.x0.n });
    }
    let ode = BeamOde::new(model, seed.k)?;
    let steps = crate::flow::step_count(total, dt)?;
    let step = if total < T::zero() { -dt } else { dt };

    let mut state = BeamState {
        x: seed.x0,
        p: seed.p0,
        s: seed.s0,
        gx: seed.gx0,
        gp: seed.gp0,
        jets: seed.jets0.clone(),
        amps: seed.amps0.clone(),
    };

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(sample_from_state(&state)?);
    for i in 0..steps {
        state = ode.rk4_step(&state, step)?;
        if !state.is_finite() {
            return Err(Error::IntegrationDiverged { t_last: (step * T::of(i as f64)).as_f64() });
        }
        samples.push(sample_from_state(&state)?);
    }

    Ok(BeamRecord { k: seed.k, beta: seed.beta, x0: seed.x0, dt: step, samples })
}

/// Time derivatives of every beam quantity at one sample; used to build the
/// analytic residual polynomials.
#[derive(Debug, Clone)]
pub struct BeamDerivatives<T: Real> {
    pub xdot: RVec<T>,
    pub pdot: RVec<T>,
    pub sdot: T,
    pub mdot: CMat<T>,
    pub jets_dot: Vec<Vec<Cplx<T>>>,
    pub amps_dot: Vec<Vec<Cplx<T>>>,
}

pub fn beam_derivatives<T: Real>(
    model: &HamiltonianModel<T>,
    record: &BeamRecord<T>,
    sample: usize,
) -> Result<BeamDerivatives<T>> {
    let ode = BeamOde::new(model, record.k)?;
    let s = &record.samples[sample];
    let state = BeamState {
        x: s.point.x,
        p: s.point.p,
        s: s.s,
        gx: s.gx,
        gp: s.gp,
        jets: s.jets.clone(),
        amps: s.amps.clone(),
    };
    let d = ode.rhs(&state)?;
    // dM/dt via the Riccati form, equivalent to the level-set evolution.
    let vxx = CMat::from_real(&model.v_hessian(&s.point.x));
    let mdot = vxx.add(&s.m.mul(&s.m)).neg();
    Ok(BeamDerivatives {
        xdot: d.x,
        pdot: d.p,
        sdot: d.s,
        mdot,
        jets_dot: d.jets,
        amps_dot: d.amps,
    })
}

/// Jet table aligned with a ray: `[sample][order r − 3][rank]`.
pub type JetTable<T> = Vec<Vec<Vec<Cplx<T>>>>;
/// Amplitude table aligned with a ray: `[sample][level][flat α]`.
pub type AmpTable<T> = Vec<Vec<Vec<Cplx<T>>>>;

/// Solves the phase-jet systems order by order along the given ray.
///
/// `m_samples` fixes the Hessian initial value; the carrier (ray point and
/// Hessian) is re-integrated internally so Runge-Kutta stage values keep full
/// order, and agrees with the inputs on the grid to integrator accuracy.
pub fn evolve_phase_jet<T: Real>(
    model: &HamiltonianModel<T>,
    ray: &Trajectory<T>,
    m_samples: &[CMat<T>],
    k: usize,
    dt: T,
    initial: &[Vec<Cplx<T>>],
) -> Result<JetTable<T>> {
    if m_samples.len() != ray.len() {
        return Err(Error::ConsistencyViolation("M samples must match the ray grid".into()));
    }
    let expected_orders = (k + 1).saturating_sub(2);
    if initial.len() != expected_orders {
        return Err(Error::Config(format!(
            "initial jets must cover orders 3..={}, got {} rows",
            k + 1,
            initial.len()
        )));
    }
    let record = integrate_carrier(model, ray, m_samples, k, dt, initial, None)?;
    Ok(record.samples.into_iter().map(|s| s.jets).collect())
}

/// Solves the amplitude transport hierarchy along the ray, given the phase
/// jets of orders 3..k+1.
pub fn evolve_amplitude_hierarchy<T: Real>(
    model: &HamiltonianModel<T>,
    ray: &Trajectory<T>,
    m_samples: &[CMat<T>],
    jets: &JetTable<T>,
    k: usize,
    dt: T,
    a0_derivs: &[Cplx<T>],
) -> Result<AmpTable<T>> {
    if m_samples.len() != ray.len() || jets.len() != ray.len() {
        return Err(Error::ConsistencyViolation("tables must match the ray grid".into()));
    }
    for row in jets {
        if row.len() != (k + 1).saturating_sub(2) {
            return Err(Error::Config("missing jet order".into()));
        }
    }
    let record = integrate_carrier(model, ray, m_samples, k, dt, &jets[0], Some(a0_derivs))?;
    Ok(record.samples.into_iter().map(|s| s.amps).collect())
}

fn integrate_carrier<T: Real>(
    model: &HamiltonianModel<T>,
    ray: &Trajectory<T>,
    m_samples: &[CMat<T>],
    k: usize,
    dt: T,
    initial_jets: &[Vec<Cplx<T>>],
    a0_derivs: Option<&[Cplx<T>]>,
) -> Result<BeamRecord<T>> {
    let n = model.dimension();
    let start = ray.initial();
    // Encode M(0) through the level-set pair (g_x, g_p) = (−M_in, I).
    let gx0 = m_samples[0].neg();
    let gp0 = CMat::identity(n);
    let layout0 = AmpLayout::new(n, amplitude_max_order(k, 0));
    let amp0 = match a0_derivs {
        Some(v) => {
            if v.len() != layout0.len() {
                return Err(Error::Config("initial amplitude table has wrong length".into()));
            }
            v.to_vec()
        }
        None => {
            let mut v = vec![Cplx::new(T::zero(), T::zero()); layout0.len()];
            v[0] = Cplx::new(T::one(), T::zero());
            v
        }
    };
    let mut amps0 = vec![amp0];
    for l in 1..amplitude_levels(k) {
        amps0.push(vec![Cplx::new(T::zero(), T::zero()); AmpLayout::new(n, amplitude_max_order(k, l)).len()]);
    }
    let seed = BeamSeed {
        x0: start.x,
        p0: start.p,
        s0: T::zero(),
        k,
        beta: T::one(),
        gx0,
        gp0,
        m_in: m_samples[0],
        jets0: initial_jets.to_vec(),
        amps0,
    };
    let total = ray.dt * T::of((ray.len() - 1) as f64);
    integrate_beam(model, &seed, total, dt)
}

// ---------------------------------------------------------------------------
// Level-set recovery of phase derivatives (n = 1 verification device)
// ---------------------------------------------------------------------------

/// Phase-space derivative jets of g along one ray, n = 1:
/// `d[(a, b)]` holds ∂_x^a ∂_p^b g up to total order 3.
#[derive(Debug, Clone, Copy)]
pub struct GJetSample<T: Real> {
    pub g10: Cplx<T>,
    pub g01: Cplx<T>,
    pub g20: Cplx<T>,
    pub g11: Cplx<T>,
    pub g02: Cplx<T>,
    pub g30: Cplx<T>,
    pub g21: Cplx<T>,
    pub g12: Cplx<T>,
    pub g03: Cplx<T>,
}

#[derive(Debug, Clone)]
pub struct GJetRecord<T: Real> {
    pub dt: T,
    pub samples: Vec<GJetSample<T>>,
}

/// Evolves the phase-space jets of g = φ₁ + (i/β)φ₂ to order 3 along the ray
/// from x₀ (n = 1 only). Differentiating L[g] = 0 gives, per (a, b),
/// d/dt g_{(a,b)} = −b·g_{(a+1,b−1)} + Σ_{j≥1} C(a,j) V^{(1+j)}(x) g_{(a−j,b+1)}.
pub fn extend_levelset_jets<T: Real>(
    model: &HamiltonianModel<T>,
    s_in: &RealPoly<T>,
    x0: T,
    beta: T,
    total: T,
    dt: T,
) -> Result<GJetRecord<T>> {
    if model.dimension() != 1 {
        return Err(Error::UnsupportedDimension(model.dimension()));
    }
    if model.max_derivative_order() < 4 {
        return Err(Error::OrderExceeded { order: 4, max: model.max_derivative_order() });
    }
    let steps = crate::flow::step_count(total, dt)?;
    let ib = c_im(T::one() / beta);

    // state: [x, p] real + 9 complex jets in the fixed (a,b) order
    let xs = [x0];
    let mut x = x0;
    let mut p = s_in.derivative(0).eval(&xs);
    let mut g = [
        Cplx::new(T::one(), T::zero()) - ib.scale(s_in.derivative_multi(&MultiIndex([2, 0])).eval(&xs)), // (1,0)
        ib,                                                                      // (0,1)
        -ib.scale(s_in.derivative_multi(&MultiIndex([3, 0])).eval(&xs)),          // (2,0)
        Cplx::new(T::zero(), T::zero()),                                         // (1,1)
        Cplx::new(T::zero(), T::zero()),                                         // (0,2)
        -ib.scale(s_in.derivative_multi(&MultiIndex([4, 0])).eval(&xs)),          // (3,0)
        Cplx::new(T::zero(), T::zero()),                                         // (2,1)
        Cplx::new(T::zero(), T::zero()),                                         // (1,2)
        Cplx::new(T::zero(), T::zero()),                                         // (0,3)
    ];

    let order: [(u32, u32); 9] =
        [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
    let pos = |a: u32, b: u32| order.iter().position(|&(x, y)| x == a && y == b);

    let rhs = |x: T, p: T, g: &[Cplx<T>; 9]| -> (T, T, [Cplx<T>; 9]) {
        let xv = [x];
        let dx = p;
        let dp = -model.v_gradient(&RVec::from_slice(&xv))[0];
        let mut dg = [Cplx::new(T::zero(), T::zero()); 9];
        for (idx, &(a, b)) in order.iter().enumerate() {
            let mut acc = Cplx::new(T::zero(), T::zero());
            if b > 0 {
                if let Some(src) = pos(a + 1, b - 1) {
                    acc = acc - g[src].scale(T::of(b as f64));
                }
            }
            for j in 1..=a {
                if let Some(src) = pos(a - j, b + 1) {
                    let v = model.v_derivative_at(&MultiIndex([1 + j, 0]), &RVec::from_slice(&xv));
                    acc = acc + g[src].scale(T::of(crate::index::binomial(a, j) as f64) * v);
                }
            }
            dg[idx] = acc;
        }
        (dx, dp, dg)
    };

    let mut out = Vec::with_capacity(steps + 1);
    let pack = |g: &[Cplx<T>; 9]| GJetSample {
        g10: g[0],
        g01: g[1],
        g20: g[2],
        g11: g[3],
        g02: g[4],
        g30: g[5],
        g21: g[6],
        g12: g[7],
        g03: g[8],
    };
    out.push(pack(&g));

    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let step = if total < T::zero() { -dt } else { dt };
    for _ in 0..steps {
        let (dx1, dp1, dg1) = rhs(x, p, &g);
        let mut g2 = g;
        for j in 0..9 {
            g2[j] = g[j] + dg1[j].scale(step * half);
        }
        let (dx2, dp2, dg2) = rhs(x + step * half * dx1, p + step * half * dp1, &g2);
        let mut g3 = g;
        for j in 0..9 {
            g3[j] = g[j] + dg2[j].scale(step * half);
        }
        let (dx3, dp3, dg3) = rhs(x + step * half * dx2, p + step * half * dp2, &g3);
        let mut g4 = g;
        for j in 0..9 {
            g4[j] = g[j] + dg3[j].scale(step);
        }
        let (dx4, dp4, dg4) = rhs(x + step * dx3, p + step * dp3, &g4);
        x = x + step * sixth * (dx1 + T::of(2.0) * (dx2 + dx3) + dx4);
        p = p + step * sixth * (dp1 + T::of(2.0) * (dp2 + dp3) + dp4);
        for j in 0..9 {
            g[j] = g[j]
                + (dg1[j] + (dg2[j] + dg3[j]).scale(T::of(2.0)) + dg4[j]).scale(step * sixth);
        }
        out.push(pack(&g));
    }
    Ok(GJetRecord { dt: step, samples: out })
}

/// Recovers the order-r phase coefficient from level-set jets (n = 1).
///
/// The composite y ↦ g(t, y, ∂_y Φ(t, y)) is constant along the construction,
/// so its y-derivatives at the ray vanish; solving the r-th one for the top
/// coefficient gives
///   r = 3:  m₃ = −g_p⁻¹ (g_xx + 2 g_xp M + g_pp M²),
///   r = 4:  m₄ = −g_p⁻¹ (g_xxx + 3 g_xxp M + 3 g_xpp M² + g_ppp M³
///                        + 3 (g_xp + g_pp M) m₃).
pub fn levelset_phase_derivative_recursion<T: Real>(
    g: &GJetSample<T>,
    m: Cplx<T>,
    m3: Option<Cplx<T>>,
    r: usize,
) -> Result<Cplx<T>> {
    let gp_inv = {
        let d = g.g01;
        if d.norm() == T::zero() {
            return Err(Error::SingularMatrix { cond: f64::INFINITY });
        }
        d.inv()
    };
    match r {
        3 => {
            let rhs = g.g20 + (g.g11 * m).scale(T::of(2.0)) + g.g02 * m * m;
            Ok(-gp_inv * rhs)
        }
        4 => {
            let m3 = m3.ok_or_else(|| {
                Error::ConsistencyViolation("order-4 recursion needs the order-3 coefficient".into())
            })?;
            let rhs = g.g30
                + (g.g21 * m).scale(T::of(3.0))
                + (g.g12 * m * m).scale(T::of(3.0))
                + g.g03 * m * m * m
                + ((g.g11 + g.g02 * m) * m3).scale(T::of(3.0));
            Ok(-gp_inv * rhs)
        }
        _ => Err(Error::UnsupportedOrder(r)),
    }
}

/// Transport of ∂_p m̃₃ along the ray (n = 1), needed to convert the recursion
/// output into a derivative along the Lagrangian manifold:
///   d/dt (∂_p m̃₃) = −m₄ − 2 M ∂_p m̃₃ − 3 (∂_p M̃) m̃₃,
/// with ∂_p M̃ = (−g_xp + M g_pp) g_p⁻¹ from the level-set jets.
pub fn evolve_m3_momentum_partial<T: Real>(
    record: &BeamRecord<T>,
    gjets: &GJetRecord<T>,
) -> Result<Vec<Cplx<T>>> {
    if record.dim() != 1 {
        return Err(Error::UnsupportedDimension(record.dim()));
    }
    if record.k < 3 {
        return Err(Error::UnsupportedOrder(record.k));
    }
    if gjets.samples.len() != record.len() {
        return Err(Error::ConsistencyViolation("g-jet record must match the beam grid".into()));
    }
    let dt = record.dt;
    let zero = Cplx::new(T::zero(), T::zero());
    let value = |i: usize| -> (Cplx<T>, Cplx<T>, Cplx<T>, Cplx<T>) {
        let s = &record.samples[i];
        let gj = &gjets.samples[i];
        let m = s.m[(0, 0)];
        let dpm = -(gj.g11 + m * gj.g02) * gj.g01.inv();
        (m, s.jets[0][0], s.jets[1][0], dpm)
    };
    // Stage data at t + dt/2 is the endpoint mean; the scheme drops to second
    // order, which is enough for the h²-level comparisons this feeds.
    let mut out = Vec::with_capacity(record.len());
    let mut w = zero;
    out.push(w);
    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    for i in 0..record.len() - 1 {
        let (m0, j3_0, j4_0, dpm0) = value(i);
        let (m1, j3_1, j4_1, dpm1) = value(i + 1);
        let mid = |a: Cplx<T>, b: Cplx<T>| (a + b).scale(half);
        let f = |m: Cplx<T>, j3: Cplx<T>, j4: Cplx<T>, dpm: Cplx<T>, w: Cplx<T>| {
            -j4 - (m * w).scale(T::of(2.0)) - (dpm * j3).scale(T::of(3.0))
        };
        let k1 = f(m0, j3_0, j4_0, dpm0, w);
        let k2 = f(mid(m0, m1), mid(j3_0, j3_1), mid(j4_0, j4_1), mid(dpm0, dpm1), w + k1.scale(dt * half));
        let k3 = f(mid(m0, m1), mid(j3_0, j3_1), mid(j4_0, j4_1), mid(dpm0, dpm1), w + k2.scale(dt * half));
        let k4 = f(m1, j3_1, j4_1, dpm1, w + k3.scale(dt));
        w = w + (k1 + (k2 + k3).scale(T::of(2.0)) + k4).scale(dt * sixth);
        out.push(w);
    }
    Ok(out)
}


#[cfg(test)]
mod fixture_tests {
    use super::*;
    use num_complex::Complex64 as C64;

    /// Hand-derived n = 1 systems:
    ///   dm3/dt = −3·M·m3 − V'''(x)
    ///   dm4/dt = −4·M·m4 − 3·m3² − V''''(x)
    #[test]
    fn generated_rhs_matches_hand_formulas_n1() {
        let model = HamiltonianModel::monomial_1d(0.25, 4, 6);
        let sys = derive_phase_jet_system(&model, 3).unwrap();
        let m_val = C64::new(0.3, 0.9);
        let m3 = C64::new(-0.7, 0.2);
        let m4 = C64::new(0.4, -1.1);
        let mut m = CMat::<f64>::zeros(1);
        m[(0, 0)] = m_val;
        let jets = vec![vec![m3], vec![m4]];
        let x = RVec::from_slice(&[1.3]);
        let rhs = sys.rhs_values(&m, &jets, |a| model.v_derivative_at(a, &x));
        let v3 = model.v_derivative_at(&MultiIndex([3, 0]), &x);
        let v4 = model.v_derivative_at(&MultiIndex([4, 0]), &x);
        let expect3 = -3.0 * m_val * m3 - v3;
        let expect4 = -4.0 * m_val * m4 - 3.0 * m3 * m3 - v4;
        assert!((rhs[0][0] - expect3).norm() < 1e-14);
        assert!((rhs[1][0] - expect4).norm() < 1e-14);
    }

    /// n = 2 with quadratic data: every jet order stays identically zero.
    #[test]
    fn n2_quadratic_data_zero_jets() {
        let v = RealPoly::from_terms(
            2,
            [(MultiIndex([2, 0]), 0.4), (MultiIndex([0, 2]), 0.7), (MultiIndex([1, 1]), -0.2)],
        );
        let model = HamiltonianModel::new(2, v, 6);
        let s_in = RealPoly::from_terms(2, [(MultiIndex([2, 0]), 0.1), (MultiIndex([0, 1]), 0.3)]);
        let seed = BeamSeed::from_polynomial_data(
            &RVec::from_slice(&[0.5, -0.4]),
            &s_in,
            &{
                let layout = AmpLayout::new(2, amplitude_max_order(2, 0));
                let mut a = vec![C64::new(0.0, 0.0); layout.len()];
                a[0] = C64::new(1.0, 0.0);
                a
            },
            2,
            1.0,
        )
        .unwrap();
        let rec = integrate_beam(&model, &seed, 1.5, 1e-3).unwrap();
        for s in rec.samples.iter().step_by(250) {
            for row in &s.jets {
                for v in row {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }
}
