//! Assembly of the asymptotic field: initial beam data, the k-th order
//! per-beam Gaussian with cutoff, the normalization Z(n, ε), Lagrangian
//! pullback quadrature of the superposition, and the analytic residual field
//! P[ψ^ε].
//!
//! Per beam and time the local data is packaged as polynomials in the
//! displacement d = y − x(t): the truncated phase Φ, the amplitude Taylor
//! polynomials T_l, the phase defect G = ∂_tΦ + |∇Φ|²/2 + V (whose
//! coefficients below order k+2 cancel by construction and are removed
//! analytically), and the transport defects D_l = L[T_l] − (i/2)ΔT_{l−1}
//! (cancelled below order k−2l). The residual is then
//! Σ_j ε^j c_j e^{iΦ/ε} with c_j = ρ(G·T_j − i D_{j−1}) + cutoff terms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::BeamRecord;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::index::MultiIndex;
use crate::jets::{amplitude_levels, amplitude_max_order, AmpLayout, BeamSeed};
use crate::linalg::RVec;
use crate::poly::{CplxPoly, RealPoly};
use crate::scalar::{c_im, Cplx, Real};
use crate::wavefield::{Axis, WaveField};

/// Amplitude profile A_in with exact derivatives up to order 2.
#[derive(Debug, Clone)]
pub enum AmplitudeProfile<T> {
    /// e^{−a|x−c|²}, support cut where the profile drops below 1e−16.
    Gaussian { a: T, center: RVec<T> },
    /// Compactly supported bump e^{1−1/(1−|x−c|²/R²)}.
    Bump { radius: T, center: RVec<T> },
}

/// Config representation of the amplitude profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AmplitudeSpec {
    Gaussian { a: f64, center: Vec<f64> },
    Bump { radius: f64, center: Vec<f64> },
}

impl AmplitudeSpec {
    pub fn build<T: Real>(&self, n: usize) -> Result<AmplitudeProfile<T>> {
        let center = |c: &Vec<f64>| -> Result<RVec<T>> {
            if c.len() != n {
                return Err(Error::Config(format!("profile center has {} entries for n = {n}", c.len())));
            }
            let vals: Vec<T> = c.iter().map(|&v| T::of(v)).collect();
            Ok(RVec::from_slice(&vals))
        };
        match self {
            AmplitudeSpec::Gaussian { a, center: c } => {
                if *a <= 0.0 {
                    return Err(Error::Config("gaussian width parameter must be positive".into()));
                }
                Ok(AmplitudeProfile::Gaussian { a: T::of(*a), center: center(c)? })
            }
            AmplitudeSpec::Bump { radius, center: c } => {
                if *radius <= 0.0 {
                    return Err(Error::Config("bump radius must be positive".into()));
                }
                Ok(AmplitudeProfile::Bump { radius: T::of(*radius), center: center(c)? })
            }
        }
    }
}

impl<T: Real> AmplitudeProfile<T> {
    pub fn dim(&self) -> usize {
        match self {
            AmplitudeProfile::Gaussian { center, .. } | AmplitudeProfile::Bump { center, .. } => center.n,
        }
    }

    pub fn value(&self, x: &RVec<T>) -> T {
        match self {
            AmplitudeProfile::Gaussian { a, center } => (-(*a) * x.sub(center).norm_sq()).exp(),
            AmplitudeProfile::Bump { radius, center } => {
                let s = x.sub(center).norm_sq() / (*radius * *radius);
                if s >= T::one() {
                    T::zero()
                } else {
                    (T::one() - T::one() / (T::one() - s)).exp()
                }
            }
        }
    }

    /// ∂^α A_in(x) for |α| ≤ 2.
    pub fn derivative(&self, alpha: &MultiIndex, x: &RVec<T>) -> T {
        let order = alpha.order();
        assert!(order <= 2, "profile derivatives implemented up to order 2");
        if order == 0 {
            return self.value(x);
        }
        match self {
            AmplitudeProfile::Gaussian { a, center } => {
                let d = x.sub(center);
                let f = self.value(x);
                let two_a = T::of(2.0) * *a;
                if order == 1 {
                    let i = axis_of(alpha);
                    -two_a * d[i] * f
                } else {
                    let (i, j) = pair_of(alpha);
                    let kron = if i == j { T::one() } else { T::zero() };
                    (two_a * two_a * d[i] * d[j] - two_a * kron) * f
                }
            }
            AmplitudeProfile::Bump { radius, center } => {
                let d = x.sub(center);
                let r2 = *radius * *radius;
                let s = d.norm_sq() / r2;
                if s >= T::one() {
                    return T::zero();
                }
                let f = (T::one() - T::one() / (T::one() - s)).exp();
                let one_ms = T::one() - s;
                let fs = -f / (one_ms * one_ms);
                if order == 1 {
                    let i = axis_of(alpha);
                    fs * T::of(2.0) * d[i] / r2
                } else {
                    let (i, j) = pair_of(alpha);
                    let fss = f / (one_ms * one_ms * one_ms * one_ms)
                        - T::of(2.0) * f / (one_ms * one_ms * one_ms);
                    let kron = if i == j { T::one() } else { T::zero() };
                    fss * T::of(4.0) * d[i] * d[j] / (r2 * r2) + fs * T::of(2.0) * kron / r2
                }
            }
        }
    }

    /// Per-axis support half-width (Gaussian cut at the 1e−16 level).
    pub fn support_halfwidth(&self) -> T {
        match self {
            AmplitudeProfile::Gaussian { a, .. } => (T::of(16.0 * std::f64::consts::LN_10) / *a).sqrt(),
            AmplitudeProfile::Bump { radius, .. } => *radius,
        }
    }

    pub fn center(&self) -> &RVec<T> {
        match self {
            AmplitudeProfile::Gaussian { center, .. } | AmplitudeProfile::Bump { center, .. } => center,
        }
    }
}

fn axis_of(alpha: &MultiIndex) -> usize {
    if alpha.get(0) == 1 {
        0
    } else {
        1
    }
}

fn pair_of(alpha: &MultiIndex) -> (usize, usize) {
    match (alpha.get(0), alpha.get(1)) {
        (2, 0) => (0, 0),
        (1, 1) => (0, 1),
        (0, 2) => (1, 1),
        _ => unreachable!(),
    }
}

/// Assembly parameters for one superposition.
#[derive(Debug, Clone)]
pub struct SuperpositionConfig<T> {
    pub eps: T,
    pub k: usize,
    pub beta: T,
    /// Beam seed spacing.
    pub h0: T,
    /// Cutoff radius δ_c; `None` bypasses the cutoff (always for k = 1).
    pub cutoff_radius: Option<T>,
}

impl<T: Real> SuperpositionConfig<T> {
    pub fn new(eps: T, k: usize, beta: T, h0: T) -> Result<Self> {
        if k == 0 || k > 3 {
            return Err(Error::UnsupportedOrder(k));
        }
        if eps <= T::zero() || beta <= T::zero() || h0 <= T::zero() {
            return Err(Error::Config("eps, beta, h0 must be positive".into()));
        }
        let cutoff_radius = (k >= 2).then(|| T::one());
        Ok(SuperpositionConfig { eps, k, beta, h0, cutoff_radius })
    }

    /// Default seed spacing h₀ = min(√ε, width/32).
    pub fn default_h0(eps: T, support_width: T) -> T {
        eps.sqrt().min(support_width / T::of(32.0))
    }
}

/// C² quintic-smoothstep cutoff: 1 for r ≤ δ/2, 0 for r ≥ δ.
pub fn cutoff<T: Real>(r: T, delta: T) -> T {
    debug_assert!(r >= T::zero());
    let half = delta * T::of(0.5);
    if r <= half {
        T::one()
    } else if r >= delta {
        T::zero()
    } else {
        let u = (r - half) / half;
        let s = u * u * u * (T::of(10.0) + u * (T::of(-15.0) + u * T::of(6.0)));
        T::one() - s
    }
}

fn cutoff_d1<T: Real>(r: T, delta: T) -> T {
    let half = delta * T::of(0.5);
    if r <= half || r >= delta {
        T::zero()
    } else {
        let u = (r - half) / half;
        let ds = u * u * (T::of(30.0) + u * (T::of(-60.0) + u * T::of(30.0)));
        -ds / half
    }
}

fn cutoff_d2<T: Real>(r: T, delta: T) -> T {
    let half = delta * T::of(0.5);
    if r <= half || r >= delta {
        T::zero()
    } else {
        let u = (r - half) / half;
        let dds = u * (T::of(60.0) + u * (T::of(-180.0) + u * T::of(120.0)));
        -dds / (half * half)
    }
}

/// Z(n, ε) = (β/(2πε))^{n/2}.
pub fn normalization<T: Real>(n: usize, eps: T, beta: T) -> T {
    (beta / (T::of(2.0) * T::PI() * eps)).powf(T::of(n as f64) * T::of(0.5))
}

/// Initial data for the beam through x₀: p₀ = ∇S_in(x₀),
/// M_in = ∂²S_in(x₀) + iβI, m_α(0) = ∂^α S_in(x₀), and the level-0 amplitude
/// table from the profile; higher levels start at zero.
pub fn initial_beam_data<T: Real>(
    s_in: &RealPoly<T>,
    a_in: &AmplitudeProfile<T>,
    x0: &RVec<T>,
    k: usize,
    beta: T,
) -> Result<BeamSeed<T>> {
    let n = x0.n;
    let layout = AmpLayout::new(n, amplitude_max_order(k, 0));
    let a0: Vec<Cplx<T>> = layout
        .indices()
        .iter()
        .map(|alpha| Cplx::new(a_in.derivative(alpha, x0), T::zero()))
        .collect();
    BeamSeed::from_polynomial_data(x0, s_in, &a0, k, beta)
}

/// Midpoint-rule seed points over the support box of the profile.
pub fn seed_points<T: Real>(a_in: &AmplitudeProfile<T>, h0: T) -> Vec<RVec<T>> {
    let n = a_in.dim();
    let c = a_in.center();
    let w = a_in.support_halfwidth();
    let per_axis: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let lo = c[j] - w;
            let count = ((T::of(2.0) * w / h0).as_f64()).ceil() as usize;
            (0..count.max(1)).map(|i| lo + h0 * (T::of(i as f64) + T::of(0.5))).collect()
        })
        .collect();
    let mut out = Vec::new();
    if n == 1 {
        for &x in &per_axis[0] {
            out.push(RVec::from_slice(&[x]));
        }
    } else {
        for &x in &per_axis[0] {
            for &y in &per_axis[1] {
                out.push(RVec::from_slice(&[x, y]));
            }
        }
    }
    out
}

/// Builds all beams for the Lagrangian superposition of the given data.
pub fn build_beams<T: Real>(
    model: &HamiltonianModel<T>,
    s_in: &RealPoly<T>,
    a_in: &AmplitudeProfile<T>,
    cfg: &SuperpositionConfig<T>,
    total: T,
    dt: T,
) -> Result<Vec<BeamRecord<T>>> {
    let seeds = seed_points(a_in, cfg.h0);
    let records: Result<Vec<Option<BeamRecord<T>>>> = seeds
        .par_iter()
        .map(|x0| {
            let seed = initial_beam_data(s_in, a_in, x0, cfg.k, cfg.beta)?;
            if seed.amps0[0].iter().all(|c| c.norm() == T::zero()) {
                return Ok(None);
            }
            Ok(Some(crate::jets::integrate_beam(model, &seed, total, dt)?))
        })
        .collect();
    Ok(records?.into_iter().flatten().collect())
}

/// All per-beam polynomial data in the displacement d = y − x(t).
#[derive(Debug, Clone)]
pub struct BeamLocalPolys<T: Real> {
    pub center: RVec<T>,
    pub momentum: RVec<T>,
    /// Truncated phase T_{k+1}[Φ].
    pub phi: CplxPoly<T>,
    pub grad_phi: Vec<CplxPoly<T>>,
    /// Phase defect with orders ≤ k+1 removed (exact Taylor remainder).
    pub g_remainder: CplxPoly<T>,
    /// Magnitude of the largest cancelled G coefficient (diagnostic).
    pub g_cancel_residue: T,
    /// Amplitude Taylor polynomials T_l.
    pub t_amp: Vec<CplxPoly<T>>,
    pub grad_t_amp: Vec<Vec<CplxPoly<T>>>,
    /// Transport defects D_l with orders ≤ k−1−2l removed.
    pub d_defect: Vec<CplxPoly<T>>,
    pub d_cancel_residue: T,
}

/// Assembles the local polynomials for one beam at one time index.
pub fn beam_local_polys<T: Real>(
    model: &HamiltonianModel<T>,
    record: &BeamRecord<T>,
    idx: usize,
) -> Result<BeamLocalPolys<T>> {
    let n = record.dim();
    let k = record.k;
    let s = &record.samples[idx];
    let d = crate::jets::beam_derivatives(model, record, idx)?;

    let mut phi = CplxPoly::zero(n);
    let mut phi_dot = CplxPoly::zero(n);
    phi.add_term(MultiIndex::zero(), Cplx::new(s.s, T::zero()));
    phi_dot.add_term(MultiIndex::zero(), Cplx::new(d.sdot, T::zero()));
    for j in 0..n {
        phi.add_term(MultiIndex::unit(j), Cplx::new(s.point.p[j], T::zero()));
        phi_dot.add_term(MultiIndex::unit(j), Cplx::new(d.pdot[j], T::zero()));
    }
    for alpha in MultiIndex::of_order(n, 2) {
        let inv_fact = T::one() / T::of(alpha.factorial() as f64);
        let (i, j) = pair_of(&alpha);
        phi.add_term(alpha, s.m[(i, j)].scale(inv_fact));
        phi_dot.add_term(alpha, d.mdot[(i, j)].scale(inv_fact));
    }
    for r in 3..=(k + 1) as u32 {
        for alpha in MultiIndex::of_order(n, r) {
            let inv_fact = T::one() / T::of(alpha.factorial() as f64);
            let rank = alpha.rank(n);
            phi.add_term(alpha, s.jets[(r - 3) as usize][rank].scale(inv_fact));
            phi_dot.add_term(alpha, d.jets_dot[(r - 3) as usize][rank].scale(inv_fact));
        }
    }
    // moving-center part of ∂_t: −Σ ẋ_j ∂_j
    for j in 0..n {
        phi_dot = phi_dot.sub(&phi.derivative(j).scale(d.xdot[j]));
    }

    let grad_phi: Vec<CplxPoly<T>> = phi.gradient();
    let mut g = phi_dot.clone();
    for gj in &grad_phi {
        g = g.add(&gj.mul(gj).scale(T::of(0.5)));
    }
    g = g.add(&model.potential().shift(s.point.x.as_slice()).to_complex());
    let g_cancel_residue = g.low_order_mag((k + 1) as u32);
    // audit: these coefficients cancel identically when the generated jet
    // system is consistent; anything above roundoff flags a bad (k, n) case
    let audit_tol = T::epsilon().sqrt() * T::of(100.0);
    if g_cancel_residue > audit_tol {
        return Err(Error::ConsistencyViolation(format!(
            "phase-defect coefficients of order <= k+1 failed to cancel ({:.3e});              the generated jet system is inconsistent for this configuration",
            g_cancel_residue.as_f64()
        )));
    }
    let g_remainder = g.drop_orders_up_to((k + 1) as u32);

    let levels = amplitude_levels(k);
    let mut t_amp = Vec::with_capacity(levels);
    let mut t_amp_dot = Vec::with_capacity(levels);
    for l in 0..levels {
        let layout = AmpLayout::new(n, amplitude_max_order(k, l));
        let mut tl = CplxPoly::zero(n);
        let mut tl_dot = CplxPoly::zero(n);
        for (pos, alpha) in layout.indices().iter().enumerate() {
            let inv_fact = T::one() / T::of(alpha.factorial() as f64);
            tl.add_term(*alpha, s.amps[l][pos].scale(inv_fact));
            tl_dot.add_term(*alpha, d.amps_dot[l][pos].scale(inv_fact));
        }
        for j in 0..n {
            tl_dot = tl_dot.sub(&tl.derivative(j).scale(d.xdot[j]));
        }
        t_amp.push(tl);
        t_amp_dot.push(tl_dot);
    }

    let lap_phi = phi.laplacian();
    let mut d_defect = Vec::with_capacity(levels);
    let mut d_cancel_residue = T::zero();
    for l in 0..levels {
        // D_l = ∂_t T_l + ∇Φ·∇T_l + ½ΔΦ·T_l − (i/2)ΔT_{l−1}
        let mut dl = t_amp_dot[l].clone();
        for j in 0..n {
            dl = dl.add(&grad_phi[j].mul(&t_amp[l].derivative(j)));
        }
        dl = dl.add(&lap_phi.mul(&t_amp[l]).scale(T::of(0.5)));
        if l >= 1 {
            dl = dl.sub(&t_amp[l - 1].laplacian().scale_coeff(c_im(T::of(0.5))));
        }
        let enforced = amplitude_max_order(k, l) as u32;
        d_cancel_residue = d_cancel_residue.max(dl.low_order_mag(enforced));
        d_defect.push(dl.drop_orders_up_to(enforced));
    }
    if d_cancel_residue > audit_tol {
        return Err(Error::ConsistencyViolation(format!(
            "amplitude-transport coefficients failed to cancel ({:.3e})",
            d_cancel_residue.as_f64()
        )));
    }

    let grad_t_amp = t_amp.iter().map(|t| t.gradient()).collect();

    Ok(BeamLocalPolys {
        center: s.point.x,
        momentum: s.point.p,
        phi,
        grad_phi,
        g_remainder,
        g_cancel_residue,
        t_amp,
        grad_t_amp,
        d_defect,
        d_cancel_residue,
    })
}

fn displacement<T: Real>(y: &[T], center: &RVec<T>) -> (RVec<T>, T) {
    let mut d = RVec::zeros(center.n);
    for j in 0..center.n {
        d[j] = y[j] - center[j];
    }
    let r = d.norm();
    (d, r)
}

/// e^{iΦ/ε} evaluated stably; `None` when the Gaussian weight is below 1e−16.
fn oscillatory_factor<T: Real>(phi: Cplx<T>, eps: T) -> Option<Cplx<T>> {
    let decay = phi.im / eps;
    if decay > T::of(37.0) {
        return None;
    }
    Some(Cplx::from_polar((-decay).exp(), phi.re / eps))
}

fn weighted_sum_field<T: Real>(
    beams: &[BeamRecord<T>],
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
    cell_weight: T,
    locals: &[BeamLocalPolys<T>],
    node_value: impl Fn(&BeamLocalPolys<T>, &RVec<T>, T) -> Cplx<T> + Sync,
) -> Result<WaveField<T>> {
    if beams.is_empty() {
        return Err(Error::EmptyBeamList);
    }
    let n = beams[0].dim();
    let z = normalization(n, cfg.eps, cfg.beta) * cell_weight;
    let mut field = WaveField::zeros(axes, t, cfg.eps);
    let coords = field.node_coords();
    let delta = cfg.cutoff_radius;
    let values: Vec<Cplx<T>> = coords
        .par_iter()
        .map(|y| {
            let mut acc = Cplx::new(T::zero(), T::zero());
            for lp in locals {
                let (d, r) = displacement(y, &lp.center);
                if let Some(dc) = delta {
                    if r >= dc {
                        continue;
                    }
                }
                acc = acc + node_value(lp, &d, r);
            }
            acc.scale(z)
        })
        .collect();
    field.values_mut().copy_from_slice(&values);
    Ok(field)
}

fn assemble_with_weight<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
    cell_weight: T,
) -> Result<WaveField<T>> {
    let locals = locals_at(model, beams, t)?;
    let eps = cfg.eps;
    let levels = amplitude_levels(cfg.k);
    let delta = cfg.cutoff_radius;
    weighted_sum_field(beams, t, cfg, axes, cell_weight, &locals, move |lp, d, r| {
        let phase = lp.phi.eval(d.as_slice());
        match oscillatory_factor(phase, eps) {
            None => Cplx::new(T::zero(), T::zero()),
            Some(osc) => {
                let rho = match delta {
                    Some(dc) => cutoff(r, dc),
                    None => T::one(),
                };
                let mut amp = Cplx::new(T::zero(), T::zero());
                let mut eps_pow = T::one();
                for l in 0..levels {
                    amp = amp + lp.t_amp[l].eval(d.as_slice()).scale(eps_pow);
                    eps_pow = eps_pow * eps;
                }
                (amp * osc).scale(rho)
            }
        }
    })
}

fn locals_at<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    t: T,
) -> Result<Vec<BeamLocalPolys<T>>> {
    if beams.is_empty() {
        return Err(Error::EmptyBeamList);
    }
    let idx = beams[0].index_of(t)?;
    beams
        .par_iter()
        .map(|b| {
            let i = b.index_of(t)?;
            if i != idx {
                return Err(Error::TimeOffGrid { t: t.as_f64(), dt: b.dt.as_f64() });
            }
            beam_local_polys(model, b, i)
        })
        .collect()
}

/// ψ^ε(t, y) on the grid: midpoint-rule pullback of the δ(w) superposition to
/// the beam labels, Σ Z·h₀ⁿ·ρ·(Σ_l ε^l T_l)·e^{iΦ/ε}.
pub fn assemble<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
) -> Result<WaveField<T>> {
    let n = beams.first().ok_or(Error::EmptyBeamList)?.dim();
    let cell = cfg.h0.powi(n as i32);
    assemble_with_weight(model, beams, t, cfg, axes, cell)
}

/// P[ψ^ε](t, y): the analytic residual Σ_beams Σ_j ε^j c_j e^{iΦ/ε} with
/// cutoff-derivative contributions where ρ varies.
pub fn residual_field<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
) -> Result<WaveField<T>> {
    let n = beams.first().ok_or(Error::EmptyBeamList)?.dim();
    let cell = cfg.h0.powi(n as i32);
    residual_with_weight(model, beams, t, cfg, axes, cell)
}

fn residual_with_weight<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
    cell_weight: T,
) -> Result<WaveField<T>> {
    let locals = locals_at(model, beams, t)?;
    let eps = cfg.eps;
    let k = cfg.k;
    let levels = amplitude_levels(k);
    let delta = cfg.cutoff_radius;
    let dim = beams[0].dim();
    weighted_sum_field(beams, t, cfg, axes, cell_weight, &locals, move |lp, d, r| {
        let phase = lp.phi.eval(d.as_slice());
        let osc = match oscillatory_factor(phase, eps) {
            None => return Cplx::new(T::zero(), T::zero()),
            Some(o) => o,
        };
        let zero = Cplx::new(T::zero(), T::zero());
        let (rho, rho1, rho2) = match delta {
            Some(dc) => (cutoff(r, dc), cutoff_d1(r, dc), cutoff_d2(r, dc)),
            None => (T::one(), T::zero(), T::zero()),
        };
        let g_val = lp.g_remainder.eval(d.as_slice());
        // c_j = ρ(G·T_j − i·D_{j−1}) + cutoff-derivative terms
        let mut total = zero;
        let mut eps_pow = T::one();
        for j in 0..=levels + 1 {
            let mut cj = zero;
            if j < levels {
                cj = cj + g_val * lp.t_amp[j].eval(d.as_slice());
            }
            if j >= 1 && j - 1 < levels {
                cj = cj - c_im(T::one()) * lp.d_defect[j - 1].eval(d.as_slice());
            }
            cj = cj.scale(rho);
            if rho1 != T::zero() || rho2 != T::zero() {
                // −iε L[ρT_{j−1}] cutoff part: −i T_{j−1} ρ'(r)/r · d·(∇Φ − ẋ)
                if j >= 1 && j - 1 < levels && rho1 != T::zero() {
                    let mut adv = zero;
                    for a in 0..dim {
                        adv = adv
                            + (lp.grad_phi[a].eval(d.as_slice())
                                - Cplx::new(lp.momentum[a], T::zero()))
                                .scale(d[a]);
                    }
                    cj = cj - c_im(T::one()) * lp.t_amp[j - 1].eval(d.as_slice()) * adv.scale(rho1 / r);
                }
                // −½Δ(ρT_{j−2}) cutoff part: −ρ'/r·(d·∇T) − ½T·(ρ'' + (n−1)ρ'/r)
                if j >= 2 && j - 2 < levels {
                    let l = j - 2;
                    let mut grad_dot = zero;
                    for a in 0..dim {
                        grad_dot = grad_dot + lp.grad_t_amp[l][a].eval(d.as_slice()).scale(d[a]);
                    }
                    let lap_rho = rho2 + rho1 * T::of((dim - 1) as f64) / r;
                    cj = cj
                        - grad_dot.scale(rho1 / r)
                        - lp.t_amp[l].eval(d.as_slice()).scale(lap_rho * T::of(0.5));
                }
            }
            total = total + cj.scale(eps_pow);
            eps_pow = eps_pow * eps;
        }
        total * osc
    })
}

/// Rectangle Ω(0) in (x₀, p₀) for phase-space superposition (n = 1).
#[derive(Debug, Clone, Copy)]
pub struct PhaseSpaceBox<T> {
    pub x: (T, T),
    pub p: (T, T),
    pub nx: usize,
    pub np: usize,
}

/// First-order beams seeded on a midpoint grid over the phase-space box, with
/// M_in = iβ and S(0) = S_in(x₀). Cell weight h_x·h_p replaces h₀ⁿ.
pub fn phase_space_beams<T: Real>(
    model: &HamiltonianModel<T>,
    s_in: &RealPoly<T>,
    omega0: &PhaseSpaceBox<T>,
    beta: T,
    total: T,
    dt: T,
) -> Result<(Vec<BeamRecord<T>>, T)> {
    if model.dimension() != 1 {
        return Err(Error::UnsupportedDimension(model.dimension()));
    }
    let hx = (omega0.x.1 - omega0.x.0) / T::of(omega0.nx as f64);
    let hp = (omega0.p.1 - omega0.p.0) / T::of(omega0.np as f64);
    let mut seeds = Vec::new();
    for i in 0..omega0.nx {
        for j in 0..omega0.np {
            let x0 = omega0.x.0 + hx * (T::of(i as f64) + T::of(0.5));
            let p0 = omega0.p.0 + hp * (T::of(j as f64) + T::of(0.5));
            seeds.push((x0, p0));
        }
    }
    let beams: Result<Vec<BeamRecord<T>>> = seeds
        .par_iter()
        .map(|&(x0, p0)| {
            let ib = c_im(T::one() / beta);
            let seed = BeamSeed {
                x0: RVec::from_slice(&[x0]),
                p0: RVec::from_slice(&[p0]),
                s0: s_in.eval(&[x0]),
                k: 1,
                beta,
                gx0: crate::linalg::CMat::identity(1),
                gp0: crate::linalg::CMat::scaled_identity(1, ib),
                m_in: crate::linalg::CMat::scaled_identity(1, c_im(beta)),
                jets0: Vec::new(),
                amps0: vec![vec![Cplx::new(T::one(), T::zero())]],
            };
            crate::jets::integrate_beam(model, &seed, total, dt)
        })
        .collect();
    Ok((beams?, hx * hp))
}

/// 2n-dimensional midpoint quadrature of the beam sum over Ω(t) (n = 1).
pub fn phase_space_assemble<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    cell_weight: T,
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
) -> Result<WaveField<T>> {
    if beams.first().ok_or(Error::EmptyBeamList)?.dim() != 1 {
        return Err(Error::UnsupportedDimension(beams[0].dim()));
    }
    assemble_with_weight(model, beams, t, cfg, axes, cell_weight)
}

/// Residual of the phase-space superposition.
pub fn phase_space_residual<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    cell_weight: T,
    t: T,
    cfg: &SuperpositionConfig<T>,
    axes: Vec<Axis<T>>,
) -> Result<WaveField<T>> {
    if beams.first().ok_or(Error::EmptyBeamList)?.dim() != 1 {
        return Err(Error::UnsupportedDimension(beams[0].dim()));
    }
    residual_with_weight(model, beams, t, cfg, axes, cell_weight)
}

/// ψ_in = A_in e^{iS_in/ε} sampled on the grid.
pub fn initial_wavefield<T: Real>(
    s_in: &RealPoly<T>,
    a_in: &AmplitudeProfile<T>,
    eps: T,
    axes: Vec<Axis<T>>,
) -> WaveField<T> {
    WaveField::fill(axes, T::zero(), eps, |y| {
        let x = RVec::from_slice(y);
        let amp = a_in.value(&x);
        Cplx::from_polar(amp, s_in.eval(y) / eps)
    })
}

/// Shrinks δ_c until Im T_{k+1}[Φ] ≥ c·|d|² holds on every beam's cutoff
/// support over the sampled times, with c a quarter of the worst quadratic
/// positivity min λ_min(Im M(t)) across beams (equal to β/4 at t = 0, where
/// Im M = βI). No-op for k = 1.
pub fn validate_cutoff<T: Real>(
    model: &HamiltonianModel<T>,
    beams: &[BeamRecord<T>],
    cfg: &mut SuperpositionConfig<T>,
    times: &[T],
) -> Result<()> {
    let Some(mut delta) = cfg.cutoff_radius else {
        return Ok(());
    };
    let mut min_im = cfg.beta;
    for b in beams {
        for &t in times {
            let idx = b.index_of(t)?;
            let eig = crate::linalg::sym_eigenvalues(&b.samples[idx].m.imag_part());
            min_im = min_im.min(eig[0]);
        }
    }
    if min_im <= T::zero() {
        return Err(Error::ConsistencyViolation("Im(M) lost positivity along a beam".into()));
    }
    let threshold = min_im * T::of(0.25);
    'outer: for _ in 0..20 {
        for b in beams {
            for &t in times {
                let idx = b.index_of(t)?;
                let lp = beam_local_polys(model, b, idx)?;
                if min_im_quadratic_ratio(&lp.phi, b.dim(), delta) < threshold {
                    delta = delta * T::of(0.5);
                    continue 'outer;
                }
            }
        }
        cfg.cutoff_radius = Some(delta);
        return Ok(());
    }
    Err(Error::ConsistencyViolation(
        "cutoff radius shrank 20 times without satisfying the positivity condition".into(),
    ))
}

/// min over sampled |d| ≤ δ of Im Φ(d)/|d|².
pub fn min_im_quadratic_ratio<T: Real>(phi: &CplxPoly<T>, n: usize, delta: T) -> T {
    let mut min_ratio = T::infinity();
    let radii = 24;
    let dirs: Vec<RVec<T>> = if n == 1 {
        vec![RVec::from_slice(&[T::one()]), RVec::from_slice(&[-T::one()])]
    } else {
        (0..16)
            .map(|a| {
                let th = T::of(a as f64) * T::PI() * T::of(2.0 / 16.0);
                RVec::from_slice(&[th.cos(), th.sin()])
            })
            .collect()
    };
    for dir in &dirs {
        for i in 1..=radii {
            let r = delta * T::of(i as f64) / T::of(radii as f64);
            let mut d = RVec::zeros(n);
            d.scaled_add(r, dir);
            let im = phi.eval(d.as_slice()).im;
            min_ratio = min_ratio.min(im / (r * r));
        }
    }
    min_ratio
}
