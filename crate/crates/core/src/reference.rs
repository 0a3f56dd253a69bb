//! Ground-truth solutions: split-step Fourier integration of the
//! semiclassical Schrödinger equation, exact propagation of complex Gaussian
//! packets under quadratic potentials via kernel integrals, and the
//! quadratic-phase caustic family with its closed forms.

use num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::index::MultiIndex;
use crate::poly::CplxPoly;
use crate::scalar::{c_im, Cplx, Real};
use crate::wavefield::{Axis, WaveField};

/// Periodic spectral run on [−L, L)ⁿ with 2^m nodes per axis.
#[derive(Debug, Clone)]
pub struct SpectralRun<T: Real> {
    pub model: HamiltonianModel<T>,
    pub half_width: T,
    pub nodes: Vec<usize>,
    pub eps: T,
    pub dt: T,
}

impl<T: Real> SpectralRun<T> {
    pub fn new(model: HamiltonianModel<T>, half_width: T, nodes: Vec<usize>, eps: T, dt: T) -> Result<Self> {
        if nodes.len() != model.dimension() {
            return Err(Error::DimensionMismatch { expected: model.dimension(), got: nodes.len() });
        }
        if nodes.iter().any(|&c| !c.is_power_of_two()) {
            return Err(Error::Config("spectral node counts must be powers of two".into()));
        }
        if dt > eps / T::of(10.0) {
            return Err(Error::Config("spectral step must satisfy dt <= eps/10".into()));
        }
        Ok(SpectralRun { model, half_width, nodes, eps, dt })
    }

    /// Periodic axes: node spacing 2L/N, right endpoint excluded.
    pub fn axes(&self) -> Vec<Axis<T>> {
        self.nodes
            .iter()
            .map(|&count| Axis {
                min: -self.half_width,
                step: T::of(2.0) * self.half_width / T::of(count as f64),
                count,
            })
            .collect()
    }

    fn frequencies(&self, count: usize) -> Vec<T> {
        let base = T::PI() / self.half_width;
        (0..count)
            .map(|k| {
                let signed = if k < count / 2 { k as f64 } else { k as f64 - count as f64 };
                base * T::of(signed)
            })
            .collect()
    }
}

/// Domain policy: L = max ray excursion + 8√ε·ln(1/ε).
pub fn spectral_half_width<T: Real>(max_excursion: T, eps: T) -> T {
    max_excursion + T::of(8.0) * eps.sqrt() * (T::one() / eps).ln()
}

fn fft_pass<T: FftNum>(values: &mut [Complex<T>], n0: usize, n1: usize, fft: &Arc<dyn Fft<T>>, along_rows: bool) {
    if along_rows {
        for row in values.chunks_exact_mut(n1) {
            fft.process(row);
        }
    } else {
        let mut col = vec![Complex::new(T::zero(), T::zero()); n0];
        for j in 0..n1 {
            for i in 0..n0 {
                col[i] = values[i * n1 + j];
            }
            fft.process(&mut col);
            for i in 0..n0 {
                values[i * n1 + j] = col[i];
            }
        }
    }
}

/// Strang splitting between the exact Fourier kinetic step and the exact
/// pointwise potential step.
pub fn split_step<T: Real + FftNum>(
    run: &SpectralRun<T>,
    psi0: &WaveField<T>,
    total: T,
) -> Result<WaveField<T>> {
    let axes = run.axes();
    if psi0.dim() != axes.len()
        || psi0.axes().iter().zip(&axes).any(|(a, b)| a.count != b.count)
    {
        return Err(Error::GridMismatch);
    }
    let steps = crate::flow::step_count(total, run.dt)?;
    let mut values = psi0.values().to_vec();
    let coords = psi0.node_coords();
    let eps = run.eps;
    let dt = run.dt;

    // pointwise potential half-step phases
    let v_half: Vec<Cplx<T>> = coords
        .iter()
        .map(|y| {
            let v = run.model.potential().eval(y);
            Cplx::from_polar(T::one(), -v * dt / (T::of(2.0) * eps))
        })
        .collect();

    // kinetic multipliers e^{−iε|ξ|²Δt/2}
    let mut planner = FftPlanner::<T>::new();
    let dims = run.nodes.clone();
    let (n0, n1) = if dims.len() == 1 { (1, dims[0]) } else { (dims[0], dims[1]) };
    let fwd1 = planner.plan_fft_forward(n1);
    let inv1 = planner.plan_fft_inverse(n1);
    let (fwd0, inv0) = if dims.len() == 2 {
        (Some(planner.plan_fft_forward(n0)), Some(planner.plan_fft_inverse(n0)))
    } else {
        (None, None)
    };
    let freqs1 = run.frequencies(n1);
    let freqs0 = if dims.len() == 2 { run.frequencies(n0) } else { vec![T::zero()] };
    let mut kinetic = Vec::with_capacity(values.len());
    for i in 0..n0.max(1) {
        for j in 0..n1 {
            let xi2 = freqs1[j] * freqs1[j]
                + if dims.len() == 2 { freqs0[i] * freqs0[i] } else { T::zero() };
            kinetic.push(Cplx::from_polar(T::one(), -eps * xi2 * dt * T::of(0.5)));
        }
    }
    let norm = T::one() / T::of(values.len() as f64);

    // boundary-contamination monitor band: 4√ε from each edge
    let band = T::of(4.0) * eps.sqrt();
    let monitor: Vec<usize> = coords
        .iter()
        .enumerate()
        .filter(|(_, y)| {
            y.iter().any(|&c| (c + run.half_width).abs() < band || (run.half_width - c) < band)
        })
        .map(|(i, _)| i)
        .collect();

    for step in 0..steps {
        for (v, ph) in values.iter_mut().zip(&v_half) {
            *v = *v * *ph;
        }
        fft_pass(&mut values, n0, n1, &fwd1, true);
        if let Some(f0) = &fwd0 {
            fft_pass(&mut values, n0, n1, f0, false);
        }
        for (v, kmul) in values.iter_mut().zip(&kinetic) {
            *v = *v * *kmul;
        }
        fft_pass(&mut values, n0, n1, &inv1, true);
        if let Some(i0) = &inv0 {
            fft_pass(&mut values, n0, n1, i0, false);
        }
        for v in values.iter_mut() {
            *v = v.scale(norm);
        }
        for (v, ph) in values.iter_mut().zip(&v_half) {
            *v = *v * *ph;
        }
        let worst = monitor.iter().map(|&i| values[i].norm()).fold(T::zero(), T::max);
        if worst > T::of(1e-6) {
            return Err(Error::DomainTooSmall {
                amplitude: worst.as_f64(),
                t: (dt * T::of((step + 1) as f64)).as_f64(),
            });
        }
    }

    let mut out = WaveField::zeros(axes, total, eps);
    out.values_mut().copy_from_slice(&values);
    Ok(out)
}

/// Complex Gaussian packet P(y)·e^{iQ(y)/ε} with quadratic Q, Im(Q₂) > 0.
#[derive(Debug, Clone)]
pub struct GaussianPacket<T: Real> {
    pub amp: Cplx<T>,
    pub poly: CplxPoly<T>,
    pub q: CplxPoly<T>,
}

impl<T: Real> GaussianPacket<T> {
    pub fn pure(amp: Cplx<T>, q: CplxPoly<T>) -> Result<Self> {
        Self::new(amp, CplxPoly::constant(1, Cplx::new(T::one(), T::zero())), q)
    }

    pub fn new(amp: Cplx<T>, poly: CplxPoly<T>, q: CplxPoly<T>) -> Result<Self> {
        if q.degree() > 2 {
            return Err(Error::Config("packet exponent must be quadratic".into()));
        }
        if q.coeff(&MultiIndex([2, 0])).im <= T::zero() {
            return Err(Error::Config("packet needs Im of the quadratic coefficient > 0".into()));
        }
        Ok(GaussianPacket { amp, poly, q })
    }

    /// ψ_in = A_in e^{iS_in/ε} for Gaussian A_in = e^{−a(x−c)²} as a packet.
    pub fn from_oscillatory_data(s_in: &crate::poly::RealPoly<T>, a: T, center: T, eps: T) -> Result<Self> {
        if s_in.degree() > 2 {
            return Err(Error::Config("packet initial phase must be quadratic".into()));
        }
        // iS/ε − a(x−c)² = (i/ε)(S + iεa(x−c)²)
        let mut gauss = CplxPoly::zero(1);
        gauss.add_term(MultiIndex([0, 0]), c_im(eps * a * center * center));
        gauss.add_term(MultiIndex([1, 0]), c_im(-T::of(2.0) * eps * a * center));
        gauss.add_term(MultiIndex([2, 0]), c_im(eps * a));
        Self::new(Cplx::new(T::one(), T::zero()), CplxPoly::constant(1, Cplx::new(T::one(), T::zero())), s_in.to_complex().add(&gauss))
    }

    pub fn eval(&self, x: T, eps: T) -> Cplx<T> {
        let e = self.q.eval(&[x]);
        let mag = (-e.im / eps).exp();
        self.amp * self.poly.eval(&[x]) * Cplx::from_polar(mag, e.re / eps)
    }

    pub fn sample(&self, eps: T, t: T, axes: Vec<Axis<T>>) -> WaveField<T> {
        WaveField::fill(axes, t, eps, |y| self.eval(y[0], eps))
    }
}

fn compose_linear<T: Real>(p: &CplxPoly<T>, a: Cplx<T>, b: Cplx<T>) -> CplxPoly<T> {
    // p(a·x + b) expanded
    let mut out = CplxPoly::zero(1);
    for (alpha, &c) in p.terms() {
        let j = alpha.get(0);
        for m in 0..=j {
            let w = crate::index::binomial(j, m) as f64;
            let coeff = c
                * a.powu(m)
                * b.powu(j - m)
                * Cplx::new(T::of(w), T::zero());
            out.add_term(MultiIndex([m, 0]), coeff);
        }
    }
    out
}

/// Exact propagation of a packet under V = c₀ + c₂x² (n = 1) by the Gaussian
/// kernel integral with polynomial moments. Restricted to ωt < π for c₂ > 0.
pub fn exact_quadratic_propagate<T: Real>(
    model: &HamiltonianModel<T>,
    packet: &GaussianPacket<T>,
    t: T,
    eps: T,
    axes: Vec<Axis<T>>,
) -> Result<WaveField<T>> {
    if model.dimension() != 1 {
        return Err(Error::UnsupportedDimension(model.dimension()));
    }
    let v = model.potential();
    if v.degree() > 2 {
        return Err(Error::OrderExceeded { order: v.degree() as usize, max: 2 });
    }
    let v1 = v.coeff(&MultiIndex([1, 0]));
    if v1 != T::zero() {
        return Err(Error::Config("exact quadratic propagation supports V = c0 + c2 x^2".into()));
    }
    let v0 = v.coeff(&MultiIndex([0, 0]));
    let v2 = v.coeff(&MultiIndex([2, 0]));
    if v2 < T::zero() {
        return Err(Error::Config("inverted quadratic potentials not supported".into()));
    }
    if t == T::zero() {
        return Ok(packet.sample(eps, t, axes));
    }

    let one = Cplx::new(T::one(), T::zero());
    let q2 = packet.q.coeff(&MultiIndex([2, 0]));
    let q1 = packet.q.coeff(&MultiIndex([1, 0]));
    let q0 = packet.q.coeff(&MultiIndex([0, 0]));

    // kernel exponent (i/ε)(w2·y² + wxy·x·y + wx2·x²) and prefactor
    let (w2, wxy, wx2, prefactor) = if v2 == T::zero() {
        let inv_2t = T::one() / (T::of(2.0) * t);
        let pref = (Cplx::new(T::zero(), T::of(2.0) * T::PI() * eps * t)).sqrt().inv();
        (
            Cplx::new(inv_2t, T::zero()),
            Cplx::new(-T::of(2.0) * inv_2t, T::zero()),
            Cplx::new(inv_2t, T::zero()),
            pref,
        )
    } else {
        let omega = (T::of(2.0) * v2).sqrt();
        let s = (omega * t).sin();
        let c = (omega * t).cos();
        if s <= T::of(1e-12) {
            return Err(Error::Config("quadratic propagation restricted to omega*t < pi".into()));
        }
        let pref = (Cplx::new(T::zero(), T::of(2.0) * T::PI() * eps * s / omega)).sqrt().inv();
        let half_cot = omega * c / (T::of(2.0) * s);
        (
            Cplx::new(half_cot, T::zero()),
            Cplx::new(-omega / s, T::zero()),
            Cplx::new(half_cot, T::zero()),
            pref,
        )
    };

    // total y-exponent: A y² + B(x) y + C(x), all times (i/ε)
    let a_coef = q2 + w2;
    let alpha = -c_im(T::one() / eps) * a_coef;
    if alpha.re <= T::zero() {
        return Err(Error::ConsistencyViolation("packet lost positivity under the kernel".into()));
    }

    // μ(x) = −B(x)/(2A) with B(x) = q1 + wxy·x
    let two_a = a_coef * Cplx::new(T::of(2.0), T::zero());
    let mu_a = -wxy / two_a;
    let mu_b = -q1 / two_a;

    // Σ_m P^{(2m)}(μ(x)) / (m! (4α)^m)
    let mut out_poly = CplxPoly::zero(1);
    let mut deriv = packet.poly.clone();
    let mut m_fact = T::one();
    let mut alpha_pow = one;
    let mut m = 0u32;
    loop {
        let denom = m_fact * T::of(4.0f64.powi(m as i32));
        let coeff = Cplx::new(T::one() / denom, T::zero()) * alpha_pow.inv();
        out_poly = out_poly.add(&compose_linear(&deriv, mu_a, mu_b).scale_coeff(coeff));
        deriv = deriv.derivative(0).derivative(0);
        if deriv.is_zero() {
            break;
        }
        m += 1;
        m_fact = m_fact * T::of(m as f64);
        alpha_pow = alpha_pow * alpha;
    }

    // exponent in x: C(x) − B(x)²/(4A), C(x) = q0 + wx2 x², minus v0·t drift
    let inv_4a = (a_coef * Cplx::new(T::of(4.0), T::zero())).inv();
    let mut out_q = CplxPoly::zero(1);
    out_q.add_term(MultiIndex([0, 0]), q0 - q1 * q1 * inv_4a - Cplx::new(v0 * t, T::zero()));
    out_q.add_term(MultiIndex([1, 0]), -q1 * wxy * inv_4a * Cplx::new(T::of(2.0), T::zero()));
    out_q.add_term(MultiIndex([2, 0]), wx2 - wxy * wxy * inv_4a);

    let amp = packet.amp * prefactor * (Cplx::new(T::PI(), T::zero()) / alpha).sqrt();
    let out = GaussianPacket { amp, poly: out_poly, q: out_q };
    Ok(out.sample(eps, t, axes))
}

/// Quadratic-phase family with g ≡ 1: ψ(t, x) = (1−t)^{−1/2} e^{−ix²/(2ε(1−t))}.
pub fn quadratic_phase_solution<T: Real>(t: T, x: T, eps: T) -> Cplx<T> {
    let scale = (T::one() - t).powf(-T::of(0.5));
    Cplx::from_polar(scale, -x * x / (T::of(2.0) * eps * (T::one() - t)))
}

/// The caustic family: free flow with ψ₀ = e^{−a x²}·e^{−ix²/(2ε)}.
pub struct CausticFamily<T: Real> {
    /// Exact solution at the requested time.
    pub exact: WaveField<T>,
    /// Closed-form beam-superposition prediction ψ(1, x)e^{−x²/(2βε)} at t = 1.
    pub beam_predicted: Option<WaveField<T>>,
}

/// Closed forms for the caustic benchmark (t ∈ [0, 1]).
pub fn exact_caustic_family<T: Real>(
    gaussian_a: T,
    eps: T,
    beta: T,
    t: T,
    axes: Vec<Axis<T>>,
) -> Result<CausticFamily<T>> {
    if t < T::zero() || t > T::one() + T::of(1e-12) {
        return Err(Error::Config("caustic family supported for t in [0, 1]".into()));
    }
    let model = HamiltonianModel::free_particle(1, 4);
    let mut s_in = crate::poly::RealPoly::zero(1);
    s_in.add_term(MultiIndex([2, 0]), T::of(-0.5));
    let packet = GaussianPacket::from_oscillatory_data(&s_in, gaussian_a, T::zero(), eps)?;
    let exact = exact_quadratic_propagate(&model, &packet, t, eps, axes.clone())?;

    let beam_predicted = ((t - T::one()).abs() < T::of(1e-12)).then(|| {
        // ψ(1,x) = c ε^{−1/2} ĝ(x/ε) e^{ix²/(2ε)}, c = e^{−iπ/4},
        // ĝ(ξ) = (2a)^{−1/2} e^{−ξ²/(4a)}; beams multiply by e^{−x²/(2βε)}.
        WaveField::fill(axes, t, eps, |y| {
            let x = y[0];
            let ghat = (T::of(2.0) * gaussian_a).powf(-T::of(0.5))
                * (-(x / eps) * (x / eps) / (T::of(4.0) * gaussian_a)).exp();
            let mag = ghat / eps.sqrt() * (-x * x / (T::of(2.0) * beta * eps)).exp();
            Cplx::from_polar(mag, x * x / (T::of(2.0) * eps) - T::FRAC_PI_4())
        })
    });

    Ok(CausticFamily { exact, beam_predicted })
}

/// Simpson quadrature of ∫|ĝ(z)|²(1−e^{−εz²/(2β)})² dz for g = e^{−a x²}.
pub fn caustic_l2_identity_rhs<T: Real>(gaussian_a: T, eps: T, beta: T) -> T {
    let z_max = (T::of(110.0) * gaussian_a).sqrt().max(T::of(10.0));
    let count = 4001usize;
    let h = T::of(2.0) * z_max / T::of((count - 1) as f64);
    let f = |z: T| {
        let ghat2 = (T::of(2.0) * gaussian_a).recip() * (-z * z / (T::of(2.0) * gaussian_a)).exp();
        let loss = T::one() - (-eps * z * z / (T::of(2.0) * beta)).exp();
        ghat2 * loss * loss
    };
    let mut acc = T::zero();
    for i in 0..count {
        let z = -z_max + h * T::of(i as f64);
        let w = if i == 0 || i == count - 1 {
            T::one()
        } else if i % 2 == 1 {
            T::of(4.0)
        } else {
            T::of(2.0)
        };
        acc = acc + w * f(z);
    }
    acc * h / T::of(3.0)
}
