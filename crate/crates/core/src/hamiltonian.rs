//! Hamiltonian H(x, p) = |p|²/2 + V(x) with a polynomial external potential.
//!
//! The kinetic part is hard-coded, so H_p = p, H_pp = I and H_xp = 0 exactly;
//! every spatial derivative of the potential is symbolic and therefore exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::PhasePoint;
use crate::index::MultiIndex;
use crate::linalg::{RMat, RVec};
use crate::poly::RealPoly;
use crate::scalar::Real;

/// One monomial of the external potential, as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// Config representation of a model: `{ "n": 1, "potential": [ ... ] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    #[serde(default)]
    pub potential: Vec<PotentialTerm>,
}

impl ModelSpec {
    pub fn build<T: Real>(&self, max_derivative_order: usize) -> Result<HamiltonianModel<T>> {
        if self.n < 1 || self.n > 2 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        let mut v = RealPoly::zero(self.n);
        for term in &self.potential {
            if term.exponents.len() != self.n {
                return Err(Error::Config(format!(
                    "potential term has {} exponents for n = {}",
                    term.exponents.len(),
                    self.n
                )));
            }
            v.add_term(MultiIndex::from_slice(&term.exponents), T::of(term.coeff));
        }
        Ok(HamiltonianModel::new(self.n, v, max_derivative_order))
    }
}

/// Immutable model: dimension, potential, and precomputed exact derivatives.
#[derive(Debug, Clone)]
pub struct HamiltonianModel<T: Real> {
    n: usize,
    potential: RealPoly<T>,
    max_derivative_order: usize,
    derivatives: BTreeMap<MultiIndex, RealPoly<T>>,
}

impl<T: Real> HamiltonianModel<T> {
    pub fn new(n: usize, potential: RealPoly<T>, max_derivative_order: usize) -> Self {
        assert!(n >= 1 && n <= 2);
        assert_eq!(potential.nvars(), n);
        let mut derivatives = BTreeMap::new();
        for r in 0..=max_derivative_order as u32 {
            for alpha in MultiIndex::of_order(n, r) {
                derivatives.insert(alpha, potential.derivative_multi(&alpha));
            }
        }
        HamiltonianModel { n, potential, max_derivative_order, derivatives }
    }

    /// Convenience constructor for 1-d monomial potentials c·x^k.
    pub fn monomial_1d(coeff: T, power: u32, max_derivative_order: usize) -> Self {
        let v = RealPoly::from_terms(1, [(MultiIndex([power, 0]), coeff)]);
        Self::new(1, v, max_derivative_order)
    }

    pub fn free_particle(n: usize, max_derivative_order: usize) -> Self {
        Self::new(n, RealPoly::zero(n), max_derivative_order)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn max_derivative_order(&self) -> usize {
        self.max_derivative_order
    }

    pub fn potential(&self) -> &RealPoly<T> {
        &self.potential
    }

    /// H(x, p) = |p|²/2 + V(x).
    pub fn evaluate(&self, point: &PhasePoint<T>) -> Result<T> {
        if point.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: point.dim() });
        }
        if !point.is_finite() {
            return Err(Error::IntegrationDiverged { t_last: f64::NAN });
        }
        Ok(point.p.norm_sq() * T::of(0.5) + self.potential.eval(point.x.as_slice()))
    }

    /// Exact symbolic ∂_x^α V.
    pub fn potential_derivative(&self, alpha: &MultiIndex) -> Result<&RealPoly<T>> {
        self.derivatives.get(alpha).ok_or(Error::OrderExceeded {
            order: alpha.order() as usize,
            max: self.max_derivative_order,
        })
    }

    pub fn v_value(&self, x: &RVec<T>) -> T {
        self.potential.eval(x.as_slice())
    }

    /// ∇V(x).
    pub fn v_gradient(&self, x: &RVec<T>) -> RVec<T> {
        let mut g = RVec::zeros(self.n);
        for j in 0..self.n {
            g[j] = self.derivatives[&MultiIndex::unit(j)].eval(x.as_slice());
        }
        g
    }

    /// ∇²V(x) (= H_xx since the kinetic part is |p|²/2).
    pub fn v_hessian(&self, x: &RVec<T>) -> RMat<T> {
        let mut h = RMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let alpha = MultiIndex::unit(i).add_unit(j);
                h[(i, j)] = self.derivatives[&alpha].eval(x.as_slice());
            }
        }
        h
    }

    /// ∂^α V evaluated at x, for any cached order.
    pub fn v_derivative_at(&self, alpha: &MultiIndex, x: &RVec<T>) -> T {
        self.derivatives[alpha].eval(x.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::PhasePoint;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn point1(x: f64, p: f64) -> PhasePoint<f64> {
        PhasePoint::new(RVec::from_slice(&[x]), RVec::from_slice(&[p]))
    }

    #[test]
    fn evaluate_examples() {
        // free particle at (0, 1)
        let free = HamiltonianModel::<f64>::free_particle(1, 4);
        assert_eq!(free.evaluate(&point1(0.0, 1.0)).unwrap(), 0.5);

        // harmonic x^2/2 at (1, 0)
        let harmonic = HamiltonianModel::monomial_1d(0.5, 2, 4);
        assert_eq!(harmonic.evaluate(&point1(1.0, 0.0)).unwrap(), 0.5);

        // quartic x^4/4 at (2, 1): 0.5 + 4.0
        let quartic = HamiltonianModel::monomial_1d(0.25, 4, 6);
        assert_eq!(quartic.evaluate(&point1(2.0, 1.0)).unwrap(), 4.5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = HamiltonianModel::<f64>::free_particle(2, 3);
        assert!(matches!(
            m.evaluate(&point1(0.0, 1.0)),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn symbolic_derivative_examples() {
        let quartic = HamiltonianModel::<f64>::monomial_1d(0.25, 4, 6);
        let d2 = quartic.potential_derivative(&MultiIndex([2, 0])).unwrap();
        assert_eq!(d2.eval(&[1.5]), 3.0 * 1.5 * 1.5);

        let harmonic = HamiltonianModel::<f64>::monomial_1d(0.5, 2, 6);
        assert!(harmonic.potential_derivative(&MultiIndex([3, 0])).unwrap().is_zero());

        let v = RealPoly::from_terms(2, [(MultiIndex([2, 1]), 1.0)]);
        let m2 = HamiltonianModel::new(2, v, 4);
        let d = m2.potential_derivative(&MultiIndex([1, 1])).unwrap();
        assert_eq!(d.eval(&[3.0, 7.0]), 6.0);
    }

    #[test]
    fn order_cap_is_enforced() {
        let m = HamiltonianModel::<f64>::monomial_1d(1.0, 6, 3);
        assert!(matches!(
            m.potential_derivative(&MultiIndex([4, 0])),
            Err(Error::OrderExceeded { order: 4, max: 3 })
        ));
    }

    #[test]
    fn quadratic_potentials_have_no_high_derivatives() {
        let v = RealPoly::from_terms(2, [
            (MultiIndex([2, 0]), 0.7),
            (MultiIndex([1, 1]), -0.3),
            (MultiIndex([0, 2]), 1.1),
            (MultiIndex([1, 0]), 0.5),
        ]);
        let m = HamiltonianModel::new(2, v, 6);
        for r in 3..=6 {
            for alpha in MultiIndex::of_order(2, r) {
                assert!(m.potential_derivative(&alpha).unwrap().is_zero());
            }
        }
    }

    /// Central finite differences of `evaluate` against the symbolic
    /// derivatives, over random points and random degree-≤6 potentials.
    #[test]
    fn finite_difference_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = if trial % 2 == 0 { 1 } else { 2 };
            let mut v = RealPoly::zero(n);
            for r in 0..=6u32 {
                for alpha in MultiIndex::of_order(n, r) {
                    if rng.gen_bool(0.5) {
                        v.add_term(alpha, rng.gen_range(-1.0..1.0));
                    }
                }
            }
            let m = HamiltonianModel::new(n, v, 8);
            let h = 1e-4;
            for _ in 0..25 {
                let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let x = RVec::from_slice(&xs);
                for j in 0..n {
                    // first derivative
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (m.v_value(&xp) - m.v_value(&xm)) / (2.0 * h);
                    let exact = m.v_derivative_at(&MultiIndex::unit(j), &x);
                    assert!(
                        (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                        "grad fd {fd} vs {exact}"
                    );
                    // second derivative (diagonal)
                    let fd2 = (m.v_value(&xp) - 2.0 * m.v_value(&x) + m.v_value(&xm)) / (h * h);
                    let exact2 = m.v_derivative_at(&MultiIndex::unit(j).add_unit(j), &x);
                    assert!(
                        (fd2 - exact2).abs() <= 1e-5 * exact2.abs().max(1.0),
                        "hess fd {fd2} vs {exact2}"
                    );
                }
            }
        }
    }
}
