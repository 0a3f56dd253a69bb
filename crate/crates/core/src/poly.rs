//! Sparse multivariate polynomials over one or two variables.
//!
//! Coefficients are stored by exponent multi-index. Both real and complex
//! coefficient rings are supported; evaluation points are always real.

use std::collections::BTreeMap;

use crate::index::MultiIndex;
use crate::scalar::{Cplx, Real};

/// Coefficient ring: the scalar itself or a complex number over it.
pub trait Coeff<T: Real>:
    Copy
    + PartialEq
    + std::fmt::Debug
    + num_traits::Zero
    + std::ops::Neg<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Sub<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_real(t: T) -> Self;
    fn scale(self, t: T) -> Self;
    /// ℓ¹-style magnitude used for pruning and diagnostics.
    fn mag(self) -> T;
}

impl<T: Real> Coeff<T> for T {
    fn from_real(t: T) -> Self {
        t
    }
    fn scale(self, t: T) -> Self {
        self * t
    }
    fn mag(self) -> T {
        self.abs()
    }
}

impl<T: Real> Coeff<T> for Cplx<T> {
    fn from_real(t: T) -> Self {
        Cplx::new(t, T::zero())
    }
    fn scale(self, t: T) -> Self {
        Cplx::new(self.re * t, self.im * t)
    }
    fn mag(self) -> T {
        self.re.abs() + self.im.abs()
    }
}

/// Sparse polynomial in `nvars` variables with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<T: Real, C: Coeff<T>> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, C>,
    _marker: std::marker::PhantomData<T>,
}

pub type RealPoly<T> = MultiPoly<T, T>;
pub type CplxPoly<T> = MultiPoly<T, Cplx<T>>;

impl<T: Real, C: Coeff<T>> MultiPoly<T, C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1 && nvars <= crate::index::MAX_VARS);
        MultiPoly { nvars, terms: BTreeMap::new(), _marker: std::marker::PhantomData }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(MultiIndex::zero(), c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (a, c) in terms {
            p.add_term(a, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha).or_insert_with(C::zero);
        *entry = *entry + c;
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).copied().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.order()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> C {
        let mut acc = C::zero();
        for (a, c) in &self.terms {
            let mut w = T::one();
            for j in 0..self.nvars {
                w = w * x[j].powi(a.get(j) as i32);
            }
            acc = acc + c.scale(w);
        }
        acc
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(*a, -*c);
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(*a, *c);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), *ca * *cb);
            }
        }
        out
    }

    pub fn scale(&self, t: T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(*a, c.scale(t));
        }
        out
    }

    pub fn scale_coeff(&self, c: C) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            out.add_term(*a, *ca * c);
        }
        out
    }

    /// Partial derivative in variable `j`.
    pub fn derivative(&self, j: usize) -> Self {
        assert!(j < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            let e = a.get(j);
            if e == 0 {
                continue;
            }
            let mut lowered = a.0;
            lowered[j] -= 1;
            out.add_term(MultiIndex(lowered), c.scale(T::of(e as f64)));
        }
        out
    }

    /// ∂^α for a full multi-index.
    pub fn derivative_multi(&self, alpha: &MultiIndex) -> Self {
        let mut p = self.clone();
        for j in 0..self.nvars {
            for _ in 0..alpha.get(j) {
                p = p.derivative(j);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for j in 0..self.nvars {
            out = out.add(&self.derivative(j).derivative(j));
        }
        out
    }

    /// Re-centers the polynomial: returns q with q(d) = p(center + d), exactly.
    pub fn shift(&self, center: &[T]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            for eta in a.sub_indices() {
                let rem = a.checked_sub(&eta).expect("eta <= a");
                let mut w = T::of(a.binomial(&eta) as f64);
                for j in 0..self.nvars {
                    w = w * center[j].powi(rem.get(j) as i32);
                }
                out.add_term(eta, c.scale(w));
            }
        }
        out
    }

    /// Removes every coefficient of total order ≤ `deg`.
    pub fn drop_orders_up_to(&self, deg: u32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            if a.order() > deg {
                out.add_term(*a, *c);
            }
        }
        out
    }

    /// Largest coefficient magnitude among orders ≤ `deg`.
    pub fn low_order_mag(&self, deg: u32) -> T {
        self.terms
            .iter()
            .filter(|(a, _)| a.order() <= deg)
            .map(|(_, c)| c.mag())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> MultiPoly<T, T> {
    pub fn to_complex(&self) -> CplxPoly<T> {
        let mut out = CplxPoly::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(*a, Cplx::new(*c, T::zero()));
        }
        out
    }

    /// Gradient as one polynomial per variable.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|j| self.derivative(j)).collect()
    }
}

impl<T: Real> MultiPoly<T, Cplx<T>> {
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|j| self.derivative(j)).collect()
    }
}
