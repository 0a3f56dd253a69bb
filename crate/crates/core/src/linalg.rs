//! Fixed-capacity vectors and matrices for n ≤ 2 spatial dimensions.
//!
//! Closed-form inverses and eigenvalues are used throughout; dimensions never
//! exceed 2 (complex) or 4 (real flow Jacobians).

use crate::scalar::{Cplx, Real};

/// Real vector of dimension ≤ 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RVec<T> {
    pub n: usize,
    data: [T; 4],
}

impl<T: Real> RVec<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= 4);
        RVec { n, data: [T::zero(); 4] }
    }

    pub fn from_slice(s: &[T]) -> Self {
        let mut v = Self::zeros(s.len());
        v.data[..s.len()].copy_from_slice(s);
        v
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data[..self.n]
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.n, other.n);
        let mut acc = T::zero();
        for j in 0..self.n {
            acc = acc + self.data[j] * other.data[j];
        }
        acc
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scaled_add(&mut self, c: T, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for j in 0..self.n {
            self.data[j] = self.data[j] + c * other.data[j];
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        out.scaled_add(-T::one(), other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

impl<T: Real> std::ops::Index<usize> for RVec<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        debug_assert!(i < self.n);
        &self.data[i]
    }
}

impl<T: Real> std::ops::IndexMut<usize> for RVec<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        debug_assert!(i < self.n);
        &mut self.data[i]
    }
}

/// Real square matrix of dimension ≤ 4 (row-major).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMat<T> {
    pub n: usize,
    data: [T; 16],
}

impl<T: Real> RMat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= 4);
        RMat { n, data: [T::zero(); 16] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            m[(j, j)] = T::one();
        }
        m
    }

    pub fn mul_vec(&self, v: &RVec<T>) -> RVec<T> {
        debug_assert_eq!(self.n, v.n);
        let mut out = RVec::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[i] = out[i] + self[(i, j)] * v[j];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = T::zero();
                for k in 0..self.n {
                    acc = acc + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn scaled_add(&mut self, c: T, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for j in 0..16 {
            self.data[j] = self.data[j] + c * other.data[j];
        }
    }

    pub fn det(&self) -> T {
        match self.n {
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                self[(0, 0)] * (self[(1, 1)] * self[(2, 2)] - self[(1, 2)] * self[(2, 1)])
                    - self[(0, 1)] * (self[(1, 0)] * self[(2, 2)] - self[(1, 2)] * self[(2, 0)])
                    + self[(0, 2)] * (self[(1, 0)] * self[(2, 1)] - self[(1, 1)] * self[(2, 0)])
            }
            4 => {
                // Laplace expansion on the first row.
                let mut acc = T::zero();
                let mut sign = T::one();
                for j in 0..4 {
                    acc = acc + sign * self[(0, j)] * self.minor3(0, j);
                    sign = -sign;
                }
                acc
            }
            _ => unreachable!(),
        }
    }

    fn minor3(&self, row: usize, col: usize) -> T {
        let mut m = RMat::zeros(3);
        let mut ii = 0;
        for i in 0..4 {
            if i == row {
                continue;
            }
            let mut jj = 0;
            for j in 0..4 {
                if j == col {
                    continue;
                }
                m[(ii, jj)] = self[(i, j)];
                jj += 1;
            }
            ii += 1;
        }
        m.det()
    }

    pub fn max_abs(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = acc.max(self[(i, j)].abs());
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self[(i, j)].is_finite()))
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for RMat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.n && j < self.n);
        &self.data[i * 4 + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for RMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.n && j < self.n);
        &mut self.data[i * 4 + j]
    }
}

/// Complex square matrix of dimension ≤ 2 (row-major).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<T> {
    pub n: usize,
    data: [Cplx<T>; 4],
}

impl<T: Real> CMat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= 2);
        CMat { n, data: [Cplx::new(T::zero(), T::zero()); 4] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            m[(j, j)] = Cplx::new(T::one(), T::zero());
        }
        m
    }

    pub fn scaled_identity(n: usize, c: Cplx<T>) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            m[(j, j)] = c;
        }
        m
    }

    pub fn from_real(m: &RMat<T>) -> Self {
        assert!(m.n <= 2);
        let mut out = Self::zeros(m.n);
        for i in 0..m.n {
            for j in 0..m.n {
                out[(i, j)] = Cplx::new(m[(i, j)], T::zero());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Cplx::new(T::zero(), T::zero());
                for k in 0..self.n {
                    acc = acc + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for j in 0..4 {
            out.data[j] = out.data[j] + other.data[j];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for j in 0..4 {
            out.data[j] = out.data[j] - other.data[j];
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = *self;
        for j in 0..4 {
            out.data[j] = -out.data[j];
        }
        out
    }

    pub fn scaled_add(&mut self, c: T, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for j in 0..4 {
            self.data[j] = self.data[j] + other.data[j].scale(c);
        }
    }

    pub fn scale_c(&self, c: Cplx<T>) -> Self {
        let mut out = *self;
        for j in 0..4 {
            out.data[j] = out.data[j] * c;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = *self;
        for j in 0..4 {
            out.data[j] = out.data[j].conj();
        }
        out
    }

    pub fn det(&self) -> Cplx<T> {
        match self.n {
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            _ => unreachable!(),
        }
    }

    pub fn trace(&self) -> Cplx<T> {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for j in 0..self.n {
            acc = acc + self[(j, j)];
        }
        acc
    }

    /// Closed-form inverse together with a crude condition estimate
    /// (max-norm of the matrix times max-norm of the inverse).
    pub fn inverse(&self) -> Option<(Self, T)> {
        let det = self.det();
        if det.norm() == T::zero() || !det.norm().is_finite() {
            return None;
        }
        let inv = match self.n {
            1 => {
                let mut m = Self::zeros(1);
                m[(0, 0)] = det.inv();
                m
            }
            2 => {
                let idet = det.inv();
                let mut m = Self::zeros(2);
                m[(0, 0)] = self[(1, 1)] * idet;
                m[(0, 1)] = -self[(0, 1)] * idet;
                m[(1, 0)] = -self[(1, 0)] * idet;
                m[(1, 1)] = self[(0, 0)] * idet;
                m
            }
            _ => unreachable!(),
        };
        let cond = self.max_abs() * inv.max_abs();
        Some((inv, cond))
    }

    pub fn max_abs(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = acc.max(self[(i, j)].norm());
            }
        }
        acc
    }

    /// Max-norm of (self - selfᵀ).
    pub fn asymmetry(&self) -> T {
        self.sub(&self.transpose()).max_abs()
    }

    pub fn symmetrize(&self) -> Self {
        let mut out = self.add(&self.transpose());
        for j in 0..4 {
            out.data[j] = out.data[j].scale(T::of(0.5));
        }
        out
    }

    pub fn imag_part(&self) -> RMat<T> {
        let mut out = RMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(i, j)].im;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n)
            .all(|i| (0..self.n).all(|j| self[(i, j)].re.is_finite() && self[(i, j)].im.is_finite()))
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        debug_assert!(i < self.n && j < self.n);
        &self.data[i * 2 + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        debug_assert!(i < self.n && j < self.n);
        &mut self.data[i * 2 + j]
    }
}

/// Eigenvalues of a symmetric real matrix of dimension ≤ 2, ascending.
pub fn sym_eigenvalues<T: Real>(m: &RMat<T>) -> [T; 2] {
    match m.n {
        1 => [m[(0, 0)], m[(0, 0)]],
        2 => {
            let half = T::of(0.5);
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m.det();
            let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
            [tr * half - disc, tr * half + disc]
        }
        _ => unreachable!(),
    }
}

trait ComplexScale<T> {
    fn scale(self, t: T) -> Self;
}

impl<T: Real> ComplexScale<T> for Cplx<T> {
    fn scale(self, t: T) -> Self {
        Cplx::new(self.re * t, self.im * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn inverse_2x2() {
        let mut m = CMat::<f64>::zeros(2);
        m[(0, 0)] = C64::new(1.0, 1.0);
        m[(0, 1)] = C64::new(0.0, 2.0);
        m[(1, 0)] = C64::new(-1.0, 0.0);
        m[(1, 1)] = C64::new(3.0, -1.0);
        let (inv, _) = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!((id[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(id[(0, 1)].norm() < 1e-14);
        assert!(id[(1, 0)].norm() < 1e-14);
        assert!((id[(1, 1)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn det4_identity() {
        let m = RMat::<f64>::identity(4);
        assert_eq!(m.det(), 1.0);
    }

    #[test]
    fn sym_eig_2x2() {
        let mut m = RMat::<f64>::zeros(2);
        m[(0, 0)] = 2.0;
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        m[(1, 1)] = 2.0;
        let ev = sym_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }
}
