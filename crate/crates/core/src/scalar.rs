//! Scalar abstraction: all numerics are generic over the floating type.

use num_complex::Complex;

/// Floating-point scalar the whole crate is generic over (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to scalar")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cplx<T> = Complex<T>;

pub fn c_re<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

pub fn c_im<T: Real>(im: T) -> Cplx<T> {
    Complex::new(T::zero(), im)
}
