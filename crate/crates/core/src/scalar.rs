//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`] and operate on [`Complex`]
//! samples of it. `f64` is the working precision used by the CLI and the
//! test-suite; `f32` is supported for lower-precision experiments.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::FromPrimitive;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this precision.
    fn lit(x: f64) -> Self;
    /// Widens (or keeps) the value as `f64`.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Complex scalar over `R`.
pub type Cplx<R> = Complex<R>;

#[inline]
pub(crate) fn cplx<R: Real>(re: R) -> Cplx<R> {
    Complex::new(re, R::zero())
}

/// |z|, computed without overflow.
#[inline]
pub fn modulus<R: Real>(z: Cplx<R>) -> R {
    ComplexField::modulus(z)
}

pub(crate) fn is_finite<R: Real>(z: Cplx<R>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Binomial coefficient as a real number (small arguments only).
pub(crate) fn binomial<R: Real>(n: usize, k: usize) -> R {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    R::lit(acc.round())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_row() {
        let row: Vec<f64> = (0..=4).map(|k| binomial::<f64>(4, k)).collect();
        assert_eq!(row, vec![1.0, 4.0, 6.0, 4.0, 1.0]);
    }

    #[test]
    fn modulus_is_euclidean() {
        assert_eq!(modulus(Complex::new(3.0f64, 4.0)), 5.0);
        assert_eq!(modulus(Complex::new(-3.0f32, 0.0)), 3.0);
    }
}
