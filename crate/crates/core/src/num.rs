//! Scalar abstraction and shared random sampling helpers.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar the numeric kernels are generic over: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` (exact for `f64`, rounded for `f32`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Lossy conversion from `usize`.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| Self::of(n as f64))
    }

    /// Widening conversion to `f64` (exact for both `f32` and `f64`).
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Uniform sample in `[lo, hi)`.
///
/// The underlying draw is always one `f64`, so `f32` and `f64` instantiations
/// consume RNG streams identically.
pub fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * T::of(u)
}

/// Standard normal sample.
pub fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::of(x)
}

/// Circularly symmetric complex Gaussian with total variance `variance`,
/// i.e. `E|z|^2 = variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let s = (variance / T::of(2.0)).sqrt();
    let re: T = standard_normal(rng);
    let im: T = standard_normal(rng);
    Complex::new(s * re, s * im)
}

/// Unit-modulus complex number with phase uniform on `[0, 2π)`.
pub fn unit_phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let phase = uniform(rng, T::zero(), T::TAU());
    Complex::from_polar(T::one(), phase)
}
