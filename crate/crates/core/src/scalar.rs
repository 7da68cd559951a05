use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar for fields and transforms: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_i64_exact(x: i64) -> Self {
        Self::from_i64(x).expect("integer representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Tolerance near the unit roundoff of the type, used by consistency checks.
    fn roundoff() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{2πi·x}`.
pub fn cis_turns<T: Real>(x: T) -> Complex<T> {
    let angle = T::TAU() * x;
    Complex::new(angle.cos(), angle.sin())
}

/// `⟨k⟩ = (1 + |k|²)^{1/2}`.
pub fn japanese_bracket<T: Real>(k: &[i64]) -> T {
    let sq: i64 = k.iter().map(|c| c * c).sum();
    (T::one() + T::from_i64_exact(sq)).sqrt()
}

/// `⟨k⟩^{2s}` without the intermediate square root.
pub fn bracket_pow2<T: Real>(k: &[i64], s: T) -> T {
    let sq: i64 = k.iter().map(|c| c * c).sum();
    (T::one() + T::from_i64_exact(sq)).powf(s)
}
