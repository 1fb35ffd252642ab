//! Scalar abstraction shared by the numerical modules.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the beamforming math runs on: `f32` or `f64`.
pub trait Real:
    RealField + Float + FloatConst + FromPrimitive + ToPrimitive + Copy + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 constant fits the scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cx<T> = Complex<T>;
pub type CVector<T> = DVector<Complex<T>>;
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// `aᵀ b` (no conjugation).
pub fn dot_t<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Cx<T> {
    a.iter()
        .zip(b.iter())
        .fold(Cx::new(T::zero(), T::zero()), |acc, (x, y)| acc + *x * *y)
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(v: &CVector<T>) -> T {
    Float::sqrt(v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()))
}

/// Frobenius norm of a complex matrix.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    Float::sqrt(m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()))
}

/// Largest entry modulus, zero for an empty vector.
pub fn max_modulus<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| Float::max(acc, z.norm()))
}

/// Smallest entry modulus, zero for an empty vector.
pub fn min_modulus<T: Real>(v: &CVector<T>) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.iter()
        .fold(<T as Float>::infinity(), |acc, z| Float::min(acc, z.norm()))
}

/// Converts a complex vector between scalar types.
pub fn cast_vector<S: Real, T: Real>(v: &CVector<S>) -> CVector<T> {
    v.map(|z| Cx::new(T::lit(z.re.as_f64()), T::lit(z.im.as_f64())))
}

/// Converts a complex matrix between scalar types.
pub fn cast_matrix<S: Real, T: Real>(m: &CMatrix<S>) -> CMatrix<T> {
    m.map(|z| Cx::new(T::lit(z.re.as_f64()), T::lit(z.im.as_f64())))
}
