use num_complex::Complex;

use super::{eval_assoc_legendre_norm, eval_jacobi_orthonormal, eval_weighted_jacobi, JacobiParams};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Domain of a harmonic polynomial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeometryKind<T> {
    /// Unit sphere, point = (θ, φ).
    Sphere,
    /// Unit disk (Zernike polynomials), point = (r, θ).
    Disk,
    /// Reference triangle with weight x^α y^β (1−x−y)^γ, point = (x, y).
    Triangle { alpha: T, beta: T, gamma: T },
}

impl<T: Real> GeometryKind<T> {
    pub fn triangle(alpha: T, beta: T, gamma: T) -> Result<Self> {
        for v in [alpha, beta, gamma] {
            if !(v > -T::one()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("triangle parameter {v} must exceed -1")));
            }
        }
        Ok(GeometryKind::Triangle { alpha, beta, gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeometryKind::Sphere => "sphere",
            GeometryKind::Disk => "disk",
            GeometryKind::Triangle { .. } => "triangle",
        }
    }
}

/// Evaluates the orthonormal harmonic of degree `l` and order `m` for `kind`.
///
/// Sphere: e^{imφ}/√(2π) P̃_l^m(cos θ). Disk: e^{imθ}/√(2π) √(2l+2) r^{|m|}
/// P^{(0,|m|)}_{(l−|m|)/2}(2r²−1). Triangle: real valued, 0 ≤ m ≤ l, orthonormal for
/// 2^{α+2β+2γ+3} x^α y^β (1−x−y)^γ.
pub fn eval_geometry_harmonic<T: Real>(kind: &GeometryKind<T>, l: usize, m: i64, point: (T, T)) -> Result<Complex<T>> {
    let am = m.unsigned_abs() as usize;
    let inv_sqrt_2pi = T::one() / (T::lit(2.0) * T::PI()).sqrt();
    match *kind {
        GeometryKind::Sphere => {
            let (theta, phi) = point;
            let p = eval_assoc_legendre_norm(l, m, theta.cos().max(-T::one()).min(T::one()))?;
            let arg = T::from_i64(m).unwrap() * phi;
            Ok(Complex::new(arg.cos(), arg.sin()) * (p * inv_sqrt_2pi))
        }
        GeometryKind::Disk => {
            let (r, theta) = point;
            if am > l || (l - am) % 2 != 0 {
                return Err(Error::InvalidParameter(format!("Zernike index (l = {l}, m = {m}) needs l − |m| even and ≥ 0")));
            }
            if !(r >= T::zero() && r <= T::one()) {
                return Err(Error::InvalidParameter(format!("radius {r} outside [0, 1]")));
            }
            let p = JacobiParams::new(T::zero(), T::of(am))?;
            let t = (T::lit(2.0) * r * r - T::one()).max(-T::one()).min(T::one());
            let radial = T::lit(2.0) * eval_weighted_jacobi((l - am) / 2, &p, t)?;
            let arg = T::from_i64(m).unwrap() * theta;
            Ok(Complex::new(arg.cos(), arg.sin()) * (radial * inv_sqrt_2pi))
        }
        GeometryKind::Triangle { alpha, beta, gamma } => {
            if m < 0 || am > l {
                return Err(Error::InvalidParameter(format!("triangle index needs 0 ≤ m ≤ l (l = {l}, m = {m})")));
            }
            let (x, y) = point;
            let one = T::one();
            let two = T::lit(2.0);
            if !(x >= T::zero() && y >= T::zero() && x + y <= one) {
                return Err(Error::InvalidParameter("point outside the reference triangle".into()));
            }
            let px = JacobiParams::new(two * T::of(am) + beta + gamma + one, alpha)?;
            let py = JacobiParams::new(gamma, beta)?;
            let fx = eval_jacobi_orthonormal(l - am, &px, two * x - one)?;
            let t = if one - x > T::zero() { (two * y / (one - x) - one).max(-one).min(one) } else { T::zero() };
            let fy = eval_jacobi_orthonormal(am, &py, t)?;
            let v = (two * (one - x)).powi(am as i32) * fx * fy;
            Ok(Complex::new(v, T::zero()))
        }
    }
}
