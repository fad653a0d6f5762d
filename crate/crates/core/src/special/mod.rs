//! Orthonormal Jacobi polynomials, associated Legendre functions, quadrature and
//! the quadrature-based connection oracle.

mod geometry;
mod oracle;
mod quadrature;

pub use geometry::{eval_geometry_harmonic, GeometryKind};
pub use oracle::{connection_oracle, connection_oracle_with_points, Basis, Measure, OracleMatrix};
pub use quadrature::{gauss_jacobi_rule, GaussRule};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Jacobi parameters (α, β), both greater than −1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> JacobiParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !(alpha > -T::one()) || !(beta > -T::one()) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Jacobi parameters must exceed -1 (got alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn sum(&self) -> T {
        self.alpha + self.beta
    }

    /// ln ∫ (1−x)^α (1+x)^β dx.
    pub fn ln_mass(&self) -> T {
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        (s + T::one()) * T::LN_2() + (a + T::one()).ln_gamma() + (b + T::one()).ln_gamma()
            - (s + T::lit(2.0)).ln_gamma()
    }

    /// ln h_n, the squared norm of the classical (unnormalised) P_n^{(α,β)}.
    pub fn ln_norm_sq(&self, n: usize) -> T {
        if n == 0 {
            return self.ln_mass();
        }
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        let nn = T::of(n);
        (s + T::one()) * T::LN_2() - (T::lit(2.0) * nn + s + T::one()).ln()
            + (nn + a + T::one()).ln_gamma()
            + (nn + b + T::one()).ln_gamma()
            - (nn + s + T::one()).ln_gamma()
            - (nn + T::one()).ln_gamma()
    }

    /// Diagonal recurrence coefficient α_n.
    pub fn rec_diag(&self, n: usize) -> T {
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        let two = T::lit(2.0);
        if n == 0 {
            return (b - a) / (s + two);
        }
        let nn = T::of(n);
        (b * b - a * a) / ((two * nn + s) * (two * nn + s + two))
    }

    /// Off-diagonal recurrence coefficient β_n coupling degrees n−1 and n (n ≥ 1).
    pub fn rec_off(&self, n: usize) -> T {
        debug_assert!(n >= 1);
        let (a, b) = (self.alpha, self.beta);
        let s = a + b;
        let one = T::one();
        let two = T::lit(2.0);
        if n == 1 {
            let s2 = s + two;
            return two * ((one + a) * (one + b) / (s2 * s2 * (s + T::lit(3.0)))).sqrt();
        }
        let nn = T::of(n);
        let m = two * nn + s;
        two * (nn * (nn + a) * (nn + b) * (nn + s) / ((m - one) * m * m * (m + one))).sqrt()
    }

    fn check_x(x: T) -> Result<()> {
        if !(x >= -T::one() && x <= T::one()) {
            return Err(Error::InvalidParameter(format!("evaluation point {x} outside [-1, 1]")));
        }
        Ok(())
    }

    /// Fills `out` with P̃_0(x), P̃_1(x), … scaled so that the first entry is `start`.
    fn recurrence_into(&self, x: T, start: T, out: &mut [T]) {
        if out.is_empty() {
            return;
        }
        out[0] = start;
        if out.len() == 1 {
            return;
        }
        out[1] = (x - self.rec_diag(0)) * out[0] / self.rec_off(1);
        for k in 1..out.len() - 1 {
            out[k + 1] = ((x - self.rec_diag(k)) * out[k] - self.rec_off(k) * out[k - 1]) / self.rec_off(k + 1);
        }
    }
}

/// Orthonormal Jacobi polynomial P̃_n^{(α,β)}(x).
pub fn eval_jacobi_orthonormal<T: Real>(n: usize, p: &JacobiParams<T>, x: T) -> Result<T> {
    JacobiParams::check_x(x)?;
    Ok(*jacobi_orthonormal_all(n, p, x).last().unwrap())
}

/// P̃_0(x), …, P̃_{nmax}(x).
pub fn jacobi_orthonormal_all<T: Real>(nmax: usize, p: &JacobiParams<T>, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); nmax + 1];
    let start = (-T::lit(0.5) * p.ln_mass()).exp();
    p.recurrence_into(x, start, &mut out);
    out
}

/// Classical Jacobi polynomial P_n^{(α,β)}(x) with P_n(1) = binom(n+α, n).
pub fn eval_jacobi_classical<T: Real>(n: usize, p: &JacobiParams<T>, x: T) -> Result<T> {
    let v = eval_jacobi_orthonormal(n, p, x)?;
    Ok(v * (T::lit(0.5) * p.ln_norm_sq(n)).exp())
}

/// Weighted orthonormal Jacobi function P̂_0(x), …, P̂_{nmax}(x).
pub fn weighted_jacobi_all<T: Real>(nmax: usize, p: &JacobiParams<T>, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); nmax + 1];
    let half = T::lit(0.5);
    let one = T::one();
    let ln_w = |e: T, t: T| if e == T::zero() { T::zero() } else { half * e * t.ln() };
    let lw = ln_w(p.alpha, one - x) + ln_w(p.beta, one + x);
    if lw == T::neg_infinity() {
        return out;
    }
    let start = (lw - half * p.ln_mass()).exp();
    p.recurrence_into(x, start, &mut out);
    out
}

/// Weighted orthonormal Jacobi function P̂_n^{(α,β)}(x) = (1−x)^{α/2}(1+x)^{β/2} P̃_n(x).
pub fn eval_weighted_jacobi<T: Real>(n: usize, p: &JacobiParams<T>, x: T) -> Result<T> {
    JacobiParams::check_x(x)?;
    Ok(*weighted_jacobi_all(n, p, x).last().unwrap())
}

/// Normalized associated Legendre function in the phased convention, positive
/// leading behaviour for both signs of `m`: P̃_ℓ^m = P̂^{(|m|,|m|)}_{ℓ−|m|}.
pub fn eval_assoc_legendre_norm<T: Real>(l: usize, m: i64, x: T) -> Result<T> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::InvalidParameter(format!("|m| = {am} exceeds l = {l}")));
    }
    let p = JacobiParams::new(T::of(am), T::of(am))?;
    eval_weighted_jacobi(l - am, &p, x)
}

/// Normalized associated Legendre function with the Condon–Shortley phase (−1)^m.
pub fn eval_assoc_legendre_norm_cs<T: Real>(l: usize, m: i64, x: T) -> Result<T> {
    let v = eval_assoc_legendre_norm(l, m, x)?;
    Ok(if m.rem_euclid(2) == 1 { -v } else { v })
}
