use super::{gauss_jacobi_rule, jacobi_orthonormal_all, JacobiParams};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// A family of functions on [−1, 1] of the form (1−x)^e (1+x)^f · P̃_k^{(a,b)}(x), k = 0, 1, ….
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis<T> {
    /// P̃^m_{m+k} (phased normalized associated Legendre functions of order m).
    Legendre { order: usize },
    /// Orthonormal Jacobi polynomials.
    Jacobi(JacobiParams<T>),
    /// Weighted orthonormal Jacobi functions P̂_k.
    WeightedJacobi(JacobiParams<T>),
    /// (1−x)^left (1+x)^right P̃_k^{(α,β)}.
    Scaled { params: JacobiParams<T>, left: u32, right: u32 },
}

impl<T: Real> Basis<T> {
    fn params(&self) -> JacobiParams<T> {
        match *self {
            Basis::Legendre { order } => JacobiParams { alpha: T::of(order), beta: T::of(order) },
            Basis::Jacobi(p) | Basis::WeightedJacobi(p) => p,
            Basis::Scaled { params, .. } => params,
        }
    }

    fn exponents(&self) -> (T, T) {
        let half = T::lit(0.5);
        match *self {
            Basis::Legendre { order } => (half * T::of(order), half * T::of(order)),
            Basis::Jacobi(_) => (T::zero(), T::zero()),
            Basis::WeightedJacobi(p) => (half * p.alpha, half * p.beta),
            Basis::Scaled { left, right, .. } => (T::of(left as usize), T::of(right as usize)),
        }
    }
}

/// Integration measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure<T> {
    Lebesgue,
    Jacobi(JacobiParams<T>),
}

impl<T: Real> Measure<T> {
    fn exponents(&self) -> (T, T) {
        match *self {
            Measure::Lebesgue => (T::zero(), T::zero()),
            Measure::Jacobi(p) => (p.alpha, p.beta),
        }
    }
}

/// Oracle output with an exactness flag.
#[derive(Clone, Debug)]
pub struct OracleMatrix<T> {
    pub matrix: DenseMatrix<T>,
    /// False when the requested point count cannot integrate the products exactly.
    pub exact: bool,
}

/// Connection matrix C with `from_k = Σ_l C[l, k] to_l`, computed by Gauss–Jacobi quadrature
/// with enough points to integrate every product exactly.
pub fn connection_oracle<T: Real>(
    to: &Basis<T>,
    from: &Basis<T>,
    measure: &Measure<T>,
    rows: usize,
    cols: usize,
) -> Result<DenseMatrix<T>> {
    let q = (rows + cols).div_ceil(2).max(1);
    Ok(connection_oracle_with_points(to, from, measure, rows, cols, q)?.matrix)
}

/// Same as [`connection_oracle`] with a caller-chosen point count for the cross products.
pub fn connection_oracle_with_points<T: Real>(
    to: &Basis<T>,
    from: &Basis<T>,
    measure: &Measure<T>,
    rows: usize,
    cols: usize,
    points: usize,
) -> Result<OracleMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Ok(OracleMatrix { matrix: DenseMatrix::zeros(rows, cols), exact: true });
    }
    let needed = (rows + cols).div_ceil(2);
    let exact = points >= needed;
    if !exact {
        log::warn!("connection oracle: {points} points cannot integrate degree {} exactly", rows + cols - 2);
    }
    let (ma, mb) = measure.exponents();
    let (ta, tb) = to.exponents();
    let (fa, fb) = from.exponents();
    let cross = JacobiParams::new(ma + ta + fa, mb + tb + fb).map_err(|_| {
        Error::InvalidParameter("combined weight exponents must exceed -1".into())
    })?;
    let selfw = JacobiParams::new(ma + ta + ta, mb + tb + tb)
        .map_err(|_| Error::InvalidParameter("combined weight exponents must exceed -1".into()))?;
    let tp = to.params();
    let fp = from.params();

    let rule = gauss_jacobi_rule(points.max(1), &cross)?;
    let mut c = DenseMatrix::zeros(rows, cols);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let tv = jacobi_orthonormal_all(rows - 1, &tp, x);
        let fv = jacobi_orthonormal_all(cols - 1, &fp, x);
        for (k, &f) in fv.iter().enumerate() {
            let wf = w * f;
            for (l, &t) in tv.iter().enumerate() {
                c[(l, k)] += wf * t;
            }
        }
    }

    let rule = gauss_jacobi_rule(rows, &selfw)?;
    let mut norms = vec![T::zero(); rows];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let tv = jacobi_orthonormal_all(rows - 1, &tp, x);
        for (nl, &t) in norms.iter_mut().zip(&tv) {
            *nl += w * t * t;
        }
    }
    for k in 0..cols {
        for l in 0..rows {
            c[(l, k)] /= norms[l];
        }
    }
    Ok(OracleMatrix { matrix: c, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_families_coincide() {
        let p = JacobiParams::new(0.5, 2.0).unwrap();
        let b = Basis::WeightedJacobi(p);
        let c = connection_oracle(&b, &b, &Measure::Lebesgue, 6, 6).unwrap();
        assert!(c.sub(&DenseMatrix::identity(6, 6)).max_abs() < 1e-13);
    }

    #[test]
    fn legendre_first_column() {
        let c = connection_oracle(
            &Basis::<f64>::Legendre { order: 0 },
            &Basis::Legendre { order: 2 },
            &Measure::Lebesgue,
            3,
            1,
        )
        .unwrap();
        assert!((c[(0, 0)] - (5.0f64 / 6.0).sqrt()).abs() < 1e-14);
        assert!(c[(1, 0)].abs() < 1e-14);
        assert!((c[(2, 0)] + (1.0f64 / 6.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn too_few_points_is_flagged() {
        let b = Basis::<f64>::Legendre { order: 0 };
        let r = connection_oracle_with_points(&b, &Basis::Legendre { order: 2 }, &Measure::Lebesgue, 8, 6, 3).unwrap();
        assert!(!r.exact);
    }
}
