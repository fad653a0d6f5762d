use super::{
    banded_cholesky, product_section, symmetrized_similarity, upper_inverse_diagonals, BandedSymmetric, BandedUpper,
};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::special::JacobiParams;

// Formulas below use the 1-based index n = i + 1 of the basis P̂_i^{(α,β)}.

fn mult_diag<T: Real>(a: T, b: T, i: usize) -> T {
    let two = T::lit(2.0);
    let s = a + b;
    if i == 0 {
        return two * (b + T::one()) / (s + two);
    }
    let n = T::of(i + 1);
    (two * n * (two * n - two) + (T::lit(4.0) * n + two * b - two) * s) / ((two * n + s) * (two * n + s - two))
}

/// Multiplication by 1 + x.
pub fn jac_mult_1p<T: Real>(p: &JacobiParams<T>, size: usize) -> BandedSymmetric<T> {
    BandedSymmetric::from_fn(size, 1, |i, j| if i == j { mult_diag(p.alpha, p.beta, i) } else { p.rec_off(i + 1) })
}

/// Multiplication by 1 − x.
pub fn jac_mult_1m<T: Real>(p: &JacobiParams<T>, size: usize) -> BandedSymmetric<T> {
    BandedSymmetric::from_fn(size, 1, |i, j| if i == j { mult_diag(p.beta, p.alpha, i) } else { -p.rec_off(i + 1) })
}

/// Multiplication operators 1 + x, 1 − x, 1 − x², (1 + x)², (1 − x)² on P̂^{(α,β)}.
#[derive(Clone, Debug)]
pub struct JacobiMultOps<T> {
    pub m1: BandedSymmetric<T>,
    pub m2: BandedSymmetric<T>,
    pub m: BandedSymmetric<T>,
    pub m_plus: BandedSymmetric<T>,
    pub m_minus: BandedSymmetric<T>,
}

/// Exact `size × size` sections of the multiplication operators.
pub fn jac_mult_ops<T: Real>(p: &JacobiParams<T>, size: usize) -> Result<JacobiMultOps<T>> {
    let m1 = jac_mult_1p(p, size + 1);
    let m2 = jac_mult_1m(p, size + 1);
    Ok(JacobiMultOps {
        m: product_section(&m1, &m2, size)?,
        m_plus: product_section(&m1, &m1, size)?,
        m_minus: product_section(&m2, &m2, size)?,
        m1: m1.section(size),
        m2: m2.section(size),
    })
}

/// Closed-form upper Cholesky factor of 1 − x² (`M = Rᵀ R`).
pub fn jac_cholesky<T: Real>(p: &JacobiParams<T>, size: usize) -> BandedUpper<T> {
    let (a, b) = (p.alpha, p.beta);
    let s = a + b;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    BandedUpper::from_fn(size, 2, |i, j| {
        let n = T::of(i + 1);
        let q = two * n + s;
        match j - i {
            0 => {
                let pair = if i == 0 { one } else { (n + s) / (q - one) };
                two * ((n + a) * (n + b) * pair * (n + s + one) / (q * q * (q + one))).sqrt()
            }
            1 => two * (a - b) * (n * (n + s + one)).sqrt() / (q * (q + two)),
            _ => -two * (n * (n + one) * (n + a + one) * (n + b + one) / ((q + one) * (q + two) * (q + two) * (q + three))).sqrt(),
        }
    })
}

fn poch<T: Real>(x: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (x + T::of(j)))
}

/// Closed-form diagonals 0, 1, 2 of `R⁻¹`.
pub fn jac_rinv_diagonals<T: Real>(p: &JacobiParams<T>, size: usize) -> Vec<Vec<T>> {
    let (a, b) = (p.alpha, p.beta);
    let s = a + b;
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let pair = |i: usize, n: T, q: T| if i == 0 { one } else { (q - one) / (n + s) };
    let d0 = (0..size)
        .map(|i| {
            let n = T::of(i + 1);
            let q = two * n + s;
            T::lit(0.5) * (pair(i, n, q) * q * q * (q + one) / ((n + a) * (n + b) * (n + s + one))).sqrt()
        })
        .collect();
    let d1 = (0..size.saturating_sub(1))
        .map(|i| {
            let n = T::of(i + 1);
            let q = two * n + s;
            (b - a) / two
                * (n * pair(i, n, q) * (q + one) * (q + one) * (q + three)
                    / (poch(n + a, 2) * poch(n + b, 2) * poch(n + s + one, 2)))
                .sqrt()
        })
        .collect();
    let d2 = (0..size.saturating_sub(2))
        .map(|i| {
            let n = T::of(i + 1);
            let q = two * n + s;
            let r = (poch(n, 2) * pair(i, n, q) * (q + two) * (q + two) * (q + T::lit(5.0))
                / (poch(n + a, 3) * poch(n + b, 3) * poch(n + s + one, 3)))
            .sqrt();
            r / T::lit(8.0) * (q * (q + T::lit(4.0)) + three * (a - b) * (a - b))
        })
        .collect();
    vec![d0, d1, d2]
}

/// Eigenvalues i(i + α + β + 1) of the Jacobi differential operator.
pub fn jac_diagonal<T: Real>(p: &JacobiParams<T>, size: usize) -> Vec<T> {
    let s1 = p.sum() + T::one();
    (0..size).map(|i| T::of(i) * (T::of(i) + s1)).collect()
}

/// Parameter jump from `source` = (γ, δ) down to `target` = (α, β).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiJump<T> {
    pub target: JacobiParams<T>,
    pub source: JacobiParams<T>,
}

/// Which single parameter a jump raises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OneSided {
    Alpha,
    Beta,
}

fn even_steps<T: Real>(d: T) -> Option<usize> {
    let r = d.round();
    if (d - r).abs() > T::lit(1e-12) * T::one().max(d.abs()) || r < T::zero() {
        return None;
    }
    let k = r.to_usize()?;
    (k % 2 == 0).then_some(k / 2)
}

impl<T: Real> JacobiJump<T> {
    pub fn new(target: JacobiParams<T>, source: JacobiParams<T>) -> Result<Self> {
        let j = Self { target, source };
        let (ka, kb) = (even_steps(source.alpha - target.alpha), even_steps(source.beta - target.beta));
        match (ka, kb) {
            (Some(a), Some(b)) if a + b > 0 => Ok(j),
            (Some(0), Some(0)) => Err(Error::InvalidParameter("parameter jump must be non-trivial".into())),
            _ => Err(Error::InvalidParameter(format!(
                "parameter increments ({}, {}) must be non-negative even integers",
                source.alpha - target.alpha,
                source.beta - target.beta
            ))),
        }
    }

    /// Number of α-steps and β-steps.
    pub fn steps(&self) -> (usize, usize) {
        (
            even_steps(self.source.alpha - self.target.alpha).unwrap(),
            even_steps(self.source.beta - self.target.beta).unwrap(),
        )
    }

    pub fn one_sided(&self) -> Option<OneSided> {
        match self.steps() {
            (_, 0) => Some(OneSided::Alpha),
            (0, _) => Some(OneSided::Beta),
            _ => None,
        }
    }
}

/// Section of the operator S with (M D + S) having the source functions as eigenvectors
/// (S = c₊ M⁺ + c₋ M⁻ − c M on the target basis).
pub fn jac_s_operator<T: Real>(jump: &JacobiJump<T>, size: usize) -> Result<BandedSymmetric<T>> {
    let ops = jac_mult_ops(&jump.target, size)?;
    let (a, b) = (jump.target.alpha, jump.target.beta);
    let (g, d) = (jump.source.alpha, jump.source.beta);
    let q = T::lit(0.25);
    let cp = q * (g * g - a * a);
    let cm = q * (d * d - b * b);
    let c = T::lit(0.5) * (g * d + g + d - a * b - a - b);
    Ok(ops.m_plus.scale(cp).add_scaled(cm, &ops.m_minus).add_scaled(-c, &ops.m))
}

/// Weight W and reduced operator S' of a one-sided jump: S = M₁ S' (α-jump, W = 1 − x)
/// or S = M₂ S' (β-jump, W = 1 + x), so the pencil is (W D + S', W).
pub fn jac_s_reduced<T: Real>(jump: &JacobiJump<T>, size: usize) -> Result<(BandedSymmetric<T>, BandedSymmetric<T>)> {
    let p = &jump.target;
    let (a, b) = (p.alpha, p.beta);
    let (g, d) = (jump.source.alpha, jump.source.beta);
    let q = T::lit(0.25);
    let half = T::lit(0.5);
    let m1 = jac_mult_1p(p, size);
    let m2 = jac_mult_1m(p, size);
    match jump.one_sided() {
        Some(OneSided::Alpha) => {
            let s = m1.scale(q * (g * g - a * a)).add_scaled(-half * (g - a) * (b + T::one()), &m2);
            Ok((s, m2))
        }
        Some(OneSided::Beta) => {
            let s = m2.scale(q * (d * d - b * b)).add_scaled(-half * (d - b) * (a + T::one()), &m1);
            Ok((s, m1))
        }
        None => Err(Error::InvalidParameter("jump raises both parameters".into())),
    }
}

/// Weight operator W of a one-sided jump (1 − x for α-jumps, 1 + x for β-jumps).
pub fn jac_one_sided_weight<T: Real>(jump: &JacobiJump<T>, size: usize) -> Result<BandedSymmetric<T>> {
    Ok(jac_s_reduced(jump, size)?.1)
}

/// Symmetrized `size × size` section of R S R⁻¹ for the two-sided pencil, checked against
/// a dense evaluation for symmetry and pentadiagonal structure.
pub fn jac_rsrinv<T: Real>(jump: &JacobiJump<T>, size: usize) -> Result<BandedSymmetric<T>> {
    let k = size + 2;
    let r = jac_cholesky(&jump.target, k);
    let s = jac_s_operator(jump, k)?;
    let rinv = jac_rinv_diagonals(&jump.target, k);
    let x = symmetrized_similarity(&r, &s, &rinv, size)?;
    check_similarity(&r, &s, size, s.max_abs())?;
    Ok(x)
}

const SIMILARITY_CHECK_SIZE: usize = 64;

/// Dense check that the leading block of R S R⁻¹ is symmetric with the bandwidth of S.
/// Only a leading block of at most `SIMILARITY_CHECK_SIZE` is formed.
pub(crate) fn check_similarity<T: Real>(r: &BandedUpper<T>, s: &BandedSymmetric<T>, size: usize, scale: T) -> Result<(T, T)> {
    let c = size.min(SIMILARITY_CHECK_SIZE);
    let k = (c + r.bandwidth()).min(r.size()).min(s.size());
    let (asym, fill) = similarity_defects(&r.section(k), &s.section(k), c);
    let tol = T::lit(1e-8) * scale.max(T::min_positive_value());
    if asym > tol || fill > tol {
        return Err(Error::InternalConsistency(format!(
            "R S R^-1 not symmetric banded: asymmetry {asym:e}, fill {fill:e}"
        )));
    }
    Ok((asym, fill))
}

/// Largest asymmetry and out-of-band entry of the leading `size` block of R S R⁻¹.
pub fn similarity_defects<T: Real>(r: &BandedUpper<T>, s: &BandedSymmetric<T>, size: usize) -> (T, T) {
    let kk = r.size().min(s.size());
    let rd = r.section(kk).to_dense();
    let mut rinv = DenseMatrix::identity(kk, kk);
    for c in 0..kk {
        let col = rinv.col_mut(c);
        for i in (0..=c).rev() {
            let mut acc = col[i];
            for j in i + 1..(i + r.bandwidth() + 1).min(kk) {
                acc -= rd[(i, j)] * col[j];
            }
            col[i] = acc / rd[(i, i)];
        }
    }
    let rs = rd.matmul(&s.section(kk).to_dense());
    let q = rs.matmul(&rinv);
    let w = s.bandwidth();
    let mut asym = T::zero();
    let mut fill = T::zero();
    for i in 0..size {
        for j in 0..size {
            asym = asym.max((q[(i, j)] - q[(j, i)]).abs());
            if i.abs_diff(j) > w {
                fill = fill.max(q[(i, j)].abs());
            }
        }
    }
    (asym, fill)
}

/// Upper Cholesky factor of a one-sided weight operator and its inverse diagonals.
pub(crate) fn weight_factor<T: Real>(w: &BandedSymmetric<T>, count: usize) -> Result<(BandedUpper<T>, Vec<Vec<T>>)> {
    let r = banded_cholesky(w)?;
    let rinv = upper_inverse_diagonals(&r, count);
    Ok((r, rinv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mult_ops_match_dense_products() {
        let p = JacobiParams::new(0.5f64, 2.0).unwrap();
        let ops = jac_mult_ops(&p, 10).unwrap();
        let a = jac_mult_1p(&p, 12).to_dense();
        let b = jac_mult_1m(&p, 12).to_dense();
        let ab = a.matmul(&b);
        for i in 0..10 {
            for j in 0..10 {
                assert!((ops.m.get(i, j) - ab[(i, j)]).abs() < 1e-14);
            }
        }
        // (1 + x) + (1 − x) = 2.
        let sum = ops.m1.add_scaled(1.0, &ops.m2);
        assert!(sum.shift(-2.0).max_abs() < 1e-14);
    }

    #[test]
    fn cholesky_closed_form_matches_recurrence() {
        for (a, b) in [(0.0f64, 0.0f64), (0.5, 2.0), (-0.5, 0.25), (3.0, 1.0)] {
            let p = JacobiParams::new(a, b).unwrap();
            let ops = jac_mult_ops(&p, 60).unwrap();
            let rr = banded_cholesky(&ops.m).unwrap();
            let rc = jac_cholesky(&p, 60);
            for k in 0..=2 {
                for (x, y) in rc.diag(k).iter().zip(rr.diag(k)) {
                    assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300), "{a} {b} k={k}: {x} {y}");
                }
            }
            let inv = upper_inverse_diagonals(&rr, 2);
            let invc = jac_rinv_diagonals(&p, 60);
            for k in 0..=2 {
                for (x, y) in invc[k].iter().zip(&inv[k]) {
                    assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300), "{a} {b} k={k}: {x} {y}");
                }
            }
        }
    }

    #[test]
    fn legendre_cholesky_example() {
        let r = jac_cholesky(&JacobiParams::new(0.0f64, 0.0).unwrap(), 3);
        assert!((r.get(0, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(r.get(0, 1), 0.0);
        assert!((r.get(0, 2) + (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jumps_are_validated() {
        let t = JacobiParams::new(0.0f64, 0.0).unwrap();
        assert!(JacobiJump::new(t, JacobiParams::new(1.0, 0.0).unwrap()).is_err());
        assert!(JacobiJump::new(t, t).is_err());
        assert!(JacobiJump::new(JacobiParams::new(2.0, 0.0).unwrap(), t).is_err());
        let j = JacobiJump::new(t, JacobiParams::new(4.0, 2.0).unwrap()).unwrap();
        assert_eq!(j.steps(), (2, 1));
        assert_eq!(j.one_sided(), None);
    }

    #[test]
    fn similarity_is_symmetric_pentadiagonal() {
        let t = JacobiParams::new(0.5f64, 1.0).unwrap();
        let j = JacobiJump::new(t, JacobiParams::new(2.5, 3.0).unwrap()).unwrap();
        let x = jac_rsrinv(&j, 40).unwrap();
        assert_eq!(x.bandwidth(), 2);
    }
}
