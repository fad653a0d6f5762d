use super::{banded_cholesky, rwrt_section, BandedSymmetric, BandedUpper};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

// Formulas below use the 1-based index n = i + 1 of the basis P̃^m_{m+i}.

fn nm<T: Real>(m: usize, i: usize) -> (T, T) {
    (T::of(i + 1), T::of(m))
}

/// Multiplication by 1 − x² in the basis P̃^m_{m+i}, `size × size` section.
pub fn sh_mult<T: Real>(m: usize, size: usize) -> BandedSymmetric<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    BandedSymmetric::from_fn(size, 2, |i, j| match j - i {
        0 => {
            let (n, m) = nm::<T>(m, i);
            two * (n * n + two * m * n + two * m * m - n - m - one) / ((two * n + two * m - three) * (two * n + two * m + one))
        }
        2 => {
            let (n, m) = nm::<T>(m, i);
            let q = two * n + two * m;
            -(n * (n + one) * (n + two * m) * (n + two * m + one) / ((q - one) * (q + one) * (q + one) * (q + three))).sqrt()
        }
        _ => T::zero(),
    })
}

/// Closed-form upper Cholesky factor of [`sh_mult`] (`M = Rᵀ R`).
pub fn sh_cholesky<T: Real>(m: usize, size: usize) -> BandedUpper<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    BandedUpper::from_fn(size, 2, |i, j| {
        let (n, m) = nm::<T>(m, i);
        let q = two * n + two * m;
        match j - i {
            0 => ((n + two * m) * (n + two * m + one) / ((q - one) * (q + one))).sqrt(),
            2 => -(n * (n + one) / ((q + one) * (q + three))).sqrt(),
            _ => T::zero(),
        }
    })
}

/// Cholesky factor of [`sh_mult`] from the pentadiagonal recurrence.
pub fn sh_cholesky_recurrence<T: Real>(m: usize, size: usize) -> Result<BandedUpper<T>> {
    banded_cholesky(&sh_mult(m, size))
}

/// Eigenvalues ℓ(ℓ+1) of the Laplace–Beltrami operator for ℓ = m + i.
pub fn sh_diagonal<T: Real>(m: usize, size: usize) -> Vec<T> {
    (0..size).map(|i| T::of((m + i) * (m + i + 1))).collect()
}

/// Closed-form `R Rᵀ` section.
pub fn sh_rrt<T: Real>(m: usize, size: usize) -> BandedSymmetric<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    BandedSymmetric::from_fn(size, 2, |i, j| {
        let (n, m) = nm::<T>(m, i);
        let q = two * n + two * m;
        match j - i {
            0 => two * (two * m * m + (two * n + three) * m + n * (n + one)) / ((q - one) * (q + three)),
            2 => -(n * (n + one) * (n + two * m + two) * (n + two * m + three)
                / ((q + one) * (q + three) * (q + three) * (q + T::lit(5.0))))
            .sqrt(),
            _ => T::zero(),
        }
    })
}

/// Closed-form `R D Rᵀ` section.
pub fn sh_rdrt<T: Real>(m: usize, size: usize) -> BandedSymmetric<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    BandedSymmetric::from_fn(size, 2, |i, j| {
        let (n, m) = nm::<T>(m, i);
        let q = two * n + two * m;
        match j - i {
            0 => {
                let m2 = m * m;
                let num = T::lit(4.0) * m2 * m2
                    + (T::lit(12.0) * n + two) * m2 * m
                    + (T::lit(14.0) * n * n + T::lit(6.0) * n - T::lit(6.0)) * m2
                    + (T::lit(8.0) * n * n * n + T::lit(8.0) * n * n - T::lit(4.0) * n) * m
                    + two * n * (n + one) * (n * n + n - one);
                num / ((q - one) * (q + three))
            }
            2 => -(n + m + one) * (n + m + two)
                * (n * (n + one) * (n + two * m + two) * (n + two * m + three)
                    / ((q + one) * (q + three) * (q + three) * (q + T::lit(5.0))))
                .sqrt(),
            _ => T::zero(),
        }
    })
}

/// `R Rᵀ` section from the recurrence-built factor.
pub fn sh_rrt_recurrence<T: Real>(m: usize, size: usize) -> Result<BandedSymmetric<T>> {
    rwrt_section(&sh_cholesky_recurrence(m, size + 2)?, None, size)
}

/// `R D Rᵀ` section from the recurrence-built factor.
pub fn sh_rdrt_recurrence<T: Real>(m: usize, size: usize) -> Result<BandedSymmetric<T>> {
    let d = sh_diagonal(m, size + 2);
    rwrt_section(&sh_cholesky_recurrence(m, size + 2)?, Some(&d), size)
}

/// Entry (l, n) of the inverse of the multiplication operator (0-based, order m ≥ 1).
pub fn sh_minv_entry<T: Real>(m: usize, l: usize, n: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidParameter("1 − x² is not invertible on order 0".into()));
    }
    if (l + n) % 2 == 1 {
        return Ok(T::zero());
    }
    let g = SemiseparableSym::<T>::generators(m, l.max(n) + 1);
    Ok(g.entry(l, n))
}

/// Leading section of the inverse multiplication operator.
pub fn sh_minv_section<T: Real>(m: usize, size: usize) -> Result<SemiseparableSym<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("1 − x² is not invertible on order 0".into()));
    }
    Ok(SemiseparableSym::generators(m, size))
}

/// Symmetric semiseparable matrix with parity structure:
/// `A[l, n] = exp(u_l + v_n) / scale` for l ≤ n with l + n even, zero otherwise.
#[derive(Clone, Debug)]
pub struct SemiseparableSym<T> {
    u: Vec<T>,
    v: Vec<T>,
    scale: T,
}

impl<T: Real> SemiseparableSym<T> {
    fn generators(m: usize, size: usize) -> Self {
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let mm = T::of(m);
        let f = |k: usize| {
            let kk = T::of(k);
            (kk + two * mm + T::one()).ln_gamma() - (kk + T::one()).ln_gamma()
        };
        let mut u = Vec::with_capacity(size);
        let mut v = Vec::with_capacity(size);
        for k in 0..size {
            let lk = half * (two * T::of(k) + two * mm + T::one()).ln();
            let fk = half * f(k);
            u.push(lk + fk);
            v.push(lk - fk);
        }
        Self { u, v, scale: two * mm }
    }

    pub fn size(&self) -> usize {
        self.u.len()
    }

    pub fn entry(&self, l: usize, n: usize) -> T {
        if (l + n) % 2 == 1 {
            return T::zero();
        }
        let (a, b) = if l <= n { (l, n) } else { (n, l) };
        (self.u[a] + self.v[b]).exp() / self.scale
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.size(), self.size(), |i, j| self.entry(i, j))
    }
}
