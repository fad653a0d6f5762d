//! Banded operators for the symmetric-definite pencils: multiplication operators,
//! Cholesky factors and their products.

mod jacobi;
mod sphere;

pub(crate) use jacobi::{check_similarity, weight_factor};
pub use jacobi::{
    jac_cholesky, jac_diagonal, jac_mult_1m, jac_mult_1p, jac_mult_ops, jac_one_sided_weight, jac_rinv_diagonals,
    jac_rsrinv, jac_s_operator, jac_s_reduced, similarity_defects, JacobiJump, JacobiMultOps, OneSided,
};
pub use sphere::{
    sh_cholesky, sh_cholesky_recurrence, sh_diagonal, sh_minv_entry, sh_minv_section, sh_mult, sh_rdrt,
    sh_rdrt_recurrence, sh_rrt, sh_rrt_recurrence, SemiseparableSym,
};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Symmetric banded matrix stored by diagonals: `diag(k)[i] = A[i, i + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSymmetric<T> {
    n: usize,
    diags: Vec<Vec<T>>,
}

impl<T: Real> BandedSymmetric<T> {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self { n, diags: (0..=bandwidth).map(|k| vec![T::zero(); n.saturating_sub(k)]).collect() }
    }

    /// Builds from `f(i, i + k)` for each stored diagonal `k`.
    pub fn from_fn(n: usize, bandwidth: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let diags = (0..=bandwidth).map(|k| (0..n.saturating_sub(k)).map(|i| f(i, i + k)).collect()).collect();
        Self { n, diags }
    }

    pub fn from_diagonals(diags: Vec<Vec<T>>) -> Result<Self> {
        let n = diags.first().map_or(0, |d| d.len());
        for (k, d) in diags.iter().enumerate() {
            if d.len() != n.saturating_sub(k) {
                return Err(Error::DimensionMismatch(format!("diagonal {k} has length {}", d.len())));
            }
        }
        Ok(Self { n, diags })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    #[inline]
    pub fn diag(&self, k: usize) -> &[T] {
        &self.diags[k]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = j - i;
        if k < self.diags.len() && j < self.n {
            self.diags[k][i]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.diags[j - i][i] = v;
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Leading `n × n` block.
    pub fn section(&self, n: usize) -> Self {
        assert!(n <= self.n);
        Self::from_fn(n, self.bandwidth(), |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<T> = self.diags[0].iter().zip(x).map(|(&a, &b)| a * b).collect();
        for (k, d) in self.diags.iter().enumerate().skip(1) {
            for (i, &a) in d.iter().enumerate() {
                y[i] += a * x[i + k];
                y[i + k] += a * x[i];
            }
        }
        y
    }

    /// `self + c · other`, bandwidths may differ.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let bw = self.bandwidth().max(other.bandwidth());
        Self::from_fn(self.n, bw, |i, j| self.get(i, j) + c * other.get(i, j))
    }

    pub fn scale(&self, c: T) -> Self {
        Self { n: self.n, diags: self.diags.iter().map(|d| d.iter().map(|&x| c * x).collect()).collect() }
    }

    pub fn shift(&self, c: T) -> Self {
        let mut out = self.clone();
        out.diags[0].iter_mut().for_each(|x| *x += c);
        out
    }

    pub fn max_abs(&self) -> T {
        self.diags.iter().flatten().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Copy restricted to diagonals `0..=bandwidth`.
    pub fn truncate_bandwidth(&self, bandwidth: usize) -> Self {
        Self { n: self.n, diags: self.diags.iter().take(bandwidth + 1).cloned().collect() }
    }
}

/// Upper triangular banded matrix: `diag(k)[i] = R[i, i + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedUpper<T> {
    n: usize,
    diags: Vec<Vec<T>>,
}

impl<T: Real> BandedUpper<T> {
    pub fn from_fn(n: usize, bandwidth: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let diags = (0..=bandwidth).map(|k| (0..n.saturating_sub(k)).map(|i| f(i, i + k)).collect()).collect();
        Self { n, diags }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    #[inline]
    pub fn diag(&self, k: usize) -> &[T] {
        &self.diags[k]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if j < i || j >= self.n || j - i >= self.diags.len() {
            T::zero()
        } else {
            self.diags[j - i][i]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn section(&self, n: usize) -> Self {
        assert!(n <= self.n);
        Self::from_fn(n, self.bandwidth(), |i, j| self.get(i, j))
    }

    /// `Rᵀ x` for `x` of length `size`.
    pub fn mul_t_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for (k, d) in self.diags.iter().enumerate() {
            for (i, &a) in d.iter().enumerate() {
                y[i + k] += a * x[i];
            }
        }
        y
    }

    /// `Rᵀ X` for a dense `X` with `size` rows.
    pub fn mul_t_dense(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.n, x.cols());
        for c in 0..x.cols() {
            let y = self.mul_t_vec(x.col(c));
            out.col_mut(c).copy_from_slice(&y);
        }
        out
    }
}

/// Leading `n × n` block of `R W Rᵀ` (or `R Rᵀ` when `weights` is `None`) computed from the
/// rows of `R` (which must have at least `n + bandwidth` columns).
pub fn rwrt_section<T: Real>(r: &BandedUpper<T>, weights: Option<&[T]>, n: usize) -> Result<BandedSymmetric<T>> {
    let w = r.bandwidth();
    if r.size() < n + w {
        return Err(Error::DimensionMismatch(format!("factor of size {} cannot give an exact {n} section", r.size())));
    }
    Ok(BandedSymmetric::from_fn(n, w, |i, j| {
        let mut s = T::zero();
        for k in j..=(i + w) {
            let dk = weights.map_or(T::one(), |d| d[k]);
            s += r.get(i, k) * dk * r.get(j, k);
        }
        s
    }))
}

/// Leading `n × n` block of the symmetric product `A B` of two commuting symmetric banded
/// operators; both inputs must have at least `n + min(bandwidths)` rows.
pub fn product_section<T: Real>(a: &BandedSymmetric<T>, b: &BandedSymmetric<T>, n: usize) -> Result<BandedSymmetric<T>> {
    let (wa, wb) = (a.bandwidth(), b.bandwidth());
    let need = n + wa.min(wb);
    if a.size() < need || b.size() < need {
        return Err(Error::DimensionMismatch(format!("operands too small for an exact {n} section")));
    }
    let kmax = a.size().min(b.size());
    Ok(BandedSymmetric::from_fn(n, wa + wb, |i, j| {
        let lo = j.saturating_sub(wb).max(i.saturating_sub(wa));
        let hi = (i + wa).min(j + wb).min(kmax - 1);
        let mut s = T::zero();
        for k in lo..=hi {
            s += a.get(i, k) * b.get(k, j);
        }
        s
    }))
}

/// Upper Cholesky factor `R` with `A = Rᵀ R`, same bandwidth as `A`.
pub fn banded_cholesky<T: Real>(a: &BandedSymmetric<T>) -> Result<BandedUpper<T>> {
    let n = a.size();
    let w = a.bandwidth();
    let mut diags: Vec<Vec<T>> = (0..=w).map(|k| vec![T::zero(); n.saturating_sub(k)]).collect();
    let get = |diags: &Vec<Vec<T>>, i: usize, j: usize| -> T {
        if j < i || j - i > w {
            T::zero()
        } else {
            diags[j - i][i]
        }
    };
    for i in 0..n {
        let mut d = a.get(i, i);
        for k in i.saturating_sub(w)..i {
            let r = get(&diags, k, i);
            d -= r * r;
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite { index: i, pivot: d.to_f64().unwrap_or(f64::NAN) });
        }
        let rii = d.sqrt();
        diags[0][i] = rii;
        for j in i + 1..(i + w + 1).min(n) {
            let mut s = a.get(i, j);
            for k in j.saturating_sub(w)..i {
                s -= get(&diags, k, i) * get(&diags, k, j);
            }
            diags[j - i][i] = s / rii;
        }
    }
    Ok(BandedUpper { n, diags })
}

/// Diagonals `0..=count` of `R⁻¹` by back substitution.
pub fn upper_inverse_diagonals<T: Real>(r: &BandedUpper<T>, count: usize) -> Vec<Vec<T>> {
    let n = r.size();
    let w = r.bandwidth();
    let mut x: Vec<Vec<T>> = Vec::with_capacity(count + 1);
    x.push(r.diag(0).iter().map(|&d| T::one() / d).collect());
    for d in 1..=count {
        let len = n.saturating_sub(d);
        let mut row = vec![T::zero(); len];
        for (i, xi) in row.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in i + 1..=(i + w.min(d)) {
                s += r.get(i, k) * x[d - (k - i)][k];
            }
            *xi = -s / r.get(i, i);
        }
        x.push(row);
    }
    x
}

/// Symmetrized leading `n × n` block of `R S R⁻¹` from its lower band; `rinv` holds the
/// diagonals `0..=bandwidth(S)` of `R⁻¹`. `R` and `S` need `n + bandwidth(R)` rows.
pub fn symmetrized_similarity<T: Real>(
    r: &BandedUpper<T>,
    s: &BandedSymmetric<T>,
    rinv: &[Vec<T>],
    n: usize,
) -> Result<BandedSymmetric<T>> {
    let wr = r.bandwidth();
    let ws = s.bandwidth();
    if r.size() < n + wr || s.size() < n + wr || rinv.len() <= ws {
        return Err(Error::DimensionMismatch("similarity needs larger sections".into()));
    }
    let xinv = |l: usize, j: usize| -> T {
        if l > j || j - l > ws {
            T::zero()
        } else {
            rinv[j - l][l]
        }
    };
    let lower = |i: usize, j: usize| -> T {
        let mut acc = T::zero();
        for k in i..=(i + wr) {
            let rik = r.get(i, k);
            if rik == T::zero() {
                continue;
            }
            let mut inner = T::zero();
            for l in k.saturating_sub(ws)..=j.min(k + ws) {
                inner += s.get(k, l) * xinv(l, j);
            }
            acc += rik * inner;
        }
        acc
    };
    Ok(BandedSymmetric::from_fn(n, ws, |i, j| lower(j, i)))
}
