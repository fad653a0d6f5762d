//! Connection coefficients as products of Givens rotations, with closed-form entries.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::special::JacobiParams;

/// Direction of application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Coefficients in the raised family to coefficients in the lowered family.
    Forward,
    /// Transpose of [`Direction::Forward`].
    Inverse,
}

/// Which Jacobi parameter is raised by two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobiStep {
    Alpha,
    Beta,
}

/// One elementary connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GivensFamily<T> {
    /// P̃^{m+2}_{m+2+k} expressed in P̃^m_{m+j}.
    Sphere { order: usize },
    /// P̂^{(α+2,β)} or P̂^{(α,β+2)} expressed in P̂^{(α,β)}.
    Jacobi { params: JacobiParams<T>, step: JacobiStep },
}

impl<T: Real> GivensFamily<T> {
    pub fn stride(&self) -> usize {
        match self {
            GivensFamily::Sphere { .. } => 2,
            GivensFamily::Jacobi { .. } => 1,
        }
    }

    /// Sine and cosine of rotation `k`.
    pub fn rotation(&self, k: usize) -> (T, T) {
        let kk = T::of(k);
        let one = T::one();
        let two = T::lit(2.0);
        match *self {
            GivensFamily::Sphere { order } => {
                let m = T::of(order);
                let d = (kk + two * m + T::lit(3.0)) * (kk + two * m + T::lit(4.0));
                let s = ((kk + one) * (kk + two) / d).sqrt();
                let c = ((two * m + two) * (two * kk + two * m + T::lit(5.0)) / d).sqrt();
                (s, c)
            }
            GivensFamily::Jacobi { params, step } => {
                let (a, b, sign) = match step {
                    JacobiStep::Alpha => (params.alpha, params.beta, one),
                    JacobiStep::Beta => (params.beta, params.alpha, -one),
                };
                let s_ab = a + b;
                let d = (kk + a + two) * (kk + s_ab + two);
                let s = ((kk + one) * (kk + b + one) / d).sqrt();
                let c = ((a + one) * (two * kk + s_ab + T::lit(3.0)) / d).sqrt();
                (sign * s, c)
            }
        }
    }
}

/// Product of rotations G_0 G_1 ⋯ G_{r−1} applied to the rectangular identity.
#[derive(Clone, Debug)]
pub struct GivensSequence<T> {
    family: GivensFamily<T>,
    cols: usize,
    count: usize,
    cache: Option<Vec<(T, T)>>,
}

impl<T: Real> GivensSequence<T> {
    /// Full connection: `cols` rotations, `(cols + stride) × cols`.
    pub fn new(family: GivensFamily<T>, cols: usize) -> Self {
        Self { family, cols, count: cols, cache: None }
    }

    /// Product of only the first `count` rotations (rotation `k` needs row `k + stride`).
    pub fn with_rotation_count(family: GivensFamily<T>, cols: usize, count: usize) -> Result<Self> {
        if count > cols {
            return Err(Error::InvalidParameter(format!("{count} rotations for {cols} columns")));
        }
        Ok(Self { family, cols, count, cache: None })
    }

    /// Precomputes every (s, c) pair.
    pub fn cached(mut self) -> Self {
        self.cache = Some((0..self.count).map(|k| self.family.rotation(k)).collect());
        self
    }

    pub fn family(&self) -> &GivensFamily<T> {
        &self.family
    }

    pub fn stride(&self) -> usize {
        self.family.stride()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.cols + self.stride()
    }

    pub fn rotation_count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn rotation(&self, k: usize) -> (T, T) {
        match &self.cache {
            Some(c) => c[k],
            None => self.family.rotation(k),
        }
    }

    /// Applies the forward product in place to a buffer of length `rows` whose
    /// trailing `stride` entries are zero on input.
    pub fn forward_in_place(&self, buf: &mut [T]) {
        let st = self.stride();
        debug_assert!(buf.len() >= self.rows());
        for k in (0..self.count).rev() {
            let (s, c) = self.rotation(k);
            let (x, y) = (buf[k], buf[k + st]);
            buf[k] = c * x + s * y;
            buf[k + st] = c * y - s * x;
        }
    }

    /// Applies the transpose in place to a buffer of length `rows`.
    pub fn inverse_in_place(&self, buf: &mut [T]) {
        let st = self.stride();
        debug_assert!(buf.len() >= self.rows());
        for k in 0..self.count {
            let (s, c) = self.rotation(k);
            let (x, y) = (buf[k], buf[k + st]);
            buf[k] = c * x - s * y;
            buf[k + st] = s * x + c * y;
        }
    }

    pub fn apply(&self, v: &[T], dir: Direction) -> Result<Vec<T>> {
        match dir {
            Direction::Forward => {
                if v.len() != self.cols {
                    return Err(Error::DimensionMismatch(format!("expected {} entries, got {}", self.cols, v.len())));
                }
                let mut buf = v.to_vec();
                buf.resize(self.rows(), T::zero());
                self.forward_in_place(&mut buf);
                Ok(buf)
            }
            Direction::Inverse => {
                if v.len() != self.rows() {
                    return Err(Error::DimensionMismatch(format!("expected {} entries, got {}", self.rows(), v.len())));
                }
                let mut buf = v.to_vec();
                self.inverse_in_place(&mut buf);
                buf.truncate(self.cols);
                Ok(buf)
            }
        }
    }

    /// Dense `rows × cols` connection block.
    pub fn dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.rows(), self.cols);
        let mut buf = vec![T::zero(); self.rows()];
        for j in 0..self.cols {
            buf.iter_mut().for_each(|x| *x = T::zero());
            buf[j] = T::one();
            self.forward_in_place(&mut buf);
            out.col_mut(j).copy_from_slice(&buf);
        }
        out
    }
}

/// Rotations connecting order `order + 2` to order `order` on the sphere.
pub fn sh_givens_sequence<T: Real>(order: usize, cols: usize) -> GivensSequence<T> {
    GivensSequence::new(GivensFamily::Sphere { order }, cols)
}

/// Rotations connecting (α+2, β) or (α, β+2) to (α, β).
pub fn jacobi_givens_sequence<T: Real>(params: JacobiParams<T>, step: JacobiStep, cols: usize) -> GivensSequence<T> {
    GivensSequence::new(GivensFamily::Jacobi { params, step }, cols)
}

/// Closed-form entry of the order `order + 2 → order` connection on the sphere.
pub fn sh_connection_entry<T: Real>(order: usize, l: usize, n: usize) -> T {
    if l > n + 2 || (l + n) % 2 == 1 {
        return T::zero();
    }
    if l == n + 2 {
        return -GivensFamily::<T>::Sphere { order }.rotation(n).0;
    }
    let m = T::of(order);
    let (lf, nf) = (T::of(l), T::of(n));
    let one = T::one();
    let two = T::lit(2.0);
    let mut v = two * (two * lf + two * m + one) * (two * m + two) * (two * m + two) * (nf + m + T::lit(2.5))
        / ((nf + two * m + one) * (nf + two * m + two) * (nf + two * m + T::lit(3.0)) * (nf + two * m + T::lit(4.0)));
    for j in l + 1..=n {
        let jf = T::of(j);
        v *= jf / (jf + two * m);
    }
    v.sqrt()
}

/// Dense closed-form connection block, `rows × cols`.
pub fn sh_connection_dense<T: Real>(order: usize, rows: usize, cols: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |l, n| sh_connection_entry(order, l, n))
}

/// Closed-form entry of the Jacobi one-step connection.
pub fn jacobi_connection_entry<T: Real>(params: &JacobiParams<T>, step: JacobiStep, l: usize, n: usize) -> T {
    if l > n + 1 {
        return T::zero();
    }
    let (a, b) = match step {
        JacobiStep::Alpha => (params.alpha, params.beta),
        JacobiStep::Beta => (params.beta, params.alpha),
    };
    if l == n + 1 {
        let p = JacobiParams { alpha: a, beta: b };
        let s = GivensFamily::Jacobi { params: p, step: JacobiStep::Alpha }.rotation(n).0;
        return if step == JacobiStep::Alpha { -s } else { s };
    }
    let one = T::one();
    let two = T::lit(2.0);
    let s = a + b;
    let (lf, nf) = (T::of(l), T::of(n));
    let q = if l == 0 { one } else { (two * lf + s + one) / (lf + s + one) };
    let mut v = q * (two * nf + s + T::lit(3.0)) / ((nf + s + two) * (nf + a + one) * (nf + a + two));
    for j in l..n {
        let jf = T::of(j);
        v *= (jf + b + one) * (jf + one) / ((jf + a + one) * (jf + s + two));
    }
    let flip = if step == JacobiStep::Beta && (n - l) % 2 == 1 { -one } else { one };
    flip * (a + one) * v.sqrt()
}

/// Dense closed-form Jacobi connection block, `rows × cols`.
pub fn jacobi_connection_dense<T: Real>(params: &JacobiParams<T>, step: JacobiStep, rows: usize, cols: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |l, n| jacobi_connection_entry(params, step, l, n))
}

/// Exact squared sine and cosine of sphere rotation `k` (order `m`).
pub fn sh_rotation_squares_exact(m: i128, k: i128) -> (Ratio<i128>, Ratio<i128>) {
    let d = (k + 2 * m + 3) * (k + 2 * m + 4);
    (Ratio::new((k + 1) * (k + 2), d), Ratio::new((2 * m + 2) * (2 * k + 2 * m + 5), d))
}

/// Exact squared sine and cosine of an α-step rotation with integer (α, β).
pub fn jacobi_rotation_squares_exact(alpha: i128, beta: i128, k: i128) -> (Ratio<i128>, Ratio<i128>) {
    let s = alpha + beta;
    let d = (k + alpha + 2) * (k + s + 2);
    (Ratio::new((k + 1) * (k + beta + 1), d), Ratio::new((alpha + 1) * (2 * k + s + 3), d))
}
