use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::special::GeometryKind;

/// Column layout of a coefficient matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    /// `(n+1) × (2n+1)`: column 0 is m = 0, column 2k−1 is m = −k, column 2k is m = k; row ℓ.
    Sphere,
    /// As [`Layout::Sphere`], with rows ℓ ≡ m (mod 2).
    Disk,
    /// `(n+1) × (n+1)`: column m, row ℓ ≥ m.
    Triangle,
}

/// Whether a block holds layer coefficients or their base-order images.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Native,
    Base,
}

impl Layout {
    pub fn of<T>(kind: &GeometryKind<T>) -> Self {
        match kind {
            GeometryKind::Sphere => Layout::Sphere,
            GeometryKind::Disk => Layout::Disk,
            GeometryKind::Triangle { .. } => Layout::Triangle,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Layout::Sphere => 0,
            Layout::Disk => 1,
            Layout::Triangle => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Layout::Sphere),
            1 => Ok(Layout::Disk),
            2 => Ok(Layout::Triangle),
            t => Err(Error::Corrupt(format!("unknown geometry tag {t}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::Sphere => "sphere",
            Layout::Disk => "disk",
            Layout::Triangle => "triangle",
        }
    }

    pub fn columns(self, n: usize) -> usize {
        match self {
            Layout::Triangle => n + 1,
            _ => 2 * n + 1,
        }
    }

    /// Signed order stored in column `col`.
    pub fn column_order(self, col: usize) -> i64 {
        match self {
            Layout::Triangle => col as i64,
            _ if col == 0 => 0,
            _ if col % 2 == 1 => -(col.div_ceil(2) as i64),
            _ => (col / 2) as i64,
        }
    }

    pub fn column_of(self, m: i64) -> usize {
        match self {
            Layout::Triangle => m as usize,
            _ if m == 0 => 0,
            _ if m < 0 => 2 * m.unsigned_abs() as usize - 1,
            _ => 2 * m as usize,
        }
    }

    /// Row spacing between consecutive basis functions of one layer.
    pub fn rowstride(self) -> usize {
        match self {
            Layout::Disk => 2,
            _ => 1,
        }
    }

    /// Number of coefficients of the layer of order `order` at degree `n`.
    pub fn layer_len(self, n: usize, order: usize) -> usize {
        if order > n {
            return 0;
        }
        (n - order) / self.rowstride() + 1
    }

    /// Base order reached from layer `order`.
    pub fn base_order(self, order: usize) -> usize {
        match self {
            Layout::Triangle => 0,
            _ => order % 2,
        }
    }

    /// Whether entry (ℓ, m) can be nonzero.
    pub fn supported(self, rep: Representation, n: usize, l: usize, m: i64) -> bool {
        let order = m.unsigned_abs() as usize;
        let start = match rep {
            Representation::Native => order,
            Representation::Base => self.base_order(order),
        };
        l <= n && l >= start && (l - start) % self.rowstride() == 0
    }
}

/// Coefficients of a degree-`n` expansion arranged by layer.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientBlock<T> {
    layout: Layout,
    degree: usize,
    data: DenseMatrix<T>,
}

impl<T: Real> CoefficientBlock<T> {
    pub fn zeros(layout: Layout, degree: usize) -> Self {
        Self { layout, degree, data: DenseMatrix::zeros(degree + 1, layout.columns(degree)) }
    }

    /// Fills supported entries with `f(ℓ, m)`; all others are zero.
    pub fn from_fn(layout: Layout, degree: usize, rep: Representation, mut f: impl FnMut(usize, i64) -> T) -> Self {
        let data = DenseMatrix::from_fn(degree + 1, layout.columns(degree), |l, c| {
            let m = layout.column_order(c);
            if layout.supported(rep, degree, l, m) {
                f(l, m)
            } else {
                T::zero()
            }
        });
        Self { layout, degree, data }
    }

    pub fn from_matrix(layout: Layout, degree: usize, data: DenseMatrix<T>) -> Result<Self> {
        if data.rows() != degree + 1 || data.cols() != layout.columns(degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients of degree {degree} need a {}x{} matrix, got {}x{}",
                layout.name(),
                degree + 1,
                layout.columns(degree),
                data.rows(),
                data.cols()
            )));
        }
        Ok(Self { layout, degree, data })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.data
    }

    pub fn get(&self, l: usize, m: i64) -> T {
        self.data[(l, self.layout.column_of(m))]
    }

    /// Errors if any unsupported entry is nonzero.
    pub fn check_support(&self, rep: Representation) -> Result<()> {
        for c in 0..self.data.cols() {
            let m = self.layout.column_order(c);
            for (l, &v) in self.data.col(c).iter().enumerate() {
                if v != T::zero() && !self.layout.supported(rep, self.degree, l, m) {
                    return Err(Error::DataMismatch(format!("nonzero coefficient outside the support at (l = {l}, m = {m})")));
                }
            }
        }
        Ok(())
    }

    /// Coefficients of column `col` starting at row `start` with the layout's rowstride.
    pub(crate) fn read_layer(&self, col: usize, start: usize) -> Vec<T> {
        self.data.col(col).iter().skip(start).step_by(self.layout.rowstride()).copied().collect()
    }

    pub(crate) fn write_layer(&mut self, col: usize, start: usize, values: &[T]) {
        let stride = self.layout.rowstride();
        let dst = self.data.col_mut(col);
        for (k, &v) in values.iter().enumerate() {
            dst[start + stride * k] = v;
        }
    }

    pub fn frobenius(&self) -> T {
        self.data.frobenius()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.sub(&other.data).max_abs()
    }
}
