//! Divide-and-conquer eigensolvers for symmetric tridiagonal matrices and tridiagonal
//! symmetric-definite pencils.
//!
//! The eigenvector matrix is never formed during the solve. It is kept as a tree of
//! arrowhead factors that can be applied in either direction or materialized on demand.

mod arrowhead;
mod kernel;

use std::sync::Arc;

pub use arrowhead::{reconstruct, solve_secular, Arrowhead, ArrowheadDecomposition, BackwardError};
pub use kernel::{Anchored, DirectSum, KernelSum};

use crate::error::{Error, Result};
use crate::linalg::{sym_def_gevp_dense, sym_eigen_jacobi, DenseMatrix};
use crate::scalar::{CompensatedSum, Real};

const PARALLEL_THRESHOLD: usize = 192;

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch(format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => T::zero(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.size(), self.size(), |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.diag.iter().chain(&self.off).fold(T::zero(), |m, x| m.max(x.abs()))
    }

    fn slice(&self, start: usize, end: usize) -> Self {
        Self { diag: self.diag[start..end].to_vec(), off: self.off[start..end - 1].to_vec() }
    }
}

/// The two halves of a tridiagonal matrix split around one row and column.
#[derive(Clone, Debug, PartialEq)]
pub struct Divided<T> {
    pub left: SymTridiagonal<T>,
    pub right: SymTridiagonal<T>,
    pub tip: T,
    pub left_coupling: T,
    pub right_coupling: T,
}

/// Splits around index `split` (1 ≤ split ≤ n − 2). Permuting row and column `split` to the
/// end gives `[[T1, 0, c1 e_last], [0, T2, c2 e_1], [.., .., tip]]`.
pub fn divide<T: Real>(t: &SymTridiagonal<T>, split: usize) -> Result<Divided<T>> {
    let n = t.size();
    if split == 0 || split + 1 >= n {
        return Err(Error::InvalidParameter(format!("split {split} outside 1..={}", n.saturating_sub(2))));
    }
    Ok(Divided {
        left: t.slice(0, split),
        right: t.slice(split + 1, n),
        tip: t.diag[split],
        left_coupling: t.off[split - 1],
        right_coupling: t.off[split],
    })
}

/// Solver settings.
#[derive(Clone)]
pub struct DcOptions<T> {
    /// Subproblems at or below this size are solved densely.
    pub leaf_size: usize,
    pub kernel: Arc<dyn KernelSum<T>>,
}

impl<T: Real> Default for DcOptions<T> {
    fn default() -> Self {
        Self { leaf_size: 32, kernel: Arc::new(DirectSum) }
    }
}

impl<T> std::fmt::Debug for DcOptions<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DcOptions").field("leaf_size", &self.leaf_size).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
struct Coupling<T> {
    z: Vec<T>,
    rho: T,
}

#[derive(Clone, Debug)]
enum Node<T> {
    Leaf {
        values: Vec<T>,
        vectors: DenseMatrix<T>,
    },
    Merge {
        split: usize,
        left: Box<Node<T>>,
        right: Box<Node<T>>,
        coupling: Option<Coupling<T>>,
        arrow: ArrowheadDecomposition<T>,
    },
}

impl<T: Real> Node<T> {
    fn size(&self) -> usize {
        match self {
            Node::Leaf { values, .. } => values.len(),
            Node::Merge { arrow, .. } => arrow.size(),
        }
    }

    fn eigenvalues(&self) -> &[T] {
        match self {
            Node::Leaf { values, .. } => values,
            Node::Merge { arrow, .. } => arrow.eigenvalues(),
        }
    }

    fn apply(&self, x: &[T], kernel: &dyn KernelSum<T>) -> Vec<T> {
        match self {
            Node::Leaf { vectors, .. } => vectors.mul_vec(x),
            Node::Merge { split, left, right, coupling, arrow } => {
                let mut a = arrow.apply_q(x, kernel);
                let n = a.len();
                if let Some(c) = coupling {
                    let tip = a[n - 1];
                    for (v, &z) in a[..n - 1].iter_mut().zip(&c.z) {
                        *v -= z * tip / c.rho;
                    }
                    a[n - 1] = tip / c.rho;
                }
                let (yl, yr) = maybe_join(
                    n,
                    || left.apply(&a[..*split], kernel),
                    || right.apply(&a[*split..n - 1], kernel),
                );
                let mut y = yl;
                y.push(a[n - 1]);
                y.extend(yr);
                y
            }
        }
    }

    fn apply_t(&self, y: &[T], kernel: &dyn KernelSum<T>) -> Vec<T> {
        match self {
            Node::Leaf { vectors, .. } => vectors.mul_t_vec(y),
            Node::Merge { split, left, right, coupling, arrow } => {
                let n = y.len();
                let (al, ar) = maybe_join(
                    n,
                    || left.apply_t(&y[..*split], kernel),
                    || right.apply_t(&y[*split + 1..], kernel),
                );
                let mut a = al;
                a.extend(ar);
                let mut tip = y[*split];
                if let Some(c) = coupling {
                    let mut s = CompensatedSum::new();
                    s.add(tip);
                    for (&v, &z) in a.iter().zip(&c.z) {
                        s.add(-z * v);
                    }
                    tip = s.value() / c.rho;
                }
                a.push(tip);
                arrow.apply_qt(&a, kernel)
            }
        }
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        match self {
            Node::Leaf { vectors, .. } => vectors.clone(),
            Node::Merge { split, left, right, coupling, arrow } => {
                let n = arrow.size();
                let mut a = arrow.to_dense();
                if let Some(c) = coupling {
                    for j in 0..n {
                        let col = a.col_mut(j);
                        let tip = col[n - 1];
                        for (v, &z) in col[..n - 1].iter_mut().zip(&c.z) {
                            *v -= z * tip / c.rho;
                        }
                        col[n - 1] = tip / c.rho;
                    }
                }
                let s = *split;
                let top = DenseMatrix::from_fn(s, n, |i, j| a[(i, j)]);
                let bottom = DenseMatrix::from_fn(n - 1 - s, n, |i, j| a[(s + i, j)]);
                let (ql, qr) = maybe_join(n, || left.to_dense(), || right.to_dense());
                let (pl, pr) = maybe_join(n, || ql.matmul(&top), || qr.matmul(&bottom));
                DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&s) {
                    std::cmp::Ordering::Less => pl[(i, j)],
                    std::cmp::Ordering::Equal => a[(n - 1, j)],
                    std::cmp::Ordering::Greater => pr[(i - s - 1, j)],
                })
            }
        }
    }

    fn fold_backward(&self, acc: &mut (BackwardError<T>, T)) {
        if let Node::Merge { left, right, arrow, .. } = self {
            let b = arrow.backward_error();
            acc.0 = acc.0.max(b);
            let s = arrow.scale();
            if s > T::zero() {
                acc.1 = acc.1.max(b.total() / s);
            }
            left.fold_backward(acc);
            right.fold_backward(acc);
        }
    }

    fn count(&self, merges: &mut usize, deflations: &mut usize, depth: usize, max_depth: &mut usize) {
        *max_depth = (*max_depth).max(depth);
        if let Node::Merge { left, right, arrow, .. } = self {
            *merges += 1;
            *deflations += arrow.deflation_count();
            left.count(merges, deflations, depth + 1, max_depth);
            right.count(merges, deflations, depth + 1, max_depth);
        }
    }
}

fn maybe_join<A: Send, B: Send>(
    n: usize,
    a: impl FnOnce() -> A + Send,
    b: impl FnOnce() -> B + Send,
) -> (A, B) {
    if n >= PARALLEL_THRESHOLD {
        rayon::join(a, b)
    } else {
        (a(), b())
    }
}

fn unit<T: Real>(n: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[i] = T::one();
    e
}

fn build_eigen<T: Real>(t: &SymTridiagonal<T>, opts: &DcOptions<T>) -> Result<Node<T>> {
    let n = t.size();
    if n <= opts.leaf_size.max(3) {
        let (values, vectors) = sym_eigen_jacobi(&t.to_dense());
        return Ok(Node::Leaf { values, vectors });
    }
    let split = n / 2;
    let d = divide(t, split)?;
    let (left, right) = maybe_join(n, || build_eigen(&d.left, opts), || build_eigen(&d.right, opts));
    let (left, right) = (left?, right?);
    let k = opts.kernel.as_ref();
    let mut spike: Vec<T> = left.apply_t(&unit(split, split - 1), k).into_iter().map(|v| v * d.left_coupling).collect();
    spike.extend(right.apply_t(&unit(n - split - 1, 0), k).into_iter().map(|v| v * d.right_coupling));
    let mut shaft = left.eigenvalues().to_vec();
    shaft.extend_from_slice(right.eigenvalues());
    let arrow = Arrowhead::new(shaft, spike, d.tip)?.decompose(k)?;
    Ok(Node::Merge { split, left: Box::new(left), right: Box::new(right), coupling: None, arrow })
}

fn build_pencil<T: Real>(
    t: &SymTridiagonal<T>,
    s: &SymTridiagonal<T>,
    offset: usize,
    opts: &DcOptions<T>,
) -> Result<Node<T>> {
    let n = t.size();
    if n <= opts.leaf_size.max(3) {
        let (values, vectors) = sym_def_gevp_dense(&t.to_dense(), &s.to_dense()).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, index } => {
                Error::IndefinitePencil { node: offset + index, value: pivot }
            }
            other => other,
        })?;
        return Ok(Node::Leaf { values, vectors });
    }
    let split = n / 2;
    let dt = divide(t, split)?;
    let ds = divide(s, split)?;
    let (left, right) = maybe_join(
        n,
        || build_pencil(&dt.left, &ds.left, offset, opts),
        || build_pencil(&dt.right, &ds.right, offset + split + 1, opts),
    );
    let (left, right) = (left?, right?);
    let k = opts.kernel.as_ref();
    let last = left.apply_t(&unit(split, split - 1), k);
    let first = right.apply_t(&unit(n - split - 1, 0), k);
    let w: Vec<T> = last
        .iter()
        .map(|&v| v * dt.left_coupling)
        .chain(first.iter().map(|&v| v * dt.right_coupling))
        .collect();
    let z: Vec<T> = last
        .iter()
        .map(|&v| v * ds.left_coupling)
        .chain(first.iter().map(|&v| v * ds.right_coupling))
        .collect();
    let mut shaft = left.eigenvalues().to_vec();
    shaft.extend_from_slice(right.eigenvalues());

    let mut rho2 = CompensatedSum::new();
    rho2.add(ds.tip);
    for &v in &z {
        rho2.add(-v * v);
    }
    let rho2 = rho2.value();
    if !(rho2 > T::zero()) {
        return Err(Error::IndefinitePencil { node: offset + split, value: rho2.to_f64().unwrap_or(f64::NAN) });
    }
    let rho = rho2.sqrt();
    let spike: Vec<T> = w.iter().zip(&z).zip(&shaft).map(|((&w, &z), &l)| (w - l * z) / rho).collect();
    let mut tip = CompensatedSum::new();
    tip.add(dt.tip);
    for ((&w, &z), &l) in w.iter().zip(&z).zip(&shaft) {
        tip.add(-T::lit(2.0) * w * z);
        tip.add(l * z * z);
    }
    let tip = tip.value() / rho2;
    let arrow = Arrowhead::new(shaft, spike, tip)?.decompose(k)?;
    Ok(Node::Merge {
        split,
        left: Box::new(left),
        right: Box::new(right),
        coupling: Some(Coupling { z, rho }),
        arrow,
    })
}

/// Structural statistics of a solved tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeStats {
    pub merges: usize,
    pub deflations: usize,
    pub depth: usize,
}

/// Eigenvalues and a structured eigenvector operator `V`.
///
/// For the standard problem `V` is orthogonal. For a pencil `(T, S)` it satisfies
/// `Vᵀ S V = I` and `Vᵀ T V = diag(λ)`.
#[derive(Clone)]
pub struct DcTree<T> {
    root: Node<T>,
    kernel: Arc<dyn KernelSum<T>>,
}

impl<T: Real> std::fmt::Debug for DcTree<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DcTree").field("size", &self.size()).finish_non_exhaustive()
    }
}

impl<T: Real> DcTree<T> {
    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        self.root.eigenvalues()
    }

    /// `V x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.root.apply(x, self.kernel.as_ref()))
    }

    /// `Vᵀ y`.
    pub fn apply_t(&self, y: &[T]) -> Result<Vec<T>> {
        self.check_len(y.len())?;
        Ok(self.root.apply_t(y, self.kernel.as_ref()))
    }

    /// Dense `V`, columns in ascending eigenvalue order.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        self.root.to_dense()
    }

    /// Componentwise maximum of the arrowhead backward errors, and the largest total
    /// relative to the arrowhead scale.
    pub fn backward_error(&self) -> (BackwardError<T>, T) {
        let mut acc = (BackwardError::default(), T::zero());
        self.root.fold_backward(&mut acc);
        acc
    }

    pub fn stats(&self) -> TreeStats {
        let mut s = TreeStats::default();
        self.root.count(&mut s.merges, &mut s.deflations, 0, &mut s.depth);
        s
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::DimensionMismatch(format!("vector of length {len}, tree of size {}", self.size())));
        }
        Ok(())
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix.
pub fn eigen<T: Real>(t: &SymTridiagonal<T>, opts: &DcOptions<T>) -> Result<DcTree<T>> {
    check_finite(t)?;
    Ok(DcTree { root: build_eigen(t, opts)?, kernel: opts.kernel.clone() })
}

/// Generalized eigen-decomposition of the tridiagonal pencil `(T, S)` with `S` positive definite.
pub fn eigen_pencil<T: Real>(t: &SymTridiagonal<T>, s: &SymTridiagonal<T>, opts: &DcOptions<T>) -> Result<DcTree<T>> {
    if t.size() != s.size() {
        return Err(Error::DimensionMismatch(format!("pencil of sizes {} and {}", t.size(), s.size())));
    }
    check_finite(t)?;
    check_finite(s)?;
    Ok(DcTree { root: build_pencil(t, s, 0, opts)?, kernel: opts.kernel.clone() })
}

fn check_finite<T: Real>(t: &SymTridiagonal<T>) -> Result<()> {
    if t.diag.iter().chain(&t.off).all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite matrix entry".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tridiagonal_eigenvalues_bisection;

    fn sample(n: usize, seed: f64) -> SymTridiagonal<f64> {
        let diag = (0..n).map(|i| ((i as f64 + seed) * 0.91).sin() * 3.0).collect();
        let off = (0..n - 1).map(|i| ((i as f64 + seed) * 1.7).cos()).collect();
        SymTridiagonal::new(diag, off).unwrap()
    }

    #[test]
    fn divide_rejects_edges() {
        let t = sample(6, 0.0);
        assert!(divide(&t, 0).is_err());
        assert!(divide(&t, 5).is_err());
        let d = divide(&t, 2).unwrap();
        assert_eq!(d.left.size() + d.right.size() + 1, 6);
        assert_eq!(d.tip, t.diag[2]);
    }

    #[test]
    fn eigen_matches_bisection() {
        let opts = DcOptions { leaf_size: 8, ..Default::default() };
        for n in [1usize, 2, 5, 40, 157] {
            let t = sample(n, 0.3);
            let tree = eigen(&t, &opts).unwrap();
            let reference = tridiagonal_eigenvalues_bisection(&t.diag, &t.off);
            let scale = t.max_abs() * 3.0;
            for (a, b) in tree.eigenvalues().iter().zip(&reference) {
                assert!((a - b).abs() < 1e-13 * scale, "n={n} {a} {b}");
            }
            let q = tree.to_dense();
            assert!(q.orthonormality_defect() < 1e-13);
            let tq = t.to_dense().matmul(&q);
            for j in 0..n {
                for i in 0..n {
                    assert!((tq[(i, j)] - q[(i, j)] * tree.eigenvalues()[j]).abs() < 1e-12 * scale);
                }
            }
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sqrt()).collect();
            let y = tree.apply(&x).unwrap();
            let yd = q.mul_vec(&x);
            let back = tree.apply_t(&y).unwrap();
            for i in 0..n {
                assert!((y[i] - yd[i]).abs() < 1e-12 * (n as f64));
                assert!((back[i] - x[i]).abs() < 1e-12 * (n as f64));
            }
        }
    }

    #[test]
    fn pencil_is_b_orthonormal() {
        let n = 90;
        let t = sample(n, 1.1);
        let s = SymTridiagonal::new(
            (0..n).map(|i| 3.0 + (i as f64 * 0.2).sin()).collect(),
            (0..n - 1).map(|i| 0.8 * (i as f64 * 0.5).cos()).collect(),
        )
        .unwrap();
        let tree = eigen_pencil(&t, &s, &DcOptions { leaf_size: 6, ..Default::default() }).unwrap();
        let v = tree.to_dense();
        let vsv = v.t_matmul(&s.to_dense().matmul(&v));
        let vtv = v.t_matmul(&t.to_dense().matmul(&v));
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((vsv[(i, j)] - id).abs() < 1e-11, "{i} {j} {}", vsv[(i, j)]);
                let lam = if i == j { tree.eigenvalues()[i] } else { 0.0 };
                assert!((vtv[(i, j)] - lam).abs() < 1e-11);
            }
        }
        let (dense_vals, _) = sym_def_gevp_dense(&t.to_dense(), &s.to_dense()).unwrap();
        for (a, b) in tree.eigenvalues().iter().zip(&dense_vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_pencil_is_reported() {
        let n = 20;
        let t = sample(n, 0.0);
        let mut sd = vec![1.0; n];
        sd[10] = -1.0;
        let s = SymTridiagonal::new(sd, vec![0.0; n - 1]).unwrap();
        let err = eigen_pencil(&t, &s, &DcOptions { leaf_size: 4, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::IndefinitePencil { node: 10, .. }), "{err:?}");
    }
}
