//! Symmetric-definite banded pencils whose eigenvectors are connection coefficients, and
//! their solution.

use crate::banded::{
    check_similarity, jac_cholesky, jac_diagonal, jac_rsrinv, jac_s_reduced, rwrt_section, sh_cholesky, sh_diagonal,
    symmetrized_similarity, weight_factor, BandedSymmetric, BandedUpper, JacobiJump,
};
use crate::dc::{eigen_pencil, DcOptions, DcTree, SymTridiagonal};
use crate::error::{Error, Result};
use crate::givens::{GivensFamily, GivensSequence, JacobiStep};
use crate::linalg::{sym_def_gevp_dense, DenseMatrix};
use crate::scalar::Real;
use crate::special::JacobiParams;

/// Residual above which a layer decomposition is rejected.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

/// Banded pencil `A v = λ B v` with `B` positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct SymDefPencil<T> {
    pub a: BandedSymmetric<T>,
    pub b: BandedSymmetric<T>,
}

impl<T: Real> SymDefPencil<T> {
    pub fn new(a: BandedSymmetric<T>, b: BandedSymmetric<T>) -> Result<Self> {
        if a.size() != b.size() {
            return Err(Error::DimensionMismatch(format!("pencil of sizes {} and {}", a.size(), b.size())));
        }
        Ok(Self { a, b })
    }

    pub fn size(&self) -> usize {
        self.a.size()
    }

    pub fn bandwidth(&self) -> usize {
        self.a.bandwidth().max(self.b.bandwidth())
    }

    /// Pentadiagonal pencil with vanishing odd diagonals.
    pub fn is_parity_split(&self) -> bool {
        let zero = |m: &BandedSymmetric<T>| m.bandwidth() < 1 || m.diag(1).iter().all(|&x| x == T::zero());
        self.bandwidth() == 2 && zero(&self.a) && zero(&self.b)
    }
}

fn tridiagonal<T: Real>(m: &BandedSymmetric<T>) -> Result<SymTridiagonal<T>> {
    let off = if m.bandwidth() >= 1 { m.diag(1).to_vec() } else { vec![T::zero(); m.size().saturating_sub(1)] };
    SymTridiagonal::new(m.diag(0).to_vec(), off)
}

/// Index order `[0, 2, 4, …, 1, 3, 5, …]`.
pub fn perfect_shuffle(n: usize) -> Vec<usize> {
    (0..n).step_by(2).chain((1..n).step_by(2)).collect()
}

/// Inverse of [`perfect_shuffle`]: position of index `i` in the shuffled order.
pub fn perfect_unshuffle(n: usize) -> Vec<usize> {
    let mut inv = vec![0; n];
    for (pos, &i) in perfect_shuffle(n).iter().enumerate() {
        inv[i] = pos;
    }
    inv
}

/// Splits a parity-split pentadiagonal pencil into its even and odd tridiagonal pencils.
pub fn shuffle_pencil<T: Real>(p: &SymDefPencil<T>) -> Result<[(SymTridiagonal<T>, SymTridiagonal<T>); 2]> {
    if !p.is_parity_split() {
        return Err(Error::InvalidParameter("pencil does not decouple by parity".into()));
    }
    let part = |m: &BandedSymmetric<T>, start: usize| {
        let diag: Vec<T> = m.diag(0).iter().skip(start).step_by(2).copied().collect();
        let off: Vec<T> = m.diag(2).iter().skip(start).step_by(2).copied().take(diag.len().saturating_sub(1)).collect();
        SymTridiagonal::new(diag, off)
    };
    Ok([(part(&p.a, 0)?, part(&p.b, 0)?), (part(&p.a, 1)?, part(&p.b, 1)?)])
}

/// Tridiagonal symmetric-definite pencil by divide and conquer.
pub fn sd_tridiag_gevp<T: Real>(t: &SymTridiagonal<T>, s: &SymTridiagonal<T>, opts: &DcOptions<T>) -> Result<DcTree<T>> {
    eigen_pencil(t, s, opts)
}

/// Dense reference solver: Cholesky reduction and cyclic Jacobi.
pub fn dense_reference_gevp<T: Real>(p: &SymDefPencil<T>) -> Result<(Vec<T>, DenseMatrix<T>)> {
    sym_def_gevp_dense(&p.a.to_dense(), &p.b.to_dense())
}

/// Which solver a pencil is routed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    Tridiagonal,
    Shuffled,
    Dense,
}

/// Ascending eigenvalues and `B`-orthonormal eigenvectors of the pencil, keeping the
/// lowest `count` pairs.
pub fn solve_pencil<T: Real>(p: &SymDefPencil<T>, count: usize, opts: &DcOptions<T>) -> Result<(Vec<T>, DenseMatrix<T>, SolverPath)> {
    let n = p.size();
    if count > n {
        return Err(Error::DimensionMismatch(format!("{count} eigenpairs of a pencil of size {n}")));
    }
    let keep = |vals: Vec<T>, vecs: DenseMatrix<T>| {
        let v = DenseMatrix::from_fn(n, count, |i, j| vecs[(i, j)]);
        (vals.into_iter().take(count).collect::<Vec<_>>(), v)
    };
    if p.bandwidth() <= 1 {
        let tree = sd_tridiag_gevp(&tridiagonal(&p.a)?, &tridiagonal(&p.b)?, opts)?;
        let (v, m) = keep(tree.eigenvalues().to_vec(), tree.to_dense());
        return Ok((v, m, SolverPath::Tridiagonal));
    }
    if p.is_parity_split() && n >= 2 {
        let [(te, se), (to, so)] = shuffle_pencil(p)?;
        let (even, odd) = rayon::join(|| sd_tridiag_gevp(&te, &se, opts), || sd_tridiag_gevp(&to, &so, opts));
        let (even, odd) = (even?, odd?);
        let (ve, vo) = (even.to_dense(), odd.to_dense());
        let mut pairs: Vec<(T, usize, usize)> = even
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(j, &l)| (l, 0, j))
            .chain(odd.eigenvalues().iter().enumerate().map(|(j, &l)| (l, 1, j)))
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        pairs.truncate(count);
        let mut v = DenseMatrix::zeros(n, count);
        for (c, &(_, parity, j)) in pairs.iter().enumerate() {
            let src = if parity == 0 { &ve } else { &vo };
            let col = v.col_mut(c);
            for (r, &x) in src.col(j).iter().enumerate() {
                col[2 * r + parity] = x;
            }
        }
        return Ok((pairs.iter().map(|p| p.0).collect(), v, SolverPath::Shuffled));
    }
    let (vals, vecs) = dense_reference_gevp(p)?;
    let (v, m) = keep(vals, vecs);
    Ok((v, m, SolverPath::Dense))
}

/// A connection from a source family down to a target family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Connection<T> {
    /// Associated Legendre functions of order `source` expanded in order `target`.
    Sphere { target: usize, source: usize },
    /// Orthonormal Jacobi polynomials with raised parameters expanded in the target family.
    Jacobi(JacobiJump<T>),
}

impl<T: Real> Connection<T> {
    pub fn sphere(target: usize, source: usize) -> Result<Self> {
        if source <= target || (source - target) % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "order jump {target} <- {source} must be a positive even number"
            )));
        }
        Ok(Connection::Sphere { target, source })
    }

    pub fn jacobi(target: JacobiParams<T>, source: JacobiParams<T>) -> Result<Self> {
        Ok(Connection::Jacobi(JacobiJump::new(target, source)?))
    }

    /// Number of extra rows the connection adds.
    pub fn step(&self) -> usize {
        match self {
            Connection::Sphere { target, source } => source - target,
            Connection::Jacobi(j) => {
                let (a, b) = j.steps();
                a + b
            }
        }
    }

    /// Number of elementary Givens sequences in the factorization.
    pub fn elementary_steps(&self) -> usize {
        match self {
            Connection::Sphere { target, source } => (source - target) / 2,
            Connection::Jacobi(j) => {
                let (a, b) = j.steps();
                a + b
            }
        }
    }

    /// Pencil eigenvalue belonging to source function `n`.
    pub fn eigenvalue(&self, n: usize) -> T {
        match self {
            Connection::Sphere { source, .. } => T::of((source + n) * (source + n + 1)),
            Connection::Jacobi(j) => {
                let nn = T::of(n);
                nn * (nn + j.source.sum() + T::one())
            }
        }
    }

    /// The elementary Givens sequences applied, in order, to a vector of `cols` source coefficients.
    pub fn givens_sequences(&self, cols: usize) -> Vec<GivensSequence<T>> {
        let mut seqs = Vec::new();
        let mut width = cols;
        match *self {
            Connection::Sphere { target, source } => {
                let mut order = source;
                while order > target {
                    order -= 2;
                    let s = GivensSequence::new(GivensFamily::Sphere { order }, width);
                    width = s.rows();
                    seqs.push(s);
                }
            }
            Connection::Jacobi(j) => {
                let (ka, kb) = j.steps();
                let two = T::lit(2.0);
                let mut a = j.source.alpha;
                let b = j.source.beta;
                for _ in 0..ka {
                    a -= two;
                    let params = JacobiParams { alpha: a, beta: b };
                    let s = GivensSequence::new(GivensFamily::Jacobi { params, step: JacobiStep::Alpha }, width);
                    width = s.rows();
                    seqs.push(s);
                }
                let mut b = b;
                for _ in 0..kb {
                    b -= two;
                    let params = JacobiParams { alpha: j.target.alpha, beta: b };
                    let s = GivensSequence::new(GivensFamily::Jacobi { params, step: JacobiStep::Beta }, width);
                    width = s.rows();
                    seqs.push(s);
                }
            }
        }
        seqs
    }

    /// Dense `(cols + step) × cols` connection as a product of Givens rotations.
    pub fn givens_product(&self, cols: usize) -> DenseMatrix<T> {
        let seqs = self.givens_sequences(cols);
        let rows = cols + self.step();
        let mut out = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            let col = out.col_mut(j);
            col[j] = T::one();
            let mut width = cols;
            for s in &seqs {
                s.forward_in_place(&mut col[..width + s.stride()]);
                width += s.stride();
            }
        }
        out
    }

    /// Pencil of size `size` and the upper factor `R` (with at least `size` rows) such that
    /// the connection coefficients are `Rᵀ V`.
    pub fn pencil(&self, size: usize) -> Result<(SymDefPencil<T>, BandedUpper<T>)> {
        if size == 0 {
            return Err(Error::InvalidParameter("empty pencil".into()));
        }
        match *self {
            Connection::Sphere { target, source } => {
                let r = sh_cholesky::<T>(target, size + 2);
                let d = sh_diagonal::<T>(target, size + 2);
                let shift = T::of(source * source - target * target);
                let a = rwrt_section(&r, Some(&d), size)?.shift(shift);
                let b = rwrt_section(&r, None, size)?;
                Ok((SymDefPencil::new(a, b)?, r))
            }
            Connection::Jacobi(j) if j.one_sided().is_some() => {
                let k = size + 1;
                let (s, w) = jac_s_reduced(&j, k)?;
                let (r, rinv) = weight_factor(&w, s.bandwidth())?;
                let d = jac_diagonal(&j.target, k);
                let rdr = rwrt_section(&r, Some(&d), size)?;
                let x = symmetrized_similarity(&r, &s, &rinv, size)?;
                check_similarity(&r, &s, size, s.max_abs())?;
                let a = rdr.add_scaled(T::one(), &x);
                let b = rwrt_section(&r, None, size)?;
                Ok((SymDefPencil::new(a, b)?, r))
            }
            Connection::Jacobi(j) => {
                let r = jac_cholesky(&j.target, size + 2);
                let d = jac_diagonal(&j.target, size + 2);
                let a = rwrt_section(&r, Some(&d), size)?.add_scaled(T::one(), &jac_rsrinv(&j, size)?);
                let b = rwrt_section(&r, None, size)?;
                Ok((SymDefPencil::new(a, b)?, r))
            }
        }
    }
}

/// Connection coefficients of one section obtained from the pencil.
#[derive(Clone, Debug)]
pub struct LayerDecomposition<T> {
    /// Number of source functions.
    pub section: usize,
    /// Extra pencil rows beyond the section.
    pub buffer: usize,
    pub eigenvalues: Vec<T>,
    /// `(section + step) × section` connection block.
    pub u: DenseMatrix<T>,
    /// Largest entry discarded when trimming to `section + step` rows.
    pub trim_decay: T,
    /// Max-norm distance to the Givens product.
    pub residual: T,
    /// Largest deviation of the eigenvalues from their exact values, relative to magnitude.
    pub eigenvalue_error: T,
    pub path: SolverPath,
}

/// Default buffer for a section of size `n` and a connection adding `step` rows.
pub fn default_buffer(n: usize, step: usize) -> usize {
    step + 16.max(n / 4)
}

/// Solves the pencil of size `section + buffer` and extracts the first `section` connection
/// columns, validated against the Givens product.
pub fn layer_decomposition<T: Real>(
    conn: &Connection<T>,
    section: usize,
    buffer: usize,
    opts: &DcOptions<T>,
) -> Result<LayerDecomposition<T>> {
    if section == 0 {
        return Err(Error::InvalidParameter("empty section".into()));
    }
    let k = section + buffer;
    let step = conn.step();
    let (pencil, r) = conn.pencil(k)?;
    let (values, v, path) = solve_pencil(&pencil, section, opts)?;
    let rk = r.section(k);
    let full = rk.mul_t_dense(&v);
    let rows = (section + step).min(k);
    let mut u = DenseMatrix::from_fn(section + step, section, |i, j| if i < rows { full[(i, j)] } else { T::zero() });
    let mut trim_decay = T::zero();
    for j in 0..section {
        for i in rows..k {
            trim_decay = trim_decay.max(full[(i, j)].abs());
        }
    }
    let g = conn.givens_product(section);
    for j in 0..section {
        let col = u.col(j);
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if (col[best] < T::zero()) != (g[(best, j)] < T::zero()) {
            u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    let residual = u.sub(&g).max_abs();
    let eigenvalue_error = values
        .iter()
        .enumerate()
        .map(|(n, &l)| {
            let e = conn.eigenvalue(n);
            (l - e).abs() / e.abs().max(T::one())
        })
        .fold(T::zero(), T::max);
    let tol = T::lit(VALIDATION_TOLERANCE);
    if !(residual <= tol) {
        return Err(Error::BufferInsufficient {
            section,
            buffer,
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: VALIDATION_TOLERANCE,
        });
    }
    Ok(LayerDecomposition { section, buffer, eigenvalues: values, u, trim_decay, residual, eigenvalue_error, path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_round_trip() {
        let s = perfect_shuffle(7);
        assert_eq!(s, vec![0, 2, 4, 6, 1, 3, 5]);
        let inv = perfect_unshuffle(7);
        for (pos, &i) in s.iter().enumerate() {
            assert_eq!(inv[i], pos);
        }
    }

    #[test]
    fn sphere_layer_matches_givens() {
        let opts = DcOptions::default();
        for (m, mu, n) in [(0usize, 2usize, 40usize), (3, 7, 60), (10, 12, 100)] {
            let c = Connection::<f64>::sphere(m, mu).unwrap();
            let d = layer_decomposition(&c, n, default_buffer(n, c.step()), &opts).unwrap();
            assert_eq!(d.path, SolverPath::Shuffled);
            assert!(d.residual < 1e-11, "{m} {mu} {}", d.residual);
            assert!(d.eigenvalue_error < 1e-12);
        }
    }

    #[test]
    fn jacobi_layers_match_givens() {
        let opts = DcOptions::default();
        let p = |a: f64, b: f64| JacobiParams::new(a, b).unwrap();
        let cases = [
            (p(0.0, 0.0), p(2.0, 0.0), SolverPath::Tridiagonal),
            (p(0.5, 1.5), p(0.5, 5.5), SolverPath::Tridiagonal),
            (p(1.0, 1.0), p(3.0, 3.0), SolverPath::Shuffled),
            (p(0.0, 1.0), p(2.0, 3.0), SolverPath::Dense),
        ];
        for (t, s, path) in cases {
            let c = Connection::jacobi(t, s).unwrap();
            let d = layer_decomposition(&c, 50, 16, &opts).unwrap();
            assert_eq!(d.path, path);
            assert!(d.residual < 1e-11, "{t:?} {s:?} {}", d.residual);
            assert!(d.eigenvalue_error < 1e-12, "{}", d.eigenvalue_error);
        }
    }

    #[test]
    fn invalid_connections() {
        assert!(Connection::<f64>::sphere(2, 2).is_err());
        assert!(Connection::<f64>::sphere(2, 5).is_err());
        assert!(Connection::<f64>::sphere(5, 3).is_err());
    }
}
