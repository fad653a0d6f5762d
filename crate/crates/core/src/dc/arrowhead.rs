//! Symmetric arrowhead eigenproblems with reconstructed spikes.

use std::cmp::Ordering;

use super::kernel::{Anchored, KernelSum};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{CompensatedSum, Real};

const MAX_SECULAR_ITERATIONS: usize = 300;

/// Arrowhead `[[diag(shaft), spike], [spikeᵀ, tip]]` with the tip in the last position.
#[derive(Clone, Debug, PartialEq)]
pub struct Arrowhead<T> {
    pub shaft: Vec<T>,
    pub spike: Vec<T>,
    pub tip: T,
}

impl<T: Real> Arrowhead<T> {
    pub fn new(shaft: Vec<T>, spike: Vec<T>, tip: T) -> Result<Self> {
        if shaft.len() != spike.len() {
            return Err(Error::DimensionMismatch(format!(
                "shaft has {} entries, spike has {}",
                shaft.len(),
                spike.len()
            )));
        }
        Ok(Self { shaft, spike, tip })
    }

    pub fn size(&self) -> usize {
        self.shaft.len() + 1
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.size();
        let t = n - 1;
        DenseMatrix::from_fn(n, n, |i, j| match (i == t, j == t) {
            (true, true) => self.tip,
            (true, false) => self.spike[j],
            (false, true) => self.spike[i],
            (false, false) if i == j => self.shaft[i],
            _ => T::zero(),
        })
    }

    /// max(|shaft|, |tip|) + ‖spike‖₂.
    pub fn scale(&self) -> T {
        let d = self.shaft.iter().fold(self.tip.abs(), |m, x| m.max(x.abs()));
        d + self.spike.iter().map(|&z| z * z).sum::<T>().sqrt()
    }

    pub fn decompose(&self, kernel: &dyn KernelSum<T>) -> Result<ArrowheadDecomposition<T>> {
        ArrowheadDecomposition::new(self, kernel)
    }

    /// Derivative `order` (0, 1 or 2) of the Pick function `f(λ) = λ − tip + Σ spikeᵢ² / (shaftᵢ − λ)` at `points`.
    pub fn pick_evaluate(&self, points: &[T], order: usize, kernel: &dyn KernelSum<T>) -> Result<Vec<T>> {
        if order > 2 {
            return Err(Error::InvalidParameter(format!("derivative order {order} exceeds 2")));
        }
        if let Some(x) = points.iter().find(|x| self.shaft.contains(x)) {
            return Err(Error::InvalidParameter(format!("Pick function evaluated at the pole {x:?}")));
        }
        let weights: Vec<T> = self.spike.iter().map(|&z| z * z).collect();
        let targets: Vec<Anchored<T>> = points.iter().map(|&x| Anchored::absolute(x)).collect();
        let mut sums = vec![T::zero(); points.len()];
        kernel.to_targets(&self.shaft, &targets, &weights, order as i32 + 1, &mut sums);
        let two = T::one() + T::one();
        Ok(points
            .iter()
            .zip(sums)
            .map(|(&x, s)| match order {
                0 => x - self.tip - s,
                1 => T::one() + s,
                _ => -two * s,
            })
            .collect())
    }
}

/// Size of the perturbations introduced while solving one arrowhead.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BackwardError<T> {
    /// ‖spike − reconstructed spike‖₂ over active entries.
    pub spike: T,
    /// |tip − reconstructed tip|.
    pub tip: T,
    /// Norm of everything dropped by deflation.
    pub deflation: T,
}

impl<T: Real> BackwardError<T> {
    pub fn total(&self) -> T {
        self.spike + self.tip + self.deflation
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            spike: self.spike.max(other.spike),
            tip: self.tip.max(other.tip),
            deflation: self.deflation.max(other.deflation),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EigRef {
    Deflated(usize),
    Root(usize),
}

#[derive(Clone, Copy, Debug)]
struct Rotation<T> {
    i: usize,
    j: usize,
    c: T,
    s: T,
}

/// Eigendecomposition `A = Q diag(λ) Qᵀ` of an arrowhead, with `Q` kept in Cauchy-like form.
#[derive(Clone, Debug)]
pub struct ArrowheadDecomposition<T> {
    size: usize,
    perm: Vec<usize>,
    rotations: Vec<Rotation<T>>,
    deflated: Vec<(usize, T)>,
    active: Vec<usize>,
    poles: Vec<T>,
    spike_hat: Vec<T>,
    tip_hat: T,
    roots: Vec<Anchored<T>>,
    norms: Vec<T>,
    order: Vec<EigRef>,
    eigenvalues: Vec<T>,
    backward: BackwardError<T>,
    scale: T,
}

impl<T: Real> ArrowheadDecomposition<T> {
    pub fn new(a: &Arrowhead<T>, kernel: &dyn KernelSum<T>) -> Result<Self> {
        let m = a.shaft.len();
        if a.shaft.iter().chain(&a.spike).any(|x| !x.is_finite()) || !a.tip.is_finite() {
            return Err(Error::InvalidParameter("arrowhead has non-finite entries".into()));
        }
        let scale = a.scale();
        let mut perm: Vec<usize> = (0..m).collect();
        perm.sort_by(|&i, &j| a.shaft[i].partial_cmp(&a.shaft[j]).unwrap_or(Ordering::Equal));
        let mut d: Vec<T> = perm.iter().map(|&p| a.shaft[p]).collect();
        let mut z: Vec<T> = perm.iter().map(|&p| a.spike[p]).collect();

        let tol = T::lit(8.0) * T::epsilon() * scale;
        let mut deflated = Vec::new();
        let mut rotations = Vec::new();
        let mut active = Vec::new();
        let mut dropped = CompensatedSum::new();
        let mut prev: Option<usize> = None;
        for p in 0..m {
            if z[p].abs() <= tol {
                dropped.add(z[p] * z[p]);
                deflated.push((p, d[p]));
                continue;
            }
            let Some(i) = prev else {
                prev = Some(p);
                continue;
            };
            let r = z[i].hypot(z[p]);
            let c = z[p] / r;
            let s = z[i] / r;
            let t = d[p] - d[i];
            if (t * c * s).abs() <= tol {
                let off = c * s * t;
                dropped.add(T::lit(2.0) * off * off);
                let di = c * c * d[i] + s * s * d[p];
                let dp = s * s * d[i] + c * c * d[p];
                d[i] = di;
                d[p] = dp;
                z[i] = T::zero();
                z[p] = r;
                rotations.push(Rotation { i, j: p, c, s });
                deflated.push((i, di));
            } else {
                active.push(i);
            }
            prev = Some(p);
        }
        if let Some(i) = prev {
            active.push(i);
        }

        let poles: Vec<T> = active.iter().map(|&p| d[p]).collect();
        let weights: Vec<T> = active.iter().map(|&p| z[p]).collect();
        let roots = solve_secular(&poles, &weights, a.tip)?;
        let (spike_hat, tip_hat) = reconstruct(&poles, &weights, &roots)?;

        let k = poles.len();
        let mut norms = vec![T::zero(); k + 1];
        let sq: Vec<T> = spike_hat.iter().map(|&b| b * b).collect();
        kernel.to_targets(&poles, &roots, &sq, 2, &mut norms);
        for n in norms.iter_mut() {
            *n = (T::one() + *n).sqrt();
        }

        let mut entries: Vec<(T, EigRef)> = deflated
            .iter()
            .enumerate()
            .map(|(i, &(_, v))| (v, EigRef::Deflated(i)))
            .chain(roots.iter().enumerate().map(|(i, r)| (r.value(&poles), EigRef::Root(i))))
            .collect();
        entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
        let eigenvalues = entries.iter().map(|e| e.0).collect();
        let order = entries.into_iter().map(|e| e.1).collect();

        let spike_err = weights
            .iter()
            .zip(&spike_hat)
            .map(|(&w, &h)| (w - h) * (w - h))
            .sum::<T>()
            .sqrt();
        let backward = BackwardError {
            spike: spike_err,
            tip: (a.tip - tip_hat).abs(),
            deflation: dropped.value().max(T::zero()).sqrt(),
        };
        Ok(Self {
            size: m + 1,
            perm,
            rotations,
            deflated,
            active,
            poles,
            spike_hat,
            tip_hat,
            roots,
            norms,
            order,
            eigenvalues,
            backward,
            scale,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn backward_error(&self) -> BackwardError<T> {
        self.backward
    }

    /// max(|shaft|, |tip|) + ‖spike‖₂ of the input.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn deflation_count(&self) -> usize {
        self.deflated.len()
    }

    /// Poles, reconstructed spike and tip of the non-deflated part.
    pub fn reconstructed(&self) -> (&[T], &[T], T) {
        (&self.poles, &self.spike_hat, self.tip_hat)
    }

    pub fn roots(&self) -> &[Anchored<T>] {
        &self.roots
    }

    /// `y = Q x`, with `x` indexed by ascending eigenvalue.
    pub fn apply_q(&self, x: &[T], kernel: &dyn KernelSum<T>) -> Vec<T> {
        let n = self.size;
        assert_eq!(x.len(), n, "vector length");
        let mut z = vec![T::zero(); n];
        let mut w = vec![T::zero(); self.roots.len()];
        for (&e, &xv) in self.order.iter().zip(x) {
            match e {
                EigRef::Deflated(d) => z[self.deflated[d].0] += xv,
                EigRef::Root(i) => w[i] = xv / self.norms[i],
            }
        }
        let mut shaft = vec![T::zero(); self.poles.len()];
        kernel.to_poles(&self.poles, &self.roots, &w, 1, &mut shaft);
        for (j, &p) in self.active.iter().enumerate() {
            z[p] += self.spike_hat[j] * shaft[j];
        }
        z[n - 1] += w.iter().copied().sum::<T>();
        for r in self.rotations.iter().rev() {
            let (a, b) = (z[r.i], z[r.j]);
            z[r.i] = r.c * a + r.s * b;
            z[r.j] = r.c * b - r.s * a;
        }
        let mut y = vec![T::zero(); n];
        for (p, &o) in self.perm.iter().enumerate() {
            y[o] = z[p];
        }
        y[n - 1] = z[n - 1];
        y
    }

    /// `x = Qᵀ y`.
    pub fn apply_qt(&self, y: &[T], kernel: &dyn KernelSum<T>) -> Vec<T> {
        let n = self.size;
        assert_eq!(y.len(), n, "vector length");
        let mut z = vec![T::zero(); n];
        for (p, &o) in self.perm.iter().enumerate() {
            z[p] = y[o];
        }
        z[n - 1] = y[n - 1];
        for r in &self.rotations {
            let (a, b) = (z[r.i], z[r.j]);
            z[r.i] = r.c * a - r.s * b;
            z[r.j] = r.s * a + r.c * b;
        }
        let weights: Vec<T> = self
            .active
            .iter()
            .enumerate()
            .map(|(j, &p)| self.spike_hat[j] * z[p])
            .collect();
        let mut t = vec![T::zero(); self.roots.len()];
        kernel.to_targets(&self.poles, &self.roots, &weights, 1, &mut t);
        self.order
            .iter()
            .map(|&e| match e {
                EigRef::Deflated(d) => z[self.deflated[d].0],
                EigRef::Root(i) => (t[i] + z[n - 1]) / self.norms[i],
            })
            .collect()
    }

    /// Dense eigenvector matrix, columns in ascending eigenvalue order.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.size;
        let mut q = DenseMatrix::zeros(n, n);
        for (col, &e) in self.order.iter().enumerate() {
            let c = q.col_mut(col);
            match e {
                EigRef::Deflated(d) => c[self.deflated[d].0] = T::one(),
                EigRef::Root(i) => {
                    let r = &self.roots[i];
                    for (j, &p) in self.active.iter().enumerate() {
                        c[p] = self.spike_hat[j] / r.gap(&self.poles, j) / self.norms[i];
                    }
                    c[n - 1] = T::one() / self.norms[i];
                }
            }
            for r in self.rotations.iter().rev() {
                let (a, b) = (c[r.i], c[r.j]);
                c[r.i] = r.c * a + r.s * b;
                c[r.j] = r.c * b - r.s * a;
            }
            let sorted = c.to_vec();
            for (p, &o) in self.perm.iter().enumerate() {
                c[o] = sorted[p];
            }
        }
        q
    }
}

/// Value, first and second derivative of `f(λ) = λ − c − Σ w²/(λ − a)` together with a
/// bound on the rounding error of the sum.
fn secular_eval<T: Real>(poles: &[T], w2: &[T], tip: T, x: &Anchored<T>) -> (T, T, T, T) {
    let mut s1 = CompensatedSum::new();
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    let mut mag = T::zero();
    for (j, &w) in w2.iter().enumerate() {
        let g = x.gap(poles, j);
        let t = w / g;
        s1.add(t);
        mag += t.abs();
        s2 += t / g;
        s3 += t / (g * g);
    }
    let base = match x.anchor {
        Some(o) => (poles[o] - tip) + x.offset,
        None => x.offset - tip,
    };
    let f = base - s1.value();
    let err = x.value(poles).abs() + tip.abs() + mag;
    (f, T::one() + s2, -T::lit(2.0) * s3, err)
}

fn pick_root<T: Real>(r1: T, r2: T, lo: T, hi: T, cur: T) -> Option<T> {
    let inside = |r: T| r.is_finite() && r > lo && r < hi;
    match (inside(r1), inside(r2)) {
        (true, true) => Some(if (r1 - cur).abs() <= (r2 - cur).abs() { r1 } else { r2 }),
        (true, false) => Some(r1),
        (false, true) => Some(r2),
        _ => None,
    }
}

fn quadratic_roots<T: Real>(a: T, b: T, c: T) -> Option<(T, T)> {
    if a == T::zero() {
        return if b == T::zero() { None } else { Some((-c / b, -c / b)) };
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() || !disc.is_finite() {
        return None;
    }
    let sq = disc.sqrt();
    let q = -(b + if b >= T::zero() { sq } else { -sq }) / T::lit(2.0);
    if q == T::zero() {
        return Some((T::zero(), T::zero()));
    }
    Some((q / a, c / q))
}

/// Roots of `λ − tip + Σ weights_j² / (poles_j − λ) = 0` for strictly increasing poles and
/// nonzero weights, each anchored at its nearest pole.
pub fn solve_secular<T: Real>(poles: &[T], weights: &[T], tip: T) -> Result<Vec<Anchored<T>>> {
    let k = poles.len();
    if k == 0 {
        return Ok(vec![Anchored::absolute(tip)]);
    }
    let w2: Vec<T> = weights.iter().map(|&w| w * w).collect();
    let norm = w2.iter().copied().sum::<T>().sqrt();
    let half = T::lit(0.5);
    let eps = T::epsilon();
    let mut roots = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let (anchor, mut lo, mut hi, exterior) = if i == 0 {
            let lower = poles[0].min(tip) - norm;
            (0, (lower - poles[0]).min(-T::min_positive_value()), T::zero(), true)
        } else if i == k {
            let upper = poles[k - 1].max(tip) + norm;
            (k - 1, T::zero(), (upper - poles[k - 1]).max(T::min_positive_value()), true)
        } else {
            let delta = poles[i] - poles[i - 1];
            let mid = Anchored { anchor: Some(i - 1), offset: delta * half };
            let (fm, ..) = secular_eval(poles, &w2, tip, &mid);
            if fm >= T::zero() {
                (i - 1, T::zero(), delta * half, false)
            } else {
                (i, -delta * half, T::zero(), false)
            }
        };
        let mut tau = (lo + hi) * half;
        let mut converged = false;
        for it in 0..MAX_SECULAR_ITERATIONS {
            let x = Anchored { anchor: Some(anchor), offset: tau };
            let (f, fp, fpp, err) = secular_eval(poles, &w2, tip, &x);
            if f == T::zero() || f.abs() <= T::lit(4.0) * eps * err {
                converged = true;
                break;
            }
            if f < T::zero() {
                lo = tau;
            } else {
                hi = tau;
            }
            if hi - lo <= T::lit(2.0) * eps * (lo.abs().max(hi.abs())) {
                converged = true;
                break;
            }
            let proposal = if it < MAX_SECULAR_ITERATIONS / 2 {
                if exterior {
                    let beta = -fpp * tau * tau * tau * half;
                    let kappa = fp - beta / (tau * tau);
                    let alpha = f - kappa * tau + beta / tau;
                    quadratic_roots(kappa, alpha, -beta).and_then(|(r1, r2)| pick_root(r1, r2, lo, hi, tau))
                } else {
                    let (dl, dr) = if anchor == i - 1 {
                        (T::zero(), poles[i] - poles[i - 1])
                    } else {
                        (poles[i - 1] - poles[i], T::zero())
                    };
                    let u = -T::one() / (tau - dl);
                    let w = -T::one() / (tau - dr);
                    let gam = (fpp - T::lit(2.0) * u * fp) / (T::lit(2.0) * w * w * (w - u));
                    let bet = (fp - gam * w * w) / (u * u);
                    let alp = f - bet * u - gam * w;
                    let b = -(alp * (dl + dr) + bet + gam);
                    let c = alp * dl * dr + bet * dr + gam * dl;
                    quadratic_roots(alp, b, c).and_then(|(r1, r2)| pick_root(r1, r2, lo, hi, tau))
                }
            } else {
                None
            };
            tau = proposal.unwrap_or((lo + hi) * half);
            if tau == lo || tau == hi {
                converged = true;
                tau = (lo + hi) * half;
                break;
            }
        }
        if !converged {
            return Err(Error::SecularNoConvergence { root: i });
        }
        if tau == T::zero() {
            tau = if i > anchor || (i == k && anchor == k - 1) {
                T::min_positive_value()
            } else {
                -T::min_positive_value()
            };
        }
        roots.push(Anchored { anchor: Some(anchor), offset: tau });
    }
    Ok(roots)
}

/// Spike and tip of the arrowhead with the given poles whose eigenvalues are exactly `roots`.
/// The signs of the spike follow `weights`.
pub fn reconstruct<T: Real>(poles: &[T], weights: &[T], roots: &[Anchored<T>]) -> Result<(Vec<T>, T)> {
    let k = poles.len();
    if roots.len() != k + 1 {
        return Err(Error::DimensionMismatch(format!("{} roots for {} poles", roots.len(), k)));
    }
    let mut spike = Vec::with_capacity(k);
    for j in 0..k {
        let mut lg = CompensatedSum::new();
        for (r, root) in roots.iter().enumerate() {
            let g = root.gap(poles, j);
            let ok = if r <= j { g < T::zero() } else { g > T::zero() };
            if !ok {
                return Err(Error::InterlacingViolation(format!(
                    "root {r} does not interlace with pole {j}"
                )));
            }
            lg.add(g.abs().ln());
        }
        for (i, &p) in poles.iter().enumerate() {
            if i != j {
                lg.add(-(p - poles[j]).abs().ln());
            }
        }
        let mag = (lg.value() * T::lit(0.5)).exp();
        spike.push(if weights[j] < T::zero() { -mag } else { mag });
    }
    let mut tip = CompensatedSum::new();
    tip.add(roots[k].value(poles));
    for j in 0..k {
        tip.add(roots[j].gap(poles, j));
    }
    Ok((spike, tip.value()))
}
