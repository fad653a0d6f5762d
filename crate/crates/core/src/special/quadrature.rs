use super::JacobiParams;
use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues_bisection;
use crate::scalar::Real;

/// Gauss quadrature rule for the weight (1−x)^α (1+x)^β.
#[derive(Clone, Debug)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// `n`-point Gauss–Jacobi rule from the Jacobi matrix: Sturm bisection for the nodes,
/// Newton polishing on P̃_n, Christoffel weights.
pub fn gauss_jacobi_rule<T: Real>(n: usize, p: &JacobiParams<T>) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    let diag: Vec<T> = (0..n).map(|k| p.rec_diag(k)).collect();
    let off: Vec<T> = (1..n).map(|k| p.rec_off(k)).collect();
    let mut nodes = tridiagonal_eigenvalues_bisection(&diag, &off);
    let p0 = (-T::lit(0.5) * p.ln_mass()).exp();
    let mut vals = vec![T::zero(); n + 1];
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, dpn) = value_and_derivative(p, n, *x);
            if dpn == T::zero() {
                break;
            }
            let step = pn / dpn;
            let nx = *x - step;
            if !(nx > -T::one() && nx < T::one()) {
                break;
            }
            *x = nx;
            if step.abs() <= T::epsilon() * x.abs() {
                break;
            }
        }
        p.recurrence_into(*x, p0, &mut vals[..n]);
        let s: T = vals[..n].iter().map(|&v| v * v).sum();
        weights.push(T::one() / s);
    }
    Ok(GaussRule { nodes, weights })
}

fn value_and_derivative<T: Real>(p: &JacobiParams<T>, n: usize, x: T) -> (T, T) {
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut dprev = T::zero();
    let mut dcur = T::zero();
    for k in 0..n {
        let b_next = p.rec_off(k + 1);
        let bk = if k == 0 { T::zero() } else { p.rec_off(k) };
        let a = p.rec_diag(k);
        let next = ((x - a) * cur - bk * prev) / b_next;
        let dnext = ((x - a) * dcur + cur - bk * dprev) / b_next;
        prev = cur;
        cur = next;
        dprev = dcur;
        dcur = dnext;
    }
    (cur, dcur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_two_point() {
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        let r = gauss_jacobi_rule(2, &p).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_monomials_exactly() {
        let p = JacobiParams::new(1.5, 0.5).unwrap();
        let n = 12;
        let r = gauss_jacobi_rule(n, &p).unwrap();
        let mass: f64 = r.weights.iter().sum();
        assert!((mass - p.ln_mass().exp()).abs() < 1e-13 * mass);
        // Orthonormality of P̃_0..P̃_{n-1} under the rule.
        for i in 0..n {
            for j in 0..n {
                let s: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(&x, &w)| {
                        let v = super::super::jacobi_orthonormal_all(n, &p, x);
                        w * v[i] * v[j]
                    })
                    .sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-13, "{i} {j} {s}");
            }
        }
    }

    #[test]
    fn rejects_zero_nodes() {
        assert!(gauss_jacobi_rule(0, &JacobiParams::new(0.0, 0.0).unwrap()).is_err());
    }
}
