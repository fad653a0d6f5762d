use hpt_core::banded::{
    banded_cholesky, jac_cholesky, jac_diagonal, jac_mult_ops, jac_rinv_diagonals, jac_rsrinv, jac_s_operator,
    sh_cholesky, sh_diagonal, sh_minv_entry, sh_minv_section, sh_mult, sh_rdrt, sh_rrt, similarity_defects,
    BandedSymmetric, JacobiJump,
};
use hpt_core::linalg::{sym_eigen_jacobi, DenseMatrix};
use hpt_core::special::{connection_oracle, gauss_jacobi_rule, Basis, JacobiParams, Measure};

const PARAMS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn jp(a: f64, b: f64) -> JacobiParams<f64> {
    JacobiParams::new(a, b).unwrap()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

fn min_eigenvalue(a: &BandedSymmetric<f64>) -> f64 {
    sym_eigen_jacobi(&a.to_dense()).0.into_iter().fold(f64::INFINITY, f64::min)
}

#[test]
fn sphere_multiplication_entries() {
    let m = sh_mult::<f64>(0, 4);
    close(m.get(0, 0), 2.0 / 3.0, 1e-15);
    close(m.get(0, 2), -2.0 / (3.0 * 5f64.sqrt()), 1e-15);
    assert_eq!(m.get(0, 1), 0.0);
    for k in 0..10usize {
        let kf = k as f64;
        close(sh_mult::<f64>(k, 1).get(0, 0), 2.0 * (kf + 1.0) / (2.0 * kf + 3.0), 1e-15);
    }
}

#[test]
fn sphere_multiplication_matches_quadrature() {
    let rule = gauss_jacobi_rule(20, &jp(0.0, 0.0)).unwrap();
    let p = |k: usize, x: f64| hpt_core::special::eval_assoc_legendre_norm(k, 0, x).unwrap();
    let integral = |i: usize, j: usize| -> f64 {
        rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * (1.0 - x * x) * p(i, x) * p(j, x)).sum()
    };
    let m = sh_mult::<f64>(0, 6);
    for i in 0..6 {
        for j in i..6 {
            close(m.get(i, j), integral(i, j), 1e-14);
        }
    }
}

#[test]
fn sphere_factor_and_products() {
    let r = sh_cholesky::<f64>(0, 4);
    close(r.get(0, 0), (2.0f64 / 3.0).sqrt(), 1e-15);
    close(r.get(0, 0).powi(2), sh_mult::<f64>(0, 1).get(0, 0), 1e-15);
    let d1 = r.get(0, 2);
    close(d1 * d1, 2.0 / 15.0, 1e-15);
    close(sh_rrt::<f64>(0, 2).get(0, 0), 0.8, 1e-15);
    close(r.get(0, 0).powi(2) + d1 * d1, 0.8, 1e-15);
    close(sh_rdrt::<f64>(0, 2).get(0, 0), 0.8, 1e-15);
    close(0.0 * r.get(0, 0).powi(2) + 6.0 * d1 * d1, 0.8, 1e-15);
    assert_eq!(sh_diagonal::<f64>(2, 3), vec![6.0, 12.0, 20.0]);
}

#[test]
fn sphere_factor_is_the_cholesky_factor() {
    for m in [0usize, 1, 4, 30] {
        let n = 64;
        let closed = sh_cholesky::<f64>(m, n);
        let computed = banded_cholesky(&sh_mult::<f64>(m, n)).unwrap();
        for i in 0..n {
            for j in i..(i + 3).min(n) {
                let a = closed.get(i, j);
                assert!((a - computed.get(i, j)).abs() <= 1e-13 * a.abs().max(1e-300), "m = {m} ({i}, {j})");
            }
        }
    }
}

#[test]
fn sphere_inverse_multiplication() {
    close(sh_minv_entry::<f64>(1, 0, 0).unwrap(), 1.5, 1e-14);
    assert_eq!(sh_minv_entry::<f64>(1, 0, 1).unwrap(), 0.0);
    assert!(sh_minv_entry::<f64>(0, 0, 0).is_err());
    let rule = gauss_jacobi_rule(24, &jp(0.0, 0.0)).unwrap();
    let integral: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * hpt_core::special::eval_assoc_legendre_norm(1, 1, x).unwrap().powi(2) / (1.0 - x * x))
        .sum();
    close(integral, 1.5, 1e-12);

    let size = 48;
    let minv = sh_minv_section::<f64>(2, size).unwrap().to_dense();
    let prod = sh_mult::<f64>(2, size).to_dense().matmul(&minv);
    for i in 0..8 {
        for j in 0..8 {
            close(prod[(i, j)], if i == j { 1.0 } else { 0.0 }, 1e-8);
        }
    }
    let d = sh_minv_section::<f64>(3, 12).unwrap().to_dense();
    assert_eq!(d.sub(&d.transpose()).max_abs(), 0.0);
}

#[test]
fn sphere_operators_are_positive_definite() {
    for m in [0usize, 1, 7] {
        for n in [1, 8, 32] {
            assert!(min_eigenvalue(&sh_mult(m, n)) > 0.0);
            assert!(min_eigenvalue(&sh_rrt(m, n)) > 0.0);
        }
    }
}

#[test]
fn sphere_generalized_eigen_residual() {
    let size = 40;
    for m in [0usize, 1, 5] {
        for k in 1..=3 {
            let mu = m + 2 * k;
            let c = connection_oracle(&Basis::Legendre { order: m }, &Basis::Legendre { order: mu }, &Measure::Lebesgue, size, 12)
                .unwrap();
            let mm = sh_mult::<f64>(m, size);
            let d = sh_diagonal::<f64>(m, size);
            let shift = (mu * mu - m * m) as f64;
            for col in 0..12 {
                let u = c.col(col);
                let l = (mu + col) as f64;
                let du: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a * b).collect();
                let lhs = mm.mul_vec(&du);
                let mu_vec = mm.mul_vec(u);
                let res = (0..size - 2)
                    .map(|i| (lhs[i] + shift * u[i] - l * (l + 1.0) * mu_vec[i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(res <= 1e-9 * norm, "m = {m}, mu = {mu}, column {col}: {res:e}");
            }
        }
    }
}

#[test]
fn jacobi_multiplication_entries() {
    let ops = jac_mult_ops(&jp(0.0, 0.0), 4).unwrap();
    close(ops.m1.get(0, 1), 1.0 / 3f64.sqrt(), 1e-15);
    close(ops.m1.get(0, 0), 1.0, 1e-15);
    for &a in &PARAMS {
        for &b in &PARAMS {
            let ops = jac_mult_ops(&jp(a, b), 20).unwrap();
            let sum = ops.m1.add_scaled(1.0, &ops.m2);
            for i in 0..20 {
                close(sum.get(i, i), 2.0, 1e-14);
                if i + 1 < 20 {
                    assert_eq!(sum.get(i, i + 1), 0.0);
                }
            }
            for w in [&ops.m1, &ops.m2, &ops.m] {
                assert!(min_eigenvalue(&w.section(32.min(w.size()))) > 0.0);
            }
        }
    }
}

#[test]
fn jacobi_multiplication_matches_quadrature() {
    let p = jp(1.0, 0.5);
    let rule = gauss_jacobi_rule(16, &p).unwrap();
    let ev = |k: usize, x: f64| hpt_core::special::eval_jacobi_orthonormal(k, &p, x).unwrap();
    let ops = jac_mult_ops(&p, 6).unwrap();
    for i in 0..6 {
        for j in i..6 {
            let ip = |f: &dyn Fn(f64) -> f64| -> f64 {
                rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f(x) * ev(i, x) * ev(j, x)).sum()
            };
            close(ops.m1.get(i, j), ip(&|x| 1.0 + x), 1e-13);
            close(ops.m2.get(i, j), ip(&|x| 1.0 - x), 1e-13);
            close(ops.m.get(i, j), ip(&|x| 1.0 - x * x), 1e-13);
            close(ops.m_plus.get(i, j), ip(&|x| (1.0 + x).powi(2)), 1e-13);
            close(ops.m_minus.get(i, j), ip(&|x| (1.0 - x).powi(2)), 1e-13);
        }
    }
}

#[test]
fn jacobi_symbolic_operator() {
    let same = JacobiJump::new(jp(1.0, 0.5), jp(1.0, 0.5));
    assert!(same.is_err());
    let jump = JacobiJump::new(jp(0.0, 0.0), jp(2.0, 2.0)).unwrap();
    let s = jac_s_operator(&jump, 16).unwrap();
    let ops = jac_mult_ops(&jp(0.0, 0.0), 16).unwrap();
    let expected = ops.m_plus.add_scaled(1.0, &ops.m_minus).add_scaled(-4.0, &ops.m);
    for i in 0..16 {
        for j in i..(i + 3).min(16) {
            close(s.get(i, j), expected.get(i, j), 1e-14);
        }
    }
    assert!(JacobiJump::new(jp(0.0, 0.0), jp(1.0, 0.0)).is_err());
}

#[test]
fn jacobi_eigenfunction_residual() {
    let size = 40;
    for (low, high) in [((0.0, 0.0), (2.0, 2.0)), ((0.5, 1.0), (2.5, 1.0)), ((1.0, 0.0), (1.0, 4.0))] {
        let (p, q) = (jp(low.0, low.1), jp(high.0, high.1));
        let jump = JacobiJump::new(p, q).unwrap();
        let s = jac_s_operator(&jump, size).unwrap();
        let m = jac_mult_ops(&p, size).unwrap().m;
        let d = jac_diagonal(&p, size);
        let c = connection_oracle(&Basis::WeightedJacobi(p), &Basis::WeightedJacobi(q), &Measure::Lebesgue, size, 12).unwrap();
        for col in 0..12 {
            let u = c.col(col);
            let n = col as f64;
            let lambda = n * (n + q.alpha + q.beta + 1.0);
            let du: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a * b).collect();
            let (mdu, su, mu) = (m.mul_vec(&du), s.mul_vec(u), m.mul_vec(u));
            let res = (0..size - 2).map(|i| (mdu[i] + su[i] - lambda * mu[i]).powi(2)).sum::<f64>().sqrt();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(res <= 1e-9 * norm, "{low:?} -> {high:?} column {col}: {res:e}");
        }
    }
}

#[test]
fn jacobi_cholesky_values() {
    let r = jac_cholesky(&jp(0.0, 0.0), 4);
    close(r.get(0, 0), (2.0f64 / 3.0).sqrt(), 1e-15);
    assert_eq!(r.get(0, 1), 0.0);
    close(r.get(0, 2), -(2.0f64 / 15.0).sqrt(), 1e-15);
    let rinv = jac_rinv_diagonals(&jp(0.0, 0.0), 4);
    close(rinv[0][0], 6f64.sqrt() / 2.0, 1e-15);
    close(rinv[0][0] * r.get(0, 0), 1.0, 1e-15);
}

#[test]
fn jacobi_cholesky_reproduces_the_operator() {
    let n = 64;
    for &a in &PARAMS {
        for &b in &PARAMS {
            let p = jp(a, b);
            let r = jac_cholesky(&p, n).to_dense();
            let rtr = r.t_matmul(&r);
            let m = jac_mult_ops(&p, n).unwrap().m.to_dense();
            assert!(rtr.sub(&m).max_abs() <= 1e-13, "({a}, {b})");
            let rinv = jac_rinv_diagonals(&p, n);
            let mut exact = DenseMatrix::identity(n, n);
            for c in 0..n {
                let col = exact.col_mut(c);
                for i in (0..=c).rev() {
                    let mut acc = col[i];
                    for j in i + 1..(i + 3).min(n) {
                        acc -= r[(i, j)] * col[j];
                    }
                    col[i] = acc / r[(i, i)];
                }
            }
            for (k, diag) in rinv.iter().enumerate() {
                for (i, &v) in diag.iter().enumerate() {
                    let e: f64 = exact[(i, i + k)];
                    assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0), "({a}, {b}) diag {k} row {i}");
                }
            }
        }
    }
}

#[test]
fn jacobi_similarity_is_symmetric_pentadiagonal() {
    let n = 64;
    for (low, high) in [((0.0, 0.0), (2.0, 2.0)), ((0.5, 0.5), (2.5, 4.5)), ((1.0, 2.0), (3.0, 4.0))] {
        let p = jp(low.0, low.1);
        let jump = JacobiJump::new(p, jp(high.0, high.1)).unwrap();
        let r = jac_cholesky(&p, n + 2);
        let s = jac_s_operator(&jump, n + 2).unwrap();
        let (asym, fill) = similarity_defects(&r, &s, n - 4);
        let scale = s.max_abs();
        assert!(asym <= 1e-10 * scale && fill <= 1e-10 * scale, "{low:?} -> {high:?}: {asym:e} {fill:e}");
        let x = jac_rsrinv(&jump, n).unwrap();
        assert_eq!(x.bandwidth(), 2);
    }
}

#[test]
fn multiplication_commutes_with_symbolic_operator() {
    let n = 64;
    let p = jp(0.5, 1.0);
    let jump = JacobiJump::new(p, jp(2.5, 3.0)).unwrap();
    let s = jac_s_operator(&jump, n).unwrap().to_dense();
    let m = jac_mult_ops(&p, n).unwrap().m.to_dense();
    let c = m.matmul(&s).sub(&s.matmul(&m));
    let interior = c.block(n - 4, n - 4).max_abs();
    assert!(interior <= 1e-10 * s.max_abs());
}
