use hpt_core::banded::{sh_rrt, BandedSymmetric};
use hpt_core::dc::{eigen, DcOptions, SymTridiagonal};
use hpt_core::gevp::{
    default_buffer, dense_reference_gevp, layer_decomposition, perfect_shuffle, perfect_unshuffle, sd_tridiag_gevp,
    shuffle_pencil, solve_pencil, Connection, SolverPath, SymDefPencil,
};
use hpt_core::givens::{jacobi_givens_sequence, sh_givens_sequence, JacobiStep};
use hpt_core::linalg::DenseMatrix;
use hpt_core::special::{connection_oracle, Basis, JacobiParams, Measure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn jp(a: f64, b: f64) -> JacobiParams<f64> {
    JacobiParams::new(a, b).unwrap()
}

fn b_orthogonality(v: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
    v.t_matmul(&b.matmul(v)).sub(&DenseMatrix::identity(v.cols(), v.cols())).max_abs()
}

fn tri(diag: Vec<f64>, off: Vec<f64>) -> SymTridiagonal<f64> {
    SymTridiagonal::new(diag, off).unwrap()
}

fn banded(t: &SymTridiagonal<f64>) -> BandedSymmetric<f64> {
    BandedSymmetric::from_diagonals(vec![t.diag.clone(), t.off.clone()]).unwrap()
}

#[test]
fn diagonal_pencils_shuffle_into_diagonal_pencils() {
    let a = BandedSymmetric::from_diagonals(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0; 4], vec![0.0; 3]]).unwrap();
    let b = BandedSymmetric::from_diagonals(vec![vec![1.0; 5], vec![0.0; 4], vec![0.0; 3]]).unwrap();
    let [(te, se), (to, so)] = shuffle_pencil(&SymDefPencil::new(a, b).unwrap()).unwrap();
    assert_eq!(te.diag, vec![1.0, 3.0, 5.0]);
    assert_eq!(to.diag, vec![2.0, 4.0]);
    assert!(te.off.iter().chain(&to.off).chain(&se.off).chain(&so.off).all(|&x| x == 0.0));
}

#[test]
fn sphere_gram_operator_splits_by_parity() {
    let rrt = sh_rrt::<f64>(0, 8);
    let a = rrt.clone();
    let [(_, even), (_, odd)] = shuffle_pencil(&SymDefPencil::new(a, rrt.clone()).unwrap()).unwrap();
    for k in 0..4 {
        assert_eq!(even.diag[k], rrt.get(2 * k, 2 * k));
        assert_eq!(odd.diag[k], rrt.get(2 * k + 1, 2 * k + 1));
    }
    for k in 0..3 {
        assert_eq!(even.off[k], rrt.get(2 * k, 2 * k + 2));
        assert_eq!(odd.off[k], rrt.get(2 * k + 1, 2 * k + 3));
    }
}

#[test]
fn shuffle_permutations_are_inverse() {
    for n in 0..40 {
        let p = perfect_shuffle(n);
        let q = perfect_unshuffle(n);
        let x: Vec<usize> = (0..n).map(|i| 7 * i + 3).collect();
        let shuffled: Vec<usize> = p.iter().map(|&i| x[i]).collect();
        let back: Vec<usize> = (0..n).map(|i| shuffled[q[i]]).collect();
        assert_eq!(back, x);
    }
}

#[test]
fn identity_metric_reduces_to_the_standard_problem() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 70;
    let t = tri((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let s = tri(vec![1.0; n], vec![0.0; n - 1]);
    let opts = DcOptions { leaf_size: 8, ..Default::default() };
    let g = sd_tridiag_gevp(&t, &s, &opts).unwrap();
    let e = eigen(&t, &opts).unwrap();
    for (x, y) in g.eigenvalues().iter().zip(e.eigenvalues()) {
        assert!((x - y).abs() <= 1e-14);
    }
    let (vg, ve) = (g.to_dense(), e.to_dense());
    for j in 0..n {
        let dot: f64 = vg.col(j).iter().zip(ve.col(j)).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn two_by_two_pencil() {
    let t = tri(vec![0.0, 0.0], vec![1.0]);
    let s = tri(vec![1.0, 4.0], vec![0.0]);
    let g = sd_tridiag_gevp(&t, &s, &DcOptions::default()).unwrap();
    assert!((g.eigenvalues()[0] + 0.5).abs() < 1e-15);
    assert!((g.eigenvalues()[1] - 0.5).abs() < 1e-15);
    let v = g.to_dense();
    assert!(b_orthogonality(&v, &s.to_dense()) < 1e-15);
    let d = v.t_matmul(&t.to_dense().matmul(&v));
    assert!(d[(0, 1)].abs() < 1e-15);
}

#[test]
fn random_definite_pencil_residuals() {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(128);
    let t = tri((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let s = tri((0..n).map(|_| rng.gen_range(2.5..4.0)).collect(), (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let g = sd_tridiag_gevp(&t, &s, &DcOptions { leaf_size: 16, ..Default::default() }).unwrap();
    let v = g.to_dense();
    let (td, sd) = (t.to_dense(), s.to_dense());
    let lambda = DenseMatrix::from_fn(n, n, |i, j| if i == j { g.eigenvalues()[i] } else { 0.0 });
    let r = td.matmul(&v).sub(&sd.matmul(&v).matmul(&lambda)).max_abs();
    assert!(r <= (td.max_abs() + sd.max_abs()) * n as f64 * 1e-12);
    assert!(b_orthogonality(&v, &sd) <= 1e-11);
}

#[test]
fn dense_reference_solver() {
    let a = BandedSymmetric::from_diagonals(vec![vec![3.0, 1.0, 2.0]]).unwrap();
    let b = BandedSymmetric::from_diagonals(vec![vec![1.0; 3]]).unwrap();
    let (vals, _) = dense_reference_gevp(&SymDefPencil::new(a, b).unwrap()).unwrap();
    assert_eq!(vals, vec![1.0, 2.0, 3.0]);

    for n in [16, 100, 256] {
        let (pencil, _) = Connection::<f64>::sphere(1, 5).unwrap().pencil(n).unwrap();
        let (vals, v) = dense_reference_gevp(&pencil).unwrap();
        assert!(b_orthogonality(&v, &pencil.b.to_dense()) <= 1e-12, "n = {n}");
        if n <= 100 {
            let (dc, _, path) = solve_pencil(&pencil, n, &DcOptions::default()).unwrap();
            assert_eq!(path, SolverPath::Shuffled);
            for (x, y) in vals.iter().zip(&dc) {
                assert!((x - y).abs() <= 1e-11 * y.abs().max(1.0));
            }
        }
    }
}

#[test]
fn non_definite_metric_is_rejected() {
    let a = BandedSymmetric::from_diagonals(vec![vec![1.0, 1.0]]).unwrap();
    let b = BandedSymmetric::from_diagonals(vec![vec![1.0, -1.0]]).unwrap();
    assert!(dense_reference_gevp(&SymDefPencil::new(a, b).unwrap()).is_err());
    let t = tri(vec![1.0, 2.0, 3.0], vec![0.1, 0.1]);
    assert!(sd_tridiag_gevp(&t, &tri(vec![1.0, 1.0], vec![0.0]), &DcOptions::default()).is_err());
}

#[test]
fn sphere_layer_matches_givens_product() {
    let conn = Connection::<f64>::sphere(0, 2).unwrap();
    let dec = layer_decomposition(&conn, 16, 16, &DcOptions::default()).unwrap();
    let g = sh_givens_sequence::<f64>(0, 16).dense();
    assert!(dec.u.sub(&g).max_abs() <= 1e-10);
    for (k, &l) in dec.eigenvalues.iter().enumerate() {
        let exact = ((2 + k) * (3 + k)) as f64;
        assert!((l - exact).abs() <= 1e-10 * exact);
    }
    assert!(dec.u.orthonormality_defect() <= 1e-10);
    assert!(dec.trim_decay <= 1e-10);
}

#[test]
fn jacobi_layer_matches_composed_givens() {
    let n = 12;
    let conn = Connection::jacobi(jp(0.0, 0.0), jp(2.0, 2.0)).unwrap();
    let dec = layer_decomposition(&conn, n, n, &DcOptions::default()).unwrap();
    let alpha = jacobi_givens_sequence(jp(0.0, 0.0), JacobiStep::Alpha, n + 1).dense();
    let beta = jacobi_givens_sequence(jp(2.0, 0.0), JacobiStep::Beta, n).dense();
    let composed = alpha.matmul(&beta);
    assert!(dec.u.sub(&composed).max_abs() <= 1e-9);
    let q = connection_oracle(&Basis::WeightedJacobi(jp(0.0, 0.0)), &Basis::WeightedJacobi(jp(2.0, 2.0)), &Measure::Lebesgue, n + 2, n)
        .unwrap();
    assert!(dec.u.sub(&q).max_abs() <= 1e-9);
    for (k, &l) in dec.eigenvalues.iter().enumerate() {
        let exact = (k * (k + 5)) as f64;
        assert!((l - exact).abs() <= 1e-9 * exact.max(1.0));
    }
}

#[test]
fn route_equivalence_across_connections() {
    let opts = DcOptions::default();
    let conns = [
        Connection::sphere(0, 2).unwrap(),
        Connection::sphere(3, 9).unwrap(),
        Connection::sphere(10, 14).unwrap(),
        Connection::jacobi(jp(0.0, 1.0), jp(2.0, 1.0)).unwrap(),
        Connection::jacobi(jp(0.5, 0.0), jp(0.5, 4.0)).unwrap(),
        Connection::jacobi(jp(1.0, 1.0), jp(3.0, 3.0)).unwrap(),
        Connection::jacobi(jp(0.0, 2.0), jp(2.0, 4.0)).unwrap(),
    ];
    for conn in conns {
        for n in [1, 8, 33, 64] {
            let dec = layer_decomposition(&conn, n, default_buffer(n, conn.step()), &opts).unwrap();
            let g = conn.givens_product(n);
            assert!(dec.u.sub(&g).max_abs() <= 1e-9, "{conn:?} n = {n}");
            assert!(dec.u.orthonormality_defect() <= 1e-10);
            for (k, &l) in dec.eigenvalues.iter().enumerate() {
                let exact = conn.eigenvalue(k);
                assert!((l - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{conn:?} n = {n} k = {k}");
            }
        }
    }
}

#[test]
fn invalid_connections_are_rejected() {
    assert!(Connection::<f64>::sphere(2, 2).is_err());
    assert!(Connection::<f64>::sphere(2, 5).is_err());
    assert!(Connection::<f64>::sphere(4, 2).is_err());
    assert!(Connection::jacobi(jp(0.0, 0.0), jp(1.0, 0.0)).is_err());
    let conn = Connection::<f64>::sphere(0, 2).unwrap();
    assert!(layer_decomposition(&conn, 0, 4, &DcOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn definite_pencils_are_metric_orthogonal(n in 2usize..120, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = tri((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let s = tri((0..n).map(|_| rng.gen_range(2.5..4.0)).collect(), (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let g = sd_tridiag_gevp(&t, &s, &DcOptions { leaf_size: 6, ..Default::default() }).unwrap();
        prop_assert!(b_orthogonality(&g.to_dense(), &s.to_dense()) <= 1e-11);
        let pencil = SymDefPencil::new(banded(&t), banded(&s)).unwrap();
        let (vals, _) = dense_reference_gevp(&pencil).unwrap();
        for (x, y) in g.eigenvalues().iter().zip(&vals) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }
}
