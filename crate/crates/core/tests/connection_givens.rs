use hpt_core::givens::{
    jacobi_connection_dense, jacobi_givens_sequence, jacobi_rotation_squares_exact, sh_connection_dense, sh_connection_entry,
    sh_givens_sequence, sh_rotation_squares_exact, Direction, GivensSequence, JacobiStep,
};
use hpt_core::linalg::DenseMatrix;
use hpt_core::special::{connection_oracle, Basis, JacobiParams, Measure};
use num_rational::Ratio;
use proptest::prelude::*;

const EPS: f64 = f64::EPSILON;

fn jp(a: f64, b: f64) -> JacobiParams<f64> {
    JacobiParams::new(a, b).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gram_defect(c: &DenseMatrix<f64>) -> f64 {
    c.t_matmul(c).sub(&DenseMatrix::identity(c.cols(), c.cols())).max_abs()
}

#[test]
fn sphere_first_rotation() {
    let (s, c) = sh_givens_sequence::<f64>(0, 4).rotation(0);
    assert!((s - (1.0f64 / 6.0).sqrt()).abs() < 1e-16);
    assert!((c - (5.0f64 / 6.0).sqrt()).abs() < 1e-16);
    assert_eq!(sh_rotation_squares_exact(0, 0), (Ratio::new(1, 6), Ratio::new(5, 6)));
}

#[test]
fn jacobi_first_rotation() {
    let (s, c) = jacobi_givens_sequence(jp(0.0, 0.0), JacobiStep::Alpha, 4).rotation(0);
    assert!((s - 0.5).abs() < 1e-16);
    assert!((c - 3f64.sqrt() / 2.0).abs() < 1e-16);
    assert_eq!(jacobi_rotation_squares_exact(0, 0, 0), (Ratio::new(1, 4), Ratio::new(3, 4)));
}

#[test]
fn exact_squares_sum_to_one() {
    for m in 0..=64i128 {
        for k in 0..=256i128 {
            let (s, c) = sh_rotation_squares_exact(m, k);
            assert_eq!(s + c, Ratio::from_integer(1));
        }
    }
    for a in 0..=6i128 {
        for b in 0..=6i128 {
            for k in 0..=64i128 {
                let (s, c) = jacobi_rotation_squares_exact(a, b, k);
                assert_eq!(s + c, Ratio::from_integer(1));
            }
        }
    }
}

#[test]
fn pythagorean_identity_in_floating_point() {
    for m in 0..=64 {
        let seq = sh_givens_sequence::<f64>(m, 1024);
        for k in 0..1024 {
            let (s, c) = seq.rotation(k);
            assert!((s * s + c * c - 1.0).abs() <= 4.0 * EPS);
            assert!(c > 0.0 && c <= 1.0);
        }
    }
}

#[test]
fn sphere_closed_form_entries() {
    assert!((sh_connection_entry::<f64>(0, 0, 0) - (5.0f64 / 6.0).sqrt()).abs() < 1e-15);
    for m in 0..=8 {
        let seq = sh_givens_sequence::<f64>(m, 17);
        for n in 0..=16 {
            let (s, _) = seq.rotation(n);
            assert!((sh_connection_entry::<f64>(m, n + 2, n) + s).abs() < 1e-14, "m = {m}, n = {n}");
            assert_eq!(sh_connection_entry::<f64>(m, n + 1, n), 0.0);
        }
    }
}

#[test]
fn beta_step_sines_mirror_alpha_step() {
    for &(a, b) in &[(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)] {
        let beta = jacobi_givens_sequence(jp(a, b), JacobiStep::Beta, 12);
        let alpha = jacobi_givens_sequence(jp(b, a), JacobiStep::Alpha, 12);
        for k in 0..12 {
            assert_eq!(beta.rotation(k).0, -alpha.rotation(k).0);
            assert_eq!(beta.rotation(k).1, alpha.rotation(k).1);
        }
    }
}

#[test]
fn forward_unit_vector_is_first_column() {
    let out = sh_givens_sequence::<f64>(0, 6).apply(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], Direction::Forward).unwrap();
    assert!((out[0] - (5.0f64 / 6.0).sqrt()).abs() < 1e-16);
    assert_eq!(out[1], 0.0);
    assert!((out[2] + (1.0f64 / 6.0).sqrt()).abs() < 1e-16);
    assert!(out[3..].iter().all(|&x| x == 0.0));
}

#[test]
fn empty_sequence_is_rectangular_identity() {
    let d = sh_givens_sequence::<f64>(3, 0).dense();
    assert_eq!((d.rows(), d.cols()), (2, 0));
    let d = GivensSequence::with_rotation_count(*sh_givens_sequence::<f64>(3, 5).family(), 5, 0).unwrap().dense();
    for i in 0..7 {
        for j in 0..5 {
            assert_eq!(d[(i, j)], if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn dense_products_match_quadrature() {
    let n = 8;
    let g = sh_givens_sequence::<f64>(0, n).dense();
    let q = connection_oracle(&Basis::Legendre { order: 0 }, &Basis::Legendre { order: 2 }, &Measure::Lebesgue, n + 2, n).unwrap();
    assert!(g.sub(&q).max_abs() < 1e-12);

    let p = jp(1.0, 0.0);
    let g = jacobi_givens_sequence(p, JacobiStep::Alpha, n).dense();
    let q = connection_oracle(&Basis::WeightedJacobi(p), &Basis::WeightedJacobi(jp(3.0, 0.0)), &Measure::Lebesgue, n + 1, n).unwrap();
    assert!(g.sub(&q).max_abs() < 1e-12);
}

#[test]
fn all_families_match_quadrature_up_to_64() {
    let n = 64;
    for m in [0, 1, 5, 20] {
        let g = sh_givens_sequence::<f64>(m, n).dense();
        let q = connection_oracle(&Basis::Legendre { order: m }, &Basis::Legendre { order: m + 2 }, &Measure::Lebesgue, n + 2, n)
            .unwrap();
        assert!(g.sub(&q).max_abs() < 1e-11, "sphere m = {m}");
    }
    for &(a, b) in &[(0.0, 0.0), (0.5, 1.0), (2.0, 0.5)] {
        let p = jp(a, b);
        for (step, raised) in [(JacobiStep::Alpha, jp(a + 2.0, b)), (JacobiStep::Beta, jp(a, b + 2.0))] {
            let g = jacobi_givens_sequence(p, step, n).dense();
            let q = connection_oracle(&Basis::WeightedJacobi(p), &Basis::WeightedJacobi(raised), &Measure::Lebesgue, n + 1, n)
                .unwrap();
            assert!(g.sub(&q).max_abs() < 1e-11, "({a}, {b}) {step:?}");
        }
    }
}

#[test]
fn dense_products_match_closed_forms() {
    for n in [1, 16, 64, 128] {
        for m in [0, 3, 10] {
            let g = sh_givens_sequence::<f64>(m, n).dense();
            assert!(g.sub(&sh_connection_dense(m, n + 2, n)).max_abs() < 1e-12);
            assert!(gram_defect(&g) <= 10.0 * n as f64 * EPS);
        }
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)] {
            for step in [JacobiStep::Alpha, JacobiStep::Beta] {
                let g = jacobi_givens_sequence(jp(a, b), step, n).dense();
                assert!(g.sub(&jacobi_connection_dense(&jp(a, b), step, n + 1, n)).max_abs() < 1e-12);
                assert!(gram_defect(&g) <= 10.0 * n as f64 * EPS);
            }
        }
    }
}

#[test]
fn cached_and_on_the_fly_agree_bitwise() {
    let seq = sh_givens_sequence::<f64>(4, 50);
    let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
    assert_eq!(seq.apply(&v, Direction::Forward).unwrap(), seq.clone().cached().apply(&v, Direction::Forward).unwrap());
}

#[test]
fn wrong_lengths_are_rejected() {
    let seq = sh_givens_sequence::<f64>(0, 4);
    assert!(seq.apply(&[1.0; 5], Direction::Forward).is_err());
    assert!(seq.apply(&[1.0; 4], Direction::Inverse).is_err());
}

fn sequence(kind: u8, order: usize, cols: usize) -> GivensSequence<f64> {
    match kind {
        0 => sh_givens_sequence(order, cols),
        1 => jacobi_givens_sequence(jp(order as f64 * 0.5, 1.0), JacobiStep::Alpha, cols),
        _ => jacobi_givens_sequence(jp(0.5, order as f64), JacobiStep::Beta, cols),
    }
}

proptest! {
    #[test]
    fn forward_is_an_isometry_and_inverse_undoes_it(
        kind in 0u8..3,
        order in 0usize..40,
        v in prop::collection::vec(-1.0f64..1.0, 1..4096),
    ) {
        let n = v.len();
        let seq = sequence(kind, order, n);
        let fwd = seq.apply(&v, Direction::Forward).unwrap();
        let tol = 8.0 * n as f64 * EPS * norm(&v);
        prop_assert!((norm(&fwd) - norm(&v)).abs() <= tol);
        let back = seq.apply(&fwd, Direction::Inverse).unwrap();
        let err = back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= tol);
    }
}
