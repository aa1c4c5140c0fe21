mod common;

use common::*;
use proptest::prelude::*;
use ris_bmm::numerics::{hermitian_eig, largest_eigenvalue, secular, solve_power_multiplier};
use ris_bmm::{CMat, CVec, C64};

fn diag(d: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| C64::from(x))))
}

fn unitary_defect(v: &CMat) -> f64 {
    (v.adjoint() * v - CMat::identity(v.ncols(), v.ncols())).norm()
}

#[test]
fn eig_of_identity() {
    let e = hermitian_eig(&CMat::identity(2, 2)).unwrap();
    assert!((e.lambda[0] - 1.0).abs() < 1e-14 && (e.lambda[1] - 1.0).abs() < 1e-14);
    assert!(unitary_defect(&e.v) < 1e-12);
}

#[test]
fn eig_of_diagonal_is_sorted_permutation() {
    let e = hermitian_eig(&diag(&[1.0, 3.0])).unwrap();
    assert_eq!(e.lambda.len(), 2);
    assert!((e.lambda[0] - 3.0).abs() < 1e-14);
    assert!((e.lambda[1] - 1.0).abs() < 1e-14);
    // leading eigenvector is ±e₂ up to phase
    assert!((e.v[(1, 0)].norm() - 1.0).abs() < 1e-12);
    assert!(e.v[(0, 0)].norm() < 1e-12);
}

#[test]
fn eig_reconstructs_random_hermitian() {
    let mut r = rng(1);
    for _ in 0..20 {
        let a = hermitian(&mut r, 4);
        let e = hermitian_eig(&a).unwrap();
        assert!((e.reconstruct() - &a).norm() < 1e-10 * a.norm().max(1.0));
        assert!(unitary_defect(&e.v) < 1e-10);
        let oracle = jacobi_eigenvalues(&a);
        for (x, y) in e.lambda.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }
}

#[test]
fn eig_rejects_non_hermitian() {
    let mut a = CMat::identity(2, 2);
    a[(0, 1)] = C64::new(1.0, 0.0);
    assert!(hermitian_eig(&a).is_err());
    assert!(hermitian_eig(&CMat::zeros(2, 3)).is_err());
}

#[test]
fn largest_eigenvalue_diagonal_and_rank_one() {
    let tol = 1e-10;
    let l = largest_eigenvalue(&diag(&[5.0, 2.0, 1.0]), tol).unwrap();
    assert!((l.value - 5.0).abs() <= 1e-8, "{}", l.value);
    let x = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
    let a = &x * x.adjoint();
    let l = largest_eigenvalue(&a, tol).unwrap();
    assert!((l.value - 3.0).abs() <= 1e-8, "{}", l.value);
}

#[test]
fn largest_eigenvalue_matches_oracle_on_random_psd() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = hpd(&mut r, 6, 0.0);
        let l = largest_eigenvalue(&a, 1e-12).unwrap();
        let top = jacobi_eigenvalues(&a)[0];
        assert!(l.value >= top - 1e-8 * a.norm());
        if l.converged {
            assert!((l.value - top).abs() <= 1e-5 * top, "{} vs {top}", l.value);
        } else {
            assert!(l.value >= top);
        }
    }
}

#[test]
fn largest_eigenvalue_of_zero_matrix() {
    let l = largest_eigenvalue(&CMat::zeros(3, 3), 1e-10).unwrap();
    assert_eq!(l.value, 0.0);
}

/// Bisection on the secular equation written out in the test, independent of
/// the library's root finder.
fn bisect_secular(lambda: &[f64], c: &[f64], p: f64) -> f64 {
    let f = |g: f64| lambda.iter().zip(c).map(|(l, c)| c / ((l + g) * (l + g))).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn power_multiplier_two_by_two_case() {
    let r = diag(&[1.0, 2.0]);
    let q = CMat::from_column_slice(2, 1, &[C64::from(2.0), C64::from(2.0)]);
    let gamma = solve_power_multiplier(&hermitian_eig(&r).unwrap(), &q, 1.0).unwrap();
    let oracle = bisect_secular(&[1.0, 2.0], &[4.0, 4.0], 1.0);
    assert!((gamma - oracle).abs() < 1e-9, "{gamma} vs {oracle}");
    assert!((gamma - 1.45).abs() < 0.01);
}

#[test]
fn power_multiplier_isotropic_case() {
    let q = CMat::from_column_slice(2, 2, &[C64::from(1.0), C64::from(1.0), C64::from(1.0), C64::from(1.0)]);
    let gamma = solve_power_multiplier(&hermitian_eig(&CMat::identity(2, 2)).unwrap(), &q, 1.0).unwrap();
    assert!((gamma - 1.0).abs() < 1e-10, "{gamma}");
}

#[test]
fn power_multiplier_ignores_zero_columns() {
    let mut r = rng(3);
    let rr = hpd(&mut r, 3, 0.1);
    let q = cmat(&mut r, 3, 2) * C64::from(10.0);
    let eig = hermitian_eig(&rr).unwrap();
    let g1 = solve_power_multiplier(&eig, &q, 1.0).unwrap();
    let q2 = q.clone().insert_column(2, C64::from(0.0));
    let g2 = solve_power_multiplier(&eig, &q2, 1.0).unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn power_multiplier_inactive_gives_zero() {
    let q = CMat::from_element(2, 1, C64::from(0.1));
    let gamma = solve_power_multiplier(&hermitian_eig(&CMat::identity(2, 2)).unwrap(), &q, 1.0).unwrap();
    assert_eq!(gamma, 0.0);
    assert!(solve_power_multiplier(&hermitian_eig(&CMat::identity(2, 2)).unwrap(), &q, -1.0).is_err());
}

fn induced_power(r: &CMat, q: &CMat, gamma: f64) -> f64 {
    let n = r.nrows();
    let w = (r + CMat::identity(n, n) * C64::from(gamma)).try_inverse().unwrap() * q;
    w.norm_squared()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplier_meets_power_exactly(seed in any::<u64>(), n in 1usize..6, k in 1usize..4, p in 0.01f64..10.0) {
        let mut r = rng(seed);
        let rr = hpd(&mut r, n, 1e-3);
        let q = cmat(&mut r, n, k) * C64::from(5.0);
        let gamma = solve_power_multiplier(&hermitian_eig(&rr).unwrap(), &q, p).unwrap();
        let pw = induced_power(&rr, &q, gamma);
        if gamma > 0.0 {
            prop_assert!((pw - p).abs() <= 1e-8 * p, "power {pw} vs {p}");
        } else {
            prop_assert!(pw <= p * (1.0 + 1e-12));
        }
    }

    #[test]
    fn largest_eigenvalue_dominates(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let a = hpd(&mut r, n, 0.0);
        let l = largest_eigenvalue(&a, 1e-10).unwrap().value;
        let shifted = CMat::identity(n, n) * C64::from(l) - &a;
        let min = *hermitian_eig(&shifted).unwrap().lambda.last().unwrap();
        prop_assert!(min >= -1e-8 * a.norm());
    }

    #[test]
    fn secular_decreases(seed in any::<u64>(), n in 1usize..6, g1 in 0.0f64..5.0, dg in 1e-3f64..5.0) {
        let mut r = rng(seed);
        let lambda: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut r) * 3.0).collect();
        let c: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut r) + 0.1).collect();
        prop_assert!(secular(&lambda, &c, g1 + dg) < secular(&lambda, &c, g1));
    }
}
