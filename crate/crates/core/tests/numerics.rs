mod common;

use common::*;
use uniloc::arc::Arc;
use uniloc::green::green;
use uniloc::models::{build_anderson_d, build_band_1d, build_halfline, Closure};
use uniloc::poisson::{min_grid, poisson_fc, sample_on_grid};
use uniloc::solve::{resolvent_column, BandLu};
use uniloc::spectral::{eig_finite, projector_from_eig};
use uniloc::{ComplexBandMatrix, C64};

fn shifted_dense(u: &ComplexBandMatrix, z: C64) -> Dense {
    let mut a = of_band(u);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= z;
    }
    a
}

fn operators() -> Vec<ComplexBandMatrix> {
    vec![
        build_band_1d(0.5, &phases(16, 1), Closure::Periodic).unwrap(),
        build_band_1d(0.9, &phases(128, 2), Closure::Periodic).unwrap(),
        build_halfline(0.3, &phases(33, 3)).unwrap(),
        build_anderson_d(0.6, 2, 8, &phases(64, 4)).unwrap(),
    ]
}

#[test]
fn resolvent_matches_dense_elimination() {
    let zs = [c(0.3, 0.2), c(-0.9, 0.1), c(1.5, -0.4), c(0.0, 0.999)];
    for u in operators() {
        let n = u.dim();
        for &z in &zs {
            let a = shifted_dense(&u, z);
            for &l in &[0, n / 2, n - 1] {
                let mut e = vec![c(0.0, 0.0); n];
                e[l] = c(1.0, 0.0);
                let want = solve(&a, &e);
                let got = resolvent_column(&u, z, l).unwrap();
                let err = want.iter().zip(&got).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "n = {n}, z = {z}, l = {l}: {err:e}");
            }
        }
    }
}

#[test]
fn band_lu_solves_random_right_hand_side() {
    let u = build_band_1d(0.7, &phases(40, 8), Closure::Periodic).unwrap();
    let z = c(0.4, -0.5);
    let b: Vec<C64> = phases(40, 9).iter().map(|&p| C64::from_polar(1.0, p)).collect();
    let x = BandLu::factor(&u, z).unwrap().solve(&b).unwrap();
    let ax = u.shifted(z).matvec(&x).unwrap();
    let res = ax.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(res < 1e-12);
}

#[test]
fn green_at_origin_is_adjoint_entry() {
    let u = build_band_1d(0.5, &phases(12, 5), Closure::Periodic).unwrap();
    for k in 0..12 {
        for l in 0..12 {
            let g = green(&u, k, l, c(0.0, 0.0)).unwrap();
            assert!((g - u.get(l, k).conj()).norm() < 1e-13);
        }
    }
}

#[test]
fn green_of_diagonal_operator() {
    let th = phases(10, 6);
    let u = build_band_1d(0.0, &th, Closure::Periodic).unwrap();
    let z = c(0.5, 0.6);
    for k in 0..10 {
        let want = 1.0 / (C64::from_polar(1.0, -th[k]) - z);
        assert!((green(&u, k, k, z).unwrap() - want).norm() < 1e-13);
        assert_eq!(green(&u, k, (k + 1) % 10, z).unwrap().norm(), 0.0);
    }
}

#[test]
fn green_bounded_by_distance_to_circle() {
    let u = build_band_1d(0.8, &phases(32, 10), Closure::Periodic).unwrap();
    for &m in &[0.5, 0.9, 0.99, 1.01, 1.5] {
        let z = C64::from_polar(m, 0.7);
        let col = resolvent_column(&u, z, 3).unwrap();
        let bound = 1.0 / (1.0f64 - m).abs();
        assert!(col.iter().all(|g| g.norm() <= bound * (1.0 + 1e-12)));
    }
    assert!(green(&u, 0, 0, C64::from_polar(1.0, 0.2)).is_err());
}

#[test]
fn eigendecomposition_reconstructs() {
    for u in operators() {
        let n = u.dim();
        let eig = eig_finite(&u).unwrap();
        let v = &eig.vectors;
        let mut gram_err: f64 = 0.0;
        let mut rec_err: f64 = 0.0;
        let d = of_band(&u);
        for a in 0..n {
            for b in 0..n {
                let g: C64 = (0..n).map(|k| v[(k, a)].conj() * v[(k, b)]).sum();
                gram_err = gram_err.max((g - if a == b { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm());
                let r: C64 = (0..n).map(|k| v[(a, k)] * eig.values[k] * v[(b, k)].conj()).sum();
                rec_err = rec_err.max((r - d[a][b]).norm());
            }
        }
        assert!(gram_err < 1e-10, "n = {n}: {gram_err:e}");
        assert!(rec_err < 1e-10, "n = {n}: {rec_err:e}");
        assert!(eig.values.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
    }
}

#[test]
fn degenerate_spectrum_gets_orthonormal_basis() {
    // t = 1 is two decoupled shifts: every eigenvalue is doubly degenerate.
    let u = build_band_1d(1.0, &vec![0.0; 16], Closure::Periodic).unwrap();
    let eig = eig_finite(&u).unwrap();
    let v = &eig.vectors;
    for a in 0..16 {
        for b in 0..16 {
            let g: C64 = (0..16).map(|k| v[(k, a)].conj() * v[(k, b)]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((g - want).norm() < 1e-10);
        }
    }
}

#[test]
fn projectors_on_partition_sum_to_identity() {
    let u = build_band_1d(0.6, &phases(24, 12), Closure::Periodic).unwrap();
    let eig = eig_finite(&u).unwrap();
    let parts = [
        Arc::from_endpoints(-3.0, -1.0).unwrap(),
        Arc::from_endpoints(-1.0, 0.5).unwrap(),
        Arc::from_endpoints(0.5, 3.0).unwrap(),
        Arc::from_endpoints(3.0, std::f64::consts::TAU - 3.0).unwrap(),
    ];
    let mut sum = zeros(24, 24);
    for a in &parts {
        let p = projector_from_eig(&eig, a);
        for i in 0..24 {
            for j in 0..24 {
                sum[i][j] += p[(i, j)];
            }
        }
    }
    assert!(max_diff(&sum, &eye(24)) < 1e-10);
}

#[test]
fn poisson_error_shrinks_with_radius() {
    let u = build_band_1d(0.5, &phases(16, 14), Closure::Periodic).unwrap();
    let d = of_band(&u);
    let mut last = f64::INFINITY;
    for &eps in &[1e-1, 1e-2, 1e-3] {
        let r = 1.0 - eps;
        let m = min_grid(r);
        let f = poisson_fc(&u, &sample_on_grid(m, |z| z), r).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..16 {
            for j in 0..16 {
                err = err.max((f[(i, j)] - d[i][j]).norm());
            }
        }
        assert!(err < last, "eps = {eps}: {err:e} after {last:e}");
        last = err;
    }
    assert!(last < 1e-2);
}

#[test]
fn poisson_rejects_coarse_grid() {
    let u = build_band_1d(0.5, &phases(8, 1), Closure::Periodic).unwrap();
    assert!(poisson_fc(&u, &sample_on_grid(100, |z| z), 0.99).is_err());
    assert!(poisson_fc(&u, &sample_on_grid(100, |z| z), 1.0).is_err());
}
