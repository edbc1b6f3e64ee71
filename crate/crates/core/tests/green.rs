mod common;

use common::*;
use std::f64::consts::TAU;
use uniloc::arc::Arc;
use uniloc::disorder::PhaseDistribution;
use uniloc::green::{dynloc_from_fm, fm_decay_scan, fractional_moment_mc, second_moment_check};
use uniloc::models::{Closure, ModelSpec};
use uniloc::stats::DecayFit;
use uniloc::C64;

fn band(t: f64, n: usize) -> ModelSpec {
    ModelSpec::Band1d { t, n, closure: Closure::Periodic, phases: PhaseDistribution::UniformFull }
}

/// Midpoint rule for `(1/2π) ∫ f(θ) dθ`.
fn circle_average(m: usize, f: impl Fn(f64) -> f64) -> f64 {
    (0..m).map(|j| f(TAU * (j as f64 + 0.5) / m as f64)).sum::<f64>() / m as f64
}

#[test]
fn off_diagonal_moment_vanishes_without_hopping() {
    let m = band(0.0, 16);
    let e = fractional_moment_mc(&m, 1, 0.5, c(0.3, 0.2), 3, 7, 20).unwrap();
    assert_eq!(e.mean, 0.0);
    let d = fractional_moment_mc(&m, 1, 0.5, c(0.3, 0.2), 3, 3, 20).unwrap();
    assert!(d.mean > 0.0);
}

#[test]
fn fm_arguments_are_checked() {
    let m = band(0.5, 16);
    assert!(fractional_moment_mc(&m, 1, 1.0, c(0.3, 0.0), 0, 1, 2).is_err());
    assert!(fractional_moment_mc(&m, 1, 0.5, c(1.0, 0.0), 0, 1, 2).is_err());
    assert!(fractional_moment_mc(&m, 1, 0.5, c(0.3, 0.0), 0, 16, 2).is_err());
}

#[test]
fn decay_scan_needs_five_far_distances() {
    let m = band(0.5, 32);
    let z = [C64::from_polar(0.9, 0.3)];
    assert!(fm_decay_scan(&m, 1, 0.5, &z, &[2, 4, 5, 6, 7], 2).is_err());
    assert!(fm_decay_scan(&m, 1, 0.5, &z, &[4, 5, 6, 7, 8], 2).is_ok());
}

#[test]
fn decay_without_hopping_is_degenerate() {
    let m = band(0.0, 32);
    let d = fm_decay_scan(&m, 1, 0.5, &[C64::from_polar(0.9, 0.3)], &[4, 5, 6, 7, 8], 4).unwrap();
    assert!(d.fit.degenerate);
    let r = dynloc_from_fm(&m, 1, &Arc::full(), &d.fit, &[4, 5, 6, 7, 8], 10, 2).unwrap();
    assert!(!r.applicable);
    assert!(r.kernel.is_none());
}

#[test]
fn dynloc_on_all_empty_arc_is_consistent() {
    let m = ModelSpec::Band1d { t: 0.0, n: 16, closure: Closure::Periodic, phases: PhaseDistribution::PointMass { at: 0.0 } };
    let fit = DecayFit { alpha: 1.0, c: 1.0, r_squared: 1.0, degenerate: false };
    let arc = Arc::from_endpoints(1.0, 2.0).unwrap();
    let r = dynloc_from_fm(&m, 1, &arc, &fit, &[4, 5, 6], 10, 3).unwrap();
    assert!(r.applicable && r.consistent);
    assert_eq!(r.kernel.unwrap().empty_arc, 3);
}

#[test]
fn second_moment_without_hopping_matches_quadrature() {
    let (s, z) = (0.5, C64::from_polar(0.7, 0.4));
    let w = 1.0 - z.norm_sqr();
    let g = |th: f64| (C64::from_polar(1.0, -th) - z).norm();
    let lhs = circle_average(200_000, |th| w / g(th).powi(2));
    let rhs = circle_average(200_000, |th| g(th).powf(-s));
    assert!((lhs - 1.0).abs() < 1e-9);
    let e = second_moment_check(&band(0.0, 16), 3, s, z, 5, 5, 4000).unwrap();
    assert!((e.lhs - lhs).abs() <= 4.0 * e.lhs_stderr, "{} ± {}", e.lhs, e.lhs_stderr);
    assert!((e.rhs - rhs).abs() <= 4.0 * e.rhs_stderr, "{} ± {} vs {rhs}", e.rhs, e.rhs_stderr);
}

#[test]
fn second_moment_ratio_is_order_one() {
    let m = band(0.5, 32);
    let ratios: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&r| second_moment_check(&m, 9, 0.5, C64::from_polar(r, 0.8), 16, 16, 200).unwrap().ratio)
        .collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lo > 0.0 && hi / lo <= 10.0, "{ratios:?}");
}

#[test]
fn second_moment_needs_interior_z() {
    let m = band(0.5, 16);
    assert!(second_moment_check(&m, 1, 0.5, c(1.2, 0.0), 0, 0, 2).is_err());
    assert!(second_moment_check(&m, 1, 0.5, c(1.0, 0.0), 0, 0, 2).is_err());
}
