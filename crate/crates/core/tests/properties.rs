use proptest::prelude::*;
use uniloc::arc::{Arc, ArcSet};
use uniloc::disorder::{sample_phases, PhaseDistribution};
use uniloc::dynamics::evolve;
use uniloc::models::walk::{build_qw, coins_from_phases};
use uniloc::models::{build_anderson_d, build_band_1d, build_cmv, build_halfline, verblunsky_from_phases, Closure};
use uniloc::solve::BandLu;
use uniloc::{SiteLabel, C64};

const PI: f64 = std::f64::consts::PI;

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builders_are_unitary(t in 0.0f64..=1.0, half in 2usize..20, ph in angles(80)) {
        let n = 2 * half;
        let th = &ph[..n];
        prop_assert!(build_band_1d(t, th, Closure::Periodic).unwrap().unitarity_residual() < 1e-13);
        prop_assert!(build_band_1d(t, &ph[..n - 1], Closure::Reflecting).unwrap().unitarity_residual() < 1e-13);
        prop_assert!(build_halfline(t, &ph[..n + 1]).unwrap().unitarity_residual() < 1e-13);
        prop_assert!(build_qw(&coins_from_phases(t, &ph[..2 * n])).unwrap().unitarity_residual() < 1e-13);
        let r = (1.0 - t * t).sqrt().clamp(0.0, 0.999);
        prop_assert!(build_cmv(&verblunsky_from_phases(r, th), true).unwrap().matrix.unitarity_residual() < 1e-12);
    }

    #[test]
    fn anderson_box_is_unitary(t in 0.0f64..=1.0, ph in angles(36)) {
        prop_assert!(build_anderson_d(t, 2, 6, &ph).unwrap().unitarity_residual() < 1e-13);
    }

    #[test]
    fn band_lu_residual_is_small(
        t in 0.0f64..=1.0,
        ph in angles(24),
        rho in prop_oneof![0.0f64..0.98, 1.02f64..3.0],
        arg in -PI..PI,
        b in angles(24),
    ) {
        let u = build_band_1d(t, &ph, Closure::Periodic).unwrap();
        let z = C64::from_polar(rho, arg);
        let rhs: Vec<C64> = b.iter().map(|&p| C64::from_polar(1.0, p)).collect();
        let x = BandLu::factor(&u, z).unwrap().solve(&rhs).unwrap();
        let ax = u.shifted(z).matvec(&x).unwrap();
        let scale = 1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let res = ax.iter().zip(&rhs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(res < 1e-10 * scale, "residual {res:e}");
    }

    #[test]
    fn arc_sets_are_normalized(raw in prop::collection::vec((0.0f64..7.0, 0.0f64..3.0), 1..6), probe in angles(50)) {
        let input: Vec<Arc> = raw.iter().map(|&(s, l)| Arc::new(s, l).unwrap()).collect();
        let set = ArcSet::new(input.clone());
        prop_assert!(set.total_length() <= std::f64::consts::TAU + 1e-12);
        for w in set.arcs().windows(2) {
            prop_assert!(w[0].end() < w[1].start());
        }
        if let (Some(first), Some(last)) = (set.arcs().first(), set.arcs().last()) {
            if set.arcs().len() > 1 {
                prop_assert!(last.end() < first.start() + std::f64::consts::TAU);
            }
        }
        for &a in &probe {
            let inside = input.iter().any(|x| x.contains(a, 0.0));
            if inside {
                prop_assert!(set.contains(a, 1e-12));
            }
            if set.contains(a, 0.0) {
                prop_assert!(input.iter().any(|x| x.contains(a, 1e-9)));
            }
        }
        prop_assert_eq!(ArcSet::new(set.arcs().to_vec()), set.clone());
    }

    #[test]
    fn evolve_inverts(t in 0.0f64..=1.0, ph in angles(16), n in 0i64..200, k in 0usize..16) {
        let u = build_band_1d(t, &ph, Closure::Periodic).unwrap();
        let mut e = vec![C64::new(0.0, 0.0); 16];
        e[k] = C64::new(1.0, 0.0);
        let back = evolve(&u, &evolve(&u, &e, n).unwrap(), -n).unwrap();
        let err = back.iter().zip(&e).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
    }

    #[test]
    fn phases_stay_in_support(beta in 0.0f64..=PI, seed: u64, r in 0u64..1000) {
        let labels: Vec<SiteLabel> = (0..50).map(SiteLabel::index).collect();
        let p = sample_phases(&PhaseDistribution::Uniform { beta }, seed, r, &labels).unwrap();
        prop_assert!(p.phases.iter().all(|x| x.abs() <= beta));
    }

    #[test]
    fn sampling_is_per_site(seed: u64, r in 0u64..1000, pick in prop::collection::vec(-30i64..30, 1..10)) {
        let all: Vec<SiteLabel> = (-30..30).map(SiteLabel::index).collect();
        let full = sample_phases(&PhaseDistribution::UniformFull, seed, r, &all).unwrap();
        let sub: Vec<SiteLabel> = pick.iter().map(|&k| SiteLabel::index(k)).collect();
        let part = sample_phases(&PhaseDistribution::UniformFull, seed, r, &sub).unwrap();
        for (l, x) in sub.iter().zip(&part.phases) {
            prop_assert_eq!(full.phase_of(l), Some(*x));
        }
        prop_assert_eq!(sample_phases(&PhaseDistribution::UniformFull, seed, r, &all).unwrap(), full);
    }
}
