//! Property tests over random kernels, drivers and samples.

use ouestim::estimator::estimate;
use ouestim::stats::{ks_distance, ks_two_sample, quantiles, Reference};
use ouestim::{build_trajectory, Grid, Kernel, Path};
use proptest::prelude::*;

fn any_kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        (0.02..0.98f64).prop_map(|h| Kernel::fbm(h).unwrap()),
        (0.02..0.98f64).prop_map(|h| Kernel::sfbm(h).unwrap()),
        (0.02..0.98f64, 0.05..=1.0f64).prop_map(|(h, k)| Kernel::bifbm(h, k).unwrap()),
        Just(Kernel::bm()),
    ]
}

/// A driver path built from bounded random increments.
fn any_driver() -> impl Strategy<Value = (Path, f64)> {
    (0.5..8.0f64, prop::collection::vec(-1.0..1.0f64, 8..400), 0.1..3.0f64).prop_map(|(horizon, inc, theta)| {
        let grid = Grid::new(horizon, inc.len()).unwrap();
        let scale = grid.step().sqrt();
        let mut g = vec![0.0];
        for d in inc {
            g.push(g.last().unwrap() + scale * d);
        }
        (Path::from_values(grid, g).unwrap(), theta)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_symmetry_and_boundary(spec in any_kernel(), s in 0.0..50.0f64, t in 0.0..50.0f64) {
        prop_assert_eq!(spec.cov(s, t).unwrap(), spec.cov(t, s).unwrap());
        prop_assert_eq!(spec.cov(0.0, t).unwrap(), 0.0);
    }

    #[test]
    fn kernel_defining_split(spec in any_kernel(), s in 0.0..20.0f64, r in 0.0..20.0f64) {
        let rough = spec.roughness();
        let cov = spec.cov(s, r).unwrap();
        let rebuilt = spec.smooth_part(s, r).unwrap() - rough.coefficient * (s - r).abs().powf(rough.exponent);
        prop_assert!((cov - rebuilt).abs() <= 1e-12 * (1.0 + spec.smooth_part(s, r).unwrap().abs()));
    }

    #[test]
    fn kernel_growth_bound(spec in any_kernel(), log_t in -3.0..3.0f64) {
        let t = 10f64.powf(log_t);
        let bound = spec.growth_constant * t.powf(2.0 * spec.growth_exponent);
        prop_assert!(spec.cov(t, t).unwrap() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_cauchy_schwarz(spec in any_kernel(), s in 0.01..30.0f64, t in 0.01..30.0f64) {
        let c = spec.cov(s, t).unwrap();
        let bound = (spec.cov(s, s).unwrap() * spec.cov(t, t).unwrap()).sqrt();
        prop_assert!(c.abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_reductions(h in 0.02..0.98f64, s in 0.0..20.0f64, t in 0.0..20.0f64) {
        let fbm = Kernel::fbm(h).unwrap().cov(s, t).unwrap();
        let bi = Kernel::bifbm(h, 1.0).unwrap().cov(s, t).unwrap();
        prop_assert!((fbm - bi).abs() <= 1e-12 * (1.0 + fbm.abs()));
        let bm = Kernel::bm().cov(s, t).unwrap();
        for other in [Kernel::fbm(0.5).unwrap(), Kernel::sfbm(0.5).unwrap()] {
            prop_assert!((other.cov(s, t).unwrap() - bm).abs() <= 1e-12 * (1.0 + bm));
        }
    }

    #[test]
    fn trajectory_identity_and_representation((path, theta) in any_driver()) {
        let tr = build_trajectory(&path, theta).unwrap();
        for k in 0..tr.len() {
            let p = tr.point(k);
            let w = tr.discount(k);
            let lhs = 0.5 * tr.xi()[k] * tr.xi()[k];
            let terms = [theta * p.d, theta * w * p.z * p.psi, w * p.r_scaled];
            let scale = lhs + terms.iter().map(|x| x.abs()).sum::<f64>();
            prop_assert!((lhs - terms.iter().sum::<f64>()).abs() <= 1e-9 * (scale + f64::MIN_POSITIVE));
            let repr = tr.xi()[k] - w * path.values()[k] - theta * p.z;
            prop_assert!(repr.abs() <= 1e-12 * (1.0 + tr.xi()[k].abs() + path.values()[k].abs()));
        }
    }

    #[test]
    fn integrated_square_is_nondecreasing((path, theta) in any_driver()) {
        let tr = build_trajectory(&path, theta).unwrap();
        let unscaled: Vec<f64> = (0..tr.len()).map(|k| tr.d()[k] / (tr.discount(k) * tr.discount(k))).collect();
        prop_assert!(unscaled.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        prop_assert!(tr.d().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn estimator_scale_equivariance((path, theta) in any_driver(), c in prop_oneof![-50.0..-0.01f64, 0.01..50.0f64]) {
        let a = build_trajectory(&path, theta).unwrap();
        let b = build_trajectory(&path.scaled(c), theta).unwrap();
        let k = a.len() - 1;
        if let (Ok(x), Ok(y)) = (estimate(&a, k), estimate(&b, k)) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs());
        }
    }

    #[test]
    fn ks_distance_range_and_permutation(mut sample in prop::collection::vec(-1e3..1e3f64, 1..200), rot in 0usize..200) {
        let d = ks_distance(&sample, Reference::StandardCauchy).unwrap();
        prop_assert!(d >= 0.5 / sample.len() as f64 - 1e-15 && d <= 1.0);
        let len = sample.len();
        sample.rotate_left(rot % len);
        sample.reverse();
        prop_assert_eq!(d, ks_distance(&sample, Reference::StandardCauchy).unwrap());
    }

    #[test]
    fn ks_two_sample_symmetric(a in prop::collection::vec(-10.0..10.0f64, 1..100), b in prop::collection::vec(-10.0..10.0f64, 1..100)) {
        let d = ks_two_sample(&a, &b).unwrap();
        prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn quantiles_are_ordered(sample in prop::collection::vec(-1e6..1e6f64, 1..300)) {
        let q = quantiles(&sample, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        let min = sample.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(q[0], min);
        prop_assert_eq!(q[4], max);
    }
}
