use hdrest_core::density::{kde_eval, BandwidthMatrix};
use hdrest_core::geometry::{boundary_sample, diameter, r_convex_hull, segment_distance, ConvexPolygon, GeometryError};
use hdrest_core::hdr::{estimate_r0, hybrid_hdr, plugin_hdr, verify_hybrid_contract, HybridConfig, PluginConfig};
use hdrest_core::metrics::{distance_in_measure, hausdorff_points, FnRegion, Rect};
use hdrest_core::simbench::MixtureModel;
use hdrest_core::{seed, Point, PointSet};
use proptest::prelude::*;
use rand::Rng;

fn point() -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Point::new(x, y))
}

fn cloud(lo: usize, hi: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(), lo..=hi)
}

fn queries(seed_value: u64, count: usize) -> Vec<Point> {
    let mut rng = seed::rng(seed_value);
    (0..count).map(|_| Point::new(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2))).collect()
}

fn disk(center: Point, radius: f64) -> FnRegion<impl Fn(Point) -> bool> {
    let boundary = (0..200)
        .map(|k| center.polar(radius, k as f64 * core::f64::consts::TAU / 200.0))
        .collect();
    FnRegion::new(move |p: Point| p.dist(center) <= radius, boundary)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hull_contains_its_generators(pts in cloud(1, 40), r in 0.02..2.0f64) {
        let hull = r_convex_hull(&PointSet::new(pts.clone()).unwrap(), r).unwrap();
        for p in pts {
            prop_assert!(hull.contains(p), "{p:?}");
        }
    }

    #[test]
    fn hull_grows_with_radius(pts in cloud(3, 30), r1 in 0.03..0.8f64, grow in 1.0..4.0f64, s in any::<u64>()) {
        let set = PointSet::new(pts).unwrap();
        let small = r_convex_hull(&set, r1).unwrap();
        let large = r_convex_hull(&set, r1 * grow).unwrap();
        for q in queries(s, 1000) {
            if small.contains(q) {
                prop_assert!(large.contains(q), "{q:?}");
            }
        }
    }

    #[test]
    fn large_radius_approaches_convex_hull(pts in cloud(3, 30), s in any::<u64>()) {
        let set = PointSet::new(pts.clone()).unwrap();
        let d = diameter(&set);
        let r = 10.0 * d;
        let hull = r_convex_hull(&set, r).unwrap();
        let flat = r_convex_hull(&set, f64::INFINITY).unwrap();
        let convex = ConvexPolygon::hull_of(&pts);
        // arcs of radius r over chords no longer than d sag by at most d^2 / 8r
        let band = d * d / (8.0 * r) + 1e-9;
        for q in queries(s, 1000) {
            prop_assert_eq!(flat.contains(q), convex.contains(q));
            let edge = convex.edges().map(|(a, b)| segment_distance(q, a, b)).fold(f64::INFINITY, f64::min);
            if edge > band {
                prop_assert_eq!(hull.contains(q), convex.contains(q), "{:?}", q);
            }
        }
    }

    #[test]
    fn boundary_sample_lies_in_hull(pts in cloud(3, 30), r in 0.05..1.0f64) {
        let hull = r_convex_hull(&PointSet::new(pts).unwrap(), r).unwrap();
        match boundary_sample(&hull, 0.01) {
            Ok(sample) => {
                for b in sample.iter() {
                    prop_assert!(hull.contains(*b), "{b:?}");
                }
            }
            Err(GeometryError::EmptyBoundary { points }) => prop_assert!(points.iter().all(|&p| hull.contains(p))),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn radius_search_separates(plus in cloud(3, 30), minus in cloud(1, 30)) {
        let (x_plus, x_minus) = (PointSet::new(plus).unwrap(), PointSet::new(minus.clone()).unwrap());
        let est = estimate_r0(&x_plus, &x_minus, None).unwrap();
        let (lo, hi) = est.bracket;
        if est.convex_fallback || hi > lo {
            let hull = r_convex_hull(&x_plus, est.radius).unwrap();
            for q in minus {
                prop_assert!(!hull.contains(q), "{q:?} at radius {}", est.radius);
            }
        }
    }

    #[test]
    fn density_is_finite_and_exchangeable(pts in cloud(2, 60), h in 0.001..0.1f64, rho in -0.9..0.9f64, s in any::<u64>()) {
        let bw = BandwidthMatrix::new(h, rho * h * 0.5, h * 0.25).unwrap();
        let set = PointSet::new(pts.clone()).unwrap();
        let mut reversed = pts.clone();
        reversed.reverse();
        reversed.rotate_left(pts.len() / 3);
        let q = PointSet::new(queries(s, 50)).unwrap();
        let a = kde_eval(&set, &bw, &q);
        let b = kde_eval(&PointSet::new(reversed).unwrap(), &bw, &q);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.is_finite() && *x >= 0.0);
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} {y}");
        }
    }

    #[test]
    fn density_is_translation_equivariant(pts in cloud(2, 60), h in 0.001..0.1f64, dx in -50.0..50.0f64, dy in -50.0..50.0f64, s in any::<u64>()) {
        let bw = BandwidthMatrix::isotropic(h).unwrap();
        let shift = |v: &[Point]| v.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect::<Vec<_>>();
        let q = queries(s, 50);
        let a = kde_eval(&PointSet::new(pts.clone()).unwrap(), &bw, &PointSet::new(q.clone()).unwrap());
        let b = kde_eval(&PointSet::new(shift(&pts)).unwrap(), &bw, &PointSet::new(shift(&q)).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-6 * x.max(1.0), "{x} {y}");
        }
    }

    #[test]
    fn hausdorff_is_a_metric(a in cloud(1, 30), b in cloud(1, 30), c in cloud(1, 30)) {
        let ab = hausdorff_points(&a, &b);
        prop_assert_eq!(ab, hausdorff_points(&b, &a));
        prop_assert_eq!(hausdorff_points(&a, &a), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(hausdorff_points(&a, &c) <= ab + hausdorff_points(&b, &c) + 1e-12);
    }

    #[test]
    fn distance_in_measure_is_symmetric_and_repeatable(
        c1 in point(), c2 in point(), r1 in 0.05..0.6f64, r2 in 0.05..0.6f64, s in any::<u64>()
    ) {
        let (a, c) = (disk(c1, r1), disk(c2, r2));
        let bbox = Rect { x_min: -1.0, x_max: 2.0, y_min: -1.0, y_max: 2.0 };
        let ac = distance_in_measure(&a, &c, bbox, 5000, s);
        let ca = distance_in_measure(&c, &a, bbox, 5000, s);
        prop_assert!(ac.value >= 0.0 && ac.std_error >= 0.0);
        prop_assert_eq!(ac, ca);
        prop_assert_eq!(ac, distance_in_measure(&a, &c, bbox, 5000, s));
        prop_assert_eq!(distance_in_measure(&a, &a, bbox, 5000, s).value, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hybrid_estimates_keep_their_contract(model in 1u8..=9, n in 150usize..400, tau in 0.2..0.9f64, s in any::<u64>()) {
        let pts = MixtureModel::catalog(model).unwrap().sample(n, s);
        let cfg = HybridConfig { bootstrap: 30, ..HybridConfig::new(tau, s) };
        let est = hybrid_hdr(&pts, &cfg).unwrap();
        prop_assert_eq!(verify_hybrid_contract(&pts, &est, cfg.step), Ok(()));
        prop_assert!(est.tau_bar > 0.0 && est.tau_bar <= tau);
        for (k, rec) in est.trace.iter().enumerate() {
            prop_assert!(rec.lower <= rec.upper, "iteration {k}");
            prop_assert!(rec.n_plus + rec.n_minus <= n);
            for (i, &f) in est.sample_density.iter().enumerate() {
                prop_assert!(!(f >= rec.upper && f < rec.lower), "point {i} in both splits");
            }
        }
        if est.converged {
            prop_assert!(est.coverage >= 1.0 - tau);
        }
        let again = hybrid_hdr(&pts, &cfg).unwrap();
        prop_assert_eq!(again.coverage, est.coverage);
        prop_assert_eq!(again.tau_bar, est.tau_bar);
        prop_assert_eq!(again.radius, est.radius);
        prop_assert_eq!(again.trace, est.trace);
    }

    #[test]
    fn plugin_estimates_are_deterministic(model in 1u8..=9, n in 100usize..600, tau in 0.1..0.9f64, s in any::<u64>()) {
        let pts = MixtureModel::catalog(model).unwrap().sample(n, s);
        let a = plugin_hdr(&pts, &PluginConfig::new(tau)).unwrap();
        let b = plugin_hdr(&pts, &PluginConfig::new(tau)).unwrap();
        prop_assert_eq!(a.thresholds, b.thresholds);
        prop_assert_eq!(a.coverage, b.coverage);
        prop_assert_eq!(a.components, b.components);
        prop_assert!(a.thresholds.level >= 0.0);
    }
}
